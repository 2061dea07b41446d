use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use super::{greedy_build, BalancedFamily, BuildOutcome, Member, ScanOrder};
use crate::error::{Error, Result};
use crate::graph::{is_forest, EdgeId, EdgeSet, HostGraph};
use crate::params::{delta_bound, floor_bound, ScaleParams};
use crate::pattern::{enumerate_theta, Pattern, PatternCopy, ThetaCopy};

impl Member for ThetaCopy {
    type Query = EdgeSet;

    fn accepts(pattern: &Pattern) -> bool {
        matches!(pattern, Pattern::Theta { .. })
    }

    fn ledger_queries(&self, g: &HostGraph) -> Vec<EdgeSet> {
        let s = self.edges.len();
        (1u64..1 << s)
            .map(|mask| self.edges.select(mask))
            .filter(|sigma| is_forest(sigma, g).expect("theta hosts are graphs"))
            .collect()
    }

    fn contains_query(&self, q: &EdgeSet) -> bool {
        q.is_subset(&self.edges)
    }

    fn check_query(q: &EdgeSet) -> Result<()> {
        if q.is_empty() {
            Err(Error::EmptyQuery)
        } else {
            Ok(())
        }
    }

    fn cap(q: &EdgeSet, p: &ScaleParams) -> Result<u64> {
        Ok(floor_bound(delta_bound(q.len(), p)?))
    }

    fn vacuous(p: &ScaleParams) -> Result<bool> {
        let Pattern::Theta { a, b } = p.pattern else {
            return Err(Error::InvalidParameter(format!("{} is not a theta pattern", p.pattern)));
        };
        // the largest forest inside a copy is a spanning tree of it
        for j in 1..=a * (b - 1) + 1 {
            if floor_bound(delta_bound(j, p)?) == 0 {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn host_edges(&self, _g: &HostGraph) -> EdgeSet {
        self.edges.clone()
    }

    fn validate(&self, g: &HostGraph, pattern: &Pattern) -> Result<()> {
        match pattern {
            Pattern::Theta { a, b } => self.validate(g, *a, *b),
            _ => Err(Error::InvalidPattern(format!("{pattern} is not a theta pattern"))),
        }
    }

    fn edge_overloaded(family: &BalancedFamily<Self>, id: EdgeId, cap: f64) -> bool {
        f64::from(family.ledger_degree(&EdgeSet::new(vec![id]))) >= cap
    }

    fn to_copy(&self) -> PatternCopy {
        PatternCopy::Theta(self.clone())
    }
}

/// The saturated forests F: σ with d_H(σ) ≥ ⌊Δ^(|σ|)⌋, among forests
/// contained in some member.
#[derive(Clone, Debug)]
pub struct ForestLedger {
    pub entries: Vec<EdgeSet>,
    /// Some reachable ⌊Δ^(j)⌋ is zero, so every forest would count.
    pub degenerate: bool,
    by_edge: HashMap<EdgeId, Vec<usize>>,
}

impl ForestLedger {
    pub fn contains(&self, sigma: &EdgeSet) -> bool {
        self.entries.binary_search(sigma).is_ok()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn saturated_ledger_theta(fam: &BalancedFamily<ThetaCopy>, p: &ScaleParams) -> Result<ForestLedger> {
    let mut entries = Vec::new();
    for (sigma, d) in fam.sorted_ledger() {
        if u64::from(d) >= ThetaCopy::cap(sigma, p)? {
            entries.push(sigma.clone());
        }
    }
    let mut by_edge: HashMap<EdgeId, Vec<usize>> = HashMap::new();
    for (i, sigma) in entries.iter().enumerate() {
        for e in sigma.iter() {
            by_edge.entry(e).or_default().push(i);
        }
    }
    Ok(ForestLedger {
        entries,
        degenerate: ThetaCopy::vacuous(p)?,
        by_edge,
    })
}

/// L_F^(j)(S) = { σ ⊆ E(G)∖S : |σ| = j, σ ∪ τ ∈ F for some non-empty τ ⊆ S }.
pub fn link(f: &ForestLedger, s: &EdgeSet, j: usize) -> BTreeSet<EdgeSet> {
    let mut touching: Vec<usize> = s.iter().filter_map(|e| f.by_edge.get(&e)).flatten().copied().collect();
    touching.sort_unstable();
    touching.dedup();
    touching
        .into_iter()
        .map(|i| f.entries[i].difference(s))
        .filter(|sigma| sigma.len() == j)
        .collect()
}

/// Greedy search for a good family of θ_{a,b} copies, scanning every copy
/// of the pattern in `g`.
pub fn greedy_build_theta(
    g: Arc<HostGraph>,
    p: &ScaleParams,
    target: usize,
    order: ScanOrder,
) -> Result<BuildOutcome<ThetaCopy>> {
    let Pattern::Theta { a, b } = p.pattern else {
        return Err(Error::InvalidParameter(format!("{} is not a theta pattern", p.pattern)));
    };
    let candidates = enumerate_theta(&g, a, b)?;
    greedy_build(g, p.pattern.clone(), candidates, p, target, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{is_good, StopReason};
    use crate::graph::generators::{complete, cycle, path};
    use crate::params::delta_bound;

    fn params(n: usize, k: f64, delta: f64) -> ScaleParams {
        ScaleParams::default_constants(Pattern::Theta { a: 2, b: 2 }, n, k)
            .unwrap()
            .with_delta(delta)
            .unwrap()
    }

    fn k4_family() -> BalancedFamily<ThetaCopy> {
        let g = Arc::new(complete(4, 2));
        let copies = enumerate_theta(&g, 2, 2).unwrap();
        BalancedFamily::from_members(g, Pattern::Theta { a: 2, b: 2 }, copies).unwrap()
    }

    #[test]
    fn family_degree_examples() {
        let fam = k4_family();
        for id in 0..6 {
            assert_eq!(fam.degree(&EdgeSet::new(vec![id])).unwrap(), 2);
        }
        assert!(fam.degree(&EdgeSet::new(vec![])).is_err());

        let g = Arc::new(complete(4, 2));
        let empty = BalancedFamily::<ThetaCopy>::new(g.clone(), Pattern::Theta { a: 2, b: 2 }).unwrap();
        assert_eq!(empty.degree(&EdgeSet::new(vec![0, 1])).unwrap(), 0);

        let one = enumerate_theta(&g, 2, 2).unwrap().remove(0);
        let edges = one.edges.clone();
        let single = BalancedFamily::from_members(g, Pattern::Theta { a: 2, b: 2 }, vec![one]).unwrap();
        for e in edges.iter() {
            assert_eq!(single.degree(&EdgeSet::new(vec![e])).unwrap(), 1);
        }
        // non-forest queries are answered by scanning
        assert_eq!(single.degree(&edges).unwrap(), 1);
    }

    #[test]
    fn goodness_examples() {
        let fam = k4_family();
        let g = Arc::new(complete(4, 2));
        let empty = BalancedFamily::<ThetaCopy>::new(g, Pattern::Theta { a: 2, b: 2 }).unwrap();
        let tight = params(4, 0.5, 1.0);
        assert!(is_good(&empty, &tight).unwrap().pass);

        // Δ^(1) = 8·2 = 16, Δ^(2) = 4, Δ^(3) = 1
        let generous = params(4, 2.0, 1.0);
        assert!(delta_bound(3, &generous).unwrap() >= 1.0);
        assert!(is_good(&fam, &generous).unwrap().pass);

        // k = 0.9 gives Δ^(1) ≈ 1.46 < 2
        let strict = params(4, 0.9, 1.0);
        let report = is_good(&fam, &strict).unwrap();
        assert!(!report.pass);
        let v = report.violation.unwrap();
        assert_eq!((v.degree, v.cap), (2, 1));
    }

    #[test]
    fn builder_examples() {
        let p = params(6, 2.0, 1.0);
        let out = greedy_build_theta(Arc::new(path(5)), &p, 100, ScanOrder::Canonical).unwrap();
        assert!(out.family.is_empty());
        assert_eq!(out.stop, StopReason::Exhausted);

        // K5: Δ^(1) = 4³·√5 ≈ 143, Δ^(2) ≈ 17.9, Δ^(3) ≈ 2.2
        let g = Arc::new(complete(5, 2));
        let p = params(5, 4.0, 0.5);
        let out = greedy_build_theta(g.clone(), &p, 100, ScanOrder::Canonical).unwrap();
        assert_eq!(out.family.len(), 15);
        assert!(is_good(&out.family, &p).unwrap().pass);

        // Δ^(1) = 3 exactly: k³√5 = 3
        let k = (3.0 / 5f64.sqrt()).cbrt();
        let p = params(5, k, 1.0 / (k * k));
        assert_eq!(floor_bound(delta_bound(1, &p).unwrap()), 3);
        let out = greedy_build_theta(g, &p, 100, ScanOrder::Canonical).unwrap();
        assert!(!out.family.is_empty());
        for id in 0..10 {
            assert!(out.family.ledger_degree(&EdgeSet::new(vec![id])) <= 3);
        }
        assert!(is_good(&out.family, &p).unwrap().pass);
    }

    #[test]
    fn vacuous_parameters_refuse() {
        let p = params(4, 0.1, 1.0);
        let out = greedy_build_theta(Arc::new(cycle(4)), &p, 10, ScanOrder::Canonical).unwrap();
        assert_eq!(out.stop, StopReason::VacuousParameters);
        assert!(out.family.is_empty());
    }

    #[test]
    fn shuffled_order_is_deterministic() {
        let g = Arc::new(complete(6, 2));
        let k = (3.0 / 6f64.sqrt()).cbrt();
        let p = params(6, k, 1.0 / (k * k));
        let a = greedy_build_theta(g.clone(), &p, 1000, ScanOrder::Shuffled(7)).unwrap();
        let b = greedy_build_theta(g, &p, 1000, ScanOrder::Shuffled(7)).unwrap();
        assert_eq!(a.family.members(), b.family.members());
    }

    #[test]
    fn saturated_and_link() {
        let fam = k4_family();
        let p = params(4, 2.0, 1.0);
        // caps 16, 4, 1: only the 3-edge paths, each in one cycle, saturate
        let f = saturated_ledger_theta(&fam, &p).unwrap();
        assert!(!f.degenerate);
        assert_eq!(f.len(), 12);
        assert!(f.entries.iter().all(|s| s.len() == 3));
        assert!(link(&f, &EdgeSet::new(vec![]), 1).is_empty());

        let g = complete(4, 2);
        let s = EdgeSet::new(vec![0]);
        for j in 1..4 {
            let fast = link(&f, &s, j);
            let mut slow = BTreeSet::new();
            let rest: Vec<EdgeId> = (1..6).collect();
            for mask in 1u64..1 << rest.len() {
                let sigma = EdgeSet::new(rest.clone()).select(mask);
                if sigma.len() == j && f.contains(&sigma.union(&s)) && is_forest(&sigma.union(&s), &g).unwrap() {
                    slow.insert(sigma);
                }
            }
            assert_eq!(fast, slow);
        }

        let empty = BalancedFamily::<ThetaCopy>::new(fam.host().clone(), Pattern::Theta { a: 2, b: 2 }).unwrap();
        let f = saturated_ledger_theta(&empty, &p).unwrap();
        assert!(f.is_empty());
        assert!(link(&f, &EdgeSet::new(vec![0, 1]), 1).is_empty());
    }
}
