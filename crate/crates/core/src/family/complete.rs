use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use itertools::Itertools;

use super::{greedy_build, BalancedFamily, BuildOutcome, Member, ScanOrder};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, EdgeSet, HostGraph, Vertex};
use crate::params::{d_cap, floor_bound, ScaleParams};
use crate::pattern::{enumerate_rpartite, Pattern, PatternCopy, RPartiteCopy, SubTuple};

impl Member for RPartiteCopy {
    type Query = SubTuple;

    fn accepts(pattern: &Pattern) -> bool {
        matches!(pattern, Pattern::Complete(_))
    }

    fn ledger_queries(&self, _g: &HostGraph) -> Vec<SubTuple> {
        self.as_tuple().nonempty_subtuples()
    }

    fn contains_query(&self, q: &SubTuple) -> bool {
        q.is_sub_of(&self.as_tuple())
    }

    fn check_query(q: &SubTuple) -> Result<()> {
        if q.arity() == 0 || q.has_empty_part() {
            Err(Error::EmptyQuery)
        } else {
            Ok(())
        }
    }

    fn cap(q: &SubTuple, p: &ScaleParams) -> Result<u64> {
        Ok(floor_bound(d_cap(&q.sizes(), p)?))
    }

    fn vacuous(p: &ScaleParams) -> Result<bool> {
        let Pattern::Complete(profile) = &p.pattern else {
            return Err(Error::InvalidParameter(format!(
                "{} is not a complete pattern",
                p.pattern
            )));
        };
        for bvec in profile.iter().map(|&a| 1..=a).multi_cartesian_product() {
            if floor_bound(d_cap(&bvec, p)?) == 0 {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn host_edges(&self, g: &HostGraph) -> EdgeSet {
        self.transversal_edges(g).expect("members are complete in their host")
    }

    fn validate(&self, g: &HostGraph, pattern: &Pattern) -> Result<()> {
        match pattern {
            Pattern::Complete(profile) => self.validate(g, profile),
            _ => Err(Error::InvalidPattern(format!("{pattern} is not a complete pattern"))),
        }
    }

    /// `cap` is ⌊D^(1,…,1)⌋; the edge is overloaded when some ordering of its
    /// vertices as singletons reaches it.
    fn edge_overloaded(family: &BalancedFamily<Self>, id: EdgeId, cap: f64) -> bool {
        let e = &family.host().edges()[id];
        e.iter().permutations(e.len()).any(|order| {
            let q = SubTuple(order.into_iter().map(|&v| vec![v]).collect());
            f64::from(family.ledger_degree(&q)) >= cap
        })
    }

    fn to_copy(&self) -> PatternCopy {
        PatternCopy::Complete(self.clone())
    }
}

/// The saturated tuples F: d_H(S1,…,Sr) = ⌊D^(|S1|,…,|Sr|)⌋ with every part
/// non-empty, among sub-tuples of members.
#[derive(Clone, Debug)]
pub struct TupleLedger {
    pub entries: Vec<SubTuple>,
    /// Some ⌊D⌋ is zero, so tuples of degree zero would also belong to F.
    pub degenerate: bool,
    set: HashSet<SubTuple>,
    /// (i, T with one vertex v removed from part i) -> the removed vertices v.
    extensions: HashMap<(usize, SubTuple), Vec<Vertex>>,
}

impl TupleLedger {
    pub fn contains(&self, t: &SubTuple) -> bool {
        self.set.contains(t)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn saturated_ledger_complete(fam: &BalancedFamily<RPartiteCopy>, p: &ScaleParams) -> Result<TupleLedger> {
    let mut entries = Vec::new();
    for (t, d) in fam.sorted_ledger() {
        if u64::from(d) == RPartiteCopy::cap(t, p)? {
            entries.push(t.clone());
        }
    }
    let mut extensions: HashMap<(usize, SubTuple), Vec<Vertex>> = HashMap::new();
    for t in &entries {
        for (i, part) in t.parts().iter().enumerate() {
            if part.len() < 2 {
                continue;
            }
            for &v in part {
                let mut smaller = t.clone();
                smaller.0[i].retain(|&u| u != v);
                extensions.entry((i, smaller)).or_default().push(v);
            }
        }
    }
    Ok(TupleLedger {
        set: entries.iter().cloned().collect(),
        entries,
        degenerate: RPartiteCopy::vacuous(p)?,
        extensions,
    })
}

/// X_i(S1,…,Sr) for 1-based `i`: vertices v outside S1 ∪ … ∪ Sr such that
/// (S′1,…,S′i ∪ {v},…,S′r) ∈ F for some non-empty S′l ⊆ Sl.
pub fn x_set(f: &TupleLedger, tuple: &SubTuple, i: usize) -> Result<BTreeSet<Vertex>> {
    if i < 1 || i > tuple.arity() {
        return Err(Error::BoundIndex(format!(
            "part index {i} outside 1..={}",
            tuple.arity()
        )));
    }
    let mut out = BTreeSet::new();
    if tuple.has_empty_part() {
        return Ok(out);
    }
    let used = tuple.vertices();
    for sub in tuple.nonempty_subtuples() {
        if let Some(vs) = f.extensions.get(&(i - 1, sub)) {
            out.extend(vs.iter().filter(|v| used.binary_search(v).is_err()));
        }
    }
    Ok(out)
}

/// Whether `tuple` is complete in the host and none of its sub-tuples is
/// saturated, i.e. adding it to the family keeps every degree within its cap.
pub fn tuple_is_good(fam: &BalancedFamily<RPartiteCopy>, p: &ScaleParams, tuple: &SubTuple) -> Result<bool> {
    if !tuple.is_complete_in(fam.host()) {
        return Ok(false);
    }
    for q in tuple.nonempty_subtuples() {
        if u64::from(fam.ledger_degree(&q)) >= RPartiteCopy::cap(&q, p)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Chooses part A_i (1-based `i`) of a good tuple (A1,…,A_{i−1}, A_i,
/// {v_{i+1}},…,{v_r}) one vertex at a time. The pool is every vertex v for
/// which (A1,…,A_{i−1},{v},{v_{i+1}},…,{v_r}) is good; each new vertex
/// avoids X_i of the tuple built so far. Returns `None` when the pool runs
/// out.
pub fn extend_good_tuple(
    fam: &BalancedFamily<RPartiteCopy>,
    f: &TupleLedger,
    p: &ScaleParams,
    fixed: &[Vertex],
    partial: &[Vec<Vertex>],
    i: usize,
) -> Result<Option<Vec<Vertex>>> {
    let Pattern::Complete(profile) = fam.pattern() else {
        unreachable!("complete families carry complete patterns");
    };
    let r = profile.len();
    if i < 1 || i > r || partial.len() != i - 1 || fixed.len() != r - i {
        return Err(Error::ArityMismatch {
            expected: r,
            got: partial.len() + 1 + fixed.len(),
        });
    }
    let tuple_with = |part: Vec<Vertex>| {
        let mut parts = partial.to_vec();
        parts.push(part);
        parts.extend(fixed.iter().map(|&v| vec![v]));
        SubTuple::new(parts)
    };
    let mut pool = Vec::new();
    for v in 0..fam.host().n() {
        if tuple_with(Vec::new()).vertices().contains(&v) {
            continue;
        }
        if tuple_is_good(fam, p, &tuple_with(vec![v]))? {
            pool.push(v);
        }
    }
    let mut chosen: Vec<Vertex> = Vec::new();
    for _ in 0..profile[i - 1] {
        let blocked = x_set(f, &tuple_with(chosen.clone()), i)?;
        let Some(&u) = pool.iter().find(|u| !chosen.contains(u) && !blocked.contains(u)) else {
            return Ok(None);
        };
        chosen.push(u);
    }
    chosen.sort_unstable();
    Ok(Some(chosen))
}

/// Greedy search for a good family of ordered K^(r)_{a1,…,ar} copies.
pub fn greedy_build_complete(
    g: Arc<HostGraph>,
    p: &ScaleParams,
    target: usize,
    order: ScanOrder,
) -> Result<BuildOutcome<RPartiteCopy>> {
    let Pattern::Complete(profile) = &p.pattern else {
        return Err(Error::InvalidParameter(format!(
            "{} is not a complete pattern",
            p.pattern
        )));
    };
    let candidates = enumerate_rpartite(&g, profile)?;
    greedy_build(g, p.pattern.clone(), candidates, p, target, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{is_good, StopReason};
    use crate::graph::generators::{complete, complete_rpartite, cycle, path};

    fn params(pattern: Pattern, n: usize, k: f64, delta: f64) -> ScaleParams {
        ScaleParams::default_constants(pattern, n, k)
            .unwrap()
            .with_delta(delta)
            .unwrap()
    }

    fn p22(n: usize, k: f64, delta: f64) -> ScaleParams {
        params(Pattern::Complete(vec![2, 2]), n, k, delta)
    }

    #[test]
    fn builder_examples() {
        let p = p22(4, 4.0, 1.0);
        let out = greedy_build_complete(Arc::new(path(3)), &p, 10, ScanOrder::Canonical).unwrap();
        assert!(out.family.is_empty());
        assert_eq!(out.stop, StopReason::Exhausted);

        let out = greedy_build_complete(Arc::new(cycle(4)), &p, 10, ScanOrder::Canonical).unwrap();
        assert_eq!(out.family.len(), 2);
        assert!(is_good(&out.family, &p).unwrap().pass);

        // D^(1,1) = (δ k √n)(δ k²) = 3 with δ = 1, n = 4, k³ = 3/2
        let k = 1.5f64.cbrt();
        let p = p22(4, k, 1.0);
        assert_eq!(floor_bound(d_cap(&[1, 1], &p).unwrap()), 3);
        let out = greedy_build_complete(Arc::new(complete(4, 2)), &p, 10, ScanOrder::Canonical).unwrap();
        assert!(is_good(&out.family, &p).unwrap().pass);
        for u in 0..4 {
            for v in 0..4 {
                if u != v {
                    let q = SubTuple(vec![vec![u], vec![v]]);
                    assert!(out.family.ledger_degree(&q) <= 3);
                }
            }
        }
    }

    #[test]
    fn vacuous_with_small_k() {
        let p = p22(4, 0.5, 1.0);
        assert!(RPartiteCopy::vacuous(&p).unwrap());
        let out = greedy_build_complete(Arc::new(cycle(4)), &p, 10, ScanOrder::Canonical).unwrap();
        assert_eq!(out.stop, StopReason::VacuousParameters);
    }

    fn brute_x_set(
        fam: &BalancedFamily<RPartiteCopy>,
        p: &ScaleParams,
        tuple: &SubTuple,
        i: usize,
    ) -> BTreeSet<Vertex> {
        let used = tuple.vertices();
        let mut out = BTreeSet::new();
        for v in 0..fam.host().n() {
            if used.contains(&v) {
                continue;
            }
            for sub in tuple.nonempty_subtuples() {
                let mut ext = sub.clone();
                ext.0[i - 1].push(v);
                let ext = SubTuple::new(ext.0);
                let sizes = ext.sizes();
                if sizes
                    .iter()
                    .zip(fam.members()[0].parts.iter())
                    .any(|(s, a)| *s > a.len())
                {
                    continue;
                }
                let d = fam.members().iter().filter(|m| ext.is_sub_of(&m.as_tuple())).count() as u64;
                if d == floor_bound(d_cap(&sizes, p).unwrap()) {
                    out.insert(v);
                }
            }
        }
        out
    }

    #[test]
    fn x_set_matches_brute_force() {
        let g = Arc::new(complete(7, 3));
        let p = params(Pattern::Complete(vec![2, 2, 2]), 7, 1.2, 1.0);
        assert!(!RPartiteCopy::vacuous(&p).unwrap());
        let out = greedy_build_complete(g.clone(), &p, usize::MAX, ScanOrder::Shuffled(3)).unwrap();
        let fam = out.family;
        assert!(!fam.is_empty());
        let f = saturated_ledger_complete(&fam, &p).unwrap();
        assert!(!f.is_empty());
        for m in fam.members().iter().take(10) {
            for t in m.as_tuple().nonempty_subtuples() {
                for i in 1..=3 {
                    assert_eq!(x_set(&f, &t, i).unwrap(), brute_x_set(&fam, &p, &t, i));
                }
            }
        }
        assert!(x_set(&f, &SubTuple(vec![vec![0], vec![1], vec![2]]), 4).is_err());
    }

    #[test]
    fn extend_examples() {
        // nothing saturated yet: any pool vertices work
        let g = Arc::new(complete_rpartite(&[4, 4]));
        let p = p22(8, 2.0, 1.0);
        let fam = BalancedFamily::new(g.clone(), Pattern::Complete(vec![2, 2])).unwrap();
        let f = saturated_ledger_complete(&fam, &p).unwrap();
        assert!(f.is_empty());
        let part = extend_good_tuple(&fam, &f, &p, &[4], &[], 1).unwrap().unwrap();
        assert_eq!(part, vec![0, 1]);
        let part = extend_good_tuple(&fam, &f, &p, &[], &[vec![0, 1]], 2).unwrap().unwrap();
        assert_eq!(part, vec![4, 5]);

        // pool of size one
        let fam = BalancedFamily::new(Arc::new(path(1)), Pattern::Complete(vec![2, 2])).unwrap();
        let f = saturated_ledger_complete(&fam, &p).unwrap();
        assert_eq!(extend_good_tuple(&fam, &f, &p, &[1], &[], 1).unwrap(), None);
        assert!(extend_good_tuple(&fam, &f, &p, &[], &[], 1).is_err());
    }

    #[test]
    fn extended_tuples_are_good() {
        let g = Arc::new(complete(8, 3));
        let p = params(Pattern::Complete(vec![2, 2, 2]), 8, 1.2, 1.0);
        let fam = greedy_build_complete(g, &p, 40, ScanOrder::Canonical).unwrap().family;
        let f = saturated_ledger_complete(&fam, &p).unwrap();
        let mut found = 0;
        for v3 in 0..8 {
            for a1 in (0..8).filter(|&v| v != v3).combinations(2) {
                if let Some(a2) = extend_good_tuple(&fam, &f, &p, &[v3], std::slice::from_ref(&a1), 2).unwrap() {
                    let t = SubTuple::new(vec![a1.clone(), a2, vec![v3]]);
                    assert!(tuple_is_good(&fam, &p, &t).unwrap(), "{t:?}");
                    found += 1;
                }
            }
        }
        assert!(found > 0);
    }
}
