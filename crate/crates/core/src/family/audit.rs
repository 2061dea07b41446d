//! Independent re-audits of built families. The ledger recounts here share no
//! code with the incremental ledger kept by [`BalancedFamily`].

use std::collections::{BTreeSet, HashMap};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::{
    link, saturated_ledger_complete, saturated_ledger_theta, x_set, BalancedFamily, GoodnessReport, Member, Violation,
};
use crate::error::{Error, Result};
use crate::graph::{maximal_forest, EdgeId, EdgeSet, HostGraph, Vertex};
use crate::params::{d_cap, delta_bound, floor_bound, link_bound, within, x_bound, ScaleParams};
use crate::pattern::{Pattern, RPartiteCopy, SubTuple, ThetaCopy};

fn acyclic(ids: &[EdgeId], g: &HostGraph) -> bool {
    let mut parent: HashMap<Vertex, Vertex> = HashMap::new();
    fn root(parent: &mut HashMap<Vertex, Vertex>, v: Vertex) -> Vertex {
        let mut v = v;
        while let Some(&p) = parent.get(&v) {
            if p == v {
                break;
            }
            v = p;
        }
        v
    }
    for &id in ids {
        let e = &g.edges()[id];
        let (ru, rv) = (root(&mut parent, e[0]), root(&mut parent, e[1]));
        if ru == rv {
            return false;
        }
        parent.insert(ru, rv);
        parent.entry(rv).or_insert(rv);
    }
    true
}

fn subsets<T: Clone>(items: &[T]) -> impl Iterator<Item = Vec<T>> + '_ {
    (1..=items.len()).flat_map(move |size| items.iter().cloned().combinations(size))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerRecheck {
    /// The incremental ledger equals a from-scratch recount.
    pub ledger_matches: bool,
    pub good: GoodnessReport,
}

fn finish_recheck<Q: Ord + std::fmt::Debug + Clone + std::hash::Hash>(
    recount: HashMap<Q, u32>,
    ledger: &HashMap<Q, u32>,
    cap: impl Fn(&Q) -> Result<u64>,
) -> Result<LedgerRecheck> {
    let ledger_matches = &recount == ledger;
    let mut entries: Vec<_> = recount.into_iter().collect();
    entries.sort();
    let checked = entries.len();
    for (q, d) in entries {
        let c = cap(&q)?;
        if u64::from(d) > c {
            return Ok(LedgerRecheck {
                ledger_matches,
                good: GoodnessReport {
                    pass: false,
                    checked,
                    violation: Some(Violation {
                        query: format!("{q:?}"),
                        degree: u64::from(d),
                        cap: c,
                    }),
                },
            });
        }
    }
    Ok(LedgerRecheck {
        ledger_matches,
        good: GoodnessReport {
            pass: true,
            checked,
            violation: None,
        },
    })
}

/// Recounts d_H(σ) for every forest inside a member and checks it against
/// ⌊Δ^(|σ|)⌋.
pub fn recheck_theta(fam: &BalancedFamily<ThetaCopy>, p: &ScaleParams) -> Result<LedgerRecheck> {
    let g = fam.host();
    let mut recount: HashMap<EdgeSet, u32> = HashMap::new();
    for m in fam.members() {
        for sigma in subsets(m.edges.ids()) {
            if acyclic(&sigma, g) {
                *recount.entry(EdgeSet::new(sigma)).or_insert(0) += 1;
            }
        }
    }
    finish_recheck(recount, fam.ledger(), |q| Ok(floor_bound(delta_bound(q.len(), p)?)))
}

fn part_subsets(parts: &[Vec<Vertex>]) -> Vec<SubTuple> {
    parts
        .iter()
        .map(|part| subsets(part).collect::<Vec<_>>())
        .multi_cartesian_product()
        .map(SubTuple)
        .collect()
}

/// Recounts d_H(S1,…,Sr) for every non-empty sub-tuple of a member and
/// checks it against ⌊D^(|S1|,…,|Sr|)⌋.
pub fn recheck_complete(fam: &BalancedFamily<RPartiteCopy>, p: &ScaleParams) -> Result<LedgerRecheck> {
    let mut recount: HashMap<SubTuple, u32> = HashMap::new();
    for m in fam.members() {
        for t in part_subsets(&m.parts) {
            *recount.entry(t).or_insert(0) += 1;
        }
    }
    finish_recheck(recount, fam.ledger(), |q| Ok(floor_bound(d_cap(&q.sizes(), p)?)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Identity {
    pub lhs: u64,
    pub rhs: u64,
}

impl Identity {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// Σ_e d_H({e}) against ab·|H|.
pub fn handshake_theta(fam: &BalancedFamily<ThetaCopy>) -> Result<Identity> {
    let Pattern::Theta { a, b } = *fam.pattern() else {
        unreachable!("theta families carry theta patterns");
    };
    let mut lhs = 0u64;
    for id in 0..fam.host().m() {
        lhs += u64::from(fam.degree(&EdgeSet::new(vec![id]))?);
    }
    Ok(Identity {
        lhs,
        rhs: (a * b * fam.len()) as u64,
    })
}

/// Σ over ordered vertex tuples spanning an edge of d_H({v1},…,{vr}) against
/// a1···ar·|H|.
pub fn handshake_complete(fam: &BalancedFamily<RPartiteCopy>) -> Result<Identity> {
    let Pattern::Complete(profile) = fam.pattern() else {
        unreachable!("complete families carry complete patterns");
    };
    let mut lhs = 0u64;
    for e in fam.host().edges() {
        for order in e.iter().permutations(e.len()) {
            let q = SubTuple(order.into_iter().map(|&v| vec![v]).collect());
            lhs += u64::from(fam.degree(&q)?);
        }
    }
    Ok(Identity {
        lhs,
        rhs: (profile.iter().product::<usize>() * fam.len()) as u64,
    })
}

/// Every ledger entry has degree at most that of each query obtained by
/// dropping one element.
pub fn monotone_theta(fam: &BalancedFamily<ThetaCopy>) -> bool {
    fam.ledger().iter().all(|(sigma, &d)| {
        sigma.len() == 1
            || sigma
                .iter()
                .all(|e| fam.ledger_degree(&sigma.difference(&EdgeSet::new(vec![e]))) >= d)
    })
}

pub fn monotone_complete(fam: &BalancedFamily<RPartiteCopy>) -> bool {
    fam.ledger().iter().all(|(t, &d)| {
        t.parts().iter().enumerate().all(|(i, part)| {
            part.len() < 2
                || part.iter().all(|&v| {
                    let mut smaller = t.clone();
                    smaller.0[i].retain(|&u| u != v);
                    fam.ledger_degree(&smaller) >= d
                })
        })
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundAudit {
    pub checked: usize,
    /// Largest observed size/bound ratio.
    pub max_ratio: f64,
    pub violation: Option<String>,
}

impl BoundAudit {
    pub fn pass(&self) -> bool {
        self.violation.is_none()
    }

    fn record(&mut self, size: usize, bound: f64, what: impl FnOnce() -> String) {
        self.checked += 1;
        if bound > 0.0 {
            self.max_ratio = self.max_ratio.max(size as f64 / bound);
        }
        if !within(size as f64, bound) && self.violation.is_none() {
            self.violation = Some(format!("{}: size {size} > bound {bound}", what()));
        }
    }
}

/// The sets S whose links are audited: every non-empty subset of a member's
/// edges and the union of each pair of consecutive members.
pub fn audited_sets(fam: &BalancedFamily<ThetaCopy>) -> BTreeSet<EdgeSet> {
    let mut sets = BTreeSet::new();
    for m in fam.members() {
        for mask in 1u64..1 << m.edges.len() {
            sets.insert(m.edges.select(mask));
        }
    }
    for pair in fam.members().windows(2) {
        sets.insert(pair[0].edges.union(&pair[1].edges));
    }
    sets
}

/// |L_F^(j)(S)| ≤ 2^{ab+|S|+1}(δk^{b/(b−1)})^j over the audited sets and
/// 1 ≤ j ≤ ab.
pub fn audit_link_bound(fam: &BalancedFamily<ThetaCopy>, p: &ScaleParams) -> Result<BoundAudit> {
    let Pattern::Theta { a, b } = *fam.pattern() else {
        unreachable!("theta families carry theta patterns");
    };
    let f = saturated_ledger_theta(fam, p)?;
    let mut audit = BoundAudit {
        checked: 0,
        max_ratio: 0.0,
        violation: None,
    };
    for s in audited_sets(fam) {
        for j in 1..=a * b {
            let size = link(&f, &s, j).len();
            let bound = link_bound(s.len(), j, p)?;
            audit.record(size, bound, || format!("link of {:?} at j = {j}", s.ids()));
        }
    }
    Ok(audit)
}

/// |X_i(S1,…,Sr)| ≤ K·δ·k^{a1···a_{i−1}}·n^{1−1/(a_i···a_{r−1})} over every
/// non-empty sub-tuple of a member and every i.
pub fn audit_x_bound(fam: &BalancedFamily<RPartiteCopy>, p: &ScaleParams) -> Result<BoundAudit> {
    let f = saturated_ledger_complete(fam, p)?;
    let tuples: BTreeSet<SubTuple> = fam
        .members()
        .iter()
        .flat_map(|m| m.as_tuple().nonempty_subtuples())
        .collect();
    let mut audit = BoundAudit {
        checked: 0,
        max_ratio: 0.0,
        violation: None,
    };
    for t in &tuples {
        for i in 1..=t.arity() {
            let size = x_set(&f, t, i)?.len();
            let bound = x_bound(i, p)?;
            audit.record(size, bound, || format!("X_{i} of {:?}", t.parts()));
        }
    }
    Ok(audit)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionIi {
    /// Degrees are monotone and, for theta families, every σ is dominated by
    /// a maximal sub-forest within its cap.
    pub pass: bool,
    /// max over σ of d_H(σ)·k^{(1+α)(|σ|−1)}·e(G)/|H|.
    pub c: f64,
    pub argmax: Vec<EdgeId>,
    pub checked: usize,
}

/// Degrees of every non-empty host edge set inside some member.
pub fn edge_set_degrees<M: Member>(fam: &BalancedFamily<M>) -> HashMap<EdgeSet, u32> {
    let mut degrees: HashMap<EdgeSet, u32> = HashMap::new();
    for es in fam.edge_sets() {
        for mask in 1u64..1 << es.len() {
            *degrees.entry(es.select(mask)).or_insert(0) += 1;
        }
    }
    degrees
}

/// The smallest C for which d_H(σ) ≤ C·|H| / (k^{(1+α)(|σ|−1)}·e(G)) holds
/// for every σ of size 1..=e(pattern); only σ inside a member have positive
/// degree.
pub fn audit_condition_ii<M: Member>(fam: &BalancedFamily<M>, p: &ScaleParams, alpha: f64) -> Result<ConditionIi> {
    if fam.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let g = fam.host();
    let degrees = edge_set_degrees(fam);
    let mut keys: Vec<&EdgeSet> = degrees.keys().collect();
    keys.sort();
    let scale = g.m() as f64 / fam.len() as f64;
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut pass = true;
    for sigma in &keys {
        let d = degrees[*sigma];
        let c = f64::from(d) * p.k.powf((1.0 + alpha) * (sigma.len() as f64 - 1.0)) * scale;
        if c > best.0 {
            best = (c, sigma.ids().to_vec());
        }
        if sigma.len() > 1
            && sigma.iter().any(|e| {
                degrees
                    .get(&sigma.difference(&EdgeSet::new(vec![e])))
                    .copied()
                    .unwrap_or(0)
                    < d
            })
        {
            pass = false;
        }
        if let Pattern::Theta { .. } = fam.pattern() {
            let forest = maximal_forest(sigma, g)?;
            let df = degrees.get(&forest).copied().unwrap_or(0);
            if df < d || u64::from(df) > floor_bound(delta_bound(forest.len(), p)?) {
                pass = false;
            }
        }
    }
    Ok(ConditionIi {
        pass,
        c: best.0,
        argmax: best.1,
        checked: keys.len(),
    })
}
