//! The supersaturation hypergraph on E(G), its co-degree function, and a
//! single container step with exhaustive verification at small scale.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{BalancedFamily, Member};
use crate::graph::{EdgeId, EdgeSet, HostGraph};
use crate::params::{round_up, within};
use crate::pattern::{OracleHost, Pattern, PreparedPattern};

pub const DEFAULT_VERIFY_GUARD: usize = 18;
pub const DEFAULT_LEAF_GUARD: usize = 1 << 16;

/// Hypergraph with ground set E(G) and one s-set per family member.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupersatHypergraph {
    ground: usize,
    s: usize,
    hyperedges: Vec<EdgeSet>,
}

impl SupersatHypergraph {
    pub fn new(ground: usize, hyperedges: Vec<EdgeSet>) -> Result<Self> {
        if ground == 0 || hyperedges.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let s = hyperedges[0].len();
        for h in &hyperedges {
            if h.len() != s {
                return Err(Error::MixedEdgeCounts(s, h.len()));
            }
            if let Some(bad) = h.iter().find(|&id| id >= ground) {
                return Err(Error::UnknownEdge(bad));
            }
        }
        if s > 63 {
            return Err(Error::InvalidParameter(format!("uniformity {s} is too large")));
        }
        Ok(SupersatHypergraph { ground, s, hyperedges })
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn uniformity(&self) -> usize {
        self.s
    }

    pub fn hyperedges(&self) -> &[EdgeSet] {
        &self.hyperedges
    }

    pub fn len(&self) -> usize {
        self.hyperedges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hyperedges.is_empty()
    }

    pub fn degree(&self, v: EdgeId) -> usize {
        self.hyperedges.iter().filter(|h| h.contains(v)).count()
    }

    /// Δ_1..Δ_s and the average degree d = s|E|/N.
    pub fn profile(&self) -> CodegreeProfile {
        let mut max_degrees = vec![0u64; self.s];
        let mut counts: HashMap<EdgeSet, u64> = HashMap::new();
        for h in &self.hyperedges {
            for mask in 1u64..1 << self.s {
                *counts.entry(h.select(mask)).or_insert(0) += 1;
            }
        }
        for (sigma, c) in counts {
            let j = sigma.len() - 1;
            max_degrees[j] = max_degrees[j].max(c);
        }
        CodegreeProfile {
            max_degrees,
            average_degree: (self.s * self.hyperedges.len()) as f64 / self.ground as f64,
            ground: self.ground,
        }
    }
}

/// Uses the members' host edge sets as hyperedges.
pub fn build_supersat<M: Member>(g: &HostGraph, fam: &BalancedFamily<M>) -> Result<SupersatHypergraph> {
    SupersatHypergraph::new(g.m(), fam.edge_sets())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodegreeProfile {
    /// Δ_j at index j − 1.
    pub max_degrees: Vec<u64>,
    pub average_degree: f64,
    pub ground: usize,
}

impl CodegreeProfile {
    /// δ(H,τ) = (1/d)·Σ_{j=2}^{s} Δ_j / τ^{j−1}.
    pub fn evaluate(&self, tau: f64) -> Result<f64> {
        if self.average_degree.is_nan() || self.average_degree <= 0.0 {
            return Err(Error::ZeroAverageDegree);
        }
        let sum: f64 = self
            .max_degrees
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &d)| d as f64 / tau.powi(i as i32))
            .sum();
        Ok(sum / self.average_degree)
    }
}

/// δ(H,τ); values of τ ≥ 1 are allowed but logged.
pub fn codegree_fn(h: &SupersatHypergraph, tau: f64) -> Result<f64> {
    if tau >= 1.0 {
        log::warn!("co-degree function evaluated at τ = {tau} ≥ 1");
    }
    h.profile().evaluate(tau)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauChoice {
    /// 1/τ = ε²·k^{1+α}.
    Formula,
    Fixed(f64),
    /// The smallest τ ≤ 1 with δ(H,τ) ≤ ε, found by bisection.
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    pub eps: f64,
    pub alpha: f64,
    pub k: f64,
    pub tau: TauChoice,
    pub leaf_guard: usize,
}

impl StepConfig {
    pub fn new(eps: f64, alpha: f64, k: f64) -> Self {
        StepConfig {
            eps,
            alpha,
            k,
            tau: TauChoice::Formula,
            leaf_guard: DEFAULT_LEAF_GUARD,
        }
    }

    pub fn with_tau(mut self, tau: TauChoice) -> Self {
        self.tau = tau;
        self
    }
}

pub fn choose_tau(profile: &CodegreeProfile, cfg: &StepConfig) -> Result<f64> {
    let tau = match cfg.tau {
        TauChoice::Formula => 1.0 / (cfg.eps * cfg.eps * cfg.k.powf(1.0 + cfg.alpha)),
        TauChoice::Fixed(t) => t,
        TauChoice::Auto => {
            let at_one = profile.evaluate(1.0)?;
            if at_one > cfg.eps {
                return Err(Error::NoAdmissibleTau(at_one, cfg.eps));
            }
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= 0.0 || mid == lo || mid == hi {
                    break;
                }
                if profile.evaluate(mid)? <= cfg.eps {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        }
    };
    if tau.is_nan() || tau <= 0.0 || tau >= 1.0 && cfg.tau != TauChoice::Auto {
        return Err(Error::DegenerateTau(tau));
    }
    Ok(tau)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainerFamily {
    /// Sorted by fingerprint.
    pub containers: Vec<EdgeSet>,
    pub fingerprints: Vec<EdgeSet>,
    pub eps: f64,
    pub tau: f64,
    /// δ(H,τ) at the chosen τ.
    pub codegree: f64,
    /// exp(τ·ln(1/τ)·N/ε).
    pub count_bound: f64,
    /// 1 − max_U |U|/N: every container has at most (1 − ε′)·e(G) edges.
    pub shrink: f64,
    pub hypergraph: SupersatHypergraph,
}

#[derive(Clone)]
struct Node {
    /// 0 available, 1 in the fingerprint, 2 excluded.
    state: Vec<u8>,
}

struct Search<'a> {
    h: &'a SupersatHypergraph,
    /// A leaf has at most this many surviving hyperedges.
    threshold: f64,
    leaves: AtomicUsize,
    guard: usize,
}

enum Step {
    Leaf,
    Branch(EdgeId),
}

impl Search<'_> {
    fn alive<'b>(&'b self, node: &'b Node) -> impl Iterator<Item = &'b EdgeSet> + 'b {
        self.h
            .hyperedges
            .iter()
            .filter(move |e| e.iter().all(|v| node.state[v] != 2))
    }

    fn step(&self, node: &Node) -> Step {
        let alive: Vec<&EdgeSet> = self.alive(node).collect();
        if alive.len() as f64 <= self.threshold || node.state.iter().all(|&s| s != 0) {
            return Step::Leaf;
        }
        // score: (c_{s−1}, …, c_0) where c_t counts alive hyperedges through
        // v meeting the fingerprint in t elements; ties go to the smaller id
        let s = self.h.s;
        let mut scores: Vec<Vec<u32>> = vec![vec![0; s]; self.h.ground];
        for e in &alive {
            let t = e.iter().filter(|&v| node.state[v] == 1).count();
            for v in e.iter() {
                if node.state[v] == 0 {
                    scores[v][s - 1 - t] += 1;
                }
            }
        }
        let best = (0..self.h.ground)
            .filter(|&v| node.state[v] == 0)
            .max_by(|&a, &b| scores[a].cmp(&scores[b]).then(b.cmp(&a)))
            .expect("some element is available");
        Step::Branch(best)
    }

    fn take(&self, node: &Node, v: EdgeId) -> Node {
        let mut next = node.clone();
        next.state[v] = 1;
        for e in self.alive(node) {
            let missing: Vec<EdgeId> = e.iter().filter(|&u| next.state[u] != 1).collect();
            if let [u] = missing[..] {
                next.state[u] = 2;
            }
        }
        next
    }

    fn skip(&self, node: &Node, v: EdgeId) -> Node {
        let mut next = node.clone();
        next.state[v] = 2;
        next
    }

    fn leaf(&self, node: &Node) -> Result<(EdgeSet, EdgeSet)> {
        if self.leaves.fetch_add(1, Ordering::Relaxed) >= self.guard {
            return Err(Error::GuardExceeded {
                what: "container leaves",
                value: self.guard + 1,
                limit: self.guard,
            });
        }
        let fp = (0..node.state.len()).filter(|&v| node.state[v] == 1).collect();
        let container = (0..node.state.len()).filter(|&v| node.state[v] != 2).collect();
        Ok((fp, container))
    }

    fn explore(&self, node: Node) -> Result<Vec<(EdgeSet, EdgeSet)>> {
        match self.step(&node) {
            Step::Leaf => Ok(vec![self.leaf(&node)?]),
            Step::Branch(v) => {
                let (a, b) = rayon::join(
                    || self.explore(self.take(&node, v)),
                    || self.explore(self.skip(&node, v)),
                );
                let mut out = a?;
                out.extend(b?);
                Ok(out)
            }
        }
    }
}

impl ContainerFamily {
    fn search(&self) -> Search<'_> {
        Search {
            h: &self.hypergraph,
            threshold: round_up(self.eps * self.hypergraph.len() as f64),
            leaves: AtomicUsize::new(0),
            guard: usize::MAX,
        }
    }

    /// Follows the branch an independent set takes and returns the index of
    /// its container. `None` if the set is not independent.
    pub fn locate(&self, independent: &EdgeSet) -> Option<usize> {
        let search = self.search();
        let mut node = Node {
            state: vec![0; self.hypergraph.ground],
        };
        loop {
            match search.step(&node) {
                Step::Leaf => break,
                Step::Branch(v) if independent.contains(v) => node = search.take(&node, v),
                Step::Branch(v) => node = search.skip(&node, v),
            }
            if independent.iter().any(|v| node.state[v] == 2) {
                return None;
            }
        }
        let fp: EdgeSet = (0..node.state.len()).filter(|&v| node.state[v] == 1).collect();
        self.fingerprints.binary_search(&fp).ok()
    }

    pub fn len(&self) -> usize {
        self.containers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.containers.is_empty()
    }
}

/// Runs one container step on the supersaturation hypergraph of `fam`.
pub fn container_step<M: Member>(g: &HostGraph, fam: &BalancedFamily<M>, cfg: &StepConfig) -> Result<ContainerFamily> {
    container_step_on(build_supersat(g, fam)?, cfg)
}

pub fn container_step_on(h: SupersatHypergraph, cfg: &StepConfig) -> Result<ContainerFamily> {
    if cfg.eps.is_nan() || cfg.eps <= 0.0 {
        return Err(Error::InvalidParameter(format!("ε must be positive, got {}", cfg.eps)));
    }
    let profile = h.profile();
    let tau = choose_tau(&profile, cfg)?;
    let codegree = profile.evaluate(tau)?;
    if !within(codegree, cfg.eps) {
        return Err(Error::CodegreeTooHigh {
            value: codegree,
            eps: cfg.eps,
            tau,
        });
    }
    let n = h.ground as f64;
    let count_bound = (tau * (1.0 / tau).ln() * n / cfg.eps).exp();
    let search = Search {
        h: &h,
        threshold: round_up(cfg.eps * h.len() as f64),
        leaves: AtomicUsize::new(0),
        guard: cfg.leaf_guard,
    };
    let mut leaves = search.explore(Node {
        state: vec![0; h.ground],
    })?;
    leaves.sort();
    let largest = leaves.iter().map(|(_, c)| c.len()).max().unwrap_or(0);
    let (fingerprints, containers) = leaves.into_iter().unzip();
    Ok(ContainerFamily {
        containers,
        fingerprints,
        eps: cfg.eps,
        tau,
        codegree,
        count_bound,
        shrink: 1.0 - largest as f64 / n,
        hypergraph: h,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainerReport {
    pub pattern_free_subgraphs: u64,
    /// Every pattern-free subgraph lies in some container.
    pub coverage: bool,
    pub uncovered_example: Option<Vec<EdgeId>>,
    /// The located container contains the subgraph and its fingerprint is
    /// inside the subgraph.
    pub fingerprints: bool,
    /// Every container spans at most ε·|members| members.
    pub sparse_containers: bool,
    pub max_members_inside: usize,
    pub count_within_bound: bool,
    pub containers: usize,
    pub count_bound: f64,
}

impl ContainerReport {
    pub fn pass(&self) -> bool {
        self.coverage && self.fingerprints && self.sparse_containers && self.count_within_bound
    }
}

fn mask_of(set: &EdgeSet) -> u64 {
    set.iter().fold(0, |m, id| m | 1 << id)
}

/// Exhaustive check of a container family over all 2^{e(G)} subgraphs,
/// using the brute-force oracle for pattern-freeness.
pub fn verify_containers(
    cf: &ContainerFamily,
    g: &HostGraph,
    pattern: &Pattern,
    guard: usize,
) -> Result<ContainerReport> {
    if g.m() > guard.min(63) {
        return Err(Error::GuardExceeded {
            what: "host edges for exhaustive container check",
            value: g.m(),
            limit: guard.min(63),
        });
    }
    pattern.check_host(g)?;
    let prepared = PreparedPattern::new(pattern);
    let containers: Vec<u64> = cf.containers.iter().map(mask_of).collect();
    let fingerprints: Vec<u64> = cf.fingerprints.iter().map(mask_of).collect();
    let members: Vec<u64> = cf.hypergraph.hyperedges.iter().map(mask_of).collect();

    struct Sweep {
        free: u64,
        uncovered: Option<u64>,
        fingerprints: bool,
    }
    let sweep = (0u64..1 << g.m())
        .into_par_iter()
        .map(|mask| {
            let edges: Vec<Vec<usize>> = (0..g.m())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| g.edges()[i].clone())
                .collect();
            if OracleHost::from_edges(g.n(), g.r(), &edges).contains(&prepared) {
                return Sweep {
                    free: 0,
                    uncovered: None,
                    fingerprints: true,
                };
            }
            let covered = containers.iter().any(|&c| mask & !c == 0);
            let set: EdgeSet = (0..g.m()).filter(|i| mask >> i & 1 == 1).collect();
            let fp_ok = match cf.locate(&set) {
                Some(i) => mask & !containers[i] == 0 && fingerprints[i] & !mask == 0,
                None => false,
            };
            Sweep {
                free: 1,
                uncovered: (!covered).then_some(mask),
                fingerprints: fp_ok,
            }
        })
        .reduce(
            || Sweep {
                free: 0,
                uncovered: None,
                fingerprints: true,
            },
            |a, b| Sweep {
                free: a.free + b.free,
                uncovered: match (a.uncovered, b.uncovered) {
                    (Some(x), Some(y)) => Some(x.min(y)),
                    (x, y) => x.or(y),
                },
                fingerprints: a.fingerprints && b.fingerprints,
            },
        );

    let max_members_inside = containers
        .iter()
        .map(|&c| members.iter().filter(|&&m| m & !c == 0).count())
        .max()
        .unwrap_or(0);
    let sparse_containers = within(max_members_inside as f64, cf.eps * members.len() as f64);
    Ok(ContainerReport {
        pattern_free_subgraphs: sweep.free,
        coverage: sweep.uncovered.is_none(),
        uncovered_example: sweep
            .uncovered
            .map(|m| (0..g.m()).filter(|i| m >> i & 1 == 1).collect()),
        fingerprints: sweep.fingerprints,
        sparse_containers,
        max_members_inside,
        count_within_bound: within(cf.len() as f64, cf.count_bound),
        containers: cf.len(),
        count_bound: cf.count_bound,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::family::ThetaFamily;
    use crate::graph::generators::complete;
    use crate::params::approx_eq;
    use crate::pattern::enumerate_theta;

    fn full_family(n: usize) -> (Arc<HostGraph>, ThetaFamily) {
        let g = Arc::new(complete(n, 2));
        let copies = enumerate_theta(&g, 2, 2).unwrap();
        let fam = ThetaFamily::from_members(g.clone(), Pattern::Theta { a: 2, b: 2 }, copies).unwrap();
        (g, fam)
    }

    #[test]
    fn supersat_examples() {
        let (g, fam) = full_family(4);
        let h = build_supersat(&g, &fam).unwrap();
        assert_eq!((h.ground(), h.len(), h.uniformity()), (6, 3, 4));
        let total: usize = (0..6).map(|v| h.degree(v)).sum();
        assert_eq!(total, 4 * 3);

        let single = SupersatHypergraph::new(6, vec![fam.edge_sets()[0].clone()]).unwrap();
        assert_eq!(single.profile().max_degrees, vec![1, 1, 1, 1]);
        assert!(approx_eq(codegree_fn(&single, 1.0).unwrap(), 4.5));
        let full = codegree_fn(&single, 0.5).unwrap();
        // (3/2)·(2 + 4 + 8)
        assert!(approx_eq(full, 21.0));

        let empty = ThetaFamily::new(g.clone(), Pattern::Theta { a: 2, b: 2 }).unwrap();
        assert!(build_supersat(&g, &empty).is_err());
        assert!(SupersatHypergraph::new(0, vec![]).is_err());
        assert!(SupersatHypergraph::new(6, vec![EdgeSet::new(vec![0, 1]), EdgeSet::new(vec![2])]).is_err());
    }

    #[test]
    fn k5_containers_verify() {
        let (g, fam) = full_family(5);
        let cfg = StepConfig::new(0.99, 1.0 / 3.0, 1.0).with_tau(TauChoice::Auto);
        let cf = container_step(&g, &fam, &cfg).unwrap();
        assert!(cf.codegree <= 0.99 + 1e-9);
        let report = verify_containers(&cf, &g, &Pattern::Theta { a: 2, b: 2 }, DEFAULT_VERIFY_GUARD).unwrap();
        assert!(report.pass(), "{report:?}");
        for (fp, c) in cf.fingerprints.iter().zip(&cf.containers) {
            assert!(fp.is_subset(c));
        }
    }

    #[test]
    fn trivial_families_fail_as_expected() {
        let (g, fam) = full_family(5);
        let cfg = StepConfig::new(0.99, 1.0 / 3.0, 1.0).with_tau(TauChoice::Auto);
        let mut cf = container_step(&g, &fam, &cfg).unwrap();
        let all: EdgeSet = (0..10).collect();
        cf.containers = vec![all.clone()];
        cf.fingerprints = vec![EdgeSet::new(vec![])];
        let r = verify_containers(&cf, &g, &Pattern::Theta { a: 2, b: 2 }, 18).unwrap();
        assert!(r.coverage);
        assert!(!r.sparse_containers);

        cf.containers.clear();
        cf.fingerprints.clear();
        let r = verify_containers(&cf, &g, &Pattern::Theta { a: 2, b: 2 }, 18).unwrap();
        assert!(!r.coverage);
        assert_eq!(r.uncovered_example, Some(vec![]));
    }

    #[test]
    fn k4_codegree_is_too_high() {
        let (g, fam) = full_family(4);
        let cfg = StepConfig::new(0.99, 1.0 / 3.0, 1.0).with_tau(TauChoice::Auto);
        assert!(matches!(
            container_step(&g, &fam, &cfg),
            Err(Error::NoAdmissibleTau(..))
        ));
        let cfg = StepConfig::new(0.5, 1.0 / 3.0, 1.0).with_tau(TauChoice::Fixed(0.5));
        assert!(matches!(
            container_step(&g, &fam, &cfg),
            Err(Error::CodegreeTooHigh { .. })
        ));
        let cfg = StepConfig::new(0.5, 1.0 / 3.0, 1.0).with_tau(TauChoice::Fixed(1.5));
        assert!(matches!(container_step(&g, &fam, &cfg), Err(Error::DegenerateTau(_))));
    }

    #[test]
    fn verify_guard() {
        let (g, fam) = full_family(5);
        let cf = container_step(
            &g,
            &fam,
            &StepConfig::new(0.99, 1.0 / 3.0, 1.0).with_tau(TauChoice::Auto),
        )
        .unwrap();
        assert!(verify_containers(&cf, &g, &Pattern::Theta { a: 2, b: 2 }, 9).is_err());
    }
}
