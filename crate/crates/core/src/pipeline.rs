//! Iterated container steps over a geometric density schedule, and the
//! exhaustive counter the resulting bounds are checked against.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::container::{container_step, StepConfig, TauChoice, DEFAULT_LEAF_GUARD};
use crate::error::{Error, Result};
use crate::family::{AnyFamily, ScanOrder, StopReason};
use crate::graph::generators::complete;
use crate::graph::{EdgeSet, HostGraph};
use crate::params::{m_of_n, within, ScaleParams, REL_TOL};
use crate::pattern::{enumerate_rpartite, enumerate_theta, OracleHost, Pattern, PreparedPattern};

pub const DEFAULT_COUNT_GUARD: usize = 24;
pub const DEFAULT_MAX_LEVELS: usize = 10_000;

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

mod decimal {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// k(1) = C(n,r)/m(n), k(i) = (1−ε)·k(i−1), stopping at the first k(t) ≤ k0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub ks: Vec<f64>,
    pub ratio: f64,
    pub k0: f64,
    pub m_n: f64,
}

impl Schedule {
    pub fn new(n: usize, pattern: &Pattern, eps: f64, k0: f64, max_levels: usize) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!("ε must lie in (0, 1), got {eps}")));
        }
        if !k0.is_finite() || k0 <= 0.0 {
            return Err(Error::InvalidParameter(format!("k0 must be positive, got {k0}")));
        }
        let r = pattern.uniformity();
        let m_n = m_of_n(pattern, n);
        let total = binomial(n, r).to_string().parse::<f64>().unwrap_or(f64::INFINITY);
        let mut ks = vec![total / m_n];
        while *ks.last().unwrap() > k0 {
            if ks.len() >= max_levels {
                return Err(Error::GuardExceeded {
                    what: "schedule length",
                    value: ks.len() + 1,
                    limit: max_levels,
                });
            }
            let next = ks.last().unwrap() * (1.0 - eps);
            ks.push(next);
        }
        Ok(Schedule {
            ks,
            ratio: 1.0 - eps,
            k0,
            m_n,
        })
    }

    /// The number t of levels.
    pub fn len(&self) -> usize {
        self.ks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ks.is_empty()
    }

    /// k(i) for 1 ≤ i ≤ t.
    pub fn k(&self, i: usize) -> f64 {
        self.ks[i - 1]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub pattern: Pattern,
    pub n: usize,
    pub eps: f64,
    pub k0: f64,
    /// δ for every per-container family.
    pub delta: f64,
    /// Density parameter for the per-container families; e(G)/m(n) when absent.
    pub family_k: Option<f64>,
    /// Family size target; unlimited when absent.
    pub target: Option<usize>,
    pub order: ScanOrder,
    pub tau: TauChoice,
    pub leaf_guard: usize,
    pub max_levels: usize,
}

impl PipelineConfig {
    pub fn new(pattern: Pattern, n: usize, eps: f64, k0: f64, delta: f64) -> Self {
        PipelineConfig {
            pattern,
            n,
            eps,
            k0,
            delta,
            family_k: None,
            target: None,
            order: ScanOrder::Canonical,
            tau: TauChoice::Auto,
            leaf_guard: DEFAULT_LEAF_GUARD,
            max_levels: DEFAULT_MAX_LEVELS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    /// Index of the parent in the previous level.
    pub parent: usize,
    pub parent_edges: usize,
    pub members: usize,
    pub tau: f64,
    pub codegree: f64,
    pub children: usize,
    pub shrink: f64,
    pub max_child_edges: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: usize,
    pub k: f64,
    pub containers: usize,
    pub expanded: usize,
    pub carried: usize,
    pub max_edges: usize,
    #[serde(with = "decimal")]
    pub bound: BigUint,
    pub expansions: Vec<Expansion>,
}

/// C_0 = {K_n^(r)}, C_1, …; containers are sets of edge ids of K_n^(r).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainerTree {
    pub levels: Vec<Vec<EdgeSet>>,
    pub stats: Vec<LevelStats>,
}

impl ContainerTree {
    pub fn last(&self) -> &[EdgeSet] {
        self.levels.last().expect("C_0 is always present")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halt {
    pub level: usize,
    pub container: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub schedule: Schedule,
    pub tree: ContainerTree,
    /// Set when a level could not pass the co-degree check; the tree then
    /// stops at the last completed level.
    pub halted: Option<Halt>,
    /// Σ_{G ∈ last level} 2^{e(G)}.
    #[serde(with = "decimal")]
    pub bound: BigUint,
    pub sparse_threshold: usize,
    /// Σ_{G ∈ last level} Σ_{1 ≤ i ≤ m(n)/k0³} C(e(G), i).
    #[serde(with = "decimal")]
    pub sparse_bound: BigUint,
}

impl PipelineResult {
    pub fn complete(&self) -> bool {
        self.halted.is_none()
    }
}

pub fn power_bound(containers: &[EdgeSet]) -> BigUint {
    containers.iter().map(|c| BigUint::from(1u32) << c.len()).sum()
}

pub fn sparse_bound(containers: &[EdgeSet], threshold: usize) -> BigUint {
    containers
        .iter()
        .map(|c| {
            (1..=threshold.min(c.len()))
                .map(|i| binomial(c.len(), i))
                .sum::<BigUint>()
        })
        .sum()
}

fn has_copy(g: &HostGraph, pattern: &Pattern) -> Result<bool> {
    Ok(match pattern {
        Pattern::Theta { a, b } => !enumerate_theta(g, *a, *b)?.is_empty(),
        Pattern::Complete(profile) => !enumerate_rpartite(g, profile)?.is_empty(),
    })
}

enum Outcome {
    Carried(EdgeSet),
    Expanded(Vec<EdgeSet>, Expansion),
    Halted(String),
}

fn expand(kn: &HostGraph, parent: &EdgeSet, idx: usize, level: usize, cfg: &PipelineConfig) -> Result<Outcome> {
    let g = Arc::new(kn.edge_subgraph(parent.ids())?);
    let mut p = ScaleParams::for_host(cfg.pattern.clone(), &g, Some(cfg.delta))?;
    if let Some(k) = cfg.family_k {
        p = p.with_k(k)?;
    }
    let (fam, summary) = AnyFamily::build(g.clone(), &p, cfg.target.unwrap_or(usize::MAX), cfg.order)?;
    if summary.stop == StopReason::VacuousParameters {
        if !has_copy(&g, &cfg.pattern)? {
            return Ok(Outcome::Carried(parent.clone()));
        }
        return Err(Error::PipelineAborted {
            level,
            container: idx,
            reason: format!(
                "family builder refused: a degree cap floors to 0 (k = {}, δ = {})",
                p.k, p.delta
            ),
        });
    }
    if fam.is_empty() {
        return Ok(Outcome::Carried(parent.clone()));
    }
    let step = StepConfig {
        eps: cfg.eps,
        alpha: cfg.pattern.alpha(),
        k: p.k,
        tau: cfg.tau,
        leaf_guard: cfg.leaf_guard,
    };
    let stepped = match &fam {
        AnyFamily::Theta(f) => container_step(&g, f, &step),
        AnyFamily::Complete(f) => container_step(&g, f, &step),
    };
    let cf = match stepped {
        Ok(cf) => cf,
        Err(e @ (Error::CodegreeTooHigh { .. } | Error::NoAdmissibleTau(..) | Error::DegenerateTau(_))) => {
            return Ok(Outcome::Halted(format!("{} members: {e}", fam.len())))
        }
        Err(e) => return Err(e),
    };
    let ids = parent.ids();
    let children: Vec<EdgeSet> = cf
        .containers
        .iter()
        .map(|c| c.iter().map(|i| ids[i]).collect())
        .collect();
    let expansion = Expansion {
        parent: idx,
        parent_edges: parent.len(),
        members: fam.len(),
        tau: cf.tau,
        codegree: cf.codegree,
        children: children.len(),
        shrink: cf.shrink,
        max_child_edges: children.iter().map(EdgeSet::len).max().unwrap_or(0),
    };
    Ok(Outcome::Expanded(children, expansion))
}

/// Runs the schedule from C_0 = {K_n^(r)}. Each container with at least
/// k(i)·m(n) edges gets a freshly built family and is replaced by the
/// containers of one step; sparser ones are carried over.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineResult> {
    cfg.pattern.validate()?;
    let schedule = Schedule::new(cfg.n, &cfg.pattern, cfg.eps, cfg.k0, cfg.max_levels)?;
    let kn = complete(cfg.n, cfg.pattern.uniformity());
    let mut tree = ContainerTree {
        levels: vec![vec![(0..kn.m()).collect()]],
        stats: Vec::new(),
    };
    let mut halted = None;
    for level in 1..=schedule.len() {
        let k = schedule.k(level);
        let threshold = k * schedule.m_n * (1.0 - REL_TOL);
        let previous = tree.last();
        let outcomes: Vec<Result<Outcome>> = previous
            .par_iter()
            .enumerate()
            .map(|(idx, parent)| {
                if (parent.len() as f64) < threshold {
                    Ok(Outcome::Carried(parent.clone()))
                } else {
                    expand(&kn, parent, idx, level, cfg)
                }
            })
            .collect();
        let mut next = BTreeSet::new();
        let mut expansions = Vec::new();
        let mut carried = 0;
        for (idx, outcome) in outcomes.into_iter().enumerate() {
            match outcome? {
                Outcome::Carried(c) => {
                    carried += 1;
                    next.insert(c);
                }
                Outcome::Expanded(children, e) => {
                    next.extend(children);
                    expansions.push(e);
                }
                Outcome::Halted(reason) => {
                    halted.get_or_insert(Halt {
                        level,
                        container: idx,
                        reason,
                    });
                }
            }
        }
        if halted.is_some() {
            log::warn!("pipeline halted at level {level}; reporting level {}", level - 1);
            break;
        }
        let next: Vec<EdgeSet> = next.into_iter().collect();
        tree.stats.push(LevelStats {
            level,
            k,
            containers: next.len(),
            expanded: expansions.len(),
            carried,
            max_edges: next.iter().map(EdgeSet::len).max().unwrap_or(0),
            bound: power_bound(&next),
            expansions,
        });
        tree.levels.push(next);
    }
    let last = tree.last();
    let bound = power_bound(last);
    let raw = schedule.m_n / cfg.k0.powi(3);
    let sparse_threshold = if raw.is_finite() {
        (raw * (1.0 + REL_TOL)).floor() as usize
    } else {
        usize::MAX
    };
    let sparse = sparse_bound(last, sparse_threshold);
    Ok(PipelineResult {
        schedule,
        tree,
        halted,
        bound,
        sparse_threshold,
        sparse_bound: sparse,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeCount {
    pub n: usize,
    pub pattern: Pattern,
    pub count: u64,
    /// Pattern-free graphs by number of edges.
    pub by_edges: BTreeMap<usize, u64>,
}

fn check_count_guard(n: usize, pattern: &Pattern, guard: usize) -> Result<HostGraph> {
    pattern.validate()?;
    let kn = complete(n, pattern.uniformity());
    let limit = guard.min(40);
    if kn.m() > limit {
        return Err(Error::GuardExceeded {
            what: "C(n, r) for an exhaustive sweep",
            value: kn.m(),
            limit,
        });
    }
    Ok(kn)
}

fn free_masks<'a>(kn: &'a HostGraph, pattern: &Pattern) -> impl ParallelIterator<Item = u64> + 'a {
    let prepared = PreparedPattern::new(pattern);
    (0u64..1 << kn.m()).into_par_iter().filter(move |&mask| {
        let edges: Vec<Vec<usize>> = (0..kn.m())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| kn.edges()[i].clone())
            .collect();
        !OracleHost::from_edges(kn.n(), kn.r(), &edges).contains(&prepared)
    })
}

/// Counts labeled pattern-free r-graphs on [n] by sweeping all 2^{C(n,r)}
/// edge sets through the brute-force oracle.
pub fn brute_force_free_count(n: usize, pattern: &Pattern, guard: usize) -> Result<FreeCount> {
    let kn = check_count_guard(n, pattern, guard)?;
    let by_edges = free_masks(&kn, pattern)
        .fold(BTreeMap::new, |mut acc, mask| {
            *acc.entry(mask.count_ones() as usize).or_insert(0u64) += 1;
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    Ok(FreeCount {
        n,
        pattern: pattern.clone(),
        count: by_edges.values().sum(),
        by_edges,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub free_graphs: u64,
    pub covered: bool,
    /// Smallest uncovered pattern-free edge set, as edge ids of K_n^(r).
    pub uncovered_example: Option<Vec<usize>>,
}

/// Checks that every pattern-free r-graph on [n] lies inside one of the
/// given containers (edge ids of K_n^(r)).
pub fn check_coverage(n: usize, pattern: &Pattern, containers: &[EdgeSet], guard: usize) -> Result<CoverageReport> {
    let kn = check_count_guard(n, pattern, guard)?;
    let masks: Vec<u64> = containers
        .iter()
        .map(|c| {
            c.iter().try_fold(0u64, |m, id| {
                if id < kn.m() {
                    Ok(m | 1 << id)
                } else {
                    Err(Error::UnknownEdge(id))
                }
            })
        })
        .collect::<Result<_>>()?;
    let (free, uncovered) = free_masks(&kn, pattern)
        .map(|mask| {
            let inside = masks.iter().any(|&c| mask & !c == 0);
            (1u64, (!inside).then_some(mask))
        })
        .reduce(
            || (0, None),
            |a, b| {
                let u = match (a.1, b.1) {
                    (Some(x), Some(y)) => Some(x.min(y)),
                    (x, y) => x.or(y),
                };
                (a.0 + b.0, u)
            },
        );
    Ok(CoverageReport {
        free_graphs: free,
        covered: uncovered.is_none(),
        uncovered_example: uncovered.map(|m| (0..kn.m()).filter(|i| m >> i & 1 == 1).collect()),
    })
}

/// Whether every expansion kept its children within (1 − ε′)·e(parent).
pub fn shrinkage_holds(tree: &ContainerTree) -> bool {
    tree.stats
        .iter()
        .flat_map(|s| &s.expansions)
        .all(|e| within(e.max_child_edges as f64, (1.0 - e.shrink) * e.parent_edges as f64))
}
