//! Seeded random hosts and the copy-count trend table.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::generators::complete;
use crate::graph::HostGraph;
use crate::params::m_of_n;
use crate::pattern::{enumerate_rpartite, enumerate_theta, Pattern};

pub const DEFAULT_TREND_GUARD: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Density {
    /// Exactly this many edges, uniformly.
    Edges(usize),
    /// Each r-set independently with this probability.
    Prob(f64),
}

/// A uniform random r-graph on [n], deterministic per seed.
pub fn random_host(n: usize, density: Density, r: usize, seed: u64) -> Result<HostGraph> {
    let kn = complete(n, r);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids: Vec<usize> = match density {
        Density::Edges(m) => {
            if m > kn.m() {
                return Err(Error::Infeasible(format!(
                    "{m} edges requested, C({n},{r}) = {}",
                    kn.m()
                )));
            }
            sample(&mut rng, kn.m(), m).into_vec()
        }
        Density::Prob(p) => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!("probability {p} outside [0, 1]")));
            }
            (0..kn.m()).filter(|_| rng.gen_bool(p)).collect()
        }
    };
    ids.sort_unstable();
    kn.edge_subgraph(&ids)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HostSeries {
    /// K_n^(r) for each n.
    Complete { sizes: Vec<usize> },
    /// One random host per n with m = round(c·m(n)) edges (capped at C(n,r)).
    Random { sizes: Vec<usize>, c: f64, seed: u64 },
}

impl HostSeries {
    pub fn hosts(&self, pattern: &Pattern) -> Result<Vec<HostGraph>> {
        let r = pattern.uniformity();
        match self {
            HostSeries::Complete { sizes } => Ok(sizes.iter().map(|&n| complete(n, r)).collect()),
            HostSeries::Random { sizes, c, seed } => sizes
                .iter()
                .map(|&n| {
                    let cap = complete(n, r).m();
                    let m = ((c * m_of_n(pattern, n)).round() as usize).min(cap);
                    random_host(n, Density::Edges(m), r, seed.wrapping_add(n as u64))
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub n: usize,
    pub m: usize,
    pub copies: u64,
    /// m^{ab}·n^{2−a(b+1)} or m^{a1···ar}·n^{a1+…+ar−r·a1···ar}.
    pub benchmark: f64,
    /// copies / benchmark; absent when the benchmark is 0.
    pub ratio: Option<f64>,
    /// m < C·m(n).
    pub below_threshold: bool,
}

pub fn benchmark(pattern: &Pattern, n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    match pattern {
        Pattern::Theta { a, b } => m.powi((a * b) as i32) * n.powi(2 - (a * (b + 1)) as i32),
        Pattern::Complete(profile) => {
            let prod: usize = profile.iter().product();
            let sum: usize = profile.iter().sum();
            m.powi(prod as i32) * n.powi(sum as i32 - (profile.len() * prod) as i32)
        }
    }
}

/// Exact copy counts (unlabeled theta copies, ordered r-partite copies)
/// against the benchmark, one row per host.
pub fn supersat_trend(pattern: &Pattern, hosts: &[HostGraph], c: f64, guard: usize) -> Result<Vec<TrendRow>> {
    hosts
        .iter()
        .map(|g| {
            pattern.check_host(g)?;
            if g.n() > guard {
                return Err(Error::GuardExceeded {
                    what: "host vertices for exact enumeration",
                    value: g.n(),
                    limit: guard,
                });
            }
            let copies = match pattern {
                Pattern::Theta { a, b } => enumerate_theta(g, *a, *b)?.len(),
                Pattern::Complete(profile) => enumerate_rpartite(g, profile)?.len(),
            } as u64;
            let bench = benchmark(pattern, g.n(), g.m());
            Ok(TrendRow {
                n: g.n(),
                m: g.m(),
                copies,
                benchmark: bench,
                ratio: (bench > 0.0).then(|| copies as f64 / bench),
                below_threshold: (g.m() as f64) < c * m_of_n(pattern, g.n()),
            })
        })
        .collect()
}
