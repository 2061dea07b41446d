//! Brute-force copy counting by exhaustive vertex assignment.
//!
//! Deliberately shares nothing with the fast enumerators: it reads the raw
//! edge list into its own adjacency tables and counts injective maps of the
//! pattern's vertices that send every pattern edge to a host edge.

use std::collections::HashSet;

use super::Pattern;
use crate::error::{Error, Result};
use crate::graph::{HostGraph, Vertex};

pub const DEFAULT_ORACLE_GUARD: usize = 12;

/// Host adjacency in a form private to the oracle.
pub struct OracleHost {
    n: usize,
    r: usize,
    matrix: Vec<bool>,
    hyperedges: HashSet<Vec<Vertex>>,
}

impl OracleHost {
    pub fn from_edges(n: usize, r: usize, edges: &[Vec<Vertex>]) -> Self {
        let mut matrix = vec![false; if r == 2 { n * n } else { 0 }];
        let mut hyperedges = HashSet::new();
        for e in edges {
            if r == 2 {
                matrix[e[0] * n + e[1]] = true;
                matrix[e[1] * n + e[0]] = true;
            } else {
                let mut s = e.clone();
                s.sort_unstable();
                hyperedges.insert(s);
            }
        }
        OracleHost {
            n,
            r,
            matrix,
            hyperedges,
        }
    }

    fn has(&self, vs: &[Vertex]) -> bool {
        if self.r == 2 {
            self.matrix[vs[0] * self.n + vs[1]]
        } else {
            let mut s = vs.to_vec();
            s.sort_unstable();
            self.hyperedges.contains(&s)
        }
    }

    /// Number of copies of `pattern` (unlabeled for theta, ordered tuples for
    /// complete r-partite).
    pub fn count(&self, pattern: &PreparedPattern) -> u64 {
        if self.n < pattern.v || self.r != pattern.r {
            return 0;
        }
        self.monomorphisms(pattern, u64::MAX) / pattern.symmetry
    }

    pub fn contains(&self, pattern: &PreparedPattern) -> bool {
        self.n >= pattern.v && self.r == pattern.r && self.monomorphisms(pattern, 1) > 0
    }

    fn monomorphisms(&self, p: &PreparedPattern, limit: u64) -> u64 {
        let mut image = vec![usize::MAX; p.v];
        let mut used = vec![false; self.n];
        let mut count = 0;
        self.assign(p, 0, &mut image, &mut used, &mut count, limit);
        count
    }

    fn assign(
        &self,
        p: &PreparedPattern,
        i: usize,
        image: &mut [Vertex],
        used: &mut [bool],
        count: &mut u64,
        limit: u64,
    ) {
        if *count >= limit {
            return;
        }
        if i == p.v {
            *count += 1;
            return;
        }
        for h in 0..self.n {
            if used[h] {
                continue;
            }
            image[i] = h;
            let ok = p.closing[i].iter().all(|edge| {
                let mapped: Vec<Vertex> = edge.iter().map(|&u| image[u]).collect();
                self.has(&mapped)
            });
            if ok {
                used[h] = true;
                self.assign(p, i + 1, image, used, count, limit);
                used[h] = false;
            }
        }
    }
}

/// A pattern laid out for repeated searches.
pub struct PreparedPattern {
    v: usize,
    r: usize,
    /// Pattern edges grouped by their largest vertex.
    closing: Vec<Vec<Vec<Vertex>>>,
    /// Number of self-maps identifying the same copy.
    symmetry: u64,
}

impl PreparedPattern {
    pub fn new(pattern: &Pattern) -> Self {
        let host = pattern.as_host();
        let v = host.n();
        let mut closing = vec![Vec::new(); v];
        for e in host.edges() {
            let top = *e.iter().max().unwrap();
            closing[top].push(e.clone());
        }
        let symmetry = match pattern {
            Pattern::Complete(profile) => profile.iter().map(|&a| (1..=a as u64).product::<u64>()).product(),
            Pattern::Theta { .. } => {
                let table = PreparedPattern {
                    v,
                    r: 2,
                    closing: closing.clone(),
                    symmetry: 1,
                };
                OracleHost::from_edges(v, 2, host.edges()).monomorphisms(&table, u64::MAX)
            }
        };
        PreparedPattern {
            v,
            r: pattern.uniformity(),
            closing,
            symmetry,
        }
    }
}

/// Exhaustive copy count with the default size guard.
pub fn oracle_count(g: &HostGraph, pattern: &Pattern) -> Result<u64> {
    oracle_count_with_guard(g, pattern, DEFAULT_ORACLE_GUARD)
}

pub fn oracle_count_with_guard(g: &HostGraph, pattern: &Pattern, guard: usize) -> Result<u64> {
    if g.n() > guard {
        return Err(Error::GuardExceeded {
            what: "oracle host vertices",
            value: g.n(),
            limit: guard,
        });
    }
    pattern.check_host(g)?;
    Ok(OracleHost::from_edges(g.n(), g.r(), g.edges()).count(&PreparedPattern::new(pattern)))
}
