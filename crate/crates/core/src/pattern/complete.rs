use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use itertools::Itertools;
use rayon::prelude::*;

use super::{Pattern, RPartiteCopy};
use crate::error::{Error, Result};
use crate::graph::{HostGraph, Vertex};

struct Index {
    /// Codegree of every non-empty proper sub-multiset of an edge.
    codegree: HashMap<Vec<Vertex>, usize>,
    /// For every (r-1)-set T: the vertices w with T ∪ {w} an edge.
    link: HashMap<Vec<Vertex>, FixedBitSet>,
}

impl Index {
    fn build(g: &HostGraph) -> Self {
        let r = g.r();
        let mut codegree = HashMap::new();
        let mut link: HashMap<Vec<Vertex>, FixedBitSet> = HashMap::new();
        for e in g.edges() {
            for mask in 1u32..(1 << r) - 1 {
                let sub: Vec<Vertex> = (0..r).filter(|i| mask >> i & 1 == 1).map(|i| e[i]).collect();
                *codegree.entry(sub).or_insert(0) += 1;
            }
            for skip in 0..r {
                let key: Vec<Vertex> = (0..r).filter(|&i| i != skip).map(|i| e[i]).collect();
                link.entry(key)
                    .or_insert_with(|| FixedBitSet::with_capacity(g.n()))
                    .insert(e[skip]);
            }
        }
        Index { codegree, link }
    }

    fn codeg(&self, set: &[Vertex]) -> usize {
        let mut key = set.to_vec();
        key.sort_unstable();
        self.codegree.get(&key).copied().unwrap_or(0)
    }
}

struct Search<'a> {
    g: &'a HostGraph,
    profile: &'a [usize],
    index: Index,
}

impl Search<'_> {
    fn transversals(parts: &[Vec<Vertex>]) -> Vec<Vec<Vertex>> {
        if parts.is_empty() {
            return vec![Vec::new()];
        }
        parts
            .iter()
            .multi_cartesian_product()
            .map(|t| t.into_iter().copied().collect())
            .collect()
    }

    /// Vertices admissible for part `j` given parts 0..j.
    fn candidates(&self, chosen: &[Vec<Vertex>], used: &FixedBitSet) -> Vec<Vertex> {
        let j = chosen.len();
        let r = self.profile.len();
        let ts = Self::transversals(chosen);
        if j + 1 == r {
            let mut acc: Option<FixedBitSet> = None;
            for t in &ts {
                let mut key = t.clone();
                key.sort_unstable();
                let Some(l) = self.index.link.get(&key) else {
                    return Vec::new();
                };
                match acc.as_mut() {
                    None => acc = Some(l.clone()),
                    Some(a) => a.intersect_with(l),
                }
            }
            let mut acc = acc.expect("r >= 2 so at least one transversal");
            acc.difference_with(used);
            return acc.ones().collect();
        }
        // each completion of T ∪ {v} is a distinct edge
        let need: usize = self.profile[j + 1..].iter().product();
        (0..self.g.n())
            .filter(|&v| !used.contains(v))
            .filter(|&v| {
                ts.iter().all(|t| {
                    let mut s = t.clone();
                    s.push(v);
                    self.index.codeg(&s) >= need
                })
            })
            .collect()
    }

    fn extend(&self, chosen: &mut Vec<Vec<Vertex>>, used: &mut FixedBitSet, out: &mut Vec<RPartiteCopy>) {
        let j = chosen.len();
        if j == self.profile.len() {
            out.push(RPartiteCopy { parts: chosen.clone() });
            return;
        }
        let cands = self.candidates(chosen, used);
        for part in cands.into_iter().combinations(self.profile[j]) {
            for &v in &part {
                used.insert(v);
            }
            chosen.push(part);
            self.extend(chosen, used, out);
            let part = chosen.pop().unwrap();
            for v in part {
                used.set(v, false);
            }
        }
    }
}

/// Every ordered copy (A1, ..., Ar) of K^(r)_{a1,...,ar} in `g`, built part by
/// part; the last part is drawn from the intersection of the links of the
/// transversals of the earlier parts.
pub fn enumerate_rpartite(g: &HostGraph, profile: &[usize]) -> Result<Vec<RPartiteCopy>> {
    let pattern = Pattern::complete(profile.to_vec())?;
    if g.r() != profile.len() {
        return Err(Error::PatternHostMismatch {
            pattern: pattern.to_string(),
            r: g.r(),
        });
    }
    if g.n() < pattern.vertex_count() {
        return Ok(Vec::new());
    }
    let search = Search {
        g,
        profile,
        index: Index::build(g),
    };
    let empty = FixedBitSet::with_capacity(g.n());
    let firsts: Vec<Vec<Vertex>> = search
        .candidates(&[], &empty)
        .into_iter()
        .combinations(profile[0])
        .collect();
    let mut out: Vec<RPartiteCopy> = firsts
        .into_par_iter()
        .flat_map_iter(|first| {
            let mut used = FixedBitSet::with_capacity(g.n());
            for &v in &first {
                used.insert(v);
            }
            let mut chosen = vec![first];
            let mut found = Vec::new();
            search.extend(&mut chosen, &mut used, &mut found);
            found
        })
        .collect();
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators::{complete, complete_rpartite, cycle};

    #[test]
    fn examples() {
        let c4 = enumerate_rpartite(&cycle(4), &[2, 2]).unwrap();
        assert_eq!(c4.len(), 2);
        assert_eq!(c4[0].parts, vec![vec![0, 2], vec![1, 3]]);
        assert_eq!(c4[1].parts, vec![vec![1, 3], vec![0, 2]]);
        assert_eq!(enumerate_rpartite(&complete(4, 2), &[2, 2]).unwrap().len(), 6);
        assert!(enumerate_rpartite(&complete(3, 2), &[2, 2]).unwrap().is_empty());
        assert!(enumerate_rpartite(&complete(4, 3), &[2, 2]).is_err());
    }

    #[test]
    fn hypergraph_copies_are_complete() {
        let g = complete_rpartite(&[2, 2, 3]);
        let copies = enumerate_rpartite(&g, &[2, 2, 2]).unwrap();
        // any 2 of the 3 vertices in the big class, then any order of the parts
        assert_eq!(copies.len(), 18);
        for c in &copies {
            c.validate(&g, &[2, 2, 2]).unwrap();
        }
        let k6 = complete(6, 3);
        // 6!/(2!2!2!) ordered partitions
        assert_eq!(enumerate_rpartite(&k6, &[2, 2, 2]).unwrap().len(), 90);
    }
}
