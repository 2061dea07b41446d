//! Host graphs and r-uniform hypergraphs.
//!
//! Edges are stored as sorted vertex arrays and identified by their rank in
//! the lexicographic order of those arrays, so identifiers are stable for a
//! given edge set regardless of input order.

mod forest;
pub mod generators;
mod prune;

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use forest::{is_forest, maximal_forest};
pub use prune::{prune_min_degree, prune_overloaded_edges, Pruned};

pub type Vertex = usize;
pub type EdgeId = usize;

/// On-disk graph format: `{"n": 5, "r": 2, "edges": [[0, 1], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub r: usize,
    pub edges: Vec<Vec<Vertex>>,
}

#[derive(Clone, Debug)]
pub struct HostGraph {
    n: usize,
    r: usize,
    edges: Vec<Vec<Vertex>>,
    index: HashMap<Vec<Vertex>, EdgeId>,
    /// Per vertex: bitset over edge identifiers of incident edges.
    incident: Vec<FixedBitSet>,
    /// Per vertex: bitset over vertices sharing at least one edge.
    neighbors: Vec<FixedBitSet>,
}

impl PartialEq for HostGraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.r == other.r && self.edges == other.edges
    }
}

impl Eq for HostGraph {}

impl HostGraph {
    /// Builds a host from arbitrary edge lists. Each edge is sorted; repeated
    /// edges are dropped with a warning.
    pub fn new<I>(n: usize, r: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<Vertex>>,
    {
        if r == 0 {
            return Err(Error::InvalidParameter("uniformity r must be positive".into()));
        }
        let mut list = Vec::new();
        for mut e in edges {
            if e.len() != r {
                return Err(Error::InvalidEdge {
                    reason: format!("expected {} vertices, found {}", r, e.len()),
                    edge: e,
                });
            }
            e.sort_unstable();
            if let Some(&v) = e.iter().find(|&&v| v >= n) {
                return Err(Error::InvalidEdge {
                    reason: format!("vertex {v} out of range for n = {n}"),
                    edge: e,
                });
            }
            if e.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidEdge {
                    reason: "repeated vertex".into(),
                    edge: e,
                });
            }
            list.push(e);
        }
        list.sort_unstable();
        let before = list.len();
        list.dedup();
        if list.len() != before {
            log::warn!("dropped {} duplicate edge(s)", before - list.len());
        }
        Ok(Self::from_sorted(n, r, list))
    }

    /// `edges` must already be sorted, deduplicated and valid.
    fn from_sorted(n: usize, r: usize, edges: Vec<Vec<Vertex>>) -> Self {
        let m = edges.len();
        let mut incident = vec![FixedBitSet::with_capacity(m); n];
        let mut neighbors = vec![FixedBitSet::with_capacity(n); n];
        let mut index = HashMap::with_capacity(m);
        for (id, e) in edges.iter().enumerate() {
            for &u in e {
                incident[u].insert(id);
                for &v in e {
                    if u != v {
                        neighbors[u].insert(v);
                    }
                }
            }
            index.insert(e.clone(), id);
        }
        Self {
            n,
            r,
            edges,
            index,
            incident,
            neighbors,
        }
    }

    pub fn empty(n: usize, r: usize) -> Self {
        Self::from_sorted(n, r, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Number of edges, e(G).
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<Vertex>] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> Result<&[Vertex]> {
        self.edges.get(id).map(Vec::as_slice).ok_or(Error::UnknownEdge(id))
    }

    /// Identifier of the edge with the given vertices (any order).
    pub fn edge_id(&self, vertices: &[Vertex]) -> Option<EdgeId> {
        let mut key = vertices.to_vec();
        key.sort_unstable();
        self.index.get(&key).copied()
    }

    pub fn has_edge(&self, vertices: &[Vertex]) -> bool {
        self.edge_id(vertices).is_some()
    }

    /// Whether `u` and `v` are adjacent (graph case) or share an edge.
    pub fn adjacent(&self, u: Vertex, v: Vertex) -> bool {
        u < self.n && self.neighbors[u].contains(v)
    }

    pub fn neighbors(&self, v: Vertex) -> &FixedBitSet {
        &self.neighbors[v]
    }

    pub fn incident(&self, v: Vertex) -> &FixedBitSet {
        &self.incident[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.incident[v].count_ones(..)
    }

    /// Number of edges containing every vertex of `vs`. An empty list gives
    /// e(G); a full edge gives 0 or 1.
    pub fn codegree(&self, vs: &[Vertex]) -> Result<usize> {
        if vs.len() > self.r {
            return Err(Error::TooManyVertices {
                len: vs.len(),
                r: self.r,
            });
        }
        for (i, &v) in vs.iter().enumerate() {
            if v >= self.n {
                return Err(Error::InvalidParameter(format!("vertex {v} out of range")));
            }
            if vs[..i].contains(&v) {
                return Err(Error::DuplicateVertex(v));
            }
        }
        let Some((&first, rest)) = vs.split_first() else {
            return Ok(self.m());
        };
        let mut acc = self.incident[first].clone();
        for &v in rest {
            acc.intersect_with(&self.incident[v]);
        }
        Ok(acc.count_ones(..))
    }

    /// The spanning subgraph keeping only the listed edge identifiers.
    pub fn edge_subgraph(&self, keep: &[EdgeId]) -> Result<HostGraph> {
        let mut ids = keep.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let mut edges = Vec::with_capacity(ids.len());
        for id in ids {
            edges.push(self.edge(id)?.to_vec());
        }
        Ok(Self::from_sorted(self.n, self.r, edges))
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n: self.n,
            r: self.r,
            edges: self.edges.clone(),
        }
    }
}

impl TryFrom<GraphJson> for HostGraph {
    type Error = Error;

    fn try_from(g: GraphJson) -> Result<Self> {
        HostGraph::new(g.n, g.r, g.edges)
    }
}

impl Serialize for HostGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for HostGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = GraphJson::deserialize(d)?;
        HostGraph::try_from(raw).map_err(serde::de::Error::custom)
    }
}

/// A set of edge identifiers, kept sorted and duplicate-free.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeSet(Vec<EdgeId>);

impl EdgeSet {
    pub fn new(mut ids: Vec<EdgeId>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        Self(ids)
    }

    /// Builds the set and checks every identifier against `g`.
    pub fn checked(ids: Vec<EdgeId>, g: &HostGraph) -> Result<Self> {
        if let Some(&bad) = ids.iter().find(|&&id| id >= g.m()) {
            return Err(Error::UnknownEdge(bad));
        }
        Ok(Self::new(ids))
    }

    pub fn ids(&self) -> &[EdgeId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: EdgeId) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        is_sorted_subset(&self.0, &other.0)
    }

    /// Subset selected by the bits of `mask` (bit i picks the i-th smallest id).
    pub fn select(&self, mask: u64) -> EdgeSet {
        EdgeSet(
            self.0
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &id)| id)
                .collect(),
        )
    }

    pub fn union(&self, other: &EdgeSet) -> EdgeSet {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        EdgeSet::new(v)
    }

    pub fn difference(&self, other: &EdgeSet) -> EdgeSet {
        EdgeSet(self.0.iter().copied().filter(|id| !other.contains(*id)).collect())
    }

    pub fn intersection(&self, other: &EdgeSet) -> EdgeSet {
        EdgeSet(self.0.iter().copied().filter(|id| other.contains(*id)).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.0.iter().copied()
    }

    pub fn into_vec(self) -> Vec<EdgeId> {
        self.0
    }
}

impl FromIterator<EdgeId> for EdgeSet {
    fn from_iter<T: IntoIterator<Item = EdgeId>>(iter: T) -> Self {
        EdgeSet::new(iter.into_iter().collect())
    }
}

/// Subset test for two ascending slices.
pub(crate) fn is_sorted_subset<T: Ord>(small: &[T], big: &[T]) -> bool {
    let mut it = big.iter();
    'outer: for x in small {
        for y in it.by_ref() {
            match y.cmp(x) {
                std::cmp::Ordering::Less => continue,
                std::cmp::Ordering::Equal => continue 'outer,
                std::cmp::Ordering::Greater => return false,
            }
        }
        return false;
    }
    true
}
