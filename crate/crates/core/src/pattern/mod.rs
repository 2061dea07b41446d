//! Pattern specifications, copies of patterns inside a host, and their
//! enumeration.
//!
//! Theta copies are unlabeled subgraphs: one copy per edge set. Complete
//! r-partite copies are ordered tuples of parts, so `(A, B)` and `(B, A)` are
//! distinct copies whenever both are present.

mod complete;
pub mod oracle;
mod theta;

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{is_sorted_subset, EdgeSet, HostGraph, Vertex};

pub use complete::enumerate_rpartite;
pub use oracle::{oracle_count, oracle_count_with_guard, OracleHost, PreparedPattern, DEFAULT_ORACLE_GUARD};
pub use theta::enumerate_theta;

/// θ_{a,b} or K^(r)_{a1,...,ar}. Textual form: `theta:a,b` or
/// `complete:a1,...,ar`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    Theta { a: usize, b: usize },
    Complete(Vec<usize>),
}

impl Pattern {
    pub fn theta(a: usize, b: usize) -> Result<Self> {
        let p = Pattern::Theta { a, b };
        p.validate()?;
        Ok(p)
    }

    pub fn complete(profile: Vec<usize>) -> Result<Self> {
        let p = Pattern::Complete(profile);
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Pattern::Theta { a, b } => {
                if *a < 2 || *b < 2 {
                    return Err(Error::InvalidPattern(format!("theta needs a, b >= 2, got {a},{b}")));
                }
            }
            Pattern::Complete(profile) => {
                if profile.len() < 2 {
                    return Err(Error::InvalidPattern("complete pattern needs r >= 2 parts".into()));
                }
                if profile[0] < 2 || profile.windows(2).any(|w| w[0] > w[1]) {
                    return Err(Error::InvalidPattern(format!(
                        "profile must satisfy 2 <= a1 <= ... <= ar, got {profile:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Uniformity of hosts this pattern lives in.
    pub fn uniformity(&self) -> usize {
        match self {
            Pattern::Theta { .. } => 2,
            Pattern::Complete(p) => p.len(),
        }
    }

    /// e(pattern): ab or a1···ar.
    pub fn edge_count(&self) -> usize {
        match self {
            Pattern::Theta { a, b } => a * b,
            Pattern::Complete(p) => p.iter().product(),
        }
    }

    /// v(pattern): a(b-1)+2 or a1+...+ar.
    pub fn vertex_count(&self) -> usize {
        match self {
            Pattern::Theta { a, b } => a * (b - 1) + 2,
            Pattern::Complete(p) => p.iter().sum(),
        }
    }

    /// The exponent gain α of the balanced supersaturation statement:
    /// 1/(e(pattern) - 1).
    pub fn alpha(&self) -> f64 {
        1.0 / (self.edge_count() as f64 - 1.0)
    }

    pub fn check_host(&self, g: &HostGraph) -> Result<()> {
        if g.r() != self.uniformity() {
            return Err(Error::PatternHostMismatch {
                pattern: self.to_string(),
                r: g.r(),
            });
        }
        Ok(())
    }

    /// The pattern itself as a host on vertices 0..v(pattern).
    pub fn as_host(&self) -> HostGraph {
        match self {
            Pattern::Theta { a, b } => {
                // x = 0, y = 1, path i uses internal vertices 2 + i(b-1) ..
                let mut edges = Vec::new();
                for i in 0..*a {
                    let internal: Vec<Vertex> = (0..b - 1).map(|j| 2 + i * (b - 1) + j).collect();
                    let mut walk = vec![0];
                    walk.extend(internal);
                    walk.push(1);
                    edges.extend(walk.windows(2).map(|w| w.to_vec()));
                }
                HostGraph::new(self.vertex_count(), 2, edges).expect("theta pattern is valid")
            }
            Pattern::Complete(p) => crate::graph::generators::complete_rpartite(p),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Theta { a, b } => write!(f, "theta:{a},{b}"),
            Pattern::Complete(p) => write!(f, "complete:{}", p.iter().join(",")),
        }
    }
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidPattern(format!("expected kind:params, got {s:?}")))?;
        let nums = rest
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidPattern(format!("{s:?}: {e}")))?;
        match kind.trim() {
            "theta" => match nums.as_slice() {
                &[a, b] => Pattern::theta(a, b),
                _ => Err(Error::InvalidPattern(format!("theta takes two parameters, got {s:?}"))),
            },
            "complete" => Pattern::complete(nums),
            other => Err(Error::InvalidPattern(format!("unknown pattern kind {other:?}"))),
        }
    }
}

impl Serialize for Pattern {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Pattern {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A copy of θ_{a,b}: `a` internally disjoint x–y paths of length `b`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ThetaCopy {
    pub x: Vertex,
    pub y: Vertex,
    /// Vertex sequences from x to y, sorted.
    pub paths: Vec<Vec<Vertex>>,
    pub edges: EdgeSet,
}

impl ThetaCopy {
    pub fn validate(&self, g: &HostGraph, a: usize, b: usize) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidCopy(msg));
        if self.x == self.y {
            return fail("endpoints coincide".into());
        }
        if self.paths.len() != a {
            return fail(format!("expected {a} paths, found {}", self.paths.len()));
        }
        let mut internal = Vec::new();
        let mut edges = Vec::new();
        for p in &self.paths {
            if p.len() != b + 1 || p[0] != self.x || p[b] != self.y {
                return fail(format!("path {p:?} is not an x-y path of length {b}"));
            }
            internal.extend_from_slice(&p[1..b]);
            for w in p.windows(2) {
                match g.edge_id(w) {
                    Some(id) => edges.push(id),
                    None => return fail(format!("{w:?} is not an edge of the host")),
                }
            }
        }
        let count = internal.len();
        internal.sort_unstable();
        internal.dedup();
        if internal.len() != count || internal.contains(&self.x) || internal.contains(&self.y) {
            return fail("paths are not internally vertex-disjoint".into());
        }
        if internal.len() + 2 != a * (b - 1) + 2 {
            return fail("wrong vertex count".into());
        }
        let edges = EdgeSet::new(edges);
        if edges.len() != a * b || edges != self.edges {
            return fail("edge set does not match paths".into());
        }
        Ok(())
    }

    pub fn vertices(&self) -> Vec<Vertex> {
        let mut vs: Vec<Vertex> = self.paths.iter().flatten().copied().collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }
}

/// An ordered tuple of vertex sets (S1, ..., Sr), each part sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubTuple(pub Vec<Vec<Vertex>>);

impl SubTuple {
    pub fn new(mut parts: Vec<Vec<Vertex>>) -> Self {
        for p in &mut parts {
            p.sort_unstable();
            p.dedup();
        }
        SubTuple(parts)
    }

    pub fn parts(&self) -> &[Vec<Vertex>] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.0.iter().map(Vec::len).collect()
    }

    pub fn has_empty_part(&self) -> bool {
        self.0.iter().any(Vec::is_empty)
    }

    /// Componentwise containment.
    pub fn is_sub_of(&self, other: &SubTuple) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(s, a)| is_sorted_subset(s, a))
    }

    pub fn vertices(&self) -> Vec<Vertex> {
        let mut vs: Vec<Vertex> = self.0.iter().flatten().copied().collect();
        vs.sort_unstable();
        vs
    }

    /// Whether parts are pairwise disjoint and every transversal is an edge.
    pub fn is_complete_in(&self, g: &HostGraph) -> bool {
        let vs = self.vertices();
        if vs.windows(2).any(|w| w[0] == w[1]) || g.r() != self.arity() || self.has_empty_part() {
            return false;
        }
        self.0
            .iter()
            .multi_cartesian_product()
            .all(|t| g.has_edge(&t.into_iter().copied().collect::<Vec<_>>()))
    }

    /// Every sub-tuple with all parts non-empty.
    pub fn nonempty_subtuples(&self) -> Vec<SubTuple> {
        self.0
            .iter()
            .map(|part| {
                (1u64..1 << part.len())
                    .map(|mask| {
                        part.iter()
                            .enumerate()
                            .filter(|(i, _)| mask >> i & 1 == 1)
                            .map(|(_, &v)| v)
                            .collect::<Vec<_>>()
                    })
                    .collect::<Vec<_>>()
            })
            .multi_cartesian_product()
            .map(SubTuple)
            .collect()
    }
}

/// A copy of K^(r)_{a1,...,ar} recorded with its vertex partition.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RPartiteCopy {
    pub parts: Vec<Vec<Vertex>>,
}

impl RPartiteCopy {
    pub fn as_tuple(&self) -> SubTuple {
        SubTuple(self.parts.clone())
    }

    pub fn validate(&self, g: &HostGraph, profile: &[usize]) -> Result<()> {
        let sizes: Vec<usize> = self.parts.iter().map(Vec::len).collect();
        if sizes != profile {
            return Err(Error::InvalidCopy(format!(
                "part sizes {sizes:?} do not match {profile:?}"
            )));
        }
        if self.parts.iter().any(|p| p.windows(2).any(|w| w[0] >= w[1])) {
            return Err(Error::InvalidCopy("parts must be sorted sets".into()));
        }
        if !self.as_tuple().is_complete_in(g) {
            return Err(Error::InvalidCopy(format!(
                "{:?} is not a complete r-partite subgraph with disjoint parts",
                self.parts
            )));
        }
        Ok(())
    }

    /// Identifiers of the a1···ar host edges spanned by the copy.
    pub fn transversal_edges(&self, g: &HostGraph) -> Result<EdgeSet> {
        self.parts
            .iter()
            .multi_cartesian_product()
            .map(|t| {
                let vs: Vec<Vertex> = t.into_iter().copied().collect();
                g.edge_id(&vs)
                    .ok_or_else(|| Error::InvalidCopy(format!("{vs:?} is not an edge")))
            })
            .collect::<Result<Vec<_>>>()
            .map(EdgeSet::new)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternCopy {
    Theta(ThetaCopy),
    Complete(RPartiteCopy),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Query {
    Edges(EdgeSet),
    Tuple(SubTuple),
}

/// Containment of a query in a copy: σ ⊆ E(copy) for theta copies,
/// Si ⊆ Ai for every i for complete ones.
pub fn copy_contains(copy: &PatternCopy, query: &Query) -> Result<bool> {
    match (copy, query) {
        (PatternCopy::Theta(c), Query::Edges(sigma)) => {
            if sigma.is_empty() {
                return Err(Error::EmptyQuery);
            }
            Ok(sigma.is_subset(&c.edges))
        }
        (PatternCopy::Complete(c), Query::Tuple(t)) => {
            if t.arity() != c.parts.len() {
                return Err(Error::ArityMismatch {
                    expected: c.parts.len(),
                    got: t.arity(),
                });
            }
            if t.parts().iter().all(Vec::is_empty) {
                return Err(Error::EmptyQuery);
            }
            Ok(t.is_sub_of(&c.as_tuple()))
        }
        (PatternCopy::Theta(_), Query::Tuple(_)) => Err(Error::ArityMismatch { expected: 0, got: 1 }),
        (PatternCopy::Complete(c), Query::Edges(_)) => Err(Error::ArityMismatch {
            expected: c.parts.len(),
            got: 0,
        }),
    }
}
