//! Small deterministic hosts used by tests, examples and the CLI.

use itertools::Itertools;

use super::{HostGraph, Vertex};

/// K^(r)_n.
pub fn complete(n: usize, r: usize) -> HostGraph {
    HostGraph::new(n, r, (0..n).combinations(r)).expect("complete hypergraph is valid")
}

/// C_n on vertices 0..n in cyclic order.
pub fn cycle(n: usize) -> HostGraph {
    assert!(n >= 3, "cycle needs at least 3 vertices");
    HostGraph::new(n, 2, (0..n).map(|i| vec![i, (i + 1) % n])).expect("cycle is valid")
}

/// Path with `len` edges on vertices 0..=len.
pub fn path(len: usize) -> HostGraph {
    HostGraph::new(len + 1, 2, (0..len).map(|i| vec![i, i + 1])).expect("path is valid")
}

/// K_{1,leaves} with center 0.
pub fn star(leaves: usize) -> HostGraph {
    HostGraph::new(leaves + 1, 2, (1..=leaves).map(|v| vec![0, v])).expect("star is valid")
}

/// K_{s,t} with parts 0..s and s..s+t.
pub fn complete_bipartite(s: usize, t: usize) -> HostGraph {
    complete_rpartite(&[s, t])
}

/// Complete r-partite r-graph with consecutive parts of the given sizes.
pub fn complete_rpartite(sizes: &[usize]) -> HostGraph {
    let mut parts: Vec<Vec<Vertex>> = Vec::with_capacity(sizes.len());
    let mut next = 0;
    for &s in sizes {
        parts.push((next..next + s).collect());
        next += s;
    }
    let edges = parts
        .iter()
        .multi_cartesian_product()
        .map(|t| t.into_iter().copied().collect());
    HostGraph::new(next, sizes.len(), edges).expect("complete r-partite host is valid")
}
