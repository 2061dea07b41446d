use std::collections::HashMap;

use super::{EdgeSet, HostGraph, Vertex};
use crate::error::{Error, Result};

/// Union-find over the vertices touched by an edge subset.
#[derive(Default)]
struct Dsu {
    parent: HashMap<Vertex, Vertex>,
}

impl Dsu {
    fn find(&mut self, v: Vertex) -> Vertex {
        let p = *self.parent.entry(v).or_insert(v);
        if p == v {
            return v;
        }
        let root = self.find(p);
        self.parent.insert(v, root);
        root
    }

    /// Returns false if `u` and `v` were already connected.
    fn union(&mut self, u: Vertex, v: Vertex) -> bool {
        let (ru, rv) = (self.find(u), self.find(v));
        if ru == rv {
            return false;
        }
        self.parent.insert(ru, rv);
        true
    }
}

fn require_graph(g: &HostGraph) -> Result<()> {
    if g.r() != 2 {
        return Err(Error::NotAGraph(g.r()));
    }
    Ok(())
}

/// True iff the edges of `sigma` span no cycle.
pub fn is_forest(sigma: &EdgeSet, g: &HostGraph) -> Result<bool> {
    require_graph(g)?;
    let mut dsu = Dsu::default();
    for id in sigma.iter() {
        let e = g.edge(id)?;
        if !dsu.union(e[0], e[1]) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Spanning forest of `sigma`, keeping edges greedily in identifier order.
pub fn maximal_forest(sigma: &EdgeSet, g: &HostGraph) -> Result<EdgeSet> {
    require_graph(g)?;
    if sigma.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mut dsu = Dsu::default();
    let mut kept = Vec::with_capacity(sigma.len());
    for id in sigma.iter() {
        let e = g.edge(id)?;
        if dsu.union(e[0], e[1]) {
            kept.push(id);
        }
    }
    Ok(EdgeSet::new(kept))
}
