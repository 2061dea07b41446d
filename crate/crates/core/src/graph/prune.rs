use std::collections::VecDeque;

use super::{EdgeId, HostGraph, Vertex};
use crate::family::{BalancedFamily, Member};

/// Result of a pruning pass. Vertex labels are preserved; `edge_map` sends
/// each original edge identifier to its identifier in `host`, if it survived.
#[derive(Clone, Debug)]
pub struct Pruned {
    pub host: HostGraph,
    pub edge_map: Vec<Option<EdgeId>>,
    pub removed_vertices: Vec<Vertex>,
    pub deleted_edges: usize,
}

impl Pruned {
    fn keep(g: &HostGraph, keep: &[bool], removed_vertices: Vec<Vertex>) -> Self {
        let kept: Vec<EdgeId> = (0..g.m()).filter(|&id| keep[id]).collect();
        let mut edge_map = vec![None; g.m()];
        // ids of a spanning subgraph keep their relative order
        for (new_id, &old) in kept.iter().enumerate() {
            edge_map[old] = Some(new_id);
        }
        let host = g.edge_subgraph(&kept).expect("kept ids come from g");
        Pruned {
            deleted_edges: g.m() - kept.len(),
            host,
            edge_map,
            removed_vertices,
        }
    }
}

/// Deletes vertices of degree below `threshold` until none remain.
pub fn prune_min_degree(g: &HostGraph, threshold: f64) -> Pruned {
    let mut degree: Vec<usize> = (0..g.n()).map(|v| g.degree(v)).collect();
    let mut alive_vertex = vec![true; g.n()];
    let mut alive_edge = vec![true; g.m()];
    let mut queue: VecDeque<Vertex> = (0..g.n()).filter(|&v| (degree[v] as f64) < threshold).collect();
    let mut removed = Vec::new();
    while let Some(v) = queue.pop_front() {
        if !alive_vertex[v] {
            continue;
        }
        alive_vertex[v] = false;
        removed.push(v);
        for id in g.incident(v).ones() {
            if !alive_edge[id] {
                continue;
            }
            alive_edge[id] = false;
            for &u in &g.edges()[id] {
                if u != v && alive_vertex[u] {
                    degree[u] -= 1;
                    if (degree[u] as f64) < threshold {
                        queue.push_back(u);
                    }
                }
            }
        }
    }
    removed.sort_unstable();
    Pruned::keep(g, &alive_edge, removed)
}

/// Deletes every edge the family overloads: single-edge degree at least
/// `cap` for theta families, a saturated singleton tuple for complete ones.
pub fn prune_overloaded_edges<M: Member>(g: &HostGraph, family: &BalancedFamily<M>, cap: f64) -> Pruned {
    let keep: Vec<bool> = (0..g.m()).map(|id| !M::edge_overloaded(family, id, cap)).collect();
    Pruned::keep(g, &keep, Vec::new())
}
