use std::collections::HashMap;

use rayon::prelude::*;

use super::{Pattern, ThetaCopy};
use crate::error::{Error, Result};
use crate::graph::{EdgeSet, HostGraph, Vertex};

type HalfPaths = HashMap<Vertex, Vec<Vec<Vertex>>>;

/// Simple paths with `len` edges starting at `start`, grouped by last vertex.
fn half_paths(g: &HostGraph, start: Vertex, len: usize) -> HalfPaths {
    fn walk(g: &HostGraph, path: &mut Vec<Vertex>, len: usize, out: &mut HalfPaths) {
        let last = *path.last().unwrap();
        if path.len() == len + 1 {
            out.entry(last).or_default().push(path.clone());
            return;
        }
        for next in g.neighbors(last).ones() {
            if !path.contains(&next) {
                path.push(next);
                walk(g, path, len, out);
                path.pop();
            }
        }
    }
    let mut out = HashMap::new();
    walk(g, &mut vec![start], len, &mut out);
    out
}

/// All x–y paths of length b, glued from a left half at x and a right half
/// at y meeting in a middle vertex.
fn xy_paths(x: Vertex, y: Vertex, left: &HalfPaths, right: &HalfPaths) -> Vec<Vec<Vertex>> {
    let mut paths = Vec::new();
    for (w, lefts) in left {
        let Some(rights) = right.get(w) else { continue };
        for l in lefts {
            if l.contains(&y) {
                continue;
            }
            for r in rights {
                // r runs y .. w; everything but w must avoid l
                if r[..r.len() - 1].iter().any(|v| l.contains(v)) {
                    continue;
                }
                let mut p = l.clone();
                p.extend(r[..r.len() - 1].iter().rev());
                debug_assert_eq!(p.first(), Some(&x));
                paths.push(p);
            }
        }
    }
    paths.sort_unstable();
    paths
}

fn internals_disjoint(p: &[Vertex], q: &[Vertex]) -> bool {
    let (pi, qi) = (&p[1..p.len() - 1], &q[1..q.len() - 1]);
    pi.iter().all(|v| !qi.contains(v))
}

fn choose_disjoint(
    paths: &[Vec<Vertex>],
    a: usize,
    from: usize,
    chosen: &mut Vec<usize>,
    out: &mut Vec<Vec<Vec<Vertex>>>,
) {
    if chosen.len() == a {
        out.push(chosen.iter().map(|&i| paths[i].clone()).collect());
        return;
    }
    for i in from..paths.len() {
        if chosen.iter().all(|&j| internals_disjoint(&paths[i], &paths[j])) {
            chosen.push(i);
            choose_disjoint(paths, a, i + 1, chosen, out);
            chosen.pop();
        }
    }
}

/// Every copy of θ_{a,b} in `g`, each exactly once, in canonical order.
///
/// For a ≥ 3 the endpoints are the two branch vertices, listed as x < y. For
/// a = 2 the copy is a 2b-cycle; x is its smallest vertex and y the vertex
/// opposite to it.
pub fn enumerate_theta(g: &HostGraph, a: usize, b: usize) -> Result<Vec<ThetaCopy>> {
    if g.r() != 2 {
        return Err(Error::NotAGraph(g.r()));
    }
    Pattern::theta(a, b)?;
    let n = g.n();
    let left_len = b.div_ceil(2);
    let right_len = b - left_len;
    let right: Vec<HalfPaths> = (0..n).into_par_iter().map(|v| half_paths(g, v, right_len)).collect();

    let mut copies: Vec<ThetaCopy> = (0..n)
        .into_par_iter()
        .flat_map_iter(|x| {
            let left = half_paths(g, x, left_len);
            let mut found = Vec::new();
            for (y, right_y) in right.iter().enumerate().skip(x + 1) {
                let mut paths = xy_paths(x, y, &left, right_y);
                if a == 2 {
                    paths.retain(|p| p[1..b].iter().all(|&v| v > x));
                }
                if paths.len() < a {
                    continue;
                }
                let mut chosen = Vec::with_capacity(a);
                let mut groups = Vec::new();
                choose_disjoint(&paths, a, 0, &mut chosen, &mut groups);
                for group in groups {
                    let edges: EdgeSet = group
                        .iter()
                        .flat_map(|p| p.windows(2).map(|w| g.edge_id(w).expect("path edges exist")))
                        .collect();
                    found.push(ThetaCopy {
                        x,
                        y,
                        paths: group,
                        edges,
                    });
                }
            }
            found
        })
        .collect();
    copies.sort_unstable();
    Ok(copies)
}
