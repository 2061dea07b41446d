#![allow(dead_code)]

use proptest::prelude::*;
use supersat_core::experiments::{random_host, Density};
use supersat_core::graph::generators::complete;
use supersat_core::HostGraph;

/// The spanning subgraph of K_n^(r) selected by the low bits of `mask`.
pub fn from_mask(n: usize, r: usize, mask: u64) -> HostGraph {
    let kn = complete(n, r);
    let keep: Vec<usize> = (0..kn.m()).filter(|i| mask >> i & 1 == 1).collect();
    kn.edge_subgraph(&keep).unwrap()
}

pub fn arb_graph(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = HostGraph> {
    n.prop_flat_map(|n| any::<u64>().prop_map(move |mask| from_mask(n, 2, mask)))
}

/// Binomial r-graphs with edge probability in [0.1, 0.9].
pub fn arb_random(n: std::ops::RangeInclusive<usize>, r: usize) -> impl Strategy<Value = HostGraph> {
    (n, 1u32..10, any::<u64>())
        .prop_map(move |(n, p, seed)| random_host(n, Density::Prob(p as f64 / 10.0), r, seed).unwrap())
}
