//! Balanced supersaturation for theta graphs and complete r-partite
//! hypergraphs, with a container-method pipeline for counting pattern-free
//! graphs and brute-force oracles for every checkable claim at small scale.

pub mod container;
pub mod error;
pub mod experiments;
pub mod family;
pub mod graph;
pub mod params;
pub mod pattern;
pub mod pipeline;

pub use error::{Error, Result};
pub use graph::{EdgeId, EdgeSet, HostGraph, Vertex};
pub use params::ScaleParams;
pub use pattern::{Pattern, PatternCopy};
