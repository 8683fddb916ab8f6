//! Bundled graphs used in tests, docs and the CLI.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::graph::DirectedMultigraph;

/// Vertices `v`, `w`; `m` loops at `v` named `v0…`, one edge `c` with range
/// `v` and source `w`, and `n` loops at `w` named `w0…`. Vertex matrix
/// `[[m, 1], [0, n]]`.
pub fn dumbbell(m: usize, n: usize) -> DirectedMultigraph {
    let v = String::from("v");
    let w = String::from("w");
    let mut edges = Vec::with_capacity(m + n + 1);
    for i in 0..m {
        edges.push((format!("v{i}"), v.clone(), v.clone()));
    }
    edges.push((String::from("c"), v.clone(), w.clone()));
    for i in 0..n {
        edges.push((format!("w{i}"), w.clone(), w.clone()));
    }
    DirectedMultigraph::new(vec![v, w], edges).expect("dumbbell is well formed")
}

pub fn single_loop() -> DirectedMultigraph {
    full_shift(1)
}

/// One vertex with `n` loops `e0…`.
pub fn full_shift(n: usize) -> DirectedMultigraph {
    let v = String::from("v");
    let edges = (0..n).map(|i| (format!("e{i}"), v.clone(), v.clone())).collect();
    DirectedMultigraph::new(vec![v], edges).expect("full shift is well formed")
}

/// Directed cycle on `k` vertices: edge `ei` has range `i` and source `i+1 mod k`.
pub fn cycle(k: usize) -> DirectedMultigraph {
    assert!(k > 0, "cycle needs at least one vertex");
    let pairs: Vec<(usize, usize)> = (0..k).map(|i| (i, (i + 1) % k)).collect();
    DirectedMultigraph::from_pairs(k, &pairs).expect("cycle is well formed")
}
