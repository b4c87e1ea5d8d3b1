//! Seeded input generators shared by the benchmark targets.
//!
//! Benchmarks must measure the algorithms, not the luck of the draw, so every
//! input is built from a fixed seed and the same helper the next run will use.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use walkrank::{BipartiteGraph, DirectedGraph};

/// Directed graph on `n` nodes: a spanning cycle (so every node has an
/// out-link and one interned label) plus `extra_per_node · n` weighted edges.
pub fn directed(seed: u64, n: usize, extra_per_node: usize) -> DirectedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(String, String, f64)> = (0..n)
        .map(|i| (label(i), label((i + 1) % n), 1.0))
        .collect();
    for _ in 0..n * extra_per_node {
        let s = rng.gen_range(0..n);
        let t = rng.gen_range(0..n);
        edges.push((label(s), label(t), rng.gen_range(0.25..4.0)));
    }
    DirectedGraph::from_edges(edges.iter().map(|(s, t, w)| (s.as_str(), t.as_str(), *w)))
}

/// Connected undirected graph: a random attachment tree plus `extra` chords,
/// all with unit weight.
pub fn undirected(seed: u64, n: usize, extra: usize) -> DirectedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(String, String, f64)> = (1..n)
        .map(|i| (label(rng.gen_range(0..i)), label(i), 1.0))
        .collect();
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            edges.push((label(a), label(b), 1.0));
        }
    }
    DirectedGraph::from_undirected_edges(edges.iter().map(|(s, t, w)| (s.as_str(), t.as_str(), *w)))
}

/// Unrated bipartite collection graph where every user and every item has at
/// least one entry.
pub fn bipartite(seed: u64, users: usize, items: usize, entries_per_user: usize) -> BipartiteGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(String, String)> = Vec::new();
    for u in 0..users {
        pairs.push((format!("u{u}"), format!("i{}", u % items)));
        for _ in 1..entries_per_user {
            pairs.push((format!("u{u}"), format!("i{}", rng.gen_range(0..items))));
        }
    }
    for i in 0..items {
        pairs.push((format!("u{}", i % users), format!("i{i}")));
    }
    BipartiteGraph::from_entries(pairs.iter().map(|(u, i)| (u.as_str(), i.as_str(), None, None)))
}

fn label(i: usize) -> String {
    format!("v{i}")
}
