//! Shared fixtures for the integration suites: seeded random graphs with the
//! structural guarantees each check needs, and dense reference operators
//! built straight from adjacency so the library never verifies itself.
//!
//! Every test binary compiles its own copy and uses a subset of these
//! helpers, so unused-code lints stay off.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use walkrank::{BipartiteGraph, DanglingPolicy, DirectedGraph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random directed graph on `n` labeled nodes `v0..v{n−1}`. The non-dangling
/// nodes form a cycle (so every node is interned and has out-degree ≥ 1),
/// the last `dangling` nodes get in-edges only, and `extra` weighted edges
/// are sprinkled on top.
pub fn random_directed(seed: u64, n: usize, extra: usize, dangling: usize) -> DirectedGraph {
    assert!(n >= 2 && dangling < n);
    let mut r = rng(seed);
    let live = n - dangling;
    let mut edges: Vec<(String, String, f64)> = Vec::new();
    for k in 0..live {
        edges.push((label(k), label((k + 1) % live), r.gen_range(0.25..4.0)));
    }
    for d in live..n {
        edges.push((label(r.gen_range(0..live)), label(d), r.gen_range(0.25..4.0)));
    }
    for _ in 0..extra {
        let s = r.gen_range(0..live);
        let t = r.gen_range(0..n);
        edges.push((label(s), label(t), r.gen_range(0.25..4.0)));
    }
    DirectedGraph::from_edges(edges.iter().map(|(s, t, w)| (s.as_str(), t.as_str(), *w)))
}

/// Random connected undirected graph: a uniform attachment tree plus `extra`
/// random edges, unit weights unless `weighted`.
pub fn random_undirected_connected(seed: u64, n: usize, extra: usize, weighted: bool) -> DirectedGraph {
    assert!(n >= 2);
    let mut r = rng(seed);
    let w = |r: &mut ChaCha8Rng| if weighted { r.gen_range(0.25..4.0) } else { 1.0 };
    let mut edges: Vec<(String, String, f64)> = Vec::new();
    for i in 1..n {
        let parent = r.gen_range(0..i);
        let wt = w(&mut r);
        edges.push((label(parent), label(i), wt));
    }
    for _ in 0..extra {
        let a = r.gen_range(0..n);
        let b = r.gen_range(0..n);
        if a == b {
            continue;
        }
        let wt = w(&mut r);
        edges.push((label(a), label(b), wt));
    }
    DirectedGraph::from_undirected_edges(edges.iter().map(|(s, t, w)| (s.as_str(), t.as_str(), *w)))
}

/// Random DAG whose topological order is a seeded permutation: consecutive
/// nodes in that order are chained (every node interned, one guaranteed
/// source-to-leaf path) and further forward edges appear with probability
/// `edge_prob`.
pub fn random_dag(seed: u64, n: usize, edge_prob: f64) -> DirectedGraph {
    assert!(n >= 2);
    let mut r = rng(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut r);
    let mut edges: Vec<(String, String, f64)> = Vec::new();
    for k in 0..n - 1 {
        edges.push((label(order[k]), label(order[k + 1]), 1.0));
    }
    for a in 0..n {
        for b in a + 2..n {
            if r.gen_bool(edge_prob) {
                edges.push((label(order[a]), label(order[b]), 1.0));
            }
        }
    }
    DirectedGraph::from_edges(edges.iter().map(|(s, t, w)| (s.as_str(), t.as_str(), *w)))
}

/// Random bipartite collection data: every user holds at least one item and
/// every item at least one user; no ratings.
pub fn random_bipartite(seed: u64, users: usize, items: usize) -> BipartiteGraph {
    let mut r = rng(seed);
    let mut pairs: Vec<(String, String)> = Vec::new();
    let mut item_used = vec![false; items];
    for u in 0..users {
        let mut got = false;
        for i in 0..items {
            if r.gen_bool(0.45) {
                pairs.push((format!("u{u}"), format!("i{i}")));
                item_used[i] = true;
                got = true;
            }
        }
        if !got {
            let i = r.gen_range(0..items);
            pairs.push((format!("u{u}"), format!("i{i}")));
            item_used[i] = true;
        }
    }
    for (i, used) in item_used.iter().enumerate() {
        if !used {
            let u = r.gen_range(0..users);
            pairs.push((format!("u{u}"), format!("i{i}")));
        }
    }
    BipartiteGraph::from_entries(pairs.iter().map(|(u, i)| (u.as_str(), i.as_str(), None, None)))
}

fn label(i: usize) -> String {
    format!("v{i}")
}

/// Dense row-stochastic walk matrix read straight off the adjacency lists,
/// bypassing `TransitionMatrix` entirely.
pub fn dense_transition(g: &DirectedGraph, policy: DanglingPolicy) -> DMatrix<f64> {
    let n = g.node_count();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let strength: f64 = g.out_edges(i).map(|(_, w)| w).sum();
        if strength > 0.0 {
            for (j, w) in g.out_edges(i) {
                m[(i, j)] += w / strength;
            }
        } else {
            match policy {
                DanglingPolicy::Uniform => {
                    for j in 0..n {
                        m[(i, j)] = 1.0 / n as f64;
                    }
                }
                DanglingPolicy::SelfLoop => m[(i, i)] = 1.0,
                DanglingPolicy::Error => panic!("fixture has a dangling node under Error policy"),
            }
        }
    }
    m
}

/// Dense item-to-item diffusion operator
/// `W_{αβ} = k_α^{λ−1} k_β^{−λ} Σ_i a_{iα} a_{iβ} / k_i`
/// materialized from the bipartite adjacency. Columns sum to one at `λ = 1`
/// and rows sum to one at `λ = 0`.
pub fn dense_hybrid_operator(b: &BipartiteGraph, lambda: f64) -> DMatrix<f64> {
    let (nu, ni) = (b.user_count(), b.item_count());
    let mut w = DMatrix::zeros(ni, ni);
    for alpha in 0..ni {
        for beta in 0..ni {
            let mut overlap = 0.0;
            for i in 0..nu {
                if b.has_entry(i, alpha) && b.has_entry(i, beta) {
                    overlap += 1.0 / b.user_degree(i) as f64;
                }
            }
            let ka = b.item_degree(alpha) as f64;
            let kb = b.item_degree(beta) as f64;
            if ka > 0.0 && kb > 0.0 {
                w[(alpha, beta)] = ka.powf(lambda - 1.0) * kb.powf(-lambda) * overlap;
            }
        }
    }
    w
}

/// Largest |difference| between two equally sized slices.
pub fn linf(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
