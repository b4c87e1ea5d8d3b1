//! Centrality measures with a common mean-one convention: degree,
//! endpoint-inclusive shortest-path betweenness, current-flow betweenness,
//! and second-order (return-time) centrality from a Metropolis-Hastings
//! walk.

use std::collections::VecDeque;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};
use crate::matrix::{Normalization, ScoreVector};
use crate::similarity::laplacian_pseudoinverse;

/// In-degree (edge count, ignoring weights), normalized to mean one.
pub fn degree_centrality(g: &DirectedGraph) -> Result<ScoreVector> {
    let counts: Vec<f64> = g
        .reverse_adjacency()
        .iter()
        .map(|sources| sources.len() as f64)
        .collect();
    ScoreVector::normalized(counts, Normalization::MeanOne)
}

/// Betweenness over shortest paths by hop count, counting a path's two
/// endpoints as lying on it when `include_endpoints` is set (pass `false`
/// for the conventional interior-only definition). Unreachable pairs
/// contribute nothing. Mean-one normalized.
pub fn shortest_path_betweenness(g: &DirectedGraph, include_endpoints: bool) -> Result<ScoreVector> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut interior = vec![0.0; n];
    let mut endpoint = vec![0.0; n];
    for s in 0..n {
        // Brandes: BFS forward pass, then dependency accumulation backward.
        let mut dist = vec![usize::MAX; n];
        let mut sigma = vec![0.0; n];
        let mut preds: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::new();
        dist[s] = 0;
        sigma[s] = 1.0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for (w, _) in g.out_edges(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        let mut delta = vec![0.0; n];
        for &w in order.iter().rev() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                interior[w] += delta[w];
                endpoint[s] += 1.0;
                endpoint[w] += 1.0;
            }
        }
    }
    // Each unordered pair of a symmetric graph was visited from both ends.
    let raw: Vec<f64> = (0..n)
        .map(|i| {
            let e = if include_endpoints { endpoint[i] } else { 0.0 };
            (interior[i] + e) / 2.0
        })
        .collect();
    ScoreVector::normalized(raw, Normalization::MeanOne)
}

/// Newman's current-flow betweenness: average over source–sink pairs of the
/// current through each node when one unit flows from source to sink, with
/// edge weights as conductances. The source and sink of a pair carry their
/// full unit. Mean-one normalized.
pub fn random_walk_betweenness(g: &DirectedGraph) -> Result<ScoreVector> {
    g.require_symmetric()?;
    g.require_connected()?;
    let n = g.node_count();
    let lp = laplacian_pseudoinverse(g)?;
    let mut acc = vec![0.0; n];
    for s in 0..n {
        for t in (s + 1)..n {
            for i in 0..n {
                if i == s || i == t {
                    acc[i] += 1.0;
                    continue;
                }
                // Potential differences to neighbors give edge currents.
                let pi = lp[(i, s)] - lp[(i, t)];
                let mut through = 0.0;
                for (j, w) in g.out_edges(i) {
                    if j == i {
                        continue;
                    }
                    let pj = lp[(j, s)] - lp[(j, t)];
                    through += w * (pi - pj).abs();
                }
                acc[i] += through / 2.0;
            }
        }
    }
    ScoreVector::normalized(acc, Normalization::MeanOne)
}

/// Parameters of the second-order centrality walk.
#[derive(Debug, Clone)]
pub struct SecondOrderParams {
    /// Recorded Metropolis-Hastings steps, split evenly across `walks`.
    pub walk_steps: u64,
    /// Discarded steps per walk before recording; `None` means `10·N`.
    pub burn_in: Option<u64>,
    /// Seed of the walk ensemble; results depend only on it and `walks`.
    pub rng_seed: u64,
    /// Minimum recorded returns per node before the estimate is accepted.
    pub min_returns: usize,
    /// Independent pooled walks; they may run in parallel, and the output
    /// is identical for any worker count.
    pub walks: usize,
}

impl SecondOrderParams {
    /// Defaults (10⁷ steps, burn-in `10·N`, 50 returns, one walk) around a
    /// caller-chosen seed.
    pub fn seeded(rng_seed: u64) -> Self {
        SecondOrderParams {
            walk_steps: 10_000_000,
            burn_in: None,
            rng_seed,
            min_returns: 50,
            walks: 1,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.min_returns < 10 {
            return Err(Error::BadParameter {
                name: "min_returns",
                value: self.min_returns as f64,
                expected: "at least 10",
            });
        }
        if self.walks == 0 {
            return Err(Error::BadParameter {
                name: "walks",
                value: 0.0,
                expected: "at least one walk",
            });
        }
        if self.walk_steps <= self.effective_burn_in(n) {
            return Err(Error::BadParameter {
                name: "walk_steps",
                value: self.walk_steps as f64,
                expected: "more steps than the burn-in",
            });
        }
        Ok(())
    }

    fn effective_burn_in(&self, n: usize) -> u64 {
        self.burn_in.unwrap_or(10 * n as u64)
    }
}

/// Everything the second-order walk measures: the centrality itself plus
/// the diagnostics needed to judge the sampling.
#[derive(Debug, Clone)]
pub struct SecondOrderStats {
    /// `1/σ_i`, mean-one normalized.
    pub centrality: ScoreVector,
    /// Standard deviation of return times per node (unbiased estimator).
    pub sigma: Vec<f64>,
    /// Recorded return-time samples per node.
    pub return_counts: Vec<usize>,
    /// Post-burn-in steps spent at each node, stays included. The
    /// Metropolis-Hastings correction makes this uniform in expectation.
    pub occupancy: Vec<u64>,
    /// Occupancy recorded only every [`THIN_STRIDE`] steps. Consecutive
    /// chain states are correlated, so goodness-of-fit checks against the
    /// uniform stationary law should use these effectively independent
    /// samples instead of `occupancy`.
    pub thinned_occupancy: Vec<u64>,
}

/// Stride between thinned occupancy samples: long enough to outlive the
/// mixing time of small graphs, odd so that on bipartite graphs the
/// samples alternate sides instead of sticking to one.
pub const THIN_STRIDE: u64 = 63;

/// Running mean/variance accumulator (Welford), mergeable across walks.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + d * other.count as f64 / count as f64,
            m2: self.m2 + other.m2 + d * d * self.count as f64 * other.count as f64 / count as f64,
        }
    }

    fn sample_std(&self) -> f64 {
        if self.count < 2 {
            f64::NAN
        } else {
            (self.m2 / (self.count - 1) as f64).sqrt()
        }
    }
}

struct WalkOutcome {
    moments: Vec<Moments>,
    occupancy: Vec<u64>,
    thinned: Vec<u64>,
}

/// One Metropolis-Hastings walk: move to a uniform random neighbor `j`,
/// accept with probability `min(1, k_i/k_j)`, otherwise stay. A return time
/// is the step distance between consecutive arrivals at a node; staying put
/// prolongs the interval without starting a new one.
fn run_walk(
    neighbors: &[Vec<NodeId>],
    seed: u64,
    stream: u64,
    burn_in: u64,
    recorded: u64,
) -> WalkOutcome {
    let n = neighbors.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut pos = rng.gen_range(0..n);
    let mut moments = vec![Moments::default(); n];
    let mut occupancy = vec![0u64; n];
    let mut thinned = vec![0u64; n];
    let mut last_arrival = vec![u64::MAX; n];
    let total = burn_in + recorded;
    for step in 1..=total {
        let k_i = neighbors[pos].len();
        let j = neighbors[pos][rng.gen_range(0..k_i)];
        let k_j = neighbors[j].len();
        if k_j <= k_i || rng.gen::<f64>() * (k_j as f64) < k_i as f64 {
            if j != pos && step > burn_in {
                if last_arrival[j] != u64::MAX {
                    moments[j].push((step - last_arrival[j]) as f64);
                }
                last_arrival[j] = step;
            }
            pos = j;
        }
        if step > burn_in {
            occupancy[pos] += 1;
            if (step - burn_in) % THIN_STRIDE == 0 {
                thinned[pos] += 1;
            }
        }
    }
    WalkOutcome {
        moments,
        occupancy,
        thinned,
    }
}

/// Second-order centrality with full diagnostics. See
/// [`second_order_centrality`] for the contract.
pub fn second_order_statistics(
    g: &DirectedGraph,
    params: &SecondOrderParams,
) -> Result<SecondOrderStats> {
    g.require_symmetric()?;
    g.require_connected()?;
    let n = g.node_count();
    if n < 3 {
        return Err(Error::BadParameter {
            name: "node count",
            value: n as f64,
            expected: "at least 3 nodes",
        });
    }
    params.validate(n)?;
    let neighbors: Vec<Vec<NodeId>> = (0..n)
        .map(|i| g.out_edges(i).map(|(j, _)| j).collect())
        .collect();
    let burn_in = params.effective_burn_in(n);
    let per_walk = params.walk_steps / params.walks as u64;
    let outcomes: Vec<WalkOutcome> = (0..params.walks as u64)
        .into_par_iter()
        .map(|w| run_walk(&neighbors, params.rng_seed, w, burn_in, per_walk))
        .collect();
    // Merge in walk order so the result is independent of scheduling.
    let mut moments = vec![Moments::default(); n];
    let mut occupancy = vec![0u64; n];
    let mut thinned_occupancy = vec![0u64; n];
    for outcome in outcomes {
        for i in 0..n {
            moments[i] = moments[i].merge(outcome.moments[i]);
            occupancy[i] += outcome.occupancy[i];
            thinned_occupancy[i] += outcome.thinned[i];
        }
    }
    let starved: Vec<String> = (0..n)
        .filter(|&i| (moments[i].count as usize) < params.min_returns)
        .map(|i| g.label(i).to_owned())
        .collect();
    if !starved.is_empty() {
        return Err(Error::InsufficientSamples {
            min_returns: params.min_returns,
            labels: starved,
        });
    }
    let sigma: Vec<f64> = moments.iter().map(Moments::sample_std).collect();
    let inverse: Vec<f64> = sigma.iter().map(|s| 1.0 / s).collect();
    let centrality = ScoreVector::normalized(inverse, Normalization::MeanOne)?;
    Ok(SecondOrderStats {
        centrality,
        sigma,
        return_counts: moments.iter().map(|m| m.count as usize).collect(),
        occupancy,
        thinned_occupancy,
    })
}

/// Second-order centrality `1/σ_i` of a connected undirected graph: the
/// inverse standard deviation of a node's return times under the
/// degree-unbiased Metropolis-Hastings walk, mean-one normalized.
/// Errs when any node records fewer than `min_returns` returns; raise
/// `walk_steps` in that case.
pub fn second_order_centrality(
    g: &DirectedGraph,
    params: &SecondOrderParams,
) -> Result<ScoreVector> {
    Ok(second_order_statistics(g, params)?.centrality)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cycle(n: usize) -> DirectedGraph {
        DirectedGraph::from_undirected_edges(
            (0..n).map(|i| (i.to_string(), ((i + 1) % n).to_string(), 1.0)),
        )
    }

    /// The 13-node centrality toy: a 6-clique containing node 1, node 2
    /// bridged to the clique through 1 and through 3, and five leaves on 2.
    fn centrality_toy() -> DirectedGraph {
        let clique = ["1", "c1", "c2", "c3", "c4", "c5"];
        let mut edges: Vec<(String, String, f64)> = Vec::new();
        for (a, x) in clique.iter().enumerate() {
            for y in &clique[a + 1..] {
                edges.push((x.to_string(), y.to_string(), 1.0));
            }
        }
        edges.push(("1".into(), "2".into(), 1.0));
        edges.push(("3".into(), "1".into(), 1.0));
        edges.push(("3".into(), "2".into(), 1.0));
        for l in 1..=5 {
            edges.push(("2".into(), format!("l{l}"), 1.0));
        }
        DirectedGraph::from_undirected_edges(edges)
    }

    fn by_label(g: &DirectedGraph, s: &ScoreVector, label: &str) -> f64 {
        s.values()[g.id(label).unwrap()]
    }

    #[test]
    fn degree_has_mean_one_and_matches_toy_row() {
        let g = centrality_toy();
        let c = degree_centrality(&g).unwrap();
        let mean = c.values().iter().sum::<f64>() / c.len() as f64;
        assert_abs_diff_eq!(mean, 1.0, epsilon = 1e-12);
        for (label, want) in [("1", 1.98), ("2", 1.98), ("3", 0.57), ("c1", 1.41), ("l1", 0.28)] {
            assert_abs_diff_eq!(by_label(&g, &c, label), want, epsilon = 0.005);
        }
    }

    #[test]
    fn degree_of_star_center() {
        let g = DirectedGraph::from_undirected_edges(
            (1..=4).map(|i| ("hub".to_string(), format!("x{i}"), 1.0)),
        );
        let c = degree_centrality(&g).unwrap();
        assert_abs_diff_eq!(c.values()[0], 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c.values()[1], 0.625, epsilon = 1e-12);
    }

    #[test]
    fn betweenness_counts_endpoints_on_a_path() {
        let g = DirectedGraph::from_undirected_edges([("a", "b", 1.0), ("b", "c", 1.0)]);
        let c = shortest_path_betweenness(&g, true).unwrap();
        // Raw endpoint-inclusive counts (2, 3, 2), mean-one scaled.
        assert_abs_diff_eq!(c.values()[0], 6.0 / 7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.values()[1], 9.0 / 7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.values()[2], 6.0 / 7.0, epsilon = 1e-12);
    }

    #[test]
    fn betweenness_on_triangle_is_flat() {
        let g = DirectedGraph::from_undirected_edges([
            ("a", "b", 1.0),
            ("b", "c", 1.0),
            ("c", "a", 1.0),
        ]);
        let c = shortest_path_betweenness(&g, true).unwrap();
        for &v in c.values() {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn betweenness_matches_toy_row() {
        let g = centrality_toy();
        let c = shortest_path_betweenness(&g, true).unwrap();
        for (label, want) in [("1", 2.59), ("2", 3.14), ("3", 0.66), ("c1", 0.66), ("l1", 0.66)] {
            assert_abs_diff_eq!(by_label(&g, &c, label), want, epsilon = 0.005);
        }
    }

    #[test]
    fn exclusive_betweenness_drops_endpoint_mass() {
        let g = DirectedGraph::from_undirected_edges([("a", "b", 1.0), ("b", "c", 1.0)]);
        let c = shortest_path_betweenness(&g, false).unwrap();
        // Only b lies strictly inside a path; mean-one makes it 3.
        assert_abs_diff_eq!(c.values()[1], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.values()[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn current_flow_matches_toy_row() {
        let g = centrality_toy();
        let c = random_walk_betweenness(&g).unwrap();
        for (label, want) in [("1", 2.31), ("2", 2.69), ("3", 1.09), ("c1", 0.84), ("l1", 0.55)] {
            assert_abs_diff_eq!(by_label(&g, &c, label), want, epsilon = 0.005);
        }
    }

    #[test]
    fn current_flow_on_triangle_is_flat() {
        let g = DirectedGraph::from_undirected_edges([
            ("a", "b", 1.0),
            ("b", "c", 1.0),
            ("c", "a", 1.0),
        ]);
        let c = random_walk_betweenness(&g).unwrap();
        for &v in c.values() {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn current_flow_leaf_below_its_neighbor() {
        let g = DirectedGraph::from_undirected_edges([
            ("leaf", "hub", 1.0),
            ("hub", "a", 1.0),
            ("hub", "b", 1.0),
            ("a", "b", 1.0),
        ]);
        let c = random_walk_betweenness(&g).unwrap();
        assert!(c.values()[0] < c.values()[1]);
    }

    #[test]
    fn current_flow_rejects_directed_input() {
        let g = DirectedGraph::from_edges([("a", "b", 1.0), ("b", "c", 1.0)]);
        assert!(matches!(
            random_walk_betweenness(&g),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn second_order_is_flat_on_a_cycle() {
        let g = cycle(6);
        let mut params = SecondOrderParams::seeded(7);
        params.walk_steps = 1_000_000;
        let c = second_order_centrality(&g, &params).unwrap();
        for &v in c.values() {
            assert_abs_diff_eq!(v, 1.0, epsilon = 0.05);
        }
    }

    #[test]
    fn second_order_occupancy_is_uniform() {
        // Odd cycle: aperiodic, vertex-transitive, uniform stationary law.
        let g = cycle(5);
        let mut params = SecondOrderParams::seeded(7);
        params.walk_steps = 1_000_000;
        let stats = second_order_statistics(&g, &params).unwrap();
        let expected = stats.thinned_occupancy.iter().sum::<u64>() as f64 / 5.0;
        let chi2: f64 = stats
            .thinned_occupancy
            .iter()
            .map(|&o| {
                let d = o as f64 - expected;
                d * d / expected
            })
            .sum();
        // 99th percentile of chi-square with 4 degrees of freedom.
        assert!(chi2 < 13.277, "chi2 = {chi2}");
    }

    #[test]
    fn second_order_is_independent_of_worker_count() {
        let g = cycle(8);
        let mut params = SecondOrderParams::seeded(42);
        params.walk_steps = 200_000;
        params.walks = 4;
        let a = second_order_centrality(&g, &params).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| second_order_centrality(&g, &params).unwrap());
        assert_eq!(a.values(), b.values(), "pooling must not depend on threads");
    }

    #[test]
    fn second_order_reports_starved_nodes() {
        let g = cycle(6);
        let mut params = SecondOrderParams::seeded(1);
        params.walk_steps = 200;
        params.burn_in = Some(10);
        params.min_returns = 100;
        match second_order_centrality(&g, &params) {
            Err(Error::InsufficientSamples { labels, .. }) => assert!(!labels.is_empty()),
            other => panic!("expected insufficient samples, got {other:?}"),
        }
    }

    #[test]
    fn second_order_requires_a_seeded_walk_longer_than_burn_in() {
        let g = cycle(6);
        let mut params = SecondOrderParams::seeded(1);
        params.walk_steps = 10;
        params.burn_in = Some(10);
        assert!(second_order_centrality(&g, &params).is_err());
    }
}
