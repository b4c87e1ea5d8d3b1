//! Eigenvector-style score computations: PageRank and its teleportation
//! variants, TotalRank, HITS, and eigenvector centrality.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};
use crate::matrix::{Normalization, ScoreVector, TransitionMatrix};

/// Largest node count for which the direct linear-system solvers are used;
/// beyond it they refuse and point the caller at the iterative method.
pub const DENSE_SOLVE_THRESHOLD: usize = 2000;

/// Damping, teleportation, and stopping parameters for the PageRank family.
#[derive(Debug, Clone)]
pub struct PageRankParams {
    /// Probability of following a link instead of teleporting, in `[0, 1]`.
    pub alpha: f64,
    /// Teleportation distribution (sum-one); uniform when absent.
    pub teleport: Option<ScoreVector>,
    /// L1 stopping tolerance of the fixed-point iteration.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PageRankParams {
    fn default() -> Self {
        PageRankParams {
            alpha: 0.85,
            teleport: None,
            tolerance: 1e-12,
            max_iterations: 1000,
        }
    }
}

impl PageRankParams {
    pub fn with_alpha(alpha: f64) -> Self {
        PageRankParams {
            alpha,
            ..Default::default()
        }
    }

    /// Mean number of links a walker follows between two teleportations,
    /// `α/(1−α)`; infinite at `α = 1`.
    pub fn mean_chain_length(&self) -> f64 {
        self.alpha / (1.0 - self.alpha)
    }

    fn validate(&self, n: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::BadParameter {
                name: "alpha",
                value: self.alpha,
                expected: "value in [0, 1]",
            });
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::BadParameter {
                name: "tolerance",
                value: self.tolerance,
                expected: "positive value",
            });
        }
        if self.max_iterations == 0 {
            return Err(Error::BadParameter {
                name: "max_iterations",
                value: 0.0,
                expected: "at least 1",
            });
        }
        if let Some(v) = &self.teleport {
            if v.len() != n {
                return Err(Error::BadParameter {
                    name: "teleport length",
                    value: v.len() as f64,
                    expected: "one entry per node",
                });
            }
            if v.normalization() != Normalization::SumOne
                || v.values().iter().any(|&x| x < 0.0)
            {
                return Err(Error::BadParameter {
                    name: "teleport",
                    value: f64::NAN,
                    expected: "non-negative sum-one vector",
                });
            }
        }
        Ok(())
    }

    /// The teleport vector as a dense slice, uniform if unset.
    fn teleport_values(&self, n: usize) -> Vec<f64> {
        match &self.teleport {
            Some(v) => v.values().to_vec(),
            None => vec![1.0 / n as f64; n],
        }
    }
}

/// Hub and authority scores of the mutual-reinforcement iteration.
#[derive(Debug, Clone)]
pub struct HitsResult {
    /// Dominant eigenvector of `AᵀA` (sum-one, non-negative).
    pub authority: ScoreVector,
    /// Dominant eigenvector of `AAᵀ` (sum-one, non-negative).
    pub hub: ScoreVector,
    pub iterations: usize,
}

/// Iterative PageRank: the fixed point of `h ← αPᵀh + (1−α)v`.
///
/// Only sparse matrix–vector products are used; the dense rank-one
/// teleportation part is applied analytically and the full damped matrix is
/// never materialized. Stops when the L1 change drops below the tolerance;
/// raises a convergence error (carrying the last iterate) otherwise.
pub fn pagerank(p: &TransitionMatrix, params: &PageRankParams) -> Result<ScoreVector> {
    let n = p.node_count();
    params.validate(n)?;
    let v = params.teleport_values(n);
    let alpha = params.alpha;
    let mut h = v.clone();
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..params.max_iterations {
        p.apply_transpose(&h, &mut next);
        for j in 0..n {
            next[j] = alpha * next[j] + (1.0 - alpha) * v[j];
        }
        residual = l1_diff(&h, &next);
        std::mem::swap(&mut h, &mut next);
        if residual < params.tolerance {
            return ScoreVector::normalized(h, Normalization::SumOne);
        }
    }
    Err(Error::NoConvergence {
        iterations: params.max_iterations,
        residual,
        tolerance: params.tolerance,
        last: h,
    })
}

/// Direct PageRank: solves `(I − αPᵀ) h = (1−α) v` by dense LU.
///
/// Requires `α < 1` (the system is singular at 1) and at most
/// [`DENSE_SOLVE_THRESHOLD`] nodes.
pub fn pagerank_direct(p: &TransitionMatrix, params: &PageRankParams) -> Result<ScoreVector> {
    let n = p.node_count();
    params.validate(n)?;
    if params.alpha >= 1.0 {
        return Err(Error::BadParameter {
            name: "alpha",
            value: params.alpha,
            expected: "value below 1 for the direct solve",
        });
    }
    let dense = p.to_dense(DENSE_SOLVE_THRESHOLD)?;
    let v = DVector::from_vec(params.teleport_values(n));
    let system = DMatrix::identity(n, n) - dense.transpose() * params.alpha;
    let rhs = v * (1.0 - params.alpha);
    let h = system
        .lu()
        .solve(&rhs)
        .expect("I − αPᵀ is strictly diagonally dominant for α < 1");
    ScoreVector::normalized(h.data.into(), Normalization::SumOne)
}

/// Damping-free ranking: the average of the direct PageRank score over
/// `α ∈ [0, 1−1e−6]`, evaluated by Gauss–Legendre quadrature.
pub fn totalrank(p: &TransitionMatrix, quadrature_points: usize) -> Result<ScoreVector> {
    if quadrature_points < 2 {
        return Err(Error::BadParameter {
            name: "quadrature_points",
            value: quadrature_points as f64,
            expected: "at least 2",
        });
    }
    let n = p.node_count();
    let upper = 1.0 - 1e-6;
    let mut acc = vec![0.0; n];
    for (alpha, weight) in gauss_legendre(quadrature_points, 0.0, upper) {
        let h = pagerank_direct(p, &PageRankParams::with_alpha(alpha))?;
        for (a, &x) in acc.iter_mut().zip(h.values()) {
            *a += weight * x;
        }
    }
    ScoreVector::normalized(acc, Normalization::SumOne)
}

/// Mutual reinforcement of hubs and authorities: `x ← Aᵀy`, `y ← Ax`, each
/// half-step L1-normalized.
pub fn hits(g: &DirectedGraph, tolerance: f64, max_iterations: usize) -> Result<HitsResult> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if g.edge_count() == 0 {
        return Err(Error::NoEdges);
    }
    let mut authority = vec![1.0 / n as f64; n];
    let mut hub = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for it in 1..=max_iterations {
        // x ← Aᵀy
        let mut next_auth = vec![0.0; n];
        for i in 0..n {
            for (j, w) in g.out_edges(i) {
                next_auth[j] += w * hub[i];
            }
        }
        normalize_l1(&mut next_auth);
        // y ← Ax
        let mut next_hub = vec![0.0; n];
        for i in 0..n {
            next_hub[i] = g.out_edges(i).map(|(j, w)| w * next_auth[j]).sum();
        }
        normalize_l1(&mut next_hub);
        residual = l1_diff(&authority, &next_auth).max(l1_diff(&hub, &next_hub));
        authority = next_auth;
        hub = next_hub;
        if residual < tolerance {
            return Ok(HitsResult {
                authority: ScoreVector::normalized(authority, Normalization::SumOne)?,
                hub: ScoreVector::normalized(hub, Normalization::SumOne)?,
                iterations: it,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iterations,
        residual,
        tolerance,
        last: authority,
    })
}

/// Power iteration for the dominant right eigenvector of `Aᵀ`
/// (`Σ_j A_ji x_j = λ x_i`), L1-normalized and non-negative.
pub fn eigenvector_centrality(
    g: &DirectedGraph,
    tolerance: f64,
    max_iterations: usize,
) -> Result<ScoreVector> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut x = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iterations {
        let mut next = vec![0.0; n];
        for i in 0..n {
            for (j, w) in g.out_edges(i) {
                next[j] += w * x[i];
            }
        }
        let sum: f64 = next.iter().sum();
        if sum <= 0.0 {
            // A nilpotent adjacency annihilates the vector: there is no
            // dominant eigenvector reachable by power iteration.
            return Err(Error::NoConvergence {
                iterations: max_iterations,
                residual: f64::INFINITY,
                tolerance,
                last: next,
            });
        }
        for v in &mut next {
            *v /= sum;
        }
        residual = l1_diff(&x, &next);
        x = next;
        if residual < tolerance {
            return ScoreVector::normalized(x, Normalization::SumOne);
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iterations,
        residual,
        tolerance,
        last: x,
    })
}

/// Age-biased PageRank: teleportation weight `exp(−age_i/τ)`, so recent
/// nodes receive the random jumps.
pub fn citerank(
    p: &TransitionMatrix,
    ages: &[f64],
    tau: f64,
    alpha: f64,
) -> Result<ScoreVector> {
    let n = p.node_count();
    if ages.len() != n {
        return Err(Error::BadParameter {
            name: "ages length",
            value: ages.len() as f64,
            expected: "one age per node",
        });
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::BadParameter {
            name: "tau",
            value: tau,
            expected: "positive finite value",
        });
    }
    for &t in ages {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::BadParameter {
                name: "age",
                value: t,
                expected: "finite non-negative value",
            });
        }
    }
    let weights: Vec<f64> = ages.iter().map(|&t| (-t / tau).exp()).collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 || !total.is_normal() {
        return Err(Error::BadParameter {
            name: "tau",
            value: tau,
            expected: "larger tau: all teleport weights underflowed to zero",
        });
    }
    let teleport = ScoreVector::normalized(weights, Normalization::SumOne)?;
    pagerank(
        p,
        &PageRankParams {
            alpha,
            teleport: Some(teleport),
            ..Default::default()
        },
    )
}

/// Teleport vector for trust propagation: uniform over the trusted ids,
/// zero elsewhere.
pub fn trusted_teleport(trusted: &[NodeId], n: usize) -> Result<ScoreVector> {
    if trusted.is_empty() {
        return Err(Error::BadParameter {
            name: "trusted",
            value: 0.0,
            expected: "at least one trusted node",
        });
    }
    let mut v = vec![0.0; n];
    for &id in trusted {
        if id >= n {
            return Err(Error::BadParameter {
                name: "trusted id",
                value: id as f64,
                expected: "id below the node count",
            });
        }
        v[id] = 1.0;
    }
    ScoreVector::normalized(v, Normalization::SumOne)
}

/// Undamped ranking through a ground node: connects an auxiliary node to and
/// from everything, runs PageRank at `α = 1` on the (now irreducible) graph,
/// drops the auxiliary node, and renormalizes.
pub fn ground_node_rank(g: &DirectedGraph) -> Result<ScoreVector> {
    if g.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let grounded = g.add_ground_node();
    let p = TransitionMatrix::from_graph(&grounded, crate::matrix::DanglingPolicy::Error)?;
    let h = pagerank(&p, &PageRankParams::with_alpha(1.0))?;
    let mut scores = h.into_values();
    scores.truncate(g.node_count());
    ScoreVector::normalized(scores, Normalization::SumOne)
}

fn l1_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn normalize_l1(v: &mut [f64]) {
    let sum: f64 = v.iter().map(|x| x.abs()).sum();
    if sum > 0.0 {
        for x in v.iter_mut() {
            *x /= sum;
        }
    }
}

/// Gauss–Legendre nodes and weights transplanted to `[a, b]`.
///
/// Nodes are the roots of the Legendre polynomial `P_n`, found by Newton
/// iteration from the Chebyshev initial guess; weights are
/// `2 / ((1−x²) P'_n(x)²)`.
fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    for k in 1..=n {
        let mut x = (std::f64::consts::PI * (k as f64 - 0.25) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((mid - half * x, half * w));
    }
    out
}

/// Evaluates `P_n(x)` and `P'_n(x)` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for m in 2..=n {
        let m = m as f64;
        let p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{DirectedGraph, GraphBuilder};
    use crate::matrix::DanglingPolicy;
    use approx::assert_abs_diff_eq;

    fn transition(g: &DirectedGraph) -> TransitionMatrix {
        TransitionMatrix::from_graph(g, DanglingPolicy::Uniform).unwrap()
    }

    fn three_cycle() -> DirectedGraph {
        DirectedGraph::from_edges([("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0)])
    }

    #[test]
    fn zero_damping_returns_teleport() {
        let p = transition(&three_cycle());
        let h = pagerank(&p, &PageRankParams::with_alpha(0.0)).unwrap();
        for &x in h.values() {
            assert_abs_diff_eq!(x, 1.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn cycle_is_uniform_at_any_damping() {
        let p = transition(&three_cycle());
        for alpha in [0.1, 0.5, 0.85, 0.99] {
            let h = pagerank(&p, &PageRankParams::with_alpha(alpha)).unwrap();
            for &x in h.values() {
                assert_abs_diff_eq!(x, 1.0 / 3.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn dangling_two_node_scores() {
        // Independently derived by solving the 2×2 system
        // h = 0.15/2 + 0.85·Pᵀh with P = [[0,1],[1/2,1/2]]: h0 = 0.5/1.425.
        let g = DirectedGraph::from_edges([("0", "1", 1.0)]);
        let h = pagerank(&transition(&g), &PageRankParams::default()).unwrap();
        assert_abs_diff_eq!(h.values()[0], 0.35087719298245607, epsilon = 1e-9);
        assert_abs_diff_eq!(h.values()[1], 0.6491228070175438, epsilon = 1e-9);
    }

    #[test]
    fn iterative_and_direct_agree() {
        let g = DirectedGraph::from_edges([
            ("a", "b", 1.0),
            ("b", "c", 2.0),
            ("b", "a", 1.0),
            ("c", "a", 1.0),
            ("d", "a", 3.0),
        ]);
        let p = transition(&g);
        let params = PageRankParams::default();
        let it = pagerank(&p, &params).unwrap();
        let direct = pagerank_direct(&p, &params).unwrap();
        for (x, y) in it.values().iter().zip(direct.values()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-10);
        }
    }

    #[test]
    fn direct_at_zero_damping_is_teleport() {
        let g = three_cycle();
        let v = ScoreVector::normalized(vec![0.5, 0.3, 0.2], Normalization::SumOne).unwrap();
        let params = PageRankParams {
            alpha: 0.0,
            teleport: Some(v.clone()),
            ..Default::default()
        };
        let h = pagerank_direct(&transition(&g), &params).unwrap();
        for (x, y) in h.values().iter().zip(v.values()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn direct_on_single_node() {
        let mut b = GraphBuilder::new();
        b.add_node("only");
        let p = transition(&b.build());
        let h = pagerank_direct(&p, &PageRankParams::default()).unwrap();
        assert_eq!(h.values(), &[1.0]);
    }

    #[test]
    fn direct_rejects_alpha_one() {
        let p = transition(&three_cycle());
        assert!(matches!(
            pagerank_direct(&p, &PageRankParams::with_alpha(1.0)),
            Err(Error::BadParameter { name: "alpha", .. })
        ));
    }

    #[test]
    fn mean_chain_length_matches_formula() {
        assert_abs_diff_eq!(
            PageRankParams::with_alpha(0.85).mean_chain_length(),
            0.85 / 0.15,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(PageRankParams::with_alpha(0.5).mean_chain_length(), 1.0);
    }

    #[test]
    fn totalrank_on_cycle_is_uniform() {
        let h = totalrank(&transition(&three_cycle()), 16).unwrap();
        for &x in h.values() {
            assert_abs_diff_eq!(x, 1.0 / 3.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn totalrank_on_single_node() {
        let mut b = GraphBuilder::new();
        b.add_node("only");
        let h = totalrank(&transition(&b.build()), 8).unwrap();
        assert_eq!(h.values(), &[1.0]);
    }

    #[test]
    fn totalrank_needs_two_points() {
        assert!(totalrank(&transition(&three_cycle()), 1).is_err());
    }

    #[test]
    fn hits_on_single_edge() {
        let g = DirectedGraph::from_edges([("0", "1", 1.0)]);
        let r = hits(&g, 1e-12, 100).unwrap();
        assert_eq!(r.authority.values(), &[0.0, 1.0]);
        assert_eq!(r.hub.values(), &[1.0, 0.0]);
    }

    #[test]
    fn hits_star_spreads_authority_evenly() {
        let g = DirectedGraph::from_edges([
            ("c", "l1", 1.0),
            ("c", "l2", 1.0),
            ("c", "l3", 1.0),
            ("c", "l4", 1.0),
        ]);
        let r = hits(&g, 1e-12, 100).unwrap();
        assert_abs_diff_eq!(r.authority.values()[0], 0.0);
        for leaf in 1..5 {
            assert_abs_diff_eq!(r.authority.values()[leaf], 0.25, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(r.hub.values()[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn hits_requires_an_edge() {
        let mut b = GraphBuilder::new();
        b.add_node("a");
        assert!(matches!(hits(&b.build(), 1e-9, 10), Err(Error::NoEdges)));
    }

    #[test]
    fn eigenvector_uniform_on_complete_graph() {
        let g = DirectedGraph::from_undirected_edges([
            ("a", "b", 1.0),
            ("a", "c", 1.0),
            ("a", "d", 1.0),
            ("b", "c", 1.0),
            ("b", "d", 1.0),
            ("c", "d", 1.0),
        ]);
        let x = eigenvector_centrality(&g, 1e-12, 1000).unwrap();
        for &v in x.values() {
            assert_abs_diff_eq!(v, 0.25, epsilon = 1e-9);
        }
    }

    #[test]
    fn eigenvector_fails_on_nilpotent_chain() {
        let g = DirectedGraph::from_edges([("a", "b", 1.0), ("b", "c", 1.0)]);
        assert!(matches!(
            eigenvector_centrality(&g, 1e-12, 1000),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn citerank_with_equal_ages_is_plain_pagerank() {
        let p = transition(&three_cycle());
        let cr = citerank(&p, &[3.0, 3.0, 3.0], 2.0, 0.85).unwrap();
        let pr = pagerank(&p, &PageRankParams::default()).unwrap();
        for (x, y) in cr.values().iter().zip(pr.values()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn citerank_huge_tau_approaches_uniform_teleport() {
        let g = DirectedGraph::from_edges([
            ("a", "b", 1.0),
            ("b", "c", 1.0),
            ("c", "a", 1.0),
            ("a", "c", 1.0),
        ]);
        let p = transition(&g);
        let cr = citerank(&p, &[0.0, 5.0, 11.0], 1e12, 0.85).unwrap();
        let pr = pagerank(&p, &PageRankParams::default()).unwrap();
        for (x, y) in cr.values().iter().zip(pr.values()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-9);
        }
    }

    #[test]
    fn citerank_rejects_underflowed_teleport() {
        let p = transition(&three_cycle());
        let err = citerank(&p, &[1e6, 2e6, 3e6], 1.0, 0.85).unwrap_err();
        assert!(matches!(err, Error::BadParameter { name: "tau", .. }));
    }

    #[test]
    fn trusted_teleport_concentrates_on_the_set() {
        assert_eq!(trusted_teleport(&[0], 3).unwrap().values(), &[1.0, 0.0, 0.0]);
        assert_eq!(
            trusted_teleport(&[0, 2], 4).unwrap().values(),
            &[0.5, 0.0, 0.5, 0.0]
        );
        let uniform = trusted_teleport(&[0, 1, 2], 3).unwrap();
        for &x in uniform.values() {
            assert_abs_diff_eq!(x, 1.0 / 3.0, epsilon = 1e-15);
        }
        assert!(trusted_teleport(&[], 3).is_err());
        assert!(trusted_teleport(&[7], 3).is_err());
    }

    #[test]
    fn trusted_teleport_recovers_standard_pagerank() {
        let p = transition(&three_cycle());
        let v = trusted_teleport(&[0, 1, 2], 3).unwrap();
        let with = pagerank(
            &p,
            &PageRankParams {
                teleport: Some(v),
                ..Default::default()
            },
        )
        .unwrap();
        let without = pagerank(&p, &PageRankParams::default()).unwrap();
        for (x, y) in with.values().iter().zip(without.values()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn ground_node_rank_on_cycle_is_uniform() {
        let h = ground_node_rank(&three_cycle()).unwrap();
        assert_eq!(h.len(), 3, "ground node dropped from the output");
        for &x in h.values() {
            assert_abs_diff_eq!(x, 1.0 / 3.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn ground_node_rank_on_single_node() {
        let mut b = GraphBuilder::new();
        b.add_node("only");
        let h = ground_node_rank(&b.build()).unwrap();
        assert_eq!(h.values(), &[1.0]);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        // n points are exact through degree 2n−1: check ∫₀¹ x³ dx = 1/4.
        let nodes = gauss_legendre(2, 0.0, 1.0);
        let integral: f64 = nodes.iter().map(|&(x, w)| w * x * x * x).sum();
        assert_abs_diff_eq!(integral, 0.25, epsilon = 1e-14);
        // And a transplanted interval: ∫₁³ x² dx = 26/3.
        let nodes = gauss_legendre(5, 1.0, 3.0);
        let integral: f64 = nodes.iter().map(|&(x, w)| w * x * x).sum();
        assert_abs_diff_eq!(integral, 26.0 / 3.0, epsilon = 1e-12);
    }
}
