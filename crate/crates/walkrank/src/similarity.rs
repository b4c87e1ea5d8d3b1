//! Node and rating-profile similarity: commute times via the Laplacian
//! pseudoinverse, local/superposed random walks, the regularized walk
//! kernel, and Pearson/cosine profile similarity.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, DirectedGraph, NodeId};
use crate::matrix::{DanglingPolicy, TransitionMatrix};

/// Hard cap on nodes for dense N×N similarity storage.
pub const DENSE_SIMILARITY_LIMIT: usize = 10_000;

/// What a [`SimilarityMatrix`] measures, and how to read its values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimilarityKind {
    /// Average round-trip steps between two nodes; smaller is closer.
    CommuteTime,
    /// Square root of commute time, a Euclidean distance on the graph.
    Ectd,
    /// Local random-walk similarity after a fixed number of steps.
    Lrw,
    /// Sum of local random-walk similarities over all step counts up to t.
    Srw,
    /// Walk series `P(I − αP)⁻¹` with characteristic horizon `1/α`.
    Regularized,
    /// Pearson correlation of rating profiles over co-rated support.
    Pearson,
    /// Cosine overlap of binary neighborhoods.
    Cosine,
}

impl SimilarityKind {
    /// Distance-like kinds rank ascending (smaller value = more similar);
    /// the rest rank descending.
    pub fn distance_like(self) -> bool {
        matches!(self, SimilarityKind::CommuteTime | SimilarityKind::Ectd)
    }
}

/// Dense pairwise similarity (or distance) with its interpretation tag.
#[derive(Debug, Clone)]
pub struct SimilarityMatrix {
    kind: SimilarityKind,
    values: DMatrix<f64>,
}

impl SimilarityMatrix {
    pub fn kind(&self) -> SimilarityKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn get(&self, i: NodeId, j: NodeId) -> f64 {
        self.values[(i, j)]
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// All other nodes ranked from most to least similar to `i`
    /// (ascending values for distance-like kinds, descending otherwise;
    /// ties by ascending id).
    pub fn ranked_for(&self, i: NodeId) -> Vec<(NodeId, f64)> {
        let mut out: Vec<(NodeId, f64)> = (0..self.len())
            .filter(|&j| j != i)
            .map(|j| (j, self.values[(i, j)]))
            .collect();
        let asc = self.kind.distance_like();
        out.sort_by(|(ja, va), (jb, vb)| {
            let ord = va.total_cmp(vb);
            let ord = if asc { ord } else { ord.reverse() };
            ord.then(ja.cmp(jb))
        });
        out
    }
}

fn check_dense_size(n: usize) -> Result<()> {
    if n > DENSE_SIMILARITY_LIMIT {
        Err(Error::DenseSizeExceeded {
            n,
            threshold: DENSE_SIMILARITY_LIMIT,
        })
    } else {
        Ok(())
    }
}

/// Moore–Penrose pseudoinverse `L⁺` of the graph Laplacian `L = D − A`
/// of a connected undirected graph, via the rank-one shift identity
/// `L⁺ = (L − 11ᵀ/N)⁻¹ + 11ᵀ/N`. Self-loops do not enter the Laplacian.
pub fn laplacian_pseudoinverse(g: &DirectedGraph) -> Result<DMatrix<f64>> {
    g.require_symmetric()?;
    g.require_connected()?;
    let n = g.node_count();
    check_dense_size(n)?;
    let nf = n as f64;
    let mut m = DMatrix::from_element(n, n, -1.0 / nf);
    for i in 0..n {
        for (j, w) in g.out_edges(i) {
            if j == i {
                continue;
            }
            m[(i, i)] += w;
            m[(i, j)] -= w;
        }
    }
    let inv = m.lu().solve(&DMatrix::identity(n, n)).ok_or_else(|| {
        Error::Disconnected {
            root: g.label(0).to_owned(),
            count: 0,
            total: n,
        }
    })?;
    Ok(inv.add_scalar(1.0 / nf))
}

/// Total stored edge weight; on an unweighted undirected graph this is
/// twice the number of undirected edges.
fn graph_volume(g: &DirectedGraph) -> f64 {
    (0..g.node_count()).map(|i| g.out_strength(i)).sum()
}

/// Average commute time `C(i,j) = vol·(l⁺_ii + l⁺_jj − 2 l⁺_ij)`: expected
/// steps of a round trip i→j→i. Symmetric with an exactly zero diagonal.
pub fn commute_time(g: &DirectedGraph, lplus: &DMatrix<f64>) -> Result<SimilarityMatrix> {
    let n = g.node_count();
    if lplus.nrows() != n || lplus.ncols() != n {
        return Err(Error::BadParameter {
            name: "lplus",
            value: lplus.nrows() as f64,
            expected: "pseudoinverse of this graph's Laplacian",
        });
    }
    let vol = graph_volume(g);
    let mut values = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let c = vol * (lplus[(i, i)] + lplus[(j, j)] - 2.0 * lplus[(i, j)]);
            values[(i, j)] = c.max(0.0);
        }
    }
    Ok(SimilarityMatrix {
        kind: SimilarityKind::CommuteTime,
        values,
    })
}

/// Euclidean commute-time distance: entrywise square root of the commute
/// time, a proper metric on connected graphs.
pub fn ectd(g: &DirectedGraph, lplus: &DMatrix<f64>) -> Result<SimilarityMatrix> {
    let mut c = commute_time(g, lplus)?;
    c.values.apply(|v| *v = v.sqrt());
    c.kind = SimilarityKind::Ectd;
    Ok(c)
}

/// Walk occupation probabilities after `1..=t` steps from every start node:
/// `pows[θ−1][(i, j)]` is the probability of standing at `j` after `θ`
/// steps from `i`.
fn walk_powers(p: &TransitionMatrix, t: usize) -> Vec<DMatrix<f64>> {
    let n = p.node_count();
    let mut pows = Vec::with_capacity(t);
    let mut current = vec![vec![0.0; n]; n];
    for (i, row) in current.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let mut next = vec![0.0; n];
    for _ in 0..t {
        for row in current.iter_mut() {
            p.apply_transpose(row, &mut next);
            row.copy_from_slice(&next);
        }
        pows.push(DMatrix::from_fn(n, n, |i, j| current[i][j]));
    }
    pows
}

/// Local random-walk similarity after exactly `t` steps:
/// `s_ij = (s_i π_ij(t) + s_j π_ji(t)) / vol`, with node strengths `s` and
/// occupation probabilities `π`. Detailed balance makes it symmetric on
/// undirected graphs.
pub fn lrw_similarity(g: &DirectedGraph, t: usize) -> Result<SimilarityMatrix> {
    let pows = lrw_prepare(g, t)?;
    Ok(lrw_from_power(g, pows.last().expect("t >= 1")))
}

/// Superposed random-walk similarity: the sum of LRW similarities over all
/// step counts `1..=t`, rewarding pairs connected at many ranges.
pub fn srw_similarity(g: &DirectedGraph, t: usize) -> Result<SimilarityMatrix> {
    let pows = lrw_prepare(g, t)?;
    let n = g.node_count();
    let mut values = DMatrix::zeros(n, n);
    for pow in &pows {
        values += lrw_from_power(g, pow).values;
    }
    Ok(SimilarityMatrix {
        kind: SimilarityKind::Srw,
        values,
    })
}

fn lrw_prepare(g: &DirectedGraph, t: usize) -> Result<Vec<DMatrix<f64>>> {
    g.require_symmetric()?;
    check_dense_size(g.node_count())?;
    if t == 0 {
        return Err(Error::BadParameter {
            name: "t",
            value: 0.0,
            expected: "at least one walk step",
        });
    }
    let p = TransitionMatrix::from_graph(g, DanglingPolicy::SelfLoop)?;
    Ok(walk_powers(&p, t))
}

fn lrw_from_power(g: &DirectedGraph, pow: &DMatrix<f64>) -> SimilarityMatrix {
    let n = g.node_count();
    let vol = graph_volume(g);
    let values = DMatrix::from_fn(n, n, |i, j| {
        (g.out_strength(i) * pow[(i, j)] + g.out_strength(j) * pow[(j, i)]) / vol
    });
    SimilarityMatrix {
        kind: SimilarityKind::Lrw,
        values,
    }
}

/// Walk-series similarity `P(I − αP)⁻¹ = Σ_{k≥1} α^{k−1} P^k`, assigning
/// similarity to all pairs connected by any path; `1/α` is the
/// characteristic number of transfer steps. Computed by one dense solve.
pub fn regularized_similarity(p: &TransitionMatrix, alpha: f64) -> Result<SimilarityMatrix> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::BadParameter {
            name: "alpha",
            value: alpha,
            expected: "in the open interval (0, 1): the series diverges at 1",
        });
    }
    check_dense_size(p.node_count())?;
    let dense = p.to_dense(DENSE_SIMILARITY_LIMIT)?;
    let n = p.node_count();
    let system = DMatrix::identity(n, n) - &dense * alpha;
    // P and (I − αP)⁻¹ commute, so S = (I − αP)⁻¹ P in one solve.
    let values = system.lu().solve(&dense).ok_or(Error::BadParameter {
        name: "alpha",
        value: alpha,
        expected: "a value keeping I − αP invertible",
    })?;
    Ok(SimilarityMatrix {
        kind: SimilarityKind::Regularized,
        values,
    })
}

/// Which side of the bipartite graph to compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileAxis {
    Users,
    Items,
}

/// Rating profile of one axis entry: (other-side id, rating) pairs.
/// Unrated links count as 1, the binary-data convention.
fn profiles(b: &BipartiteGraph, axis: ProfileAxis) -> Vec<Vec<(usize, f64)>> {
    match axis {
        ProfileAxis::Users => (0..b.user_count())
            .map(|u| {
                b.items_of(u)
                    .map(|e| (e.item, e.rating.unwrap_or(1.0)))
                    .collect()
            })
            .collect(),
        ProfileAxis::Items => (0..b.item_count())
            .map(|i| {
                b.users_of(i)
                    .map(|(u, r)| (u, r.unwrap_or(1.0)))
                    .collect()
            })
            .collect(),
    }
}

/// Pearson correlation between rating profiles, computed over each pair's
/// co-rated support with means taken on that support. Pairs sharing fewer
/// than two ratings score 0, as do constant profiles.
pub fn pearson_similarity(b: &BipartiteGraph, axis: ProfileAxis) -> Result<SimilarityMatrix> {
    profile_similarity(b, axis, SimilarityKind::Pearson)
}

/// Cosine overlap of binary profiles: `|Γ_u ∩ Γ_v| / √(k_u k_v)`, with the
/// same minimum co-support of two as Pearson.
pub fn cosine_similarity(b: &BipartiteGraph, axis: ProfileAxis) -> Result<SimilarityMatrix> {
    profile_similarity(b, axis, SimilarityKind::Cosine)
}

fn profile_similarity(
    b: &BipartiteGraph,
    axis: ProfileAxis,
    kind: SimilarityKind,
) -> Result<SimilarityMatrix> {
    let profs = profiles(b, axis);
    let n = profs.len();
    check_dense_size(n)?;
    let mut values = DMatrix::zeros(n, n);
    for u in 0..n {
        for v in u..n {
            let s = pair_similarity(&profs[u], &profs[v], kind);
            values[(u, v)] = s;
            values[(v, u)] = s;
        }
    }
    Ok(SimilarityMatrix { kind, values })
}

fn pair_similarity(a: &[(usize, f64)], b: &[(usize, f64)], kind: SimilarityKind) -> f64 {
    // Profiles are sorted by id, so the co-support merges linearly.
    let mut shared: Vec<(f64, f64)> = Vec::new();
    let (mut x, mut y) = (0, 0);
    while x < a.len() && y < b.len() {
        match a[x].0.cmp(&b[y].0) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                shared.push((a[x].1, b[y].1));
                x += 1;
                y += 1;
            }
        }
    }
    if shared.len() < 2 {
        return 0.0;
    }
    match kind {
        SimilarityKind::Cosine => shared.len() as f64 / ((a.len() * b.len()) as f64).sqrt(),
        SimilarityKind::Pearson => {
            let m = shared.len() as f64;
            let mean_a = shared.iter().map(|(ra, _)| ra).sum::<f64>() / m;
            let mean_b = shared.iter().map(|(_, rb)| rb).sum::<f64>() / m;
            let mut num = 0.0;
            let mut da = 0.0;
            let mut db = 0.0;
            for &(ra, rb) in &shared {
                num += (ra - mean_a) * (rb - mean_b);
                da += (ra - mean_a).powi(2);
                db += (rb - mean_b).powi(2);
            }
            if da == 0.0 || db == 0.0 {
                0.0
            } else {
                num / (da * db).sqrt()
            }
        }
        _ => unreachable!("profile similarity is Pearson or cosine"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_bipartite;
    use approx::assert_abs_diff_eq;

    fn k2() -> DirectedGraph {
        DirectedGraph::from_undirected_edges([("a", "b", 1.0)])
    }

    fn path3() -> DirectedGraph {
        DirectedGraph::from_undirected_edges([("0", "1", 1.0), ("1", "2", 1.0)])
    }

    fn ratings(tsv: &str) -> BipartiteGraph {
        load_bipartite(tsv.as_bytes()).unwrap().0
    }

    #[test]
    fn pseudoinverse_of_an_edge() {
        let lp = laplacian_pseudoinverse(&k2()).unwrap();
        assert_abs_diff_eq!(lp[(0, 0)], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(lp[(0, 1)], -0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(lp[(1, 1)], 0.25, epsilon = 1e-12);
    }

    #[test]
    fn pseudoinverse_satisfies_moore_penrose_identity() {
        let g = DirectedGraph::from_undirected_edges([
            ("a", "b", 1.0),
            ("b", "c", 2.0),
            ("c", "a", 0.5),
            ("c", "d", 1.0),
        ]);
        let lp = laplacian_pseudoinverse(&g).unwrap();
        let n = g.node_count();
        let mut l = DMatrix::zeros(n, n);
        for i in 0..n {
            for (j, w) in g.out_edges(i) {
                l[(i, i)] += w;
                l[(i, j)] -= w;
            }
        }
        // L L⁺ L = L and row sums of L⁺ vanish (kernel along 1).
        let back = &l * &lp * &l;
        for i in 0..n {
            assert_abs_diff_eq!(lp.row(i).sum(), 0.0, epsilon = 1e-10);
            for j in 0..n {
                assert_abs_diff_eq!(back[(i, j)], l[(i, j)], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn pseudoinverse_requires_connectivity() {
        let g = DirectedGraph::from_undirected_edges([("a", "b", 1.0), ("c", "d", 1.0)]);
        assert!(matches!(
            laplacian_pseudoinverse(&g),
            Err(Error::Disconnected { .. })
        ));
    }

    #[test]
    fn commute_time_of_an_edge_is_two() {
        let g = k2();
        let lp = laplacian_pseudoinverse(&g).unwrap();
        let c = commute_time(&g, &lp).unwrap();
        assert_abs_diff_eq!(c.get(0, 1), 2.0, epsilon = 1e-10);
        assert_eq!(c.get(0, 0), 0.0);
        assert_eq!(c.get(1, 1), 0.0);
    }

    #[test]
    fn commute_time_across_a_path() {
        // vol × effective resistance: 4 stored edges × 2 Ω between the ends.
        let g = path3();
        let lp = laplacian_pseudoinverse(&g).unwrap();
        let c = commute_time(&g, &lp).unwrap();
        assert_abs_diff_eq!(c.get(0, 2), 8.0, epsilon = 1e-9);
        assert_abs_diff_eq!(c.get(2, 0), 8.0, epsilon = 1e-9);
    }

    #[test]
    fn ectd_is_the_square_root_and_a_metric_here() {
        let g = path3();
        let lp = laplacian_pseudoinverse(&g).unwrap();
        let c = commute_time(&g, &lp).unwrap();
        let d = ectd(&g, &lp).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(d.get(i, j), c.get(i, j).sqrt(), epsilon = 1e-12);
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert!(d.get(i, j) <= d.get(i, k) + d.get(k, j) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn lrw_single_step_on_an_edge() {
        let s = lrw_similarity(&k2(), 1).unwrap();
        assert_abs_diff_eq!(s.get(0, 1), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn lrw_single_step_support_is_the_adjacency() {
        let g = path3();
        let s = lrw_similarity(&g, 1).unwrap();
        // One step reaches neighbors only: s_ij = A_ij / E with E = 2.
        assert_abs_diff_eq!(s.get(0, 1), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.get(0, 2), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn lrw_is_symmetric_under_detailed_balance() {
        let g = DirectedGraph::from_undirected_edges([
            ("a", "b", 1.0),
            ("b", "c", 3.0),
            ("c", "a", 2.0),
            ("c", "d", 1.0),
        ]);
        let s = lrw_similarity(&g, 3).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!(s.get(i, j), s.get(j, i), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn srw_sums_the_step_range() {
        let g = path3();
        let s1 = lrw_similarity(&g, 1).unwrap();
        let s2 = lrw_similarity(&g, 2).unwrap();
        let srw = srw_similarity(&g, 2).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(
                    srw.get(i, j),
                    s1.get(i, j) + s2.get(i, j),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn regularized_limits_to_the_transition_matrix() {
        let g = path3();
        let p = TransitionMatrix::from_graph(&g, DanglingPolicy::Uniform).unwrap();
        let s = regularized_similarity(&p, 1e-9).unwrap();
        let dense = p.to_dense(100).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(s.get(i, j), dense[(i, j)], epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn regularized_reaches_the_far_end_of_a_chain() {
        let g = path3();
        let p = TransitionMatrix::from_graph(&g, DanglingPolicy::Uniform).unwrap();
        let s = regularized_similarity(&p, 0.3).unwrap();
        assert!(s.get(0, 2) > 0.0, "two-step paths must contribute");
        assert!(regularized_similarity(&p, 1.0).is_err());
    }

    #[test]
    fn regularized_grows_with_alpha() {
        let g = path3();
        let p = TransitionMatrix::from_graph(&g, DanglingPolicy::Uniform).unwrap();
        let lo = regularized_similarity(&p, 0.2).unwrap();
        let hi = regularized_similarity(&p, 0.6).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!(hi.get(i, j) >= lo.get(i, j) - 1e-12);
            }
        }
    }

    #[test]
    fn pearson_extremes() {
        let b = ratings(
            "u1\ti1\t1\nu1\ti2\t2\nu1\ti3\t3\n\
             u2\ti1\t2\nu2\ti2\t4\nu2\ti3\t6\n\
             u3\ti1\t3\nu3\ti2\t2\nu3\ti3\t1\n",
        );
        let s = pearson_similarity(&b, ProfileAxis::Users).unwrap();
        assert_abs_diff_eq!(s.get(0, 1), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.get(0, 2), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn disjoint_profiles_score_zero() {
        let b = ratings("u1\ti1\t5\nu1\ti2\t3\nu2\ti3\t4\nu2\ti4\t2\n");
        let s = pearson_similarity(&b, ProfileAxis::Users).unwrap();
        assert_eq!(s.get(0, 1), 0.0);
    }

    #[test]
    fn single_shared_item_scores_zero() {
        let b = ratings("u1\ti1\t5\nu1\ti2\t3\nu2\ti1\t5\nu2\ti3\t1\n");
        let s = pearson_similarity(&b, ProfileAxis::Users).unwrap();
        assert_eq!(s.get(0, 1), 0.0, "co-support below two is uninformative");
        let c = cosine_similarity(&b, ProfileAxis::Users).unwrap();
        assert_eq!(c.get(0, 1), 0.0);
    }

    #[test]
    fn cosine_counts_shared_neighbors() {
        let b = ratings("u1\ti1\t1\nu1\ti2\t1\nu1\ti3\t1\nu2\ti1\t1\nu2\ti2\t1\nu2\ti4\t1\n");
        let s = cosine_similarity(&b, ProfileAxis::Users).unwrap();
        assert_abs_diff_eq!(s.get(0, 1), 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn item_axis_compares_item_profiles() {
        let b = ratings("u1\ti1\t1\nu1\ti2\t1\nu2\ti1\t1\nu2\ti2\t1\n");
        let s = cosine_similarity(&b, ProfileAxis::Items).unwrap();
        assert_abs_diff_eq!(s.get(0, 1), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ranked_for_orders_by_kind() {
        let g = path3();
        let lp = laplacian_pseudoinverse(&g).unwrap();
        let d = ectd(&g, &lp).unwrap();
        let ranked = d.ranked_for(0);
        assert_eq!(ranked[0].0, 1, "the adjacent node is closest");
        let s = lrw_similarity(&g, 2).unwrap();
        let ranked = s.ranked_for(0);
        assert!(ranked[0].1 >= ranked[1].1, "similarities rank descending");
    }
}
