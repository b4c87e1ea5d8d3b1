//! Absorbing-walk machinery: sink/transient partition, absorption
//! probabilities, expected visits, absorption times, diversity re-ranking,
//! the fixed-boundary heat equilibrium, and passing probabilities on DAGs.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};
use crate::matrix::{DanglingPolicy, ScoreVector, TransitionMatrix};
use crate::spectral::{pagerank, PageRankParams};

/// Sink/transient split of a transition matrix with the four blocks
///
/// ```text
///     ( P_SS  P_ST )
/// P = (            )
///     ( P_TS  P_TT )
/// ```
///
/// in partition order (sinks first, both sets ascending by original id).
/// Under *sink semantics* the sink rows are overwritten to absorbing form
/// (`P_SS = I`, `P_ST = 0`); under *source semantics* all blocks are taken
/// from `P` as stored, so sources emit walkers and absorb returning ones.
#[derive(Debug, Clone)]
pub struct AbsorbingPartition {
    sinks: Vec<NodeId>,
    transients: Vec<NodeId>,
    labels: Vec<String>,
    /// Blocks as sparse row lists, indexed by partition positions.
    p_ss: Vec<Vec<(usize, f64)>>,
    p_st: Vec<Vec<(usize, f64)>>,
    p_ts: Vec<Vec<(usize, f64)>>,
    p_tt: Vec<Vec<(usize, f64)>>,
    sink_semantics: bool,
}

/// Absorption probabilities, expected visits, and absorption times of the
/// transient block, computed from one LU factorization of `I − P_TT`.
#[derive(Debug, Clone)]
pub struct AbsorptionResult {
    /// `M×(N−M)` absorption probabilities `F = (I − P_TT)⁻¹ P_TS`.
    pub f: DMatrix<f64>,
    /// `M×M` expected visits `V = (I − P_TT)⁻¹`; `V_ii ≥ 1`.
    pub v: DMatrix<f64>,
    /// Expected steps to absorption per transient: row sums of `V`.
    pub absorption_time: Vec<f64>,
}

impl AbsorbingPartition {
    /// Splits `p` into sinks and transients with sink semantics: sink rows
    /// become absorbing regardless of their original out-links.
    pub fn with_sinks(p: &TransitionMatrix, sinks: &[NodeId], labels: Vec<String>) -> Result<Self> {
        Self::build(p, sinks, labels, true)
    }

    /// Splits `p` keeping all blocks as stored (source semantics): the
    /// special rows emit walkers via `P_ST` and absorb arriving ones.
    pub fn with_sources(
        p: &TransitionMatrix,
        sources: &[NodeId],
        labels: Vec<String>,
    ) -> Result<Self> {
        Self::build(p, sources, labels, false)
    }

    fn build(
        p: &TransitionMatrix,
        special: &[NodeId],
        labels: Vec<String>,
        sink_semantics: bool,
    ) -> Result<Self> {
        let n = p.node_count();
        let mut is_special = vec![false; n];
        for &s in special {
            if s >= n {
                return Err(Error::BadParameter {
                    name: "sink id",
                    value: s as f64,
                    expected: "id below the node count",
                });
            }
            is_special[s] = true;
        }
        let sinks: Vec<NodeId> = (0..n).filter(|&i| is_special[i]).collect();
        let transients: Vec<NodeId> = (0..n).filter(|&i| !is_special[i]).collect();
        if sinks.is_empty() || transients.is_empty() {
            return Err(Error::BadPartition {
                sinks: sinks.len(),
                total: n,
            });
        }
        let mut sink_pos = vec![usize::MAX; n];
        for (k, &s) in sinks.iter().enumerate() {
            sink_pos[s] = k;
        }
        let mut trans_pos = vec![usize::MAX; n];
        for (k, &t) in transients.iter().enumerate() {
            trans_pos[t] = k;
        }
        let ns = sinks.len();
        let nt = transients.len();
        let mut p_ss = vec![Vec::new(); ns];
        let mut p_st = vec![Vec::new(); ns];
        let mut p_ts = vec![Vec::new(); nt];
        let mut p_tt = vec![Vec::new(); nt];
        for i in 0..n {
            if is_special[i] && sink_semantics {
                p_ss[sink_pos[i]].push((sink_pos[i], 1.0));
                continue;
            }
            for (j, prob) in full_row(p, i) {
                match (is_special[i], is_special[j]) {
                    (true, true) => p_ss[sink_pos[i]].push((sink_pos[j], prob)),
                    (true, false) => p_st[sink_pos[i]].push((trans_pos[j], prob)),
                    (false, true) => p_ts[trans_pos[i]].push((sink_pos[j], prob)),
                    (false, false) => p_tt[trans_pos[i]].push((trans_pos[j], prob)),
                }
            }
        }
        Ok(AbsorbingPartition {
            sinks,
            transients,
            labels,
            p_ss,
            p_st,
            p_ts,
            p_tt,
            sink_semantics,
        })
    }

    /// Original ids of the sink (or source) nodes, ascending.
    pub fn sinks(&self) -> &[NodeId] {
        &self.sinks
    }

    /// Original ids of the transient nodes, ascending.
    pub fn transients(&self) -> &[NodeId] {
        &self.transients
    }

    pub fn sink_semantics(&self) -> bool {
        self.sink_semantics
    }

    /// Block entry iterators, in partition order, for inspection and tests.
    pub fn block(&self, which: Block) -> &[Vec<(usize, f64)>] {
        match which {
            Block::SS => &self.p_ss,
            Block::ST => &self.p_st,
            Block::TS => &self.p_ts,
            Block::TT => &self.p_tt,
        }
    }

    /// Transients with no directed path to any sink, by reverse reachability
    /// through the transient block. Empty when absorption is certain.
    pub fn trapped(&self) -> Vec<NodeId> {
        let nt = self.transients.len();
        // Reverse adjacency of P_TT plus entry points from P_TS.
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); nt];
        for (i, row) in self.p_tt.iter().enumerate() {
            for &(j, _) in row {
                rev[j].push(i);
            }
        }
        let mut reached = vec![false; nt];
        let mut queue: Vec<usize> = Vec::new();
        for (i, row) in self.p_ts.iter().enumerate() {
            if !row.is_empty() {
                reached[i] = true;
                queue.push(i);
            }
        }
        while let Some(j) = queue.pop() {
            for &i in &rev[j] {
                if !reached[i] {
                    reached[i] = true;
                    queue.push(i);
                }
            }
        }
        (0..nt)
            .filter(|&i| !reached[i])
            .map(|i| self.transients[i])
            .collect()
    }

    fn require_reachability(&self) -> Result<()> {
        let trapped = self.trapped();
        if trapped.is_empty() {
            Ok(())
        } else {
            Err(Error::SinksUnreachable {
                labels: trapped
                    .into_iter()
                    .map(|i| self.labels[i].clone())
                    .collect(),
            })
        }
    }

    fn i_minus_ptt(&self) -> DMatrix<f64> {
        let nt = self.transients.len();
        let mut m = DMatrix::identity(nt, nt);
        for (i, row) in self.p_tt.iter().enumerate() {
            for &(j, p) in row {
                m[(i, j)] -= p;
            }
        }
        m
    }

    fn p_ts_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.transients.len(), self.sinks.len());
        for (i, row) in self.p_ts.iter().enumerate() {
            for &(j, p) in row {
                m[(i, j)] += p;
            }
        }
        m
    }

    /// Absorption probabilities `F = (I − P_TT)⁻¹ P_TS` by linear solve:
    /// `F[i][j]` is the probability a walker starting at transient `i` is
    /// absorbed in sink `j`. Rows sum to 1.
    pub fn absorption_probabilities(&self) -> Result<DMatrix<f64>> {
        self.require_reachability()?;
        let lu = self.i_minus_ptt().lu();
        lu.solve(&self.p_ts_dense())
            .ok_or_else(|| self.singularity_error())
    }

    /// Expected visits `H = P_ST (I − P_TT)⁻¹` of each transient by walkers
    /// emitted from each source; entries may exceed 1 (repeat visits).
    /// Requires source semantics, otherwise `P_ST` is identically zero.
    pub fn expected_visits_from_sources(&self) -> Result<DMatrix<f64>> {
        if self.sink_semantics {
            return Err(Error::BadParameter {
                name: "partition",
                value: f64::NAN,
                expected: "source semantics (build with with_sources)",
            });
        }
        self.require_reachability()?;
        // H = P_ST (I−P_TT)⁻¹  ⇔  Hᵀ = (I−P_TTᵀ)⁻¹ P_STᵀ.
        let ns = self.sinks.len();
        let nt = self.transients.len();
        let mut p_st = DMatrix::zeros(ns, nt);
        for (i, row) in self.p_st.iter().enumerate() {
            for &(j, p) in row {
                p_st[(i, j)] += p;
            }
        }
        let lu = self.i_minus_ptt().transpose().lu();
        let ht = lu
            .solve(&p_st.transpose())
            .ok_or_else(|| self.singularity_error())?;
        Ok(ht.transpose())
    }

    /// Fundamental matrix `V = (I − P_TT)⁻¹` (expected visits of transient
    /// `j` starting from transient `i`) and the absorption times `t = V·1`.
    pub fn fundamental_matrix(&self) -> Result<(DMatrix<f64>, Vec<f64>)> {
        self.require_reachability()?;
        let nt = self.transients.len();
        let lu = self.i_minus_ptt().lu();
        let v = lu
            .solve(&DMatrix::identity(nt, nt))
            .ok_or_else(|| self.singularity_error())?;
        let absorption_time = (0..nt).map(|i| v.row(i).sum()).collect();
        Ok((v, absorption_time))
    }

    /// All three absorption quantities from one factorization.
    pub fn absorption_result(&self) -> Result<AbsorptionResult> {
        self.require_reachability()?;
        let nt = self.transients.len();
        let lu = self.i_minus_ptt().lu();
        let v = lu
            .solve(&DMatrix::identity(nt, nt))
            .ok_or_else(|| self.singularity_error())?;
        let f = &v * self.p_ts_dense();
        let absorption_time = (0..nt).map(|i| v.row(i).sum()).collect();
        Ok(AbsorptionResult {
            f,
            v,
            absorption_time,
        })
    }

    fn singularity_error(&self) -> Error {
        // Reachability was checked, so a singular solve means numerical
        // breakdown; report it as the same class of failure with everyone
        // implicated rather than panicking.
        Error::SinksUnreachable {
            labels: self
                .transients
                .iter()
                .map(|&i| self.labels[i].clone())
                .collect(),
        }
    }
}

/// Block selector for [`AbsorbingPartition::block`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    SS,
    ST,
    TS,
    TT,
}

/// Materializes row `i` of `p` including the virtual dangling contribution.
fn full_row(p: &TransitionMatrix, i: NodeId) -> Vec<(NodeId, f64)> {
    if p.is_dangling(i) {
        match p.policy() {
            DanglingPolicy::Uniform => {
                let share = 1.0 / p.node_count() as f64;
                return (0..p.node_count()).map(|j| (j, share)).collect();
            }
            DanglingPolicy::SelfLoop => return vec![(i, 1.0)],
            DanglingPolicy::Error => unreachable!("rejected at construction"),
        }
    }
    p.row(i).collect()
}

/// Absorption time of every transient when `sinks` absorb, allowing
/// non-absorbing components: nodes that can wander forever (because they can
/// reach a region with no path back to any sink) get `f64::INFINITY`.
///
/// Returned in the order of `partition.transients()`.
pub fn absorption_times_allowing_infinite(partition: &AbsorbingPartition) -> Result<Vec<f64>> {
    let nt = partition.transients.len();
    let trapped = partition.trapped();
    if trapped.is_empty() {
        let (_, t) = partition.fundamental_matrix()?;
        return Ok(t);
    }
    // Transient positions that can reach a trapped node have infinite
    // expected absorption time; the rest form a closed subsystem (an edge
    // from the finite part into the infinite part would contradict
    // finiteness), solved on its own.
    let mut pos_of = HashMap::new();
    for (k, &t) in partition.transients.iter().enumerate() {
        pos_of.insert(t, k);
    }
    let trapped_pos: Vec<usize> = trapped.iter().map(|t| pos_of[t]).collect();
    // Reverse BFS from trapped positions over P_TT.
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); nt];
    for (i, row) in partition.p_tt.iter().enumerate() {
        for &(j, _) in row {
            rev[j].push(i);
        }
    }
    let mut infinite = vec![false; nt];
    let mut queue = trapped_pos.clone();
    for &t in &trapped_pos {
        infinite[t] = true;
    }
    while let Some(j) = queue.pop() {
        for &i in &rev[j] {
            if !infinite[i] {
                infinite[i] = true;
                queue.push(i);
            }
        }
    }
    let finite: Vec<usize> = (0..nt).filter(|&i| !infinite[i]).collect();
    let mut times = vec![f64::INFINITY; nt];
    if !finite.is_empty() {
        let mut dense_pos = vec![usize::MAX; nt];
        for (k, &i) in finite.iter().enumerate() {
            dense_pos[i] = k;
        }
        let nf = finite.len();
        let mut m = DMatrix::identity(nf, nf);
        for (k, &i) in finite.iter().enumerate() {
            for &(j, prob) in &partition.p_tt[i] {
                debug_assert!(
                    !infinite[j],
                    "finite transient stepping into the infinite part"
                );
                m[(k, dense_pos[j])] -= prob;
            }
        }
        let rhs = DMatrix::from_element(nf, 1, 1.0);
        let sol = m.lu().solve(&rhs).ok_or_else(|| Error::SinksUnreachable {
            labels: finite
                .iter()
                .map(|&i| partition.labels[partition.transients[i]].clone())
                .collect(),
        })?;
        for (k, &i) in finite.iter().enumerate() {
            times[i] = sol[(k, 0)];
        }
    }
    Ok(times)
}

/// Greedy diversity re-ranking: the first pick is the PageRank winner; each
/// later pick is the node with the longest expected absorption time given
/// all previous picks as absorbing sinks (recomputed from scratch each
/// round). Unreachable candidates count as infinitely far and are preferred;
/// all ties break by ascending id.
pub fn diverse_ranking(
    p: &TransitionMatrix,
    params: &PageRankParams,
    list_length: usize,
    labels: Vec<String>,
) -> Result<Vec<NodeId>> {
    let n = p.node_count();
    if list_length == 0 || list_length >= n {
        return Err(Error::BadParameter {
            name: "list_length",
            value: list_length as f64,
            expected: "between 1 and N−1",
        });
    }
    let ranks = pagerank(p, params)?.ranked();
    let mut chosen = vec![ranks[0]];
    while chosen.len() < list_length {
        let partition = AbsorbingPartition::with_sinks(p, &chosen, labels.clone())?;
        let times = absorption_times_allowing_infinite(&partition)?;
        let best = partition
            .transients
            .iter()
            .zip(&times)
            .max_by(|(ia, ta), (ib, tb)| {
                // Prefer longer time; on exact ties prefer the smaller id.
                ta.partial_cmp(tb)
                    .expect("absorption times are never NaN")
                    .then(ib.cmp(ia))
            })
            .map(|(&i, _)| i)
            .expect("at least one transient remains (list_length < N)");
        chosen.push(best);
    }
    Ok(chosen)
}

/// Discrete heat equation with fixed boundary values: every free node's
/// temperature equals the transition-weighted average of its neighbors',
/// solved as absorption probabilities toward the boundary combined by the
/// boundary temperatures. Returns a raw score vector over all nodes.
pub fn heat_equilibrium(g: &DirectedGraph, boundary: &[(NodeId, f64)]) -> Result<ScoreVector> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if boundary.is_empty() {
        return Err(Error::BadParameter {
            name: "boundary",
            value: 0.0,
            expected: "at least one fixed node",
        });
    }
    let mut temps = vec![None; n];
    for &(i, t) in boundary {
        if i >= n {
            return Err(Error::BadParameter {
                name: "boundary id",
                value: i as f64,
                expected: "id below the node count",
            });
        }
        if !t.is_finite() {
            return Err(Error::BadParameter {
                name: "boundary temperature",
                value: t,
                expected: "finite value",
            });
        }
        temps[i] = Some(t);
    }
    let mut values = vec![0.0; n];
    let fixed: Vec<NodeId> = (0..n).filter(|&i| temps[i].is_some()).collect();
    for &i in &fixed {
        values[i] = temps[i].expect("fixed node");
    }
    if fixed.len() == n {
        return ScoreVector::raw(values);
    }
    // The self-loop policy keeps free nodes without out-links in place, so
    // they surface as unreachable instead of teleporting across the graph.
    let p = TransitionMatrix::from_graph(g, DanglingPolicy::SelfLoop)?;
    let labels: Vec<String> = g.labels().map(str::to_owned).collect();
    let partition = AbsorbingPartition::with_sinks(&p, &fixed, labels)?;
    let f = partition.absorption_probabilities()?;
    for (row, &i) in partition.transients().iter().enumerate() {
        let mut x = 0.0;
        for (col, &s) in partition.sinks().iter().enumerate() {
            x += f[(row, col)] * temps[s].expect("sinks are the fixed nodes");
        }
        values[i] = x;
    }
    ScoreVector::raw(values)
}

/// Passing probabilities and influence on a DAG.
#[derive(Debug, Clone)]
pub struct DagInfluence {
    /// `g_pass[(i, j)]`: probability that a walk started at `j` passes
    /// through `i`; diagonal fixed at 1. Exact on a DAG, where no node can
    /// be visited twice.
    pub g_pass: DMatrix<f64>,
    /// Per node `i`: `Σ_j g_pass[(i, j)] − 1`, the expected number of other
    /// nodes whose walks cross `i`.
    pub aggregate_impact: Vec<f64>,
    /// Per node `i`: how many other nodes can reach `i` along edges.
    pub progeny_size: Vec<usize>,
}

/// Topological order by Kahn's algorithm, or the label of a node stuck on a
/// cycle.
fn topological_order(g: &DirectedGraph) -> Result<Vec<NodeId>> {
    let n = g.node_count();
    let mut indegree = vec![0usize; n];
    for i in 0..n {
        for (j, _) in g.out_edges(i) {
            indegree[j] += 1;
        }
    }
    let mut ready: Vec<NodeId> = (0..n).filter(|&i| indegree[i] == 0).collect();
    ready.reverse();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = ready.pop() {
        order.push(u);
        for (v, _) in g.out_edges(u) {
            indegree[v] -= 1;
            if indegree[v] == 0 {
                ready.push(v);
            }
        }
    }
    if order.len() < n {
        let stuck = (0..n)
            .find(|&i| indegree[i] > 0)
            .expect("some node is on a cycle");
        return Err(Error::NotAcyclic {
            label: g.label(stuck).to_owned(),
        });
    }
    Ok(order)
}

/// Computes passing probabilities `G` by dynamic programming over the
/// topological order, plus aggregate impact and progeny sizes.
///
/// The walk follows stored edge direction with out-weight-normalized steps
/// and stops at nodes without out-links.
pub fn dag_influence(g: &DirectedGraph) -> Result<DagInfluence> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let order = topological_order(g)?;
    // Row-normalized step probabilities; leaves keep empty rows (walk ends).
    let step: Vec<Vec<(NodeId, f64)>> = (0..n)
        .map(|i| {
            let s = g.out_strength(i);
            g.out_edges(i).map(|(j, w)| (j, w / s)).collect()
        })
        .collect();
    let mut g_pass = DMatrix::zeros(n, n);
    for &start in &order {
        let mut pass = vec![0.0; n];
        pass[start] = 1.0;
        for &u in &order {
            if pass[u] == 0.0 {
                continue;
            }
            for &(w, p) in &step[u] {
                pass[w] += pass[u] * p;
            }
        }
        for i in 0..n {
            g_pass[(i, start)] = pass[i];
        }
    }
    let aggregate_impact: Vec<f64> = (0..n).map(|i| g_pass.row(i).sum() - 1.0).collect();
    let rev = g.reverse_adjacency();
    let progeny_size: Vec<usize> = (0..n)
        .map(|i| {
            // BFS over reversed edges: nodes whose walks can reach i.
            let mut seen = vec![false; n];
            seen[i] = true;
            let mut queue = vec![i];
            let mut count = 0;
            while let Some(u) = queue.pop() {
                for &v in &rev[u] {
                    if !seen[v] {
                        seen[v] = true;
                        count += 1;
                        queue.push(v);
                    }
                }
            }
            count
        })
        .collect();
    Ok(DagInfluence {
        g_pass,
        aggregate_impact,
        progeny_size,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DirectedGraph;
    use approx::assert_abs_diff_eq;

    fn labels_of(g: &DirectedGraph) -> Vec<String> {
        g.labels().map(str::to_owned).collect()
    }

    fn sink_partition(g: &DirectedGraph, sinks: &[NodeId]) -> AbsorbingPartition {
        let p = TransitionMatrix::from_graph(g, DanglingPolicy::SelfLoop).unwrap();
        AbsorbingPartition::with_sinks(&p, sinks, labels_of(g)).unwrap()
    }

    /// Path a–b–c with both ends absorbing.
    fn path3() -> DirectedGraph {
        DirectedGraph::from_undirected_edges([("a", "b", 1.0), ("b", "c", 1.0)])
    }

    #[test]
    fn path_partition_shapes() {
        let part = sink_partition(&path3(), &[0, 2]);
        assert_eq!(part.sinks(), &[0, 2]);
        assert_eq!(part.transients(), &[1]);
        assert!(part.block(Block::TT)[0].is_empty(), "P_TT is 1×1 zero");
        assert_eq!(part.block(Block::ST)[0], vec![], "sink rows are absorbing");
        assert_eq!(part.block(Block::SS)[0], vec![(0, 1.0)]);
    }

    #[test]
    fn five_node_partition_block_shapes() {
        let g = DirectedGraph::from_undirected_edges([
            ("a", "b", 1.0),
            ("b", "c", 1.0),
            ("c", "d", 1.0),
            ("d", "e", 1.0),
            ("e", "a", 1.0),
        ]);
        let part = sink_partition(&g, &[0, 3]);
        assert_eq!(part.block(Block::SS).len(), 2);
        assert_eq!(part.block(Block::TS).len(), 3);
        // Column spans: ST columns index transients (3), TS columns sinks (2).
        assert!(part
            .block(Block::TS)
            .iter()
            .flatten()
            .all(|&(j, _)| j < 2));
        assert!(part
            .block(Block::TT)
            .iter()
            .flatten()
            .all(|&(j, _)| j < 3));
    }

    #[test]
    fn empty_or_full_sink_sets_are_rejected() {
        let g = path3();
        let p = TransitionMatrix::from_graph(&g, DanglingPolicy::SelfLoop).unwrap();
        assert!(matches!(
            AbsorbingPartition::with_sinks(&p, &[], labels_of(&g)),
            Err(Error::BadPartition { sinks: 0, .. })
        ));
        assert!(matches!(
            AbsorbingPartition::with_sinks(&p, &[0, 1, 2], labels_of(&g)),
            Err(Error::BadPartition { sinks: 3, .. })
        ));
    }

    #[test]
    fn immediate_absorption_gives_f_equals_pts() {
        // P_TT = 0: the middle of the path absorbs in one step, (1/2, 1/2).
        let part = sink_partition(&path3(), &[0, 2]);
        let f = part.absorption_probabilities().unwrap();
        assert_abs_diff_eq!(f[(0, 0)], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(f[(0, 1)], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn absorption_rows_sum_to_one() {
        let g = DirectedGraph::from_undirected_edges([
            ("s1", "t1", 1.0),
            ("t1", "t2", 2.0),
            ("t2", "s2", 1.0),
            ("t1", "s2", 0.5),
        ]);
        let part = sink_partition(&g, &[0, 3]);
        let f = part.absorption_probabilities().unwrap();
        for i in 0..part.transients().len() {
            assert_abs_diff_eq!(f.row(i).sum(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn trapped_transients_are_named() {
        // d has no path to the sink; b and c do.
        let g = DirectedGraph::from_edges([
            ("a", "a", 1.0),
            ("b", "a", 1.0),
            ("c", "b", 1.0),
            ("d", "d", 1.0),
        ]);
        let part = sink_partition(&g, &[0]);
        match part.absorption_probabilities() {
            Err(Error::SinksUnreachable { labels }) => assert_eq!(labels, vec!["d"]),
            other => panic!("expected reachability error, got {other:?}"),
        }
    }

    #[test]
    fn fundamental_matrix_geometric_series() {
        // Transient with a self-loop of probability 3/4 and 1/4 to the sink:
        // V = 1/(1−3/4) = 4 visits, absorption time 4.
        let g = DirectedGraph::from_edges([("t", "t", 3.0), ("t", "s", 1.0), ("s", "s", 1.0)]);
        let part = sink_partition(&g, &[1]);
        let (v, t) = part.fundamental_matrix().unwrap();
        assert_abs_diff_eq!(v[(0, 0)], 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t[0], 4.0, epsilon = 1e-12);
    }

    #[test]
    fn fundamental_matrix_identity_when_ptt_zero() {
        let part = sink_partition(&path3(), &[0, 2]);
        let (v, t) = part.fundamental_matrix().unwrap();
        assert_eq!(v[(0, 0)], 1.0);
        assert_eq!(t, vec![1.0]);
    }

    #[test]
    fn symmetric_path_has_equal_absorption_times() {
        let g = DirectedGraph::from_undirected_edges([
            ("s1", "t1", 1.0),
            ("t1", "t2", 1.0),
            ("t2", "s2", 1.0),
        ]);
        let part = sink_partition(&g, &[0, 3]);
        let (_, t) = part.fundamental_matrix().unwrap();
        assert_abs_diff_eq!(t[0], t[1], epsilon = 1e-12);
    }

    #[test]
    fn source_semantics_keeps_emission_block() {
        // source → transient → source: the walker always returns, H = 1.
        let g = DirectedGraph::from_edges([("src", "t", 1.0), ("t", "src", 1.0)]);
        let p = TransitionMatrix::from_graph(&g, DanglingPolicy::SelfLoop).unwrap();
        let part = AbsorbingPartition::with_sources(&p, &[0], labels_of(&g)).unwrap();
        let h = part.expected_visits_from_sources().unwrap();
        assert_abs_diff_eq!(h[(0, 0)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn source_star_with_hub_self_loop() {
        // Hub keeps probability 1/2 on itself, so expected visits double.
        let g = DirectedGraph::from_edges([
            ("s1", "hub", 1.0),
            ("s2", "hub", 1.0),
            ("hub", "hub", 1.0),
            ("hub", "s1", 0.5),
            ("hub", "s2", 0.5),
        ]);
        let p = TransitionMatrix::from_graph(&g, DanglingPolicy::SelfLoop).unwrap();
        // Interning order puts the hub at id 1, the sources at 0 and 2.
        let part = AbsorbingPartition::with_sources(&p, &[0, 2], labels_of(&g)).unwrap();
        let h = part.expected_visits_from_sources().unwrap();
        // P_ST entries are 1 (each source sends everything to the hub);
        // (1 − 1/2)⁻¹ = 2.
        assert_abs_diff_eq!(h[(0, 0)], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h[(1, 0)], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn sink_semantics_refuses_source_queries() {
        let part = sink_partition(&path3(), &[0]);
        assert!(part.expected_visits_from_sources().is_err());
    }

    #[test]
    fn diverse_ranking_starts_with_pagerank_winner() {
        let g = DirectedGraph::from_undirected_edges([
            ("hub", "a", 1.0),
            ("hub", "b", 1.0),
            ("hub", "c", 1.0),
            ("a", "b", 1.0),
        ]);
        let p = TransitionMatrix::from_graph(&g, DanglingPolicy::Uniform).unwrap();
        let ranked = pagerank(&p, &PageRankParams::default()).unwrap().ranked();
        let picks = diverse_ranking(&p, &PageRankParams::default(), 1, labels_of(&g)).unwrap();
        assert_eq!(picks, vec![ranked[0]]);
    }

    #[test]
    fn diverse_ranking_jumps_components() {
        // Two triangles with no connection: the second pick must come from
        // the component not containing the first (infinite absorption time).
        let g = DirectedGraph::from_undirected_edges([
            ("a1", "a2", 1.0),
            ("a2", "a3", 1.0),
            ("a3", "a1", 1.0),
            ("b1", "b2", 1.0),
            ("b2", "b3", 1.0),
            ("b3", "b1", 1.0),
        ]);
        let p = TransitionMatrix::from_graph(&g, DanglingPolicy::Uniform).unwrap();
        let picks = diverse_ranking(&p, &PageRankParams::default(), 2, labels_of(&g)).unwrap();
        let comp = |i: NodeId| if i < 3 { 0 } else { 1 };
        assert_ne!(comp(picks[0]), comp(picks[1]), "picks: {picks:?}");
    }

    #[test]
    fn heat_equilibrium_is_constant_with_constant_boundary() {
        let g = DirectedGraph::from_undirected_edges([
            ("a", "b", 1.0),
            ("b", "c", 2.0),
            ("c", "a", 1.0),
            ("c", "d", 1.0),
        ]);
        let x = heat_equilibrium(&g, &[(0, 3.5), (3, 3.5)]).unwrap();
        for &v in x.values() {
            assert_abs_diff_eq!(v, 3.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn heat_equilibrium_interpolates_a_path() {
        let g = DirectedGraph::from_undirected_edges([("0", "1", 1.0), ("1", "2", 1.0)]);
        let x = heat_equilibrium(&g, &[(0, 0.0), (2, 1.0)]).unwrap();
        assert_abs_diff_eq!(x.values()[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn heat_equilibrium_reports_unreachable_free_nodes() {
        let g = DirectedGraph::from_edges([("a", "b", 1.0), ("lone", "lone", 1.0)]);
        let err = heat_equilibrium(&g, &[(1, 1.0)]).unwrap_err();
        match err {
            Error::SinksUnreachable { labels } => assert_eq!(labels, vec!["lone"]),
            other => panic!("expected reachability error, got {other:?}"),
        }
    }

    #[test]
    fn dag_influence_chain_and_diamond() {
        let chain = DirectedGraph::from_edges([("j", "i", 1.0)]);
        let d = dag_influence(&chain).unwrap();
        assert_abs_diff_eq!(d.g_pass[(1, 0)], 1.0);
        assert_abs_diff_eq!(d.aggregate_impact[1], 1.0);

        let diamond = DirectedGraph::from_edges([
            ("j", "a", 1.0),
            ("j", "b", 1.0),
            ("a", "i", 1.0),
            ("b", "i", 1.0),
        ]);
        let d = dag_influence(&diamond).unwrap();
        let (j, a, i) = (0, 1, 3);
        assert_abs_diff_eq!(d.g_pass[(i, j)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.g_pass[(a, j)], 0.5, epsilon = 1e-15);
        assert_eq!(d.progeny_size[i], 3, "i is reachable from j, a, b");
        assert!(d.aggregate_impact[i] <= d.progeny_size[i] as f64);
    }

    #[test]
    fn dag_influence_rejects_cycles() {
        let g = DirectedGraph::from_edges([("a", "b", 1.0), ("b", "a", 1.0)]);
        assert!(matches!(dag_influence(&g), Err(Error::NotAcyclic { .. })));
    }
}
