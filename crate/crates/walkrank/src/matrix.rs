//! Row-stochastic walk operators, the column-normalized heat operator, and
//! the score vector type every algorithm returns.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};

/// Minimum vector length before matrix–vector products fan out to rayon.
/// Each output entry is summed in a fixed order, so results are bitwise
/// identical for any worker count.
const PARALLEL_CUTOFF: usize = 4096;

/// What to do with rows whose node has no out-going links.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DanglingPolicy {
    /// Replace the empty row by the uniform row `1/N` (never materialized).
    #[default]
    Uniform,
    /// Put the whole mass on the diagonal: the walker stays put.
    SelfLoop,
    /// Refuse to build the matrix, listing the offending nodes.
    Error,
}

/// Row-stochastic sparse transition matrix `P` with `P_ij = w_ij / Σ_k w_ik`.
///
/// Dangling rows (zero out-strength) are handled by the recorded policy and
/// kept *virtual*: the stored sparse structure contains only real edges, and
/// the multiply/densify routines add the policy contribution on the fly.
/// Every row sums to 1 within 1e−12 after policy application.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    n: usize,
    // Row view (CSR): out-edges with normalized probabilities.
    row_ptr: Vec<usize>,
    col_idx: Vec<NodeId>,
    probs: Vec<f64>,
    // Column view (CSR of the transpose) for pull-style `Pᵀh` products.
    tr_row_ptr: Vec<usize>,
    tr_col_idx: Vec<NodeId>,
    tr_probs: Vec<f64>,
    dangling: Vec<NodeId>,
    is_dangling: Vec<bool>,
    policy: DanglingPolicy,
}

impl TransitionMatrix {
    /// Normalizes the out-going weights of every node of `g` into transition
    /// probabilities, applying `policy` to nodes without out-going links.
    pub fn from_graph(g: &DirectedGraph, policy: DanglingPolicy) -> Result<Self> {
        let n = g.node_count();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut dangling = Vec::new();
        let mut is_dangling = vec![false; n];
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(g.edge_count());
        let mut probs = Vec::with_capacity(g.edge_count());
        for i in 0..n {
            let strength = g.out_strength(i);
            if strength == 0.0 {
                dangling.push(i);
                is_dangling[i] = true;
            } else {
                for (j, w) in g.out_edges(i) {
                    col_idx.push(j);
                    probs.push(w / strength);
                }
            }
            row_ptr[i + 1] = col_idx.len();
        }
        if policy == DanglingPolicy::Error && !dangling.is_empty() {
            return Err(Error::DanglingNodes {
                labels: dangling.iter().map(|&i| g.label(i).to_owned()).collect(),
            });
        }
        let (tr_row_ptr, tr_col_idx, tr_probs) =
            transpose_csr(n, &row_ptr, &col_idx, &probs);
        Ok(TransitionMatrix {
            n,
            row_ptr,
            col_idx,
            probs,
            tr_row_ptr,
            tr_col_idx,
            tr_probs,
            dangling,
            is_dangling,
            policy,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn policy(&self) -> DanglingPolicy {
        self.policy
    }

    /// Ids of rows with no real out-going links, in ascending order.
    pub fn dangling_rows(&self) -> &[NodeId] {
        &self.dangling
    }

    pub fn is_dangling(&self, i: NodeId) -> bool {
        self.is_dangling[i]
    }

    /// Stored (real) entries of row `i`, sorted by column.
    pub fn row(&self, i: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.probs[r].iter().copied())
    }

    /// Row sum after policy application; 1 within 1e−12 for every row.
    pub fn row_sum(&self, i: NodeId) -> f64 {
        if self.is_dangling[i] {
            match self.policy {
                DanglingPolicy::Uniform | DanglingPolicy::SelfLoop => 1.0,
                DanglingPolicy::Error => unreachable!("rejected at construction"),
            }
        } else {
            self.row(i).map(|(_, p)| p).sum()
        }
    }

    /// Probability `P_ij` including the virtual policy contribution.
    pub fn prob(&self, i: NodeId, j: NodeId) -> f64 {
        if self.is_dangling[i] {
            return match self.policy {
                DanglingPolicy::Uniform => 1.0 / self.n as f64,
                DanglingPolicy::SelfLoop => {
                    if i == j {
                        1.0
                    } else {
                        0.0
                    }
                }
                DanglingPolicy::Error => unreachable!("rejected at construction"),
            };
        }
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(pos) => self.probs[r.start + pos],
            Err(_) => 0.0,
        }
    }

    /// Pull-style product `out = Pᵀ h`, the workhorse of every walk update.
    pub fn apply_transpose(&self, h: &[f64], out: &mut [f64]) {
        assert_eq!(h.len(), self.n);
        assert_eq!(out.len(), self.n);
        let pull = |j: usize| -> f64 {
            let r = self.tr_row_ptr[j]..self.tr_row_ptr[j + 1];
            self.tr_col_idx[r.clone()]
                .iter()
                .zip(&self.tr_probs[r])
                .map(|(&i, &p)| p * h[i])
                .sum()
        };
        if self.n >= PARALLEL_CUTOFF {
            out.par_iter_mut()
                .enumerate()
                .for_each(|(j, o)| *o = pull(j));
        } else {
            for (j, o) in out.iter_mut().enumerate() {
                *o = pull(j);
            }
        }
        match self.policy {
            DanglingPolicy::Uniform => {
                let mass: f64 = self.dangling.iter().map(|&d| h[d]).sum();
                if mass != 0.0 {
                    let share = mass / self.n as f64;
                    for o in out.iter_mut() {
                        *o += share;
                    }
                }
            }
            DanglingPolicy::SelfLoop => {
                for &d in &self.dangling {
                    out[d] += h[d];
                }
            }
            DanglingPolicy::Error => {}
        }
    }

    /// Materializes the full matrix, policy rows included, for direct solves.
    /// Refuses above `threshold` nodes.
    pub fn to_dense(&self, threshold: usize) -> Result<DMatrix<f64>> {
        if self.n > threshold {
            return Err(Error::DenseSizeExceeded {
                n: self.n,
                threshold,
            });
        }
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, p) in self.row(i) {
                m[(i, j)] = p;
            }
        }
        for &d in &self.dangling {
            match self.policy {
                DanglingPolicy::Uniform => {
                    let share = 1.0 / self.n as f64;
                    for j in 0..self.n {
                        m[(d, j)] = share;
                    }
                }
                DanglingPolicy::SelfLoop => m[(d, d)] = 1.0,
                DanglingPolicy::Error => unreachable!("rejected at construction"),
            }
        }
        Ok(m)
    }
}

/// Builds the CSR of the transpose with a counting sort; within each output
/// row, source ids end up ascending, fixing the summation order.
fn transpose_csr(
    n: usize,
    row_ptr: &[usize],
    col_idx: &[NodeId],
    values: &[f64],
) -> (Vec<usize>, Vec<NodeId>, Vec<f64>) {
    let nnz = col_idx.len();
    let mut out_ptr = vec![0usize; n + 1];
    for &j in col_idx {
        out_ptr[j + 1] += 1;
    }
    for j in 0..n {
        out_ptr[j + 1] += out_ptr[j];
    }
    let mut cursor = out_ptr.clone();
    let mut out_idx = vec![0 as NodeId; nnz];
    let mut out_val = vec![0.0; nnz];
    for i in 0..n {
        for k in row_ptr[i]..row_ptr[i + 1] {
            let j = col_idx[k];
            out_idx[cursor[j]] = i;
            out_val[cursor[j]] = values[k];
            cursor[j] += 1;
        }
    }
    (out_ptr, out_idx, out_val)
}

/// Column-normalized spreading operator `O_ij = w_ij / s_j` (`s_j` is the
/// in-strength of `j`). One step of `x ← Oᵀx` replaces every node's value by
/// the in-strength-weighted average of its in-neighbors' values; on an
/// unweighted undirected graph that is plain neighbor averaging.
#[derive(Debug, Clone)]
pub struct HeatOperator {
    n: usize,
    // Per receiving node j: in-edges (source i, w_ij / s_j).
    row_ptr: Vec<usize>,
    src_idx: Vec<NodeId>,
    coeffs: Vec<f64>,
    zero_columns: Vec<NodeId>,
}

impl HeatOperator {
    pub fn from_graph(g: &DirectedGraph) -> Result<Self> {
        let n = g.node_count();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        // Receiving rows = rows of the transpose, normalized per receiver.
        let mut row_ptr = vec![0usize; n + 1];
        let mut entries: Vec<(NodeId, NodeId, f64)> = Vec::with_capacity(g.edge_count());
        for i in 0..n {
            for (j, w) in g.out_edges(i) {
                entries.push((j, i, w));
            }
        }
        entries.sort_unstable_by_key(|e| (e.0, e.1));
        let mut src_idx = Vec::with_capacity(entries.len());
        let mut coeffs = Vec::with_capacity(entries.len());
        let mut zero_columns = Vec::new();
        for &(j, i, w) in &entries {
            src_idx.push(i);
            coeffs.push(w / g.in_strength(j));
            row_ptr[j + 1] = src_idx.len();
        }
        for j in 0..n {
            if row_ptr[j + 1] < row_ptr[j] {
                row_ptr[j + 1] = row_ptr[j];
            }
            if g.in_strength(j) == 0.0 {
                zero_columns.push(j);
            }
        }
        Ok(HeatOperator {
            n,
            row_ptr,
            src_idx,
            coeffs,
            zero_columns,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Nodes with zero in-strength: their value is forced to 0 by a division
    /// guard instead of dividing by zero. Callers may warn about these.
    pub fn zero_columns(&self) -> &[NodeId] {
        &self.zero_columns
    }

    /// One spreading step `x ← Oᵀx`.
    pub fn step(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(out.len(), self.n);
        for j in 0..self.n {
            let r = self.row_ptr[j]..self.row_ptr[j + 1];
            out[j] = self.src_idx[r.clone()]
                .iter()
                .zip(&self.coeffs[r])
                .map(|(&i, &c)| c * x[i])
                .sum();
        }
    }

    /// Normalized in-edge coefficients of receiving node `j`.
    pub fn incoming(&self, j: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        let r = self.row_ptr[j]..self.row_ptr[j + 1];
        self.src_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.coeffs[r].iter().copied())
    }
}

/// Declared normalization of a [`ScoreVector`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Entries sum to 1.
    SumOne,
    /// Entries average to 1 (the convention of the centrality table).
    MeanOne,
    /// Maximum entry is 1.
    MaxOne,
    /// No constraint.
    #[default]
    Raw,
}

/// Node-id-indexed scores with a declared, verified normalization.
/// Entries are always finite; the declared normalization holds within 1e−9.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    values: Vec<f64>,
    normalization: Normalization,
}

impl ScoreVector {
    /// Wraps raw values, only checking finiteness.
    pub fn raw(values: Vec<f64>) -> Result<Self> {
        Self::validate_finite(&values)?;
        Ok(ScoreVector {
            values,
            normalization: Normalization::Raw,
        })
    }

    /// Rescales `values` to satisfy `normalization` and wraps them.
    pub fn normalized(values: Vec<f64>, normalization: Normalization) -> Result<Self> {
        Self::validate_finite(&values)?;
        let mut sv = ScoreVector {
            values,
            normalization: Normalization::Raw,
        };
        sv.renormalize(normalization)?;
        Ok(sv)
    }

    fn validate_finite(values: &[f64]) -> Result<()> {
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::BadParameter {
                    name: "score",
                    value: *v,
                    expected: "finite value",
                });
            }
            let _ = i;
        }
        Ok(())
    }

    /// Rescales in place to the requested normalization.
    pub fn renormalize(&mut self, normalization: Normalization) -> Result<()> {
        let n = self.values.len();
        let scale = match normalization {
            Normalization::Raw => 1.0,
            Normalization::SumOne | Normalization::MeanOne => {
                let sum: f64 = self.values.iter().sum();
                if sum.abs() < f64::MIN_POSITIVE * n.max(1) as f64 || sum <= 0.0 {
                    return Err(Error::BadParameter {
                        name: "score sum",
                        value: sum,
                        expected: "positive sum for sum-one/mean-one normalization",
                    });
                }
                if normalization == Normalization::SumOne {
                    1.0 / sum
                } else {
                    n as f64 / sum
                }
            }
            Normalization::MaxOne => {
                let max = self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if !(max > 0.0) {
                    return Err(Error::BadParameter {
                        name: "score max",
                        value: max,
                        expected: "positive maximum for max-one normalization",
                    });
                }
                1.0 / max
            }
        };
        if scale != 1.0 {
            for v in &mut self.values {
                *v *= scale;
            }
        }
        self.normalization = normalization;
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: NodeId) -> f64 {
        self.values[i]
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Ids sorted by descending score; ties broken by ascending id.
    pub fn ranked(&self) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = (0..self.values.len()).collect();
        ids.sort_by(|&a, &b| {
            self.values[b]
                .total_cmp(&self.values[a])
                .then(a.cmp(&b))
        });
        ids
    }
}
