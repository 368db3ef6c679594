//! Span-program formulation of s-t connectivity and the walk operator used to
//! decide it by phase estimation.

use std::collections::VecDeque;

use log::warn;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{pair_count, AdjacencyString, Coalition, EdgeIndexMap, Graph};
use crate::linalg::{checked_svd, least_squares, null_space_projector, orthogonality_defect, projector_defect, SVD_REL_TOL};
use crate::qsim::{check_capacity, majority_failure_bound, phase_estimation, EmbeddedUnitary, PhaseEstimate, RegisterLayout, StateVector};

/// Default coupling is `COUPLING_SCALE / sqrt(|N|)`.
pub const COUPLING_SCALE: f64 = 0.25;

/// Extra phase-estimation bits on top of `ceil(log2 |N|^{3/2})`.
pub const GUARD_BITS: usize = 3;

/// Register holding the edge index in circuit mode.
pub const INDEX_REGISTER: &str = "idx";

/// Residual below which the target counts as spanned.
pub const SPAN_TOL: f64 = 1e-8;

pub fn default_coupling(n: usize) -> f64 {
    COUPLING_SCALE / (n as f64).sqrt()
}

/// `2^{-k} / sqrt(|N|)` for `k = 0..=k_max`.
pub fn coupling_scan(n: usize, k_max: u32) -> Vec<f64> {
    (0..=k_max).map(|k| 0.5f64.powi(k as i32) / (n as f64).sqrt()).collect()
}

/// `ceil(log2(|N|^{3/2})) + GUARD_BITS`.
pub fn bits_min(n: usize) -> usize {
    ((n as f64).powf(1.5).log2() - 1e-12).ceil().max(0.0) as usize + GUARD_BITS
}

/// Qubits needed to hold an index in `0..C(n,2)`.
pub fn index_qubits(n: usize) -> usize {
    let d = pair_count(n).max(2);
    (usize::BITS - (d - 1).leading_zeros()) as usize
}

fn basis(n: usize, k: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[k] = 1.0;
    v
}

/// Target `(|t> - |s>)/sqrt 2`, input vectors `(|u> - |w>)/sqrt 2` for every
/// pair index, and the adjacency string selecting the available ones.
#[derive(Clone, Debug)]
pub struct SpanProgramInstance {
    pub dim_nodes: usize,
    pub target: DVector<f64>,
    pub input_vectors: Vec<DVector<f64>>,
    pub selection: AdjacencyString,
    pub index_map: EdgeIndexMap,
    s: usize,
    t: usize,
}

impl SpanProgramInstance {
    pub fn vector_count(&self) -> usize {
        self.input_vectors.len()
    }

    pub fn available_indices(&self) -> Vec<usize> {
        (0..self.vector_count()).filter(|&k| self.selection.get(k)).collect()
    }

    /// Available vectors as columns, in [`available_indices`](Self::available_indices) order.
    pub fn available_matrix(&self) -> DMatrix<f64> {
        let idx = self.available_indices();
        DMatrix::from_fn(self.dim_nodes, idx.len(), |r, c| self.input_vectors[idx[c]][r])
    }

    /// `sum_k coeffs[k] * mu_k` over all pair indices; unavailable indices
    /// contribute the zero vector.
    pub fn reconstruct(&self, coeffs: &[f64]) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim_nodes);
        for (k, a) in coeffs.iter().enumerate() {
            if self.selection.get(k) {
                out += &self.input_vectors[k] * *a;
            }
        }
        out
    }
}

pub fn build_span_program(g: &Graph) -> Result<SpanProgramInstance> {
    if g.is_trivially_connected() {
        return Err(Error::TriviallyConnected);
    }
    let n = g.n();
    let map = g.edge_index_map();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let target = (basis(n, g.t()) - basis(n, g.s())) * r;
    let input_vectors = (0..map.len())
        .map(|k| {
            let (u, w) = map.pair(k).expect("index in range");
            (basis(n, u) - basis(n, w)) * r
        })
        .collect();
    Ok(SpanProgramInstance {
        dim_nodes: n,
        target,
        input_vectors,
        selection: g.adjacency_string(),
        index_map: map,
        s: g.s(),
        t: g.t(),
    })
}

/// Whether the target lies in the span of the available vectors, decided by
/// least squares.
pub fn span_membership(inst: &SpanProgramInstance) -> bool {
    match least_squares(&inst.available_matrix(), &inst.target) {
        Ok((_, residual)) => residual <= SPAN_TOL,
        Err(e) => {
            warn!("least squares failed ({e}); reporting not spanned");
            false
        }
    }
}

/// Positive witness recovered by least squares.
#[derive(Clone, Debug, PartialEq)]
pub struct SpanWitness {
    /// Coefficient per pair index (zero for unavailable indices).
    pub coefficients: Vec<f64>,
    pub residual: f64,
}

impl SpanWitness {
    /// `sum_k coeffs[k]^2`.
    pub fn size(&self) -> f64 {
        self.coefficients.iter().map(|a| a * a).sum()
    }
}

pub fn span_witness(inst: &SpanProgramInstance) -> Result<Option<SpanWitness>> {
    let idx = inst.available_indices();
    let (x, residual) = least_squares(&inst.available_matrix(), &inst.target)?;
    if residual > SPAN_TOL {
        return Ok(None);
    }
    let mut coefficients = vec![0.0; inst.vector_count()];
    for (c, &k) in idx.iter().enumerate() {
        coefficients[k] = x[c];
    }
    Ok(Some(SpanWitness { coefficients, residual }))
}

/// Telescoping witness: `+-1` on the edges of a BFS path from `s` to `t`.
pub fn path_witness(inst: &SpanProgramInstance) -> Option<Vec<f64>> {
    let n = inst.dim_nodes;
    let mut parent = vec![usize::MAX; n];
    parent[inst.s] = inst.s;
    let mut queue = VecDeque::from([inst.s]);
    while let Some(u) = queue.pop_front() {
        for w in 0..n {
            if w == u || parent[w] != usize::MAX {
                continue;
            }
            let k = inst.index_map.index(u, w).ok()?;
            if inst.selection.get(k) {
                parent[w] = u;
                queue.push_back(w);
            }
        }
    }
    if parent[inst.t] == usize::MAX {
        return None;
    }
    let mut coeffs = vec![0.0; inst.vector_count()];
    let mut v = inst.t;
    while v != inst.s {
        let p = parent[v];
        let k = inst.index_map.index(p, v).ok()?;
        let (u, _) = inst.index_map.pair(k).ok()?;
        // step contributes (|v> - |p>)/sqrt2 and mu_k = (|u> - |w>)/sqrt2
        coeffs[k] = if u == v { 1.0 } else { -1.0 };
        v = p;
    }
    Some(coeffs)
}

/// The operators `M~`, `Lambda`, `Pi` and `U = (2 Lambda - I)(2 Pi - I)` over the
/// `C(|N|,2)`-dimensional index space.
#[derive(Clone, Debug)]
pub struct STConnOperator {
    pub n: usize,
    pub c: f64,
    pub dim: usize,
    pub m_tilde: DMatrix<f64>,
    pub lambda_proj: DMatrix<f64>,
    pub pi_proj: DMatrix<f64>,
    pub walk: DMatrix<f64>,
    /// BFS connectivity of the (gated) input, kept for scoring decisions.
    pub connected: bool,
}

/// Largest entry-wise violations of the operator identities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OperatorDefects {
    pub lambda: f64,
    pub pi: f64,
    pub walk_unitarity: f64,
    pub kernel: f64,
}

impl OperatorDefects {
    pub fn max(&self) -> f64 {
        self.lambda.max(self.pi).max(self.walk_unitarity).max(self.kernel)
    }
}

impl STConnOperator {
    pub fn index_qubits(&self) -> usize {
        index_qubits(self.n)
    }

    pub fn pi_rank(&self) -> usize {
        self.pi_proj.trace().round() as usize
    }

    pub fn defects(&self) -> OperatorDefects {
        OperatorDefects {
            lambda: projector_defect(&self.lambda_proj),
            pi: projector_defect(&self.pi_proj),
            walk_unitarity: orthogonality_defect(&self.walk),
            kernel: (&self.m_tilde * &self.lambda_proj).amax(),
        }
    }

    /// `U` acting on [`INDEX_REGISTER`], identity on padding values.
    pub fn embedded(&self) -> Result<EmbeddedUnitary> {
        EmbeddedUnitary::from_real(&[INDEX_REGISTER], &self.walk)
    }

    /// `|0>` on a fresh index register.
    pub fn initial_state(&self) -> Result<StateVector> {
        Ok(StateVector::new(RegisterLayout::new(&[(INDEX_REGISTER, self.index_qubits())])?))
    }
}

/// Builds the walk operator for `g`, gating each edge on both endpoints being
/// enabled in `q` when a coalition is given.
pub fn build_operator(g: &Graph, q: Option<&Coalition>, c: f64) -> Result<STConnOperator> {
    if g.is_trivially_connected() {
        return Err(Error::TriviallyConnected);
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidArgument(format!("coupling must be positive, got {c}")));
    }
    let gated = match q {
        Some(q) => g.induced_subgraph(q)?,
        None => g.clone(),
    };
    let inst = build_span_program(&gated)?;
    let n = g.n();
    let dim = inst.vector_count();
    let mut m_tilde = DMatrix::<f64>::zeros(n, dim);
    m_tilde.set_column(0, &(&inst.target * c));
    for k in 1..dim {
        m_tilde.set_column(k, &inst.input_vectors[k]);
    }
    let lambda_proj = null_space_projector(&m_tilde)?;
    let mut pi_proj = DMatrix::<f64>::zeros(dim, dim);
    pi_proj[(0, 0)] = 1.0;
    for k in inst.available_indices() {
        pi_proj[(k, k)] = 1.0;
    }
    let id = DMatrix::<f64>::identity(dim, dim);
    let walk = (&lambda_proj * 2.0 - &id) * (&pi_proj * 2.0 - &id);
    Ok(STConnOperator { n, c, dim, m_tilde, lambda_proj, pi_proj, walk, connected: gated.is_st_connected_bfs() })
}

/// Squared norm of the projection of `|0>` onto the `+1` eigenspace of `U`.
pub fn zero_eigenspace_overlap(op: &STConnOperator) -> Result<f64> {
    let shifted = &op.walk - DMatrix::<f64>::identity(op.dim, op.dim);
    let dec = checked_svd(&shifted)?;
    let v_t = dec.v_t.as_ref().expect("requested V");
    let zero = SVD_REL_TOL * dec.singular_values.max().max(1.0);
    Ok(dec
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= zero)
        .map(|(k, _)| v_t[(k, 0)] * v_t[(k, 0)])
        .sum())
}

/// Reference decision: connected iff `|0>` has at least half its weight in the
/// `+1` eigenspace of `U`.
pub fn decide_spectral(op: &STConnOperator) -> Result<bool> {
    Ok(zero_eigenspace_overlap(op)? >= 0.5)
}

/// Phase estimation of `U` on `|0>`.
pub fn walk_phase_estimation(op: &STConnOperator, bits: usize) -> Result<PhaseEstimate> {
    check_capacity(op.index_qubits() + bits)?;
    phase_estimation(&op.embedded()?, &op.initial_state()?, bits)
}

/// Outcome of [`decide_pe`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeDecision {
    pub connected: bool,
    pub shots: usize,
    /// Shots that read phase 0.
    pub zero_readings: usize,
    /// Fraction of shots whose claim matches breadth-first search.
    pub success_frequency: f64,
    /// Exact probability of reading 0.
    pub zero_probability: f64,
    pub queries: u64,
    /// True when the circuit did not fit and the spectral decision was used.
    pub spectral_fallback: bool,
}

/// Per-shot claim "connected iff the phase reading is 0", majority over shots.
pub fn decide_pe<R: Rng + ?Sized>(op: &STConnOperator, bits: usize, shots: usize, rng: &mut R) -> Result<PeDecision> {
    if shots == 0 {
        return Err(Error::InvalidArgument("at least one shot is required".into()));
    }
    let pe = match walk_phase_estimation(op, bits) {
        Ok(pe) => pe,
        Err(Error::Capacity { needed, cap }) => {
            warn!("phase estimation needs {needed} qubits (cap {cap}); using the spectral decision");
            let connected = decide_spectral(op)?;
            return Ok(PeDecision {
                connected,
                shots,
                zero_readings: if connected { shots } else { 0 },
                success_frequency: if connected == op.connected { 1.0 } else { 0.0 },
                zero_probability: f64::from(u8::from(connected)),
                queries: 0,
                spectral_fallback: true,
            });
        }
        Err(e) => return Err(e),
    };
    let zero_probability = pe.probability(0);
    let zero_readings = (0..shots).filter(|_| pe.sample(rng) == 0).count();
    let correct = if op.connected { zero_readings } else { shots - zero_readings };
    Ok(PeDecision {
        connected: zero_readings * 2 > shots,
        shots,
        zero_readings,
        success_frequency: correct as f64 / shots as f64,
        zero_probability,
        queries: pe.queries * shots as u64,
        spectral_fallback: false,
    })
}

/// Probability that a single phase-estimation shot gives the right answer.
pub fn single_shot_success(op: &STConnOperator, bits: usize) -> Result<f64> {
    let p0 = walk_phase_estimation(op, bits)?.probability(0);
    Ok(if op.connected { p0 } else { 1.0 - p0 })
}

/// Majority of `n_reps` independent single-shot decisions.
pub fn decide_with_majority<R: Rng + ?Sized>(op: &STConnOperator, bits: usize, n_reps: usize, rng: &mut R) -> Result<bool> {
    if n_reps % 2 == 0 {
        return Err(Error::InvalidArgument(format!("repetition count {n_reps} must be odd")));
    }
    Ok(decide_pe(op, bits, n_reps, rng)?.connected)
}

/// Exact failure probability of [`decide_with_majority`].
pub fn majority_failure(op: &STConnOperator, bits: usize, n_reps: usize) -> Result<f64> {
    let p = single_shot_success(op, bits)?;
    if p >= 1.0 {
        return Ok(0.0);
    }
    if p <= 0.5 {
        return Err(Error::InvalidArgument(format!("single-shot success {p:.3} is not above 1/2")));
    }
    Ok(majority_failure_bound(p, n_reps)?.exact_tail)
}
