//! Quantum Shapley estimation: gamma-weighted coalition state, value oracle
//! and amplitude estimation of the two expectation terms.

use log::warn;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Coalition, NodeId};
use crate::qsim::{
    amplitude_estimation, check_capacity, majority_failure_bound, majority_xor, AeEngine, Gate, RegisterLayout,
    StateVector,
};
use crate::shapley::{binomial, gamma, Game, Method, ShapleyEstimate};
use crate::span::{bits_min, build_operator, default_coupling, walk_phase_estimation};

pub const PT: &str = "Pt";
pub const PL: &str = "Pl";
pub const UT: &str = "Ut";
pub const AUX: &str = "aux";
pub const MAJ: &str = "maj";

/// Independent amplitude estimations per term; the median is reported.
pub const MEDIAN_REPS: usize = 3;

/// Extra partition bits on top of `ceil(log2(sqrt|F| / eps))`.
pub const ELL_GUARD_BITS: usize = 3;

pub const MAX_AE_BITS: usize = 16;
pub const MAX_ELL: usize = 16;

/// Largest graph accepted by the span-program backend.
pub const SPAN_PE_MAX_NODES: usize = 5;

/// `theta_k = asin(sqrt(k / 2^ell))` for `k = 0 .. 2^ell - 1`.
pub fn theta_values(ell: usize) -> Result<Vec<f64>> {
    if ell == 0 || ell > MAX_ELL {
        return Err(Error::InvalidArgument(format!("partition width {ell} outside 1..={MAX_ELL}")));
    }
    let m = (1usize << ell) as f64;
    Ok((0..1usize << ell).map(|k| (k as f64 / m).sqrt().asin()).collect())
}

/// `ceil(log2(sqrt(|F|) / eps)) + ELL_GUARD_BITS`.
pub fn ell_for(n_players: usize, epsilon: f64) -> usize {
    let raw = ((n_players.max(1) as f64).sqrt() / epsilon).log2().ceil();
    raw.max(0.0) as usize + ELL_GUARD_BITS
}

/// Smallest `m` with `pi/2^m + pi^2/4^m <= eps/2`.
pub fn ae_bits_for(epsilon: f64) -> Result<usize> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    (1..=MAX_AE_BITS)
        .find(|&m| crate::qsim::ae_error_bound(m) <= epsilon / 2.0)
        .ok_or_else(|| Error::InvalidArgument(format!("epsilon {epsilon} is below the achievable grid resolution")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GammaPrepConfig {
    pub ell: usize,
    pub n_players: usize,
    /// Position of the target player in the coalition layout.
    pub target_player: usize,
    pub include_target: bool,
}

impl GammaPrepConfig {
    pub fn new(ell: usize, n_players: usize, target_player: usize, include_target: bool) -> Result<Self> {
        if ell == 0 || ell > MAX_ELL {
            return Err(Error::InvalidArgument(format!("partition width {ell} outside 1..={MAX_ELL}")));
        }
        if target_player >= n_players {
            return Err(Error::InvalidArgument(format!("player position {target_player} outside 0..{n_players}")));
        }
        Ok(Self { ell, n_players, target_player, include_target })
    }

    fn free_count(&self) -> usize {
        self.n_players - 1
    }
}

/// `2^{-ell/2} sum_k |k> (x) prod_{j != i} (sqrt(1 - k/2^ell)|0> + sqrt(k/2^ell)|1>)`
/// with player `i` pinned to `include_target`. Layout: `Pt` then `Pl`.
pub fn prepare_player_state(cfg: &GammaPrepConfig) -> Result<StateVector> {
    check_capacity(cfg.ell + cfg.n_players)?;
    let layout = RegisterLayout::new(&[(PT, cfg.ell), (PL, cfg.n_players)])?;
    let mut state = StateVector::new(layout);
    state.apply_all(&Gate::H, PT)?;
    let angles: Vec<f64> = theta_values(cfg.ell)?.iter().map(|t| 2.0 * t).collect();
    for j in 0..cfg.n_players {
        let q = state.layout().qubit(PL, j)?;
        if j == cfg.target_player {
            if cfg.include_target {
                state.apply_gate(&Gate::X, q, &[])?;
            }
        } else {
            state.apply_controlled_ry_table(PT, q, &angles)?;
        }
    }
    Ok(state)
}

fn strip_bit(mask: usize, bit: usize) -> usize {
    let low = mask & ((1 << bit) - 1);
    let high = mask >> (bit + 1);
    low | (high << bit)
}

/// Reduced distribution over the free players, indexed by the coalition mask
/// with the target bit removed.
pub fn free_player_distribution(state: &StateVector, cfg: &GammaPrepConfig) -> Result<Vec<f64>> {
    let pl = state.reduced_diagonal(&[PL])?;
    let mut out = vec![0.0; 1 << cfg.free_count()];
    for (mask, p) in pl.iter().enumerate() {
        out[strip_bit(mask, cfg.target_player)] += p;
    }
    Ok(out)
}

/// `gamma(n, |R|)` for every subset `R` of `n` players.
pub fn exact_gamma_distribution(n: usize) -> Result<Vec<f64>> {
    (0..1usize << n).map(|r| gamma(n, r.count_ones() as usize)).collect()
}

/// Total-variation distance between the prepared coalition distribution and
/// the exact gamma weights.
pub fn traced_gamma_error(cfg: &GammaPrepConfig) -> Result<f64> {
    if cfg.n_players > 12 {
        return Err(Error::TooManyPlayers { players: cfg.n_players, limit: 12 });
    }
    let got = free_player_distribution(&prepare_player_state(cfg)?, cfg)?;
    let exact = exact_gamma_distribution(cfg.free_count())?;
    Ok(0.5 * got.iter().zip(&exact).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Closed-form coalition weight under the `ell`-bit Riemann discretization:
/// `2^-ell sum_k (1 - k/2^ell)^{n-m} (k/2^ell)^m`.
pub fn discretized_weight(n: usize, m: usize, ell: usize) -> f64 {
    let res = (1usize << ell) as f64;
    (0..1usize << ell)
        .map(|k| {
            let t = k as f64 / res;
            (1.0 - t).powi((n - m) as i32) * t.powi(m as i32)
        })
        .sum::<f64>()
        / res
}

/// Phase-estimation parameters for the span-program backend. `None` picks
/// `bits_min(|N|)` and the default coupling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpanPeConfig {
    pub bits: Option<usize>,
    pub n_reps: usize,
    pub coupling: Option<f64>,
}

impl Default for SpanPeConfig {
    fn default() -> Self {
        Self { bits: None, n_reps: 3, coupling: None }
    }
}

impl SpanPeConfig {
    pub fn resolve(&self, n: usize) -> (usize, usize, f64) {
        (self.bits.unwrap_or_else(|| bits_min(n)), self.n_reps, self.coupling.unwrap_or_else(|| default_coupling(n)))
    }
}

/// How `U_V` evaluates the value of each coalition basis state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ValueOracleBackend {
    ExactClassical,
    /// Each basis state's value is flipped with probability `kappa`, drawn
    /// afresh for every invocation.
    NoisyClassical { kappa: f64 },
    /// `n_reps` coherent phase estimations of the walk operator on the
    /// coalition-gated graph, majority into `Ut`, then uncomputation.
    SpanPe(SpanPeConfig),
}

/// `U_V` applied to a state.
#[derive(Clone, Debug)]
pub struct OracleApplication {
    pub state: StateVector,
    /// Oracle cost of one `U_V` application (1 for classical backends; walk
    /// applications for the span-program backend).
    pub cost: u64,
    /// Population left outside `|0>` on the `aux` and `maj` registers.
    pub aux_residual: f64,
    /// Largest per-coalition error probability of the backend.
    pub xi_bound: f64,
}

fn normalized(game: &Game, mask: u64) -> f64 {
    let span = game.v_max() - game.v_min();
    if span <= 0.0 {
        return 0.0;
    }
    ((game.value_mask(mask) - game.v_min()) / span).clamp(0.0, 1.0)
}

fn rotation_angle(p: f64) -> f64 {
    2.0 * p.clamp(0.0, 1.0).sqrt().asin()
}

/// Attaches `Ut` (and, for the span-program backend, `aux` and `maj`) above
/// the registers of `state` and rotates `Ut` to amplitude `sqrt(V(Q))` on
/// `|1>` for every `Pl` basis state.
pub fn apply_value_oracle<R: Rng + ?Sized>(
    state: StateVector,
    game: &Game,
    backend: &ValueOracleBackend,
    rng: &mut R,
) -> Result<OracleApplication> {
    let n_players = state.layout().get(PL)?.width;
    if n_players != game.player_count() {
        return Err(Error::CoalitionWidth { got: n_players, expected: game.player_count() });
    }
    let (layout, amps) = state.into_parts();
    match *backend {
        ValueOracleBackend::ExactClassical | ValueOracleBackend::NoisyClassical { .. } => {
            let layout = layout.with(UT, 1)?;
            let mut padded = amps;
            padded.resize(layout.dimension(), Default::default());
            let mut s = StateVector::from_amplitudes(layout, padded)?;
            let kappa = match *backend {
                ValueOracleBackend::NoisyClassical { kappa } => {
                    if !(0.0..=1.0).contains(&kappa) {
                        return Err(Error::InvalidArgument(format!("flip probability {kappa} outside [0, 1]")));
                    }
                    kappa
                }
                _ => 0.0,
            };
            let angles: Vec<f64> = (0..1u64 << n_players)
                .map(|b| {
                    let v = normalized(game, b);
                    let v = if kappa > 0.0 && rng.random_bool(kappa) { 1.0 - v } else { v };
                    rotation_angle(v)
                })
                .collect();
            let ut = s.layout().qubit(UT, 0)?;
            s.apply_controlled_ry_table(PL, ut, &angles)?;
            Ok(OracleApplication { state: s, cost: 1, aux_residual: 0.0, xi_bound: 2.0 * kappa })
        }
        ValueOracleBackend::SpanPe(cfg) => {
            let g = game.graph();
            if g.n() > SPAN_PE_MAX_NODES {
                return Err(Error::Capacity { needed: g.n(), cap: SPAN_PE_MAX_NODES });
            }
            let (bits, n_reps, c) = cfg.resolve(g.n());
            if n_reps % 2 == 0 {
                return Err(Error::InvalidArgument(format!("repetition count {n_reps} must be odd")));
            }
            let layout = layout.with(AUX, n_reps)?.with(MAJ, 1)?.with(UT, 1)?;
            let mut padded = amps;
            padded.resize(layout.dimension(), Default::default());
            let mut s = StateVector::from_amplitudes(layout, padded)?;

            // probability that one phase-estimation shot reads 0, per coalition
            let mut zero_prob = Vec::with_capacity(1 << n_players);
            let mut xi: f64 = 0.0;
            let mut walk_queries = 0u64;
            for b in 0..1u64 << n_players {
                let op = build_operator(g, Some(&Coalition::new(n_players, b)?), c)?;
                let pe = walk_phase_estimation(&op, bits)?;
                walk_queries = pe.queries;
                let p0 = pe.probability(0).clamp(0.0, 1.0);
                let success = if op.connected { p0 } else { 1.0 - p0 };
                let fail = if success >= 1.0 {
                    0.0
                } else if success > 0.5 {
                    majority_failure_bound(success, n_reps)?.exact_tail
                } else {
                    1.0
                };
                xi = xi.max(fail);
                zero_prob.push(p0);
            }
            let angles: Vec<f64> = zero_prob.iter().map(|&p| rotation_angle(p)).collect();
            let inverse: Vec<f64> = angles.iter().map(|a| -a).collect();
            let aux: Vec<usize> = s.layout().get(AUX)?.qubits().collect();
            let maj = s.layout().qubit(MAJ, 0)?;
            let ut = s.layout().qubit(UT, 0)?;
            for &q in &aux {
                s.apply_controlled_ry_table(PL, q, &angles)?;
            }
            majority_xor(&mut s, AUX, MAJ)?;
            s.apply_gate(&Gate::X, ut, &[maj])?;
            majority_xor(&mut s, AUX, MAJ)?;
            for &q in &aux {
                s.apply_controlled_ry_table(PL, q, &inverse)?;
            }
            let aux_residual = 1.0 - s.probability(AUX, 0)?.min(1.0) + s.probability(MAJ, 1)?;
            if aux_residual > 1e-6 {
                warn!("span-program oracle leaves {aux_residual:.3e} population on its work registers");
            }
            Ok(OracleApplication {
                state: s,
                cost: 2 * n_reps as u64 * walk_queries,
                aux_residual,
                xi_bound: 2.0 * xi,
            })
        }
    }
}

/// One of the two expectation terms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermEstimate {
    pub include_target: bool,
    /// Median of the amplitude-estimation samples.
    pub estimate: f64,
    /// Exact `P(Ut = 1)` of the prepared state.
    pub probability: f64,
    pub grover_applications: u64,
    pub oracle_cost: u64,
    pub aux_residual: f64,
    pub xi_bound: f64,
}

/// Amplitude estimation of `P(Ut = 1)` after `prepare_player_state` and
/// `apply_value_oracle`, median of [`MEDIAN_REPS`] runs.
pub fn estimate_term<R: Rng + ?Sized>(
    game: &Game,
    cfg: &GammaPrepConfig,
    backend: &ValueOracleBackend,
    ae_bits: usize,
    rng: &mut R,
) -> Result<TermEstimate> {
    let fresh_each_run = matches!(backend, ValueOracleBackend::NoisyClassical { .. });
    let mut samples = Vec::with_capacity(MEDIAN_REPS);
    let mut grover_applications = 0;
    let mut last = None;
    let mut probability = 0.0;
    for rep in 0..MEDIAN_REPS {
        if rep == 0 || fresh_each_run {
            let oracle = apply_value_oracle(prepare_player_state(cfg)?, game, backend, rng)?;
            let ae = amplitude_estimation(&oracle.state, UT, ae_bits, AeEngine::Auto)?;
            probability += ae.probability;
            last = Some((oracle, ae));
        }
        let (_, ae) = last.as_ref().expect("estimate computed on first repetition");
        samples.push(ae.sample(rng));
        grover_applications += ae.grover_applications;
    }
    let runs = if fresh_each_run { MEDIAN_REPS } else { 1 };
    let (oracle, _) = last.expect("at least one repetition");
    samples.sort_by(f64::total_cmp);
    Ok(TermEstimate {
        include_target: cfg.include_target,
        estimate: samples[samples.len() / 2],
        probability: probability / runs as f64,
        grover_applications,
        oracle_cost: oracle.cost,
        aux_residual: oracle.aux_residual,
        xi_bound: oracle.xi_bound,
    })
}

/// Quantum estimate of one Shapley value with its configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantumShapleyEstimate {
    pub estimate: ShapleyEstimate,
    pub ell: usize,
    pub ae_bits: usize,
    pub grover_applications: u64,
    pub with_target: TermEstimate,
    pub without_target: TermEstimate,
}

impl QuantumShapleyEstimate {
    pub fn aux_residual(&self) -> f64 {
        self.with_target.aux_residual.max(self.without_target.aux_residual)
    }
}

/// `(E[V(R + i)] - E[V(R)]) (V_max - V_min)` with both expectations from
/// amplitude estimation.
pub fn quantum_shapley<R: Rng + ?Sized>(
    game: &Game,
    node: NodeId,
    epsilon: f64,
    backend: &ValueOracleBackend,
    rng: &mut R,
) -> Result<QuantumShapleyEstimate> {
    let pos = game.position(node)?;
    let ae_bits = ae_bits_for(epsilon)?;
    let ell = ell_for(game.player_count(), epsilon);
    if ell > MAX_ELL {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} needs {ell} partition bits")));
    }
    let with_cfg = GammaPrepConfig::new(ell, game.player_count(), pos, true)?;
    let without_cfg = GammaPrepConfig { include_target: false, ..with_cfg };
    let with_target = estimate_term(game, &with_cfg, backend, ae_bits, rng)?;
    let without_target = estimate_term(game, &without_cfg, backend, ae_bits, rng)?;
    let grover_applications = with_target.grover_applications + without_target.grover_applications;
    let queries = with_target.grover_applications * with_target.oracle_cost
        + without_target.grover_applications * without_target.oracle_cost;
    let value = (with_target.estimate - without_target.estimate) * (game.v_max() - game.v_min());
    Ok(QuantumShapleyEstimate {
        estimate: ShapleyEstimate {
            player: node,
            value,
            epsilon,
            xi_bound: with_target.xi_bound.max(without_target.xi_bound),
            queries,
            method: Method::Quantum,
            std_error: None,
        },
        ell,
        ae_bits,
        grover_applications,
        with_target,
        without_target,
    })
}

/// Quantum estimates for every player, each from its own child rng stream.
pub fn quantum_shapley_all(
    game: &Game,
    epsilon: f64,
    backend: &ValueOracleBackend,
    seed: u64,
) -> Result<Vec<QuantumShapleyEstimate>> {
    game.players()
        .iter()
        .map(|&v| quantum_shapley(game, v, epsilon, backend, &mut crate::rng::child(seed, v as u64)))
        .collect()
}

/// Brute-force Shapley value under the `ell`-bit discretized weights.
pub fn discretized_shapley(game: &Game, node: NodeId, ell: usize) -> Result<f64> {
    let pos = game.position(node)?;
    let n = game.player_count() - 1;
    let weights: Vec<f64> = (0..=n).map(|m| discretized_weight(n, m, ell)).collect();
    let mut total = 0.0;
    for free in 0..1u64 << n {
        let low = free & ((1 << pos) - 1);
        let mask = low | ((free >> pos) << (pos + 1));
        let w = weights[free.count_ones() as usize];
        total += w * (normalized(game, mask | (1 << pos)) - normalized(game, mask));
    }
    debug_assert!((0..=n).map(|m| binomial(n, m) * weights[m]).sum::<f64>() > 0.0);
    Ok(total * (game.v_max() - game.v_min()))
}
