use std::f64::consts::PI;

use rand::Rng;

use super::layout::check_capacity;
use super::state::{sample_index, EmbeddedUnitary, Gate, StateVector, C64};
use crate::error::{Error, Result};

/// Name of the ancilla register added by phase estimation.
pub const PHASE_REGISTER: &str = "phase";

/// Quantum Fourier transform on register `reg` (or its inverse), built from
/// Hadamards, controlled phases and the final bit-reversal swaps.
/// `QFT |x> = 2^{-n/2} sum_y e^{2 pi i x y / 2^n} |y>`.
pub fn qft(state: &mut StateVector, reg: &str, inverse: bool) -> Result<()> {
    let r = state.layout().get(reg)?.clone();
    let q: Vec<usize> = r.qubits().collect();
    let n = q.len();
    if !inverse {
        for j in (0..n).rev() {
            state.apply_gate(&Gate::H, q[j], &[])?;
            for k in (0..j).rev() {
                let angle = PI / (1u64 << (j - k)) as f64;
                state.apply_gate(&Gate::Phase(angle), q[j], &[q[k]])?;
            }
        }
        for k in 0..n / 2 {
            state.swap_qubits(q[k], q[n - 1 - k])?;
        }
    } else {
        for k in 0..n / 2 {
            state.swap_qubits(q[k], q[n - 1 - k])?;
        }
        for j in 0..n {
            for k in 0..j {
                let angle = -PI / (1u64 << (j - k)) as f64;
                state.apply_gate(&Gate::Phase(angle), q[j], &[q[k]])?;
            }
            state.apply_gate(&Gate::H, q[j], &[])?;
        }
    }
    Ok(())
}

/// Outcome distribution of a phase-estimation run.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseEstimate {
    /// Probability of each reading `k`, phase `k / 2^bits`.
    pub distribution: Vec<f64>,
    pub bits: usize,
    /// Applications of the unitary (`2^bits - 1`).
    pub queries: u64,
}

impl PhaseEstimate {
    pub fn resolution(&self) -> usize {
        1 << self.bits
    }

    pub fn probability(&self, reading: usize) -> f64 {
        self.distribution[reading]
    }

    pub fn phase(&self, reading: usize) -> f64 {
        reading as f64 / self.resolution() as f64
    }

    pub fn modal(&self) -> usize {
        self.distribution
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap_or(0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.distribution, rng)
    }
}

/// Textbook phase estimation with `bits` ancillas on top of `prep`'s layout.
///
/// `step` applies the unitary once to a state over `prep`'s layout. The
/// controlled-power stage produces `2^{-bits/2} sum_k |k> U^k |prep>`, which is
/// evaluated by stepping `U` through `k = 0 .. 2^bits - 1`; the inverse QFT is
/// then applied gate by gate. Returns the joint state and the number of `U`
/// applications.
pub fn phase_estimation_state<F>(prep: &StateVector, bits: usize, mut step: F) -> Result<(StateVector, u64)>
where
    F: FnMut(&mut StateVector) -> Result<()>,
{
    if bits == 0 {
        return Err(Error::InvalidArgument("phase estimation needs at least one bit".into()));
    }
    check_capacity(prep.num_qubits() + bits)?;
    let layout = prep.layout().clone().with(PHASE_REGISTER, bits)?;
    let readings = 1usize << bits;
    let block = prep.amplitudes().len();
    let scale = 1.0 / (readings as f64).sqrt();
    let mut amps = vec![C64::new(0.0, 0.0); layout.dimension()];
    let mut work = prep.clone();
    let mut queries = 0u64;
    for k in 0..readings {
        for (dst, src) in amps[k * block..(k + 1) * block].iter_mut().zip(work.amplitudes()) {
            *dst = src * scale;
        }
        if k + 1 < readings {
            step(&mut work)?;
            queries += 1;
        }
    }
    let mut joint = StateVector::from_amplitudes(layout, amps)?;
    qft(&mut joint, PHASE_REGISTER, true)?;
    Ok((joint, queries))
}

/// Phase estimation of an embedded unitary on `prep`.
pub fn phase_estimation(u: &EmbeddedUnitary, prep: &StateVector, bits: usize) -> Result<PhaseEstimate> {
    let (joint, queries) = phase_estimation_state(prep, bits, |s| s.apply_embedded(u))?;
    let distribution = joint.reduced_diagonal(&[PHASE_REGISTER])?;
    Ok(PhaseEstimate { distribution, bits, queries })
}

/// Closed-form probability of reading `k` for an exact eigenphase `phi`.
pub fn reading_probability(phi: f64, reading: usize, bits: usize) -> f64 {
    let m = (1usize << bits) as f64;
    let delta = phi - reading as f64 / m;
    let den = (PI * delta).sin();
    if den.abs() < 1e-12 {
        return 1.0;
    }
    let num = (PI * m * delta).sin();
    (num * num) / (m * m * den * den)
}
