use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;

use super::layout::RegisterLayout;
use super::phase::{phase_estimation, phase_estimation_state, PhaseEstimate, PHASE_REGISTER};
use super::state::{EmbeddedUnitary, StateVector, C64};
use crate::error::{Error, Result};

/// Largest joint register (work + estimation ancillas) simulated in full by
/// [`AeEngine::Auto`].
pub const FULL_ENGINE_MAX_QUBITS: usize = 20;

/// How the Grover operator is simulated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AeEngine {
    /// Phase estimation over the whole work register.
    FullRegister,
    /// Phase estimation on the exact two-dimensional invariant plane spanned
    /// by the flag-0 and flag-1 components of the prepared state.
    GroverPlane,
    /// Full register when it fits in [`FULL_ENGINE_MAX_QUBITS`], plane otherwise.
    Auto,
}

/// Outcome distribution of amplitude estimation.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeEstimate {
    pub readings: PhaseEstimate,
    /// True flag probability of the prepared state.
    pub probability: f64,
    pub grover_applications: u64,
}

impl AmplitudeEstimate {
    pub fn bits(&self) -> usize {
        self.readings.bits
    }

    /// `sin^2(pi k / 2^bits)`.
    pub fn estimate_of(&self, reading: usize) -> f64 {
        let x = (PI * reading as f64 / self.readings.resolution() as f64).sin();
        x * x
    }

    /// Error bound `pi / M + pi^2 / M^2` holding with probability >= 8/pi^2.
    pub fn error_bound(&self) -> f64 {
        ae_error_bound(self.bits())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.estimate_of(self.readings.sample(rng))
    }

    /// Median of `reps` independent estimates.
    pub fn median_of<R: Rng + ?Sized>(&self, rng: &mut R, reps: usize) -> f64 {
        let mut xs: Vec<f64> = (0..reps.max(1)).map(|_| self.sample(rng)).collect();
        xs.sort_by(f64::total_cmp);
        xs[xs.len() / 2]
    }

    /// Probability mass of readings whose estimate is within `tol` of the
    /// true flag probability.
    pub fn mass_within(&self, tol: f64) -> f64 {
        self.readings
            .distribution
            .iter()
            .enumerate()
            .filter(|(k, _)| (self.estimate_of(*k) - self.probability).abs() <= tol)
            .map(|(_, p)| p)
            .sum()
    }
}

pub fn ae_error_bound(bits: usize) -> f64 {
    let m = (1u64 << bits) as f64;
    PI / m + PI * PI / (m * m)
}

fn flag_mask(state: &StateVector, flag: &str) -> Result<usize> {
    let reg = state.layout().get(flag)?;
    if reg.width != 1 {
        return Err(Error::InvalidArgument(format!("flag register `{flag}` must be a single qubit")));
    }
    Ok(1 << reg.offset)
}

/// Canonical amplitude estimation of `p = P(flag = 1)` for the prepared state
/// `A|0>`: phase estimation on the Grover operator
/// `Q = -A S_0 A^dagger S_flag`, with `A S_0 A^dagger` evaluated as the
/// reflection `I - 2|A0><A0|`. Records `2^bits - 1` Grover applications.
pub fn amplitude_estimation(
    prepared: &StateVector,
    flag: &str,
    bits: usize,
    engine: AeEngine,
) -> Result<AmplitudeEstimate> {
    let fmask = flag_mask(prepared, flag)?;
    let probability: f64 = prepared
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| i & fmask != 0)
        .map(|(_, a)| a.norm_sqr())
        .sum::<f64>()
        .clamp(0.0, 1.0);
    let engine = match engine {
        AeEngine::Auto if prepared.num_qubits() + bits <= FULL_ENGINE_MAX_QUBITS => AeEngine::FullRegister,
        AeEngine::Auto => AeEngine::GroverPlane,
        e => e,
    };
    let readings = match engine {
        AeEngine::FullRegister => {
            let psi = prepared.amplitudes().to_vec();
            let grover = |s: &mut StateVector| -> Result<()> {
                let amps = s.amplitudes_mut();
                for (i, a) in amps.iter_mut().enumerate() {
                    if i & fmask != 0 {
                        *a = -*a;
                    }
                }
                let overlap: C64 = psi.iter().zip(amps.iter()).map(|(p, a)| p.conj() * a).sum();
                for (a, p) in amps.iter_mut().zip(&psi) {
                    *a = p * (overlap * 2.0) - *a;
                }
                Ok(())
            };
            let (joint, queries) = phase_estimation_state(prepared, bits, grover)?;
            PhaseEstimate { distribution: joint.reduced_diagonal(&[PHASE_REGISTER])?, bits, queries }
        }
        _ => {
            let theta = probability.sqrt().asin();
            let (s2, c2) = (2.0 * theta).sin_cos();
            let rot = DMatrix::from_row_slice(2, 2, &[c2, -s2, s2, c2]);
            let q = EmbeddedUnitary::from_real(&["plane"], &rot)?;
            let layout = RegisterLayout::new(&[("plane", 1)])?;
            let (s, c) = theta.sin_cos();
            let prep = StateVector::from_amplitudes(layout, vec![C64::new(c, 0.0), C64::new(s, 0.0)])?;
            phase_estimation(&q, &prep, bits)?
        }
    };
    let grover_applications = readings.queries;
    Ok(AmplitudeEstimate { readings, probability, grover_applications })
}
