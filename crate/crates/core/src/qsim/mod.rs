//! Dense state-vector simulator with named registers.

mod amplitude;
mod layout;
mod majority;
mod phase;
mod state;

pub use amplitude::{ae_error_bound, amplitude_estimation, AeEngine, AmplitudeEstimate, FULL_ENGINE_MAX_QUBITS};
pub use layout::{check_capacity, qubit_cap, Register, RegisterLayout, DEFAULT_QUBIT_CAP, QUBIT_CAP_ENV};
pub use majority::{majority, majority_failure_bound, majority_unitary, majority_xor, MajorityBound};
pub use phase::{phase_estimation, phase_estimation_state, qft, reading_probability, PhaseEstimate, PHASE_REGISTER};
pub use state::{sample_counts, sample_index, EmbeddedUnitary, Gate, StateVector, C64};
