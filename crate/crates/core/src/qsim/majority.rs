use super::state::StateVector;
use crate::error::{Error, Result};
use crate::shapley::binomial;

/// `MAJ(z)` for an `n`-bit string.
pub fn majority(z: usize, n: usize) -> bool {
    (z.count_ones() as usize) * 2 > n
}

fn majority_registers(state: &StateVector, input: &str, maj: &str) -> Result<(usize, usize, usize)> {
    let layout = state.layout();
    let inp = layout.get(input)?;
    let out = layout.get(maj)?;
    if inp.width % 2 == 0 {
        return Err(Error::InvalidArgument(format!("majority needs an odd input width, got {}", inp.width)));
    }
    if out.width != 1 {
        return Err(Error::InvalidArgument("majority output must be a single qubit".into()));
    }
    Ok((inp.offset, inp.width, 1 << out.offset))
}

/// `|z>|m> -> |z>|m XOR MAJ(z)>`. Self-inverse.
pub fn majority_xor(state: &mut StateVector, input: &str, maj: &str) -> Result<()> {
    let (offset, width, mbit) = majority_registers(state, input, maj)?;
    let amps = state.amplitudes_mut();
    let zmask = (1usize << width) - 1;
    for i in 0..amps.len() {
        if i & mbit == 0 && majority((i >> offset) & zmask, width) {
            amps.swap(i, i | mbit);
        }
    }
    Ok(())
}

/// `|z>|0> -> |z>|MAJ(z)>`; the output qubit must start clean.
pub fn majority_unitary(state: &mut StateVector, input: &str, maj: &str) -> Result<()> {
    let (_, _, mbit) = majority_registers(state, input, maj)?;
    let dirty: f64 = state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| i & mbit != 0)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    if dirty > 1e-12 {
        return Err(Error::InvalidArgument(format!("majority output qubit is not |0> (population {dirty:.3e})")));
    }
    majority_xor(state, input, maj)
}

/// Failure probabilities of a majority over `n` independent runs that are
/// each correct with probability `p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MajorityBound {
    /// `t C(n,t) p^t (1-p)^{n-t}` with `t = (n-1)/2`.
    pub lemma_bound: f64,
    /// `(t+1) C(n,t) p^t (1-p)^{n-t}`: one copy of the largest tail term for
    /// each of the `t + 1` terms.
    pub tail_terms_bound: f64,
    /// `sqrt(n / 2 pi) 2^n (p(1-p))^{n/2}`.
    pub stirling_bound: f64,
    /// `sum_{k <= t} C(n,k) p^k (1-p)^{n-k}`.
    pub exact_tail: f64,
}

pub fn majority_failure_bound(p: f64, n: usize) -> Result<MajorityBound> {
    if !(p > 0.5 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("per-run success {p} must lie in (0.5, 1)")));
    }
    if n % 2 == 0 {
        return Err(Error::InvalidArgument(format!("repetition count {n} must be odd")));
    }
    let t = (n - 1) / 2;
    let term = |k: usize| binomial(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
    let largest = term(t);
    Ok(MajorityBound {
        lemma_bound: t as f64 * largest,
        tail_terms_bound: (t + 1) as f64 * largest,
        stirling_bound: (n as f64 / (2.0 * std::f64::consts::PI)).sqrt()
            * 2f64.powi(n as i32)
            * (p * (1.0 - p)).powf(n as f64 / 2.0),
        exact_tail: (0..=t).map(term).sum(),
    })
}
