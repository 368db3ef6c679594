//! Important-node identification by Dürr-Høyer maximum finding over a table
//! of quantum Shapley estimates.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::qshapley::{quantum_shapley, ValueOracleBackend};
use crate::qsim::{RegisterLayout, StateVector, C64};
use crate::rng::child;
use crate::shapley::{max_shapley_lower_bound, Game};

/// Query budget is `DH_BUDGET_FACTOR * sqrt(n)`.
pub const DH_BUDGET_FACTOR: f64 = 22.5;

/// Growth factor of the Grover iteration cap between failed searches.
pub const BBHT_LAMBDA: f64 = 1.2;

/// Tables up to this size run Grover iterations on the state-vector simulator.
pub const GROVER_SIM_MAX: usize = 1 << 10;

/// Independent maximum-finding runs per extracted node.
pub const DEFAULT_RESTARTS: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaxFindResult {
    pub argmax: usize,
    pub value: f64,
    /// Grover iterations plus one oracle check per measurement and the initial sample.
    pub queries: u64,
    /// Grover searches launched.
    pub trials: usize,
    /// Whether `value` equals the table maximum, when known.
    pub success: Option<bool>,
}

/// `max_shapley_lower_bound(game) / 2`; [`Error::NoConnection`] when `V(F) = 0`.
pub fn required_precision(game: &Game) -> Result<f64> {
    let bound = max_shapley_lower_bound(game)?;
    if bound <= 0.0 {
        return Err(Error::NoConnection);
    }
    Ok(bound / 2.0)
}

/// Measures a uniform index state after `iterations` Grover steps whose
/// oracle marks `marked`.
fn grover_sample<R: Rng + ?Sized>(marked: &[bool], n_marked: usize, iterations: usize, rng: &mut R) -> Result<usize> {
    let n = marked.len();
    if n <= GROVER_SIM_MAX {
        let width = (usize::BITS - (n.max(2) - 1).leading_zeros()) as usize;
        let layout = RegisterLayout::new(&[("index", width)])?;
        let amp = C64::new(1.0 / (n as f64).sqrt(), 0.0);
        let mut amps = vec![C64::new(0.0, 0.0); layout.dimension()];
        amps[..n].fill(amp);
        let mut state = StateVector::from_amplitudes(layout, amps)?;
        for _ in 0..iterations {
            state.phase_flip_where(|i| i < n && marked[i]);
            let a = state.amplitudes_mut();
            let mean: C64 = a[..n].iter().sum::<C64>() / n as f64;
            for x in &mut a[..n] {
                *x = mean * 2.0 - *x;
            }
        }
        let probs = state.reduced_diagonal(&["index"])?;
        return Ok(crate::qsim::sample_index(&probs[..n], rng));
    }
    let theta = (n_marked as f64 / n as f64).sqrt().asin();
    let hit = ((2 * iterations + 1) as f64 * theta).sin().powi(2);
    let want = rng.random_bool(hit.clamp(0.0, 1.0));
    let pool: Vec<usize> = (0..n).filter(|&i| marked[i] == want).collect();
    if pool.is_empty() {
        return Ok(rng.random_range(0..n));
    }
    Ok(pool[rng.random_range(0..pool.len())])
}

/// Threshold-improving Grover search for the index of the largest entry.
pub fn durr_hoyer_max<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> Result<MaxFindResult> {
    let n = values.len();
    if n == 0 {
        return Err(Error::InvalidArgument("maximum of an empty table".into()));
    }
    let sqrt_n = (n as f64).sqrt();
    let budget = (DH_BUDGET_FACTOR * sqrt_n).ceil() as u64;
    let mut best = rng.random_range(0..n);
    let mut queries = 1u64;
    let mut trials = 0usize;
    'outer: while queries < budget {
        let marked: Vec<bool> = values.iter().map(|&v| v > values[best]).collect();
        let n_marked = marked.iter().filter(|&&m| m).count();
        if n_marked == 0 {
            break;
        }
        let mut cap = 1.0f64;
        loop {
            let iterations = rng.random_range(0..cap.ceil().max(1.0) as usize);
            let j = grover_sample(&marked, n_marked, iterations, rng)?;
            trials += 1;
            queries += iterations as u64 + 1;
            if values[j] > values[best] {
                best = j;
                continue 'outer;
            }
            if queries >= budget {
                break 'outer;
            }
            cap = (cap * BBHT_LAMBDA).min(sqrt_n);
        }
    }
    let top = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(MaxFindResult { argmax: best, value: values[best], queries, trials, success: Some(values[best] == top) })
}

/// Best of `restarts` independent runs; queries and trials are summed.
pub fn durr_hoyer_with_restarts<R: Rng + ?Sized>(values: &[f64], restarts: usize, rng: &mut R) -> Result<MaxFindResult> {
    let mut acc: Option<MaxFindResult> = None;
    for _ in 0..restarts.max(1) {
        let r = durr_hoyer_max(values, rng)?;
        acc = Some(match acc {
            None => r,
            Some(a) => {
                let (queries, trials) = (a.queries + r.queries, a.trials + r.trials);
                let keep = if r.value > a.value { r } else { a };
                MaxFindResult { queries, trials, ..keep }
            }
        });
    }
    Ok(acc.expect("at least one run"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankedNode {
    pub node: NodeId,
    pub phi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImportantNodes {
    pub epsilon_used: f64,
    pub nodes: Vec<RankedNode>,
    /// Maximum-finding queries, each charged at the oracle cost of one Shapley
    /// estimate.
    pub queries_total: u64,
    /// Oracle queries spent building the estimate table.
    pub table_queries: u64,
    pub restarts: usize,
}

/// Extracts `k` high-value nodes by repeated maximum finding over a table of
/// quantum Shapley estimates at precision [`required_precision`], removing
/// each node once found.
pub fn find_important_nodes<R: Rng + ?Sized>(
    game: &Game,
    k: usize,
    backend: &ValueOracleBackend,
    restarts: usize,
    rng: &mut R,
) -> Result<ImportantNodes> {
    let players = game.players().to_vec();
    if k > players.len() {
        return Err(Error::InvalidArgument(format!("asked for {k} nodes out of {}", players.len())));
    }
    let epsilon = required_precision(game)?;
    let table_seed: u64 = rng.random();
    let mut table = Vec::with_capacity(players.len());
    let mut table_queries = 0u64;
    for &v in &players {
        let est = quantum_shapley(game, v, epsilon, backend, &mut child(table_seed, v as u64))?;
        table_queries += est.estimate.queries;
        table.push(est.estimate.value);
    }
    let bundle = table_queries / players.len().max(1) as u64;
    let mut remaining: Vec<usize> = (0..players.len()).collect();
    let mut nodes = Vec::with_capacity(k);
    let mut dh_queries = 0u64;
    for _ in 0..k {
        let values: Vec<f64> = remaining.iter().map(|&j| table[j]).collect();
        let found = durr_hoyer_with_restarts(&values, restarts, rng)?;
        dh_queries += found.queries;
        let j = remaining.remove(found.argmax);
        nodes.push(RankedNode { node: players[j], phi: table[j] });
    }
    Ok(ImportantNodes {
        epsilon_used: epsilon,
        nodes,
        queries_total: dh_queries * bundle.max(1),
        table_queries,
        restarts: restarts.max(1),
    })
}
