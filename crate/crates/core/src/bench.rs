//! Query-count benchmark: classical Monte Carlo against quantum amplitude
//! estimation as the target error shrinks.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qshapley::{quantum_shapley, ValueOracleBackend};
use crate::rng::{child, derive_seed};
use crate::shapley::{
    chebyshev_samples, shapley_exact_all, shapley_monte_carlo, Game, Method, Oracle, BERNOULLI_VARIANCE_BOUND,
    CHEBYSHEV_DELTA,
};

pub const BENCH_CSV_HEADER: &str = "method,epsilon,mean_queries,achieved_error,repetitions,graph,seed";

pub const DEFAULT_EPSILONS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRecord {
    pub method: Method,
    pub epsilon: f64,
    /// Mean queries per Shapley estimate.
    pub queries: f64,
    /// Mean absolute error against the exact value.
    pub achieved_error: f64,
    pub repetitions: usize,
    pub graph: String,
    pub seed: u64,
}

impl BenchRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.method, self.epsilon, self.queries, self.achieved_error, self.repetitions, self.graph, self.seed
        )
    }
}

pub fn to_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(BENCH_CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument("slope fit needs at least two paired points".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidArgument("log-log fit needs positive values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("slope fit needs distinct x values".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Slope of mean queries against epsilon for one method.
pub fn method_slope(records: &[BenchRecord], method: Method) -> Result<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        records.iter().filter(|r| r.method == method).map(|r| (r.epsilon, r.queries)).unzip();
    loglog_slope(&xs, &ys)
}

/// Runs both engines on every player for each epsilon, `trials` times.
pub fn bench_queries(game: &Game, graph_id: &str, epsilons: &[f64], trials: usize, seed: u64) -> Result<Vec<BenchRecord>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    if game.is_trivial() {
        return Err(Error::TriviallyConnected);
    }
    let exact: Vec<f64> = shapley_exact_all(game)?.iter().map(|e| e.value).collect();
    let players = game.players().to_vec();
    let mut out = Vec::new();
    for (ei, &eps) in epsilons.iter().enumerate() {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidArgument(format!("epsilon {eps} outside (0, 1)")));
        }
        let samples = chebyshev_samples(eps, CHEBYSHEV_DELTA, BERNOULLI_VARIANCE_BOUND);
        for method in [Method::MonteCarlo, Method::Quantum] {
            let mut queries = 0.0;
            let mut error = 0.0;
            let mut count = 0usize;
            for trial in 0..trials {
                let trial_seed = derive_seed(seed, ((ei as u64) << 32) | trial as u64);
                for (pos, &v) in players.iter().enumerate() {
                    let mut rng = child(trial_seed, v as u64);
                    let (value, q) = match method {
                        Method::MonteCarlo => {
                            let e = shapley_monte_carlo(game, v, samples, &mut rng, Oracle::Exact)?;
                            (e.value, e.queries)
                        }
                        _ => {
                            let e = quantum_shapley(game, v, eps, &ValueOracleBackend::ExactClassical, &mut rng)?;
                            (e.estimate.value, e.estimate.queries)
                        }
                    };
                    queries += q as f64;
                    error += (value - exact[pos]).abs();
                    count += 1;
                }
            }
            out.push(BenchRecord {
                method,
                epsilon: eps,
                queries: queries / count as f64,
                achieved_error: error / count as f64,
                repetitions: trials,
                graph: graph_id.to_string(),
                seed,
            });
        }
    }
    Ok(out)
}
