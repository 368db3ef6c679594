//! Classical Shapley engines for coalition games over intermediate nodes:
//! exhaustive enumeration, gamma-weighted Monte Carlo sampling (optionally
//! against a noisy value oracle) and the maximum-value lower bound.

use std::fmt;
use std::sync::Arc;

use log::warn;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Coalition, Graph, NodeId};
use crate::rng::{child, seeded};

/// Largest player count accepted by the enumeration engines.
pub const MAX_EXACT_PLAYERS: usize = 24;

/// Failure probability used when sizing Monte Carlo runs with Chebyshev's
/// inequality.
pub const CHEBYSHEV_DELTA: f64 = 0.05;

/// Variance bound of a `{0, 1}` marginal contribution.
pub const BERNOULLI_VARIANCE_BOUND: f64 = 0.25;

pub type ValueFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

/// Cooperative game on the intermediate nodes of a graph. The value function
/// takes a coalition mask laid out as in [`Coalition`].
#[derive(Clone)]
pub struct Game {
    graph: Graph,
    value: ValueFn,
    v_min: f64,
    v_max: f64,
    trivial: bool,
}

impl fmt::Debug for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Game")
            .field("graph", &self.graph)
            .field("v_min", &self.v_min)
            .field("v_max", &self.v_max)
            .field("trivial", &self.trivial)
            .finish_non_exhaustive()
    }
}

impl Game {
    /// The s-t connectivity game `V_st` with `V_min = 0`, `V_max = 1`.
    pub fn st_connectivity(graph: Graph) -> Self {
        let trivial = graph.is_trivially_connected();
        let g = graph.clone();
        let value: ValueFn = Arc::new(move |mask| if g.connected_within(mask) { 1.0 } else { 0.0 });
        Self { graph, value, v_min: 0.0, v_max: 1.0, trivial }
    }

    /// Arbitrary game on the players of `graph`.
    pub fn with_value(graph: Graph, value: ValueFn, v_min: f64, v_max: f64) -> Result<Self> {
        if !(v_min <= v_max) {
            return Err(Error::InvalidArgument(format!("v_min {v_min} exceeds v_max {v_max}")));
        }
        Ok(Self { graph, value, v_min, v_max, trivial: false })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn players(&self) -> &[NodeId] {
        self.graph.players()
    }

    pub fn player_count(&self) -> usize {
        self.graph.player_count()
    }

    pub fn v_min(&self) -> f64 {
        self.v_min
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    /// Source and target are adjacent; every centrality is reported as 0.
    pub fn is_trivial(&self) -> bool {
        self.trivial
    }

    pub fn value(&self, q: &Coalition) -> f64 {
        (self.value)(q.mask())
    }

    pub fn value_mask(&self, mask: u64) -> f64 {
        (self.value)(mask)
    }

    /// `V(F)`.
    pub fn grand_value(&self) -> f64 {
        self.value(&self.graph.full_coalition())
    }

    pub fn position(&self, node: NodeId) -> Result<usize> {
        self.graph.player_position(node).ok_or(Error::NotAPlayer(node))
    }

    /// Spot-checks `v_min <= V(Q) <= v_max` and `V(empty) = 0` on the empty
    /// set, the grand coalition and every singleton.
    pub fn check_bounds(&self) -> Result<()> {
        let w = self.player_count();
        let mut probes = vec![0u64, Coalition::full(w).mask()];
        probes.extend((0..w).map(|j| 1u64 << j));
        for mask in probes {
            let v = self.value_mask(mask);
            if v < self.v_min - 1e-12 || v > self.v_max + 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "V({mask:#b}) = {v} outside [{}, {}]",
                    self.v_min, self.v_max
                )));
            }
        }
        if !self.trivial && self.value_mask(0).abs() > 1e-12 {
            return Err(Error::InvalidArgument("V(empty) must be 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    MonteCarlo,
    Quantum,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::MonteCarlo => "monte-carlo",
            Method::Quantum => "quantum",
        })
    }
}

/// A Shapley value estimate for one node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapleyEstimate {
    pub player: NodeId,
    pub value: f64,
    /// Target error bound (0 for exact).
    pub epsilon: f64,
    /// Bias bound caused by oracle noise (0 for a perfect oracle).
    pub xi_bound: f64,
    /// Value-function evaluations, or oracle applications for quantum runs.
    pub queries: u64,
    pub method: Method,
    /// Measured standard error, when the engine is sampling based.
    pub std_error: Option<f64>,
}

impl ShapleyEstimate {
    fn exact(player: NodeId, value: f64, queries: u64) -> Self {
        Self { player, value, epsilon: 0.0, xi_bound: 0.0, queries, method: Method::Exact, std_error: None }
    }
}

/// Noisy value oracle: each query returns `1 - V(Q)` with probability `kappa`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoisyOracleConfig {
    pub kappa: f64,
    pub seed: u64,
}

impl NoisyOracleConfig {
    pub fn new(kappa: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&kappa) {
            return Err(Error::InvalidArgument(format!("flip probability {kappa} outside [0, 1]")));
        }
        Ok(Self { kappa, seed })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Oracle {
    Exact,
    Noisy(NoisyOracleConfig),
}

/// `gamma(n, m) = 1 / (C(n, m) (n + 1))`.
pub fn gamma(n: usize, m: usize) -> Result<f64> {
    if m > n {
        return Err(Error::InvalidArgument(format!("coalition size {m} exceeds {n}")));
    }
    Ok(1.0 / (binomial(n, m) * (n as f64 + 1.0)))
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Neumaier compensated sum.
#[derive(Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(self) -> f64 {
        self.sum + self.carry
    }
}

fn check_enumerable(game: &Game) -> Result<usize> {
    let players = game.player_count();
    if players > MAX_EXACT_PLAYERS {
        return Err(Error::TooManyPlayers { players, limit: MAX_EXACT_PLAYERS });
    }
    Ok(players)
}

/// Exact Shapley value of node `i` by summing over every coalition of the
/// other players.
pub fn shapley_exact(game: &Game, i: NodeId) -> Result<ShapleyEstimate> {
    let pos = game.position(i)?;
    let players = check_enumerable(game)?;
    let queries = 1u64 << players;
    if game.is_trivial() {
        warn!("source and target are adjacent; reporting zero centrality");
        return Ok(ShapleyEstimate::exact(i, 0.0, 0));
    }
    let weights: Vec<f64> = (0..players).map(|m| gamma(players - 1, m).unwrap()).collect();
    let bit = 1u64 << pos;
    let mut acc = CompensatedSum::default();
    for mask in 0..queries {
        if mask & bit != 0 {
            continue;
        }
        let marginal = game.value_mask(mask | bit) - game.value_mask(mask);
        if marginal != 0.0 {
            acc.add(weights[mask.count_ones() as usize] * marginal);
        }
    }
    Ok(ShapleyEstimate::exact(i, acc.total(), queries))
}

/// Exact Shapley values of every intermediate node from one shared pass over
/// all `2^|F|` coalition values.
pub fn shapley_exact_all(game: &Game) -> Result<Vec<ShapleyEstimate>> {
    let players = check_enumerable(game)?;
    if game.is_trivial() {
        warn!("source and target are adjacent; reporting zero centrality");
        return Ok(game.players().iter().map(|&v| ShapleyEstimate::exact(v, 0.0, 0)).collect());
    }
    let total = 1u64 << players;
    let values: Vec<f64> = (0..total).map(|mask| game.value_mask(mask)).collect();
    let weights: Vec<f64> =
        (0..players).map(|m| gamma(players - 1, m).unwrap()).collect();
    let out = game
        .players()
        .iter()
        .enumerate()
        .map(|(pos, &node)| {
            let bit = 1u64 << pos;
            let mut acc = CompensatedSum::default();
            for mask in 0..total {
                if mask & bit == 0 {
                    let marginal = values[(mask | bit) as usize] - values[mask as usize];
                    if marginal != 0.0 {
                        acc.add(weights[mask.count_ones() as usize] * marginal);
                    }
                }
            }
            ShapleyEstimate::exact(node, acc.total(), total)
        })
        .collect();
    Ok(out)
}

/// Draws `R` over `n_free` players with probability `gamma(n_free, |R|)`:
/// a uniform size, then a uniform subset of that size.
pub fn sample_gamma_coalition<R: Rng + ?Sized>(n_free: usize, rng: &mut R) -> Coalition {
    let size = rng.random_range(0..=n_free);
    let mask = index::sample(rng, n_free, size).iter().fold(0u64, |m, p| m | 1 << p);
    Coalition::new(n_free, mask).expect("sampled positions lie within the width")
}

/// Inserts a zero bit at `pos`, mapping a mask over `F \ {i}` to one over `F`.
fn spread_mask(mask: u64, pos: usize) -> u64 {
    let low = mask & ((1u64 << pos) - 1);
    let high = mask >> pos;
    low | high << (pos + 1)
}

/// Monte Carlo Shapley estimate: mean of `V(R ∪ {i}) - V(R)` over
/// gamma-distributed `R`, both terms queried on the same `R`.
pub fn shapley_monte_carlo<R: Rng + ?Sized>(
    game: &Game,
    i: NodeId,
    num_samples: usize,
    rng: &mut R,
    oracle: Oracle,
) -> Result<ShapleyEstimate> {
    if num_samples == 0 {
        return Err(Error::InvalidArgument("at least one sample is required".into()));
    }
    let pos = game.position(i)?;
    let queries = 2 * num_samples as u64;
    let epsilon = chebyshev_epsilon(num_samples, CHEBYSHEV_DELTA, BERNOULLI_VARIANCE_BOUND);
    let (kappa, mut noise) = match oracle {
        Oracle::Exact => (0.0, None),
        Oracle::Noisy(cfg) => (cfg.kappa, Some(seeded(cfg.seed))),
    };
    if game.is_trivial() {
        warn!("source and target are adjacent; reporting zero centrality");
        return Ok(ShapleyEstimate {
            player: i,
            value: 0.0,
            epsilon,
            xi_bound: 2.0 * kappa,
            queries: 0,
            method: Method::MonteCarlo,
            std_error: Some(0.0),
        });
    }
    let bit = 1u64 << pos;
    let n_free = game.player_count() - 1;
    let mut query = |mask: u64| -> f64 {
        let v = game.value_mask(mask);
        let flip = noise.as_mut().is_some_and(|r| r.random_bool(kappa));
        if flip {
            1.0 - v
        } else {
            v
        }
    };
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for k in 0..num_samples {
        let r = spread_mask(sample_gamma_coalition(n_free, rng).mask(), pos);
        let d = query(r | bit) - query(r);
        let delta = d - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (d - mean);
    }
    let var = if num_samples > 1 { m2 / (num_samples - 1) as f64 } else { 0.0 };
    Ok(ShapleyEstimate {
        player: i,
        value: mean,
        epsilon,
        xi_bound: 2.0 * kappa,
        queries,
        method: Method::MonteCarlo,
        std_error: Some((var / num_samples as f64).sqrt()),
    })
}

/// Sample count for which Chebyshev's inequality gives
/// `P(|err| >= epsilon) <= delta` under variance `var_bound`.
pub fn chebyshev_samples(epsilon: f64, delta: f64, var_bound: f64) -> usize {
    (var_bound / (delta * epsilon * epsilon)).ceil().max(1.0) as usize
}

pub fn chebyshev_epsilon(samples: usize, delta: f64, var_bound: f64) -> f64 {
    (var_bound / (delta * samples as f64)).sqrt()
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!("{name} = {x} outside [0, 1]")));
    }
    Ok(())
}

/// Bias model for Shapley estimates built on an oracle that flips its answer
/// with probability `kappa`: `phi + 2 kappa (1 - phi)`. Always within
/// `2 kappa` of `phi`.
pub fn noisy_bias(phi: f64, kappa: f64) -> Result<f64> {
    check_unit("phi", phi)?;
    check_unit("kappa", kappa)?;
    Ok(phi + 2.0 * kappa * (1.0 - phi))
}

/// Exact mean of the gamma-weighted marginal estimator when every query flips
/// independently with probability `kappa`: `E[V̂(R∪i) - V̂(R)] = (1 - 2κ)(V(R∪i) - V(R))`,
/// so the estimate concentrates at `(1 - 2 kappa) phi`.
pub fn noisy_expectation(phi: f64, kappa: f64) -> Result<f64> {
    check_unit("phi", phi)?;
    check_unit("kappa", kappa)?;
    Ok((1.0 - 2.0 * kappa) * phi)
}

/// `V(F) / |F|`, a lower bound on the largest Shapley value (by efficiency).
pub fn max_shapley_lower_bound(game: &Game) -> Result<f64> {
    let players = game.player_count();
    if players == 0 {
        return Err(Error::InvalidArgument("the game has no players".into()));
    }
    if game.is_trivial() {
        return Ok(0.0);
    }
    Ok(game.grand_value() / players as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImportanceConfig {
    /// Lower clamp on `V(F)/|F|` before halving into the target error.
    pub floor: f64,
    pub delta: f64,
}

impl Default for ImportanceConfig {
    fn default() -> Self {
        Self { floor: 0.02, delta: CHEBYSHEV_DELTA }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImportanceRanking {
    pub epsilon: f64,
    pub ranked: Vec<ShapleyEstimate>,
    pub total_queries: u64,
}

/// Classical important-node baseline: Monte Carlo estimates for every node at
/// `epsilon = max(V(F)/|F|, floor) / 2`, ranked in descending order.
pub fn classical_argmax_importance<R: Rng + ?Sized>(
    game: &Game,
    rng: &mut R,
    config: ImportanceConfig,
) -> Result<ImportanceRanking> {
    let bound = max_shapley_lower_bound(game)?;
    let epsilon = bound.max(config.floor) / 2.0;
    classical_importance_at(game, epsilon, rng.next_u64(), config.delta)
}

/// [`classical_argmax_importance`] at a fixed target error, with per-node
/// streams derived from `seed`.
pub fn classical_importance_at(game: &Game, epsilon: f64, seed: u64, delta: f64) -> Result<ImportanceRanking> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let samples = chebyshev_samples(epsilon, delta, BERNOULLI_VARIANCE_BOUND);
    let mut ranked = game
        .players()
        .iter()
        .map(|&node| {
            let mut rng = child(seed, node as u64);
            shapley_monte_carlo(game, node, samples, &mut rng, Oracle::Exact)
        })
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.player.cmp(&b.player)));
    let total_queries = ranked.iter().map(|e| e.queries).sum();
    Ok(ImportanceRanking { epsilon, ranked, total_queries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rng::seeded;

    fn exact_values(g: Graph) -> Vec<f64> {
        shapley_exact_all(&Game::st_connectivity(g)).unwrap().into_iter().map(|e| e.value).collect()
    }

    #[test]
    fn gamma_closed_forms() {
        assert_eq!(gamma(0, 0).unwrap(), 1.0);
        assert_eq!(gamma(1, 0).unwrap(), 0.5);
        assert_eq!(gamma(1, 1).unwrap(), 0.5);
        assert!((gamma(2, 1).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!(gamma(2, 3).is_err());
        for n in 0..20 {
            let total: f64 = (0..=n).map(|m| binomial(n, m) * gamma(n, m).unwrap()).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_fixture_values() {
        let series = exact_values(fixtures::series());
        assert!(series.iter().all(|v| (v - 0.5).abs() < 1e-12));
        let diamond = exact_values(fixtures::diamond());
        let expected = [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0];
        for (v, e) in diamond.iter().zip(expected) {
            assert!((v - e).abs() < 1e-12);
        }
        let parallel = exact_values(fixtures::parallel());
        assert!(parallel.iter().all(|v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn single_and_batched_agree() {
        let game = Game::st_connectivity(fixtures::example());
        let all = shapley_exact_all(&game).unwrap();
        for e in &all {
            let single = shapley_exact(&game, e.player).unwrap();
            assert!((single.value - e.value).abs() < 1e-14);
            assert_eq!(single.queries, 1 << 7);
        }
        let sum: f64 = all.iter().map(|e| e.value).sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trivial_graph_is_flat() {
        let game = Game::st_connectivity(fixtures::trivial());
        assert!(game.is_trivial());
        assert!(shapley_exact_all(&game).unwrap().iter().all(|e| e.value == 0.0));
        assert_eq!(max_shapley_lower_bound(&game).unwrap(), 0.0);
    }

    #[test]
    fn non_player_and_size_errors() {
        let game = Game::st_connectivity(fixtures::series());
        assert_eq!(shapley_exact(&game, 0).unwrap_err(), Error::NotAPlayer(0));
        let big = Graph::new(30, 0, 29, (0..29).map(|v| (v, v + 1))).unwrap();
        let game = Game::st_connectivity(big);
        assert!(matches!(shapley_exact(&game, 5), Err(Error::TooManyPlayers { players: 28, .. })));
    }

    #[test]
    fn gamma_sampler_distribution() {
        let mut rng = seeded(11);
        assert!(sample_gamma_coalition(0, &mut rng).is_empty());
        let n = 60_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[sample_gamma_coalition(2, &mut rng).mask() as usize] += 1;
        }
        let expected = [1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0];
        for (c, p) in counts.iter().zip(expected) {
            let sd = (p * (1.0 - p) / n as f64).sqrt();
            assert!((*c as f64 / n as f64 - p).abs() < 5.0 * sd);
        }
        let ones = (0..n).filter(|_| sample_gamma_coalition(1, &mut rng).len() == 1).count();
        assert!((ones as f64 / n as f64 - 0.5).abs() < 5.0 * (0.25 / n as f64).sqrt());
    }

    #[test]
    fn spread_mask_inserts_zero() {
        assert_eq!(spread_mask(0b111, 1), 0b1101);
        assert_eq!(spread_mask(0b1, 0), 0b10);
        assert_eq!(spread_mask(0b11, 2), 0b11);
    }

    #[test]
    fn monte_carlo_series() {
        let game = Game::st_connectivity(fixtures::series());
        let mut rng = seeded(5);
        let est = shapley_monte_carlo(&game, 1, 10_000, &mut rng, Oracle::Exact).unwrap();
        assert!((0.47..=0.53).contains(&est.value), "{}", est.value);
        assert_eq!(est.queries, 20_000);
        assert_eq!(est.method, Method::MonteCarlo);
        assert!(shapley_monte_carlo(&game, 1, 0, &mut rng, Oracle::Exact).is_err());
    }

    #[test]
    fn zero_noise_matches_exact_oracle() {
        let game = Game::st_connectivity(fixtures::diamond());
        let a = shapley_monte_carlo(&game, 3, 5000, &mut seeded(9), Oracle::Exact).unwrap();
        let cfg = NoisyOracleConfig::new(0.0, 1).unwrap();
        let b = shapley_monte_carlo(&game, 3, 5000, &mut seeded(9), Oracle::Noisy(cfg)).unwrap();
        assert_eq!(a.value, b.value);
        assert!(NoisyOracleConfig::new(1.5, 0).is_err());
    }

    #[test]
    fn noisy_monte_carlo_concentrates_at_flip_expectation() {
        let game = Game::st_connectivity(fixtures::diamond());
        let cfg = NoisyOracleConfig::new(0.05, 77).unwrap();
        let est = shapley_monte_carlo(&game, 3, 100_000, &mut seeded(3), Oracle::Noisy(cfg)).unwrap();
        let expect = noisy_expectation(2.0 / 3.0, 0.05).unwrap();
        assert!((est.value - expect).abs() < 5.0 * est.std_error.unwrap(), "{}", est.value);
        assert!((est.value - 2.0 / 3.0).abs() <= 0.1 + 5.0 * est.std_error.unwrap());
        assert_eq!(est.xi_bound, 0.1);
    }

    #[test]
    fn bias_formulas() {
        assert_eq!(noisy_bias(1.0, 0.3).unwrap(), 1.0);
        assert!((noisy_bias(2.0 / 3.0, 0.05).unwrap() - 0.7).abs() < 1e-12);
        assert!((noisy_bias(0.0, 0.2).unwrap() - 0.4).abs() < 1e-12);
        assert!(noisy_bias(1.2, 0.1).is_err());
        assert!(noisy_bias(0.5, -0.1).is_err());
        for k in 0..=10 {
            for p in 0..=10 {
                let (phi, kappa) = (p as f64 / 10.0, k as f64 / 20.0);
                assert!((noisy_bias(phi, kappa).unwrap() - phi).abs() <= 2.0 * kappa + 1e-12);
                assert!((noisy_expectation(phi, kappa).unwrap() - phi).abs() <= 2.0 * kappa + 1e-12);
            }
        }
    }

    #[test]
    fn lower_bound_cases() {
        let example = Game::st_connectivity(fixtures::example());
        assert!((max_shapley_lower_bound(&example).unwrap() - 1.0 / 7.0).abs() < 1e-15);
        let cut = Graph::new(4, 0, 3, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(max_shapley_lower_bound(&Game::st_connectivity(cut)).unwrap(), 0.0);
        let parallel = Game::st_connectivity(fixtures::parallel());
        let bound = max_shapley_lower_bound(&parallel).unwrap();
        let best = shapley_exact_all(&parallel).unwrap().iter().map(|e| e.value).fold(0.0, f64::max);
        assert!((bound - 0.5).abs() < 1e-15 && (best - bound).abs() < 1e-12);
        let lonely = Game::st_connectivity(Graph::new(2, 0, 1, []).unwrap());
        assert!(max_shapley_lower_bound(&lonely).is_err());
    }

    #[test]
    fn classical_ranking() {
        let game = Game::st_connectivity(fixtures::diamond());
        let ranking = classical_argmax_importance(&game, &mut seeded(1), ImportanceConfig::default()).unwrap();
        assert_eq!(ranking.ranked[0].player, 3);
        let path = Game::st_connectivity(fixtures::path());
        let ranking = classical_argmax_importance(&path, &mut seeded(1), ImportanceConfig::default()).unwrap();
        assert_eq!(ranking.ranked[0].player, 1);
        assert!((ranking.ranked[0].value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn classical_queries_scale_inverse_square() {
        let game = Game::st_connectivity(fixtures::diamond());
        let coarse = classical_importance_at(&game, 0.1, 4, CHEBYSHEV_DELTA).unwrap();
        let fine = classical_importance_at(&game, 0.05, 4, CHEBYSHEV_DELTA).unwrap();
        let ratio = fine.total_queries as f64 / coarse.total_queries as f64;
        assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
    }
}
