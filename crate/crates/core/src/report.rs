//! JSON centrality reports.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::qmax::ImportantNodes;
use crate::qshapley::{quantum_shapley_all, ValueOracleBackend};
use crate::rng::child;
use crate::shapley::{
    chebyshev_samples, shapley_exact_all, shapley_monte_carlo, Game, Method, Oracle, ShapleyEstimate,
    BERNOULLI_VARIANCE_BOUND, CHEBYSHEV_DELTA,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeValue {
    pub node: NodeId,
    pub phi: f64,
    pub queries: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapleyReport {
    /// Canonical graph text.
    pub graph: String,
    pub method: Method,
    pub epsilon: f64,
    pub values: Vec<NodeValue>,
    pub sum_phi: f64,
    #[serde(rename = "v_F")]
    pub v_f: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trivial: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ae_bits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grover_applications: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub queries_total: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_used: Option<f64>,
}

impl ShapleyReport {
    pub fn from_estimates(game: &Game, method: Method, epsilon: f64, estimates: &[ShapleyEstimate]) -> Self {
        let values: Vec<NodeValue> =
            estimates.iter().map(|e| NodeValue { node: e.player, phi: e.value, queries: e.queries }).collect();
        let sum_phi = values.iter().map(|v| v.phi).sum();
        Self {
            graph: game.graph().to_text(),
            method,
            epsilon,
            values,
            sum_phi,
            v_f: if game.is_trivial() { 0.0 } else { game.grand_value() },
            trivial: game.is_trivial().then_some(true),
            ell: None,
            ae_bits: None,
            grover_applications: None,
            queries_total: None,
            restarts: None,
            epsilon_used: None,
        }
    }

    /// All-zero report for a graph whose source and target are adjacent.
    pub fn trivial(game: &Game, method: Method, epsilon: f64) -> Self {
        let zeros: Vec<ShapleyEstimate> = game
            .players()
            .iter()
            .map(|&v| ShapleyEstimate {
                player: v,
                value: 0.0,
                epsilon,
                xi_bound: 0.0,
                queries: 0,
                method,
                std_error: None,
            })
            .collect();
        let mut r = Self::from_estimates(game, method, epsilon, &zeros);
        r.trivial = Some(true);
        r
    }

    /// Nodes in descending `phi`, ties by id.
    pub fn ranked(&self) -> Vec<NodeValue> {
        let mut v = self.values.clone();
        v.sort_by(|a, b| b.phi.total_cmp(&a.phi).then(a.node.cmp(&b.node)));
        v
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Adds the maximum-finding fields.
    pub fn with_maxfind(mut self, found: &ImportantNodes) -> Self {
        self.queries_total = Some(found.queries_total);
        self.restarts = Some(found.restarts);
        self.epsilon_used = Some(found.epsilon_used);
        self
    }
}

/// Checks that `text` is a report: required keys with the right JSON types,
/// and `sum_phi` equal to the sum of the listed values.
pub fn validate_report_json(text: &str) -> Result<ShapleyReport> {
    let raw: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("report is not JSON: {e}")))?;
    let obj = raw.as_object().ok_or_else(|| Error::InvalidArgument("report must be an object".into()))?;
    for (key, ok) in [
        ("graph", obj.get("graph").is_some_and(|v| v.is_string())),
        ("method", obj.get("method").is_some_and(|v| v.is_string())),
        ("epsilon", obj.get("epsilon").is_some_and(|v| v.is_number())),
        ("values", obj.get("values").is_some_and(|v| v.is_array())),
        ("sum_phi", obj.get("sum_phi").is_some_and(|v| v.is_number())),
        ("v_F", obj.get("v_F").is_some_and(|v| v.is_number())),
    ] {
        if !ok {
            return Err(Error::InvalidArgument(format!("report field `{key}` is missing or mistyped")));
        }
    }
    let report: ShapleyReport =
        serde_json::from_value(raw).map_err(|e| Error::InvalidArgument(format!("malformed report: {e}")))?;
    let total: f64 = report.values.iter().map(|v| v.phi).sum();
    if (total - report.sum_phi).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("sum_phi {} disagrees with values ({total})", report.sum_phi)));
    }
    Ok(report)
}

/// Per-node centrality with the chosen engine. `epsilon` is ignored by the
/// exact engine; Monte Carlo sizes its samples by Chebyshev's inequality.
pub fn rank(game: &Game, method: Method, epsilon: f64, seed: u64, backend: &ValueOracleBackend) -> Result<ShapleyReport> {
    if game.is_trivial() {
        warn!("source and target are adjacent; reporting zero centrality");
        return Ok(ShapleyReport::trivial(game, method, epsilon));
    }
    match method {
        Method::Exact => Ok(ShapleyReport::from_estimates(game, method, 0.0, &shapley_exact_all(game)?)),
        Method::MonteCarlo => {
            if !(epsilon > 0.0) {
                return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
            }
            let samples = chebyshev_samples(epsilon, CHEBYSHEV_DELTA, BERNOULLI_VARIANCE_BOUND);
            let est = game
                .players()
                .iter()
                .map(|&v| shapley_monte_carlo(game, v, samples, &mut child(seed, v as u64), Oracle::Exact))
                .collect::<Result<Vec<_>>>()?;
            Ok(ShapleyReport::from_estimates(game, method, epsilon, &est))
        }
        Method::Quantum => {
            let est = quantum_shapley_all(game, epsilon, backend, seed)?;
            let plain: Vec<ShapleyEstimate> = est.iter().map(|e| e.estimate.clone()).collect();
            let mut r = ShapleyReport::from_estimates(game, method, epsilon, &plain);
            r.ell = est.first().map(|e| e.ell);
            r.ae_bits = est.first().map(|e| e.ae_bits);
            r.grover_applications = Some(est.iter().map(|e| e.grover_applications).sum());
            Ok(r)
        }
    }
}
