//! Acceptance suite. Each test prints one PASS/FAIL line to the real stdout
//! (bypassing capture) before asserting.

use std::io::Write;
use std::process::Command;
use std::time::Instant;

use rand::Rng;
use st_shield::bench::loglog_slope;
use st_shield::fixtures;
use st_shield::qmax::{durr_hoyer_max, find_important_nodes, DEFAULT_RESTARTS};
use st_shield::qshapley::{quantum_shapley, traced_gamma_error, GammaPrepConfig, SpanPeConfig, ValueOracleBackend};
use st_shield::qsim::{majority_failure_bound, majority_unitary, Gate, RegisterLayout, StateVector};
use st_shield::report::validate_report_json;
use st_shield::rng::{child, seeded};
use st_shield::shapley::{
    chebyshev_samples, shapley_exact_all, shapley_monte_carlo, Game, NoisyOracleConfig, Oracle,
    BERNOULLI_VARIANCE_BOUND, CHEBYSHEV_DELTA,
};
use st_shield::span::{bits_min, build_operator, build_span_program, decide_pe, default_coupling, span_membership};
use st_shield::{Coalition, Graph};

const CORPUS_SEED: u64 = 2024;

fn verdict(id: usize, name: &str, ok: bool, detail: String) {
    let line = format!("criterion {id:>2} {} {name}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(ok, "criterion {id} ({name}) failed: {detail}");
}

fn phis(game: &Game) -> Vec<f64> {
    shapley_exact_all(game).unwrap().iter().map(|e| e.value).collect()
}

/// Lower end of the Wilson score interval at 99% confidence.
fn wilson_lower(successes: usize, n: usize) -> f64 {
    let z = 2.5758293035489;
    let (n, p) = (n as f64, successes as f64 / n as f64);
    let denom = 1.0 + z * z / n;
    let centre = p + z * z / (2.0 * n);
    let spread = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt();
    (centre - spread) / denom
}

#[test]
fn c01_span_membership_matches_bfs() {
    let start = Instant::now();
    let corpus = fixtures::corpus(CORPUS_SEED);
    let (mut checked, mut agree) = (0usize, 0usize);
    for g in &corpus {
        let w = g.player_count();
        for mask in 0..1u64 << w {
            let h = g.induced_subgraph(&Coalition::new(w, mask).unwrap()).unwrap();
            checked += 1;
            agree += usize::from(span_membership(&build_span_program(&h).unwrap()) == h.is_st_connected_bfs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        1,
        "span membership equals BFS",
        agree == checked && secs < 120.0,
        format!("{agree}/{checked} agree over {} graphs in {secs:.2} s", corpus.len()),
    );
}

#[test]
fn c02_phase_estimation_success() {
    let corpus = fixtures::corpus(CORPUS_SEED);
    let shots = 400;
    let (mut total, mut good, mut instances) = (0usize, 0usize, 0usize);
    let mut worst = (f64::INFINITY, String::new());
    let mut rng = seeded(99);
    for g in &corpus {
        let w = g.player_count();
        let bits = bits_min(g.n());
        let c = default_coupling(g.n());
        for mask in 0..1u64 << w {
            let q = Coalition::new(w, mask).unwrap();
            let op = build_operator(g, Some(&q), c).unwrap();
            let d = decide_pe(&op, bits, shots, &mut rng).unwrap();
            assert!(!d.spectral_fallback);
            let s = (d.success_frequency * shots as f64).round() as usize;
            let lb = wilson_lower(s, shots);
            if lb < worst.0 {
                worst = (lb, format!("n={} mask={}", g.n(), q.to_bits()));
            }
            total += shots;
            good += s;
            instances += 1;
        }
    }
    let agg = wilson_lower(good, total);
    verdict(
        2,
        "single-shot decision success",
        agg >= 0.9 && worst.0 >= 0.85,
        format!(
            "{instances} instances, aggregate {:.4} (99% lower {agg:.4}), worst instance lower bound {:.4} at {}",
            good as f64 / total as f64,
            worst.0,
            worst.1
        ),
    );
}

#[test]
fn c03_majority_amplification() {
    let p: f64 = 0.9;
    let layout = RegisterLayout::new(&[("runs", 3), ("maj", 1)]).unwrap();
    let mut state = StateVector::new(layout);
    for k in 0..3 {
        state.apply_on(&Gate::Ry(2.0 * p.sqrt().asin()), "runs", k).unwrap();
    }
    majority_unitary(&mut state, "runs", "maj").unwrap();
    let fail_prob = state.probability("maj", 0).unwrap();
    let trials = 10_000;
    let mut rng = seeded(3);
    let fails = (0..trials).filter(|_| !rng.random_bool(1.0 - fail_prob)).count();
    let empirical = fails as f64 / trials as f64;
    let sigma = (0.028 * 0.972 / trials as f64).sqrt();
    let in_band = (empirical - 0.028).abs() <= 3.0 * sigma;

    let bounds: Vec<_> = [3usize, 5, 7, 9].iter().map(|&n| majority_failure_bound(p, n).unwrap()).collect();
    let decreasing = bounds.windows(2).all(|w| w[1].exact_tail < w[0].exact_tail);
    let dominated: Vec<bool> = bounds.iter().map(|b| b.lemma_bound >= b.exact_tail).collect();
    let summary: Vec<String> =
        bounds.iter().map(|b| format!("{:.3e}<={:.3e}", b.exact_tail, b.lemma_bound)).collect();
    verdict(
        3,
        "majority amplification",
        in_band && decreasing && dominated.iter().all(|&d| d),
        format!(
            "empirical {empirical:.4} vs 0.028 +- {:.4}, tails decreasing {decreasing}, tail<=bound at n=3,5,7,9: {summary:?}",
            3.0 * sigma
        ),
    );
}

fn permutation_shapley(game: &Game) -> Vec<f64> {
    let n = game.player_count();
    let orders = all_perms(n);
    let mut phi = vec![0.0; n];
    for order in &orders {
        let mut mask = 0u64;
        for &p in order {
            let before = game.value_mask(mask);
            mask |= 1 << p;
            phi[p] += game.value_mask(mask) - before;
        }
    }
    phi.iter().map(|x| x / orders.len() as f64).collect()
}

fn relabel_preserves(g: &Graph, perm: &[usize]) -> bool {
    let players = g.players();
    let map = |v: usize| players.iter().position(|&p| p == v).map_or(v, |k| players[perm[k]]);
    g.edges().all(|(u, w)| g.has_edge(map(u), map(w)))
}

fn all_perms(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in all_perms(n - 1) {
        for slot in 0..=p.len() {
            let mut q = p.clone();
            q.insert(slot, n - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn c04_exact_shapley_oracles() {
    let mut graphs: Vec<Graph> =
        ["path", "series", "parallel", "diamond", "example"].iter().map(|n| fixtures::by_name(n).unwrap()).collect();
    graphs.extend((2..=5).flat_map(fixtures::nonisomorphic_graphs));
    let (mut max_formula, mut max_eff, mut null_bad, mut sym_bad) = (0.0f64, 0.0f64, 0usize, 0usize);
    for g in &graphs {
        let game = Game::st_connectivity(g.clone());
        let n = game.player_count();
        if n > 8 {
            continue;
        }
        let a = phis(&game);
        let b = permutation_shapley(&game);
        max_formula = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(max_formula, f64::max);
        max_eff = max_eff.max((a.iter().sum::<f64>() - game.grand_value()).abs());
        for i in 0..n {
            let null = (0..1u64 << n).filter(|m| m >> i & 1 == 0).all(|m| game.value_mask(m) == game.value_mask(m | 1 << i));
            if null && a[i].abs() > 1e-10 {
                null_bad += 1;
            }
        }
        if n <= 7 {
            for perm in all_perms(n) {
                if relabel_preserves(g, &perm) && (0..n).any(|k| (a[k] - a[perm[k]]).abs() > 1e-10) {
                    sym_bad += 1;
                }
            }
        }
    }
    let diamond = phis(&Game::st_connectivity(fixtures::diamond()));
    let diamond_ok = diamond.iter().zip([1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0]).all(|(x, y)| (x - y).abs() < 1e-10);
    verdict(
        4,
        "exact Shapley oracles",
        max_formula < 1e-10 && max_eff < 1e-10 && diamond_ok && null_bad == 0 && sym_bad == 0,
        format!(
            "{} graphs: formula gap {max_formula:.1e}, efficiency gap {max_eff:.1e}, diamond {diamond:?}, null violations {null_bad}, symmetry violations {sym_bad}",
            graphs.len()
        ),
    );
}

#[test]
fn c05_gamma_state_preparation() {
    let mut worst_at_8 = 0.0f64;
    let mut monotone = true;
    for n_players in 2..=8 {
        let tv: Vec<f64> = (2..=10)
            .map(|ell| traced_gamma_error(&GammaPrepConfig::new(ell, n_players, 0, true).unwrap()).unwrap())
            .collect();
        worst_at_8 = worst_at_8.max(tv[6]);
        monotone &= tv.windows(2).all(|w| w[1] < w[0]);
    }
    verdict(
        5,
        "gamma-state preparation",
        worst_at_8 <= 1e-2 && monotone,
        format!("worst TV at ell=8 over |F|<=8: {worst_at_8:.3e}, strictly decreasing over ell=2..10: {monotone}"),
    );
}

#[test]
fn c06_quantum_shapley_estimate() {
    let eps_grid = [0.1, 0.05];
    let mut accuracy_ok = true;
    let mut worst_hits = 10;
    let mut slope_lines = Vec::new();
    let mut slopes_ok = true;
    for name in ["series", "diamond"] {
        let game = Game::st_connectivity(fixtures::by_name(name).unwrap());
        let exact = shapley_exact_all(&game).unwrap();
        let mut grover = Vec::new();
        let mut classical = Vec::new();
        for &eps in &eps_grid {
            let mut apps = 0u64;
            for e in &exact {
                let hits = (0..10u64)
                    .filter(|&seed| {
                        let q = quantum_shapley(&game, e.player, eps, &ValueOracleBackend::ExactClassical, &mut child(seed, e.player as u64))
                            .unwrap();
                        apps = q.grover_applications;
                        (q.estimate.value - e.value).abs() <= eps
                    })
                    .count();
                worst_hits = worst_hits.min(hits);
                accuracy_ok &= hits >= 8;
            }
            grover.push(apps as f64);
            let samples = chebyshev_samples(eps, CHEBYSHEV_DELTA, BERNOULLI_VARIANCE_BOUND);
            let mc = shapley_monte_carlo(&game, exact[0].player, samples, &mut seeded(1), Oracle::Exact).unwrap();
            classical.push(mc.queries as f64);
        }
        let qs = loglog_slope(&eps_grid, &grover).unwrap();
        let cs = loglog_slope(&eps_grid, &classical).unwrap();
        slopes_ok &= (qs + 1.0).abs() <= 0.2 && (cs + 2.0).abs() <= 0.2;
        slope_lines.push(format!("{name}: quantum {qs:.3}, classical {cs:.3}"));
    }
    verdict(
        6,
        "quantum Shapley estimate",
        accuracy_ok && slopes_ok,
        format!("worst node {worst_hits}/10 runs within epsilon; slopes {}", slope_lines.join("; ")),
    );
}

#[test]
fn c07_noisy_oracle_bias() {
    let kappa = 0.05;
    let game = Game::st_connectivity(fixtures::diamond());
    let phi = 2.0 / 3.0;
    let runs = 200;
    let samples = 2000;
    let estimates: Vec<f64> = (0..runs)
        .map(|r| {
            let oracle = Oracle::Noisy(NoisyOracleConfig::new(kappa, 10_000 + r).unwrap());
            shapley_monte_carlo(&game, 3, samples, &mut seeded(r), oracle).unwrap().value
        })
        .collect();
    let mean = estimates.iter().sum::<f64>() / runs as f64;
    let var = estimates.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
    let se = (var / runs as f64).sqrt();
    let z = (mean - 0.7) / se;
    let bias = mean - phi;
    verdict(
        7,
        "noisy-oracle bias",
        z.abs() <= 4.0 && bias.abs() <= 2.0 * kappa,
        format!("mean {mean:.4} (SE {se:.4}) is {z:.1} SE from 0.7; |bias| {:.4} vs 2*kappa {:.2}", bias.abs(), 2.0 * kappa),
    );
}

#[test]
fn c08_span_program_composition() {
    let game = Game::st_connectivity(fixtures::series());
    let eps = 0.1;
    let span = ValueOracleBackend::SpanPe(SpanPeConfig { bits: Some(10), n_reps: 5, coupling: Some(1.0 / 32.0) });
    let mut ok = true;
    let mut lines = Vec::new();
    for &v in game.players() {
        let a = quantum_shapley(&game, v, eps, &span, &mut seeded(5)).unwrap();
        let b = quantum_shapley(&game, v, eps, &ValueOracleBackend::ExactClassical, &mut seeded(5)).unwrap();
        let budget = eps + a.estimate.xi_bound;
        let gap = (a.estimate.value - b.estimate.value).abs();
        ok &= gap <= budget && a.aux_residual() <= 1e-6;
        lines.push(format!("node {v}: gap {gap:.2e} <= {budget:.3}, residual {:.1e}", a.aux_residual()));
    }
    verdict(8, "span-program oracle composition", ok, lines.join("; "));
}

#[test]
fn c09_maximum_finding() {
    let mut rng = seeded(21);
    let sizes = [16usize, 64, 256, 1024];
    let runs = 200;
    let means: Vec<f64> = sizes
        .iter()
        .map(|&n| {
            (0..runs)
                .map(|_| {
                    let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
                    durr_hoyer_max(&v, &mut rng).unwrap().queries as f64
                })
                .sum::<f64>()
                / runs as f64
        })
        .collect();
    let xs: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    let slope = loglog_slope(&xs, &means).unwrap();

    let mut rates = Vec::new();
    for name in ["diamond", "example"] {
        let game = Game::st_connectivity(fixtures::by_name(name).unwrap());
        let exact = shapley_exact_all(&game).unwrap();
        let top = exact.iter().map(|e| e.value).fold(f64::NEG_INFINITY, f64::max);
        let wins = (0..100u64)
            .filter(|&seed| {
                let found =
                    find_important_nodes(&game, 1, &ValueOracleBackend::ExactClassical, DEFAULT_RESTARTS, &mut seeded(seed))
                        .unwrap();
                let node = found.nodes[0].node;
                let phi = exact.iter().find(|e| e.player == node).unwrap().value;
                top - phi <= 2.0 * found.epsilon_used
            })
            .count();
        rates.push((name, wins));
    }
    verdict(
        9,
        "maximum finding",
        (slope - 0.5).abs() <= 0.1 && rates.iter().all(|(_, w)| *w >= 95),
        format!("query slope {slope:.3} (means {means:.1?}); within 2 eps of max: {rates:?} of 100"),
    );
}

#[test]
fn c10_demo_end_to_end() {
    let out_path = std::env::temp_dir().join(format!("st-shield-demo-{}.json", std::process::id()));
    let start = Instant::now();
    let output = Command::new(env!("CARGO_BIN_EXE_st-shield"))
        .args(["demo", "--out"])
        .arg(&out_path)
        .output()
        .expect("demo runs");
    let secs = start.elapsed().as_secs_f64();
    let text = String::from_utf8_lossy(&output.stdout);
    let facts = text.lines().any(|l| l.trim() == "1100000 connected") && text.lines().any(|l| l.trim() == "0100000 disconnected");

    let printed: Vec<usize> = text
        .lines()
        .skip_while(|l| !l.starts_with("exact Shapley ranking"))
        .skip(1)
        .take_while(|l| l.contains("(node "))
        .filter_map(|l| l.split("(node ").nth(1)?.split(')').next()?.parse().ok())
        .collect();
    let mut exact = shapley_exact_all(&Game::st_connectivity(fixtures::example())).unwrap();
    exact.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.player.cmp(&b.player)));
    let expected: Vec<usize> = exact.iter().map(|e| e.player).collect();
    let report_ok = std::fs::read_to_string(&out_path).ok().is_some_and(|j| validate_report_json(&j).is_ok());
    let _ = std::fs::remove_file(&out_path);
    verdict(
        10,
        "end-to-end demo",
        output.status.success() && secs < 60.0 && facts && printed == expected && report_ok,
        format!(
            "exit {:?} in {secs:.2} s, coalition facts {facts}, ranking {printed:?} vs exact {expected:?}, report valid {report_ok}",
            output.status.code()
        ),
    );
}
