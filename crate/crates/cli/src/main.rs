use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::warn;
use serde_json::json;

use st_shield::bench::{bench_queries, method_slope, to_csv, DEFAULT_EPSILONS};
use st_shield::fixtures;
use st_shield::qmax::{find_important_nodes, DEFAULT_RESTARTS};
use st_shield::qshapley::{SpanPeConfig, ValueOracleBackend};
use st_shield::report::{rank, ShapleyReport};
use st_shield::rng::seeded;
use st_shield::shapley::{shapley_exact_all, Game, Method};
use st_shield::span::{bits_min, build_operator, build_span_program, decide_pe, default_coupling, span_membership};
use st_shield::{Coalition, Error, Graph};

#[derive(Parser)]
#[command(name = "st-shield", version, about = "Shapley-value node centrality for s-t connectivity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-node centrality report.
    Rank(RankArgs),
    /// Like `rank`, defaulting to the quantum estimator; `--node` restricts the output.
    Shapley {
        #[command(flatten)]
        args: RankArgs,
        #[arg(long)]
        node: Vec<usize>,
    },
    /// Decides whether a coalition keeps source and target connected.
    Stconn {
        #[arg(long)]
        graph: PathBuf,
        /// Bit string over the intermediate nodes, lowest id first.
        #[arg(long)]
        mask: String,
        #[arg(long, value_enum, default_value_t = Mode::Bfs)]
        mode: Mode,
        #[arg(long)]
        bits: Option<usize>,
        #[arg(long, default_value_t = 100)]
        shots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Extracts the `k` most central nodes with quantum maximum finding.
    Maxfind {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Query counts of Monte Carlo and quantum estimation across epsilons, as CSV.
    BenchQueries {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_EPSILONS.to_vec())]
        epsilons: Vec<f64>,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Walkthrough on the built-in nine-node network.
    Demo {
        #[arg(long, default_value = "demo_report.json")]
        out: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Args)]
struct RankArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    backend: BackendArgs,
}

#[derive(Args)]
struct BackendArgs {
    /// Value oracle used by the quantum estimator.
    #[arg(long, value_enum, default_value_t = BackendKind::Exact)]
    backend: BackendKind,
    /// Flip probability for the noisy oracle.
    #[arg(long, default_value_t = 0.05)]
    kappa: f64,
    /// Phase bits for the span-pe oracle.
    #[arg(long = "pe-bits")]
    pe_bits: Option<usize>,
    /// Majority repetitions for the span-pe oracle.
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long)]
    coupling: Option<f64>,
}

impl BackendArgs {
    fn resolve(&self) -> ValueOracleBackend {
        match self.backend {
            BackendKind::Exact => ValueOracleBackend::ExactClassical,
            BackendKind::Noisy => ValueOracleBackend::NoisyClassical { kappa: self.kappa },
            BackendKind::SpanPe => {
                ValueOracleBackend::SpanPe(SpanPeConfig { bits: self.pe_bits, n_reps: self.reps, coupling: self.coupling })
            }
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    MonteCarlo,
    Quantum,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Exact => Method::Exact,
            MethodArg::MonteCarlo => Method::MonteCarlo,
            MethodArg::Quantum => Method::Quantum,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum BackendKind {
    Exact,
    Noisy,
    SpanPe,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Mode {
    Bfs,
    Span,
    Pe,
}

fn load_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Graph::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_rank(args: &RankArgs, default: Method, nodes: &[usize]) -> Result<()> {
    let game = Game::st_connectivity(load_graph(&args.graph)?);
    let method = args.method.map(Method::from).unwrap_or(default);
    let mut report = rank(&game, method, args.epsilon, args.seed, &args.backend.resolve())?;
    if !nodes.is_empty() {
        for v in nodes {
            if !report.values.iter().any(|x| x.node == *v) {
                return Err(Error::NotAPlayer(*v).into());
            }
        }
        let all = report.values.len() as u64;
        report.values.retain(|x| nodes.contains(&x.node));
        report.grover_applications = report.grover_applications.map(|g| g / all * report.values.len() as u64);
        report.sum_phi = report.values.iter().map(|x| x.phi).sum();
    }
    emit(&report.to_json(), args.out.as_deref())
}

fn stconn_decision(g: &Graph, q: &Coalition, mode: Mode, bits: Option<usize>, shots: usize, seed: u64) -> Result<serde_json::Value> {
    let h = g.induced_subgraph(q)?;
    let bfs = h.is_st_connected_bfs();
    let mut out = json!({ "mask": q.to_bits(), "mode": mode_name(mode), "bfs": bfs });
    if g.is_trivially_connected() {
        warn!("source and target are adjacent; every coalition is connected");
        out["connected"] = json!(true);
        out["trivial"] = json!(true);
        return Ok(out);
    }
    match mode {
        Mode::Bfs => out["connected"] = json!(bfs),
        Mode::Span => out["connected"] = json!(span_membership(&build_span_program(&h)?)),
        Mode::Pe => {
            let bits = bits.unwrap_or_else(|| bits_min(g.n()));
            let op = build_operator(g, Some(q), default_coupling(g.n()))?;
            let d = decide_pe(&op, bits, shots, &mut seeded(seed))?;
            out["connected"] = json!(d.connected);
            out["bits"] = json!(bits);
            out["shots"] = json!(d.shots);
            out["zero_readings"] = json!(d.zero_readings);
            out["success_frequency"] = json!(d.success_frequency);
            out["zero_probability"] = json!(d.zero_probability);
            out["queries"] = json!(d.queries);
            out["spectral_fallback"] = json!(d.spectral_fallback);
        }
    }
    Ok(out)
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Bfs => "bfs",
        Mode::Span => "span",
        Mode::Pe => "pe",
    }
}

fn parse_mask(g: &Graph, mask: &str) -> Result<Coalition> {
    let q = Coalition::parse_bits(mask)?;
    if q.width() != g.player_count() {
        return Err(Error::CoalitionWidth { got: q.width(), expected: g.player_count() }.into());
    }
    Ok(q)
}

fn maxfind_report(game: &Game, k: usize, restarts: usize, backend: &ValueOracleBackend, seed: u64) -> Result<ShapleyReport> {
    let found = find_important_nodes(game, k, backend, restarts, &mut seeded(seed))?;
    let estimates: Vec<_> = found
        .nodes
        .iter()
        .map(|n| st_shield::ShapleyEstimate {
            player: n.node,
            value: n.phi,
            epsilon: found.epsilon_used,
            xi_bound: 0.0,
            queries: found.queries_total / found.nodes.len().max(1) as u64,
            method: Method::Quantum,
            std_error: None,
        })
        .collect();
    Ok(ShapleyReport::from_estimates(game, Method::Quantum, found.epsilon_used, &estimates).with_maxfind(&found))
}

fn label(v: usize) -> &'static str {
    fixtures::EXAMPLE_LABELS.get(v).copied().unwrap_or("?")
}

fn cmd_demo(out: &Path, seed: u64) -> Result<()> {
    let start = Instant::now();
    let g = fixtures::example();
    let game = Game::st_connectivity(g.clone());
    println!("network: {} nodes, {} edges, s = {}, t = {}", g.n(), g.edge_count(), label(g.s()), label(g.t()));
    println!();
    println!("coalition checks (bits over a..g):");
    for mask in ["1100000", "0100000"] {
        let q = parse_mask(&g, mask)?;
        let verdicts: Vec<bool> = [Mode::Bfs, Mode::Span, Mode::Pe]
            .iter()
            .map(|&m| stconn_decision(&g, &q, m, None, 100, seed).map(|v| v["connected"].as_bool() == Some(true)))
            .collect::<Result<_>>()?;
        if verdicts.iter().any(|&v| v != verdicts[0]) {
            bail!("decision modes disagree on {mask}: {verdicts:?}");
        }
        println!("  {mask} {}", if verdicts[0] { "connected" } else { "disconnected" });
    }

    let exact = shapley_exact_all(&game)?;
    let exact_report = ShapleyReport::from_estimates(&game, Method::Exact, 0.0, &exact);
    println!();
    println!("exact Shapley ranking:");
    for (r, v) in exact_report.ranked().iter().enumerate() {
        println!("  {:>2}. {} (node {})  phi = {:.6}", r + 1, label(v.node), v.node, v.phi);
    }
    println!("  sum = {:.6}, V(F) = {}", exact_report.sum_phi, exact_report.v_f);

    let eps = 0.1;
    let quantum = rank(&game, Method::Quantum, eps, seed, &ValueOracleBackend::ExactClassical)?;
    println!();
    println!("quantum estimates (epsilon = {eps}, exact oracle):");
    for v in &quantum.values {
        let e = exact.iter().find(|e| e.player == v.node).map(|e| e.value).unwrap_or(0.0);
        println!("  {}  phi ~ {:+.4}  (exact {:.4}, queries {})", label(v.node), v.phi, e, v.queries);
    }

    let found = find_important_nodes(&game, 1, &ValueOracleBackend::ExactClassical, DEFAULT_RESTARTS, &mut seeded(seed))?;
    let top = &found.nodes[0];
    println!();
    println!(
        "maximum finding: node {} (phi ~ {:.4}) at precision {:.4}, {} queries",
        label(top.node),
        top.phi,
        found.epsilon_used,
        found.queries_total
    );

    fs::write(out, exact_report.to_json()).with_context(|| format!("writing {}", out.display()))?;
    println!();
    println!("report written to {} ({:.2} s)", out.display(), start.elapsed().as_secs_f64());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Rank(args) => cmd_rank(&args, Method::Exact, &[]),
        Command::Shapley { args, node } => cmd_rank(&args, Method::Quantum, &node),
        Command::Stconn { graph, mask, mode, bits, shots, seed } => {
            let g = load_graph(&graph)?;
            let q = parse_mask(&g, &mask)?;
            let v = stconn_decision(&g, &q, mode, bits, shots, seed)?;
            println!("{}", serde_json::to_string_pretty(&v)?);
            Ok(())
        }
        Command::Maxfind { graph, k, restarts, backend, seed, out } => {
            let game = Game::st_connectivity(load_graph(&graph)?);
            if game.is_trivial() {
                warn!("source and target are adjacent; reporting zero centrality");
                return emit(&ShapleyReport::trivial(&game, Method::Quantum, 0.0).to_json(), out.as_deref());
            }
            let report = maxfind_report(&game, k, restarts, &backend.resolve(), seed)?;
            emit(&report.to_json(), out.as_deref())
        }
        Command::BenchQueries { graph, epsilons, trials, seed, out } => {
            let game = Game::st_connectivity(load_graph(&graph)?);
            let id = graph.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "graph".into());
            let records = bench_queries(&game, &id, &epsilons, trials, seed)?;
            if epsilons.len() >= 2 {
                for m in [Method::MonteCarlo, Method::Quantum] {
                    eprintln!("{m} slope: {:.3}", method_slope(&records, m)?);
                }
            }
            emit(to_csv(&records).trim_end(), out.as_deref())
        }
        Command::Demo { out, seed } => cmd_demo(&out, seed),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Parse { .. }) => 2,
        Some(Error::Capacity { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
