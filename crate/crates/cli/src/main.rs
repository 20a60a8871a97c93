//! `gsbm`: generate planted networks, fit the robust estimator, and query fits.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 numerical failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use gsbm_core::harness::{self, default_penalties, reps_csv, run_experiment, summary_csv, ExperimentSpec, Scenario};
use gsbm_core::inference::{
    average_observed_degree, detect_outliers, predict_links, spectral_communities, spectral_embedding, unobserved_pairs, Penalty,
};
use gsbm_core::io::{self, atomic_write, load_fit, parse_edge_list, parse_mask_labels, save_fit, MaskMode, TruthFile};
use gsbm_core::sim::{build_ground_truth, sample_adjacency, sample_mask};
use gsbm_core::{fit, FitResult, GsbmError, ObservedGraph, OutlierConfig, OutlierKind, PenaltyChoice, SbmConfig, SolverConfig};

#[derive(Parser, Debug)]
#[command(name = "gsbm", version, about = "Robust network estimation with outliers and missing links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a planted network and write its edge list and truth file.
    Generate(GenerateArgs),
    /// Fit the low-rank plus column-sparse decomposition to an edge list.
    Fit(FitArgs),
    /// Report column norms, certificates and detected outliers of a fit.
    Detect(QueryArgs),
    /// Score node pairs (unobserved dyads by default).
    Predict(PredictArgs),
    /// Two-way spectral split of the non-outlier nodes.
    Communities(CommunitiesArgs),
    /// Run seeded replication experiments and write summary.csv / reps.csv.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Number of inlier nodes.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0.5)]
    p_in: f64,
    #[arg(long, default_value_t = 0.2)]
    p_out: f64,
    /// Outlier type: hub, mixed or none.
    #[arg(long, default_value = "none")]
    outliers: String,
    #[arg(long, default_value_t = 0)]
    s: usize,
    #[arg(long, default_value_t = 0.5)]
    pi_hub: f64,
    #[arg(long, default_value_t = 0.8)]
    pi_mix: f64,
    /// Probability that a dyad is observed.
    #[arg(long, default_value_t = 1.0)]
    p_observe: f64,
    #[arg(long)]
    seed: u64,
    /// Edge list of observed edges.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Pair list of unobserved dyads (use with `fit --mask-mode missing`).
    #[arg(long)]
    mask_out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct GraphArgs {
    /// Whitespace-separated edge list; `#` starts a comment.
    #[arg(long)]
    graph: PathBuf,
    /// Pair list of node labels defining the mask.
    #[arg(long)]
    mask: Option<PathBuf>,
    #[arg(long, default_value = "missing")]
    mask_mode: String,
    /// Keep only the largest connected component.
    #[arg(long)]
    lcc: bool,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// `auto`, `c<X>` (X·√d̄) or an explicit value.
    #[arg(long, default_value = "auto")]
    lambda1: String,
    #[arg(long, default_value = "auto")]
    lambda2: String,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Output fit file; defaults to the graph path with a `.fit` extension.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct QueryArgs {
    #[arg(long)]
    fit: PathBuf,
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[command(flatten)]
    query: QueryArgs,
    /// Pair list of labels to score instead of the unobserved dyads.
    #[arg(long)]
    pairs: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CommunitiesArgs {
    #[command(flatten)]
    query: QueryArgs,
    /// Number of groups; above 2 the leading eigenvectors are written instead.
    #[arg(long, default_value_t = 2)]
    k: usize,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// hub, mixed, prediction, or all.
    #[arg(long, default_value = "all")]
    scenario: String,
    /// Outlier counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2,5,10")]
    s: Vec<usize>,
    /// Signal levels, comma separated; defaults depend on the scenario.
    #[arg(long, value_delimiter = ',')]
    pi: Option<Vec<f64>>,
    /// Outlier type for the prediction scenario.
    #[arg(long, default_value = "hub")]
    prediction_outliers: String,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long)]
    lambda1: Option<String>,
    #[arg(long)]
    lambda2: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out_dir: PathBuf,
}

/// Error tagged with its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<GsbmError> for Failure {
    fn from(e: GsbmError) -> Self {
        let code = if e.is_numerical() {
            3
        } else if matches!(e, GsbmError::Config(_)) {
            1
        } else {
            2
        };
        Failure { code, error: e.into() }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        error: anyhow::anyhow!(msg.into()),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure {
        code: 2,
        error: anyhow::anyhow!("cannot read {}: {e}", path.display()),
    })
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    atomic_write(path, text.as_bytes()).map_err(|e| Failure {
        code: 2,
        error: anyhow::anyhow!("cannot write {}: {e}", path.display()),
    })
}

fn parse_flag<T: std::str::FromStr<Err = GsbmError>>(flag: &str, value: &str) -> CliResult<T> {
    value.parse().map_err(|e: GsbmError| usage(format!("--{flag}: {e}")))
}

fn load_graph(args: &GraphArgs) -> CliResult<ObservedGraph> {
    let mut g = parse_edge_list(&read_text(&args.graph)?)?;
    if let Some(mask) = &args.mask {
        let mode: MaskMode = parse_flag("mask-mode", &args.mask_mode)?;
        let omega = parse_mask_labels(&read_text(mask)?, &g, mode)?;
        g = g.with_mask(omega)?;
    }
    if args.lcc {
        g = g.largest_component_graph();
    }
    for w in &g.warnings {
        warn!("{}: {w}", args.graph.display());
    }
    info!("graph {}: n={} edges={}", args.graph.display(), g.n, g.edge_count());
    Ok(g)
}

/// The graph reindexed to the fit's node order.
fn graph_for_fit(args: &GraphArgs, fit: &FitResult) -> CliResult<ObservedGraph> {
    let g = load_graph(args)?;
    let keep = fit
        .labels
        .iter()
        .map(|l| {
            g.index_of(l)
                .ok_or_else(|| GsbmError::Input(format!("node `{l}` of the fit is missing from the graph")))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(g.subgraph(&keep)?)
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn generate(args: GenerateArgs) -> CliResult<()> {
    let sbm = SbmConfig {
        n_inliers: args.n,
        k_communities: args.k,
        p_in: args.p_in,
        p_out: args.p_out,
        seed: args.seed,
    };
    let outlier = match args.outliers.as_str() {
        "none" => OutlierConfig::none(),
        other => match parse_flag::<OutlierKind>("outliers", other)? {
            OutlierKind::Hub => OutlierConfig::hubs(args.s, args.pi_hub),
            OutlierKind::Mixed => OutlierConfig::mixed(args.s, args.pi_mix),
        },
    };
    info!(
        "generate: {sbm:?} {outlier:?} p_observe={} seed={}",
        args.p_observe, args.seed
    );
    let truth = build_ground_truth(&sbm, &outlier)?;
    let n = truth.n();
    let a = sample_adjacency(&truth, args.seed);
    let omega = sample_mask(n, args.p_observe, args.seed)?;
    let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();

    let observed = gsbm_core::SymMatrix::from_upper(n, |i, j| a.get(i, j) * omega.get(i, j));
    write_text(&args.out, &io::write_edge_list(&observed, &labels))?;
    if let Some(path) = &args.mask_out {
        write_text(path, &io::write_pair_list(&unobserved_pairs(&omega), &labels))?;
    } else if args.p_observe < 1.0 {
        warn!("p_observe < 1 without --mask-out: hidden dyads will be read as non-edges");
    }
    if let Some(path) = &args.truth {
        write_text(path, &TruthFile::new(&truth, args.seed, args.p_observe).to_json())?;
    }
    info!("wrote n={n} outliers={:?}", truth.outliers);
    Ok(())
}

fn solve(args: FitArgs) -> CliResult<()> {
    let g = load_graph(&args.graph)?;
    let l1: PenaltyChoice = parse_flag("lambda1", &args.lambda1)?;
    let l2: PenaltyChoice = parse_flag("lambda2", &args.lambda2)?;
    let d = average_observed_degree(&g.a, &g.omega)?;
    let mut cfg = SolverConfig::new(l1.resolve(Penalty::Nuclear, d), l2.resolve(Penalty::Group, d));
    if let Some(e) = args.epsilon {
        cfg = cfg.with_epsilon(e);
    }
    if let Some(t) = args.rel_tol {
        cfg = cfg.with_rel_tol(t);
    }
    if let Some(m) = args.max_iters {
        cfg = cfg.with_max_iters(m);
    }
    if g.edge_count() == 0 {
        warn!("graph has no observed edges");
    }
    info!(
        "fit: avg_degree={d} lambda1={} ({l1}) lambda2={} ({l2})",
        cfg.lambda1, cfg.lambda2
    );
    info!("config: {cfg:?}");
    let mut result = fit(&g.a, &g.omega, &cfg)?;
    result.labels = g.labels.clone();
    info!(
        "iterations={} converged={} final_objective={}",
        result.iterations,
        result.converged,
        result.final_objective()
    );
    let out = args.out.unwrap_or_else(|| args.graph.graph.with_extension("fit"));
    save_fit(&result, &out).map_err(|e| Failure {
        code: 2,
        error: anyhow::anyhow!("cannot write {}: {e}", out.display()),
    })
}

fn detect(args: QueryArgs) -> CliResult<()> {
    let fitted = load_fit(&args.fit)?;
    let g = graph_for_fit(&args.graph, &fitted)?;
    let report = detect_outliers(&fitted, &g.a, &g.omega, None)?;
    info!(
        "detect: lambda2={} threshold={} detected={}",
        fitted.config.lambda2,
        report.threshold,
        report.detected.len()
    );
    let mut out = String::from("node,col_norm,cert_lhs,detected\n");
    for j in 0..g.n {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fitted.labels[j],
            report.column_norms[j],
            report.certificate_lhs[j],
            report.is_detected(j)
        );
    }
    emit(args.out.as_deref(), &out)
}

fn predict(args: PredictArgs) -> CliResult<()> {
    let q = args.query;
    let fitted = load_fit(&q.fit)?;
    let g = graph_for_fit(&q.graph, &fitted)?;
    let pairs = match &args.pairs {
        Some(path) => {
            let listed = parse_mask_labels(&read_text(path)?, &g, MaskMode::Observed)?;
            (0..g.n)
                .flat_map(|i| (i + 1..g.n).map(move |j| (i, j)))
                .filter(|&(i, j)| listed.get(i, j) != 0.0)
                .collect()
        }
        None => unobserved_pairs(&g.omega),
    };
    let pred = predict_links(&fitted, &pairs)?;
    info!("predict: {} pairs", pred.pairs.len());
    let mut out = String::from("i,j,score\n");
    for (&(i, j), s) in pred.pairs.iter().zip(&pred.scores) {
        let _ = writeln!(out, "{},{},{s}", fitted.labels[i], fitted.labels[j]);
    }
    emit(q.out.as_deref(), &out)
}

fn communities(args: CommunitiesArgs) -> CliResult<()> {
    let q = args.query;
    let fitted = load_fit(&q.fit)?;
    let g = graph_for_fit(&q.graph, &fitted)?;
    let report = detect_outliers(&fitted, &g.a, &g.omega, None)?;
    let mut out = String::new();
    if args.k <= 2 {
        let c = spectral_communities(&fitted, &report.detected)?;
        if c.degenerate {
            warn!("second eigenvalue of L̂ is repeated; the split is arbitrary");
        }
        info!("communities: eigenvalue={} outliers={}", c.eigenvalue, report.detected.len());
        out.push_str("node,community\n");
        for (j, label) in c.labels.iter().enumerate() {
            let tag = label.map(|x| x.to_string()).unwrap_or_else(|| "outlier".into());
            let _ = writeln!(out, "{},{tag}", fitted.labels[j]);
        }
    } else {
        let pairs = spectral_embedding(&fitted, args.k)?;
        out.push_str("node,outlier");
        for k in 1..=pairs.len() {
            let _ = write!(out, ",v{k}");
        }
        out.push('\n');
        for j in 0..g.n {
            let _ = write!(out, "{},{}", fitted.labels[j], report.is_detected(j));
            for p in &pairs {
                let _ = write!(out, ",{}", p.vector[j]);
            }
            out.push('\n');
        }
    }
    emit(q.out.as_deref(), &out)
}

fn bench(args: BenchArgs) -> CliResult<()> {
    let scenarios: Vec<Scenario> = match args.scenario.as_str() {
        "all" => vec![Scenario::Hub, Scenario::Mixed, Scenario::Prediction],
        other => vec![parse_flag("scenario", other)?],
    };
    let prediction_kind: OutlierKind = parse_flag("prediction-outliers", &args.prediction_outliers)?;
    let mut reports = Vec::new();
    for scenario in scenarios {
        let kind = match scenario {
            Scenario::Hub => OutlierKind::Hub,
            Scenario::Mixed => OutlierKind::Mixed,
            Scenario::Prediction => prediction_kind,
        };
        let pis = args.pi.clone().unwrap_or_else(|| match (scenario, kind) {
            (Scenario::Prediction, OutlierKind::Hub) => vec![0.2],
            (Scenario::Prediction, OutlierKind::Mixed) => vec![0.4],
            (_, OutlierKind::Hub) => vec![0.2, 0.5, 0.8],
            (_, OutlierKind::Mixed) => vec![0.4, 0.6, 0.8],
        });
        let (d1, d2) = default_penalties(scenario);
        let lambda1 = match &args.lambda1 {
            Some(v) => parse_flag("lambda1", v)?,
            None => d1,
        };
        let lambda2 = match &args.lambda2 {
            Some(v) => parse_flag("lambda2", v)?,
            None => d2,
        };
        for &s in &args.s {
            for &pi in &pis {
                let outlier = match kind {
                    OutlierKind::Hub => OutlierConfig::hubs(s, pi),
                    OutlierKind::Mixed => OutlierConfig::mixed(s, pi),
                };
                let mut spec = ExperimentSpec::desk(scenario, outlier, args.seed);
                spec.sbm.n_inliers = args.n;
                spec.replications = args.reps;
                spec.lambda1 = lambda1;
                spec.lambda2 = lambda2;
                spec.workers = args.threads;
                info!(
                    "bench: scenario={scenario} kind={kind} s={s} pi={pi} reps={} seed={} lambda1={lambda1} lambda2={lambda2} workers={}",
                    args.reps,
                    args.seed,
                    harness::worker_count(args.threads)
                );
                let report = run_experiment(&spec)?;
                info!(
                    "power={} fdr={} mse_model={:?} mse_baseline={:?} failures={}",
                    report.power, report.fdr, report.pred_mse_model, report.pred_mse_baseline, report.failures
                );
                reports.push(report);
            }
        }
    }
    std::fs::create_dir_all(&args.out_dir).map_err(|e| Failure {
        code: 2,
        error: anyhow::anyhow!("cannot create {}: {e}", args.out_dir.display()),
    })?;
    write_text(&args.out_dir.join("summary.csv"), &summary_csv(&reports))?;
    write_text(&args.out_dir.join("reps.csv"), &reps_csv(&reports))
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Fit(a) => solve(a),
        Command::Detect(a) => detect(a),
        Command::Predict(a) => predict(a),
        Command::Communities(a) => communities(a),
        Command::Bench(a) => bench(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
