//! Command-line front end: `fit`, `sweep`, `compose` and `frontier`.

mod output;
mod svg;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

pub use output::{config_hash, parse_subspace, subspace_text, write_atomic, Table};

use crate::data::{load_dataset, split_groups, train_test_split, DatasetSchema, EncodeOptions, GroupedDataset};
use crate::error::{Error, Result};
use crate::evaluation::{
    fairness_report, group_metrics_from_predictions, train_linear_classifier, ClassifierConfig,
    FairnessReport,
};
use crate::linalg::{gram, Matrix, Subspace, SymMatrix};
use crate::objectives::{min_max_eigen_gap, FairPcaProblem, Mode, Penalty, ProblemOptions};
use crate::solver::{
    initial_subspace, pareto_fair_pca, pareto_frontier, Init, LineSearch, SolveResult, SolverConfig,
};
use svg::{line_chart, Series};

#[derive(Debug, Parser)]
#[command(name = "fairpca", version, about = "Pareto fair PCA")]
pub struct Cli {
    /// Log progress to standard error; repeat for more detail.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one fair subspace and report it against plain PCA.
    Fit(FitArgs),
    /// Fair (pairwise and single) and plain PCA over a range of target dimensions.
    Sweep(SweepArgs),
    /// Downstream linear classifier on plain and fair projections.
    Compose(ComposeArgs),
    /// Parallel restarts filtered to mutually non-dominated solutions.
    Frontier(FrontierArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Input CSV file.
    #[arg(long)]
    pub data: PathBuf,
    /// Column schema (TOML).
    #[arg(long)]
    pub schema: PathBuf,
    /// Use this column as the sensitive attribute instead of the schema's.
    #[arg(long)]
    pub sensitive: Option<String>,
    /// Leave the sensitive attribute out of the feature matrix.
    #[arg(long)]
    pub exclude_sensitive: bool,
    /// Directory for the preprocessed-dataset cache.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = Penalty::Squared)]
    pub penalty: Penalty,
    /// Regularization coefficient; derived from the group spectra when omitted.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
    /// Step-size rule; the default depends on the command.
    #[arg(long, value_enum)]
    pub lr: Option<LineSearch>,
    /// Sufficient-decrease constant of the backtracking search.
    #[arg(long, default_value_t = 1e-4)]
    pub beta: f64,
    #[arg(long, value_enum, default_value_t = Init::Random)]
    pub init: Init,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use raw instead of unit-norm gradients in the direction subproblem.
    #[arg(long)]
    pub no_normalize: bool,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = Mode::Pairwise)]
    pub mode: Mode,
    /// Target dimension.
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 2)]
    pub r_min: usize,
    #[arg(long, default_value_t = 10)]
    pub r_max: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ComposeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = Mode::Pairwise)]
    pub mode: Mode,
    #[arg(long, default_value_t = 10)]
    pub r: usize,
    /// Share of each (group, label) stratum held out for evaluation.
    #[arg(long, default_value_t = 0.3)]
    pub test_fraction: f64,
    /// Classifier regularization.
    #[arg(long, default_value_t = 1e-4)]
    pub lambda: f64,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct FrontierArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = Mode::Pairwise)]
    pub mode: Mode,
    #[arg(long)]
    pub r: usize,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Fit,
    Sweep,
    Compose,
    Frontier,
}

/// Everything that determines a command's outputs.
///
/// The output and cache directories do not affect results and are left out
/// of the serialized form, so they do not change the config hash.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub data: PathBuf,
    pub schema: PathBuf,
    pub sensitive: Option<String>,
    pub exclude_sensitive: bool,
    pub problem: ProblemOptions,
    pub r_min: usize,
    pub r_max: usize,
    pub solver: SolverConfig,
    pub test_fraction: f64,
    pub classifier: ClassifierConfig,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub cache_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_command(command: Command) -> Self {
        let (kind, data, solver, mode, r_min, r_max, restarts, out) = match &command {
            Command::Fit(a) => (CommandKind::Fit, &a.data, &a.solver, a.mode, a.r, a.r, 1, &a.out),
            Command::Sweep(a) => {
                (CommandKind::Sweep, &a.data, &a.solver, Mode::Pairwise, a.r_min, a.r_max, 1, &a.out)
            }
            Command::Compose(a) => (CommandKind::Compose, &a.data, &a.solver, a.mode, a.r, a.r, 1, &a.out),
            Command::Frontier(a) => {
                (CommandKind::Frontier, &a.data, &a.solver, a.mode, a.r, a.r, a.restarts, &a.out)
            }
        };
        let default_lr = match kind {
            CommandKind::Fit | CommandKind::Frontier => LineSearch::Backtracking,
            CommandKind::Sweep | CommandKind::Compose => LineSearch::InvSqrt,
        };
        let (test_fraction, classifier) = match &command {
            Command::Compose(a) => (
                a.test_fraction,
                ClassifierConfig {
                    lambda: a.lambda,
                    epochs: a.epochs,
                    seed: solver.seed,
                },
            ),
            _ => (0.3, ClassifierConfig::default()),
        };
        Self {
            command: kind,
            data: data.data.clone(),
            schema: data.schema.clone(),
            sensitive: data.sensitive.clone(),
            exclude_sensitive: data.exclude_sensitive,
            problem: ProblemOptions {
                mode,
                penalty: solver.penalty,
                alpha: solver.alpha,
            },
            r_min,
            r_max,
            solver: SolverConfig {
                max_iters: solver.iters,
                beta: solver.beta,
                line_search: solver.lr.unwrap_or(default_lr),
                seed: solver.seed,
                restarts,
                normalize: !solver.no_normalize,
                init: solver.init,
                ..SolverConfig::default()
            },
            test_fraction,
            classifier,
            out: out.clone(),
            cache_dir: data.cache_dir.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if self.r_min == 0 || self.r_min > self.r_max {
            return Err(Error::Config(format!(
                "need 1 <= r-min <= r-max, got {}..={}",
                self.r_min, self.r_max
            )));
        }
        if let Some(a) = self.problem.alpha {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(Error::Config(format!("alpha must be finite and >= 0, got {a}")));
            }
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config(format!(
                "test fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        if self.out.exists() && !self.out.is_dir() {
            return Err(Error::Config(format!("output path {} is not a directory", self.out.display())));
        }
        Ok(())
    }

    pub fn hash(&self) -> String {
        config_hash(self)
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .try_init();
    match run(&RunConfig::from_command(cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(config: &RunConfig) -> Result<()> {
    config.validate()?;
    match config.command {
        CommandKind::Fit => cmd_fit(config),
        CommandKind::Sweep => cmd_sweep(config),
        CommandKind::Compose => cmd_compose(config),
        CommandKind::Frontier => cmd_frontier(config),
    }
}

fn load(config: &RunConfig) -> Result<GroupedDataset> {
    let mut schema = DatasetSchema::from_path(&config.schema)?;
    if let Some(name) = &config.sensitive {
        schema = schema.with_sensitive(name)?;
    }
    if config.command == CommandKind::Compose && schema.label().is_none() {
        return Err(Error::Config(format!(
            "schema {} has no label column",
            config.schema.display()
        )));
    }
    let options = EncodeOptions {
        exclude_sensitive: config.exclude_sensitive,
    };
    let gd = load_dataset(&config.data, &schema, options, config.cache_dir.as_deref())?;
    let d = gd.matrix.ncols();
    if config.r_max > d {
        return Err(Error::Config(format!(
            "target dimension {} exceeds the {d} encoded features",
            config.r_max
        )));
    }
    log::info!("{} rows, {d} features, groups {:?}", gd.nrows(), gd.group_sizes());
    Ok(gd)
}

struct Stats {
    grams: Vec<SymMatrix>,
    sizes: Vec<usize>,
}

impl Stats {
    fn of(gd: &GroupedDataset) -> Self {
        Self {
            grams: split_groups(gd).iter().map(gram).collect(),
            sizes: gd.group_sizes(),
        }
    }

    fn problem(&self, r: usize, options: ProblemOptions) -> Result<FairPcaProblem> {
        FairPcaProblem::from_grams(self.grams.clone(), self.sizes.clone(), r, options)
    }
}

fn solve(problem: &FairPcaProblem, config: &SolverConfig) -> Result<SolveResult> {
    let u0 = initial_subspace(problem, config.init, config.seed)?;
    pareto_fair_pca(problem, config, &u0)
}

fn objective_names(problem: &FairPcaProblem) -> Vec<String> {
    let mut names = vec!["loss".to_string()];
    match problem.mode() {
        Mode::Pairwise => names.extend(problem.pairs().iter().map(|(i, j)| format!("fair_{i}_{j}"))),
        Mode::Single => names.extend((0..problem.group_count()).map(|i| format!("fair_{i}"))),
    }
    if names.len() != problem.objective_count() {
        names = (0..problem.objective_count()).map(|i| format!("f{i}")).collect();
    }
    names
}

fn list(values: &[f64]) -> String {
    values.iter().map(|v| output::num(*v)).collect::<Vec<_>>().join(",")
}

fn run_summary(out: &mut String, config: &RunConfig, gd: &GroupedDataset, problem: &FairPcaProblem) -> Result<()> {
    let _ = writeln!(out, "command={}", serde_json::to_value(config.command).map_err(json_err)?.as_str().unwrap_or(""));
    let _ = writeln!(out, "rows={}", gd.nrows());
    let _ = writeln!(out, "features={}", problem.ambient_dim());
    let _ = writeln!(out, "groups={}", gd.group_names.join(","));
    let sizes: Vec<String> = problem.group_sizes().iter().map(usize::to_string).collect();
    let _ = writeln!(out, "group_sizes={}", sizes.join(","));
    let _ = writeln!(out, "mode={}", problem.mode());
    let _ = writeln!(out, "penalty={}", problem.penalty());
    let _ = writeln!(out, "alpha={}", output::num(problem.alpha()));
    let gap = min_max_eigen_gap(problem.group_grams())?;
    let _ = writeln!(out, "min_max_eigen_gap={}", gap.map_or_else(String::new, output::num));
    let _ = writeln!(out, "line_search={}", config.solver.line_search);
    let _ = writeln!(out, "max_iters={}", config.solver.max_iters);
    let _ = writeln!(out, "seed={}", config.solver.seed);
    Ok(())
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn trace_tables(problem: &FairPcaProblem, result: &SolveResult) -> (Table, Table) {
    let names = objective_names(problem);
    let m = names.len();
    let mut header = vec!["iteration".to_string(), "d_norm".into(), "eta".into(), "halvings".into()];
    header.extend(names.iter().cloned());
    header.extend((0..m).map(|i| format!("weight_{i}")));
    let mut trace = Table::new(header);
    let mut timing = Table::new(["iteration", "elapsed_ms"]);
    for (rec, ms) in result.trace.records.iter().zip(&result.trace.elapsed_ms) {
        let mut row = vec![
            rec.iteration.to_string(),
            output::num(rec.d_norm),
            output::num(rec.eta),
            rec.halvings.to_string(),
        ];
        row.extend(rec.objectives.iter().map(|v| output::num(*v)));
        row.extend(rec.weights.as_slice().iter().map(|v| output::num(*v)));
        trace.push(row);
        timing.push(vec![rec.iteration.to_string(), format!("{ms:.3}")]);
    }
    (trace, timing)
}

pub fn cmd_fit(config: &RunConfig) -> Result<()> {
    let gd = load(config)?;
    let problem = Stats::of(&gd).problem(config.r_min, config.problem)?;
    let result = solve(&problem, &config.solver)?;
    let plain = problem.plain_pca()?;
    let report = fairness_report(&problem, &result.subspace, &plain)?;
    let hash = config.hash();

    let mut text = format!("# config-hash: {hash}\n");
    run_summary(&mut text, config, &gd, &problem)?;
    solve_summary(&mut text, &result);
    text.push_str(&report.to_key_value());

    let (trace, timing) = trace_tables(&problem, &result);
    write_atomic(
        &config.out,
        &[
            ("subspace.txt".into(), subspace_text(&result.subspace).into_bytes()),
            ("trace.csv".into(), trace.render(&hash)?),
            ("timing.csv".into(), timing.render(&hash)?),
            ("report.txt".into(), text.into_bytes()),
        ],
    )
}

fn solve_summary(out: &mut String, result: &SolveResult) {
    let _ = writeln!(out, "iterations={}", result.iterations());
    let _ = writeln!(out, "stop_reason={}", result.stop_reason);
    let _ = writeln!(out, "stationary={}", result.stationary);
    let last_d = result.trace.records.last().map_or(f64::NAN, |r| r.d_norm);
    let _ = writeln!(out, "final_d_norm={}", output::num(last_d));
    let _ = writeln!(out, "objectives={}", list(result.objectives.values()));
    let _ = writeln!(out, "mean_weights={}", list(result.mean_weights.as_slice()));
}

const SWEEP_METHODS: [&str; 3] = ["fair-pairwise", "fair-single", "plain"];

struct SweepPoint {
    method: &'static str,
    r: usize,
    outcome: Result<(FairnessReport, usize, String)>,
    wall_ms: f64,
}

fn sweep_point(stats: &Stats, options: ProblemOptions, solver: &SolverConfig, method: &'static str, r: usize) -> SweepPoint {
    let start = Instant::now();
    let outcome = (|| {
        let options = match method {
            "fair-single" => ProblemOptions {
                mode: Mode::Single,
                ..options
            },
            _ => ProblemOptions {
                mode: Mode::Pairwise,
                ..options
            },
        };
        let problem = stats.problem(r, options)?;
        let plain = problem.plain_pca()?;
        if method == "plain" {
            return Ok((fairness_report(&problem, &plain, &plain)?, 0, String::new()));
        }
        let result = solve(&problem, solver)?;
        let report = fairness_report(&problem, &result.subspace, &plain)?;
        Ok((report, result.iterations(), result.stop_reason.to_string()))
    })();
    if let Err(e) = &outcome {
        log::warn!("sweep point {method} r={r} failed: {e}");
    }
    SweepPoint {
        method,
        r,
        outcome,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

pub fn cmd_sweep(config: &RunConfig) -> Result<()> {
    let gd = load(config)?;
    let stats = Stats::of(&gd);
    let jobs: Vec<(&'static str, usize)> = SWEEP_METHODS
        .iter()
        .flat_map(|&m| (config.r_min..=config.r_max).map(move |r| (m, r)))
        .collect();
    let points: Vec<SweepPoint> = jobs
        .par_iter()
        .map(|&(method, r)| sweep_point(&stats, config.problem, &config.solver, method, r))
        .collect();

    let groups = &gd.group_names;
    let mut header: Vec<String> = [
        "method",
        "r",
        "status",
        "total_loss",
        "avg_disparity",
        "avg_pairwise_gap",
        "iterations",
        "stop_reason",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(groups.iter().map(|g| format!("loss_{g}")));
    header.extend(groups.iter().map(|g| format!("disparity_{g}")));
    let width = header.len();
    let mut table = Table::new(header);
    let mut timing = Table::new(["method", "r", "wall_ms"]);
    for p in &points {
        let mut row = vec![p.method.to_string(), p.r.to_string()];
        match &p.outcome {
            Ok((rep, iters, stop)) => {
                row.push("ok".into());
                row.extend([rep.total_loss, rep.avg_disparity, rep.avg_pairwise_gap].map(output::num));
                row.push(iters.to_string());
                row.push(stop.clone());
                row.extend(rep.per_group_losses.iter().map(|v| output::num(*v)));
                row.extend(rep.per_group_disparity.iter().map(|v| output::num(*v)));
            }
            Err(e) => {
                row.push(format!("error: {e}"));
                row.resize(width, String::new());
            }
        }
        table.push(row);
        timing.push(vec![p.method.to_string(), p.r.to_string(), format!("{:.3}", p.wall_ms)]);
    }

    let chart = |title: &str, y: &str, metric: fn(&FairnessReport) -> f64| {
        let series: Vec<Series> = SWEEP_METHODS
            .iter()
            .map(|&m| Series {
                name: m.to_string(),
                points: points
                    .iter()
                    .filter(|p| p.method == m)
                    .filter_map(|p| p.outcome.as_ref().ok().map(|o| (p.r as f64, metric(&o.0))))
                    .collect(),
            })
            .collect();
        line_chart(title, "target dimension r", y, &series).into_bytes()
    };
    let hash = config.hash();
    write_atomic(
        &config.out,
        &[
            ("sweep.csv".into(), table.render(&hash)?),
            ("timing.csv".into(), timing.render(&hash)?),
            (
                "total_loss.svg".into(),
                chart("Total reconstruction loss", "loss", |r| r.total_loss),
            ),
            (
                "avg_disparity.svg".into(),
                chart("Average disparity error", "avg disparity", |r| r.avg_disparity),
            ),
            (
                "pairwise_gap.svg".into(),
                chart("Average pairwise disparity gap", "gap", |r| r.avg_pairwise_gap),
            ),
        ],
    )
}

fn project(gd: &GroupedDataset, u: &Subspace) -> Matrix {
    gd.matrix.as_matrix() * u.basis()
}

pub fn cmd_compose(config: &RunConfig) -> Result<()> {
    let gd = load(config)?;
    let (train, test) = train_test_split(&gd, config.test_fraction, config.solver.seed)?;
    let problem = Stats::of(&train).problem(config.r_min, config.problem)?;
    let k = gd.group_count();
    let y_train = train.labels.as_deref().expect("compose data has labels");
    let y_test = test.labels.as_deref().expect("compose data has labels");

    let mut table = Table::new(["method", "group", "size", "accuracy", "tpr", "deo", "tpr_spread"]);
    let mut timing = Table::new(["method", "wall_ms"]);
    let mut extra = String::new();
    for method in ["plain", "fair"] {
        let start = Instant::now();
        let u = if method == "plain" {
            problem.plain_pca()?
        } else {
            let result = solve(&problem, &config.solver)?;
            solve_summary(&mut extra, &result);
            result.subspace
        };
        let model = train_linear_classifier(&project(&train, &u), y_train, &config.classifier)?;
        let pred = model.predict_all(&project(&test, &u))?;
        let metrics = group_metrics_from_predictions(&pred, y_test, &test.group_ids, k)?;
        timing.push(vec![method.into(), format!("{:.3}", start.elapsed().as_secs_f64() * 1e3)]);

        let opt = |v: Option<f64>| v.map_or_else(String::new, output::num);
        for g in &metrics.groups {
            table.push(vec![
                method.into(),
                gd.group_names[g.group].clone(),
                g.size.to_string(),
                output::num(g.accuracy),
                opt(g.tpr),
                String::new(),
                String::new(),
            ]);
        }
        let positives: usize = metrics.groups.iter().map(|g| g.positives).sum();
        let hits = pred.iter().zip(y_test).filter(|(&p, &t)| t == 1 && p == 1).count();
        let deo = (k == 2)
            .then(|| metrics.groups[0].tpr.zip(metrics.groups[1].tpr).map(|(a, b)| (a - b).abs()))
            .flatten();
        table.push(vec![
            method.into(),
            "all".into(),
            pred.len().to_string(),
            output::num(metrics.overall_accuracy),
            opt((positives > 0).then(|| hits as f64 / positives as f64)),
            opt(deo),
            opt(metrics.tpr_spread()),
        ]);
    }

    let hash = config.hash();
    let mut text = format!("# config-hash: {hash}\n");
    run_summary(&mut text, config, &train, &problem)?;
    let _ = writeln!(text, "train_rows={}", train.nrows());
    let _ = writeln!(text, "test_rows={}", test.nrows());
    text.push_str(&extra);
    write_atomic(
        &config.out,
        &[
            ("compose.csv".into(), table.render(&hash)?),
            ("timing.csv".into(), timing.render(&hash)?),
            ("report.txt".into(), text.into_bytes()),
        ],
    )
}

pub fn cmd_frontier(config: &RunConfig) -> Result<()> {
    let gd = load(config)?;
    let problem = Stats::of(&gd).problem(config.r_min, config.problem)?;
    let results = pareto_frontier(&problem, &config.solver)?;
    let plain = problem.plain_pca()?;

    let names = objective_names(&problem);
    let mut header: Vec<String> = ["seed", "iterations", "stop_reason", "stationary"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(names.iter().cloned());
    header.extend(["total_loss", "avg_disparity", "avg_pairwise_gap"].map(String::from));
    let mut table = Table::new(header);
    let mut timing = Table::new(["seed", "wall_ms"]);
    let mut files = Vec::new();
    for res in &results {
        let report = fairness_report(&problem, &res.subspace, &plain)?;
        let mut row = vec![
            res.seed.to_string(),
            res.iterations().to_string(),
            res.stop_reason.to_string(),
            res.stationary.to_string(),
        ];
        row.extend(res.objectives.values().iter().map(|v| output::num(*v)));
        row.extend([report.total_loss, report.avg_disparity, report.avg_pairwise_gap].map(output::num));
        table.push(row);
        let ms = res.trace.elapsed_ms.last().copied().unwrap_or(0.0);
        timing.push(vec![res.seed.to_string(), format!("{ms:.3}")]);
        files.push((format!("subspace_{}.txt", res.seed), subspace_text(&res.subspace).into_bytes()));
    }

    let hash = config.hash();
    let mut text = format!("# config-hash: {hash}\n");
    run_summary(&mut text, config, &gd, &problem)?;
    let _ = writeln!(text, "restarts={}", config.solver.restarts);
    let _ = writeln!(text, "non_dominated={}", results.len());
    text.push_str(&fairness_report(&problem, &plain, &plain)?.to_key_value().lines().filter(|l| l.starts_with("baseline_")).fold(String::new(), |acc, l| acc + l + "\n"));
    files.push(("frontier.csv".into(), table.render(&hash)?));
    files.push(("timing.csv".into(), timing.render(&hash)?));
    files.push(("report.txt".into(), text.into_bytes()));
    write_atomic(&config.out, &files)
}

/// Reads a subspace written by `fit` or `frontier`.
pub fn read_subspace(path: &Path) -> Result<Subspace> {
    parse_subspace(&std::fs::read_to_string(path)?)
}
