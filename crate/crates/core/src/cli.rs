//! Command-line front end: data generation and ingestion, solver dispatch,
//! and CSV plus JSON result files.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::data::{load_labeled_csv, load_regression_csv, toy_dataset, LoadReport, ToySpec};
use crate::error::{Error, Result};
use crate::linreg::{
    direct_path_from, exact_path_search_with, feature_order_path, greedy_path, local_improvement,
    mse_cost, CostScale, ExactOptions, FeatureOrder, PathSolveResult, RegressionInstance,
    DEFAULT_NODE_BUDGET,
};
use crate::pareto::{
    cost_floor, enumerate_front_with, log_grid, sweep, FrontOptions, ParetoPoint, PathProblem,
    RegressionProblem, RegressionSolver, SweepConfig, TreeProblem,
};
use crate::path::{path_loss, PathWeights};
use crate::tree::{
    best_nested_path_with, optimal_tree_cost, LabeledDataset2C, DEFAULT_TREE_BUDGET,
};

/// Process exit status for each failure class.
pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const DATA: i32 = 3;
    pub const BUDGET: i32 = 4;
    pub const NUMERICAL: i32 = 5;
}

pub fn exit_code(err: &Error) -> i32 {
    match err.root() {
        Error::InvalidConfig(_)
        | Error::InvalidWeights(_)
        | Error::InvalidOrder(_)
        | Error::InapplicableBound(_)
        | Error::IndexOutOfRange { .. }
        | Error::DimensionMismatch { .. }
        | Error::Json(_) => exit::CONFIG,
        Error::InvalidData(_)
        | Error::InvalidCost { .. }
        | Error::ConstantColumn(_)
        | Error::MissingColumn(_)
        | Error::MissingFile(_)
        | Error::TooFewRows { .. }
        | Error::Csv(_) => exit::DATA,
        Error::BudgetExceeded { .. } => exit::BUDGET,
        Error::NumericalFailure(_) => exit::NUMERICAL,
        Error::Io(_) | Error::AtLambda { .. } => exit::OTHER,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ipaths",
    version,
    about = "Interpretable paths and the price of interpretability"
)]
pub struct Cli {
    /// Read the whole run configuration from a JSON file instead of flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<RunConfig>,
}

/// One run of the tool. Serializes to the JSON accepted by `--config`,
/// tagged by `task`.
#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "lowercase")]
pub enum RunConfig {
    /// Write the synthetic two-feature regression data set as CSV.
    Datagen(DatagenArgs),
    /// Most interpretable coordinate path of a fixed length.
    Path(PathArgs),
    /// Cost versus interpretability-loss tradeoff.
    Pareto(ParetoArgs),
    /// Greedy, direct, feature-order and interpretable paths side by side.
    Baselines(BaselinesArgs),
    /// Most interpretable nested tree path.
    Treepath(TreeArgs),
}

fn clap_default<T: Args + clap::FromArgMatches>() -> T {
    let cmd = T::augment_args(clap::Command::new("defaults"));
    T::from_arg_matches(&cmd.get_matches_from(["defaults"])).expect("every flag has a default")
}

macro_rules! clap_defaults {
    ($($t:ty),*) => {
        $(impl Default for $t {
            fn default() -> Self {
                clap_default()
            }
        })*
    };
}

clap_defaults!(
    ToyArgs,
    DataArgs,
    WeightArgs,
    SolverArgs,
    DatagenArgs,
    PathArgs,
    ParetoArgs,
    BaselinesArgs,
    TreeArgs
);

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct ToyArgs {
    /// Correlation between the synthetic features.
    #[arg(long, default_value_t = 0.9)]
    pub rho: f64,
    /// True coefficients of the synthetic data.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "2.12,-0.94",
        allow_hyphen_values = true
    )]
    pub beta: Vec<f64>,
    #[arg(long, default_value_t = 0.25)]
    pub noise_variance: f64,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Seed of the synthetic design.
    #[arg(long, default_value_t = 0)]
    pub data_seed: u64,
}

impl ToyArgs {
    fn toy_spec(&self) -> ToySpec {
        ToySpec {
            rho: self.rho,
            beta_star: self.beta.clone(),
            noise_variance: self.noise_variance,
            n: self.n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleArg {
    Mse,
    HalfMse,
}

impl From<ScaleArg> for CostScale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Mse => CostScale::Mse,
            ScaleArg::HalfMse => CostScale::HalfMse,
        }
    }
}

/// Where regression data come from: a CSV file or the synthetic generator.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct DataArgs {
    /// CSV file with a header row; without it the synthetic data are used.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Target column (label column for trees).
    #[arg(long)]
    pub target: Option<String>,
    /// Feature columns; defaults to every other column.
    #[arg(long, value_delimiter = ',')]
    pub features: Option<Vec<String>>,
    /// Center and scale features and target to unit variance.
    #[arg(long)]
    pub standardize: bool,
    #[arg(long, value_enum, default_value = "mse")]
    pub cost_scale: ScaleArg,
    #[command(flatten)]
    pub toy: ToyArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct WeightArgs {
    /// Geometric step weights gamma^k (default 1).
    #[arg(long, conflicts_with = "alpha")]
    pub gamma: Option<f64>,
    /// Explicit step weights, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
}

impl WeightArgs {
    pub fn weights(&self) -> Result<PathWeights> {
        let w = match (&self.gamma, &self.alpha) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidConfig(
                    "give either gamma or alpha, not both".into(),
                ))
            }
            (_, Some(a)) => PathWeights::Explicit(a.clone()),
            (Some(g), None) => PathWeights::Geometric(*g),
            (None, None) => PathWeights::Geometric(1.0),
        };
        w.validate()?;
        Ok(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Exact,
    Local,
    Auto,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value = "auto")]
    pub solver: SolverKind,
    /// Positions reassigned per local-improvement iteration.
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    /// Local-improvement iterations.
    #[arg(long = "T", default_value_t = 100)]
    pub t: usize,
    /// Seed of the local-improvement sampler.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cap on exact-search node evaluations.
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    pub budget: u64,
}

impl SolverArgs {
    fn validate(&self) -> Result<()> {
        if self.q == 0 || self.t == 0 {
            return Err(Error::InvalidConfig("q and T must be at least 1".into()));
        }
        Ok(())
    }

    fn regression_solver(&self) -> RegressionSolver {
        match self.solver {
            SolverKind::Exact => RegressionSolver::Exact,
            SolverKind::Local => RegressionSolver::Local {
                q: self.q,
                iterations: self.t,
                seed: self.seed,
            },
            SolverKind::Auto => RegressionSolver::Auto {
                iterations: self.t,
                seed: self.seed,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct DatagenArgs {
    #[command(flatten)]
    pub toy: ToyArgs,
    /// Destination CSV; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct PathArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Path length.
    #[arg(long = "K", default_value_t = 2)]
    pub k: usize,
    /// Start model as JSON `{"feature": value, ...}`, inline or a file path.
    #[arg(long, conflicts_with = "start_ols")]
    pub start_model: Option<String>,
    /// Start from the least-squares model on these features.
    #[arg(long, value_delimiter = ',')]
    pub start_ols: Option<Vec<String>>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct ParetoArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Log-spaced grid `min,max,count`.
    #[arg(long, value_delimiter = ',', default_value = "0.001,1000,61")]
    pub lambda_grid: Vec<f64>,
    /// Explicit lambda values; overrides the grid.
    #[arg(long, value_delimiter = ',')]
    pub lambda: Option<Vec<f64>>,
    /// Longest path considered (the enumeration limit with --enumerate).
    #[arg(long = "K")]
    pub k: Option<usize>,
    /// Enumerate every step sequence instead of sweeping lambda.
    #[arg(long)]
    pub enumerate: bool,
    /// Treat the input as a two-class data set and grow trees.
    #[arg(long)]
    pub classifier: bool,
    /// Depth bound for --classifier.
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
    /// Start model as JSON `{"feature": value, ...}`, inline or a file path.
    #[arg(long)]
    pub start_model: Option<String>,
    /// Start from the least-squares model on these features.
    #[arg(long, value_delimiter = ',', conflicts_with = "start_model")]
    pub start_ols: Option<Vec<String>>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselinesArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long = "K", default_value_t = 2)]
    pub k: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeArgs {
    /// Two-class CSV file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Label column.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub features: Option<Vec<String>>,
    /// Rescale every feature to [0, 1].
    #[arg(long)]
    pub normalize: bool,
    /// Use a seeded random subset of this many rows.
    #[arg(long)]
    pub subsample: Option<usize>,
    /// Seed of the subsample.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
    #[arg(long = "K", default_value_t = 3)]
    pub k: usize,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[arg(long, default_value_t = DEFAULT_TREE_BUDGET)]
    pub budget: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// What a run produced, besides the files it wrote.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub csv: String,
    pub sidecar: Value,
}

/// Parses arguments, runs, writes outputs and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                exit::CONFIG
            } else {
                exit::OK
            };
        }
    };
    let cfg = match resolve(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    match execute(&cfg) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn resolve(cli: Cli) -> Result<RunConfig> {
    match (cli.config, cli.command) {
        (Some(_), Some(_)) => Err(Error::InvalidConfig(
            "give either --config or a subcommand, not both".into(),
        )),
        (Some(path), None) => {
            let text = fs::read_to_string(&path).map_err(|_| Error::MissingFile(path.clone()))?;
            Ok(serde_json::from_str(&text)?)
        }
        (None, Some(cmd)) => Ok(cmd),
        (None, None) => Err(Error::InvalidConfig(
            "no subcommand given (try --help)".into(),
        )),
    }
}

/// Runs `cfg` and writes the CSV (and its JSON sidecar) to the configured
/// output, or the CSV to standard output.
pub fn execute(cfg: &RunConfig) -> Result<()> {
    let outcome = run(cfg)?;
    match output_of(cfg) {
        Some(path) => {
            fs::write(path, &outcome.csv)?;
            let mut side = serde_json::to_string_pretty(&outcome.sidecar)?;
            side.push('\n');
            fs::write(sidecar_path(path), side)?;
        }
        None => io::stdout().write_all(outcome.csv.as_bytes())?,
    }
    Ok(())
}

pub fn sidecar_path(output: &Path) -> PathBuf {
    output.with_extension("json")
}

fn output_of(cfg: &RunConfig) -> Option<&Path> {
    match cfg {
        RunConfig::Datagen(a) => a.output.as_deref(),
        RunConfig::Path(a) => a.output.as_deref(),
        RunConfig::Pareto(a) => a.output.as_deref(),
        RunConfig::Baselines(a) => a.output.as_deref(),
        RunConfig::Treepath(a) => a.output.as_deref(),
    }
}

/// Runs `cfg` without touching the file system (apart from reading input).
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    let (csv, mut sidecar) = match cfg {
        RunConfig::Datagen(a) => run_datagen(a)?,
        RunConfig::Path(a) => run_path(a)?,
        RunConfig::Pareto(a) => run_pareto(a)?,
        RunConfig::Baselines(a) => run_baselines(a)?,
        RunConfig::Treepath(a) => run_treepath(a)?,
    };
    sidecar["config"] = serde_json::to_value(cfg)?;
    Ok(RunOutcome { csv, sidecar })
}

/// Full-precision float formatting (shortest string that parses back).
fn num(x: f64) -> String {
    format!("{x}")
}

fn write_csv(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn run_datagen(a: &DatagenArgs) -> Result<(String, Value)> {
    let toy = a.toy.toy_spec();
    let inst = toy_dataset(&toy, a.toy.data_seed)?;
    let mut header: Vec<&str> = inst.feature_names().iter().map(String::as_str).collect();
    header.push(inst.target_name());
    let d = inst.d();
    let rows = (0..inst.n())
        .map(|r| {
            let mut row: Vec<String> = inst.x()[r * d..(r + 1) * d]
                .iter()
                .map(|&v| num(v))
                .collect();
            row.push(num(inst.y()[r]));
            row
        })
        .collect();
    let csv = write_csv(&header, rows)?;
    let sidecar = json!({
        "seed": a.toy.data_seed,
        "cost_at_zero": mse_cost(&inst, &vec![0.0; d])?,
        "cost_at_beta_star": mse_cost(&inst, &toy.beta_star)?,
    });
    Ok((csv, sidecar))
}

fn load_instance(a: &DataArgs) -> Result<(RegressionInstance, Option<LoadReport>)> {
    let (inst, report) = match &a.input {
        Some(path) => {
            let target = a
                .target
                .as_deref()
                .ok_or_else(|| Error::InvalidConfig("--target is required with --input".into()))?;
            let (inst, rep) =
                load_regression_csv(path, target, a.features.as_deref(), a.standardize)?;
            (inst, Some(rep))
        }
        None => (toy_dataset(&a.toy.toy_spec(), a.toy.data_seed)?, None),
    };
    Ok((inst.with_cost_scale(a.cost_scale.into()), report))
}

/// Start model from `--start-model` JSON or `--start-ols` features.
fn start_model(
    inst: &RegressionInstance,
    json_arg: Option<&str>,
    ols: Option<&[String]>,
) -> Result<Vec<f64>> {
    let mut beta = vec![0.0; inst.d()];
    if let Some(text) = json_arg {
        let text = text.trim();
        let body = if text.starts_with('{') {
            text.to_string()
        } else {
            fs::read_to_string(text).map_err(|_| Error::MissingFile(PathBuf::from(text)))?
        };
        let map: BTreeMap<String, f64> = serde_json::from_str(&body)?;
        for (name, value) in map {
            let j = inst.feature_index(&name).ok_or_else(|| {
                Error::InvalidConfig(format!("start model names unknown feature `{name}`"))
            })?;
            beta[j] = value;
        }
    }
    if let Some(names) = ols {
        let support = names
            .iter()
            .map(|n| {
                inst.feature_index(n)
                    .ok_or_else(|| Error::InvalidConfig(format!("unknown feature `{n}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        beta = inst.restricted_ols(&support)?;
    }
    Ok(beta)
}

fn solve_path(
    inst: &RegressionInstance,
    beta0: &[f64],
    k: usize,
    weights: &PathWeights,
    s: &SolverArgs,
) -> Result<PathSolveResult> {
    s.validate()?;
    let alpha = weights.first(k);
    let opts = ExactOptions {
        node_budget: s.budget,
    };
    let local = |q: usize| {
        let start = greedy_path(inst, beta0, k)?.path.indices;
        local_improvement(inst, beta0, &start, weights, q, s.t, s.seed)
    };
    match s.solver {
        SolverKind::Exact => exact_path_search_with(inst, beta0, &alpha, &opts),
        SolverKind::Local => local(s.q),
        SolverKind::Auto => match exact_path_search_with(inst, beta0, &alpha, &opts) {
            Err(Error::BudgetExceeded { .. }) => {
                log::warn!("exact search over budget; using local improvement");
                local(s.q)
            }
            other => other,
        },
    }
}

fn model_json(inst: &RegressionInstance, beta: &[f64]) -> Value {
    let map: serde_json::Map<String, Value> = inst
        .feature_names()
        .iter()
        .zip(beta)
        .filter(|(_, &b)| b != 0.0)
        .map(|(n, &b)| (n.clone(), json!(b)))
        .collect();
    Value::Object(map)
}

fn stats_json(r: &PathSolveResult) -> Value {
    // wall time stays out of the files so reruns are byte-identical
    json!({
        "candidates_evaluated": r.stats.candidates_evaluated,
        "iterations": r.stats.iterations,
    })
}

fn run_path(a: &PathArgs) -> Result<(String, Value)> {
    let (inst, report) = load_instance(&a.data)?;
    let weights = a.weights.weights()?;
    let beta0 = start_model(&inst, a.start_model.as_deref(), a.start_ols.as_deref())?;
    let r = solve_path(&inst, &beta0, a.k, &weights, &a.solver)?;
    log::info!("path solved in {:?}", r.stats.wall_time);

    let mut rows = vec![vec![
        "0".to_string(),
        String::new(),
        String::new(),
        num(mse_cost(&inst, &beta0)?),
    ]];
    for (step, (beta, &i)) in r.path.models().iter().zip(&r.path.indices).enumerate() {
        rows.push(vec![
            (step + 1).to_string(),
            inst.feature_names()[i].clone(),
            num(beta[i]),
            num(r.cost_sequence.step(step + 1)),
        ]);
    }
    let csv = write_csv(&["step", "changed_feature", "new_value", "cost"], rows)?;
    let loss = path_loss(&r.cost_sequence, &weights)?;
    let sidecar = json!({
        "seed": a.solver.seed,
        "load": report,
        "start_model": model_json(&inst, &beta0),
        "final_model": model_json(&inst, &r.path.final_model()),
        "objective": r.objective,
        "interpretability_loss": loss.loss,
        "cost_sequence": r.cost_sequence,
        "stats": stats_json(&r),
        "objective_trace": r.objective_trace,
    });
    Ok((csv, sidecar))
}

fn lambda_values(a: &ParetoArgs) -> Result<Vec<f64>> {
    if let Some(l) = &a.lambda {
        return Ok(l.clone());
    }
    match a.lambda_grid[..] {
        [lo, hi, count] if lo > 0.0 && hi >= lo && count >= 0.0 && count.fract() == 0.0 => {
            Ok(log_grid(lo, hi, count as usize))
        }
        _ => Err(Error::InvalidConfig(
            "--lambda-grid takes min,max,count with 0 < min <= max".into(),
        )),
    }
}

fn pareto_rows<P>(points: &[ParetoPoint<P>]) -> Vec<Vec<String>> {
    points
        .iter()
        .map(|p| {
            vec![
                p.lambda.map(num).unwrap_or_default(),
                p.k.to_string(),
                num(p.cost),
                num(p.interpretability_loss),
            ]
        })
        .collect()
}

fn front<P: PathProblem>(
    problem: &P,
    a: &ParetoArgs,
    weights: &PathWeights,
) -> Result<(Vec<ParetoPoint<P::Path>>, Value)> {
    let lambdas = lambda_values(a)?;
    let points = if a.enumerate {
        let mut opts = FrontOptions::default();
        opts.mu_grid.extend(&lambdas);
        opts.mu_grid.sort_by(f64::total_cmp);
        opts.mu_grid.dedup();
        opts.budget = a.solver.budget;
        enumerate_front_with(problem, a.k.unwrap_or(2), weights, &opts)?
    } else {
        let cfg = SweepConfig {
            lambda_grid: lambdas,
            weights: weights.clone(),
            k_cap: a.k,
        };
        sweep(problem, &cfg)?
    };
    let info = json!({
        "points": points.len(),
        "c_max": problem.empty_cost(),
        "c_min": cost_floor(problem)?,
        "enumerated": a.enumerate,
    });
    Ok((points, info))
}

fn run_pareto(a: &ParetoArgs) -> Result<(String, Value)> {
    a.solver.validate()?;
    let weights = a.weights.weights()?;
    let header = ["lambda", "K", "cost", "interpretability_loss"];
    if a.classifier {
        let data = load_classifier(&a.data, false, None, 0)?;
        let mut problem = TreeProblem::new(&data, a.depth);
        problem.budget = a.solver.budget;
        let (points, info) = front(&problem, a, &weights)?;
        let csv = write_csv(&header, pareto_rows(&points))?;
        return Ok((csv, json!({ "seed": a.solver.seed, "front": info })));
    }
    let (inst, report) = load_instance(&a.data)?;
    let beta0 = start_model(&inst, a.start_model.as_deref(), a.start_ols.as_deref())?;
    let problem = RegressionProblem::new(&inst, beta0)?
        .with_solver(a.solver.regression_solver())
        .with_budget(a.solver.budget);
    let (points, info) = front(&problem, a, &weights)?;
    let paths: Vec<Value> = points
        .iter()
        .map(|p| {
            let names: Vec<&str> = p.path.indices.iter().map(|&i| inst.feature_names()[i].as_str()).collect();
            json!({ "K": p.k, "steps": names, "final_model": model_json(&inst, &p.path.final_model()) })
        })
        .collect();
    let csv = write_csv(&header, pareto_rows(&points))?;
    Ok((
        csv,
        json!({ "seed": a.solver.seed, "load": report, "front": info, "paths": paths }),
    ))
}

fn run_baselines(a: &BaselinesArgs) -> Result<(String, Value)> {
    let (inst, report) = load_instance(&a.data)?;
    let weights = a.weights.weights()?;
    let beta0 = vec![0.0; inst.d()];
    let mut rows = Vec::new();
    let mut objectives = serde_json::Map::new();
    let c0 = mse_cost(&inst, &beta0)?;
    let mut push = |method: &str, costs: &[f64]| {
        rows.push(vec![method.to_string(), "0".into(), num(c0)]);
        for (k, &c) in costs.iter().enumerate() {
            rows.push(vec![method.to_string(), (k + 1).to_string(), num(c)]);
        }
        let loss: f64 = weights
            .first(costs.len())
            .iter()
            .zip(costs)
            .map(|(w, c)| w * c)
            .sum();
        objectives.insert(method.to_string(), json!(loss));
    };

    let greedy = greedy_path(&inst, &beta0, a.k)?;
    push("greedy", greedy.cost_sequence.as_slice());
    let kd = a.k.min(inst.d());
    let direct = direct_path_from(&inst, &beta0, kd)?;
    push("direct", direct.cost_sequence.as_slice());
    let order = feature_order_path(&inst, kd, &weights, FeatureOrder::Best)?;
    push("feature_order", order.cost_sequence.as_slice());
    let best = solve_path(&inst, &beta0, a.k, &weights, &a.solver)?;
    push("interpretable", best.cost_sequence.as_slice());

    let csv = write_csv(&["method", "step", "cost"], rows)?;
    let sidecar = json!({
        "seed": a.solver.seed,
        "load": report,
        "interpretability_loss": objectives,
        "stats": stats_json(&best),
    });
    Ok((csv, sidecar))
}

fn load_classifier(
    a: &DataArgs,
    normalize: bool,
    subsample: Option<usize>,
    seed: u64,
) -> Result<LabeledDataset2C> {
    let input = a
        .input
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig("trees need --input".into()))?;
    let label = a
        .target
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig("--target (label column) is required".into()))?;
    let (data, _) = load_labeled_csv(input, label, a.features.as_deref(), normalize)?;
    match subsample {
        Some(m) => data.subsample(m, seed),
        None => Ok(data),
    }
}

fn run_treepath(a: &TreeArgs) -> Result<(String, Value)> {
    let weights = a.weights.weights()?;
    let data_args = DataArgs {
        input: a.input.clone(),
        target: a.target.clone(),
        features: a.features.clone(),
        ..Default::default()
    };
    let data = load_classifier(&data_args, a.normalize, a.subsample, a.seed)?;
    let r = best_nested_path_with(&data, a.depth, &weights.first(a.k), a.budget)?;

    let root_cost = {
        let ones = data.labels().iter().filter(|&&l| l == 1).count();
        ones.min(data.n() - ones)
    };
    let mut rows = vec![vec![
        "0".to_string(),
        String::new(),
        String::new(),
        String::new(),
        root_cost.to_string(),
    ]];
    for (k, (s, c)) in r.path.steps().iter().zip(&r.costs).enumerate() {
        rows.push(vec![
            (k + 1).to_string(),
            s.leaf.to_string(),
            data.feature_names()[s.split.feature].clone(),
            num(s.split.threshold),
            c.to_string(),
        ]);
    }
    let csv = write_csv(&["step", "leaf", "feature", "threshold", "cost"], rows)?;
    let sidecar = json!({
        "seed": a.seed,
        "points": data.n(),
        "classes": data.class_names(),
        "objective": r.objective,
        "costs": r.costs,
        "optimal_tree_cost": optimal_tree_cost(&data, a.depth),
        "nodes_evaluated": r.nodes_evaluated,
    });
    Ok((csv, sidecar))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_flag_defaults() {
        let a = PathArgs::default();
        assert_eq!(a.k, 2);
        assert_eq!(a.data.toy.beta, vec![2.12, -0.94]);
        assert_eq!(a.solver.solver, SolverKind::Auto);
        let json = serde_json::to_string(&RunConfig::Path(a.clone())).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, RunConfig::Path(a));
        let partial: RunConfig = serde_json::from_str(r#"{"task":"path","k":3}"#).unwrap();
        assert!(matches!(partial, RunConfig::Path(p) if p.k == 3));
    }

    #[test]
    fn weights_from_flags() {
        let w = WeightArgs {
            gamma: None,
            alpha: None,
        };
        assert_eq!(w.weights().unwrap(), PathWeights::Geometric(1.0));
        let both = WeightArgs {
            gamma: Some(2.0),
            alpha: Some(vec![1.0]),
        };
        assert!(both.weights().is_err());
    }

    #[test]
    fn exit_codes_by_class() {
        assert_eq!(
            exit_code(&Error::InvalidConfig(String::new())),
            exit::CONFIG
        );
        assert_eq!(exit_code(&Error::ConstantColumn(String::new())), exit::DATA);
        let budget = Error::BudgetExceeded {
            required: 1,
            budget: 0,
            hint: "",
        };
        assert_eq!(exit_code(&budget), exit::BUDGET);
        let wrapped = Error::AtLambda {
            lambda: 1.0,
            source: Box::new(Error::NumericalFailure(String::new())),
        };
        assert_eq!(exit_code(&wrapped), exit::NUMERICAL);
    }

    #[test]
    fn toy_path_table() {
        let out = run(&RunConfig::Path(PathArgs::default())).unwrap();
        let lines: Vec<&str> = out.csv.lines().collect();
        assert_eq!(lines[0], "step,changed_feature,new_value,cost");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,,,"));
    }

    #[test]
    fn unknown_start_feature_is_a_config_error() {
        let a = PathArgs {
            start_model: Some(r#"{"Shoe": 1.0}"#.into()),
            ..Default::default()
        };
        let err = run(&RunConfig::Path(a)).unwrap_err();
        assert_eq!(exit_code(&err), exit::CONFIG);
    }
}
