//! Command-line front end: generate data, train and evaluate surrogates,
//! tune hyperparameters, screen design spaces, and replay recorded runs.
//!
//! Every subcommand that writes files also writes a `manifest.json` into its
//! output directory; `replay` re-runs it and compares output digests.
//!
//! Exit codes: 0 success, 2 user or input error, 3 numeric failure or a
//! replay whose outputs differ.

pub mod manifest;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use surroscreen::dataset::{load_csv, CsvOptions, Dataset, Schema};
use surroscreen::eval::{self, HyperAxis, ModelSpec, SearchOutcome, ToleranceSpec};
use surroscreen::hts::{self, Direction, ScreenConfig, ScreenOptions};
use surroscreen::mlfn::{self, MlfnConfig};
use surroscreen::{grnn, synth, Predictor, Surrogate};

use manifest::{file_digest, now_unix, RunManifest, MANIFEST_FILE, MANIFEST_FORMAT};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] surroscreen::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("malformed config file {}: {message}", path.display())]
    Config { path: PathBuf, message: String },
    #[error("malformed manifest: {0}")]
    Manifest(String),
    #[error("input {0} changed since the manifest was recorded")]
    InputChanged(String),
    #[error("replay outputs differ from the manifest: {}", .0.join(", "))]
    ReplayMismatch(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numeric() => 3,
            CliError::ReplayMismatch(_) => 3,
            _ => 2,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "surroscreen",
    version,
    about = "Neural-network surrogates and exhaustive design screening"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Generate a synthetic dataset with a known ground truth.
    Gen(GenArgs),
    /// Train a surrogate and write a model file.
    Train(TrainArgs),
    /// Score a model on a dataset, optionally with k-fold cross-validation.
    Evaluate(EvaluateArgs),
    /// Cross-validated accuracy versus hidden-layer size.
    Sweep(SweepArgs),
    /// One-axis-at-a-time hyperparameter search.
    Search(SearchArgs),
    /// Rank every design in a grid through a trained model.
    Screen(ScreenArgs),
    /// Predict one feature vector.
    Predict(PredictArgs),
    /// Re-run a recorded manifest and compare output digests.
    Replay(ReplayArgs),
}

impl Command {
    pub fn subcommand_name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Train(_) => "train",
            Command::Evaluate(_) => "evaluate",
            Command::Sweep(_) => "sweep",
            Command::Search(_) => "search",
            Command::Screen(_) => "screen",
            Command::Predict(_) => "predict",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemaArg {
    Collector,
    Iaq,
}

impl From<SchemaArg> for Schema {
    fn from(s: SchemaArg) -> Self {
        match s {
            SchemaArg::Collector => Schema::Collector,
            SchemaArg::Iaq => Schema::Iaq,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Mlfn,
    Grnn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionArg {
    Max,
    Min,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Max => Direction::Maximize,
            DirectionArg::Min => Direction::Minimize,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DataArgs {
    /// CSV file: header line, numeric body.
    #[arg(long)]
    pub data: PathBuf,
    /// Target column name; defaults to the last column.
    #[arg(long)]
    pub target: Option<String>,
    /// Require the header to match a built-in schema.
    #[arg(long, value_enum)]
    pub schema: Option<SchemaArg>,
}

impl DataArgs {
    fn load(&self) -> Result<Dataset> {
        let opts = CsvOptions {
            target: self.target.clone(),
            schema: self.schema.map(Schema::from),
        };
        Ok(load_csv(&self.data, &opts)?)
    }
}

/// MLFN hyperparameters. Defaults: lr 0.9, 7 hidden nodes, 200 epochs,
/// momentum 0.9.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct HyperArgs {
    /// Learning rate.
    #[arg(long, default_value_t = mlfn::DEFAULT_LEARNING_RATE)]
    pub lr: f64,
    /// Hidden-layer nodes.
    #[arg(long, default_value_t = mlfn::DEFAULT_HIDDEN)]
    pub hidden: usize,
    /// Training epochs (full passes over the data).
    #[arg(long, default_value_t = mlfn::DEFAULT_EPOCHS)]
    pub epochs: usize,
    /// Momentum coefficient in [0, 1).
    #[arg(long, default_value_t = mlfn::DEFAULT_MOMENTUM)]
    pub momentum: f64,
    /// Initial weights are drawn uniformly from [-w, w].
    #[arg(long, default_value_t = mlfn::DEFAULT_INIT_HALF_WIDTH)]
    pub init_half_width: f64,
}

impl HyperArgs {
    pub fn config(&self, n_inputs: usize, seed: u64) -> MlfnConfig {
        MlfnConfig {
            n_inputs,
            n_hidden: self.hidden,
            learning_rate: self.lr,
            momentum: self.momentum,
            epochs: self.epochs,
            seed,
            init_half_width: self.init_half_width,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ToleranceArgs {
    /// Relative tolerance band for accuracy (0.30 = +/-30%).
    #[arg(long, default_value_t = eval::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Absolute band used where the target is exactly zero.
    #[arg(long, default_value_t = 0.0)]
    pub zero_eps: f64,
}

impl ToleranceArgs {
    fn spec(&self) -> Result<ToleranceSpec> {
        let spec = ToleranceSpec {
            fraction: self.tolerance,
            zero_target_epsilon: self.zero_eps,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub schema: SchemaArg,
    #[arg(long)]
    pub rows: usize,
    /// Relative Gaussian noise on the target.
    #[arg(long, default_value_t = 0.02)]
    pub noise: f64,
    /// Seed for all randomness (initialization, shuffling, folds, sampling).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file name inside the output directory; defaults to `<schema>.csv`.
    #[arg(long)]
    pub file_name: Option<String>,
    /// Directory for output files and the run manifest.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = ModelKind::Mlfn)]
    pub model: ModelKind,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Hyperparameters from a file written by `search` (overrides the flags).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// GRNN kernel width in normalized feature units.
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    /// Choose sigma from this comma-separated grid by cross-validation.
    #[arg(long, value_delimiter = ',')]
    pub sigma_grid: Option<Vec<f64>>,
    /// Folds used when choosing sigma from a grid.
    #[arg(long, default_value_t = eval::DEFAULT_FOLDS)]
    pub cv: usize,
    #[command(flatten)]
    pub tolerance: ToleranceArgs,
    /// Seed for all randomness (initialization, shuffling, folds, sampling).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the model; defaults to `<out-dir>/model.json`.
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    /// Directory for output files and the run manifest.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model_file: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub tolerance: ToleranceArgs,
    /// Also cross-validate the model's settings on the data with k folds
    /// (5 when given without a value).
    #[arg(long, num_args = 0..=1, default_missing_value = "5")]
    pub cv: Option<usize>,
    /// Seed for all randomness (initialization, shuffling, folds, sampling).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for output files and the run manifest.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Hidden-node counts: `a..b` (inclusive) or a comma-separated list.
    #[arg(long, default_value = "1..12")]
    pub nodes: String,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[arg(long, default_value_t = eval::DEFAULT_FOLDS)]
    pub cv: usize,
    #[command(flatten)]
    pub tolerance: ToleranceArgs,
    /// Seed for all randomness (initialization, shuffling, folds, sampling).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for output files and the run manifest.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SearchArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Axis order, comma-separated.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "learning_rate,hidden_nodes,epochs,momentum"
    )]
    pub axes: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.3,0.5,0.7,0.9")]
    pub lr_values: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "3,4,5,6,7,8,9,10")]
    pub hidden_values: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "50,100,200")]
    pub epochs_values: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.3,0.6,0.9")]
    pub momentum_values: Vec<f64>,
    /// Starting point of the search.
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[arg(long, default_value_t = eval::DEFAULT_FOLDS)]
    pub cv: usize,
    #[command(flatten)]
    pub tolerance: ToleranceArgs,
    /// Seed for all randomness (initialization, shuffling, folds, sampling).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for output files and the run manifest.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ScreenArgs {
    /// Screening config (TOML) with the variable grids.
    #[arg(long)]
    pub space: PathBuf,
    /// Model file; overrides `model` in the config.
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub direction: Option<DirectionArg>,
    /// Number of designs to report (default 2).
    #[arg(long)]
    pub top: Option<usize>,
    /// Worker threads (default 1).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Directory for output files and the run manifest.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PredictArgs {
    #[arg(long)]
    pub model_file: PathBuf,
    /// Comma-separated raw feature values.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "input",
        required_unless_present = "input"
    )]
    pub features: Option<Vec<f64>>,
    /// File whose first non-empty line holds the comma-separated features.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Also write `prediction.txt` and a manifest here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory for the replayed outputs; defaults to `<manifest dir>/replay`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Files a command read and wrote.
#[derive(Debug, Default)]
struct Outcome {
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    seed: Option<u64>,
}

fn write_file(path: &Path, contents: &str, outcome: &mut Outcome) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))?;
    outcome.outputs.push(path.to_path_buf());
    Ok(())
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Replay(args) => replay(&args),
        cmd => {
            let outcome = execute(&cmd)?;
            if let Some(dir) = out_dir(&cmd) {
                write_manifest(&cmd, &outcome, &dir)?;
            }
            Ok(())
        }
    }
}

fn out_dir(cmd: &Command) -> Option<PathBuf> {
    match cmd {
        Command::Gen(a) => Some(a.out_dir.clone()),
        Command::Train(a) => Some(a.out_dir.clone()),
        Command::Evaluate(a) => Some(a.out_dir.clone()),
        Command::Sweep(a) => Some(a.out_dir.clone()),
        Command::Search(a) => Some(a.out_dir.clone()),
        Command::Screen(a) => Some(a.out_dir.clone()),
        Command::Predict(a) => a.out_dir.clone(),
        Command::Replay(_) => None,
    }
}

fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Gen(a) => cmd_gen(a),
        Command::Train(a) => cmd_train(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Search(a) => cmd_search(a),
        Command::Screen(a) => cmd_screen(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Replay(_) => unreachable!("replay is dispatched by run"),
    }
}

fn output_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn write_manifest(cmd: &Command, outcome: &Outcome, dir: &Path) -> Result<()> {
    let mut inputs = BTreeMap::new();
    for p in &outcome.inputs {
        inputs.insert(p.display().to_string(), file_digest(p)?);
    }
    let mut outputs = BTreeMap::new();
    for p in &outcome.outputs {
        outputs.insert(output_name(p), file_digest(p)?);
    }
    let manifest = RunManifest {
        format: MANIFEST_FORMAT.to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        subcommand: cmd.subcommand_name().to_string(),
        command: cmd.clone(),
        seed: outcome.seed,
        inputs,
        outputs,
        timestamp_unix: now_unix(),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(MANIFEST_FILE);
    std::fs::write(&path, manifest.to_json()).map_err(|e| CliError::io(&path, e))
}

fn replay(args: &ReplayArgs) -> Result<()> {
    let manifest = RunManifest::load(&args.manifest)?;
    for (path, digest) in &manifest.inputs {
        if file_digest(Path::new(path))? != *digest {
            return Err(CliError::InputChanged(path.clone()));
        }
    }
    let dir = args.out_dir.clone().unwrap_or_else(|| {
        args.manifest
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join("replay")
    });
    let cmd = redirect(&manifest.command, &dir);
    let outcome = execute(&cmd)?;
    let produced: BTreeMap<String, String> = outcome
        .outputs
        .iter()
        .map(|p| Ok((output_name(p), file_digest(p)?)))
        .collect::<Result<_>>()?;
    let mut mismatched = Vec::new();
    for (name, digest) in &manifest.outputs {
        let status = match produced.get(name) {
            Some(d) if d == digest => "match",
            Some(_) => "MISMATCH",
            None => "MISSING",
        };
        println!("{status} {name}");
        if status != "match" {
            mismatched.push(name.clone());
        }
    }
    for name in produced
        .keys()
        .filter(|n| !manifest.outputs.contains_key(*n))
    {
        println!("EXTRA {name}");
        mismatched.push(name.clone());
    }
    if mismatched.is_empty() {
        Ok(())
    } else {
        Err(CliError::ReplayMismatch(mismatched))
    }
}

/// The same command with every output redirected into `dir`.
fn redirect(cmd: &Command, dir: &Path) -> Command {
    let mut cmd = cmd.clone();
    match &mut cmd {
        Command::Gen(a) => a.out_dir = dir.to_path_buf(),
        Command::Train(a) => {
            a.out_dir = dir.to_path_buf();
            if let Some(m) = &a.model_file {
                a.model_file = Some(dir.join(output_name(m)));
            }
        }
        Command::Evaluate(a) => a.out_dir = dir.to_path_buf(),
        Command::Sweep(a) => a.out_dir = dir.to_path_buf(),
        Command::Search(a) => a.out_dir = dir.to_path_buf(),
        Command::Screen(a) => a.out_dir = dir.to_path_buf(),
        Command::Predict(a) => a.out_dir = Some(dir.to_path_buf()),
        Command::Replay(_) => {}
    }
    cmd
}

fn cmd_gen(a: &GenArgs) -> Result<Outcome> {
    let schema = Schema::from(a.schema);
    let ds = synth::generate(schema, a.rows, a.noise, a.seed)?;
    let name = a
        .file_name
        .clone()
        .unwrap_or_else(|| format!("{}.csv", schema.tag()));
    let mut outcome = Outcome {
        seed: Some(a.seed),
        ..Default::default()
    };
    write_file(&a.out_dir.join(name), &ds.to_csv_string(), &mut outcome)?;
    Ok(outcome)
}

/// Hyperparameter file written by `search` and accepted by `train --config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperparameterFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub folds: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cv_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub config: MlfnConfig,
}

impl HyperparameterFile {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        let file: HyperparameterFile = toml_from_str(text, path)?;
        file.config.validate()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text, path)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml_to_string(self)
    }
}

fn toml_from_str<T: serde::de::DeserializeOwned>(text: &str, path: &Path) -> Result<T> {
    toml::from_str(text).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        message: e.to_string().trim().to_string(),
    })
}

fn toml_to_string<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| CliError::Usage(format!("cannot serialize config: {e}")))
}

fn describe_config(c: &MlfnConfig) -> String {
    format!(
        "lr={:?} hidden={} epochs={} momentum={:?} seed={} init_half_width={:?}",
        c.learning_rate, c.n_hidden, c.epochs, c.momentum, c.seed, c.init_half_width
    )
}

/// The MLFN configuration `train` would use for `n_inputs` features.
pub fn resolve_train_config(a: &TrainArgs, n_inputs: usize) -> Result<MlfnConfig> {
    let cfg = match &a.config {
        Some(path) => {
            let file = HyperparameterFile::load(path)?;
            MlfnConfig {
                n_inputs,
                ..file.config
            }
        }
        None => a.hyper.config(n_inputs, a.seed),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_train(a: &TrainArgs) -> Result<Outcome> {
    let ds = a.data.load()?;
    let mut outcome = Outcome {
        inputs: vec![a.data.data.clone()],
        seed: Some(a.seed),
        ..Default::default()
    };
    let model_path = a
        .model_file
        .clone()
        .unwrap_or_else(|| a.out_dir.join("model.json"));
    let mut summary = format!(
        "data: {} ({} rows, {} features, target {})\n",
        a.data.data.display(),
        ds.len(),
        ds.n_features(),
        ds.target_name()
    );
    let model = match a.model {
        ModelKind::Mlfn => {
            if let Some(p) = &a.config {
                outcome.inputs.push(p.clone());
            }
            let cfg = resolve_train_config(a, ds.n_features())?;
            let (model, trace) = mlfn::train(&ds, &cfg)?;
            let _ = writeln!(summary, "model: mlfn");
            let _ = writeln!(summary, "config: {}", describe_config(&cfg));
            if let Some(m) = trace.final_mse() {
                let _ = writeln!(summary, "final normalized mse: {m}");
            }
            write_file(
                &a.out_dir.join("trace.csv"),
                &trace.to_csv_string(),
                &mut outcome,
            )?;
            Surrogate::Mlfn(model)
        }
        ModelKind::Grnn => {
            let tol = a.tolerance.spec()?;
            let sigma = match &a.sigma_grid {
                Some(grid) => {
                    let sel = grnn::select_sigma(&ds, grid, a.cv, a.seed, &tol)?;
                    let mut csv = String::from("sigma,mean_accuracy\n");
                    for (s, acc) in &sel.scores {
                        let _ = writeln!(csv, "{s},{acc}");
                    }
                    write_file(&a.out_dir.join("sigma_scores.csv"), &csv, &mut outcome)?;
                    sel.best
                }
                None => a.sigma,
            };
            let _ = writeln!(summary, "model: grnn");
            let _ = writeln!(summary, "config: sigma={sigma}");
            Surrogate::Grnn(grnn::fit(&ds, sigma)?)
        }
    };
    write_file(&model_path, &model.to_json(), &mut outcome)?;
    // Only the file name: replays redirect outputs and must reproduce this file.
    let _ = writeln!(summary, "model file: {}", output_name(&model_path));
    write_file(&a.out_dir.join("train_summary.txt"), &summary, &mut outcome)?;
    print!("{summary}");
    println!("wrote {}", model_path.display());
    Ok(outcome)
}

fn check_same_schema(model: &Surrogate, ds: &Dataset) -> Result<()> {
    if model.feature_names() != ds.feature_names() || model.target_name() != ds.target_name() {
        return Err(surroscreen::Error::SchemaMismatch(format!(
            "model expects features [{}] -> {}, data has [{}] -> {}",
            model.feature_names().join(","),
            model.target_name(),
            ds.feature_names().join(","),
            ds.target_name()
        ))
        .into());
    }
    Ok(())
}

fn cmd_evaluate(a: &EvaluateArgs) -> Result<Outcome> {
    let model = Surrogate::load(&a.model_file)?;
    let ds = a.data.load()?;
    check_same_schema(&model, &ds)?;
    let tol = a.tolerance.spec()?;
    let mut outcome = Outcome {
        inputs: vec![a.model_file.clone(), a.data.data.clone()],
        seed: Some(a.seed),
        ..Default::default()
    };
    let preds = eval::predict_all(&model, &ds)?;
    let accuracy = eval::tolerance_accuracy(&preds, ds.targets(), &tol)?;
    let rmse = eval::rmse(&preds, ds.targets())?;
    let metrics = format!(
        "metric,value\nrows,{}\ntolerance,{}\naccuracy,{accuracy}\nrmse,{rmse}\n",
        ds.len(),
        tol.fraction
    );
    write_file(&a.out_dir.join("metrics.csv"), &metrics, &mut outcome)?;
    let mut summary = format!(
        "model: {}\ndata: {} ({} rows)\ntolerance: +/-{}%\naccuracy: {accuracy:.6}\nrmse: {rmse:.6}\n",
        model.describe(),
        a.data.data.display(),
        ds.len(),
        tol.fraction * 100.0
    );
    if let Some(k) = a.cv {
        let cv = eval::cross_validate(&ds, &ModelSpec::of(&model), k, a.seed, &tol)?;
        write_file(
            &a.out_dir.join("cv_folds.csv"),
            &cv.to_csv_string(),
            &mut outcome,
        )?;
        summary.push_str(&cv.summary());
    }
    write_file(
        &a.out_dir.join("evaluate_summary.txt"),
        &summary,
        &mut outcome,
    )?;
    print!("{summary}");
    Ok(outcome)
}

/// Parse `a..b` (inclusive) or `a,b,c`.
pub fn parse_nodes(spec: &str) -> Result<Vec<usize>> {
    let bad = || {
        CliError::Usage(format!(
            "invalid node list `{spec}`; use `1..12` or `2,4,8`"
        ))
    };
    let values: Vec<usize> = if let Some((lo, hi)) = spec.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        (lo..=hi).collect()
    } else {
        spec.split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if values.is_empty() || values.contains(&0) {
        return Err(bad());
    }
    Ok(values)
}

fn cmd_sweep(a: &SweepArgs) -> Result<Outcome> {
    let ds = a.data.load()?;
    let nodes = parse_nodes(&a.nodes)?;
    let tol = a.tolerance.spec()?;
    let base = a.hyper.config(ds.n_features(), a.seed);
    let report = eval::sweep_hidden_nodes(&ds, &base, &nodes, a.cv, a.seed, &tol)?;
    let mut outcome = Outcome {
        inputs: vec![a.data.data.clone()],
        seed: Some(a.seed),
        ..Default::default()
    };
    write_file(
        &a.out_dir.join("sweep.csv"),
        &report.to_csv_string(),
        &mut outcome,
    )?;
    let summary = format!(
        "{}-fold cross-validation over hidden nodes {:?}\nbase: {}\nbest hidden nodes: {}\n",
        a.cv,
        nodes,
        describe_config(&base),
        report.best_value
    );
    write_file(&a.out_dir.join("sweep_summary.txt"), &summary, &mut outcome)?;
    print!("{summary}");
    Ok(outcome)
}

/// The ordered search axes and their value lists.
pub fn resolve_search_axes(a: &SearchArgs) -> Result<Vec<(HyperAxis, Vec<f64>)>> {
    a.axes
        .iter()
        .map(|name| {
            let axis = HyperAxis::from_name(name.trim())
                .ok_or_else(|| CliError::Usage(format!("unknown search axis `{name}`")))?;
            let values = match axis {
                HyperAxis::LearningRate => a.lr_values.clone(),
                HyperAxis::HiddenNodes => a.hidden_values.clone(),
                HyperAxis::Epochs => a.epochs_values.clone(),
                HyperAxis::Momentum => a.momentum_values.clone(),
            };
            Ok((axis, values))
        })
        .collect()
}

pub fn search_output(outcome: &SearchOutcome) -> HyperparameterFile {
    HyperparameterFile {
        mean_accuracy: Some(outcome.best_score),
        start_accuracy: Some(outcome.start_score),
        folds: Some(outcome.k),
        cv_seed: Some(outcome.seed),
        tolerance: Some(outcome.tolerance.fraction),
        config: outcome.best.clone(),
    }
}

fn cmd_search(a: &SearchArgs) -> Result<Outcome> {
    let ds = a.data.load()?;
    let tol = a.tolerance.spec()?;
    let axes = resolve_search_axes(a)?;
    let start = a.hyper.config(ds.n_features(), a.seed);
    let result = eval::control_variable_search(&ds, &axes, &start, a.cv, a.seed, &tol)?;
    let mut outcome = Outcome {
        inputs: vec![a.data.data.clone()],
        seed: Some(a.seed),
        ..Default::default()
    };
    write_file(
        &a.out_dir.join("best_config.toml"),
        &search_output(&result).to_toml()?,
        &mut outcome,
    )?;
    write_file(
        &a.out_dir.join("search_trace.csv"),
        &result.trace_csv_string(),
        &mut outcome,
    )?;
    let summary = format!(
        "start: {} (mean accuracy {:.6})\nbest:  {} (mean accuracy {:.6})\n",
        describe_config(&start),
        result.start_score,
        describe_config(&result.best),
        result.best_score
    );
    write_file(
        &a.out_dir.join("search_summary.txt"),
        &summary,
        &mut outcome,
    )?;
    print!("{summary}");
    Ok(outcome)
}

fn cmd_screen(a: &ScreenArgs) -> Result<Outcome> {
    let config = ScreenConfig::load(&a.space)?;
    let model_path = match (&a.model_file, &config.model) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => {
            let p = PathBuf::from(p);
            if p.is_relative() {
                a.space.parent().unwrap_or_else(|| Path::new("")).join(p)
            } else {
                p
            }
        }
        (None, None) => {
            return Err(CliError::Usage(
                "no model: pass --model-file or set `model` in the screening config".into(),
            ))
        }
    };
    let model = Surrogate::load(&model_path)?;
    let space = config.space()?;
    let opts = ScreenOptions {
        direction: a
            .direction
            .map(Direction::from)
            .or(config.direction)
            .unwrap_or(Direction::Maximize),
        top_k: a.top.or(config.top).unwrap_or(hts::DEFAULT_TOP_K),
        workers: a.workers.or(config.workers).unwrap_or(1),
    };
    let report = hts::screen(&model, model.target_name(), &space, &opts)?
        .with_model_digest(file_digest(&model_path)?);
    let mut outcome = Outcome {
        inputs: vec![a.space.clone(), model_path],
        ..Default::default()
    };
    write_file(
        &a.out_dir.join("screen.csv"),
        &report.to_csv_string(),
        &mut outcome,
    )?;
    let summary = report.summary();
    write_file(
        &a.out_dir.join("screen_summary.txt"),
        &summary,
        &mut outcome,
    )?;
    print!("{summary}");
    Ok(outcome)
}

/// Parse the first non-empty line of `text` as comma-separated finite
/// feature values. `origin` names the source in error messages.
pub fn parse_feature_line(text: &str, origin: &str) -> Result<Vec<f64>> {
    let (line_no, line) = text
        .lines()
        .enumerate()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| CliError::Usage(format!("{origin}: no feature line")))?;
    line.split(',')
        .enumerate()
        .map(|(col, f)| {
            f.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    CliError::Usage(format!(
                        "{origin}: line {}, column {}: non-numeric value `{}`",
                        line_no + 1,
                        col + 1,
                        f.trim()
                    ))
                })
        })
        .collect()
}

fn read_feature_line(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_feature_line(&text, &path.display().to_string())
}

fn cmd_predict(a: &PredictArgs) -> Result<Outcome> {
    let model = Surrogate::load(&a.model_file)?;
    let mut outcome = Outcome {
        inputs: vec![a.model_file.clone()],
        ..Default::default()
    };
    let x = match (&a.features, &a.input) {
        (Some(f), _) => f.clone(),
        (None, Some(p)) => {
            outcome.inputs.push(p.clone());
            read_feature_line(p)?
        }
        (None, None) => return Err(CliError::Usage("pass --features or --input".into())),
    };
    if let Some(v) = x.iter().find(|v| !v.is_finite()) {
        return Err(CliError::Usage(format!("feature value {v} is not finite")));
    }
    let y = model.predict(&x)?;
    let line = format!("{y} {}\n", model.target_name());
    print!("{line}");
    if let Some(dir) = &a.out_dir {
        write_file(&dir.join("prediction.txt"), &line, &mut outcome)?;
    }
    Ok(outcome)
}
