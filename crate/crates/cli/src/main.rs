//! `ctfi`: fetch the datasets and run the experiments.

mod config;
mod fetch;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ctfi::constraints::TNorm;
use ctfi::data::uci::DatasetId;
use ctfi::data::DataError;
use ctfi::experiment::{self, DatasetSource, ExperimentConfig, RunProvenance};
use ctfi::importance::ImportanceMethod;
use ctfi::model::Checkpoint;

#[derive(Parser)]
#[command(name = "ctfi", version, about = "Training under constraints on feature importance")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Opts {
    /// `key = value` file; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Directory holding the fetched CSVs.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    /// german, adult or a path to a canonical CSV.
    #[arg(long, global = true)]
    dataset: Option<DatasetSource>,
    /// Formula such as `I[gender] < 0`; repeatable.
    #[arg(long = "constraint", global = true)]
    constraints: Vec<String>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Comma-separated values or `linspace(lo, hi, n)`.
    #[arg(long, global = true, value_parser = parse_grid)]
    lambdas: Option<Grid>,
    #[arg(long, global = true)]
    tnorm: Option<TNorm>,
    #[arg(long, global = true)]
    method: Option<ImportanceMethod>,
    /// Also constrain features correlated with the protected one.
    #[arg(long, global = true)]
    correlated: bool,
    /// Sweep mode: protected, correlated or both.
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Train on at most 5000 rows.
    #[arg(long, global = true)]
    fast: bool,
    #[arg(long, global = true)]
    hidden_units: Option<usize>,
    #[arg(long, global = true)]
    learning_rate: Option<f64>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
    #[arg(long, global = true)]
    batch_size: Option<usize>,
    /// Fraction of rows in the training split.
    #[arg(long, global = true)]
    split: Option<f64>,
}

#[derive(Debug, Clone)]
struct Grid(Vec<f64>);

fn parse_grid(v: &str) -> Result<Grid, String> {
    config::parse_grid(v).map(Grid)
}

#[derive(Subcommand)]
enum Command {
    /// Download a UCI dataset and convert it to CSV.
    Fetch {
        #[arg(value_name = "DATASET")]
        id: DatasetId,
        /// Local directory or base URL holding the UCI distribution files.
        #[arg(long)]
        source: Option<String>,
    },
    /// German credit: unconstrained, gender-constrained and correlated models.
    Toy,
    /// Adult: metrics over a grid of regularization strengths.
    Sweep,
    /// Adult: the constrained model against classical mitigation baselines.
    Benchmark,
    /// Train one model and save a checkpoint.
    Train,
    /// Per-instance importances of a saved model on the test split.
    Explain {
        /// Checkpoint written by `train` (default `<out>/model.json`).
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(ctfi::Error),
}

impl From<ctfi::Error> for CliError {
    fn from(e: ctfi::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => e.exit_code() as u8,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn default_dataset(command: &Command) -> DatasetSource {
    match command {
        Command::Sweep | Command::Benchmark => DatasetSource::Adult,
        _ => DatasetSource::German,
    }
}

fn build_config(opts: &Opts, command: &Command) -> Result<ExperimentConfig, CliError> {
    let mut c = ExperimentConfig {
        dataset: default_dataset(command),
        correlated: matches!(command, Command::Benchmark),
        ..Default::default()
    };
    if let Some(path) = &opts.config {
        let text = std::fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
        config::apply_file(&mut c, &text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    }
    macro_rules! set {
        ($field:ident, $value:expr) => {
            if let Some(v) = $value.clone() {
                c.$field = v;
            }
        };
    }
    set!(seed, opts.seed);
    set!(out, opts.out);
    set!(data_dir, opts.data_dir);
    set!(dataset, opts.dataset);
    set!(tnorm, opts.tnorm);
    set!(method, opts.method);
    set!(split_fraction, opts.split);
    if opts.lambda.is_some() {
        c.lambda = opts.lambda;
    }
    if let Some(Grid(g)) = &opts.lambdas {
        c.lambdas = Some(g.clone());
    }
    if opts.hidden_units.is_some() {
        c.hidden_units = opts.hidden_units;
    }
    if opts.learning_rate.is_some() {
        c.learning_rate = opts.learning_rate;
    }
    if opts.epochs.is_some() {
        c.epochs = opts.epochs;
    }
    if opts.batch_size.is_some() {
        c.batch_size = opts.batch_size;
    }
    if let Some(m) = &opts.mode {
        c.modes = config::parse_modes(m).map_err(CliError::Usage)?;
    }
    c.correlated |= opts.correlated;
    c.fast |= opts.fast;
    // Flags add to the file's formulas; both are AND-ed.
    c.constraints.extend(opts.constraints.iter().cloned());
    c.validate()?;
    Ok(c)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = build_config(&cli.opts, &cli.command)?;
    let out = config.out.clone();
    match &cli.command {
        Command::Fetch { id, source } => {
            let prov = fetch::fetch(*id, source.as_deref(), &config.data_dir)?;
            println!(
                "{}: {} records -> {}",
                id,
                prov.records,
                id.csv_path(&config.data_dir).display()
            );
        }
        Command::Toy => {
            let data = experiment::load_dataset(&config)?;
            let outcome = experiment::run_toy(&data, &config)?;
            experiment::write_output(&out, "importance_profile.csv", &experiment::toy_profile_csv(&outcome))?;
            experiment::write_output(&out, "metrics.csv", &experiment::reports_csv(&outcome.reports))?;
            experiment::write_provenance(&out, &RunProvenance::new("toy", &config, &data))?;
            print!("{}", experiment::reports_csv(&outcome.reports));
        }
        Command::Sweep => {
            let data = experiment::load_dataset(&config)?;
            let rows = experiment::run_sweep(&data, &config)?;
            let csv = experiment::sweep_csv(&rows);
            experiment::write_output(&out, "sweep.csv", &csv)?;
            experiment::write_provenance(&out, &RunProvenance::new("sweep", &config, &data))?;
            print!("{csv}");
        }
        Command::Benchmark => {
            let data = experiment::load_dataset(&config)?;
            let reports = experiment::run_benchmark(&data, &config)?;
            let csv = experiment::benchmark_csv(&reports);
            experiment::write_output(&out, "benchmark.csv", &csv)?;
            experiment::write_provenance(&out, &RunProvenance::new("benchmark", &config, &data))?;
            print!("{csv}");
        }
        Command::Train => {
            let data = experiment::load_dataset(&config)?;
            let outcome = experiment::run_train(&data, &config)?;
            std::fs::create_dir_all(&out).map_err(|e| DataError::io(&out, e))?;
            outcome.checkpoint.save(&out.join("model.json"))?;
            let names = &outcome.checkpoint.feature_names;
            experiment::write_output(&out, "history.csv", &experiment::history_csv(&outcome.history, names))?;
            let report = std::slice::from_ref(&outcome.report);
            experiment::write_output(&out, "metrics.csv", &experiment::reports_csv(report))?;
            experiment::write_provenance(&out, &RunProvenance::new("train", &config, &data))?;
            print!("{}", experiment::reports_csv(report));
        }
        Command::Explain { model } => {
            let path = model.clone().unwrap_or_else(|| out.join("model.json"));
            let checkpoint = Checkpoint::load(&path)?;
            let data = experiment::load_dataset(&config)?;
            let rows = experiment::run_explain(&data, &config, &checkpoint)?;
            let written = experiment::write_output(&out, "importances.csv", &experiment::explanations_csv(&rows))?;
            println!("{} rows -> {}", rows.len(), written.display());
        }
    }
    Ok(())
}
