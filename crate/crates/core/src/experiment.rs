//! The experiments: the German credit importance profile, the Adult
//! regularization sweep and the Adult mitigation benchmark, plus plain
//! training and per-instance explanation.
//!
//! Every runner returns its rows already sorted; the `write_*` helpers emit
//! them as CSV with a header. Given the same configuration and input bytes the
//! output is byte-identical.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constraints::{correlated_formula, ConstraintFormula, ConstraintSet, TNorm};
use crate::data::uci::DatasetId;
use crate::data::{self, adult, balance_by_target, german, split, standardize, DataError, Dataset, Scaler};
use crate::fairness::{self, FairnessReport};
use crate::importance::{self, ImportanceMethod};
use crate::model::{train, Checkpoint, MlpConfig, MlpParams};
use crate::{Error, Result};

/// Where the dataset comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetSource {
    German,
    Adult,
    /// Canonical CSV with a provenance sidecar.
    Custom(PathBuf),
}

impl FromStr for DatasetSource {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "german" => Ok(DatasetSource::German),
            "adult" => Ok(DatasetSource::Adult),
            path if path.ends_with(".csv") => Ok(DatasetSource::Custom(PathBuf::from(path))),
            other => Err(format!(
                "unknown dataset `{other}` (expected german, adult or a path to a .csv file)"
            )),
        }
    }
}

impl std::fmt::Display for DatasetSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DatasetSource::German => f.write_str("german"),
            DatasetSource::Adult => f.write_str("adult"),
            DatasetSource::Custom(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// Only the protected feature is constrained.
    Protected,
    /// The protected feature plus every feature correlated with it.
    Correlated,
}

/// Settings shared by all commands. `None` fields take the command's default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub data_dir: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
    pub hidden_units: Option<usize>,
    pub learning_rate: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub constraints: Vec<String>,
    pub lambda: Option<f64>,
    pub lambdas: Option<Vec<f64>>,
    pub tnorm: TNorm,
    pub method: ImportanceMethod,
    pub correlated: bool,
    pub modes: Vec<SweepMode>,
    /// Train on at most [`FAST_TRAIN_ROWS`] rows.
    pub fast: bool,
    pub split_fraction: f64,
    /// Balance target classes before splitting; `None` balances Adult only.
    pub balance: Option<bool>,
}

pub const FAST_TRAIN_ROWS: usize = 5000;

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetSource::German,
            data_dir: PathBuf::from("data"),
            out: PathBuf::from("out"),
            seed: 0,
            hidden_units: None,
            learning_rate: None,
            epochs: None,
            batch_size: None,
            constraints: Vec::new(),
            lambda: None,
            lambdas: None,
            tnorm: TNorm::Product,
            method: ImportanceMethod::Lrp,
            correlated: false,
            modes: vec![SweepMode::Protected, SweepMode::Correlated],
            fast: false,
            split_fraction: 0.5,
            balance: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(l) = self.lambda {
            check_lambda(l)?;
        }
        if let Some(grid) = &self.lambdas {
            if grid.is_empty() {
                return Err(Error::Config("lambda grid is empty".into()));
            }
            for &l in grid {
                check_lambda(l)?;
            }
            if grid.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Config("lambda grid must be strictly increasing".into()));
            }
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::Config(format!(
                "split fraction {} outside (0, 1)",
                self.split_fraction
            )));
        }
        if self.modes.is_empty() {
            return Err(Error::Config("no sweep mode selected".into()));
        }
        Ok(())
    }

    /// Model settings for `d` inputs: the dataset's defaults with overrides.
    pub fn model(&self, d: usize) -> MlpConfig {
        let mut m = match self.dataset {
            DatasetSource::Adult => MlpConfig::adult(d, self.seed),
            _ => MlpConfig::german(d, self.seed),
        };
        if let Some(h) = self.hidden_units {
            m.hidden_units = h;
        }
        if let Some(lr) = self.learning_rate {
            m.learning_rate = lr;
        }
        if let Some(e) = self.epochs {
            m.epochs = e;
        }
        if let Some(b) = self.batch_size {
            m.batch_size = b;
        }
        m
    }

    fn lambda_or(&self, default: f64) -> f64 {
        self.lambda.unwrap_or(default)
    }

    fn balanced(&self) -> bool {
        self.balance
            .unwrap_or(matches!(self.dataset, DatasetSource::Adult))
    }
}

fn check_lambda(l: f64) -> Result<()> {
    if l.is_finite() && l >= 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("lambda must be finite and non-negative, got {l}")))
    }
}

/// `n` equally spaced values from `lo` to `hi`, both included.
pub fn lambda_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Grid used by the sweep unless overridden.
pub fn default_grid() -> Vec<f64> {
    lambda_grid(0.0, 0.5, 10)
}

/// Loads and preprocesses the configured dataset.
pub fn load_dataset(config: &ExperimentConfig) -> Result<Dataset> {
    let data = match &config.dataset {
        DatasetSource::German => german::load(&require(DatasetId::German, &config.data_dir)?)?,
        DatasetSource::Adult => adult::load(&require(DatasetId::Adult, &config.data_dir)?)?,
        DatasetSource::Custom(path) => data::read_canonical(path)?,
    };
    if data.protected().is_none() {
        return Err(DataError::Invalid(format!("{} has no protected attribute", config.dataset)).into());
    }
    Ok(data)
}

fn require(id: DatasetId, dir: &Path) -> Result<PathBuf> {
    let path = id.csv_path(dir);
    if path.exists() {
        Ok(path)
    } else {
        Err(DataError::Invalid(format!(
            "{} not found; run `ctfi fetch {id} --data-dir {}` first",
            path.display(),
            dir.display()
        ))
        .into())
    }
}

/// Standardized train/test splits.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub train: Dataset,
    pub test: Dataset,
    pub scaler: Scaler,
}

impl Prepared {
    /// Index of the protected feature among the training inputs.
    pub fn protected_index(&self) -> Result<usize> {
        self.train
            .protected()
            .and_then(|p| p.column)
            .ok_or_else(|| Error::Config("protected attribute is not a training feature".into()))
    }
}

/// Optional target balancing, stratified split, optional subsampling of the
/// training rows, then standardization fitted on the training split.
pub fn prepare(data: &Dataset, config: &ExperimentConfig) -> Result<Prepared> {
    let seed = config.seed;
    let base = if config.balanced() {
        balance_by_target(data, seed)?
    } else {
        data.clone()
    };
    let (mut train_raw, test_raw) = split(&base, config.split_fraction, seed.wrapping_add(1))?;
    if config.fast && train_raw.n() > FAST_TRAIN_ROWS {
        let mut ids: Vec<usize> = (0..train_raw.n()).collect();
        ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(2)));
        ids.truncate(FAST_TRAIN_ROWS);
        ids.sort_unstable();
        train_raw = train_raw.select(&ids);
    }
    let (train, scaler) = standardize(&train_raw);
    let test = scaler.apply(&test_raw);
    Ok(Prepared { train, test, scaler })
}

fn constraint_set(formulas: Vec<ConstraintFormula>, config: &ExperimentConfig) -> ConstraintSet {
    let mut set = ConstraintSet::new(formulas).with_tnorm(config.tnorm);
    set.method = config.method;
    set
}

/// `I[<protected>] < 0` at strength `lambda`, optionally with the correlated
/// features, plus any user formulas at the same strength.
fn protected_constraints(
    prepared: &Prepared,
    config: &ExperimentConfig,
    lambda: f64,
    correlated: bool,
) -> Result<ConstraintSet> {
    let s = prepared.protected_index()?;
    let names = prepared.train.feature_names();
    let mut formulas = if correlated {
        vec![correlated_formula(&prepared.train, s, lambda)]
    } else {
        let text = format!("I[{}] < 0", names[s]);
        vec![crate::constraints::parse_formula(&text, &names)?.with_lambda(lambda)]
    };
    for text in &config.constraints {
        formulas.push(crate::constraints::parse_formula(text, &names)?.with_lambda(lambda));
    }
    Ok(constraint_set(formulas, config))
}

fn fit(
    train_set: &Dataset,
    config: &ExperimentConfig,
    constraints: Option<&ConstraintSet>,
    weights: Option<&[f64]>,
) -> Result<MlpParams> {
    let model = config.model(train_set.d());
    let init = MlpParams::init(&model)?;
    Ok(train(init, train_set, &model, constraints, weights)?.params)
}

/// Mean test importance per feature of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceProfile {
    pub method: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyOutcome {
    pub features: Vec<String>,
    /// Sorted by method name.
    pub profiles: Vec<ImportanceProfile>,
    /// Sorted by method name.
    pub reports: Vec<FairnessReport>,
}

impl ToyOutcome {
    pub fn profile(&self, method: &str) -> Option<&ImportanceProfile> {
        self.profiles.iter().find(|p| p.method == method)
    }

    pub fn report(&self, method: &str) -> Option<&FairnessReport> {
        self.reports.iter().find(|r| r.method == method)
    }
}

pub const TOY_DEFAULT_LAMBDA: f64 = 0.05;

/// Unconstrained, `I[<protected>] < 0` and correlated-feature models on the
/// same split and initialization.
pub fn run_toy(data: &Dataset, config: &ExperimentConfig) -> Result<ToyOutcome> {
    config.validate()?;
    let prepared = prepare(data, config)?;
    let lambda = config.lambda_or(TOY_DEFAULT_LAMBDA);
    let runs: Vec<(&str, Option<ConstraintSet>)> = vec![
        ("unconstrained", None),
        ("constrained", Some(protected_constraints(&prepared, config, lambda, false)?)),
        ("correlated", Some(protected_constraints(&prepared, config, lambda, true)?)),
    ];
    let mut profiles = Vec::new();
    let mut reports = Vec::new();
    for (name, set) in runs {
        log::info!("toy: training {name}");
        let params = fit(&prepared.train, config, set.as_ref(), None)?;
        profiles.push(ImportanceProfile {
            method: name.to_string(),
            values: importance::mean_importance(&params, &prepared.test, config.method)?,
        });
        let lam = set.as_ref().map(|_| lambda);
        reports.push(FairnessReport::evaluate(&params, &prepared.test, name, lam)?);
    }
    profiles.sort_by(|a, b| a.method.cmp(&b.method));
    reports.sort_by(|a, b| a.method.cmp(&b.method));
    Ok(ToyOutcome {
        features: prepared.train.feature_names(),
        profiles,
        reports,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub mode: SweepMode,
    pub lambda: f64,
    /// Error message when this model failed; the sweep continues.
    pub result: std::result::Result<FairnessReport, String>,
}

/// One freshly initialized model per (mode, lambda).
pub fn run_sweep(data: &Dataset, config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let prepared = prepare(data, config)?;
    let grid = config.lambdas.clone().unwrap_or_else(default_grid);
    let mut modes = config.modes.clone();
    modes.sort();
    modes.dedup();
    let mut rows = Vec::new();
    for mode in modes {
        for &lambda in &grid {
            log::info!("sweep: {} lambda {lambda}", mode_name(&prepared, mode));
            let result = protected_constraints(&prepared, config, lambda, mode == SweepMode::Correlated)
                .and_then(|set| fit(&prepared.train, config, Some(&set), None))
                .and_then(|params| {
                    FairnessReport::evaluate(&params, &prepared.test, mode_name(&prepared, mode), Some(lambda))
                })
                .map_err(|e| e.to_string());
            rows.push(SweepRow { mode, lambda, result });
        }
    }
    Ok(rows)
}

fn mode_name(prepared: &Prepared, mode: SweepMode) -> String {
    let s = prepared
        .train
        .protected()
        .map(|p| p.name.clone())
        .unwrap_or_default();
    match mode {
        SweepMode::Protected => s,
        SweepMode::Correlated => format!("{s}+correlated"),
    }
}

pub const BENCHMARK_DEFAULT_LAMBDA: f64 = 0.1;

/// Original, unawareness, undersampling, reweighing and the constrained model
/// (with correlated features when `config.correlated` is set), sorted by
/// method name.
pub fn run_benchmark(data: &Dataset, config: &ExperimentConfig) -> Result<Vec<FairnessReport>> {
    config.validate()?;
    let prepared = prepare(data, config)?;
    let lambda = config.lambda_or(BENCHMARK_DEFAULT_LAMBDA);
    let mut reports = Vec::new();

    log::info!("benchmark: original");
    let params = fit(&prepared.train, config, None, None)?;
    reports.push(FairnessReport::evaluate(&params, &prepared.test, "original", None)?);

    log::info!("benchmark: unawareness");
    let train_u = fairness::unawareness(&prepared.train)?;
    let test_u = fairness::unawareness(&prepared.test)?;
    let params = fit(&train_u, config, None, None)?;
    reports.push(FairnessReport::evaluate(&params, &test_u, "unawareness", None)?);

    log::info!("benchmark: undersampling");
    let train_s = fairness::undersample(&prepared.train, config.seed.wrapping_add(3))?;
    let params = fit(&train_s, config, None, None)?;
    reports.push(FairnessReport::evaluate(&params, &prepared.test, "undersampling", None)?);

    log::info!("benchmark: reweighing");
    let weights = fairness::reweigh(&prepared.train)?;
    let params = fit(&prepared.train, config, None, Some(&weights))?;
    reports.push(FairnessReport::evaluate(&params, &prepared.test, "reweighing", None)?);

    log::info!("benchmark: ctfi");
    let set = protected_constraints(&prepared, config, lambda, config.correlated)?;
    let params = fit(&prepared.train, config, Some(&set), None)?;
    reports.push(FairnessReport::evaluate(&params, &prepared.test, "ctfi", Some(lambda))?);

    reports.sort_by(|a, b| a.method.cmp(&b.method));
    Ok(reports)
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    pub scaler: Scaler,
    pub report: FairnessReport,
    pub history: Vec<crate::model::EpochStats>,
}

/// Trains one model with the configured constraints (if any) at `lambda`
/// (default 0, i.e. unconstrained) and evaluates it on the test split.
pub fn run_train(data: &Dataset, config: &ExperimentConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let prepared = prepare(data, config)?;
    let lambda = config.lambda_or(0.0);
    let names = prepared.train.feature_names();
    let mut formulas = Vec::new();
    if config.correlated {
        formulas.push(correlated_formula(&prepared.train, prepared.protected_index()?, lambda));
    }
    for text in &config.constraints {
        formulas.push(crate::constraints::parse_formula(text, &names)?.with_lambda(lambda));
    }
    let set = (!formulas.is_empty()).then(|| constraint_set(formulas, config));
    let model = config.model(prepared.train.d());
    let trained = train(MlpParams::init(&model)?, &prepared.train, &model, set.as_ref(), None)?;
    let method = if set.is_some() { "constrained" } else { "unconstrained" };
    let report = FairnessReport::evaluate(
        &trained.params,
        &prepared.test,
        method,
        set.as_ref().map(|_| lambda),
    )?;
    Ok(TrainOutcome {
        checkpoint: Checkpoint::new(&model, names, &trained.params),
        scaler: prepared.scaler,
        report,
        history: trained.history,
    })
}

/// One importance value per (test instance, feature).
#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    pub instance_id: usize,
    pub feature: String,
    pub importance: f64,
}

/// Importances of a saved model on the test split recreated from `config`.
pub fn run_explain(
    data: &Dataset,
    config: &ExperimentConfig,
    checkpoint: &Checkpoint,
) -> Result<Vec<Explanation>> {
    config.validate()?;
    let prepared = prepare(data, config)?;
    let names = prepared.test.feature_names();
    if names != checkpoint.feature_names {
        return Err(Error::Config(format!(
            "model was trained on features {:?}, data has {:?}",
            checkpoint.feature_names, names
        )));
    }
    let params = checkpoint.params()?;
    let mut out = Vec::with_capacity(prepared.test.n() * names.len());
    for i in 0..prepared.test.n() {
        let imp = importance::importance(&params, prepared.test.row(i), config.method)?;
        for (name, v) in names.iter().zip(imp.values) {
            out.push(Explanation {
                instance_id: prepared.test.row_ids()[i],
                feature: name.clone(),
                importance: v,
            });
        }
    }
    Ok(out)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn toy_profile_csv(outcome: &ToyOutcome) -> String {
    let mut s = String::from("method,feature,importance\n");
    for p in &outcome.profiles {
        for (f, v) in outcome.features.iter().zip(&p.values) {
            writeln!(s, "{},{},{}", p.method, f, v).unwrap();
        }
    }
    s
}

pub fn reports_csv(reports: &[FairnessReport]) -> String {
    let mut s = format!("{}\n", FairnessReport::CSV_HEADER);
    for r in reports {
        writeln!(s, "{}", r.csv_row()).unwrap();
    }
    s
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("mode,lambda,roc_auc,di,eo,cf,status\n");
    for row in rows {
        match &row.result {
            Ok(r) => writeln!(
                s,
                "{},{},{},{},{},{},ok",
                r.method,
                row.lambda,
                opt(r.roc_auc),
                opt(r.di),
                opt(r.eo),
                opt(r.cf)
            )
            .unwrap(),
            Err(e) => {
                let mode = match row.mode {
                    SweepMode::Protected => "protected",
                    SweepMode::Correlated => "correlated",
                };
                let msg = e.replace([',', '\n'], " ");
                writeln!(s, "{mode},{},,,,,error: {msg}", row.lambda).unwrap()
            }
        }
    }
    s
}

pub fn benchmark_csv(reports: &[FairnessReport]) -> String {
    let mut s = String::from("method,roc_auc,eo,di,cf\n");
    for r in reports {
        writeln!(
            s,
            "{},{},{},{},{}",
            r.method,
            opt(r.roc_auc),
            opt(r.eo),
            opt(r.di),
            opt(r.cf)
        )
        .unwrap();
    }
    s
}

pub fn history_csv(history: &[crate::model::EpochStats], features: &[String]) -> String {
    let mut s = String::from("epoch,mean_risk,mean_constraint_loss");
    for f in features {
        write!(s, ",importance_{f}").unwrap();
    }
    s.push('\n');
    for h in history {
        write!(s, "{},{},{}", h.epoch, h.mean_risk, h.mean_constraint_loss).unwrap();
        for v in &h.mean_importance {
            write!(s, ",{v}").unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn explanations_csv(rows: &[Explanation]) -> String {
    let mut s = String::from("instance_id,feature_name,importance\n");
    for e in rows {
        writeln!(s, "{},{},{}", e.instance_id, e.feature, e.importance).unwrap();
    }
    s
}

/// Written next to every command's CSVs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunProvenance {
    pub command: String,
    pub config: ExperimentConfig,
    pub data: data::Provenance,
    pub notes: Vec<String>,
}

impl RunProvenance {
    pub fn new(command: &str, config: &ExperimentConfig, data: &Dataset) -> Self {
        let mut notes = vec![
            "hard predictions use p >= 0.5".to_string(),
            "cf is signed: rate after setting the protected feature to 0 minus rate before".to_string(),
        ];
        if config.correlated || config.modes.contains(&SweepMode::Correlated) {
            notes.push(
                "correlated strengths are |pearson(protected, feature)| on the training split, \
                 with the protected feature itself at full strength"
                    .to_string(),
            );
        }
        Self {
            command: command.to_string(),
            config: config.clone(),
            data: data.provenance.clone(),
            notes,
        }
    }
}

/// Writes `contents` to `dir/name`, creating `dir`.
pub fn write_output(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| DataError::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| DataError::io(&path, e))?;
    Ok(path)
}

pub fn write_provenance(dir: &Path, prov: &RunProvenance) -> Result<PathBuf> {
    let json = serde_json::to_string_pretty(prov).map_err(DataError::from)?;
    write_output(dir, "run.json", &(json + "\n"))
}
