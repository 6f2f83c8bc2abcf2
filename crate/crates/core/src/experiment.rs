//! Repeated train/test experiments over an ε grid.

use std::path::PathBuf;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::{forward_selection, lincfa_partition, selected_columns};
use crate::error::{Error, Result};
use crate::estimators::{
    accuracy, center_columns, logistic_fit, mean, ols_fit, r2_score, standardize_columns, var_unchecked,
};
use crate::genlin::{genlin_partition, make_bernoulli_family, make_gaussian_family};
use crate::io::load_csv_as;
use crate::model::{
    AggregationSpec, CenteringStats, Dataset, ExponentialFamily, FamilyKind, GenerativeSpec, Matrix, Partition,
    ReductionConfig, Registry, Task, TransformSpec,
};
use crate::nonlin::nonlin_partition;
use crate::synth::{gen_dataset, to_centered_classification};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[serde(alias = "nonlincfa")]
    NonLinCfa,
    #[serde(alias = "genlincfa")]
    GenLinCfa,
    #[serde(alias = "lincfa")]
    LinCfa,
    ForwardSelection,
}

impl Algorithm {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "nonlincfa" => Self::NonLinCfa,
            "genlincfa" => Self::GenLinCfa,
            "lincfa" => Self::LinCfa,
            "forwardselection" | "wrapper" => Self::ForwardSelection,
            _ => return Err(Error::Config(format!("unknown algorithm `{s}`"))),
        })
    }

    fn uses_epsilon(self) -> bool {
        matches!(self, Self::NonLinCfa | Self::GenLinCfa)
    }
}

/// How inputs (and a regression target) are normalized with training
/// statistics before partitioning.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    Center,
    #[default]
    Standardize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Csv { path: PathBuf, target: String },
    Synthetic { spec: GenerativeSpec, n: usize },
}

fn default_transform() -> TransformSpec {
    TransformSpec::Identity
}
fn default_aggregation() -> AggregationSpec {
    AggregationSpec::Mean
}
fn default_task() -> Task {
    Task::Regression
}
fn default_repetitions() -> usize {
    10
}
fn default_train_fraction() -> f64 {
    2.0 / 3.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    #[serde(default)]
    pub epsilon_grid: Vec<f64>,
    /// Largest subset size for forward selection.
    #[serde(default)]
    pub k_max: Option<usize>,
    #[serde(default = "default_transform")]
    pub transform: TransformSpec,
    #[serde(default = "default_aggregation")]
    pub aggregation: AggregationSpec,
    /// Defaults to gaussian for regression and bernoulli for classification.
    #[serde(default)]
    pub family: Option<FamilyKind>,
    #[serde(default = "default_task")]
    pub task: Task,
    #[serde(default)]
    pub scaling: Scaling,
    pub seed: u64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    pub data: DataSource,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config("train_fraction must lie in (0, 1)".into()));
        }
        if self.algorithm.uses_epsilon() {
            if self.epsilon_grid.is_empty() {
                return Err(Error::Config("epsilon_grid must not be empty".into()));
            }
            if self.epsilon_grid.iter().any(|e| !e.is_finite()) {
                return Err(Error::Config("epsilon values must be finite".into()));
            }
        }
        if self.algorithm == Algorithm::ForwardSelection && self.k_max.is_none() {
            return Err(Error::Config("forward selection needs k_max".into()));
        }
        if self.algorithm == Algorithm::LinCfa && self.task == Task::Classification {
            return Err(Error::Config("LinCFA is regression only".into()));
        }
        if let DataSource::Synthetic { spec, n } = &self.data {
            spec.validate()?;
            if *n < 6 {
                return Err(Error::InsufficientSamples { needed: 6, got: *n });
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> Result<String> {
        let bytes = serde_json::to_vec(self)?;
        Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn family(&self) -> ExponentialFamily {
        let kind = self.family.unwrap_or(match self.task {
            Task::Regression => FamilyKind::Gaussian,
            Task::Classification => FamilyKind::Bernoulli,
        });
        match kind {
            FamilyKind::Gaussian => make_gaussian_family(),
            FamilyKind::Bernoulli => make_bernoulli_family(),
        }
    }
}

/// Inputs after transform and scaling, and the target used by thresholds.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub inputs: Matrix,
    pub threshold_target: Vec<f64>,
    pub stats: CenteringStats,
}

/// Transform the raw features, then center or standardize them with their
/// own statistics. A regression target is scaled the same way.
pub fn prepare(
    features: &Matrix,
    target: &[f64],
    task: Task,
    transform: &TransformSpec,
    scaling: Scaling,
    registry: &Registry,
) -> Result<Prepared> {
    let phi = transform.apply(features, registry)?;
    let (inputs, stats) = match scaling {
        Scaling::Center => center_columns(&phi)?,
        Scaling::Standardize => standardize_columns(&phi)?,
    };
    let threshold_target = match task {
        Task::Classification => target.to_vec(),
        Task::Regression => {
            let m = mean(target);
            let s = match scaling {
                Scaling::Center => 1.0,
                Scaling::Standardize => {
                    let sd = var_unchecked(target).sqrt();
                    if sd > 0.0 {
                        sd
                    } else {
                        1.0
                    }
                }
            };
            target.iter().map(|v| (v - m) / s).collect()
        }
    };
    Ok(Prepared {
        inputs,
        threshold_target,
        stats,
    })
}

/// Runs a partitioning algorithm on prepared inputs.
pub fn partition_with(
    algorithm: Algorithm,
    inputs: &Matrix,
    y: &[f64],
    config: &ReductionConfig,
    registry: &Registry,
) -> Result<Partition> {
    match algorithm {
        Algorithm::NonLinCfa => nonlin_partition(inputs, y, config, registry),
        Algorithm::GenLinCfa => genlin_partition(inputs, y, config, registry),
        Algorithm::LinCfa => lincfa_partition(inputs, y),
        Algorithm::ForwardSelection => Err(Error::Config("forward selection does not build a partition".into())),
    }
}

/// A partition fitted on one dataset, reusable on new rows.
#[derive(Clone, Debug)]
pub struct FittedReduction {
    pub partition: Partition,
    pub stats: CenteringStats,
    pub transform: TransformSpec,
    pub aggregation: AggregationSpec,
}

impl FittedReduction {
    pub fn fit(
        ds: &Dataset,
        algorithm: Algorithm,
        config: &ReductionConfig,
        scaling: Scaling,
        registry: &Registry,
    ) -> Result<Self> {
        let p = prepare(ds.features(), ds.target(), ds.task(), &config.transform, scaling, registry)?;
        let aggregation = match algorithm {
            Algorithm::LinCfa => AggregationSpec::Mean,
            _ => config.aggregation.clone(),
        };
        let partition = partition_with(algorithm, &p.inputs, &p.threshold_target, config, registry)?;
        Ok(Self {
            partition,
            stats: p.stats,
            transform: config.transform.clone(),
            aggregation,
        })
    }

    /// Reduced features for new raw rows, using training statistics only.
    pub fn transform_rows(&self, features: &Matrix, registry: &Registry) -> Result<Matrix> {
        let phi = self.transform.apply(features, registry)?;
        let scaled = self.stats.apply(&phi)?;
        self.partition.apply(&scaled, &self.aggregation, registry)
    }

    pub fn reduced_names(&self) -> Vec<String> {
        (1..=self.partition.n_clusters()).map(|k| format!("h{k}")).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// Index into the summary list.
    pub setting: usize,
    pub epsilon: Option<f64>,
    pub k: Option<usize>,
    pub repetition: usize,
    pub seed: u64,
    pub d: usize,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SettingSummary {
    pub epsilon: Option<f64>,
    pub k: Option<usize>,
    pub d_mean: f64,
    pub d_half_width: f64,
    pub score_mean: f64,
    pub score_half_width: f64,
    pub repetitions: usize,
    pub single_run: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub seed: u64,
    pub config_hash: String,
    /// "r2" or "accuracy".
    pub score: String,
    pub wall_time_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub summary: Vec<SettingSummary>,
    pub metadata: ReportMetadata,
}

impl ExperimentReport {
    /// Flat CSV of per-row results, one line per (setting, repetition).
    pub fn rows_csv(&self) -> String {
        let mut out = String::from("epsilon,k,repetition,seed,d,score\n");
        for r in &self.rows {
            let eps = r.epsilon.map(|e| e.to_string()).unwrap_or_default();
            let k = r.k.map(|k| k.to_string()).unwrap_or_default();
            out.push_str(&format!("{eps},{k},{},{},{},{}\n", r.repetition, r.seed, r.d, r.score));
        }
        out
    }
}

/// Mean and 95% half-width 1.96·sd/√r; a single value gets half-width 0.
pub fn mean_half_width(values: &[f64]) -> (f64, f64) {
    let r = values.len();
    let m = mean(values);
    if r < 2 {
        return (m, 0.0);
    }
    (m, 1.96 * var_unchecked(values).sqrt() / (r as f64).sqrt())
}

/// ε values of a partitioning run; LinCFA has a single setting without ε.
fn epsilon_settings(cfg: &ExperimentConfig) -> Vec<Option<f64>> {
    match cfg.algorithm {
        Algorithm::LinCfa => vec![None],
        _ => cfg.epsilon_grid.iter().map(|&e| Some(e)).collect(),
    }
}

fn load_base(cfg: &ExperimentConfig) -> Result<Option<Dataset>> {
    match &cfg.data {
        DataSource::Csv { path, target } => Ok(Some(load_csv_as(path, target, cfg.task)?)),
        DataSource::Synthetic { .. } => Ok(None),
    }
}

fn dataset_for(cfg: &ExperimentConfig, base: &Option<Dataset>, sub_seed: u64) -> Result<Dataset> {
    match (&cfg.data, base) {
        (_, Some(ds)) => Ok(ds.clone()),
        (DataSource::Synthetic { spec, n }, None) => {
            let ds = gen_dataset(&spec.clone().with_seed(sub_seed), *n)?;
            match cfg.task {
                Task::Regression => Ok(ds),
                Task::Classification => to_centered_classification(ds),
            }
        }
        (DataSource::Csv { .. }, None) => unreachable!("csv data is loaded up front"),
    }
}

/// Shuffled split; the training share is round(n · fraction).
pub fn split_indices(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let n_train = (n as f64 * train_fraction).round() as usize;
    if n_train < 3 || n - n_train < 3 {
        return Err(Error::InsufficientSamples { needed: 6, got: n });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    idx.shuffle(&mut rng);
    let test = idx.split_off(n_train);
    Ok((idx, test))
}

/// Fits the evaluation model on reduced training features and scores it
/// on the test split.
pub fn score_reduced(train: &Matrix, y_train: &[f64], test: &Matrix, y_test: &[f64], task: Task) -> Result<f64> {
    match task {
        Task::Regression => {
            let m = mean(y_train);
            let yc: Vec<f64> = y_train.iter().map(|v| v - m).collect();
            let fit = ols_fit(train, &yc)?;
            let pred: Vec<f64> = fit.linear_predictor(test)?.into_iter().map(|p| p + m).collect();
            r2_score(y_test, &pred)
        }
        Task::Classification => {
            let fit = logistic_fit(train, y_train)?;
            accuracy(y_test, &fit.predict_class(test)?)
        }
    }
}

fn run_repetition(
    cfg: &ExperimentConfig,
    base: &Option<Dataset>,
    rep: usize,
    registry: &Registry,
) -> Result<Vec<ReportRow>> {
    let sub_seed = cfg.seed.wrapping_add(rep as u64);
    let ds = dataset_for(cfg, base, sub_seed)?;
    let (tr, te) = split_indices(ds.n_samples(), cfg.train_fraction, sub_seed)?;
    let train = ds.select_rows(&tr)?;
    let test = ds.select_rows(&te)?;
    let p = prepare(
        train.features(),
        train.target(),
        cfg.task,
        &cfg.transform,
        cfg.scaling,
        registry,
    )?;
    let test_inputs = p.stats.apply(&cfg.transform.apply(test.features(), registry)?)?;
    let family = cfg.family();
    let mut rows = Vec::new();

    if cfg.algorithm == Algorithm::ForwardSelection {
        let k_max = cfg.k_max.unwrap_or(0);
        let steps = forward_selection(&p.inputs, &p.threshold_target, k_max, cfg.task)?;
        for k in 1..=steps.len() {
            let tr_x = selected_columns(&p.inputs, &steps[..k]);
            let te_x = selected_columns(&test_inputs, &steps[..k]);
            rows.push(ReportRow {
                setting: k - 1,
                epsilon: None,
                k: Some(k),
                repetition: rep,
                seed: sub_seed,
                d: k,
                score: score_reduced(&tr_x, train.target(), &te_x, test.target(), cfg.task)?,
            });
        }
        return Ok(rows);
    }

    for (s, epsilon) in epsilon_settings(cfg).into_iter().enumerate() {
        let rc = ReductionConfig {
            epsilon: epsilon.unwrap_or(0.0),
            transform: cfg.transform.clone(),
            aggregation: cfg.aggregation.clone(),
            family: Some(family),
        };
        let aggregation = match cfg.algorithm {
            Algorithm::LinCfa => AggregationSpec::Mean,
            _ => cfg.aggregation.clone(),
        };
        let part = partition_with(cfg.algorithm, &p.inputs, &p.threshold_target, &rc, registry)?;
        let te_x = part.apply(&test_inputs, &aggregation, registry)?;
        let score = score_reduced(part.representatives(), train.target(), &te_x, test.target(), cfg.task)?;
        rows.push(ReportRow {
            setting: s,
            epsilon,
            k: None,
            repetition: rep,
            seed: sub_seed,
            d: part.n_clusters(),
            score,
        });
    }
    Ok(rows)
}

/// Runs every repetition (in parallel) and summarizes per setting. Row
/// order is (setting, repetition) regardless of scheduling.
pub fn run_experiment(cfg: &ExperimentConfig, registry: &Registry) -> Result<ExperimentReport> {
    run_experiment_with(cfg, registry, true)
}

pub fn run_experiment_with(cfg: &ExperimentConfig, registry: &Registry, parallel: bool) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let base = load_base(cfg)?;
    let one = |rep: usize| {
        run_repetition(cfg, &base, rep, registry).map_err(|e| Error::Repetition {
            repetition: rep,
            source: Box::new(e),
        })
    };
    let per_rep: Vec<Vec<ReportRow>> = if parallel {
        (0..cfg.repetitions).into_par_iter().map(one).collect::<Result<_>>()?
    } else {
        (0..cfg.repetitions).map(one).collect::<Result<_>>()?
    };
    let mut rows: Vec<ReportRow> = per_rep.into_iter().flatten().collect();
    rows.sort_by_key(|r| (r.setting, r.repetition));

    let n_settings = rows.iter().map(|r| r.setting + 1).max().unwrap_or(0);
    let summary = (0..n_settings)
        .map(|s| {
            let sel: Vec<&ReportRow> = rows.iter().filter(|r| r.setting == s).collect();
            let ds: Vec<f64> = sel.iter().map(|r| r.d as f64).collect();
            let sc: Vec<f64> = sel.iter().map(|r| r.score).collect();
            let (d_mean, d_half_width) = mean_half_width(&ds);
            let (score_mean, score_half_width) = mean_half_width(&sc);
            SettingSummary {
                epsilon: sel[0].epsilon,
                k: sel[0].k,
                d_mean,
                d_half_width,
                score_mean,
                score_half_width,
                repetitions: sel.len(),
                single_run: sel.len() == 1,
            }
        })
        .collect();
    Ok(ExperimentReport {
        rows,
        summary,
        metadata: ReportMetadata {
            seed: cfg.seed,
            config_hash: cfg.hash()?,
            score: match cfg.task {
                Task::Regression => "r2".into(),
                Task::Classification => "accuracy".into(),
            },
            wall_time_seconds: start.elapsed().as_secs_f64(),
        },
    })
}
