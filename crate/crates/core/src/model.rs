//! Domain types shared across the toolkit.
//!
//! Indices are 0-based everywhere in this crate. Anything written to disk
//! refers to columns by name.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column-major dense matrix; samples are rows, inputs are columns.
pub type Matrix = DMatrix<f64>;

/// Borrow column `j` of a column-major matrix as a contiguous slice.
pub fn column(m: &Matrix, j: usize) -> &[f64] {
    let n = m.nrows();
    &m.as_slice()[j * n..(j + 1) * n]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Regression,
    Classification,
}

/// Feature matrix plus target. Checked once at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Matrix,
    target: Vec<f64>,
    task: Task,
    column_names: Vec<String>,
    target_name: String,
}

impl Dataset {
    pub fn new(
        features: Matrix,
        target: Vec<f64>,
        task: Task,
        column_names: Vec<String>,
        target_name: impl Into<String>,
    ) -> Result<Self> {
        let (n, d) = features.shape();
        if n < 3 {
            return Err(Error::InsufficientSamples { needed: 3, got: n });
        }
        if d == 0 {
            return Err(Error::InvalidData("dataset has no feature columns".into()));
        }
        if target.len() != n {
            return Err(Error::InvalidData(format!(
                "target has {} values but the feature matrix has {n} rows",
                target.len()
            )));
        }
        if column_names.len() != d {
            return Err(Error::InvalidData(format!(
                "{} column names for {d} columns",
                column_names.len()
            )));
        }
        if features.iter().chain(target.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite value in dataset".into()));
        }
        if task == Task::Classification && target.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::InvalidData(
                "classification target must only contain 0 and 1".into(),
            ));
        }
        Ok(Self {
            features,
            target,
            task,
            column_names,
            target_name: target_name.into(),
        })
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    /// Same data with a different task flag, re-validated.
    pub fn with_task(self, task: Task) -> Result<Self> {
        Self::new(
            self.features,
            self.target,
            task,
            self.column_names,
            self.target_name,
        )
    }

    /// Rows selected by `rows`, in that order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let d = self.n_features();
        let features = Matrix::from_fn(rows.len(), d, |r, c| self.features[(rows[r], c)]);
        let target = rows.iter().map(|&r| self.target[r]).collect();
        Self::new(
            features,
            target,
            self.task,
            self.column_names.clone(),
            self.target_name.clone(),
        )
    }
}

/// Per-column location (and optionally scale) learned on training rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenteringStats {
    pub column_means: Vec<f64>,
    /// Divisors applied after centering; all ones when only centering.
    pub column_scales: Vec<f64>,
}

impl CenteringStats {
    pub fn apply(&self, data: &Matrix) -> Result<Matrix> {
        if data.ncols() != self.column_means.len() {
            return Err(Error::InvalidData(format!(
                "expected {} columns, got {}",
                self.column_means.len(),
                data.ncols()
            )));
        }
        let mut out = data.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            let (m, s) = (self.column_means[j], self.column_scales[j]);
            col.iter_mut().for_each(|v| *v = (*v - m) / s);
        }
        Ok(out)
    }
}

/// Column function for user-registered transforms.
pub type ColumnFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
/// Member-set function for user-registered aggregations.
pub type AggregateFn = Arc<dyn Fn(&[&[f64]]) -> Vec<f64> + Send + Sync>;

/// Named custom transforms and aggregations, populated at startup.
#[derive(Clone, Default)]
pub struct Registry {
    transforms: BTreeMap<String, ColumnFn>,
    aggregations: BTreeMap<String, AggregateFn>,
}

impl fmt::Debug for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry")
            .field("transforms", &self.transforms.keys().collect::<Vec<_>>())
            .field("aggregations", &self.aggregations.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Registry {
    pub fn register_transform(&mut self, name: impl Into<String>, f: ColumnFn) {
        self.transforms.insert(name.into(), f);
    }

    pub fn register_aggregation(&mut self, name: impl Into<String>, f: AggregateFn) {
        self.aggregations.insert(name.into(), f);
    }

    fn transform(&self, name: &str) -> Result<&ColumnFn> {
        self.transforms
            .get(name)
            .ok_or_else(|| Error::Config(format!("unknown transform `{name}`")))
    }

    fn aggregation(&self, name: &str) -> Result<&AggregateFn> {
        self.aggregations
            .get(name)
            .ok_or_else(|| Error::Config(format!("unknown aggregation `{name}`")))
    }
}

/// Input map applied column-wise to the raw features.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TransformSpec {
    Identity,
    Square,
    Custom(String),
}

impl TransformSpec {
    pub fn name(&self) -> &str {
        match self {
            Self::Identity => "identity",
            Self::Square => "square",
            Self::Custom(name) => name,
        }
    }

    pub fn parse(name: &str) -> Self {
        match name {
            "identity" => Self::Identity,
            "square" => Self::Square,
            other => Self::Custom(other.to_string()),
        }
    }

    pub fn apply(&self, raw: &Matrix, registry: &Registry) -> Result<Matrix> {
        match self {
            Self::Identity => Ok(raw.clone()),
            Self::Square => Ok(raw.map(|v| v * v)),
            Self::Custom(name) => {
                let f = registry.transform(name)?;
                let n = raw.nrows();
                let mut out = Matrix::zeros(n, raw.ncols());
                for j in 0..raw.ncols() {
                    let col = f(column(raw, j));
                    if col.len() != n {
                        return Err(Error::InvalidData(format!(
                            "transform `{name}` returned {} rows, expected {n}",
                            col.len()
                        )));
                    }
                    out.column_mut(j).copy_from_slice(&col);
                }
                Ok(out)
            }
        }
    }
}

/// The function that turns a set of member columns into one column.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AggregationSpec {
    Mean,
    /// Sum of the squared member columns.
    SumOfSquares,
    Custom(String),
}

impl AggregationSpec {
    pub fn name(&self) -> &str {
        match self {
            Self::Mean => "mean",
            Self::SumOfSquares => "sum_of_squares",
            Self::Custom(name) => name,
        }
    }

    pub fn parse(name: &str) -> Self {
        match name {
            "mean" => Self::Mean,
            "sum_of_squares" | "sumofsquares" | "sqsum" => Self::SumOfSquares,
            other => Self::Custom(other.to_string()),
        }
    }

    /// Aggregates `members` in the given order. Built-ins fold left to
    /// right so the result matches the incremental accumulator bit for bit.
    pub fn aggregate(&self, members: &[&[f64]], registry: &Registry) -> Result<Vec<f64>> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidData("cannot aggregate an empty member set".into()))?;
        let n = first.len();
        if members.iter().any(|m| m.len() != n) {
            return Err(Error::InvalidData("member columns differ in length".into()));
        }
        match self {
            Self::Mean => {
                let mut acc = first.to_vec();
                for m in &members[1..] {
                    acc.iter_mut().zip(m.iter()).for_each(|(a, v)| *a += v);
                }
                let k = members.len() as f64;
                acc.iter_mut().for_each(|a| *a /= k);
                Ok(acc)
            }
            Self::SumOfSquares => {
                let mut acc: Vec<f64> = first.iter().map(|v| v * v).collect();
                for m in &members[1..] {
                    acc.iter_mut().zip(m.iter()).for_each(|(a, v)| *a += v * v);
                }
                Ok(acc)
            }
            Self::Custom(name) => {
                let out = registry.aggregation(name)?(members);
                if out.len() != n {
                    return Err(Error::InvalidData(format!(
                        "aggregation `{name}` returned {} rows, expected {n}",
                        out.len()
                    )));
                }
                Ok(out)
            }
        }
    }
}

macro_rules! serde_by_name {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_str(self.name())
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let name = String::deserialize(d)?;
                Ok(Self::parse(&name))
            }
        }
    };
}

serde_by_name!(TransformSpec);
serde_by_name!(AggregationSpec);

/// Ordered disjoint clusters of input indices and their aggregated,
/// training-centered representative columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    clusters: Vec<Vec<usize>>,
    representatives: Matrix,
    representative_means: Vec<f64>,
}

impl Partition {
    /// Builds the partition over `inputs`, computing each representative as
    /// the aggregation of its members, centered to mean zero.
    pub fn build(
        clusters: Vec<Vec<usize>>,
        inputs: &Matrix,
        aggregation: &AggregationSpec,
        registry: &Registry,
    ) -> Result<Self> {
        validate_clusters(&clusters, inputs.ncols())?;
        let n = inputs.nrows();
        let mut reps = Matrix::zeros(n, clusters.len());
        let mut means = Vec::with_capacity(clusters.len());
        for (k, members) in clusters.iter().enumerate() {
            let cols: Vec<&[f64]> = members.iter().map(|&j| column(inputs, j)).collect();
            let mut rep = aggregation.aggregate(&cols, registry)?;
            let mean = rep.iter().sum::<f64>() / n as f64;
            rep.iter_mut().for_each(|v| *v -= mean);
            reps.column_mut(k).copy_from_slice(&rep);
            means.push(mean);
        }
        Ok(Self {
            clusters,
            representatives: reps,
            representative_means: means,
        })
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn n_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn representatives(&self) -> &Matrix {
        &self.representatives
    }

    /// Training means removed from each representative.
    pub fn representative_means(&self) -> &[f64] {
        &self.representative_means
    }

    /// Aggregates new rows with the fitted clusters, reusing training means.
    pub fn apply(
        &self,
        inputs: &Matrix,
        aggregation: &AggregationSpec,
        registry: &Registry,
    ) -> Result<Matrix> {
        let n = inputs.nrows();
        let mut out = Matrix::zeros(n, self.clusters.len());
        for (k, members) in self.clusters.iter().enumerate() {
            let cols: Vec<&[f64]> = members.iter().map(|&j| column(inputs, j)).collect();
            let rep = aggregation.aggregate(&cols, registry)?;
            let mean = self.representative_means[k];
            out.column_mut(k)
                .iter_mut()
                .zip(rep)
                .for_each(|(o, v)| *o = v - mean);
        }
        Ok(out)
    }

    pub fn to_file(
        &self,
        column_names: &[String],
        aggregation: &AggregationSpec,
        transform: &TransformSpec,
    ) -> PartitionFile {
        PartitionFile {
            clusters: self
                .clusters
                .iter()
                .map(|c| c.iter().map(|&j| column_names[j].clone()).collect())
                .collect(),
            aggregation: aggregation.clone(),
            transform: transform.clone(),
        }
    }
}

fn validate_clusters(clusters: &[Vec<usize>], n_inputs: usize) -> Result<()> {
    let mut seen = HashSet::with_capacity(n_inputs);
    for c in clusters {
        if c.is_empty() {
            return Err(Error::InvalidData("partition contains an empty cluster".into()));
        }
        for &j in c {
            if j >= n_inputs {
                return Err(Error::InvalidData(format!("input index {j} out of range")));
            }
            if !seen.insert(j) {
                return Err(Error::InvalidData(format!("input {j} assigned twice")));
            }
        }
    }
    if seen.len() != n_inputs {
        return Err(Error::InvalidData(format!(
            "partition covers {} of {n_inputs} inputs",
            seen.len()
        )));
    }
    Ok(())
}

/// On-disk form of a partition: clusters by column name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionFile {
    pub clusters: Vec<Vec<String>>,
    pub aggregation: AggregationSpec,
    pub transform: TransformSpec,
}

impl PartitionFile {
    /// Maps member names back to indices in `column_names`.
    pub fn resolve(&self, column_names: &[String]) -> Result<Vec<Vec<usize>>> {
        self.clusters
            .iter()
            .map(|c| {
                c.iter()
                    .map(|name| {
                        column_names.iter().position(|n| n == name).ok_or_else(|| {
                            Error::InvalidData(format!("partition refers to unknown column `{name}`"))
                        })
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Gaussian,
    Bernoulli,
}

/// Canonical exponential family with density exp((yθ - b(θ))/φ) up to a
/// normalizer that never enters a computed quantity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentialFamily {
    pub kind: FamilyKind,
    pub scale_phi: f64,
}

impl ExponentialFamily {
    pub fn name(&self) -> &'static str {
        match self.kind {
            FamilyKind::Gaussian => "gaussian",
            FamilyKind::Bernoulli => "bernoulli",
        }
    }

    pub fn b(&self, theta: f64) -> f64 {
        match self.kind {
            FamilyKind::Gaussian => 0.5 * theta * theta,
            // softplus, stable for large |θ|
            FamilyKind::Bernoulli => theta.max(0.0) + (-theta.abs()).exp().ln_1p(),
        }
    }

    /// Mean function b'(θ).
    pub fn b_prime(&self, theta: f64) -> f64 {
        match self.kind {
            FamilyKind::Gaussian => theta,
            FamilyKind::Bernoulli => sigmoid(theta),
        }
    }

    /// Variance function b''(θ).
    pub fn b_second(&self, theta: f64) -> f64 {
        match self.kind {
            FamilyKind::Gaussian => 1.0,
            FamilyKind::Bernoulli => {
                let p = sigmoid(theta);
                p * (1.0 - p)
            }
        }
    }

    pub fn b_second_at_zero(&self) -> f64 {
        self.b_second(0.0)
    }

    /// Canonical link g(μ) = θ.
    pub fn link(&self, mu: f64) -> f64 {
        match self.kind {
            FamilyKind::Gaussian => mu,
            FamilyKind::Bernoulli => (mu / (1.0 - mu)).ln(),
        }
    }

    pub fn inverse_link(&self, theta: f64) -> f64 {
        self.b_prime(theta)
    }
}

pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Hyperparameters of one reduction run.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionConfig {
    pub epsilon: f64,
    pub transform: TransformSpec,
    pub aggregation: AggregationSpec,
    /// Required by the deviance-driven algorithm only.
    pub family: Option<ExponentialFamily>,
}

impl ReductionConfig {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            transform: TransformSpec::Identity,
            aggregation: AggregationSpec::Mean,
            family: None,
        }
    }

    pub fn with_aggregation(mut self, aggregation: AggregationSpec) -> Self {
        self.aggregation = aggregation;
        self
    }

    pub fn with_transform(mut self, transform: TransformSpec) -> Self {
        self.transform = transform;
        self
    }

    pub fn with_family(mut self, family: ExponentialFamily) -> Self {
        self.family = Some(family);
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !self.epsilon.is_finite() {
            return Err(Error::Config(format!("epsilon must be finite, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// Shape of the noiseless signal in the synthetic generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    LinearInX,
    LinearInXSquared,
}

/// Weight on the parent feature when building a new synthetic feature.
pub const MIX_PARENT: f64 = 0.7;
/// Weight on the fresh uniform draw.
pub const MIX_FRESH: f64 = 0.3;

/// Synthetic ground truth: features, weights, noise level, seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerativeSpec {
    pub dims: usize,
    /// Drawn from U[0,1] with the spec seed when absent.
    #[serde(default)]
    pub true_weights: Option<Vec<f64>>,
    pub noise_sigma: f64,
    pub form: Form,
    #[serde(default)]
    pub seed: u64,
}

impl GenerativeSpec {
    pub fn linear(dims: usize, noise_sigma: f64, seed: u64) -> Self {
        Self {
            dims,
            true_weights: None,
            noise_sigma,
            form: Form::LinearInX,
            seed,
        }
    }

    pub fn quadratic(dims: usize, noise_sigma: f64, seed: u64) -> Self {
        Self {
            form: Form::LinearInXSquared,
            ..Self::linear(dims, noise_sigma, seed)
        }
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Self {
        self.true_weights = Some(weights);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.dims == 0 {
            return Err(Error::Config("generator needs at least one feature".into()));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::Config(format!(
                "noise sigma must be finite and non-negative, got {}",
                self.noise_sigma
            )));
        }
        if let Some(w) = &self.true_weights {
            if w.len() != self.dims {
                return Err(Error::Config(format!(
                    "{} weights for {} features",
                    w.len(),
                    self.dims
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(d: usize) -> Vec<String> {
        (1..=d).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn dataset_rejects_bad_input() {
        let x = Matrix::from_element(2, 1, 0.0);
        assert!(matches!(
            Dataset::new(x, vec![0.0; 2], Task::Regression, names(1), "y"),
            Err(Error::InsufficientSamples { .. })
        ));
        let mut x = Matrix::from_element(4, 2, 0.0);
        x[(1, 1)] = f64::NAN;
        assert!(Dataset::new(x, vec![0.0; 4], Task::Regression, names(2), "y").is_err());
        let x = Matrix::from_element(4, 1, 0.0);
        assert!(
            Dataset::new(x, vec![0.0, 1.0, 2.0, 0.0], Task::Classification, names(1), "y").is_err()
        );
    }

    #[test]
    fn mean_of_singleton_is_identity() {
        let col = [1.5, -2.0, 3.25];
        let out = AggregationSpec::Mean
            .aggregate(&[&col], &Registry::default())
            .unwrap();
        assert_eq!(out, col.to_vec());
    }

    #[test]
    fn sum_of_squares_aggregation() {
        let a = [1.0, 2.0];
        let b = [3.0, -1.0];
        let out = AggregationSpec::SumOfSquares
            .aggregate(&[&a, &b], &Registry::default())
            .unwrap();
        assert_eq!(out, vec![10.0, 5.0]);
    }

    #[test]
    fn custom_aggregation_goes_through_registry() {
        let mut reg = Registry::default();
        reg.register_aggregation(
            "max",
            Arc::new(|cols: &[&[f64]]| {
                (0..cols[0].len())
                    .map(|i| cols.iter().map(|c| c[i]).fold(f64::MIN, f64::max))
                    .collect()
            }),
        );
        let agg = AggregationSpec::parse("max");
        let out = agg.aggregate(&[&[1.0, 5.0], &[2.0, 0.0]], &reg).unwrap();
        assert_eq!(out, vec![2.0, 5.0]);
        assert!(agg.aggregate(&[&[1.0]], &Registry::default()).is_err());
    }

    #[test]
    fn custom_transform_goes_through_registry() {
        let mut reg = Registry::default();
        reg.register_transform("neg", Arc::new(|c: &[f64]| c.iter().map(|v| -v).collect()));
        let m = Matrix::from_column_slice(2, 1, &[1.0, -3.0]);
        let out = TransformSpec::parse("neg").apply(&m, &reg).unwrap();
        assert_eq!(out.as_slice(), &[-1.0, 3.0]);
    }

    #[test]
    fn partition_validation() {
        let inputs = Matrix::from_fn(4, 3, |r, c| (r * 3 + c) as f64);
        let reg = Registry::default();
        let agg = AggregationSpec::Mean;
        assert!(Partition::build(vec![vec![0, 1], vec![1, 2]], &inputs, &agg, &reg).is_err());
        assert!(Partition::build(vec![vec![0, 1]], &inputs, &agg, &reg).is_err());
        assert!(Partition::build(vec![vec![0], vec![], vec![1, 2]], &inputs, &agg, &reg).is_err());
        let p = Partition::build(vec![vec![0, 2], vec![1]], &inputs, &agg, &reg).unwrap();
        assert_eq!(p.n_clusters(), 2);
        for k in 0..2 {
            let mean: f64 = column(p.representatives(), k).iter().sum::<f64>() / 4.0;
            assert!(mean.abs() < 1e-12);
        }
        // training rows pushed through `apply` reproduce the representatives
        assert_eq!(&p.apply(&inputs, &agg, &reg).unwrap(), p.representatives());
    }

    #[test]
    fn partition_file_round_trip() {
        let inputs = Matrix::from_fn(5, 4, |r, c| ((r + 1) * (c + 2)) as f64 * 0.37);
        let reg = Registry::default();
        let agg = AggregationSpec::Mean;
        let p = Partition::build(vec![vec![3, 0], vec![1], vec![2]], &inputs, &agg, &reg).unwrap();
        let names = names(4);
        let file = p.to_file(&names, &agg, &TransformSpec::Identity);
        let json = serde_json::to_string(&file).unwrap();
        assert!(json.contains("\"x4\""));
        let back: PartitionFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back, file);
        let rebuilt = Partition::build(back.resolve(&names).unwrap(), &inputs, &agg, &reg).unwrap();
        assert_eq!(rebuilt, p);
    }

    #[test]
    fn family_second_derivatives_at_zero() {
        let g = ExponentialFamily {
            kind: FamilyKind::Gaussian,
            scale_phi: 1.0,
        };
        let b = ExponentialFamily {
            kind: FamilyKind::Bernoulli,
            scale_phi: 1.0,
        };
        assert_eq!(g.b_second_at_zero(), 1.0);
        assert_eq!(b.b_second_at_zero(), 0.25);
        assert_eq!(b.inverse_link(0.0), 0.5);
        assert!((b.link(b.inverse_link(1.3)) - 1.3).abs() < 1e-12);
        assert!((b.b(800.0) - 800.0).abs() < 1e-9);
    }
}
