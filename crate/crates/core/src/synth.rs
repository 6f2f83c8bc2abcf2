//! Synthetic benchmarks: each feature mixes a random earlier feature with
//! fresh uniform noise, and the target is linear in the features or in
//! their squares.
//!
//! The PRNG is ChaCha8 seeded with `seed_from_u64`. Draw order is fixed:
//! weights (when not given), then the parent of every feature, then the
//! rows, each row taking D uniforms followed by one standard normal.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::estimators::mean;
use crate::model::{Dataset, Form, GenerativeSpec, Matrix, Task, MIX_FRESH, MIX_PARENT};

/// Weights and parent indices, the part of the model that does not depend
/// on n. `parents[0]` is unused.
#[derive(Clone, Debug, PartialEq)]
pub struct Structure {
    pub weights: Vec<f64>,
    pub parents: Vec<usize>,
}

fn draw_structure(spec: &GenerativeSpec, rng: &mut ChaCha8Rng) -> Structure {
    let weights = match &spec.true_weights {
        Some(w) => w.clone(),
        None => (0..spec.dims).map(|_| rng.random::<f64>()).collect(),
    };
    let mut parents = vec![0; spec.dims];
    for (i, p) in parents.iter_mut().enumerate().skip(1) {
        *p = rng.random_range(0..i);
    }
    Structure { weights, parents }
}

/// Structure the generator would use for `spec`, without drawing rows.
pub fn structure(spec: &GenerativeSpec) -> Result<Structure> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok(draw_structure(spec, &mut rng))
}

fn generate(spec: &GenerativeSpec, n: usize) -> Result<Dataset> {
    spec.validate()?;
    if n < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: n });
    }
    let d = spec.dims;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let st = draw_structure(spec, &mut rng);
    let mut x = Matrix::zeros(n, d);
    let mut y = Vec::with_capacity(n);
    let mut row = vec![0.0; d];
    for r in 0..n {
        for i in 0..d {
            let u: f64 = rng.random();
            row[i] = if i == 0 { u } else { MIX_PARENT * row[st.parents[i]] + MIX_FRESH * u };
        }
        let z: f64 = rng.sample(StandardNormal);
        let signal: f64 = match spec.form {
            Form::LinearInX => row.iter().zip(&st.weights).map(|(v, w)| w * v).sum(),
            Form::LinearInXSquared => row.iter().zip(&st.weights).map(|(v, w)| w * v * v).sum(),
        };
        for (i, v) in row.iter().enumerate() {
            x[(r, i)] = *v;
        }
        y.push(signal + spec.noise_sigma * z);
    }
    let names = (1..=d).map(|i| format!("x{i}")).collect();
    Dataset::new(x, y, Task::Regression, names, "y")
}

pub fn gen_linear(spec: &GenerativeSpec, n: usize) -> Result<Dataset> {
    if spec.form != Form::LinearInX {
        return Err(Error::Config("gen_linear needs the linear form".into()));
    }
    generate(spec, n)
}

pub fn gen_quadratic(spec: &GenerativeSpec, n: usize) -> Result<Dataset> {
    if spec.form != Form::LinearInXSquared {
        return Err(Error::Config("gen_quadratic needs the squared form".into()));
    }
    generate(spec, n)
}

/// Dispatches on `spec.form`.
pub fn gen_dataset(spec: &GenerativeSpec, n: usize) -> Result<Dataset> {
    generate(spec, n)
}

/// y ≥ 0 becomes 1, everything else 0. A dataset that is already a
/// classification one is returned as is.
pub fn to_classification(ds: Dataset) -> Result<Dataset> {
    if ds.task() == Task::Classification {
        return Ok(ds);
    }
    let feats = ds.features().clone();
    let target = ds.target().iter().map(|&v| if v >= 0.0 { 1.0 } else { 0.0 }).collect();
    Dataset::new(
        feats,
        target,
        Task::Classification,
        ds.column_names().to_vec(),
        ds.target_name(),
    )
}

/// Subtracts the sample mean of the target before thresholding, so both
/// classes are populated.
pub fn to_centered_classification(ds: Dataset) -> Result<Dataset> {
    let m = mean(ds.target());
    let target = ds.target().iter().map(|v| v - m).collect();
    let shifted = Dataset::new(
        ds.features().clone(),
        target,
        Task::Regression,
        ds.column_names().to_vec(),
        ds.target_name(),
    )?;
    to_classification(shifted)
}
