//! Fixtures shared by the benchmarks.

use cfa_core::estimators::standardize_columns;
use cfa_core::synth::gen_linear;
use cfa_core::{GenerativeSpec, Matrix};

/// Standardized inputs and target from the linear generator.
pub fn linear_fixture(dims: usize, n: usize, sigma: f64, seed: u64) -> (Matrix, Vec<f64>) {
    let ds = gen_linear(&GenerativeSpec::linear(dims, sigma, seed), n).expect("valid generator spec");
    let (x, _) = standardize_columns(ds.features()).expect("finite features");
    let y = ds.target();
    let m = y.iter().sum::<f64>() / y.len() as f64;
    (x, y.iter().map(|v| v - m).collect())
}
