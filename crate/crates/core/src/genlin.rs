//! Partitioning driven by the bound on the expected deviance increase.

use crate::error::{Error, Result};
use crate::estimators::{cov_unchecked, var_unchecked};
use crate::model::{ExponentialFamily, FamilyKind, Matrix, Partition, ReductionConfig, Registry};
use crate::scan::greedy_scan;

/// b(θ) = θ²/2, identity link. φ is 1 for thresholding.
pub fn make_gaussian_family() -> ExponentialFamily {
    ExponentialFamily {
        kind: FamilyKind::Gaussian,
        scale_phi: 1.0,
    }
}

/// b(θ) = log(1 + e^θ), logit link.
pub fn make_bernoulli_family() -> ExponentialFamily {
    ExponentialFamily {
        kind: FamilyKind::Bernoulli,
        scale_phi: 1.0,
    }
}

/// Both sides of the admission test; aggregate iff `lhs - ε·rhs ≤ 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DevianceSides {
    pub lhs: f64,
    pub rhs: f64,
}

pub fn deviance_sides(
    current_rep: &[f64],
    candidate: &[f64],
    members_aggregated: &[f64],
    sum_col: &[f64],
    y: &[f64],
    family: &ExponentialFamily,
) -> Result<DevianceSides> {
    let n = y.len();
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    if [current_rep, candidate, members_aggregated, sum_col]
        .iter()
        .any(|c| c.len() != n)
    {
        return Err(Error::InvalidData("column length differs from target length".into()));
    }
    Ok(sides(current_rep, candidate, members_aggregated, sum_col, y, family.b_second_at_zero()))
}

fn sides(rep: &[f64], cand: &[f64], merged: &[f64], sum: &[f64], y: &[f64], b2: f64) -> DevianceSides {
    let lhs = cov_unchecked(rep, y).abs() + cov_unchecked(cand, y).abs() + 0.5 * b2 * var_unchecked(merged);
    let rhs = cov_unchecked(merged, y).abs() + 0.5 * b2 * var_unchecked(sum);
    DevianceSides { lhs, rhs }
}

/// L - ε·R. The candidate is aggregated when the result is ≤ 0.
pub fn genlin_threshold(
    current_rep: &[f64],
    candidate: &[f64],
    members_aggregated: &[f64],
    sum_col: &[f64],
    y: &[f64],
    family: &ExponentialFamily,
    epsilon: f64,
) -> Result<f64> {
    let s = deviance_sides(current_rep, candidate, members_aggregated, sum_col, y, family)?;
    Ok(s.lhs - epsilon * s.rhs)
}

pub fn genlin_partition(
    inputs: &Matrix,
    y: &[f64],
    config: &ReductionConfig,
    registry: &Registry,
) -> Result<Partition> {
    genlin_partition_traced(inputs, y, config, registry).map(|(p, _)| p)
}

/// Like [`genlin_partition`], also returning both sides of every test.
pub fn genlin_partition_traced(
    inputs: &Matrix,
    y: &[f64],
    config: &ReductionConfig,
    registry: &Registry,
) -> Result<(Partition, Vec<DevianceSides>)> {
    config.validate()?;
    let family = config
        .family
        .ok_or_else(|| Error::Config("deviance-based partitioning needs a family".into()))?;
    if inputs.nrows() != y.len() {
        return Err(Error::InvalidData(format!(
            "{} rows but {} targets",
            inputs.nrows(),
            y.len()
        )));
    }
    if y.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: y.len() });
    }
    if family.kind == FamilyKind::Bernoulli && y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::InvalidData("Bernoulli family needs a 0/1 target".into()));
    }
    let b2 = family.b_second_at_zero();
    let mut sum = vec![0.0; y.len()];
    let mut trace = Vec::new();
    let clusters = greedy_scan(inputs, &config.aggregation, registry, |c| {
        sum.iter_mut()
            .zip(c.representative.iter().zip(c.candidate_column))
            .for_each(|(s, (a, b))| *s = a + b);
        let s = sides(c.representative, c.candidate_column, c.merged, &sum, y, b2);
        trace.push(s);
        Ok(s.lhs - config.epsilon * s.rhs <= 0.0)
    })?;
    let p = Partition::build(clusters, inputs, &config.aggregation, registry)?;
    Ok((p, trace))
}
