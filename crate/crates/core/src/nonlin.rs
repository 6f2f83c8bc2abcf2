//! Partitioning driven by the loss of training R² when two inputs are
//! replaced by their aggregate.

use crate::error::{Error, Result};
use crate::estimators::{r2_pair, r2_single, var_unchecked};
use crate::model::{Matrix, Partition, ReductionConfig, Registry};
use crate::scan::greedy_scan;

/// One threshold evaluation recorded during a scan.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdTrace {
    pub seed: usize,
    pub candidate: usize,
    /// `None` when the pair was collinear.
    pub r2_bivariate: Option<f64>,
    pub r2_aggregated: f64,
    pub value: f64,
}

fn check_columns(cols: &[&[f64]], y: &[f64]) -> Result<f64> {
    let n = y.len();
    if n < 4 {
        return Err(Error::InsufficientSamples { needed: 4, got: n });
    }
    if cols.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidData("column length differs from target length".into()));
    }
    let vy = var_unchecked(y);
    if !(vy > 0.0) {
        return Err(Error::DegenerateTarget("target has zero variance".into()));
    }
    Ok(vy)
}

fn evaluate(rep: &[f64], cand: &[f64], merged: &[f64], y: &[f64], vy: f64, eps: f64) -> (Option<f64>, f64, f64) {
    let agg = r2_single(merged, y, vy);
    match r2_pair(rep, cand, y, vy) {
        Some(biv) => (Some(biv), agg, (biv - agg) - eps),
        None => (None, agg, f64::NEG_INFINITY),
    }
}

/// (R²_bivariate - R²_aggregated) - ε, or -∞ when the two columns are
/// collinear. The candidate is aggregated when the result is ≤ 0.
///
/// `merged` is the aggregate of the full member set including the candidate.
pub fn nonlin_threshold(
    current_rep: &[f64],
    candidate: &[f64],
    merged: &[f64],
    y: &[f64],
    epsilon: f64,
) -> Result<f64> {
    let vy = check_columns(&[current_rep, candidate, merged], y)?;
    Ok(evaluate(current_rep, candidate, merged, y, vy, epsilon).2)
}

pub fn nonlin_partition(
    inputs: &Matrix,
    y: &[f64],
    config: &ReductionConfig,
    registry: &Registry,
) -> Result<Partition> {
    nonlin_partition_traced(inputs, y, config, registry).map(|(p, _)| p)
}

/// Like [`nonlin_partition`], also returning every threshold evaluation.
pub fn nonlin_partition_traced(
    inputs: &Matrix,
    y: &[f64],
    config: &ReductionConfig,
    registry: &Registry,
) -> Result<(Partition, Vec<ThresholdTrace>)> {
    config.validate()?;
    if inputs.nrows() != y.len() {
        return Err(Error::InvalidData(format!(
            "{} rows but {} targets",
            inputs.nrows(),
            y.len()
        )));
    }
    if inputs.ncols() == 0 {
        return Err(Error::InvalidData("no input columns".into()));
    }
    let vy = check_columns(&[], y)?;
    let mut trace = Vec::new();
    let clusters = greedy_scan(inputs, &config.aggregation, registry, |c| {
        let (biv, agg, value) = evaluate(
            c.representative,
            c.candidate_column,
            c.merged,
            y,
            vy,
            config.epsilon,
        );
        trace.push(ThresholdTrace {
            seed: c.seed,
            candidate: c.candidate,
            r2_bivariate: biv,
            r2_aggregated: agg,
            value,
        });
        Ok(value <= 0.0)
    })?;
    let p = Partition::build(clusters, inputs, &config.aggregation, registry)?;
    Ok((p, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{center_columns, ols_fit, r2_score};
    use crate::model::{column, AggregationSpec};

    fn centered(v: &[f64]) -> Vec<f64> {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| x - m).collect()
    }

    #[test]
    fn duplicate_candidate_gives_sentinel() {
        let a = centered(&[1.0, 2.0, 0.5, -1.0, 3.0]);
        let y = [0.2, 1.0, -0.3, 0.4, 2.0];
        assert_eq!(nonlin_threshold(&a, &a, &a, &y, 0.0).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn very_negative_epsilon_never_aggregates() {
        let a = centered(&[1.0, 2.0, 0.5, -1.0, 3.0]);
        let b = centered(&[0.0, -1.0, 2.0, 1.0, 0.5]);
        let m: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x + y) / 2.0).collect();
        let y = [0.2, 1.0, -0.3, 0.4, 2.0];
        assert!(nonlin_threshold(&a, &b, &m, &y, -10.0).unwrap() > 0.0);
    }

    /// Training R² of the grid-searched least-squares fit.
    fn grid_r2(cols: &[&[f64]], y: &[f64]) -> f64 {
        let yc = centered(y);
        let loss = |w: &[f64]| -> f64 {
            (0..y.len())
                .map(|i| {
                    let p: f64 = cols.iter().zip(w).map(|(c, w)| c[i] * w).sum();
                    (yc[i] - p).powi(2)
                })
                .sum()
        };
        let k = cols.len();
        let mut w = vec![0.0; k];
        let mut half = 10.0;
        for _ in 0..60 {
            for d in 0..k {
                let mut best = (loss(&w), w[d]);
                for s in -20..=20 {
                    let mut t = w.clone();
                    t[d] = w[d] + half * s as f64 / 20.0;
                    let l = loss(&t);
                    if l < best.0 {
                        best = (l, t[d]);
                    }
                }
                w[d] = best.1;
            }
            half *= 0.5;
        }
        let sst: f64 = yc.iter().map(|v| v * v).sum();
        1.0 - loss(&w) / sst
    }

    #[test]
    fn six_sample_threshold_matches_grid_oracle() {
        let a = centered(&[0.9, -0.4, 1.3, 0.2, -1.1, 0.6]);
        let b = centered(&[0.5, 0.1, 1.0, -0.6, -0.9, 1.2]);
        let y = [1.4, -0.2, 2.0, -0.5, -1.8, 1.1];
        let m: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x + y) / 2.0).collect();
        let eps = 0.01;
        let expected = grid_r2(&[&a, &b], &y) - grid_r2(&[&m], &y) - eps;
        let got = nonlin_threshold(&a, &b, &m, &y, eps).unwrap();
        assert!((got - expected).abs() < 1e-6, "{got} vs {expected}");
    }

    #[test]
    fn aggregated_r2_matches_fitted_model() {
        let a = centered(&[0.9, -0.4, 1.3, 0.2, -1.1, 0.6]);
        let y = centered(&[1.4, -0.2, 2.0, -0.5, -1.8, 1.1]);
        let x = Matrix::from_column_slice(6, 1, &a);
        let fit = ols_fit(&x, &y).unwrap();
        let direct = r2_score(&y, &fit.linear_predictor(&x).unwrap()).unwrap();
        let vy = var_unchecked(&y);
        assert!((r2_single(&a, &y, vy) - direct).abs() < 1e-12);
    }

    #[test]
    fn copies_collapse_to_one_cluster() {
        let base = [0.3, -1.2, 0.8, 2.0, -0.4, 0.1, -1.5];
        let raw = Matrix::from_fn(7, 5, |r, _| base[r]);
        let (x, _) = center_columns(&raw).unwrap();
        let y = [1.0, -0.5, 0.2, 1.9, 0.0, 0.3, -2.0];
        for eps in [0.0, 0.5, 3.0] {
            let p = nonlin_partition(&x, &y, &ReductionConfig::new(eps), &Registry::default()).unwrap();
            assert_eq!(p.n_clusters(), 1);
        }
    }

    #[test]
    fn epsilon_boundaries() {
        let raw = Matrix::from_fn(30, 6, |r, c| (((r + 3) * (c + 5) * 7919) % 101) as f64 / 101.0);
        let (x, _) = center_columns(&raw).unwrap();
        let y: Vec<f64> = (0..30).map(|r| column(&x, 0)[r] - 2.0 * column(&x, 3)[r] + (r % 3) as f64).collect();
        let reg = Registry::default();
        let p = nonlin_partition(&x, &y, &ReductionConfig::new(-2.0), &reg).unwrap();
        assert_eq!(p.n_clusters(), 6);
        let p = nonlin_partition(&x, &y, &ReductionConfig::new(1.0), &reg).unwrap();
        assert_eq!(p.n_clusters(), 1);
    }

    #[test]
    fn trace_records_nested_r2() {
        let raw = Matrix::from_fn(25, 5, |r, c| (((r + 1) * (c + 2) * 104729) % 97) as f64 / 97.0);
        let (x, _) = center_columns(&raw).unwrap();
        let y: Vec<f64> = (0..25).map(|r| column(&x, 1)[r] + ((r * 7) % 5) as f64 * 0.1).collect();
        let cfg = ReductionConfig::new(0.05).with_aggregation(AggregationSpec::Mean);
        let (_, trace) = nonlin_partition_traced(&x, &y, &cfg, &Registry::default()).unwrap();
        assert!(!trace.is_empty());
        for t in trace {
            if let Some(b) = t.r2_bivariate {
                assert!(t.r2_aggregated <= b + 1e-9);
            }
        }
    }
}
