//! Wrapper forward selection and the correlation-threshold LinCFA scan.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{accuracy, cov_unchecked, logistic_fit, mean, ols_fit, r2_score, var_unchecked, SINGULAR_TOL};
use crate::model::{column, AggregationSpec, Matrix, Partition, Registry, Task};
use crate::scan::greedy_scan;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub index: usize,
    /// Training score of the model on all features selected so far.
    pub score: f64,
}

fn training_score(x: &Matrix, y: &[f64], task: Task) -> Result<f64> {
    match task {
        Task::Regression => {
            let fit = ols_fit(x, y)?;
            r2_score(y, &fit.linear_predictor(x)?)
        }
        Task::Classification => {
            let fit = logistic_fit(x, y)?;
            accuracy(y, &fit.predict_class(x)?)
        }
    }
}

/// Greedy wrapper selection scored on the training data. Ties go to the
/// lowest index; candidates whose fit is singular are skipped. Stops early
/// when no candidate can be fitted.
pub fn forward_selection(x: &Matrix, y: &[f64], k_max: usize, task: Task) -> Result<Vec<SelectionStep>> {
    let (n, d) = x.shape();
    if k_max > d {
        return Err(Error::Config(format!("k_max {k_max} exceeds {d} features")));
    }
    if y.len() != n {
        return Err(Error::InvalidData(format!("{} targets for {n} rows", y.len())));
    }
    // regression fits have no intercept, so the target is centered here
    let target: Vec<f64> = match task {
        Task::Regression => {
            let m = mean(y);
            y.iter().map(|v| v - m).collect()
        }
        Task::Classification => y.to_vec(),
    };
    let mut chosen: Vec<usize> = Vec::new();
    let mut steps = Vec::new();
    while steps.len() < k_max {
        let scores: Vec<Option<f64>> = (0..d)
            .into_par_iter()
            .map(|j| {
                if chosen.contains(&j) {
                    return Ok(None);
                }
                let cols: Vec<usize> = chosen.iter().copied().chain(std::iter::once(j)).collect();
                let sub = x.select_columns(&cols);
                match training_score(&sub, &target, task) {
                    Ok(s) => Ok(Some(s)),
                    Err(Error::SingularDesign) => Ok(None),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<_>>()?;
        let mut best: Option<SelectionStep> = None;
        for (index, s) in scores.into_iter().enumerate() {
            if let Some(score) = s {
                if best.is_none_or(|b| score > b.score) {
                    best = Some(SelectionStep { index, score });
                }
            }
        }
        let Some(step) = best else { break };
        chosen.push(step.index);
        steps.push(step);
    }
    Ok(steps)
}

/// Correlation test on two columns: aggregate when
/// ρ̂ ≥ 1 - 2σ̂²/((n-1)(ŵ₁-ŵ₂)²), with ŵ and σ̂² from the bivariate fit.
/// A singular pair or equal weights always aggregate.
pub fn lincfa_admits(rep: &[f64], cand: &[f64], y: &[f64]) -> bool {
    let n = y.len() as f64;
    let (saa, sbb, sab) = (var_unchecked(rep), var_unchecked(cand), cov_unchecked(rep, cand));
    if !(saa > 0.0 && sbb > 0.0) {
        return true;
    }
    let det = saa * sbb - sab * sab;
    if det / (saa * sbb) <= SINGULAR_TOL {
        return true;
    }
    let (say, sby) = (cov_unchecked(rep, y), cov_unchecked(cand, y));
    let w1 = (sbb * say - sab * sby) / det;
    let w2 = (saa * sby - sab * say) / det;
    if (w1 - w2).abs() < 1e-12 {
        return true;
    }
    let explained = w1 * say + w2 * sby;
    let rss = ((n - 1.0) * (var_unchecked(y) - explained)).max(0.0);
    let sigma2 = rss / (n - 2.0);
    let rho = sab / (saa * sbb).sqrt();
    rho >= 1.0 - 2.0 * sigma2 / ((n - 1.0) * (w1 - w2).powi(2))
}

/// The greedy scan with the correlation test and Mean aggregation.
pub fn lincfa_partition(x: &Matrix, y: &[f64]) -> Result<Partition> {
    if x.nrows() != y.len() {
        return Err(Error::InvalidData(format!("{} rows but {} targets", x.nrows(), y.len())));
    }
    if y.len() < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: y.len() });
    }
    let reg = Registry::default();
    let clusters = greedy_scan(x, &AggregationSpec::Mean, &reg, |c| {
        Ok(lincfa_admits(c.representative, c.candidate_column, y))
    })?;
    Partition::build(clusters, x, &AggregationSpec::Mean, &reg)
}

/// Columns of `x` in the order given by a selection.
pub fn selected_columns(x: &Matrix, steps: &[SelectionStep]) -> Matrix {
    let idx: Vec<usize> = steps.iter().map(|s| s.index).collect();
    let mut out = Matrix::zeros(x.nrows(), idx.len());
    for (k, &j) in idx.iter().enumerate() {
        out.column_mut(k).copy_from_slice(column(x, j));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::center_columns;

    fn data(n: usize, d: usize) -> Matrix {
        let raw = Matrix::from_fn(n, d, |r, c| (((r + 5) * (c + 11) * 7919) % 127) as f64 / 127.0);
        center_columns(&raw).unwrap().0
    }

    #[test]
    fn exact_target_column_is_picked_first() {
        let x = data(30, 5);
        let y = column(&x, 3).to_vec();
        let steps = forward_selection(&x, &y, 2, Task::Regression).unwrap();
        assert_eq!(steps[0].index, 3);
        assert!((steps[0].score - 1.0).abs() < 1e-12);
        assert!(forward_selection(&x, &y, 0, Task::Regression).unwrap().is_empty());
    }

    #[test]
    fn selection_matches_exhaustive_argmax() {
        let x = data(40, 5);
        let y: Vec<f64> = (0..40)
            .map(|r| 0.3 * x[(r, 0)] - 1.2 * x[(r, 2)] + 0.8 * x[(r, 4)] + ((r * 13) % 7) as f64 * 0.02)
            .collect();
        let steps = forward_selection(&x, &y, 5, Task::Regression).unwrap();
        let ym = mean(&y);
        let yc: Vec<f64> = y.iter().map(|v| v - ym).collect();
        let mut chosen: Vec<usize> = Vec::new();
        for step in &steps {
            let mut best = (f64::NEG_INFINITY, usize::MAX);
            for j in 0..5 {
                if chosen.contains(&j) {
                    continue;
                }
                let mut cols = chosen.clone();
                cols.push(j);
                let sub = x.select_columns(&cols);
                let fit = ols_fit(&sub, &yc).unwrap();
                let s = r2_score(&yc, &fit.linear_predictor(&sub).unwrap()).unwrap();
                if s > best.0 {
                    best = (s, j);
                }
            }
            assert_eq!(step.index, best.1);
            chosen.push(best.1);
        }
        for w in steps.windows(2) {
            assert!(w[1].score >= w[0].score - 1e-12);
        }
    }

    #[test]
    fn singular_candidates_are_skipped() {
        let mut x = data(20, 3);
        let c0 = column(&x, 0).to_vec();
        x.column_mut(1).copy_from_slice(&c0);
        let y = c0.iter().map(|v| v * 2.0).collect::<Vec<_>>();
        let steps = forward_selection(&x, &y, 3, Task::Regression).unwrap();
        assert_eq!(steps.len(), 2);
        assert_eq!(steps[0].index, 0);
        assert_eq!(steps[1].index, 2);
    }

    #[test]
    fn lincfa_merges_duplicates() {
        let base = data(25, 1);
        let x = Matrix::from_fn(25, 4, |r, _| base[(r, 0)]);
        let y: Vec<f64> = (0..25).map(|r| base[(r, 0)] + (r % 4) as f64 * 0.1).collect();
        assert_eq!(lincfa_partition(&x, &y).unwrap().n_clusters(), 1);
    }

    #[test]
    fn lincfa_keeps_distinct_weights_apart() {
        let x = data(200, 2);
        let y: Vec<f64> = (0..200)
            .map(|r| 5.0 * x[(r, 0)] - 3.0 * x[(r, 1)] + 0.01 * (((r * 37) % 11) as f64 - 5.0) / 5.0)
            .collect();
        assert_eq!(lincfa_partition(&x, &y).unwrap().n_clusters(), 2);
    }
}
