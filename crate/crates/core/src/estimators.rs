//! Sample moments, least squares, logistic regression, scores and deviance.
//!
//! Variances and covariances use the unbiased n-1 divisor throughout.

use nalgebra::{Cholesky, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{sigmoid, CenteringStats, ExponentialFamily, Matrix};

/// Relative pivot cutoff for declaring a Gram matrix singular.
pub const SINGULAR_TOL: f64 = 1e-12;

const LOGISTIC_RIDGE: f64 = 1e-8;
const LOGISTIC_MAX_ITER: usize = 100;
const LOGISTIC_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub coefficients: Vec<f64>,
    /// Zero for least squares; logistic fits estimate one.
    pub intercept: f64,
    /// RSS / (n - k) for least squares; not defined for logistic fits (NaN).
    pub residual_variance: f64,
    pub converged: bool,
}

impl FitResult {
    /// Linear predictor for every row of `x`.
    pub fn linear_predictor(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.ncols() != self.coefficients.len() {
            return Err(Error::InvalidData(format!(
                "model has {} coefficients but data has {} columns",
                self.coefficients.len(),
                x.ncols()
            )));
        }
        let w = DVector::from_column_slice(&self.coefficients);
        let eta = x * w;
        Ok(eta.iter().map(|v| v + self.intercept).collect())
    }

    /// Class labels: 1 when the linear predictor is positive.
    pub fn predict_class(&self, x: &Matrix) -> Result<Vec<f64>> {
        Ok(self
            .linear_predictor(x)?
            .into_iter()
            .map(|e| if e >= 0.0 { 1.0 } else { 0.0 })
            .collect())
    }
}

fn check_finite(data: &Matrix) -> Result<()> {
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("non-finite value in matrix".into()));
    }
    Ok(())
}

pub fn center_columns(data: &Matrix) -> Result<(Matrix, CenteringStats)> {
    check_finite(data)?;
    if data.nrows() == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let column_means: Vec<f64> = data.column_iter().map(|c| mean(c.as_slice())).collect();
    let stats = CenteringStats {
        column_scales: vec![1.0; column_means.len()],
        column_means,
    };
    Ok((stats.apply(data)?, stats))
}

/// Centers and divides by the sample standard deviation. Constant columns
/// keep scale 1.
pub fn standardize_columns(data: &Matrix) -> Result<(Matrix, CenteringStats)> {
    check_finite(data)?;
    if data.nrows() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: data.nrows() });
    }
    let mut column_means = Vec::with_capacity(data.ncols());
    let mut column_scales = Vec::with_capacity(data.ncols());
    for c in data.column_iter() {
        let s = c.as_slice();
        column_means.push(mean(s));
        let sd = var_unchecked(s).sqrt();
        column_scales.push(if sd > 0.0 { sd } else { 1.0 });
    }
    let stats = CenteringStats {
        column_means,
        column_scales,
    };
    Ok((stats.apply(data)?, stats))
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub(crate) fn var_unchecked(v: &[f64]) -> f64 {
    cov_unchecked(v, v)
}

pub(crate) fn cov_unchecked(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    s / (a.len() - 1) as f64
}

pub fn sample_variance(v: &[f64]) -> Result<f64> {
    if v.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: v.len() });
    }
    Ok(var_unchecked(v).max(0.0))
}

pub fn sample_covariance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidData(format!(
            "length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: a.len() });
    }
    Ok(cov_unchecked(a, b))
}

pub fn sample_correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    let c = sample_covariance(a, b)?;
    let d = (var_unchecked(a) * var_unchecked(b)).sqrt();
    if d == 0.0 {
        return Err(Error::DegenerateTarget("zero variance in correlation".into()));
    }
    Ok(c / d)
}

/// Cholesky factor of a symmetric Gram matrix, or `SingularDesign` when any
/// pivot is tiny relative to its diagonal entry.
fn gram_cholesky(gram: nalgebra::DMatrix<f64>) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    let diag: Vec<f64> = gram.diagonal().iter().copied().collect();
    if diag.iter().any(|&g| !(g > 0.0)) {
        return Err(Error::SingularDesign);
    }
    let chol = Cholesky::new(gram).ok_or(Error::SingularDesign)?;
    let l = chol.l_dirty();
    for (i, g) in diag.iter().enumerate() {
        let p = l[(i, i)];
        if p * p / g <= SINGULAR_TOL {
            return Err(Error::SingularDesign);
        }
    }
    Ok(chol)
}

/// Least squares without intercept via the normal equations.
pub fn ols_fit(x: &Matrix, y: &[f64]) -> Result<FitResult> {
    let (n, k) = x.shape();
    if y.len() != n {
        return Err(Error::InvalidData(format!("{} targets for {n} rows", y.len())));
    }
    if n <= k {
        return Err(Error::InsufficientSamples { needed: k + 1, got: n });
    }
    let yv = DVector::from_column_slice(y);
    let chol = gram_cholesky(x.tr_mul(x))?;
    let w = chol.solve(&x.tr_mul(&yv));
    let resid = &yv - x * &w;
    Ok(FitResult {
        coefficients: w.iter().copied().collect(),
        intercept: 0.0,
        residual_variance: resid.norm_squared() / (n - k) as f64,
        converged: true,
    })
}

pub fn r2_score(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    if y.len() != y_hat.len() {
        return Err(Error::InvalidData("length mismatch in r2_score".into()));
    }
    if y.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: y.len() });
    }
    let m = mean(y);
    let ss_tot: f64 = y.iter().map(|v| (v - m).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::DegenerateTarget("target has zero variance".into()));
    }
    let ss_res: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Training R² of the least-squares fit of `y` on one column, from moments.
/// Both sides are centered implicitly. Returns 0 for a constant column.
pub(crate) fn r2_single(x: &[f64], y: &[f64], var_y: f64) -> f64 {
    let vx = var_unchecked(x);
    if vx <= 0.0 {
        return 0.0;
    }
    let c = cov_unchecked(x, y);
    c * c / (vx * var_y)
}

/// Training R² of the fit on two columns, or `None` when they are
/// collinear beyond the singularity cutoff.
pub(crate) fn r2_pair(a: &[f64], b: &[f64], y: &[f64], var_y: f64) -> Option<f64> {
    let (saa, sbb, sab) = (var_unchecked(a), var_unchecked(b), cov_unchecked(a, b));
    if !(saa > 0.0 && sbb > 0.0) {
        return None;
    }
    let det = saa * sbb - sab * sab;
    if det / (saa * sbb) <= SINGULAR_TOL {
        return None;
    }
    let (say, sby) = (cov_unchecked(a, y), cov_unchecked(b, y));
    let explained = (sbb * say * say - 2.0 * sab * say * sby + saa * sby * sby) / det;
    Some(explained / var_y)
}

/// Logistic regression with an intercept, fitted by IRLS.
pub fn logistic_fit(x: &Matrix, y: &[f64]) -> Result<FitResult> {
    let (n, k) = x.shape();
    if y.len() != n {
        return Err(Error::InvalidData(format!("{} targets for {n} rows", y.len())));
    }
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::InvalidData("logistic target must be 0/1".into()));
    }
    let ones = y.iter().filter(|&&v| v == 1.0).count();
    if ones == 0 || ones == n {
        return Err(Error::DegenerateTarget("only one class present".into()));
    }
    let design = Matrix::from_fn(n, k + 1, |r, c| if c == 0 { 1.0 } else { x[(r, c - 1)] });
    let mut beta = DVector::<f64>::zeros(k + 1);
    let mut converged = false;
    for _ in 0..LOGISTIC_MAX_ITER {
        let eta = &design * &beta;
        let p: Vec<f64> = eta.iter().map(|&e| sigmoid(e)).collect();
        let w: Vec<f64> = p.iter().map(|&p| (p * (1.0 - p)).max(1e-12)).collect();
        let grad = design.tr_mul(&DVector::from_iterator(
            n,
            y.iter().zip(&p).map(|(y, p)| y - p),
        ));
        let mut weighted = design.clone();
        for (r, wr) in w.iter().enumerate() {
            weighted.row_mut(r).scale_mut(*wr);
        }
        let mut hess = design.tr_mul(&weighted);
        for i in 0..=k {
            hess[(i, i)] += LOGISTIC_RIDGE;
        }
        let grad = grad - &beta * LOGISTIC_RIDGE;
        let Some(chol) = Cholesky::new(hess) else {
            break;
        };
        let step = chol.solve(&grad);
        if !step.iter().all(|v| v.is_finite()) {
            break;
        }
        beta += &step;
        if step.amax() < LOGISTIC_TOL {
            converged = true;
            break;
        }
    }
    Ok(FitResult {
        coefficients: beta.iter().skip(1).copied().collect(),
        intercept: beta[0],
        residual_variance: f64::NAN,
        converged,
    })
}

pub fn accuracy(y: &[f64], y_hat_class: &[f64]) -> Result<f64> {
    if y.len() != y_hat_class.len() {
        return Err(Error::InvalidData("length mismatch in accuracy".into()));
    }
    if y.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let hits = y.iter().zip(y_hat_class).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / y.len() as f64)
}

/// Mean over samples of D*(θ, θ_a) - D*(θ, θ_b). The true θ cancels.
pub fn scaled_deviance_gap(
    family: &ExponentialFamily,
    theta_a: &[f64],
    theta_b: &[f64],
    y: &[f64],
) -> Result<f64> {
    let n = y.len();
    if theta_a.len() != n || theta_b.len() != n {
        return Err(Error::InvalidData("length mismatch in deviance gap".into()));
    }
    if n == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let s: f64 = (0..n)
        .map(|i| {
            let (a, b) = (theta_a[i], theta_b[i]);
            y[i] * (b - a) - family.b(b) + family.b(a)
        })
        .sum();
    Ok(2.0 / family.scale_phi * s / n as f64)
}
