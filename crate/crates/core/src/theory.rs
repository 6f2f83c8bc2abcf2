//! Closed-form bias/variance gaps between a bivariate model and its
//! aggregated counterpart, and Monte Carlo checks of those formulas on the
//! two-feature synthetic generator.
//!
//! Gaps are always "what aggregation changes": `delta_var` is the variance
//! saved (bivariate minus aggregated), `delta_bias` the bias added
//! (aggregated minus bivariate). The expected deviance increase caused by
//! aggregating is then `(delta_bias - delta_var) / φ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{ols_fit, r2_pair, r2_single, scaled_deviance_gap, var_unchecked};
use crate::genlin::make_gaussian_family;
use crate::model::{column, Form, GenerativeSpec, Matrix, MIX_FRESH, MIX_PARENT};
use crate::synth::{gen_linear, structure};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationMoments {
    /// Noise variance σ².
    pub sigma2: f64,
    pub var_f: f64,
    pub var_phi1: f64,
    pub var_phi2: f64,
    pub var_h: f64,
    pub cov_phi1_phi2: f64,
    pub cov_phi1_f: f64,
    pub cov_phi2_f: f64,
    pub cov_f_h: f64,
}

const CORR_SLACK: f64 = 1e-12;

impl PopulationMoments {
    pub fn validate(&self) -> Result<()> {
        let vals = [
            self.sigma2,
            self.var_f,
            self.var_phi1,
            self.var_phi2,
            self.var_h,
            self.cov_phi1_phi2,
            self.cov_phi1_f,
            self.cov_phi2_f,
            self.cov_f_h,
        ];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMoments("non-finite moment".into()));
        }
        if self.sigma2 < 0.0 {
            return Err(Error::InvalidMoments("negative noise variance".into()));
        }
        for (name, v) in [
            ("var_f", self.var_f),
            ("var_phi1", self.var_phi1),
            ("var_phi2", self.var_phi2),
            ("var_h", self.var_h),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidMoments(format!("{name} must be positive")));
            }
        }
        for (name, c, a, b) in [
            ("phi1/phi2", self.cov_phi1_phi2, self.var_phi1, self.var_phi2),
            ("phi1/f", self.cov_phi1_f, self.var_phi1, self.var_f),
            ("phi2/f", self.cov_phi2_f, self.var_phi2, self.var_f),
            ("f/h", self.cov_f_h, self.var_f, self.var_h),
        ] {
            if (c / (a * b).sqrt()).abs() > 1.0 + CORR_SLACK {
                return Err(Error::InvalidMoments(format!("correlation {name} outside [-1, 1]")));
            }
        }
        if self.var_phi1 * self.var_phi2 - self.cov_phi1_phi2.powi(2) <= 0.0 {
            return Err(Error::InvalidMoments("input covariance matrix is singular".into()));
        }
        // joint covariance of (φ₁, φ₂, f) must be positive semidefinite
        let m = nalgebra::Matrix3::new(
            self.var_phi1,
            self.cov_phi1_phi2,
            self.cov_phi1_f,
            self.cov_phi1_phi2,
            self.var_phi2,
            self.cov_phi2_f,
            self.cov_phi1_f,
            self.cov_phi2_f,
            self.var_f,
        );
        let scale = self.var_phi1 * self.var_phi2 * self.var_f;
        if m.determinant() < -1e-10 * scale {
            return Err(Error::InvalidMoments("joint covariance is not positive semidefinite".into()));
        }
        Ok(())
    }

    /// Part of var f explained by (φ₁, φ₂) jointly.
    fn explained_bivariate(&self) -> f64 {
        let (s1, s2, c12) = (self.var_phi1, self.var_phi2, self.cov_phi1_phi2);
        let (c1, c2) = (self.cov_phi1_f, self.cov_phi2_f);
        (s1 * c2 * c2 + s2 * c1 * c1 - 2.0 * c1 * c2 * c12) / (s1 * s2 - c12 * c12)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticGaps {
    pub delta_var: f64,
    pub delta_bias: f64,
}

pub fn eval_asymptotic_gaps(moments: &PopulationMoments, n: usize) -> Result<AsymptoticGaps> {
    moments.validate()?;
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    Ok(AsymptoticGaps {
        delta_var: moments.sigma2 / (n - 1) as f64,
        delta_bias: -moments.cov_f_h.powi(2) / moments.var_h + moments.explained_bivariate(),
    })
}

/// Sample counterparts of the input moments used by the finite-sample gap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMoments {
    pub var_phi1: f64,
    pub var_phi2: f64,
    pub cov_phi1_phi2: f64,
    pub var_h: f64,
}

/// Finite-sample variance saving given the realized design moments.
pub fn eval_finite_sample_var_gap(
    population: &PopulationMoments,
    empirical: &EmpiricalMoments,
    n: usize,
) -> Result<f64> {
    population.validate()?;
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let e = empirical;
    let det_hat = e.var_phi1 * e.var_phi2 - e.cov_phi1_phi2.powi(2);
    if !(det_hat > 0.0) || !(e.var_h > 0.0) {
        return Err(Error::InvalidMoments("empirical moment matrix is singular".into()));
    }
    let p = population;
    let bracket = (p.var_phi1 * e.var_phi2 + p.var_phi2 * e.var_phi1
        - 2.0 * p.cov_phi1_phi2 * e.cov_phi1_phi2)
        / det_hat
        - p.var_h / e.var_h;
    Ok(p.sigma2 / (n - 1) as f64 * bracket)
}

/// Population covariance of the two generated features.
pub fn two_feature_covariance() -> [[f64; 2]; 2] {
    let v1 = 1.0 / 12.0;
    [
        [v1, MIX_PARENT * v1],
        [MIX_PARENT * v1, (MIX_PARENT * MIX_PARENT + MIX_FRESH * MIX_FRESH) * v1],
    ]
}

/// Population mean of every generated feature.
pub const FEATURE_MEAN: f64 = 0.5;

/// Moments of the two-feature linear generator with φᵢ = xᵢ and h their mean.
pub fn two_feature_moments(weights: [f64; 2], sigma: f64) -> PopulationMoments {
    let s = two_feature_covariance();
    let sw = [
        s[0][0] * weights[0] + s[0][1] * weights[1],
        s[1][0] * weights[0] + s[1][1] * weights[1],
    ];
    PopulationMoments {
        sigma2: sigma * sigma,
        var_f: weights[0] * sw[0] + weights[1] * sw[1],
        var_phi1: s[0][0],
        var_phi2: s[1][1],
        var_h: (s[0][0] + 2.0 * s[0][1] + s[1][1]) / 4.0,
        cov_phi1_phi2: s[0][1],
        cov_phi1_f: sw[0],
        cov_phi2_f: sw[1],
        cov_f_h: (sw[0] + sw[1]) / 2.0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TwoFeatureModel {
    Bivariate,
    Aggregated,
}

/// A Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McTerms {
    pub variance_term: Estimate,
    pub bias_term: Estimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McGaps {
    pub bivariate: McTerms,
    pub aggregated: McTerms,
    /// Bivariate minus aggregated variance term.
    pub variance_gap: Estimate,
    /// Aggregated minus bivariate bias term.
    pub bias_gap: Estimate,
}

const JACKKNIFE_GROUPS: usize = 20;

type Coef = [f64; 2];

fn quad(m: &[[f64; 2]; 2], v: Coef) -> f64 {
    m[0][0] * v[0] * v[0] + 2.0 * m[0][1] * v[0] * v[1] + m[1][1] * v[1] * v[1]
}

/// Variance and bias terms of the squared-error decomposition for
/// predictions xᵀβ̂, averaged over inputs with second-moment matrix `m`.
fn terms(betas: &[Coef], w: Coef, m: &[[f64; 2]; 2]) -> (f64, f64) {
    let r = betas.len() as f64;
    let bar = [
        betas.iter().map(|b| b[0]).sum::<f64>() / r,
        betas.iter().map(|b| b[1]).sum::<f64>() / r,
    ];
    let var = betas
        .iter()
        .map(|b| quad(m, [b[0] - bar[0], b[1] - bar[1]]))
        .sum::<f64>()
        / (r - 1.0);
    // the squared mean carries var/R of sampling noise; remove it
    let bias = quad(m, [bar[0] - w[0], bar[1] - w[1]]) - var / r;
    (var, bias)
}

/// Delete-a-group jackknife over contiguous replication groups.
fn jackknife<T: Clone + Send + Sync>(items: &[T], stat: impl Fn(&[T]) -> f64 + Sync) -> Estimate {
    let value = stat(items);
    let g = JACKKNIFE_GROUPS.min(items.len());
    let parts: Vec<f64> = (0..g)
        .into_par_iter()
        .map(|k| {
            let (lo, hi) = (k * items.len() / g, (k + 1) * items.len() / g);
            let rest: Vec<T> = items[..lo].iter().chain(&items[hi..]).cloned().collect();
            stat(&rest)
        })
        .collect();
    let g = parts.len() as f64;
    let mean = parts.iter().sum::<f64>() / g;
    let var = (g - 1.0) / g * parts.iter().map(|p| (p - mean).powi(2)).sum::<f64>();
    Estimate { value, se: var.sqrt() }
}

fn mean_se(values: &[f64]) -> Estimate {
    let r = values.len() as f64;
    let m = values.iter().sum::<f64>() / r;
    let v = values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (r - 1.0);
    Estimate { value: m, se: (v / r).sqrt() }
}

/// Generator with fixed weights, checked for the two-feature linear form.
fn two_feature_spec(gen: &GenerativeSpec) -> Result<(GenerativeSpec, Coef)> {
    if gen.dims != 2 || gen.form != Form::LinearInX {
        return Err(Error::Config("Monte Carlo checks need a two-feature linear generator".into()));
    }
    let st = structure(gen)?;
    let w = [st.weights[0], st.weights[1]];
    Ok((gen.clone().with_weights(st.weights), w))
}

fn check_reps(reps: usize) -> Result<()> {
    if reps < 100 {
        return Err(Error::Config(format!("need at least 100 replications, got {reps}")));
    }
    Ok(())
}

/// Training sample of one replication, centered by the known population
/// means of features and signal.
struct Draw {
    x: Matrix,
    y: Vec<f64>,
    f: Vec<f64>,
}

fn draw(spec: &GenerativeSpec, w: Coef, n: usize, seed: u64) -> Result<Draw> {
    let ds = gen_linear(&spec.clone().with_seed(seed), n)?;
    let x = ds.features().map(|v| v - FEATURE_MEAN);
    let fm = FEATURE_MEAN * (w[0] + w[1]);
    let y = ds.target().iter().map(|v| v - fm).collect();
    let f = (0..n).map(|r| w[0] * x[(r, 0)] + w[1] * x[(r, 1)]).collect();
    Ok(Draw { x, y, f })
}

/// Effective coefficients of both models on (x₁, x₂).
fn fit_both(d: &Draw) -> Result<(Coef, Coef)> {
    let biv = ols_fit(&d.x, &d.y)?;
    let n = d.x.nrows();
    let h = Matrix::from_fn(n, 1, |r, _| (d.x[(r, 0)] + d.x[(r, 1)]) / 2.0);
    let c = ols_fit(&h, &d.y)?.coefficients[0];
    Ok(([biv.coefficients[0], biv.coefficients[1]], [c / 2.0, c / 2.0]))
}

fn eval_seed(seed: u64) -> u64 {
    seed ^ 0x5DEE_CE66_D1CE_4E5B
}

fn test_seed(seed: u64, rep: usize) -> u64 {
    (seed ^ 0x9E37_79B9_7F4A_7C15).wrapping_add(rep as u64)
}

/// Second-moment matrix of the evaluation inputs: exact population
/// covariance when `eval_points` is 0, otherwise that of a fixed set of
/// points shared by every replication.
fn eval_moments(eval_points: usize, seed: u64) -> [[f64; 2]; 2] {
    if eval_points == 0 {
        return two_feature_covariance();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(eval_seed(seed));
    let mut m = [[0.0; 2]; 2];
    for _ in 0..eval_points {
        let x1: f64 = rng.random();
        let u: f64 = rng.random();
        let x = [x1 - FEATURE_MEAN, MIX_PARENT * x1 + MIX_FRESH * u - FEATURE_MEAN];
        for a in 0..2 {
            for b in 0..2 {
                m[a][b] += x[a] * x[b] / eval_points as f64;
            }
        }
    }
    m
}

fn fitted_reps(spec: &GenerativeSpec, w: Coef, n: usize, reps: usize) -> Result<Vec<(Coef, Coef)>> {
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let d = draw(spec, w, n, spec.seed.wrapping_add(r as u64))?;
            fit_both(&d).map_err(|e| Error::Repetition {
                repetition: r,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Variance and bias terms of one model, estimated over `reps` training
/// sets of size `n`.
pub fn mc_mse_decomposition(
    gen: &GenerativeSpec,
    model: TwoFeatureModel,
    n: usize,
    reps: usize,
    eval_points: usize,
) -> Result<McTerms> {
    let gaps = mc_gaps(gen, n, reps, eval_points)?;
    Ok(match model {
        TwoFeatureModel::Bivariate => gaps.bivariate,
        TwoFeatureModel::Aggregated => gaps.aggregated,
    })
}

/// Both models fitted on the same training sets.
pub fn mc_gaps(gen: &GenerativeSpec, n: usize, reps: usize, eval_points: usize) -> Result<McGaps> {
    check_reps(reps)?;
    let (spec, w) = two_feature_spec(gen)?;
    let m = eval_moments(eval_points, spec.seed);
    let fits = fitted_reps(&spec, w, n, reps)?;
    let pick = |f: &[(Coef, Coef)], agg: bool| -> Vec<Coef> {
        f.iter().map(|p| if agg { p.1 } else { p.0 }).collect()
    };
    let model_terms = |agg: bool| McTerms {
        variance_term: jackknife(&fits, |f| terms(&pick(f, agg), w, &m).0),
        bias_term: jackknife(&fits, |f| terms(&pick(f, agg), w, &m).1),
    };
    Ok(McGaps {
        bivariate: model_terms(false),
        aggregated: model_terms(true),
        variance_gap: jackknife(&fits, |f| {
            terms(&pick(f, false), w, &m).0 - terms(&pick(f, true), w, &m).0
        }),
        bias_gap: jackknife(&fits, |f| {
            terms(&pick(f, true), w, &m).1 - terms(&pick(f, false), w, &m).1
        }),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DevianceCheck {
    /// Mean over replications of the held-out scaled deviance gap
    /// (aggregated minus bivariate).
    pub deviance_gap: Estimate,
    /// (delta_bias - delta_var) / φ from the closed forms.
    pub predicted: f64,
    pub agreement_ratio: f64,
    pub within_3se: bool,
}

/// Compares the held-out scaled deviance increase caused by aggregation,
/// under a Gaussian family with φ = σ², against the closed-form gaps.
pub fn check_gaussian_deviance_mse(
    gen: &GenerativeSpec,
    n: usize,
    reps: usize,
    test_points: usize,
) -> Result<DevianceCheck> {
    check_reps(reps)?;
    if test_points < 2 {
        return Err(Error::Config("need at least two test points".into()));
    }
    if !(gen.noise_sigma > 0.0) {
        return Err(Error::Config("deviance check needs positive noise".into()));
    }
    let (spec, w) = two_feature_spec(gen)?;
    let family = crate::model::ExponentialFamily {
        scale_phi: spec.noise_sigma.powi(2),
        ..make_gaussian_family()
    };
    let gaps: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let wrap = |e| Error::Repetition {
                repetition: r,
                source: Box::new(e),
            };
            let train = draw(&spec, w, n, spec.seed.wrapping_add(r as u64)).map_err(wrap)?;
            let (b, a) = fit_both(&train).map_err(wrap)?;
            let test = draw(&spec, w, test_points, test_seed(spec.seed, r)).map_err(wrap)?;
            let pred = |c: Coef| -> Vec<f64> {
                (0..test_points)
                    .map(|i| c[0] * test.x[(i, 0)] + c[1] * test.x[(i, 1)])
                    .collect()
            };
            scaled_deviance_gap(&family, &pred(a), &pred(b), &test.y).map_err(wrap)
        })
        .collect::<Result<_>>()?;
    let est = mean_se(&gaps);
    let closed = eval_asymptotic_gaps(&two_feature_moments(w, spec.noise_sigma), n)?;
    let predicted = (closed.delta_bias - closed.delta_var) / family.scale_phi;
    Ok(DevianceCheck {
        deviance_gap: est,
        predicted,
        agreement_ratio: est.value / predicted,
        within_3se: (est.value - predicted).abs() <= 3.0 * est.se,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyCheck {
    /// Bivariate minus aggregated expected squared error.
    pub mse_gap: Estimate,
    /// Fraction of replications where the R² gap on the signal exceeds
    /// σ²/(σ̂²_f (n-1)). Only meaningful when `mse_gap` is negative.
    pub fraction_exceeding: f64,
    pub applicable: bool,
}

/// When aggregating hurts, the sample R² loss should exceed the noise
/// ratio in almost every replication.
pub fn check_r2_gap_consistency(gen: &GenerativeSpec, n: usize, reps: usize) -> Result<ConsistencyCheck> {
    check_reps(reps)?;
    let (spec, w) = two_feature_spec(gen)?;
    let sigma2 = spec.noise_sigma.powi(2);
    let gaps = mc_gaps(&spec, n, reps, 0)?;
    let var_gap = gaps.variance_gap;
    let bias_gap = gaps.bias_gap;
    // biv - agg = (var_biv - var_agg) - (bias_agg - bias_biv)
    let mse_gap = Estimate {
        value: var_gap.value - bias_gap.value,
        se: (var_gap.se.powi(2) + bias_gap.se.powi(2)).sqrt(),
    };
    let hits: Vec<bool> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let d = draw(&spec, w, n, spec.seed.wrapping_add(r as u64))?;
            let (x1, x2) = (column(&d.x, 0), column(&d.x, 1));
            let h: Vec<f64> = x1.iter().zip(x2).map(|(a, b)| (a + b) / 2.0).collect();
            let vf = var_unchecked(&d.f);
            let biv = r2_pair(x1, x2, &d.f, vf).ok_or(Error::SingularDesign)?;
            let agg = r2_single(&h, &d.f, vf);
            Ok(biv - agg > sigma2 / (vf * (n - 1) as f64))
        })
        .collect::<Result<_>>()?;
    let frac = hits.iter().filter(|&&b| b).count() as f64 / reps as f64;
    Ok(ConsistencyCheck {
        applicable: mse_gap.value < 0.0,
        mse_gap,
        fraction_exceeding: frac,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Variance,
    Bias,
    GaussianEquivalence,
    Theorem3,
    SeScaling,
    All,
}

impl Suite {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "variance" => Self::Variance,
            "bias" => Self::Bias,
            "gaussian-equivalence" => Self::GaussianEquivalence,
            "theorem3" | "r2-consistency" => Self::Theorem3,
            "se-scaling" => Self::SeScaling,
            "all" => Self::All,
            other => return Err(Error::Config(format!("unknown suite `{other}`"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub estimate: f64,
    pub expected: f64,
    pub standard_error: f64,
    /// Allowed absolute deviation.
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: Suite,
    pub seed: u64,
    pub reps: usize,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

fn outcome(name: String, estimate: f64, expected: f64, se: f64, tolerance: f64) -> CheckOutcome {
    CheckOutcome {
        passed: (estimate - expected).abs() <= tolerance,
        name,
        estimate,
        expected,
        standard_error: se,
        tolerance,
    }
}

/// Weight configurations with distinct bias gaps.
pub const BIAS_CONFIGS: [[f64; 2]; 3] = [[1.0, -1.0], [2.0, 0.5], [0.2, 1.5]];

pub fn variance_check(seed: u64, reps: usize) -> Result<CheckOutcome> {
    let (n, sigma) = (100, 1.0);
    let gen = GenerativeSpec::linear(2, sigma, seed).with_weights(vec![1.0, 1.0]);
    let g = mc_gaps(&gen, n, reps, 0)?;
    let expected = sigma * sigma / (n - 1) as f64;
    Ok(outcome(
        format!("variance gap n={n}"),
        g.variance_gap.value,
        expected,
        g.variance_gap.se,
        0.15 * expected,
    ))
}

pub fn bias_checks(seed: u64, reps: usize) -> Result<Vec<CheckOutcome>> {
    let (n, sigma) = (2000, 1.0);
    BIAS_CONFIGS
        .iter()
        .map(|&w| {
            let gen = GenerativeSpec::linear(2, sigma, seed).with_weights(w.to_vec());
            let g = mc_gaps(&gen, n, reps, 0)?;
            let closed = eval_asymptotic_gaps(&two_feature_moments(w, sigma), n)?;
            Ok(outcome(
                format!("bias gap w=({}, {}) n={n}", w[0], w[1]),
                g.bias_gap.value,
                closed.delta_bias,
                g.bias_gap.se,
                3.0 * g.bias_gap.se,
            ))
        })
        .collect()
}

pub fn gaussian_checks(seed: u64, reps: usize) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for (w, n) in [([1.0, 1.0], 500), ([1.0, -1.0], 2000)] {
        let gen = GenerativeSpec::linear(2, 1.0, seed).with_weights(w.to_vec());
        let c = check_gaussian_deviance_mse(&gen, n, reps, 1000)?;
        out.push(outcome(
            format!("deviance gap w=({}, {}) n={n}", w[0], w[1]),
            c.deviance_gap.value,
            c.predicted,
            c.deviance_gap.se,
            3.0 * c.deviance_gap.se,
        ));
    }
    Ok(out)
}

pub fn consistency_check(seed: u64, reps: usize) -> Result<CheckOutcome> {
    let gen = GenerativeSpec::linear(2, 0.5, seed).with_weights(vec![1.0, -1.0]);
    let c = check_r2_gap_consistency(&gen, 200, reps)?;
    let mut o = outcome(
        "R2 gap exceeds noise ratio when aggregation hurts".into(),
        c.fraction_exceeding,
        1.0,
        f64::NAN,
        0.05,
    );
    o.passed = c.applicable && c.fraction_exceeding >= 0.95;
    Ok(o)
}

/// Standard errors at 400, 1600 and 6400 replications should halve at
/// each step.
pub fn se_scaling_checks(seed: u64) -> Result<Vec<CheckOutcome>> {
    let gen = GenerativeSpec::linear(2, 1.0, seed).with_weights(vec![1.0, 1.0]);
    let ses: Vec<f64> = [400, 1600, 6400]
        .iter()
        .map(|&r| mc_gaps(&gen, 100, r, 0).map(|g| g.variance_gap.se))
        .collect::<Result<_>>()?;
    Ok((0..2)
        .map(|i| {
            outcome(
                format!("SE ratio reps {}→{}", 400 * 4usize.pow(i as u32), 1600 * 4usize.pow(i as u32)),
                ses[i] / ses[i + 1],
                2.0,
                f64::NAN,
                0.5,
            )
        })
        .collect())
}

pub fn run_suite(suite: Suite, seed: u64, reps: usize) -> Result<VerificationReport> {
    let mut checks = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Variance {
        checks.push(variance_check(seed, reps)?);
    }
    if all || suite == Suite::Bias {
        checks.extend(bias_checks(seed, reps)?);
    }
    if all || suite == Suite::GaussianEquivalence {
        checks.extend(gaussian_checks(seed, reps)?);
    }
    if all || suite == Suite::Theorem3 {
        checks.push(consistency_check(seed, reps)?);
    }
    if all || suite == Suite::SeScaling {
        checks.extend(se_scaling_checks(seed)?);
    }
    Ok(VerificationReport {
        suite,
        seed,
        reps,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Longhand evaluation of the asymptotic bias gap.
    fn bias_oracle(m: &PopulationMoments) -> f64 {
        let num = m.var_phi1 * m.cov_phi2_f * m.cov_phi2_f + m.var_phi2 * m.cov_phi1_f * m.cov_phi1_f
            - 2.0 * m.cov_phi1_f * m.cov_phi2_f * m.cov_phi1_phi2;
        let den = m.var_phi1 * m.var_phi2 - m.cov_phi1_phi2 * m.cov_phi1_phi2;
        num / den - m.cov_f_h * m.cov_f_h / m.var_h
    }

    fn random_moments(seed: u64) -> PopulationMoments {
        // covariance of (φ₁, φ₂, noise-free f) from a random loading matrix
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..6).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let v1 = [a[0], a[1]];
        let v2 = [a[2], a[3]];
        let w = [a[4], a[5]];
        let dot = |p: [f64; 2], q: [f64; 2]| p[0] * q[0] + p[1] * q[1];
        let s11 = dot(v1, v1);
        let s22 = dot(v2, v2);
        let s12 = dot(v1, v2);
        // f = w₁φ₁ + w₂φ₂ on the span, h = (φ₁+φ₂)/2
        let c1f = w[0] * s11 + w[1] * s12;
        let c2f = w[0] * s12 + w[1] * s22;
        PopulationMoments {
            sigma2: rng.random::<f64>() * 4.0,
            var_f: w[0] * c1f + w[1] * c2f,
            var_phi1: s11,
            var_phi2: s22,
            var_h: (s11 + 2.0 * s12 + s22) / 4.0,
            cov_phi1_phi2: s12,
            cov_phi1_f: c1f,
            cov_phi2_f: c2f,
            cov_f_h: (c1f + c2f) / 2.0,
        }
    }

    #[test]
    fn variance_gap_formula() {
        let m = two_feature_moments([1.0, 2.0], 10.0);
        let g = eval_asymptotic_gaps(&m, 2001).unwrap();
        assert!((g.delta_var - 0.05).abs() < 1e-15);
    }

    #[test]
    fn perfect_aggregation_has_no_bias_gap() {
        let m = two_feature_moments([1.0, 1.0], 1.0);
        let g = eval_asymptotic_gaps(&m, 100).unwrap();
        assert!(g.delta_bias.abs() < 1e-15);
    }

    #[test]
    fn bias_gap_matches_oracle() {
        for seed in 0..50 {
            let m = random_moments(seed);
            if m.validate().is_err() {
                continue;
            }
            let g = eval_asymptotic_gaps(&m, 50).unwrap();
            assert!((g.delta_bias - bias_oracle(&m)).abs() < 1e-12);
        }
    }

    #[test]
    fn inconsistent_moments_rejected() {
        let mut m = two_feature_moments([1.0, 1.0], 1.0);
        m.cov_phi1_phi2 = 10.0;
        assert!(matches!(eval_asymptotic_gaps(&m, 10), Err(Error::InvalidMoments(_))));
    }

    #[test]
    fn finite_sample_gap_plug_in_limit() {
        let p = two_feature_moments([0.3, 0.9], 2.0);
        let e = EmpiricalMoments {
            var_phi1: p.var_phi1,
            var_phi2: p.var_phi2,
            cov_phi1_phi2: p.cov_phi1_phi2,
            var_h: p.var_h,
        };
        let g = eval_finite_sample_var_gap(&p, &e, 101).unwrap();
        assert!((g - 4.0 / 100.0).abs() < 1e-12);
        let mut p3 = p;
        p3.sigma2 *= 3.0;
        let e2 = EmpiricalMoments { var_phi1: e.var_phi1 * 1.1, ..e };
        let a = eval_finite_sample_var_gap(&p, &e2, 101).unwrap();
        let b = eval_finite_sample_var_gap(&p3, &e2, 101).unwrap();
        assert!((b - 3.0 * a).abs() < 1e-12);
    }

    #[test]
    fn finite_sample_gap_matches_oracle() {
        let p = two_feature_moments([0.3, -1.1], 1.7);
        let e = EmpiricalMoments {
            var_phi1: p.var_phi1 * 1.07,
            var_phi2: p.var_phi2 * 0.93,
            cov_phi1_phi2: p.cov_phi1_phi2 * 1.02,
            var_h: p.var_h * 0.98,
        };
        let n = 57;
        let det = e.var_phi1 * e.var_phi2 - e.cov_phi1_phi2 * e.cov_phi1_phi2;
        let expected = p.sigma2 / 56.0
            * ((p.var_phi1 * e.var_phi2 + p.var_phi2 * e.var_phi1 - 2.0 * p.cov_phi1_phi2 * e.cov_phi1_phi2) / det
                - p.var_h / e.var_h);
        assert!((eval_finite_sample_var_gap(&p, &e, n).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn noiseless_correct_model_has_zero_terms() {
        let gen = GenerativeSpec::linear(2, 0.0, 5).with_weights(vec![0.4, 1.3]);
        let t = mc_mse_decomposition(&gen, TwoFeatureModel::Bivariate, 50, 200, 0).unwrap();
        assert!(t.variance_term.value.abs() < 1e-20);
        assert!(t.bias_term.value.abs() < 1e-20);
    }

    #[test]
    fn identical_models_have_zero_deviance_gap() {
        let fam = make_gaussian_family();
        let t = [0.1, 0.4, -0.3];
        assert_eq!(scaled_deviance_gap(&fam, &t, &t, &[1.0, 0.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn eval_point_mode_approaches_population() {
        let m = eval_moments(200_000, 3);
        let s = two_feature_covariance();
        for a in 0..2 {
            for b in 0..2 {
                assert!((m[a][b] - s[a][b]).abs() < 2e-3);
            }
        }
    }

    #[test]
    fn parallel_reps_are_deterministic() {
        let gen = GenerativeSpec::linear(2, 1.0, 11).with_weights(vec![1.0, 0.5]);
        assert_eq!(mc_gaps(&gen, 60, 150, 0).unwrap(), mc_gaps(&gen, 60, 150, 0).unwrap());
    }

    #[test]
    fn suite_names() {
        assert_eq!(Suite::parse("gaussian-equivalence").unwrap(), Suite::GaussianEquivalence);
        assert!(Suite::parse("nope").is_err());
    }
}
