//! Gaussian process regression on the unit cube.
//!
//! Zero-mean GP with a Matérn 5/2 ARD kernel and additive Gaussian noise.
//! Targets are standardized internally; predictions are returned on the
//! original scale. Hyperparameters maximize the log marginal likelihood by
//! multi-start Nelder–Mead over log-parameters.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::NelderMead;
use crate::seed;

pub const LENGTHSCALE_BOUNDS: (f64, f64) = (1e-3, 1e3);
pub const SIGNAL_VARIANCE_BOUNDS: (f64, f64) = (1e-6, 1e3);
pub const NOISE_VARIANCE_BOUNDS: (f64, f64) = (1e-8, 1.0);

const JITTER_START: f64 = 1e-8;
const JITTER_MAX: f64 = 1e-2;
const SQRT5: f64 = 2.236_067_977_499_79;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub lengthscales: Vec<f64>,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

impl KernelParams {
    pub fn new(lengthscales: Vec<f64>, signal_variance: f64, noise_variance: f64) -> Result<Self> {
        let in_bounds = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
        if lengthscales.is_empty()
            || !lengthscales.iter().all(|&l| in_bounds(l, LENGTHSCALE_BOUNDS))
            || !in_bounds(signal_variance, SIGNAL_VARIANCE_BOUNDS)
            || !in_bounds(noise_variance, NOISE_VARIANCE_BOUNDS)
        {
            return Err(Error::Model(format!(
                "kernel parameters out of bounds: lengthscales {lengthscales:?}, \
                 signal variance {signal_variance}, noise variance {noise_variance}"
            )));
        }
        Ok(KernelParams {
            lengthscales,
            signal_variance,
            noise_variance,
        })
    }

    fn from_log(theta: &[f64], d: usize, noise: NoiseModel) -> Self {
        let clamp = |t: f64, (lo, hi): (f64, f64)| t.exp().clamp(lo, hi);
        KernelParams {
            lengthscales: theta[..d].iter().map(|&t| clamp(t, LENGTHSCALE_BOUNDS)).collect(),
            signal_variance: clamp(theta[d], SIGNAL_VARIANCE_BOUNDS),
            noise_variance: match noise {
                NoiseModel::Estimate => clamp(theta[d + 1], NOISE_VARIANCE_BOUNDS),
                NoiseModel::Fixed(v) => v,
            },
        }
    }
}

/// Matérn 5/2 with ARD lengthscales.
///
/// # Panics
///
/// If `a`, `b` and the lengthscales differ in length.
pub fn kernel(a: &[f64], b: &[f64], params: &KernelParams) -> f64 {
    assert_eq!(a.len(), b.len(), "kernel inputs differ in dimension");
    assert_eq!(a.len(), params.lengthscales.len(), "lengthscales differ in dimension");
    let r2: f64 = a
        .iter()
        .zip(b)
        .zip(&params.lengthscales)
        .map(|((x, y), l)| ((x - y) / l).powi(2))
        .sum();
    matern52(r2.sqrt(), params.signal_variance)
}

#[inline]
fn matern52(r: f64, signal_variance: f64) -> f64 {
    let s = SQRT5 * r;
    signal_variance * (1.0 + s + s * s / 3.0) * (-s).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// Fit the noise variance with the other hyperparameters.
    Estimate,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GpConfig {
    pub restarts: usize,
    pub max_evals_per_restart: usize,
    pub noise: NoiseModel,
    pub standardize: bool,
}

impl Default for GpConfig {
    fn default() -> Self {
        GpConfig {
            restarts: 8,
            max_evals_per_restart: 200,
            noise: NoiseModel::Estimate,
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Posterior {
    pub mean: f64,
    pub variance: f64,
}

impl Posterior {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Anything that yields a Gaussian posterior over one objective.
pub trait Surrogate {
    fn predict(&self, x: &[f64]) -> Posterior;
}

impl<S: Surrogate + ?Sized> Surrogate for &S {
    fn predict(&self, x: &[f64]) -> Posterior {
        (**self).predict(x)
    }
}

impl<S: Surrogate + ?Sized> Surrogate for Box<S> {
    fn predict(&self, x: &[f64]) -> Posterior {
        (**self).predict(x)
    }
}

#[derive(Debug, Clone)]
pub struct GpModel {
    train_x: Vec<Vec<f64>>,
    train_y: Vec<f64>,
    params: KernelParams,
    factor: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    y_mean: f64,
    y_scale: f64,
    jitter: f64,
    log_likelihood: f64,
    restart_starts: Vec<f64>,
}

/// Pairwise per-dimension squared differences, reused across likelihood
/// evaluations.
struct SqDiffs {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl SqDiffs {
    fn new(x: &[Vec<f64>]) -> Self {
        let n = x.len();
        let d = x[0].len();
        let mut data = vec![0.0; n * n * d];
        for i in 0..n {
            for j in 0..i {
                for k in 0..d {
                    let v = (x[i][k] - x[j][k]).powi(2);
                    data[(i * n + j) * d + k] = v;
                    data[(j * n + i) * d + k] = v;
                }
            }
        }
        SqDiffs { n, d, data }
    }

    fn gram(&self, params: &KernelParams) -> DMatrix<f64> {
        let inv_l2: Vec<f64> = params.lengthscales.iter().map(|l| 1.0 / (l * l)).collect();
        let n = self.n;
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            k[(i, i)] = params.signal_variance;
            for j in 0..i {
                let base = (i * n + j) * self.d;
                let r2: f64 = self.data[base..base + self.d]
                    .iter()
                    .zip(&inv_l2)
                    .map(|(s, w)| s * w)
                    .sum();
                let v = matern52(r2.sqrt(), params.signal_variance);
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    }
}

/// Cholesky of `k + noise·I`, escalating diagonal jitter on failure.
fn factorize(k: &DMatrix<f64>, noise: f64) -> Option<(Cholesky<f64, Dyn>, f64)> {
    let n = k.nrows();
    let mut jitter = 0.0;
    loop {
        let mut a = k.clone();
        for i in 0..n {
            a[(i, i)] += noise + jitter;
        }
        if let Some(c) = a.cholesky() {
            return Some((c, jitter));
        }
        jitter = if jitter == 0.0 { JITTER_START } else { jitter * 10.0 };
        if jitter > JITTER_MAX * 1.000_001 {
            return None;
        }
    }
}

fn log_likelihood(factor: &Cholesky<f64, Dyn>, y: &DVector<f64>, alpha: &DVector<f64>) -> f64 {
    let n = y.len() as f64;
    let log_det_half: f64 = factor.l_dirty().diagonal().iter().map(|v| v.ln()).sum();
    -0.5 * y.dot(alpha) - log_det_half - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
}

fn standardization(y: &[f64], enabled: bool) -> (f64, f64) {
    if !enabled {
        return (0.0, 1.0);
    }
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    (mean, if sd > 1e-12 { sd } else { 1.0 })
}

fn check_data(x: &[Vec<f64>], y: &[f64]) -> Result<usize> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::Model(format!(
            "need matching non-empty training data, got {} inputs and {} targets",
            x.len(),
            y.len()
        )));
    }
    let d = x[0].len();
    if d == 0 || x.iter().any(|r| r.len() != d) {
        return Err(Error::Model("training inputs differ in dimension".into()));
    }
    if x.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Model("training data contains non-finite values".into()));
    }
    Ok(d)
}

impl GpModel {
    /// Fits hyperparameters by maximum marginal likelihood and conditions on
    /// the data. Deterministic given `seed`.
    pub fn fit(x: &[Vec<f64>], y: &[f64], config: &GpConfig, seed: u64) -> Result<Self> {
        let d = check_data(x, y)?;
        let (y_mean, y_scale) = standardization(y, config.standardize);
        let ys = DVector::from_iterator(y.len(), y.iter().map(|v| (v - y_mean) / y_scale));
        let diffs = SqDiffs::new(x);
        let noise = config.noise;

        let objective = |theta: &[f64]| -> f64 {
            let params = KernelParams::from_log(theta, d, noise);
            let k = diffs.gram(&params);
            match factorize(&k, params.noise_variance) {
                Some((factor, _)) => {
                    let alpha = factor.solve(&ys);
                    -log_likelihood(&factor, &ys, &alpha)
                }
                None => f64::INFINITY,
            }
        };

        let n_theta = d + 1 + usize::from(noise == NoiseModel::Estimate);
        let mut rng = seed::rng(seed);
        let optimizer = NelderMead {
            max_evals: config.max_evals_per_restart.max(n_theta + 2),
            ..NelderMead::default()
        };

        let mut best: Option<(Vec<f64>, f64)> = None;
        let mut restart_starts = Vec::with_capacity(config.restarts.max(1));
        for restart in 0..config.restarts.max(1) {
            let mut theta0 = Vec::with_capacity(n_theta);
            if restart == 0 {
                theta0.extend(std::iter::repeat(0.3f64.ln()).take(d));
                theta0.push(0.0);
                if noise == NoiseModel::Estimate {
                    theta0.push(1e-3f64.ln());
                }
            } else {
                theta0.extend((0..d).map(|_| rng.gen_range(0.05f64.ln()..3.0f64.ln())));
                theta0.push(rng.gen_range(0.1f64.ln()..10.0f64.ln()));
                if noise == NoiseModel::Estimate {
                    theta0.push(rng.gen_range(1e-6f64.ln()..1e-1f64.ln()));
                }
            }
            let min = optimizer.minimize(objective, &theta0);
            restart_starts.push(-min.initial_value);
            if best.as_ref().map_or(true, |b| min.value < b.1) {
                best = Some((min.x, min.value));
            }
        }

        let (theta, value) = best.expect("at least one restart");
        if !value.is_finite() {
            return Err(Error::Model(format!(
                "covariance factorization failed for every candidate up to jitter {JITTER_MAX}"
            )));
        }
        let params = KernelParams::from_log(&theta, d, noise);
        let mut model = Self::condition_standardized(x, y, params, y_mean, y_scale, &diffs)?;
        model.restart_starts = restart_starts;
        Ok(model)
    }

    /// Conditions on the data with fixed hyperparameters.
    pub fn condition(
        x: &[Vec<f64>],
        y: &[f64],
        params: KernelParams,
        standardize: bool,
    ) -> Result<Self> {
        let d = check_data(x, y)?;
        if params.lengthscales.len() != d {
            return Err(Error::Model(format!(
                "{} lengthscales for {d}-dimensional inputs",
                params.lengthscales.len()
            )));
        }
        let (y_mean, y_scale) = standardization(y, standardize);
        Self::condition_standardized(x, y, params, y_mean, y_scale, &SqDiffs::new(x))
    }

    fn condition_standardized(
        x: &[Vec<f64>],
        y: &[f64],
        params: KernelParams,
        y_mean: f64,
        y_scale: f64,
        diffs: &SqDiffs,
    ) -> Result<Self> {
        let ys = DVector::from_iterator(y.len(), y.iter().map(|v| (v - y_mean) / y_scale));
        let k = diffs.gram(&params);
        let (factor, jitter) = factorize(&k, params.noise_variance).ok_or_else(|| {
            Error::Model(format!(
                "covariance factorization failed up to jitter {JITTER_MAX}"
            ))
        })?;
        let alpha = factor.solve(&ys);
        let log_likelihood = log_likelihood(&factor, &ys, &alpha);
        Ok(GpModel {
            train_x: x.to_vec(),
            train_y: y.to_vec(),
            params,
            factor,
            alpha,
            y_mean,
            y_scale,
            jitter,
            log_likelihood,
            restart_starts: Vec::new(),
        })
    }

    /// Posterior mean and variance at `x`.
    ///
    /// # Panics
    ///
    /// If `x` has the wrong dimension.
    pub fn predict(&self, x: &[f64]) -> Posterior {
        let n = self.train_x.len();
        let kx = DVector::from_iterator(
            n,
            self.train_x.iter().map(|xi| kernel(x, xi, &self.params)),
        );
        let mean = kx.dot(&self.alpha);
        let v = self
            .factor
            .l_dirty()
            .solve_lower_triangular(&kx)
            .expect("factor has a positive diagonal");
        let var = (self.params.signal_variance - v.norm_squared()).max(0.0);
        Posterior {
            mean: self.y_mean + self.y_scale * mean,
            variance: var * self.y_scale * self.y_scale,
        }
    }

    pub fn train_x(&self) -> &[Vec<f64>] {
        &self.train_x
    }

    pub fn train_y(&self) -> &[f64] {
        &self.train_y
    }

    pub fn len(&self) -> usize {
        self.train_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train_x.is_empty()
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    /// Diagonal jitter that was needed on top of the noise variance.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// `(mean, scale)` of the internal target standardization.
    pub fn standardization(&self) -> (f64, f64) {
        (self.y_mean, self.y_scale)
    }

    /// Lower-triangular factor `L` with `L·Lᵀ = K + (σ²_ε + jitter)·I`.
    pub fn factor(&self) -> DMatrix<f64> {
        self.factor.l()
    }

    /// Log marginal likelihood of the standardized targets.
    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }

    /// Log marginal likelihood at each restart's starting parameters.
    pub fn restart_start_likelihoods(&self) -> &[f64] {
        &self.restart_starts
    }
}

impl Surrogate for GpModel {
    fn predict(&self, x: &[f64]) -> Posterior {
        GpModel::predict(self, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::SearchSpace;

    fn unit_params(d: usize, noise: f64) -> KernelParams {
        KernelParams::new(vec![0.3; d], 1.0, noise).unwrap()
    }

    #[test]
    fn kernel_values() {
        let p = KernelParams::new(vec![1.0], 1.0, 1e-8).unwrap();
        assert_eq!(kernel(&[0.4], &[0.4], &p), 1.0);
        let expected = (1.0 + 5f64.sqrt() + 5.0 / 3.0) * (-(5f64.sqrt())).exp();
        assert!((kernel(&[0.0], &[1.0], &p) - expected).abs() < 1e-15);
        assert!((expected - 0.52399).abs() < 1e-5);
        assert!(kernel(&[0.0], &[1e3], &p) < 1e-300);
        let mut last = 1.0;
        for i in 1..50 {
            let v = kernel(&[0.0], &[i as f64 * 0.1], &p);
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn kernel_symmetric() {
        let p = KernelParams::new(vec![0.2, 0.7], 2.0, 1e-6).unwrap();
        let (a, b) = ([0.1, 0.9], [0.5, 0.3]);
        assert_eq!(kernel(&a, &b, &p), kernel(&b, &a, &p));
    }

    #[test]
    #[should_panic]
    fn kernel_dimension_mismatch_panics() {
        kernel(&[0.0], &[0.0, 1.0], &unit_params(1, 1e-8));
    }

    #[test]
    fn params_bounds_enforced() {
        assert!(KernelParams::new(vec![1e-4], 1.0, 1e-3).is_err());
        assert!(KernelParams::new(vec![1.0], 1e4, 1e-3).is_err());
        assert!(KernelParams::new(vec![1.0], 1.0, 2.0).is_err());
    }

    #[test]
    fn constant_targets() {
        let x = SearchSpace::unit(2).unwrap().sample_uniform(5, 1).unwrap();
        let x: Vec<Vec<f64>> = x.into_iter().map(|l| l.into_inner()).collect();
        let gp = GpModel::fit(&x, &[0.3; 5], &GpConfig::default(), 4).unwrap();
        for p in [[0.1, 0.1], [0.9, 0.5], [0.5, 0.5]] {
            assert!((gp.predict(&p).mean - 0.3).abs() < 1e-3);
        }
    }

    #[test]
    fn fit_is_deterministic() {
        let x: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64 / 5.0]).collect();
        let y: Vec<f64> = x.iter().map(|v| (4.0 * v[0]).cos()).collect();
        let a = GpModel::fit(&x, &y, &GpConfig::default(), 17).unwrap();
        let b = GpModel::fit(&x, &y, &GpConfig::default(), 17).unwrap();
        assert_eq!(a.params(), b.params());
    }

    #[test]
    fn fit_rejects_bad_data() {
        assert!(GpModel::fit(&[], &[], &GpConfig::default(), 0).is_err());
        assert!(GpModel::fit(&[vec![0.1]], &[f64::NAN], &GpConfig::default(), 0).is_err());
        assert!(GpModel::fit(&[vec![0.1], vec![0.2, 0.3]], &[1.0, 2.0], &GpConfig::default(), 0)
            .is_err());
    }

    #[test]
    fn interpolates_training_points() {
        let x: Vec<Vec<f64>> = vec![vec![0.1, 0.2], vec![0.5, 0.9], vec![0.8, 0.4]];
        let y = vec![0.2, -1.0, 3.5];
        let gp = GpModel::condition(&x, &y, unit_params(2, 1e-8), true).unwrap();
        let (_, scale) = gp.standardization();
        for (xi, yi) in x.iter().zip(&y) {
            let p = gp.predict(xi);
            assert!((p.mean - yi).abs() < 1e-5);
            assert!(p.variance <= 1e-4 * scale * scale);
        }
    }

    #[test]
    fn reverts_to_prior_far_away() {
        let x = vec![vec![0.0]];
        let params = KernelParams::new(vec![0.01], 1.0, 1e-8).unwrap();
        let gp = GpModel::condition(&x, &[1.0], params, false).unwrap();
        let p = gp.predict(&[0.5]);
        assert!((p.variance - 1.0).abs() < 0.01);
    }

    #[test]
    fn factor_reconstructs_covariance() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 / 9.0, (i * i) as f64 / 81.0]).collect();
        let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let params = unit_params(2, 1e-3);
        let gp = GpModel::condition(&x, &y, params.clone(), true).unwrap();
        assert_eq!(gp.jitter(), 0.0);
        let l = gp.factor();
        let mut k = DMatrix::from_fn(10, 10, |i, j| kernel(&x[i], &x[j], &params));
        for i in 0..10 {
            k[(i, i)] += params.noise_variance;
        }
        let rel = (&l * l.transpose() - &k).norm() / k.norm();
        assert!(rel < 1e-8);
    }

    #[test]
    fn duplicate_rows_use_jitter() {
        let x = vec![vec![0.5], vec![0.5], vec![0.5]];
        let params = KernelParams::new(vec![0.3], 1.0, 1e-8).unwrap();
        let gp = GpModel::condition(&x, &[1.0, 1.0, 1.0], params, false).unwrap();
        assert!(gp.jitter() <= JITTER_MAX);
        assert!(gp.predict(&[0.5]).variance >= 0.0);
    }

    #[test]
    fn likelihood_not_below_restart_starts() {
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64 / 7.0]).collect();
        let y: Vec<f64> = x.iter().map(|v| (6.0 * v[0]).sin()).collect();
        let gp = GpModel::fit(&x, &y, &GpConfig::default(), 3).unwrap();
        assert_eq!(gp.restart_start_likelihoods().len(), 8);
        for &s in gp.restart_start_likelihoods() {
            assert!(gp.log_likelihood() >= s - 1e-9);
        }
    }
}
