//! Independent reference implementations used as test oracles. Each one is
//! deliberately naive: exponential, dense or brute force.

#![allow(dead_code)]

use miso_mobo::gp::KernelParams;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Hypervolume by inclusion–exclusion over every non-empty subset.
pub fn hv_inclusion_exclusion(points: &[Vec<f64>], r: &[f64]) -> f64 {
    let n = points.len();
    assert!(n <= 20, "inclusion-exclusion is exponential");
    let mut total = 0.0;
    for mask in 1u32..(1 << n) {
        let mut corner = vec![f64::NEG_INFINITY; r.len()];
        for (i, p) in points.iter().enumerate() {
            if mask & (1 << i) != 0 {
                for (c, v) in corner.iter_mut().zip(p) {
                    *c = c.max(*v);
                }
            }
        }
        let vol: f64 = corner.iter().zip(r).map(|(c, rr)| (rr - c).max(0.0)).product();
        if mask.count_ones() % 2 == 1 {
            total += vol;
        } else {
            total -= vol;
        }
    }
    total
}

/// 2-objective hypervolume by sorting and summing slabs.
pub fn hv2_sweep(points: &[Vec<f64>], r: &[f64]) -> f64 {
    let mut pts: Vec<&Vec<f64>> = points.iter().filter(|p| p[0] < r[0] && p[1] < r[1]).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut hv = 0.0;
    let mut best_y = r[1];
    for (i, p) in pts.iter().enumerate() {
        if p[1] < best_y {
            best_y = p[1];
        }
        let next_x = pts.get(i + 1).map_or(r[0], |q| q[0]);
        hv += (next_x - p[0]) * (r[1] - best_y);
    }
    hv
}

/// Pareto filter by comparing every pair.
pub fn brute_force_front(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let dominates = |a: &Vec<f64>, b: &Vec<f64>| {
        a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
    };
    let mut out: Vec<Vec<f64>> = Vec::new();
    for p in points {
        if points.iter().any(|q| dominates(q, p)) || out.contains(p) {
            continue;
        }
        out.push(p.clone());
    }
    out
}

/// Matérn 5/2 ARD written out from its textbook form.
pub fn matern52(a: &[f64], b: &[f64], p: &KernelParams) -> f64 {
    let r = a
        .iter()
        .zip(b)
        .zip(&p.lengthscales)
        .map(|((x, y), l)| ((x - y) / l).powi(2))
        .sum::<f64>()
        .sqrt();
    let s = 5f64.sqrt() * r;
    p.signal_variance * (1.0 + s + s * s / 3.0) * (-s).exp()
}

/// Posterior mean and variance (latent, without observation noise) from an
/// explicit LU inverse of `K + (noise + jitter) I`, on raw targets.
pub fn dense_posterior(
    x: &[Vec<f64>],
    y: &[f64],
    p: &KernelParams,
    jitter: f64,
    at: &[f64],
) -> (f64, f64) {
    let n = x.len();
    let mut k = DMatrix::from_fn(n, n, |i, j| matern52(&x[i], &x[j], p));
    for i in 0..n {
        k[(i, i)] += p.noise_variance + jitter;
    }
    let inv = k.lu().try_inverse().expect("invertible covariance");
    let kx = DVector::from_iterator(n, x.iter().map(|xi| matern52(at, xi, p)));
    let yv = DVector::from_column_slice(y);
    let mean = (kx.transpose() * &inv * yv)[0];
    let var = matern52(at, at, p) - (kx.transpose() * &inv * &kx)[0];
    (mean, var)
}

pub fn uniform_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect()
}

/// Standard normal via Box–Muller, independent of the library's sampler.
pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Monte Carlo EHVI in two objectives: mean and standard error of the
/// hypervolume improvement over `samples` Gaussian draws.
pub fn mc_ehvi2(
    front: &[Vec<f64>],
    r: &[f64],
    mean: [f64; 2],
    sd: [f64; 2],
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    let base = hv2_sweep(front, r);
    let mut rng = rng(seed);
    let mut pts = front.to_vec();
    pts.push(vec![0.0, 0.0]);
    let last = pts.len() - 1;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let y = [mean[0] + sd[0] * normal(&mut rng), mean[1] + sd[1] * normal(&mut rng)];
        let gain = if y[0] < r[0] && y[1] < r[1] {
            pts[last] = y.to_vec();
            (hv2_sweep(&pts, r) - base).max(0.0)
        } else {
            0.0
        };
        sum += gain;
        sum_sq += gain * gain;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

/// A random mutually nondominated 2-objective front inside `[0, 1)^2`.
pub fn random_front2(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let mut xs: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 0.9).collect();
    let mut ys: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 0.9).collect();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(|a, b| b.total_cmp(a));
    xs.into_iter().zip(ys).map(|(a, b)| vec![a, b]).collect()
}

/// Dense-oracle posterior of a conditioned model, undoing its internal
/// standardization. Returns `(mean, sd)`.
pub fn model_posterior(gp: &miso_mobo::gp::GpModel, at: &[f64]) -> (f64, f64) {
    let (mu, scale) = gp.standardization();
    let ys: Vec<f64> = gp.train_y().iter().map(|v| (v - mu) / scale).collect();
    let (m, v) = dense_posterior(gp.train_x(), &ys, gp.params(), gp.jitter(), at);
    (mu + scale * m, scale * v.max(0.0).sqrt())
}
