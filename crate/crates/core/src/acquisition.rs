//! Expected hypervolume improvement and its maximization over the unit cube.
//!
//! For two objectives the expectation is exact: the region not dominated by
//! the front (inside the reference box) is split into one column per front
//! point, and each column's expected clipped volume factorizes over the two
//! independent Gaussian objectives. With more objectives the expectation is a
//! Monte Carlo average over a fixed set of common random draws.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::gp::{Posterior, Surrogate};
use crate::pareto;
use crate::seed;
use crate::space::Location;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EhviConfig {
    pub n_candidates: usize,
    pub n_local_refine: usize,
    pub local_steps: usize,
    /// Monte Carlo draws, used only with more than two objectives.
    pub mc_samples: usize,
}

impl Default for EhviConfig {
    fn default() -> Self {
        EhviConfig {
            n_candidates: 1000,
            n_local_refine: 10,
            local_steps: 50,
            mc_samples: 4096,
        }
    }
}

impl EhviConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if self.n_candidates == 0
            || self.n_local_refine == 0
            || self.local_steps == 0
            || self.mc_samples == 0
        {
            return Err(crate::Error::Config(
                "acquisition counts must all be at least 1".into(),
            ));
        }
        Ok(())
    }
}

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

fn normal_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t / std::f64::consts::SQRT_2)
}

/// `∫_{-∞}^{z} P(Y ≤ s) ds` for `Y ~ N(mean, sd²)`.
fn integrated_cdf(z: f64, mean: f64, sd: f64) -> f64 {
    if z == f64::NEG_INFINITY {
        return 0.0;
    }
    if sd <= 0.0 {
        return (z - mean).max(0.0);
    }
    let t = (z - mean) / sd;
    ((z - mean) * normal_cdf(t) + sd * INV_SQRT_2PI * (-0.5 * t * t).exp()).max(0.0)
}

#[derive(Debug, Clone)]
enum Method {
    /// Columns `[lo, hi] × (-∞, top]` partitioning the nondominated region.
    Cells(Vec<(f64, f64, f64)>),
    MonteCarlo {
        front: Vec<Vec<f64>>,
        draws: Vec<Vec<f64>>,
    },
}

/// EHVI against a fixed front, reusable across many posteriors.
#[derive(Debug, Clone)]
pub struct Ehvi {
    reference: Vec<f64>,
    method: Method,
}

impl Ehvi {
    /// # Panics
    ///
    /// If fewer than two objectives are given or front points differ in arity
    /// from the reference.
    pub fn new(front: &[Vec<f64>], reference: &[f64], mc_samples: usize, seed: u64) -> Self {
        let m = reference.len();
        assert!(m >= 2, "EHVI needs at least two objectives");
        assert!(front.iter().all(|p| p.len() == m), "front arity mismatch");
        let inside: Vec<Vec<f64>> = front
            .iter()
            .filter(|p| p.iter().zip(reference).all(|(x, r)| x < r))
            .cloned()
            .collect();
        let front = pareto::nondominated(&inside);
        let method = if m == 2 {
            let mut pts = front;
            pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
            let mut cells = Vec::with_capacity(pts.len() + 1);
            let mut lo = f64::NEG_INFINITY;
            let mut top = reference[1];
            for p in &pts {
                cells.push((lo, p[0], top));
                lo = p[0];
                top = p[1];
            }
            cells.push((lo, reference[0], top));
            Method::Cells(cells)
        } else {
            let mut rng = seed::rng(seed);
            let draws = (0..mc_samples.max(1))
                .map(|_| (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
                .collect();
            Method::MonteCarlo { front, draws }
        };
        Ehvi {
            reference: reference.to_vec(),
            method,
        }
    }

    pub fn value(&self, posteriors: &[Posterior]) -> f64 {
        assert_eq!(posteriors.len(), self.reference.len(), "posterior arity");
        match &self.method {
            Method::Cells(cells) => {
                let (m0, s0) = (posteriors[0].mean, posteriors[0].variance.max(0.0).sqrt());
                let (m1, s1) = (posteriors[1].mean, posteriors[1].variance.max(0.0).sqrt());
                let below = integrated_cdf(f64::NEG_INFINITY, m1, s1);
                cells
                    .iter()
                    .map(|&(lo, hi, top)| {
                        let w = (integrated_cdf(hi, m0, s0) - integrated_cdf(lo, m0, s0)).max(0.0);
                        if w == 0.0 {
                            return 0.0;
                        }
                        w * (integrated_cdf(top, m1, s1) - below).max(0.0)
                    })
                    .sum()
            }
            Method::MonteCarlo { front, draws } => {
                let sd: Vec<f64> = posteriors.iter().map(|p| p.variance.max(0.0).sqrt()).collect();
                let mut y = vec![0.0; posteriors.len()];
                let total: f64 = draws
                    .iter()
                    .map(|z| {
                        for (k, yk) in y.iter_mut().enumerate() {
                            *yk = posteriors[k].mean + sd[k] * z[k];
                        }
                        pareto::hvi(front, &self.reference, &y)
                    })
                    .sum();
                total / draws.len() as f64
            }
        }
    }
}

/// Expected hypervolume improvement of independent Gaussian objectives.
pub fn ehvi(posteriors: &[Posterior], front: &[Vec<f64>], reference: &[f64]) -> f64 {
    Ehvi::new(front, reference, EhviConfig::default().mc_samples, 0).value(posteriors)
}

/// Maximizes EHVI over `[0, 1]^dim`: scores uniform candidates, then runs a
/// coordinate pattern search from the best few. Deterministic given `seed`.
pub fn select_location<S: Surrogate>(
    models: &[S],
    front: &[Vec<f64>],
    reference: &[f64],
    dim: usize,
    config: &EhviConfig,
    seed: u64,
) -> Location {
    let acq = Ehvi::new(front, reference, config.mc_samples, seed::derive(seed, &[1]));
    let score = |x: &[f64]| -> f64 {
        let post: Vec<Posterior> = models.iter().map(|m| m.predict(x)).collect();
        acq.value(&post)
    };
    maximize(score, dim, config, seed)
}

/// Derivative-free maximization of `score` over the unit cube.
pub fn maximize<F>(score: F, dim: usize, config: &EhviConfig, seed: u64) -> Location
where
    F: Fn(&[f64]) -> f64,
{
    let mut rng = seed::rng(seed);
    let candidates: Vec<Vec<f64>> = (0..config.n_candidates.max(1))
        .map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect())
        .collect();
    let scores: Vec<f64> = candidates.iter().map(|c| finite_or_zero(score(c))).collect();

    let mut order: Vec<usize> = (0..candidates.len()).collect();
    // stable: equal scores keep candidate order
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut best = candidates[order[0]].clone();
    let mut best_score = scores[order[0]];
    for &start in order.iter().take(config.n_local_refine.max(1)) {
        let (x, s) = pattern_search(&score, candidates[start].clone(), scores[start], config.local_steps);
        if s > best_score {
            best = x;
            best_score = s;
        }
    }
    Location::clamped(best)
}

fn finite_or_zero(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

fn pattern_search<F>(score: &F, mut x: Vec<f64>, mut fx: f64, steps: usize) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let mut step = 0.1;
    for _ in 0..steps {
        let mut improved = false;
        for j in 0..x.len() {
            for dir in [1.0, -1.0] {
                let old = x[j];
                let moved = (old + dir * step).clamp(0.0, 1.0);
                if moved == old {
                    continue;
                }
                x[j] = moved;
                let f = finite_or_zero(score(&x));
                if f > fx {
                    fx = f;
                    improved = true;
                    break;
                }
                x[j] = old;
            }
        }
        if !improved {
            step *= 0.5;
            if step < 1e-9 {
                break;
            }
        }
    }
    (x, fx)
}
