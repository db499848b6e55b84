//! Synthetic bi-objective benchmarks with a cheap, biased and noisy twin.
//!
//! The ground truth is a ZDT-style problem whose objectives live in `[0, 1]`:
//! `f1 = u1`, `g = 1 + mean(u2..ud)` and `f2 = min(1, g·h(f1/g))`. On the
//! optimal set (`g = 1`) the front is `f2 = h(f1)`, which stays inside the
//! unit box, so the reference point `(1, 1)` applies unchanged.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{EvalResult, Evaluator, SourceBinding, SourceSpec};
use crate::error::{Error, Result};
use crate::seed;
use crate::space::Location;

pub const BENCHMARKS: &[&str] = &["zdt1-miso", "zdt2-miso"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasProfile {
    /// The same offset everywhere.
    Constant,
    /// Offset varying smoothly over the cube between 0 and the amplitude.
    #[default]
    Smooth,
}

/// A synthetic source: the benchmark plus an optional bias and noise.
/// Zero bias and zero noise gives the exact ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSource {
    pub benchmark: String,
    #[serde(default)]
    pub bias: f64,
    #[serde(default)]
    pub bias_profile: BiasProfile,
    #[serde(default)]
    pub noise_sd: f64,
    /// Base of the noise stream.
    #[serde(default)]
    pub seed: u64,
}

impl SyntheticSource {
    pub fn exact(benchmark: &str) -> Self {
        SyntheticSource {
            benchmark: benchmark.to_string(),
            bias: 0.0,
            bias_profile: BiasProfile::Smooth,
            noise_sd: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !BENCHMARKS.contains(&self.benchmark.as_str()) {
            return Err(Error::Config(format!(
                "unknown benchmark `{}` (known: {})",
                self.benchmark,
                BENCHMARKS.join(", ")
            )));
        }
        if !(self.bias.is_finite() && self.noise_sd.is_finite() && self.noise_sd >= 0.0) {
            return Err(Error::Config("bias must be finite and noise_sd nonnegative".into()));
        }
        Ok(())
    }

    /// Noise-free benchmark value.
    pub fn truth(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() < 2 {
            return Err(Error::Encoding("synthetic benchmarks need d >= 2".into()));
        }
        let f1 = u[0];
        let g = 1.0 + u[1..].iter().sum::<f64>() / (u.len() - 1) as f64;
        let ratio = f1 / g;
        let h = match self.benchmark.as_str() {
            "zdt1-miso" => 1.0 - ratio.sqrt(),
            "zdt2-miso" => 1.0 - ratio * ratio,
            other => return Err(Error::Config(format!("unknown benchmark `{other}`"))),
        };
        Ok(vec![f1, (g * h).min(1.0)])
    }

    fn bias_at(&self, u: &[f64], m: usize) -> f64 {
        match self.bias_profile {
            BiasProfile::Constant => self.bias,
            BiasProfile::Smooth => {
                let mean = u.iter().sum::<f64>() / u.len() as f64;
                let phase = std::f64::consts::TAU * (mean + 0.25 * m as f64);
                self.bias * 0.5 * (1.0 + phase.sin())
            }
        }
    }

    /// Benchmark value plus bias plus Gaussian noise; deterministic given the
    /// location, `query_seed` and the source's own seed.
    pub fn evaluate(&self, u: &[f64], query_seed: u64) -> Result<Vec<f64>> {
        let mut y = self.truth(u)?;
        let mut rng = (self.noise_sd > 0.0).then(|| {
            let loc_hash = u.iter().fold(0u64, |h, v| seed::mix(h ^ v.to_bits()));
            seed::rng(seed::derive(self.seed, &[seed::TAG_NOISE, query_seed, loc_hash]))
        });
        for (m, v) in y.iter_mut().enumerate() {
            *v += self.bias_at(u, m);
            if let Some(rng) = rng.as_mut() {
                *v += self.noise_sd * rng.sample::<f64, _>(StandardNormal);
            }
        }
        Ok(y)
    }
}

/// Ground truth plus one cheap source, costs `(2, 1)`.
pub fn make_synthetic_suite(
    name: &str,
    d: usize,
    cheap_bias: f64,
    cheap_noise_sd: f64,
    seed: u64,
) -> Result<Vec<SourceSpec>> {
    if d < 2 {
        return Err(Error::Config("synthetic suites need d >= 2".into()));
    }
    let truth = SyntheticSource::exact(name);
    truth.validate()?;
    let cheap = SyntheticSource {
        bias: cheap_bias,
        noise_sd: cheap_noise_sd,
        seed,
        ..truth.clone()
    };
    cheap.validate()?;
    Ok(vec![
        SourceSpec {
            id: 1,
            cost: 2.0,
            binding: SourceBinding::Synthetic(truth),
        },
        SourceSpec {
            id: 2,
            cost: 1.0,
            binding: SourceBinding::Synthetic(cheap),
        },
    ])
}

/// In-process evaluator for synthetic sources.
#[derive(Debug, Clone, Copy, Default)]
pub struct SyntheticEvaluator;

impl Evaluator for SyntheticEvaluator {
    fn evaluate(&mut self, source: &SourceSpec, loc: &Location, seed: u64) -> Result<EvalResult> {
        match &source.binding {
            SourceBinding::Synthetic(s) => Ok(EvalResult {
                objectives: s.evaluate(loc, seed)?,
                wall_cost: 0.0,
                seed_used: seed,
            }),
            SourceBinding::External { .. } => Err(Error::Config(format!(
                "source {} is external but no evaluator process is configured",
                source.id
            ))),
        }
    }
}
