//! Information sources: cost metadata and evaluation dispatch.
//!
//! A source is either a built-in synthetic benchmark (pure function of the
//! location and seed) or a binding to an external evaluator process speaking
//! the newline-delimited JSON protocol in [`protocol`].

pub mod external;
pub mod protocol;
pub mod synthetic;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::Location;

pub use external::{ExternalConfig, ExternalEvaluator};
pub use synthetic::{make_synthetic_suite, BiasProfile, SyntheticEvaluator, SyntheticSource};

/// Identifier of the ground-truth source.
pub const GROUND_TRUTH: usize = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub id: usize,
    pub cost: f64,
    #[serde(flatten)]
    pub binding: SourceBinding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SourceBinding {
    Synthetic(SyntheticSource),
    /// Served by the external evaluator; `descriptor` is passed through
    /// untouched for reporting.
    External {
        #[serde(default)]
        descriptor: serde_json::Value,
    },
}

impl SourceSpec {
    pub fn is_external(&self) -> bool {
        matches!(self.binding, SourceBinding::External { .. })
    }
}

/// Checks ids are `1..=S` in order and costs are positive. Cheap sources
/// costing more than the ground truth are allowed but logged.
pub fn validate_sources(sources: &[SourceSpec]) -> Result<()> {
    if sources.is_empty() {
        return Err(Error::Config("at least the ground-truth source is required".into()));
    }
    for (i, s) in sources.iter().enumerate() {
        if s.id != i + 1 {
            return Err(Error::Config(format!(
                "source ids must be 1..=S in order; position {} has id {}",
                i + 1,
                s.id
            )));
        }
        if !(s.cost.is_finite() && s.cost > 0.0) {
            return Err(Error::Config(format!("source {} needs a positive cost", s.id)));
        }
        if let SourceBinding::Synthetic(syn) = &s.binding {
            syn.validate()?;
        }
    }
    let c1 = sources[0].cost;
    for s in &sources[1..] {
        if s.cost > c1 {
            log::warn!("cheap source {} costs {} > ground-truth cost {c1}", s.id, s.cost);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub objectives: Vec<f64>,
    /// Measured evaluation time in seconds; informational only, the budget
    /// is charged the configured source cost.
    pub wall_cost: f64,
    pub seed_used: u64,
}

/// Something that can evaluate a source at a location.
pub trait Evaluator {
    fn evaluate(&mut self, source: &SourceSpec, loc: &Location, seed: u64) -> Result<EvalResult>;
}

/// Evaluates `source` at `loc` and checks the result is usable.
pub fn query(
    evaluator: &mut dyn Evaluator,
    source: &SourceSpec,
    loc: &Location,
    seed: u64,
) -> Result<EvalResult> {
    let result = evaluator.evaluate(source, loc, seed)?;
    if result.objectives.is_empty() || result.objectives.iter().any(|v| !v.is_finite()) {
        return Err(Error::Protocol(format!(
            "source {} returned unusable objectives {:?}",
            source.id, result.objectives
        )));
    }
    Ok(result)
}
