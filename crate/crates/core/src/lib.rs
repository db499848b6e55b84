//! Multi-objective Bayesian optimization over multiple information sources.
//!
//! Cheap, biased sources are folded into one Gaussian process per objective
//! (the augmented GP) only where they agree with the ground-truth model. The
//! next location maximizes expected hypervolume improvement over those
//! models, and the source is chosen by cost-weighted discrepancy.
//!
//! Start with [`miso::run`] or the `examples/` directory.

pub mod acquisition;
pub mod agp;
pub mod error;
pub mod experiment;
pub mod gp;
pub mod miso;
pub mod optim;
pub mod pareto;
pub mod seed;
pub mod sources;
pub mod space;
pub mod trace;

pub use error::{Error, Result};
