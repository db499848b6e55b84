//! The budgeted multi-source, multi-objective optimization loop.
//!
//! Each iteration fits one GP per (source, objective), fuses them into one
//! augmented GP per objective, picks the next location by maximizing EHVI on
//! the augmented models, then picks the source by cost-weighted discrepancy
//! at that location. Only ground-truth outcomes enter the Pareto archive.

use serde::{Deserialize, Serialize};

use crate::acquisition::{self, EhviConfig};
use crate::agp::{self, AugmentationCounts, SourceData, SourceObjectiveModels};
use crate::error::{Error, Result};
use crate::gp::GpConfig;
use crate::pareto::ParetoArchive;
use crate::seed;
use crate::sources::{self, Evaluator, SourceBinding, SourceSpec, GROUND_TRUTH};
use crate::space::{Location, SearchSpace};

/// Which posterior mean the source discrepancies are measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceSelection {
    /// The augmented GP mean of each objective.
    #[default]
    AgpReference,
    /// The ground-truth GP mean. The ground truth then always has zero
    /// discrepancy and is selected unless a cheaper source ties at zero.
    GroundTruthReference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub space: SearchSpace,
    pub sources: Vec<SourceSpec>,
    /// Total query cost allowed, `C_max`.
    pub budget: f64,
    pub n_init_ground: usize,
    /// Initial design size on every cheap source.
    pub n_init_cheap: usize,
    pub alpha: f64,
    pub reference: Vec<f64>,
    pub design_seed: u64,
    pub run_seed: u64,
    pub acquisition: EhviConfig,
    pub gp: GpConfig,
    pub source_selection: SourceSelection,
    /// A cheap source already observed within this Euclidean distance of the
    /// chosen location is replaced by the ground truth. 0 disables the guard.
    #[serde(default = "default_repeat_radius")]
    pub repeat_radius: f64,
}

fn default_repeat_radius() -> f64 {
    0.01
}

/// Initial design sizes `(ground, cheap)`: a `2d`-point ground-truth design's
/// cost, with about 65% of the points kept on the ground truth and the
/// remaining cost spent on cheap points.
pub fn default_initial_design(d: usize, ground_cost: f64, cheap_cost: f64) -> (usize, usize) {
    let total = 2.0 * d as f64 * ground_cost;
    let ground = (1.3 * d as f64).round() as usize;
    let cheap = ((total - ground as f64 * ground_cost) / cheap_cost).floor() as usize;
    (ground, cheap)
}

/// `C_max = 20·d`.
pub fn default_budget(d: usize) -> f64 {
    20.0 * d as f64
}

impl RunConfig {
    /// Defaults: budget `20d`, the split initial design, `alpha = 1`,
    /// reference `(1, ..., 1)` with two objectives.
    pub fn new(space: SearchSpace, sources: Vec<SourceSpec>) -> Self {
        let d = space.dim();
        let c1 = sources.first().map_or(1.0, |s| s.cost);
        let cheap = sources.get(1).map_or(c1, |s| s.cost);
        let (n_init_ground, n_init_cheap) = if sources.len() > 1 {
            default_initial_design(d, c1, cheap)
        } else {
            (2 * d, 0)
        };
        RunConfig {
            space,
            sources,
            budget: default_budget(d),
            n_init_ground,
            n_init_cheap,
            alpha: 1.0,
            reference: vec![1.0, 1.0],
            design_seed: 0,
            run_seed: 0,
            acquisition: EhviConfig::default(),
            gp: GpConfig::default(),
            source_selection: SourceSelection::default(),
            repeat_radius: default_repeat_radius(),
        }
    }

    pub fn n_objectives(&self) -> usize {
        self.reference.len()
    }

    pub fn initial_cost(&self) -> f64 {
        let cheap: f64 = self.sources.iter().skip(1).map(|s| s.cost).sum();
        self.n_init_ground as f64 * self.sources[0].cost + self.n_init_cheap as f64 * cheap
    }

    pub fn validate(&self) -> Result<()> {
        sources::validate_sources(&self.sources)?;
        if !(self.budget.is_finite() && self.budget > 0.0) {
            return Err(Error::Config("budget must be positive".into()));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::Config("alpha must be positive".into()));
        }
        if self.reference.len() < 2 || self.reference.iter().any(|r| !r.is_finite()) {
            return Err(Error::Config(
                "reference point needs at least two finite objectives".into(),
            ));
        }
        if !(self.repeat_radius >= 0.0) {
            return Err(Error::Config("repeat_radius must be non-negative".into()));
        }
        if self.n_init_ground == 0 {
            return Err(Error::Config("n_init_ground must be at least 1".into()));
        }
        if self.sources.len() > 1 && self.n_init_cheap == 0 {
            return Err(Error::Config(
                "n_init_cheap must be at least 1 when cheap sources are configured".into(),
            ));
        }
        let init = self.initial_cost();
        if init >= self.budget {
            return Err(Error::Config(format!(
                "initial design cost {init} must be below the budget C_max = {}",
                self.budget
            )));
        }
        let synthetic = self
            .sources
            .iter()
            .any(|s| matches!(s.binding, SourceBinding::Synthetic(_)));
        if synthetic && self.space.dim() < 2 {
            return Err(Error::Config("synthetic benchmarks need d >= 2".into()));
        }
        self.acquisition.validate()
    }

    /// The same problem restricted to the ground truth, with an initial
    /// design of equal cost.
    pub fn single_source(&self) -> RunConfig {
        let c1 = self.sources[0].cost;
        let cheap: f64 = self.sources.iter().skip(1).map(|s| s.cost).sum();
        let extra = (self.n_init_cheap as f64 * cheap / c1).floor() as usize;
        RunConfig {
            sources: vec![self.sources[0].clone()],
            n_init_ground: self.n_init_ground + extra,
            n_init_cheap: 0,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub index: usize,
    pub source: usize,
    pub location: Location,
    /// Decoded native values of `location`.
    pub native: Vec<f64>,
    pub outcome: Vec<f64>,
    pub cost: f64,
    pub cumulative_cost: f64,
    pub query_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum Termination {
    BudgetExhausted,
    EvaluatorFailure { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub method: String,
    pub config: RunConfig,
    pub records: Vec<QueryRecord>,
    /// `(cumulative cost, ground-truth archive hypervolume)` after each record.
    pub hv_curve: Vec<(f64, f64)>,
    pub archive: ParetoArchive,
    pub termination: Termination,
}

impl RunTrace {
    pub fn final_hypervolume(&self) -> f64 {
        self.hv_curve.last().map_or(0.0, |p| p.1)
    }

    pub fn total_cost(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cumulative_cost)
    }

    pub fn completed(&self) -> bool {
        self.termination == Termination::BudgetExhausted
    }
}

/// How one iteration chose its query.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub location: Location,
    pub source: usize,
    pub safeguard: bool,
    /// The selected cheap source was already observed next to the location,
    /// so the ground truth was queried instead.
    pub repeat: bool,
    /// Cost-weighted discrepancy per source; empty when the safeguard fired.
    pub scores: Vec<f64>,
    pub counts: AugmentationCounts,
    /// The chosen source was unaffordable and a cheaper one was used.
    pub fallback: bool,
}

/// Index (1-based) of the smallest `cost · discrepancy`, ties to the
/// smallest id.
pub fn select_source(costs: &[f64], discrepancies: &[f64]) -> usize {
    assert_eq!(costs.len(), discrepancies.len());
    let mut best = 0;
    let mut best_score = f64::INFINITY;
    for (i, (c, d)) in costs.iter().zip(discrepancies).enumerate() {
        let score = c * d;
        if score < best_score {
            best = i;
            best_score = score;
        }
    }
    best + 1
}

/// `preferred` if affordable, else the cheapest affordable source (ties to
/// the smallest id), else `None`.
pub fn affordable_source(costs: &[f64], preferred: usize, remaining: f64) -> Option<usize> {
    if costs[preferred - 1] <= remaining {
        return Some(preferred);
    }
    costs
        .iter()
        .enumerate()
        .filter(|(_, &c)| c <= remaining)
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i + 1)
}

fn is_evaluator_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Source { .. } | Error::Protocol(_) | Error::Evaluator { .. } | Error::Io(_)
    )
}

pub struct MisoOptimizer<'e> {
    config: RunConfig,
    evaluator: &'e mut dyn Evaluator,
    data: Vec<SourceData>,
    archive: ParetoArchive,
    records: Vec<QueryRecord>,
    hv_curve: Vec<(f64, f64)>,
    cumulative_cost: f64,
    iteration: u64,
    termination: Option<Termination>,
}

impl<'e> MisoOptimizer<'e> {
    /// Validates the config and queries the initial designs. Ground-truth
    /// points come first, then each cheap source in id order.
    pub fn initialize(config: RunConfig, evaluator: &'e mut dyn Evaluator) -> Result<Self> {
        config.validate()?;
        let n_sources = config.sources.len();
        let mut opt = MisoOptimizer {
            archive: ParetoArchive::new(config.reference.clone()),
            data: vec![SourceData::default(); n_sources],
            config,
            evaluator,
            records: Vec::new(),
            hv_curve: Vec::new(),
            cumulative_cost: 0.0,
            iteration: 0,
            termination: None,
        };
        for s in 1..=n_sources {
            let n = if s == GROUND_TRUTH {
                opt.config.n_init_ground
            } else {
                opt.config.n_init_cheap
            };
            let design_seed = seed::derive(opt.config.design_seed, &[seed::TAG_DESIGN, s as u64]);
            for loc in opt.config.space.sample_uniform(n, design_seed)? {
                if !opt.query_and_record(s, loc)? {
                    return Ok(opt);
                }
            }
        }
        Ok(opt)
    }

    pub fn records(&self) -> &[QueryRecord] {
        &self.records
    }

    pub fn archive(&self) -> &ParetoArchive {
        &self.archive
    }

    pub fn remaining_budget(&self) -> f64 {
        self.config.budget - self.cumulative_cost
    }

    pub fn is_finished(&self) -> bool {
        self.termination.is_some()
    }

    /// Re-querying a cheap source where it was already observed leaves the
    /// AGPs, and hence the next location, essentially unchanged.
    fn observed_near(&self, source: usize, location: &[f64]) -> bool {
        let r2 = self.config.repeat_radius * self.config.repeat_radius;
        self.config.repeat_radius > 0.0
            && self.data[source - 1].x.iter().any(|x| {
                x.iter().zip(location).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= r2
            })
    }

    fn costs(&self) -> Vec<f64> {
        self.config.sources.iter().map(|s| s.cost).collect()
    }

    /// Returns `false` if the evaluator failed and the run was terminated.
    fn query_and_record(&mut self, source: usize, location: Location) -> Result<bool> {
        let spec = &self.config.sources[source - 1];
        let cost = spec.cost;
        let index = self.records.len();
        let query_seed = seed::derive(self.config.run_seed, &[seed::TAG_QUERY, index as u64]);
        let result = match sources::query(&mut *self.evaluator, spec, &location, query_seed) {
            Ok(r) => r,
            Err(e) if is_evaluator_error(&e) => {
                log::error!("query {index} on source {source} failed: {e}");
                self.termination = Some(Termination::EvaluatorFailure {
                    message: e.to_string(),
                });
                return Ok(false);
            }
            Err(e) => return Err(e),
        };
        if result.objectives.len() != self.config.n_objectives() {
            return Err(Error::Protocol(format!(
                "source {source} returned {} objectives, expected {}",
                result.objectives.len(),
                self.config.n_objectives()
            )));
        }
        self.cumulative_cost += cost;
        let native = self.config.space.decode(&location)?;
        self.data[source - 1].push(location.to_vec(), result.objectives.clone());
        if source == GROUND_TRUTH {
            self.archive
                .insert(location.clone(), result.objectives.clone(), source);
        }
        self.records.push(QueryRecord {
            index,
            source,
            location,
            native,
            outcome: result.objectives,
            cost,
            cumulative_cost: self.cumulative_cost,
            query_seed,
        });
        self.hv_curve
            .push((self.cumulative_cost, self.archive.hypervolume()));
        Ok(true)
    }

    /// One iteration. Returns `None` once the run has terminated.
    pub fn step(&mut self) -> Result<Option<StepInfo>> {
        if self.termination.is_some() {
            return Ok(None);
        }
        let costs = self.costs();
        let remaining = self.remaining_budget();
        if !costs.iter().any(|&c| c <= remaining) {
            self.termination = Some(Termination::BudgetExhausted);
            return Ok(None);
        }

        let iter = self.iteration;
        self.iteration += 1;
        let fit_seed = seed::derive(self.config.run_seed, &[seed::TAG_FIT, iter]);
        let models = SourceObjectiveModels::fit(
            self.data.clone(),
            self.config.n_objectives(),
            &self.config.gp,
            fit_seed,
        )?;
        let agps = agp::fit_agps(&models, self.config.alpha, &self.config.gp, fit_seed)?;

        let location = acquisition::select_location(
            &agps,
            &self.archive.front(),
            &self.config.reference,
            self.config.space.dim(),
            &self.config.acquisition,
            seed::derive(self.config.run_seed, &[seed::TAG_ACQ, iter]),
        );

        let counts = agp::augmentation_counts(&agps, &models);
        let safeguard = counts.safeguard_triggered();
        let (preferred, scores) = if safeguard {
            (GROUND_TRUTH, Vec::new())
        } else {
            let reference: Vec<f64> = match self.config.source_selection {
                SourceSelection::AgpReference => agps.iter().map(|a| a.predict(&location).mean).collect(),
                SourceSelection::GroundTruthReference => (0..self.config.n_objectives())
                    .map(|m| models.model(GROUND_TRUTH, m).predict(&location).mean)
                    .collect(),
            };
            let discrepancies: Vec<f64> = (1..=models.n_sources())
                .map(|s| {
                    reference
                        .iter()
                        .enumerate()
                        .map(|(m, r)| (r - models.model(s, m).predict(&location).mean).abs())
                        .sum()
                })
                .collect();
            let scores = costs.iter().zip(&discrepancies).map(|(c, d)| c * d).collect();
            (select_source(&costs, &discrepancies), scores)
        };
        let repeat = preferred != GROUND_TRUTH && self.observed_near(preferred, &location);
        let preferred = if repeat { GROUND_TRUTH } else { preferred };

        let Some(source) = affordable_source(&costs, preferred, remaining) else {
            self.termination = Some(Termination::BudgetExhausted);
            return Ok(None);
        };
        let info = StepInfo {
            location: location.clone(),
            source,
            safeguard,
            repeat,
            scores,
            counts,
            fallback: source != preferred,
        };
        log::debug!(
            "iter {iter}: source {source} (safeguard {safeguard}), remaining {remaining}"
        );
        if !self.query_and_record(source, location)? {
            return Ok(None);
        }
        Ok(Some(info))
    }

    pub fn into_trace(mut self, method: &str) -> RunTrace {
        let termination = self.termination.take().unwrap_or(Termination::BudgetExhausted);
        RunTrace {
            method: method.to_string(),
            config: self.config,
            records: self.records,
            hv_curve: self.hv_curve,
            archive: self.archive,
            termination,
        }
    }
}

/// Initializes and steps until no source is affordable.
pub fn run(config: RunConfig, evaluator: &mut dyn Evaluator) -> Result<RunTrace> {
    let method = if config.sources.len() > 1 {
        "miso-ehvi"
    } else {
        "ehvi"
    };
    let mut opt = MisoOptimizer::initialize(config, evaluator)?;
    while opt.step()?.is_some() {}
    Ok(opt.into_trace(method))
}

/// Uniform random search on the ground truth under the same budget.
pub fn random_search(config: RunConfig, evaluator: &mut dyn Evaluator) -> Result<RunTrace> {
    let config = RunConfig {
        n_init_ground: 1,
        n_init_cheap: 0,
        ..config.single_source()
    };
    config.validate()?;
    let c1 = config.sources[0].cost;
    let n = (config.budget / c1).floor() as usize;
    let mut opt = MisoOptimizer {
        archive: ParetoArchive::new(config.reference.clone()),
        data: vec![SourceData::default()],
        evaluator,
        records: Vec::new(),
        hv_curve: Vec::new(),
        cumulative_cost: 0.0,
        iteration: 0,
        termination: None,
        config,
    };
    if n > 0 {
        let seed = seed::derive(opt.config.run_seed, &[seed::TAG_RANDOM]);
        for loc in opt.config.space.sample_uniform(n, seed)? {
            if opt.remaining_budget() < c1 || !opt.query_and_record(GROUND_TRUTH, loc)? {
                break;
            }
        }
    }
    Ok(opt.into_trace("random-search"))
}
