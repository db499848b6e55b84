//! Augmented Gaussian processes.
//!
//! One GP is fitted per (source, objective). For each objective, cheap-source
//! observations whose source model agrees with the ground-truth model to
//! within `alpha` ground-truth posterior standard deviations are added to the
//! ground-truth observations, and a single GP is refitted on the union.
//!
//! Sources are numbered from 1; source 1 is the ground truth.

use crate::error::{Error, Result};
use crate::gp::{GpConfig, GpModel, Posterior, Surrogate};
use crate::seed;

/// Observations collected on one source.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SourceData {
    pub x: Vec<Vec<f64>>,
    /// One row of objectives per location.
    pub y: Vec<Vec<f64>>,
}

impl SourceData {
    pub fn push(&mut self, x: Vec<f64>, y: Vec<f64>) {
        self.x.push(x);
        self.y.push(y);
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn column(&self, m: usize) -> Vec<f64> {
        self.y.iter().map(|row| row[m]).collect()
    }
}

/// Seed for the GP of `(source, objective)`. The AGP of objective `m` reuses
/// the ground-truth seed so an empty augmentation reproduces that model.
pub fn model_seed(base: u64, source: usize, objective: usize) -> u64 {
    seed::derive(base, &[seed::TAG_FIT, source as u64, objective as u64])
}

/// The S × M grid of independently fitted GPs.
#[derive(Debug, Clone)]
pub struct SourceObjectiveModels {
    data: Vec<SourceData>,
    grid: Vec<Vec<GpModel>>,
    n_objectives: usize,
}

impl SourceObjectiveModels {
    /// Fits one GP per (source, objective). `data[s - 1]` holds source `s`.
    pub fn fit(data: Vec<SourceData>, n_objectives: usize, gp: &GpConfig, seed: u64) -> Result<Self> {
        if data.is_empty() || data[0].is_empty() {
            return Err(Error::Model("ground truth needs at least one observation".into()));
        }
        if n_objectives == 0 {
            return Err(Error::Model("need at least one objective".into()));
        }
        let mut grid = Vec::with_capacity(data.len());
        for (i, src) in data.iter().enumerate() {
            if src.is_empty() {
                return Err(Error::Model(format!("source {} has no observations", i + 1)));
            }
            if src.y.iter().any(|row| row.len() != n_objectives) {
                return Err(Error::Model(format!(
                    "source {} has rows with the wrong objective count",
                    i + 1
                )));
            }
            let row = (0..n_objectives)
                .map(|m| GpModel::fit(&src.x, &src.column(m), gp, model_seed(seed, i + 1, m)))
                .collect::<Result<Vec<_>>>()?;
            grid.push(row);
        }
        Ok(SourceObjectiveModels {
            data,
            grid,
            n_objectives,
        })
    }

    /// Assembles a grid from already fitted models.
    pub fn from_parts(data: Vec<SourceData>, grid: Vec<Vec<GpModel>>) -> Result<Self> {
        let n_objectives = grid.first().map_or(0, Vec::len);
        if data.is_empty() || data.len() != grid.len() || grid.iter().any(|r| r.len() != n_objectives) {
            return Err(Error::Model("model grid does not match the source data".into()));
        }
        Ok(SourceObjectiveModels {
            data,
            grid,
            n_objectives,
        })
    }

    pub fn n_sources(&self) -> usize {
        self.data.len()
    }

    pub fn n_objectives(&self) -> usize {
        self.n_objectives
    }

    pub fn data(&self, source: usize) -> &SourceData {
        &self.data[source - 1]
    }

    pub fn model(&self, source: usize, objective: usize) -> &GpModel {
        &self.grid[source - 1][objective]
    }
}

/// Indices into the observations of `source` that pass the reliability test
/// `|μ_1m(x) − μ_sm(x)| ≤ α·σ_1m(x)`, both means evaluated at the cheap
/// source's own locations.
///
/// # Panics
///
/// If `source` is the ground truth or out of range.
pub fn reliability_index(
    models: &SourceObjectiveModels,
    source: usize,
    objective: usize,
    alpha: f64,
) -> Vec<usize> {
    assert!(source >= 2 && source <= models.n_sources(), "source {source} is not a cheap source");
    let truth = models.model(1, objective);
    let cheap = models.model(source, objective);
    models
        .data(source)
        .x
        .iter()
        .enumerate()
        .filter(|(_, x)| {
            let t = truth.predict(x);
            (t.mean - cheap.predict(x).mean).abs() <= alpha * t.std_dev()
        })
        .map(|(i, _)| i)
        .collect()
}

/// GP on the ground-truth observations of one objective plus the reliable
/// cheap observations.
#[derive(Debug, Clone)]
pub struct AgpModel {
    objective: usize,
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    provenance: Vec<usize>,
    /// `reliable[s - 2]` is the reliability index set of source `s`.
    reliable: Vec<Vec<usize>>,
    model: GpModel,
}

impl AgpModel {
    pub fn objective(&self) -> usize {
        self.objective
    }

    pub fn augmented_x(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn augmented_y(&self) -> &[f64] {
        &self.y
    }

    /// Originating source of each augmented point.
    pub fn provenance(&self) -> &[usize] {
        &self.provenance
    }

    /// Reliability index set recorded at fit time for cheap `source`.
    pub fn reliable(&self, source: usize) -> &[usize] {
        &self.reliable[source - 2]
    }

    pub fn model(&self) -> &GpModel {
        &self.model
    }

    pub fn predict(&self, x: &[f64]) -> Posterior {
        self.model.predict(x)
    }
}

impl Surrogate for AgpModel {
    fn predict(&self, x: &[f64]) -> Posterior {
        self.model.predict(x)
    }
}

/// Builds the augmented training set for `objective` and fits its GP.
pub fn augment_and_fit(
    models: &SourceObjectiveModels,
    objective: usize,
    alpha: f64,
    gp: &GpConfig,
    seed: u64,
) -> Result<AgpModel> {
    let truth = models.data(1);
    let mut x = truth.x.clone();
    let mut y = truth.column(objective);
    let mut provenance = vec![1; truth.len()];
    let mut reliable = Vec::with_capacity(models.n_sources().saturating_sub(1));
    for s in 2..=models.n_sources() {
        let idx = reliability_index(models, s, objective, alpha);
        let src = models.data(s);
        for &i in &idx {
            x.push(src.x[i].clone());
            y.push(src.y[i][objective]);
            provenance.push(s);
        }
        reliable.push(idx);
    }
    let model = if x.len() == truth.len() {
        models.model(1, objective).clone()
    } else {
        GpModel::fit(&x, &y, gp, model_seed(seed, 1, objective))?
    };
    Ok(AgpModel {
        objective,
        x,
        y,
        provenance,
        reliable,
        model,
    })
}

/// One AGP per objective.
pub fn fit_agps(
    models: &SourceObjectiveModels,
    alpha: f64,
    gp: &GpConfig,
    seed: u64,
) -> Result<Vec<AgpModel>> {
    (0..models.n_objectives())
        .map(|m| augment_and_fit(models, m, alpha, gp, seed))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentationCounts {
    /// Number of ground-truth observations, `n_1`.
    pub ground_truth: usize,
    /// `per_source[s - 2][m]` = augmented points of cheap source `s` in AGP `m`.
    pub per_source: Vec<Vec<usize>>,
}

impl AugmentationCounts {
    pub fn count(&self, source: usize, objective: usize) -> usize {
        self.per_source[source - 2][objective]
    }

    /// Some cheap source contributes more points to some AGP than the ground
    /// truth does.
    pub fn safeguard_triggered(&self) -> bool {
        self.per_source.iter().flatten().any(|&c| c > self.ground_truth)
    }
}

/// Counts augmenting points per (cheap source, objective) from provenance.
pub fn augmentation_counts(agps: &[AgpModel], models: &SourceObjectiveModels) -> AugmentationCounts {
    let per_source = (2..=models.n_sources())
        .map(|s| {
            let mut row = vec![0; models.n_objectives()];
            for agp in agps {
                row[agp.objective] = agp.provenance.iter().filter(|&&p| p == s).count();
            }
            row
        })
        .collect();
    AugmentationCounts {
        ground_truth: models.data(1).len(),
        per_source,
    }
}
