//! Experiment configuration files and the `run` / `validate` commands.
//!
//! A config file is a single JSON object:
//!
//! ```json
//! {
//!   "space": "mlp",
//!   "sources": [
//!     {"id": 1, "cost": 2, "kind": "external", "descriptor": {"fraction": 1.0}},
//!     {"id": 2, "cost": 1, "kind": "external", "descriptor": {"fraction": 0.5}}
//!   ],
//!   "evaluator": {"command": ["python3", "evaluator.py", "eval.json"]},
//!   "budget": 200,
//!   "repetitions": 25,
//!   "design_seeds": 5,
//!   "seed": 7,
//!   "baseline": "random-search",
//!   "out_dir": "results/mlp"
//! }
//! ```
//!
//! `space` is a preset name (`"mlp"`, `"xgb"`), `{"unit": d}` or a list of
//! dimensions. `sources` is a list of source specs or a synthetic suite
//! shorthand `{"suite": "zdt1-miso", "cheap_bias": 0.05, "cheap_noise_sd": 0.02}`.
//! Every other field is optional; see [`ExperimentConfig`].

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::acquisition::EhviConfig;
use crate::error::{Error, Result};
use crate::gp::GpConfig;
use crate::miso::{self, RunConfig, RunTrace, SourceSelection};
use crate::seed;
use crate::sources::{
    make_synthetic_suite, Evaluator, ExternalConfig, ExternalEvaluator, SourceSpec,
    SyntheticEvaluator,
};
use crate::space::{Dimension, SearchSpace};
use crate::trace;

/// Overrides the evaluator command line (split on whitespace).
pub const EVALUATOR_ENV: &str = "FANG_EVALUATOR_CMD";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceSpec {
    Preset(String),
    Unit { unit: usize },
    Dims(Vec<Dimension>),
}

impl SpaceSpec {
    pub fn build(&self) -> Result<SearchSpace> {
        match self {
            SpaceSpec::Preset(name) => SearchSpace::preset(name),
            SpaceSpec::Unit { unit } => SearchSpace::unit(*unit),
            SpaceSpec::Dims(dims) => SearchSpace::new(dims.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SourcesSpec {
    Suite {
        suite: String,
        #[serde(default)]
        cheap_bias: f64,
        #[serde(default)]
        cheap_noise_sd: f64,
        #[serde(default)]
        seed: u64,
    },
    List(Vec<SourceSpec>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    #[default]
    None,
    RandomSearch,
}

impl std::str::FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Baseline::None),
            "random-search" | "random" => Ok(Baseline::RandomSearch),
            other => Err(Error::Config(format!("unknown baseline `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub space: SpaceSpec,
    pub sources: SourcesSpec,
    #[serde(default)]
    pub evaluator: Option<ExternalConfig>,
    /// Defaults to `20·d`.
    #[serde(default)]
    pub budget: Option<f64>,
    #[serde(default)]
    pub n_init_ground: Option<usize>,
    #[serde(default)]
    pub n_init_cheap: Option<usize>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_reference")]
    pub reference: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Number of distinct initial designs; must divide `repetitions`.
    /// Defaults to `repetitions` (one run per design).
    #[serde(default)]
    pub design_seeds: Option<usize>,
    #[serde(default)]
    pub baseline: Baseline,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub acquisition: EhviConfig,
    #[serde(default)]
    pub gp: GpConfig,
    #[serde(default)]
    pub source_selection: SourceSelection,
}

fn default_alpha() -> f64 {
    1.0
}

fn default_reference() -> Vec<f64> {
    vec![1.0, 1.0]
}

fn default_repetitions() -> usize {
    1
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub repetitions: Option<usize>,
    pub baseline: Option<Baseline>,
}

/// One repetition's seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepetitionSeeds {
    pub index: usize,
    pub design: usize,
    pub run: usize,
    pub design_seed: u64,
    pub run_seed: u64,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("cannot parse config: {e}")))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(out) = &o.out_dir {
            self.out_dir = out.clone();
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(r) = o.repetitions {
            self.repetitions = r;
            if self.design_seeds.is_some_and(|d| r % d != 0) {
                self.design_seeds = None;
            }
        }
        if let Some(b) = o.baseline {
            self.baseline = b;
        }
    }

    pub fn space(&self) -> Result<SearchSpace> {
        self.space.build()
    }

    pub fn sources(&self, d: usize) -> Result<Vec<SourceSpec>> {
        match &self.sources {
            SourcesSpec::Suite {
                suite,
                cheap_bias,
                cheap_noise_sd,
                seed,
            } => make_synthetic_suite(suite, d, *cheap_bias, *cheap_noise_sd, *seed),
            SourcesSpec::List(list) => Ok(list.clone()),
        }
    }

    pub fn has_external_sources(&self) -> bool {
        matches!(&self.sources, SourcesSpec::List(l) if l.iter().any(SourceSpec::is_external))
    }

    /// The run config for one repetition.
    pub fn run_config(&self, seeds: RepetitionSeeds) -> Result<RunConfig> {
        let space = self.space()?;
        let sources = self.sources(space.dim())?;
        let mut cfg = RunConfig::new(space, sources);
        if let Some(b) = self.budget {
            cfg.budget = b;
        }
        if let Some(n) = self.n_init_ground {
            cfg.n_init_ground = n;
        }
        if let Some(n) = self.n_init_cheap {
            cfg.n_init_cheap = n;
        }
        cfg.alpha = self.alpha;
        cfg.reference = self.reference.clone();
        cfg.design_seed = seeds.design_seed;
        cfg.run_seed = seeds.run_seed;
        cfg.acquisition = self.acquisition.clone();
        cfg.gp = self.gp.clone();
        cfg.source_selection = self.source_selection;
        Ok(cfg)
    }

    /// Design seeds × run seeds, in design-major order.
    pub fn repetition_seeds(&self) -> Result<Vec<RepetitionSeeds>> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        let designs = self.design_seeds.unwrap_or(self.repetitions);
        if designs == 0 || self.repetitions % designs != 0 {
            return Err(Error::Config(format!(
                "design_seeds ({designs}) must divide repetitions ({})",
                self.repetitions
            )));
        }
        let runs = self.repetitions / designs;
        Ok((0..designs)
            .flat_map(|i| (0..runs).map(move |j| (i, j)))
            .enumerate()
            .map(|(index, (i, j))| RepetitionSeeds {
                index,
                design: i,
                run: j,
                design_seed: seed::derive(self.seed, &[0xd5, i as u64]),
                run_seed: seed::derive(self.seed, &[0x5e, j as u64]),
            })
            .collect())
    }

    pub fn evaluator_config(&self) -> Result<ExternalConfig> {
        let mut cfg = self.evaluator.clone().unwrap_or_else(|| ExternalConfig::new(Vec::new()));
        if let Ok(cmd) = std::env::var(EVALUATOR_ENV) {
            let words: Vec<String> = cmd.split_whitespace().map(str::to_string).collect();
            if !words.is_empty() {
                cfg.command = words;
            }
        }
        if cfg.command.is_empty() {
            return Err(Error::Config(format!(
                "external sources need an evaluator command (config `evaluator` or {EVALUATOR_ENV})"
            )));
        }
        Ok(cfg)
    }
}

fn open_evaluator(cfg: &ExperimentConfig, space: &SearchSpace) -> Result<Box<dyn Evaluator>> {
    if cfg.has_external_sources() {
        Ok(Box::new(ExternalEvaluator::spawn(cfg.evaluator_config()?, space.clone())?))
    } else {
        Ok(Box::new(SyntheticEvaluator))
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub traces: Vec<PathBuf>,
    pub aggregate: PathBuf,
    pub final_hypervolumes: Vec<(String, f64)>,
    pub all_completed: bool,
}

fn write_trace(dir: &Path, seeds: RepetitionSeeds, trace: &RunTrace) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let stem = format!("run_{:03}_design{}_run{}", seeds.index, seeds.design, seeds.run);
    let csv = dir.join(format!("{stem}.csv"));
    fs::write(&csv, trace::csv_string(trace))?;
    let summary = serde_json::to_string_pretty(&trace::summary(trace))?;
    fs::write(dir.join(format!("{stem}.json")), summary + "\n")?;
    Ok(csv)
}

/// Aggregate CSV: one row per integer cost checkpoint with the median and
/// standard deviation of each method's hypervolume across repetitions.
pub fn aggregate_csv(methods: &[(String, Vec<RunTrace>)], max_cost: u64) -> String {
    let mut out = String::from("cost");
    for (name, _) in methods {
        out.push_str(&format!(",{name}_median,{name}_sd"));
    }
    out.push('\n');
    let curves: Vec<Vec<Vec<f64>>> = methods
        .iter()
        .map(|(_, traces)| {
            traces
                .iter()
                .map(|t| trace::hv_checkpoints(&t.hv_curve, max_cost))
                .collect()
        })
        .collect();
    for c in 0..=max_cost as usize {
        out.push_str(&c.to_string());
        for runs in &curves {
            let at: Vec<f64> = runs.iter().map(|r| r[c]).collect();
            out.push_str(&format!(",{},{}", trace::median(&at), trace::std_dev(&at)));
        }
        out.push('\n');
    }
    out
}

/// Runs every repetition (and the baseline, if any), writing per-run traces
/// and `aggregate.csv` under the output directory.
pub fn cmd_run(config: &ExperimentConfig) -> Result<RunReport> {
    let seeds = config.repetition_seeds()?;
    let space = config.space()?;
    for s in &seeds {
        config.run_config(*s)?.validate()?;
    }
    let out_dir = config.out_dir.clone();
    fs::create_dir_all(&out_dir)?;
    let mut evaluator = open_evaluator(config, &space)?;

    let mut methods: Vec<(String, Vec<RunTrace>)> = Vec::new();
    let mut paths = Vec::new();
    let mut all_completed = true;
    let mut budget = 0.0f64;

    let mut main = Vec::new();
    for s in &seeds {
        let cfg = config.run_config(*s)?;
        budget = cfg.budget;
        log::info!("repetition {} (design {}, run {})", s.index, s.design, s.run);
        let trace = miso::run(cfg, evaluator.as_mut())?;
        all_completed &= trace.completed();
        paths.push(write_trace(&out_dir.join(&trace.method), *s, &trace)?);
        let failed = !trace.completed();
        main.push(trace);
        if failed {
            break;
        }
    }
    methods.push((main[0].method.clone(), main));

    if config.baseline == Baseline::RandomSearch && all_completed {
        let mut base = Vec::new();
        for s in &seeds {
            let trace = miso::random_search(config.run_config(*s)?, evaluator.as_mut())?;
            all_completed &= trace.completed();
            paths.push(write_trace(&out_dir.join(&trace.method), *s, &trace)?);
            base.push(trace);
        }
        methods.push(("random-search".to_string(), base));
    }

    let aggregate = out_dir.join("aggregate.csv");
    fs::write(&aggregate, aggregate_csv(&methods, budget.floor() as u64))?;
    let final_hypervolumes = methods
        .iter()
        .flat_map(|(name, traces)| traces.iter().map(move |t| (name.clone(), t.final_hypervolume())))
        .collect();
    Ok(RunReport {
        out_dir,
        traces: paths,
        aggregate,
        final_hypervolumes,
        all_completed,
    })
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checks: Vec<String>,
    pub problems: Vec<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Checks the config without evaluating any objective. External evaluators
/// are started only to read their handshake.
pub fn cmd_validate(config: &ExperimentConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    let seeds = match config.repetition_seeds() {
        Ok(s) => s,
        Err(e) => {
            report.problems.push(e.to_string());
            return report;
        }
    };
    let run_cfg = match config.run_config(seeds[0]) {
        Ok(c) => c,
        Err(e) => {
            report.problems.push(e.to_string());
            return report;
        }
    };
    report.checks.push(format!(
        "space: d = {}, sources: {}, budget C_max = {}, initial design cost = {}",
        run_cfg.space.dim(),
        run_cfg.sources.len(),
        run_cfg.budget,
        run_cfg.initial_cost()
    ));
    if let Err(e) = run_cfg.validate() {
        report.problems.push(e.to_string());
    }
    if config.has_external_sources() {
        match config
            .evaluator_config()
            .and_then(|c| ExternalEvaluator::spawn(c, run_cfg.space.clone()))
        {
            Ok(ev) => {
                let hs = ev.handshake();
                report.checks.push(format!("evaluator handshake: objectives {:?}", hs.objectives));
                if hs.objectives.len() != run_cfg.n_objectives() {
                    report.problems.push(format!(
                        "evaluator reports {} objectives but the reference point has {}",
                        hs.objectives.len(),
                        run_cfg.n_objectives()
                    ));
                }
                let served: Vec<u64> = hs
                    .sources
                    .iter()
                    .filter_map(|d| d.get("id").and_then(serde_json::Value::as_u64))
                    .collect();
                if !served.is_empty() {
                    for s in run_cfg.sources.iter().filter(|s| s.is_external()) {
                        if !served.contains(&(s.id as u64)) {
                            report
                                .problems
                                .push(format!("evaluator does not serve source {}", s.id));
                        }
                    }
                }
            }
            Err(e) => report.problems.push(format!("evaluator unreachable: {e}")),
        }
    }
    report
}
