mod common;

use miso_mobo::acquisition::EhviConfig;
use miso_mobo::gp::GpConfig;
use miso_mobo::miso::{self, MisoOptimizer, RunConfig, RunTrace, Termination};
use miso_mobo::pareto::ParetoArchive;
use miso_mobo::sources::{make_synthetic_suite, SyntheticEvaluator};
use miso_mobo::space::SearchSpace;
use miso_mobo::trace;
use rand::Rng;

fn light(d: usize, budget: f64, seed: u64) -> RunConfig {
    let mut cfg = RunConfig::new(
        SearchSpace::unit(d).unwrap(),
        make_synthetic_suite("zdt1-miso", d, 0.05, 0.02, seed).unwrap(),
    );
    cfg.budget = budget;
    cfg.design_seed = seed;
    cfg.run_seed = seed + 1000;
    cfg.acquisition = EhviConfig {
        n_candidates: 200,
        n_local_refine: 3,
        local_steps: 20,
        ..EhviConfig::default()
    };
    cfg.gp = GpConfig {
        restarts: 3,
        max_evals_per_restart: 100,
        ..GpConfig::default()
    };
    cfg
}

fn check_trace(t: &RunTrace) {
    let budget = t.config.budget;
    let max_cost = t.config.sources.iter().map(|s| s.cost).fold(0.0, f64::max);
    let mut spent = 0.0;
    let mut archive = ParetoArchive::new(t.config.reference.clone());
    let mut last_hv = 0.0;
    for (rec, &(cost, hv)) in t.records.iter().zip(&t.hv_curve) {
        spent += t.config.sources[rec.source - 1].cost;
        assert_eq!(rec.cumulative_cost, spent, "costs accumulate exactly");
        assert_eq!(cost, spent);
        assert!(spent <= budget, "budget exceeded: {spent} > {budget}");
        if rec.source == 1 {
            archive.insert(rec.location.clone(), rec.outcome.clone(), 1);
        }
        assert_eq!(hv, archive.hypervolume(), "hv from ground truth only");
        assert!(hv >= last_hv);
        last_hv = hv;
    }
    assert_eq!(t.hv_curve.len(), t.records.len());
    if t.termination == Termination::BudgetExhausted {
        assert!(spent > budget - max_cost, "stopped early at {spent} of {budget}");
    }
}

#[test]
fn default_sized_run_respects_the_budget() {
    let mut cfg = light(5, 100.0, 1);
    cfg.acquisition = EhviConfig::default();
    cfg.gp = GpConfig::default();
    let t = miso::run(cfg, &mut SyntheticEvaluator).unwrap();
    check_trace(&t);
    assert!(t.total_cost() > 98.0 && t.total_cost() <= 100.0);
    assert!(t.records.iter().any(|r| r.source == 2));
}

#[test]
fn randomized_runs_respect_the_budget() {
    let mut rng = common::rng(77);
    for k in 0..12 {
        let d = rng.gen_range(2..=3);
        let mut cfg = light(d, 0.0, k);
        let c1 = [2.0, 3.0, 1.5][rng.gen_range(0..3)];
        let c2 = [1.0, 0.5, 0.7][rng.gen_range(0..3)];
        cfg.sources[0].cost = c1;
        cfg.sources[1].cost = c2;
        cfg.n_init_ground = rng.gen_range(2..=4);
        cfg.n_init_cheap = rng.gen_range(1..=4);
        cfg.budget = cfg.initial_cost() + rng.gen_range(2.0..12.0);
        let t = miso::run(cfg, &mut SyntheticEvaluator).unwrap();
        check_trace(&t);
    }
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let a = miso::run(light(2, 16.0, 4), &mut SyntheticEvaluator).unwrap();
    let b = miso::run(light(2, 16.0, 4), &mut SyntheticEvaluator).unwrap();
    assert_eq!(trace::csv_string(&a), trace::csv_string(&b));
    assert_eq!(trace::summary(&a).to_string(), trace::summary(&b).to_string());
    let c = miso::run(light(2, 16.0, 5), &mut SyntheticEvaluator).unwrap();
    assert_ne!(trace::csv_string(&a), trace::csv_string(&c));
}

#[test]
fn single_source_is_plain_ehvi() {
    let mut cfg = light(2, 0.0, 2).single_source();
    cfg.n_init_ground = 5;
    cfg.budget = 14.0;
    let mut ev = SyntheticEvaluator;
    let opt = MisoOptimizer::initialize(cfg.clone(), &mut ev).unwrap();
    assert_eq!(opt.records().len(), 5);
    assert!(opt.archive().len() <= 5);
    drop(opt);
    let t = miso::run(cfg, &mut SyntheticEvaluator).unwrap();
    assert_eq!(t.method, "ehvi");
    assert!(t.records.iter().all(|r| r.source == 1));
    assert_eq!(t.records.len(), 7);
    check_trace(&t);
}

#[test]
fn single_source_ignores_cheap_source_settings() {
    // Cheap-source knobs must not leak into a run without cheap sources.
    let base = light(2, 0.0, 3).single_source();
    let mut a = base.clone();
    a.budget = 12.0;
    let mut b = a.clone();
    b.alpha = 7.5;
    b.repeat_radius = 0.3;
    b.n_init_cheap = 0;
    let ta = miso::run(a, &mut SyntheticEvaluator).unwrap();
    let tb = miso::run(b, &mut SyntheticEvaluator).unwrap();
    assert_eq!(trace::csv_string(&ta), trace::csv_string(&tb));
}

#[test]
fn random_search_baseline_respects_the_budget() {
    let t = miso::random_search(light(3, 31.0, 6), &mut SyntheticEvaluator).unwrap();
    assert_eq!(t.method, "random-search");
    assert_eq!(t.records.len(), 15);
    check_trace(&t);
}
