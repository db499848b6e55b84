//! One optimization run on the synthetic two-source suite, printing the
//! source, augmentation counts and hypervolume after every iteration.
//!
//! ```text
//! cargo run --release --example synthetic_run -- [d] [budget] [design_seed] [run_seed]
//! ```

use miso_mobo::miso::{MisoOptimizer, RunConfig};
use miso_mobo::sources::{make_synthetic_suite, SyntheticEvaluator};
use miso_mobo::space::SearchSpace;

fn main() -> miso_mobo::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let d: usize = args.first().map_or(3, |s| s.parse().expect("d"));
    let budget: f64 = args.get(1).map_or(30.0, |s| s.parse().expect("budget"));
    let design_seed: u64 = args.get(2).map_or(0, |s| s.parse().expect("design seed"));
    let run_seed: u64 = args.get(3).map_or(design_seed, |s| s.parse().expect("run seed"));

    let sources = make_synthetic_suite("zdt1-miso", d, 0.05, 0.02, 0)?;
    let mut config = RunConfig::new(SearchSpace::unit(d)?, sources);
    config.budget = budget;
    config.design_seed = design_seed;
    config.run_seed = run_seed;
    println!(
        "d = {d}, budget = {budget}, initial design: {} ground-truth + {} cheap",
        config.n_init_ground, config.n_init_cheap
    );

    let mut evaluator = SyntheticEvaluator;
    let mut opt = MisoOptimizer::initialize(config, &mut evaluator)?;
    println!("after initial design: hv = {:.4}", opt.archive().hypervolume());
    while let Some(step) = opt.step()? {
        let counts: Vec<usize> = step.counts.per_source.iter().flatten().copied().collect();
        let x: Vec<String> = step.location.iter().map(|v| format!("{v:.3}")).collect();
        println!(
            "source {} at [{}]  augmented {:?} of n1 = {}{}{}  hv = {:.4}  spent {:.0}",
            step.source,
            x.join(", "),
            counts,
            step.counts.ground_truth,
            if step.safeguard { " (safeguard)" } else { "" },
            if step.repeat { " (repeat)" } else { "" },
            opt.archive().hypervolume(),
            opt.records().last().map_or(0.0, |r| r.cumulative_cost),
        );
    }
    let trace = opt.into_trace("miso-ehvi");
    println!("final hypervolume {:.4} after {} queries", trace.final_hypervolume(), trace.records.len());
    Ok(())
}
