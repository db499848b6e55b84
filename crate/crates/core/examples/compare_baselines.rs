//! Multi-source EHVI against single-source EHVI and random search under the
//! same budget, reporting median final hypervolume over several seeds.
//!
//! ```text
//! cargo run --release --example compare_baselines -- [seeds] [d] [budget]
//! ```

use std::time::Instant;

use miso_mobo::miso::{self, RunConfig};
use miso_mobo::seed::derive;
use miso_mobo::sources::{make_synthetic_suite, SyntheticEvaluator};
use miso_mobo::space::SearchSpace;
use miso_mobo::trace::{median, std_dev};

fn main() -> miso_mobo::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seeds: u64 = args.first().map_or(5, |s| s.parse().expect("seeds"));
    let d: usize = args.get(1).map_or(5, |s| s.parse().expect("d"));
    let budget: f64 = args.get(2).map_or(100.0, |s| s.parse().expect("budget"));

    let mut results: [(&str, Vec<f64>); 3] = [("miso-ehvi", vec![]), ("ehvi", vec![]), ("random-search", vec![])];
    let started = Instant::now();
    for k in 0..seeds {
        let mut config = RunConfig::new(SearchSpace::unit(d)?, make_synthetic_suite("zdt1-miso", d, 0.05, 0.02, k)?);
        config.budget = budget;
        config.design_seed = derive(k, &[1]);
        config.run_seed = derive(k, &[2]);
        let mut ev = SyntheticEvaluator;
        let hv = [
            miso::run(config.clone(), &mut ev)?.final_hypervolume(),
            miso::run(config.single_source(), &mut ev)?.final_hypervolume(),
            miso::random_search(config, &mut ev)?.final_hypervolume(),
        ];
        println!("seed {k}: {:.4} {:.4} {:.4}", hv[0], hv[1], hv[2]);
        for (slot, v) in results.iter_mut().zip(hv) {
            slot.1.push(v);
        }
    }
    for (name, hv) in &results {
        println!("{name:>14}: median {:.4}  sd {:.4}", median(hv), std_dev(hv));
    }
    println!("elapsed {:.1}s", started.elapsed().as_secs_f64());
    Ok(())
}
