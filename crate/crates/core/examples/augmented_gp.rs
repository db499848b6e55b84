//! Fusing a biased cheap source into the ground-truth model.
//!
//! The cheap source agrees with the truth on the left half of the interval
//! and is offset on the right half. Only agreeing cheap observations pass
//! the reliability filter and join the augmented GP.

use miso_mobo::agp::{augmentation_counts, fit_agps, reliability_index, SourceData, SourceObjectiveModels};
use miso_mobo::gp::GpConfig;

fn main() -> miso_mobo::Result<()> {
    let truth = |u: f64| (4.0 * u).sin();
    let cheap = |u: f64| truth(u) + if u > 0.5 { 0.6 } else { 0.0 };

    let mut ground = SourceData::default();
    for u in [0.05, 0.35, 0.65, 0.95] {
        ground.push(vec![u], vec![truth(u)]);
    }
    let mut low = SourceData::default();
    for i in 0..15 {
        let u = i as f64 / 14.0;
        low.push(vec![u], vec![cheap(u)]);
    }

    let gp = GpConfig::default();
    let models = SourceObjectiveModels::fit(vec![ground, low], 1, &gp, 3)?;
    for alpha in [0.5, 1.0, 2.0, 8.0] {
        let idx = reliability_index(&models, 2, 0, alpha);
        let xs: Vec<String> = idx.iter().map(|&i| format!("{:.2}", models.data(2).x[i][0])).collect();
        println!("alpha {alpha:>3}: reliable cheap points at [{}]", xs.join(", "));
    }

    let agps = fit_agps(&models, 1.0, &gp, 3)?;
    let counts = augmentation_counts(&agps, &models);
    println!(
        "augmented {} cheap points onto {} ground-truth points; safeguard {}",
        counts.count(2, 0),
        counts.ground_truth,
        counts.safeguard_triggered()
    );
    println!("{:>5} {:>8} {:>10} {:>8}", "u", "truth", "gt-only", "agp");
    for i in 0..=10 {
        let u = i as f64 / 10.0;
        println!(
            "{u:>5.2} {:>8.3} {:>10.3} {:>8.3}",
            truth(u),
            models.model(1, 0).predict(&[u]).mean,
            agps[0].predict(&[u]).mean
        );
    }
    Ok(())
}
