//! The built-in hyperparameter spaces and the unit-cube encoding.

use miso_mobo::miso::{default_budget, default_initial_design};
use miso_mobo::space::SearchSpace;

fn main() -> miso_mobo::Result<()> {
    for name in ["mlp", "xgb"] {
        let space = SearchSpace::preset(name)?;
        let d = space.dim();
        let (ground, cheap) = default_initial_design(d, 2.0, 1.0);
        println!(
            "{name}: d = {d}, default budget {}, initial design {ground} ground-truth + {cheap} cheap",
            default_budget(d)
        );
        for dim in space.dims() {
            println!(
                "  {:<20} {:?} [{}, {}] {:?}",
                dim.name, dim.kind, dim.lower, dim.upper, dim.scaling
            );
        }
        let centre = space.decode(&vec![0.5; d])?;
        println!("  centre of the cube: {centre:?}");
        let back = space.encode(&centre)?;
        println!("  re-encoded: {:?}", back.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>());
    }
    let sample = SearchSpace::mlp().sample_uniform(3, 11)?;
    println!("three uniform MLP configurations:");
    for loc in sample {
        println!("  {:?}", SearchSpace::mlp().decode(&loc)?);
    }
    Ok(())
}
