//! Expected hypervolume improvement: exact in two objectives, Monte Carlo
//! beyond, and its maximization over the unit cube.

use miso_mobo::acquisition::{ehvi, select_location, EhviConfig};
use miso_mobo::gp::{Posterior, Surrogate};
use miso_mobo::pareto::hvi;

/// Toy surrogate: objectives `u` and `1 - u` with a fixed spread.
struct Toy;

impl Surrogate for Toy {
    fn predict(&self, x: &[f64]) -> Posterior {
        Posterior { mean: x[0], variance: 0.01 }
    }
}

struct ToyComplement;

impl Surrogate for ToyComplement {
    fn predict(&self, x: &[f64]) -> Posterior {
        Posterior { mean: 1.0 - x[0] * x[0], variance: 0.01 }
    }
}

fn main() {
    let front = vec![vec![0.2, 0.7], vec![0.6, 0.3]];
    let r = [1.0, 1.0];
    for sd in [0.3, 0.1, 0.01, 1e-6] {
        let post = [
            Posterior { mean: 0.4, variance: sd * sd },
            Posterior { mean: 0.4, variance: sd * sd },
        ];
        println!("sd {sd:>8}: EHVI {:.6}", ehvi(&post, &front, &r));
    }
    println!("improvement of the mean itself: {:.6}", hvi(&front, &r, &[0.4, 0.4]));

    let post3 = vec![Posterior { mean: 0.3, variance: 0.02 }; 3];
    let front3 = vec![vec![0.2, 0.5, 0.6], vec![0.5, 0.2, 0.4]];
    println!("3 objectives (Monte Carlo): {:.5}", ehvi(&post3, &front3, &[1.0; 3]));

    let models: Vec<Box<dyn Surrogate>> = vec![Box::new(Toy), Box::new(ToyComplement)];
    let best = select_location(&models, &front, &r, 1, &EhviConfig::default(), 7);
    println!("EHVI maximizer on the toy problem: u = {:.4}", best[0]);
}
