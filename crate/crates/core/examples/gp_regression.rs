//! Fitting a Matérn 5/2 GP by marginal likelihood and predicting with it.

use miso_mobo::gp::{GpConfig, GpModel};

fn main() -> miso_mobo::Result<()> {
    let f = |u: f64| (6.0 * u).sin();
    let x: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64 / 11.0]).collect();
    let y: Vec<f64> = x.iter().map(|p| f(p[0])).collect();

    let gp = GpModel::fit(&x, &y, &GpConfig::default(), 42)?;
    let p = gp.params();
    println!(
        "lengthscale {:.3}  signal variance {:.3}  noise variance {:.2e}  log-likelihood {:.3}",
        p.lengthscales[0],
        p.signal_variance,
        p.noise_variance,
        gp.log_likelihood()
    );
    println!("{:>6} {:>9} {:>9} {:>9}", "u", "truth", "mean", "sd");
    for i in 0..=10 {
        let u = i as f64 / 10.0;
        let post = gp.predict(&[u]);
        println!("{u:>6.2} {:>9.4} {:>9.4} {:>9.4}", f(u), post.mean, post.std_dev());
    }
    let far = gp.predict(&[25.0]);
    println!("far from the data the posterior reverts to the prior: mean {:.3} sd {:.3}", far.mean, far.std_dev());
    Ok(())
}
