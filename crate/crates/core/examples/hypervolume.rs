//! Pareto filtering, hypervolume and hypervolume improvement.

use miso_mobo::pareto::{hvi, hypervolume, nondominated, ParetoArchive};
use miso_mobo::space::Location;

fn main() -> miso_mobo::Result<()> {
    let reference = vec![1.0, 1.0];
    let points = vec![
        vec![0.2, 0.8],
        vec![0.5, 0.5],
        vec![0.6, 0.6], // dominated by (0.5, 0.5)
        vec![0.8, 0.1],
        vec![1.2, 0.0], // outside the reference box
    ];
    let front = nondominated(&points);
    println!("nondominated: {front:?}");
    println!("hypervolume: {:.4}", hypervolume(&points, &reference));
    println!("improvement of (0.3, 0.3): {:.4}", hvi(&front, &reference, &[0.3, 0.3]));

    let three = vec![vec![0.2, 0.5, 0.7], vec![0.6, 0.1, 0.4], vec![0.5, 0.5, 0.1]];
    println!("3-objective hypervolume: {:.4}", hypervolume(&three, &[1.0; 3]));

    // The archive keeps only nondominated ground-truth outcomes.
    let mut archive = ParetoArchive::new(reference);
    for (i, p) in points.iter().enumerate() {
        let loc = Location::new(vec![i as f64 / 4.0])?;
        let kept = archive.insert(loc, p.clone(), 1);
        println!("insert {p:?}: {}", if kept { "kept" } else { "rejected" });
    }
    println!("archive size {} hv {:.4}", archive.len(), archive.hypervolume());
    Ok(())
}
