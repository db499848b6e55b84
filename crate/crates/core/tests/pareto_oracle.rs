mod common;

use common::{brute_force_front, hv_inclusion_exclusion};
use miso_mobo::pareto::{hypervolume, hvi, ParetoArchive};
use miso_mobo::space::Location;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn archive_matches_pairwise_filter_on_a_stream() {
    for seed in 0..5 {
        let mut rng = common::rng(seed);
        let stream: Vec<Vec<f64>> = (0..200)
            .map(|_| {
                // Coarse grid values so ties and duplicates occur.
                (0..2).map(|_| (rng.gen::<f64>() * 20.0).floor() / 20.0).collect()
            })
            .collect();
        let mut archive = ParetoArchive::new(vec![1.0, 1.0]);
        let mut last_hv = 0.0;
        for p in &stream {
            archive.insert(Location::new(vec![0.5]).unwrap(), p.clone(), 1);
            let hv = archive.hypervolume();
            assert!(hv >= last_hv - 1e-15);
            last_hv = hv;
        }
        let mut got = archive.front();
        let mut want = brute_force_front(&stream);
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got, want, "seed {seed}");
    }
}

#[test]
fn three_objective_front_of_eight() {
    let mut rng = common::rng(8);
    for _ in 0..20 {
        let pts: Vec<Vec<f64>> = (0..8).map(|_| (0..3).map(|_| rng.gen::<f64>()).collect()).collect();
        let front = brute_force_front(&pts);
        let r = [1.0; 3];
        assert!((hypervolume(&front, &r) - hv_inclusion_exclusion(&front, &r)).abs() <= 1e-12);
    }
}

fn points(m: usize, max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0f64..1.2, m), 0..=max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn wfg_equals_inclusion_exclusion(m in 2usize..=4, seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let n = rng.gen_range(0..=10);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng.gen::<f64>() * 1.1).collect()).collect();
        let r = vec![1.0; m];
        // The oracle needs the in-box points only; it handles dominated ones.
        let inside: Vec<Vec<f64>> = pts.iter().filter(|p| p.iter().all(|v| *v < 1.0)).cloned().collect();
        prop_assert!((hypervolume(&pts, &r) - hv_inclusion_exclusion(&inside, &r)).abs() <= 1e-12);
    }

    #[test]
    fn hvi_is_the_hypervolume_difference(front in points(2, 8), cand in prop::collection::vec(0.0f64..1.2, 2)) {
        let r = [1.0, 1.0];
        let mut with = front.clone();
        with.push(cand.clone());
        let diff = hypervolume(&with, &r) - hypervolume(&front, &r);
        prop_assert!((hvi(&front, &r, &cand) - diff).abs() <= 1e-12);
    }

    #[test]
    fn archive_never_holds_dominated_points(stream in points(3, 40)) {
        let mut archive = ParetoArchive::new(vec![1.0; 3]);
        for p in &stream {
            archive.insert(Location::new(vec![0.0]).unwrap(), p.clone(), 1);
        }
        let front = archive.front();
        prop_assert_eq!(brute_force_front(&front).len(), front.len());
    }
}
