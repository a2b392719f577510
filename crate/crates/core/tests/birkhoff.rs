use proptest::prelude::*;
use qpcircle::birkhoff::{fourier_coefficients, make_weights, sample_decay, estimate_truncation, weighted_average};
use qpcircle::projection::{project_points, AngleSequence};
use qpcircle::{classify_orbit, iterate_orbit, rotation_number, run_recipe, Classification, MapSpec, Point, Recipe};

fn henon_rho(seed: Point, m: usize) -> f64 {
    let spec = MapSpec::henon(0.24f64.acos());
    let orbit = iterate_orbit(&spec, seed, m, 1).unwrap();
    let angles = project_points(&orbit.points, Point::new(0.0, 0.0)).unwrap();
    rotation_number(&angles, &[m]).unwrap().rho
}

fn rigid(rho: f64, m: usize) -> AngleSequence<f64> {
    let thetas = (0..=m).map(|k| (k as f64 * rho).rem_euclid(1.0)).collect();
    AngleSequence { center: Point::new(0.0, 0.0), thetas }
}

#[test]
fn table_one_rotation_numbers() {
    assert!((henon_rho(Point::new(0.1, 0.0), 1000) - 0.211095709965479).abs() < 1e-11);
    assert!((henon_rho(Point::new(0.4, 0.0), 120_000) - 0.206174514865704).abs() < 1e-11);
}

#[test]
fn surds_are_recovered_from_rigid_rotations() {
    let mut seen = 0;
    for p in 2..60u32 {
        let r = (p as f64).sqrt();
        if r.fract() == 0.0 {
            continue;
        }
        let rho = r.fract();
        let est = rotation_number(&rigid(rho, 1000), &[1000]).unwrap();
        assert!((est.rho - rho).abs() < 1e-13, "sqrt({p}): {} vs {rho}", est.rho);
        seen += 1;
        if seen == 20 {
            break;
        }
    }
    assert_eq!(seen, 20);
}

#[test]
fn classification_separates_regular_and_chaotic_seeds() {
    let spec = MapSpec::henon(0.24f64.acos());
    let checkpoints = [50_000, 100_000, 120_000];
    let classify = |seed: Point| {
        let orbit = iterate_orbit(&spec, seed, 120_000, 1).unwrap();
        classify_orbit(&project_points(&orbit.points, Point::new(0.0, 0.0)).unwrap(), &checkpoints, 1e-9).unwrap()
    };
    let regular = classify(Point::new(0.4, 0.0));
    assert!(regular.is_quasiperiodic() && regular.estimate().spread < 1e-11);
    assert!(matches!(classify(Point::new(0.3, -0.44)), Classification::NonConvergent(_)));
    assert!(classify_orbit(&rigid(2f64.sqrt() - 1.0, 4000), &[1000, 2000, 4000], 1e-9).unwrap().is_quasiperiodic());
}

#[test]
fn orbit_coefficients_match_the_converged_circle() {
    let cfg = Recipe::new(MapSpec::henon(0.24f64.acos()), Point::new(0.4, 0.0), 1);
    let result = run_recipe(&cfg).unwrap();
    let k = &result.system.circles[0];
    let start = k.eval(0.0).unwrap();
    let orbit = iterate_orbit(&cfg.spec, start, 10_000, 1).unwrap();
    let modes: Vec<i64> = (-5..=5).collect();
    let est = fourier_coefficients(&orbit.points, result.system.rho, &modes, 0.0).unwrap();
    for e in est {
        assert!((e.value.0 - k.a.get(e.n)).norm() < 1e-6, "a_{}", e.n);
        assert!((e.value.1 - k.b.get(e.n)).norm() < 1e-6, "b_{}", e.n);
    }
}

#[test]
fn henon_decay_and_truncation() {
    let spec = MapSpec::henon(0.24f64.acos());
    let orbit = iterate_orbit(&spec, Point::new(0.4, 0.0), 1000, 1).unwrap();
    let listed = [(2, 2.0e-2), (4, 4.3e-3), (6, 6.5e-4), (8, 4.8e-5), (10, 8.4e-6)];
    let modes: Vec<i64> = listed.iter().map(|(n, _)| *n).collect();
    let decay = sample_decay(&orbit.points, 0.206174514865704, &modes).unwrap();
    for ((n, got), (_, want)) in decay.iter().zip(listed) {
        assert!(*got / want < 3.0 && want / *got < 3.0, "mode {n}: {got:e} vs {want:e}");
    }
    assert!([32, 64].contains(&estimate_truncation(&decay, 1e-16).unwrap()));
}

proptest! {
    #[test]
    fn weights_are_normalized_and_symmetric(n in 2usize..5000) {
        let w = make_weights::<f64>(n).unwrap();
        let total: f64 = w.weights.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-13);
        prop_assert_eq!(w.weights[0], 0.0);
        for k in 1..n {
            prop_assert!((w.weights[k] - w.weights[n - k]).abs() <= 1e-9 * w.weights[k] + 1e-280);
        }
    }

    #[test]
    fn weighted_average_is_linear(
        x in prop::collection::vec(-1.0f64..1.0, 50..200),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let n = x.len();
        let y: Vec<f64> = x.iter().map(|v| (v * 7.0).cos()).collect();
        let w = make_weights::<f64>(n).unwrap();
        let combo: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
        let lhs = weighted_average(&combo, &w).unwrap();
        let rhs = a * weighted_average(&x, &w).unwrap() + b * weighted_average(&y, &w).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-13);
    }
}
