use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::fourier::{dft_from_samples, symmetrize, Grid};

fn rand_c(rng: &mut ChaCha8Rng, amp: f64) -> Complex<f64> {
    Complex::new(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp))
}

fn random_circle(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> FourierCircle<f64> {
    let mut k = FourierCircle::ellipse(n, Point2::new(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1)), radius, radius);
    for m in -(n as i64)..=(n as i64) {
        let amp = 0.05 * 0.5f64.powi(m.unsigned_abs() as i32);
        k.a[m] += rand_c(rng, amp);
        k.b[m] += rand_c(rng, amp);
    }
    k.symmetrized()
}

fn random_system(rng: &mut ChaCha8Rng, d: usize, n: usize) -> CircleSystem<f64> {
    CircleSystem::new(0.1234, (0..d).map(|_| random_circle(rng, n, 0.3)).collect()).unwrap()
}

fn phase() -> PhaseCondition<f64> {
    PhaseCondition::radial(Point2::new(0.3, 0.0), Point2::new(0.0, 0.0)).unwrap()
}

/// Central differences of the residual along `v` against `J v`.
fn fd_check<C: ComponentModel<f64>>(sys: &ShootingSystem<f64, C>, x: &[Complex<f64>], v: &[Complex<f64>]) -> f64 {
    let h = 1e-7;
    let plus: Vec<_> = x.iter().zip(v).map(|(a, b)| a + b * h).collect();
    let minus: Vec<_> = x.iter().zip(v).map(|(a, b)| a - b * h).collect();
    let rp = sys.residual(&plus);
    let rm = sys.residual(&minus);
    let fd: Vec<_> = rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    let jv = sys.jacobian(x).mul_vec(v);
    let scale = jv.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    fd.iter().zip(&jv).fold(0.0f64, |m, (a, b)| m.max((a - b).norm())) / scale
}

#[test]
fn quadratic_jacobian_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let spec = MapSpec::henon(0.24f64.acos());
    for trial in 0..10 {
        let d = [1, 1, 2, 3, 5][trial % 5];
        let n = 3 + trial % 4;
        let sys = ShootingSystem::new(QuadraticModel::for_spec(&spec, n).unwrap(), d, 0.2 + 0.01 * trial as f64, phase());
        let mut x: Vec<_> = (0..sys.dim()).map(|_| rand_c(&mut rng, 0.5)).collect();
        x[sys.dim() - 1] = rand_c(&mut rng, 0.1);
        let v: Vec<_> = (0..sys.dim()).map(|_| rand_c(&mut rng, 1.0)).collect();
        let err = fd_check(&sys, &x, &v);
        assert!(err < 1e-6, "trial {trial}: relative error {err}");
    }
}

#[test]
fn recast_jacobian_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let spec = MapSpec::standard(std::f64::consts::FRAC_PI_4);
    for trial in 0..10 {
        let d = [1, 2, 3][trial % 3];
        let n = 2 + trial % 4;
        let sys = ShootingSystem::new(RecastModel::for_spec(&spec, n).unwrap(), d, 0.87, phase());
        let x: Vec<_> = (0..sys.dim()).map(|_| rand_c(&mut rng, 0.5)).collect();
        let v: Vec<_> = (0..sys.dim()).map(|_| rand_c(&mut rng, 1.0)).collect();
        let err = fd_check(&sys, &x, &v);
        assert!(err < 1e-6, "trial {trial}: relative error {err}");
    }
}

#[test]
fn sampled_jacobian_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for (trial, spec) in [MapSpec::twist(0.4), MapSpec::standard(0.7), MapSpec::henon(1.3)].iter().enumerate() {
        for d in [1, 2] {
            let n = 4 + trial;
            let sys = ShootingSystem::new(SampledModel::new(*spec, n), d, 0.31, phase());
            let mut x = sys.pack(&random_system(&mut rng, d, n)).unwrap();
            x[sys.dim() - 1] = Complex::new(0.01, 0.0);
            // Real perturbations of real curves keep the samples real.
            let mut v = sys.pack(&random_system(&mut rng, d, n)).unwrap();
            v[sys.dim() - 1] = Complex::new(0.3, 0.0);
            let err = fd_check(&sys, &x, &v);
            assert!(err < 1e-6, "{spec:?} d={d}: relative error {err}");
        }
    }
}

#[test]
fn sampled_and_quadratic_agree_on_henon() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let spec = MapSpec::henon(0.24f64.acos());
    let system = random_system(&mut rng, 2, 6);
    let q = ShootingSystem::new(QuadraticModel::for_spec(&spec, 6).unwrap(), 2, 0.2, phase());
    let s = ShootingSystem::new(SampledModel::new(spec, 6), 2, 0.2, phase());
    let (xq, xs) = (q.pack(&system).unwrap(), s.pack(&system).unwrap());
    for (u, v) in q.residual(&xq).iter().zip(&s.residual(&xs)) {
        assert!((u - v).norm() < 1e-14);
    }
    let (jq, js) = (q.assemble_jacobian(&xq), s.assemble_jacobian(&xs));
    for i in 0..jq.rows() {
        for k in 0..jq.cols() {
            assert!((jq[(i, k)] - js[(i, k)]).norm() < 1e-13);
        }
    }
}

#[test]
fn fixed_point_residual_vanishes() {
    let spec = MapSpec::henon(0.24f64.acos());
    let system = CircleSystem::single(0.2, FourierCircle::zeros(4));
    let ph = PhaseCondition::new(Point2::new(0.0, 0.0), Point2::new(0.0, 1.0)).unwrap();
    let r = residual_henon(&spec, &system, 0.0, &ph).unwrap();
    assert_eq!(r.len(), 1 + 2 * 9);
    assert!(r.iter().all(|v| v.norm() == 0.0));
}

#[test]
fn henon_residual_matches_point_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let spec = MapSpec::henon(0.24f64.acos());
    let n = 7;
    let k = random_circle(&mut rng, n, 0.4);
    let rho = 0.2061;
    let beta = 0.013;
    let system = CircleSystem::single(rho, k.clone());
    let r = residual_henon(&spec, &system, beta, &phase()).unwrap();
    let grid = Grid::new(64);
    let xs: Vec<_> = (0..64)
        .map(|j| {
            let t = grid.theta(j);
            let p = spec.apply(k.eval(t).unwrap());
            let q = k.eval(t + rho).unwrap();
            Point2::new(p.x - (1.0 + beta) * q.x, p.y - (1.0 + beta) * q.y)
        })
        .collect();
    let fx = dft_from_samples(&xs.iter().map(|p| Complex::from(p.x)).collect::<Vec<_>>(), n).unwrap();
    let fy = dft_from_samples(&xs.iter().map(|p| Complex::from(p.y)).collect::<Vec<_>>(), n).unwrap();
    let l = 2 * n + 1;
    for i in 0..l {
        assert!((r[1 + i] - fx.as_slice()[i]).norm() < 1e-10);
        assert!((r[1 + l + i] - fy.as_slice()[i]).norm() < 1e-10);
    }
}

#[test]
fn henon_block_at_zero_and_toeplitz() {
    let a = 0.24f64.acos();
    let spec = MapSpec::henon(a);
    let n = 3;
    let rho = 0.21;
    let sys = ShootingSystem::new(QuadraticModel::for_spec(&spec, n).unwrap(), 1, rho, phase());
    let x = vec![Complex::new(0.0, 0.0); sys.dim()];
    let j = sys.assemble_jacobian(&x);
    for (i, k) in (-3i64..=3).enumerate() {
        let expect = Complex::from(a.cos()) - crate::scalar::cis_turns(k as f64 * rho);
        assert!((j[(1 + i, i)] - expect).norm() < 1e-15);
        for c in 0..7 {
            if c != i {
                assert_eq!(j[(1 + i, c)], Complex::new(0.0, 0.0));
            }
        }
    }

    let mut u = CoeffSeq::zeros(3);
    u[-1] = Complex::new(2.0, 1.0);
    u[0] = Complex::new(0.5, 0.0);
    u[1] = Complex::new(2.0, -1.0);
    let t = toeplitz(&u, 3);
    let e0 = CoeffSeq::delta(3, 0, Complex::new(1.0, 0.0));
    assert_eq!(t.mul_vec(e0.as_slice()), u.as_slice().to_vec());
    let e1 = CoeffSeq::delta(3, 1, Complex::new(1.0, 0.0));
    let shifted = t.mul_vec(e1.as_slice());
    assert_eq!(shifted[3 + 2], u[1]);
    assert_eq!(shifted[3 + 1], u[0]);
    assert_eq!(shifted[3], u[-1]);
}

#[test]
fn recast_fixed_point_residual_vanishes() {
    let spec = MapSpec::standard(std::f64::consts::FRAC_PI_4);
    let n = 4;
    let k = FourierCircle::constant(n, Point2::new(std::f64::consts::PI, 0.0));
    let pi = std::f64::consts::PI;
    let aux = RecastAux {
        s: CoeffSeq::delta(n, 0, Complex::from(pi.sin())),
        c: CoeffSeq::delta(n, 0, Complex::from(pi.cos())),
    };
    let ph = PhaseCondition::new(Point2::new(pi, 0.0), Point2::new(0.0, 1.0)).unwrap();
    let u = UnfoldingState { beta: 0.0, gamma: vec![0.0], omega: vec![0.0] };
    let r = residual_standard_recast(&spec, &CircleSystem::single(0.87, k), &[aux], &u, &ph).unwrap();
    assert_eq!(r.len(), 4 * (2 * n + 1) + 3);
    for v in &r {
        assert!(v.norm() < 1e-15, "{v}");
    }
}

#[test]
fn recast_ode_rows_vanish_for_true_composites() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let n = 24;
    let mut k = FourierCircle::constant(n, Point2::new(3.0, 0.2));
    for m in 1..=4i64 {
        let amp = 0.3 * 0.4f64.powi(m as i32);
        let va = rand_c(&mut rng, amp);
        k.a[m] = va;
        k.a[-m] = va.conj();
    }
    let model = RecastModel::new(n, 0.7);
    let aux = model.aux_for(&k);
    let x = model.pack_parts(&k, &aux, 0.0, 0.0).unwrap();
    let rows = model.rows(&x);
    let l = 2 * n + 1;
    let worst = rows[2 * l..].iter().fold(0.0f64, |m, v| m.max(v.norm()));
    assert!(worst < 1e-8, "ODE rows {worst}");
}

#[test]
fn symmetrize_preserves_structure() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    let spec = MapSpec::standard(0.5);
    let sys = ShootingSystem::new(RecastModel::for_spec(&spec, 3).unwrap(), 2, 0.3, phase());
    let mut x: Vec<_> = (0..sys.dim()).map(|_| rand_c(&mut rng, 1.0)).collect();
    let imag = sys.symmetrize(&mut x);
    assert!(imag > 0.0);
    for k in sys.circles(&x) {
        assert_eq!(k.symmetry_residual(), 0.0);
    }
    let u = sys.unfolding(&x);
    assert_eq!(u.gamma.len(), 2);
    assert_eq!(x[sys.dim() - 1].im, 0.0);
    let again = symmetrize(&CoeffSeq::from_vec(x[..7].to_vec()).unwrap());
    assert_eq!(again.as_slice(), &x[..7]);
}

#[test]
fn rotation_circle_is_a_newton_fixed_point() {
    let rho = 2f64.sqrt() - 1.0;
    let spec = MapSpec::rotation(std::f64::consts::TAU * rho);
    let k = FourierCircle::ellipse(4, Point2::new(0.0, 0.0), 1.0, 1.0);
    let ph = PhaseCondition::radial(Point2::new(1.0, 0.0), Point2::new(0.0, 0.0)).unwrap();
    let sol = newton_solve(&spec, &CircleSystem::single(rho, k.clone()), &ph, &NewtonOptions::default()).unwrap();
    assert!(sol.report.converged);
    assert!(sol.report.iterations <= 1);
    for (u, v) in sol.system.circles[0].a.as_slice().iter().zip(k.a.as_slice()) {
        assert!((u - v).norm() < 1e-14);
    }
    let (a1, a2, a3) = unfolding_diagnostics(&k, &spec, rho);
    let pi = std::f64::consts::PI;
    assert!((a1 - pi).abs() < 1e-13 && (a2 - pi).abs() < 1e-13 && (a3 - pi).abs() < 1e-12);
}

#[test]
fn twist_circle_converges_from_perturbed_guess() {
    // Origin-centered circles of radius r rotate by (alpha + r^2) / 2 pi.
    let alpha = 0.4;
    let r: f64 = 0.6;
    let rho = (alpha + r * r) / std::f64::consts::TAU;
    let spec = MapSpec::twist(alpha);
    let mut guess = FourierCircle::ellipse(8, Point2::new(0.01, -0.02), 0.62, 0.59);
    guess.a[2] = Complex::new(0.01, 0.005);
    guess.a[-2] = guess.a[2].conj();
    let ph = PhaseCondition::radial(Point2::new(r, 0.0), Point2::new(0.0, 0.0)).unwrap();
    let sol = newton_solve(&spec, &CircleSystem::single(rho, guess.symmetrized()), &ph, &NewtonOptions::default()).unwrap();
    assert!(sol.report.converged, "{:?}", sol.report.defect_history);
    assert!(sol.report.final_defect < 1e-13);
    let k = &sol.system.circles[0];
    for j in 0..16 {
        let p = k.eval(j as f64 / 16.0).unwrap();
        assert!((p.norm() - r).abs() < 1e-12);
    }
}

#[test]
fn wrong_form_rejected() {
    assert!(resolve_form(MapFamily::Twist, ResidualForm::Quadratic).is_err());
    assert!(resolve_form(MapFamily::HenonAP, ResidualForm::Recast).is_err());
    assert_eq!(resolve_form(MapFamily::Standard, ResidualForm::Auto).unwrap(), ResidualForm::Recast);
}
