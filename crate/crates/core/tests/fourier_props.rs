use num_complex::Complex64;
use proptest::prelude::*;
use qpcircle::fourier::{
    convolve, differentiate, dft_from_samples, enclosed_area, rotate, sobolev_norm, symmetrize, weighted_l1_norm,
};
use qpcircle::{Circle, Coefficients};
use std::f64::consts::{PI, TAU};

fn coeffs(max_n: usize) -> impl Strategy<Value = Coefficients> {
    (0..=max_n).prop_flat_map(|n| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2 * n + 1)
            .prop_map(|v| Coefficients::from_vec(v.into_iter().map(|(r, i)| Complex64::new(r, i)).collect()).unwrap())
    })
}

fn symmetric_circle(max_n: usize) -> impl Strategy<Value = Circle> {
    (1..=max_n).prop_flat_map(|n| {
        let seq = prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2 * n + 1);
        (seq.clone(), seq, 0.5f64..2.0).prop_map(move |(a, b, r)| {
            let decay = |v: Vec<(f64, f64)>| {
                let c = v
                    .into_iter()
                    .enumerate()
                    .map(|(i, (x, y))| Complex64::new(x, y) * 0.3f64.powi((i as i64 - n as i64).unsigned_abs() as i32))
                    .collect();
                symmetrize(&Coefficients::from_vec(c).unwrap())
            };
            let mut k = Circle::new(decay(a), decay(b)).unwrap();
            // Make sure the curve winds once around its center.
            let one = Complex64::new(r / 2.0, 0.0);
            k.a.as_mut_slice()[n + 1] += one;
            k.a.as_mut_slice()[n - 1] += one;
            k.b.as_mut_slice()[n + 1] += Complex64::new(0.0, -r / 2.0);
            k.b.as_mut_slice()[n - 1] += Complex64::new(0.0, r / 2.0);
            k
        })
    })
}

fn brute_convolve(u: &Coefficients, v: &Coefficients) -> Vec<Complex64> {
    let n = u.order() as i64;
    (-n..=n)
        .map(|k| {
            let mut s = Complex64::new(0.0, 0.0);
            for i in -n..=n {
                let j = k - i;
                if j.abs() <= n {
                    s += u.get(i) * v.get(j);
                }
            }
            s
        })
        .collect()
}

fn shoelace(k: &Circle, samples: usize) -> f64 {
    let pts: Vec<_> = (0..samples).map(|i| k.eval(i as f64 / samples as f64).unwrap()).collect();
    let mut s = 0.0;
    for i in 0..samples {
        let (p, q) = (pts[i], pts[(i + 1) % samples]);
        s += p.x * q.y - q.x * p.y;
    }
    s / 2.0
}

#[test]
fn weighted_l1_and_sobolev_examples() {
    let delta0 = Coefficients::delta(3, 0, Complex64::new(1.0, 0.0));
    assert_eq!(weighted_l1_norm(&delta0, 7.0), 1.0);
    let mut two = Coefficients::zeros(3);
    two.as_mut_slice()[1] = Complex64::new(1.0, 0.0);
    two.as_mut_slice()[5] = Complex64::new(1.0, 0.0);
    assert!((weighted_l1_norm(&two, 2.0) - 8.0).abs() < 1e-15);

    let mut k = Circle::zeros(2);
    k.a.as_mut_slice()[1] = Complex64::new(1.0, 0.0);
    k.a.as_mut_slice()[3] = Complex64::new(1.0, 0.0);
    assert!((sobolev_norm(&k, 1.0) - 2.0).abs() < 1e-15);
    assert!((sobolev_norm(&k, 0.0) - 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn ellipse_area() {
    let mut k = Circle::zeros(1);
    k.a.as_mut_slice()[0] = Complex64::new(1.0, 0.0);
    k.a.as_mut_slice()[2] = Complex64::new(1.0, 0.0);
    k.b.as_mut_slice()[2] = Complex64::new(0.0, -1.5);
    k.b.as_mut_slice()[0] = Complex64::new(0.0, 1.5);
    assert!((enclosed_area(&k) - 6.0 * PI).abs() < 1e-13);
}

#[test]
fn dft_of_a_pure_mode() {
    let samples: Vec<_> = (0..64).map(|i| Complex64::from_polar(1.0, TAU * i as f64 / 64.0)).collect();
    let c = dft_from_samples(&samples, 4).unwrap();
    for (k, v) in c.modes() {
        let want = if k == 1 { 1.0 } else { 0.0 };
        assert!((v - want).norm() < 1e-14, "mode {k}: {v}");
    }
}

proptest! {
    #[test]
    fn convolution_matches_brute_force_exactly((u, v) in coeffs(16).prop_flat_map(|u| {
        let n = u.order();
        (Just(u), prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2 * n + 1))
    })) {
        let v = Coefficients::from_vec(v.into_iter().map(|(r, i)| Complex64::new(r, i)).collect()).unwrap();
        let fast = convolve(&u, &v);
        let slow = brute_convolve(&u, &v);
        for (a, b) in fast.as_slice().iter().zip(&slow) {
            prop_assert!((a - b).norm() <= 1e-13 * (1.0 + b.norm()), "{a} vs {b}");
        }
        let swapped = convolve(&v, &u);
        for (a, b) in fast.as_slice().iter().zip(swapped.as_slice()) {
            prop_assert!((a - b).norm() <= 1e-13);
        }
    }

    #[test]
    fn rotate_shifts_the_argument(c in coeffs(12), rho in 0.0f64..1.0, theta in 0.0f64..1.0) {
        let lhs = rotate(&c, rho).eval(theta);
        let rhs = c.eval(theta + rho);
        prop_assert!((lhs - rhs).norm() <= 1e-13 * (1.0 + c.max_abs() * (2 * c.order() + 1) as f64));
        let back = rotate(&rotate(&c, rho), -rho);
        for (a, b) in back.as_slice().iter().zip(c.as_slice()) {
            prop_assert!((a - b).norm() <= 1e-13);
        }
    }

    #[test]
    fn rotate_preserves_norms(k in symmetric_circle(10), rho in 0.0f64..1.0, nu in 1.0f64..2.0, d in 0.0f64..5.0) {
        let r = k.rotated(rho);
        prop_assert!((weighted_l1_norm(&r.a, nu) - weighted_l1_norm(&k.a, nu)).abs() <= 1e-13 * weighted_l1_norm(&k.a, nu));
        prop_assert!((sobolev_norm(&r, d) - sobolev_norm(&k, d)).abs() <= 1e-13 * sobolev_norm(&k, d));
        prop_assert!((enclosed_area(&r) - enclosed_area(&k)).abs() <= 1e-13 * (1.0 + enclosed_area(&k).abs()));
    }

    #[test]
    fn differentiate_matches_central_difference(c in coeffs(8), theta in 0.0f64..1.0) {
        let h = 1e-5;
        let fd = (c.eval(theta + h) - c.eval(theta - h)) / (2.0 * h);
        let exact = differentiate(&c).eval(theta);
        prop_assert!((fd - exact).norm() <= 1e-5 * (1.0 + exact.norm()));
        for (k, v) in differentiate(&c).modes() {
            let want = c.get(k) * Complex64::new(0.0, TAU * k as f64);
            prop_assert!((v - want).norm() <= 1e-13 * (1.0 + want.norm()));
        }
    }

    #[test]
    fn symmetrize_is_idempotent(c in coeffs(10)) {
        let once = symmetrize(&c);
        let twice = symmetrize(&once);
        prop_assert!(once.symmetry_residual() <= 1e-15);
        for (a, b) in once.as_slice().iter().zip(twice.as_slice()) {
            prop_assert!((a - b).norm() <= 1e-15);
        }
    }

    #[test]
    fn sobolev_norm_matches_loop(k in symmetric_circle(10), d in 0.0f64..4.0) {
        let n = k.order() as i64;
        let mut s = 0.0;
        for m in -n..=n {
            let w = (1.0 + d * d).powi(m.unsigned_abs() as i32);
            s += w * k.a.get(m).norm_sqr().max(k.b.get(m).norm_sqr());
        }
        prop_assert!((sobolev_norm(&k, d) - s.sqrt()).abs() <= 1e-12 * s.sqrt());
    }

}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn area_matches_shoelace(k in symmetric_circle(8)) {
        let exact = enclosed_area(&k);
        prop_assert!((exact - shoelace(&k, 100_000)).abs() <= 1e-8 * (1.0 + exact.abs()));
    }
}

proptest! {

    #[test]
    fn dft_recovers_band_limited_series(c in coeffs(10)) {
        let n = c.order();
        let m = 4 * (2 * n + 1);
        let samples: Vec<_> = (0..m).map(|i| c.eval(i as f64 / m as f64)).collect();
        let back = dft_from_samples(&samples, n).unwrap();
        for (a, b) in back.as_slice().iter().zip(c.as_slice()) {
            prop_assert!((a - b).norm() <= 1e-12);
        }
    }
}
