//! Weighted Birkhoff averages with the exponential bump weight
//! `w(t) = exp(-1 / (t (1 - t)))`.
//!
//! The averages converge faster than any power of the sample count for smooth
//! observables along Diophantine rotations, which is what makes fifteen-digit
//! rotation numbers and Fourier coefficients reachable from orbit data.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::maps::Point2;
use crate::projection::{circle_distance, diff_sequence, AngleSequence};
use crate::scalar::{cis_turns, KahanSum, Magnitude, Real};

/// Spread threshold separating quasiperiodic from non-convergent orbits.
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

/// Normalized weights `w(n/N) / sum_j w(j/N)` for `n = 0..N`.
#[derive(Clone, Debug)]
pub struct WeightVector<T> {
    pub weights: Vec<T>,
}

impl<T: Real> WeightVector<T> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// The unnormalized bump, extended by zero at the endpoints.
pub fn bump<T: Real>(t: T) -> T {
    if t <= T::zero() || t >= T::one() {
        T::zero()
    } else {
        (-T::one() / (t * (T::one() - t))).exp()
    }
}

pub fn make_weights<T: Real>(n: usize) -> Result<WeightVector<T>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("weight count must be >= 2, got {n}")));
    }
    let nf = T::from_usize_lossy(n);
    let mut weights: Vec<T> = (0..n).map(|j| bump(T::from_usize_lossy(j) / nf)).collect();
    let mut z = KahanSum::new();
    for w in &weights {
        z.add(*w);
    }
    let z = z.value();
    for w in &mut weights {
        *w /= z;
    }
    Ok(WeightVector { weights })
}

/// `sum_n w_n values[n]`, accumulated with compensation in ascending order.
pub fn weighted_average<T, V>(values: &[V], weights: &WeightVector<T>) -> Result<V>
where
    T: Real,
    V: Copy + Zero + Add<Output = V> + Sub<Output = V> + Mul<T, Output = V> + Magnitude,
{
    if values.len() != weights.len() {
        return Err(Error::LengthMismatch { expected: weights.len(), actual: values.len() });
    }
    let mut acc = KahanSum::new();
    for (v, w) in values.iter().zip(&weights.weights) {
        acc.add(*v * *w);
    }
    Ok(acc.value())
}

#[derive(Clone, Debug)]
pub struct RotationEstimate<T> {
    pub rho: T,
    pub m: usize,
    /// `(M_j, rho_{M_j})` for every checkpoint.
    pub history: Vec<(usize, T)>,
    /// Largest pairwise circle distance among the last three estimates.
    pub spread: T,
}

/// Checkpoints `{M/4, M/2, 3M/4, M}`.
pub fn default_checkpoints(m: usize) -> Vec<usize> {
    vec![m / 4, m / 2, 3 * m / 4, m]
}

pub fn rotation_number<T: Real>(angles: &AngleSequence<T>, checkpoints: &[usize]) -> Result<RotationEstimate<T>> {
    let diffs = diff_sequence(angles);
    rotation_number_from_diffs(&diffs, checkpoints)
}

pub(crate) fn rotation_number_from_diffs<T: Real>(diffs: &[T], checkpoints: &[usize]) -> Result<RotationEstimate<T>> {
    if checkpoints.is_empty() {
        return Err(Error::InsufficientData("no checkpoints".into()));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("checkpoints must be strictly increasing".into()));
    }
    let last = *checkpoints.last().unwrap();
    if last > diffs.len() || checkpoints[0] < 2 {
        return Err(Error::InsufficientData(format!(
            "checkpoints need 2..={} increments, got up to {last}",
            diffs.len()
        )));
    }
    let mut history = Vec::with_capacity(checkpoints.len());
    for &m in checkpoints {
        let w = make_weights::<T>(m)?;
        let rho = weighted_average(&diffs[..m], &w)?.frac1();
        history.push((m, rho));
    }
    let tail = &history[history.len().saturating_sub(3)..];
    let mut spread = T::zero();
    for (i, a) in tail.iter().enumerate() {
        for b in &tail[i + 1..] {
            spread = spread.max(circle_distance(a.1, b.1));
        }
    }
    let (m, rho) = *history.last().unwrap();
    Ok(RotationEstimate { rho, m, history, spread })
}

#[derive(Clone, Debug)]
pub enum Classification<T> {
    Quasiperiodic(RotationEstimate<T>),
    NonConvergent(RotationEstimate<T>),
}

impl<T> Classification<T> {
    pub fn estimate(&self) -> &RotationEstimate<T> {
        match self {
            Classification::Quasiperiodic(e) | Classification::NonConvergent(e) => e,
        }
    }

    pub fn is_quasiperiodic(&self) -> bool {
        matches!(self, Classification::Quasiperiodic(_))
    }
}

pub fn classify_orbit<T: Real>(angles: &AngleSequence<T>, checkpoints: &[usize], tol: T) -> Result<Classification<T>> {
    if checkpoints.len() < 3 {
        return Err(Error::InsufficientData("classification needs at least three checkpoints".into()));
    }
    let est = rotation_number(angles, checkpoints)?;
    Ok(if est.spread <= tol {
        Classification::Quasiperiodic(est)
    } else {
        Classification::NonConvergent(est)
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefficientEstimate<T> {
    pub n: i64,
    /// `(a_n, b_n)`.
    pub value: (Complex<T>, Complex<T>),
    pub m: usize,
}

impl<T: Real> CoefficientEstimate<T> {
    pub fn max_norm(&self) -> T {
        self.value.0.norm().max(self.value.1.norm())
    }
}

/// Fourier coefficients of the circle through `points` for each mode in `modes`,
/// averaging over the first `M = points.len() - 1` samples.
pub fn fourier_coefficients<T: Real>(
    points: &[Point2<T>],
    rho: T,
    modes: &[i64],
    theta0: T,
) -> Result<Vec<CoefficientEstimate<T>>> {
    if points.len() < 3 {
        return Err(Error::InsufficientData("need at least three orbit points".into()));
    }
    let m = points.len() - 1;
    let w = make_weights::<T>(m)?;
    Ok(modes
        .iter()
        .map(|&n| {
            let mut ax = KahanSum::new();
            let mut ay = KahanSum::new();
            let nf = T::from_i64_lossy(n);
            for (k, (p, wk)) in points[..m].iter().zip(&w.weights).enumerate() {
                if *wk == T::zero() {
                    continue;
                }
                let phase = (nf * T::from_usize_lossy(k) * rho).frac1();
                let e = cis_turns(-phase) * *wk;
                ax.add(e * p.x);
                ay.add(e * p.y);
            }
            let anchor = cis_turns(-(nf * theta0).frac1());
            CoefficientEstimate { n, value: (ax.value() * anchor, ay.value() * anchor), m }
        })
        .collect())
}

pub fn fourier_coefficient<T: Real>(points: &[Point2<T>], rho: T, n: i64, theta0: T) -> Result<CoefficientEstimate<T>> {
    Ok(fourier_coefficients(points, rho, &[n], theta0)?.remove(0))
}

/// Per-mode `max(|a_n|, |b_n|)`.
pub fn sample_decay<T: Real>(points: &[Point2<T>], rho: T, modes: &[i64]) -> Result<Vec<(i64, T)>> {
    Ok(fourier_coefficients(points, rho, modes, T::zero())?
        .into_iter()
        .map(|c| (c.n, c.max_norm()))
        .collect())
}

/// Fits `log(norm) = c - lambda n` and returns the smallest power of two at
/// or beyond the mode where the fit crosses `eps`.
pub fn estimate_truncation<T: Real>(decay: &[(i64, T)], eps: T) -> Result<usize> {
    let pts: Vec<(T, T)> = decay
        .iter()
        .filter(|(_, v)| *v > eps && v.is_finite())
        .map(|(n, v)| (T::from_i64_lossy(*n), v.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientData("need two decay samples above eps".into()));
    }
    let k = T::from_usize_lossy(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / k;
    let my = pts.iter().map(|p| p.1).sum::<T>() / k;
    let sxx: T = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: T = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= T::zero() {
        return Err(Error::InsufficientData("decay samples share one mode".into()));
    }
    let lambda = -sxy / sxx;
    if !(lambda > T::zero()) {
        return Err(Error::NonDecaying { rate: lambda.to_f64().unwrap_or(f64::NAN) });
    }
    let c = my + lambda * mx;
    let n_star = ((c - eps.ln()) / lambda).max(T::one());
    let n = n_star.ceil().to_usize().unwrap_or(usize::MAX / 2).max(1);
    Ok(n.next_power_of_two())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::compensated_sum;

    #[test]
    fn two_point_weights() {
        let w = make_weights::<f64>(2).unwrap();
        assert_eq!(w.weights, vec![0.0, 1.0]);
        assert!(make_weights::<f64>(1).is_err());
    }

    #[test]
    fn weights_normalized_and_symmetric() {
        for n in [2usize, 3, 10, 57, 1000, 12_345, 100_000, 1_000_000] {
            let w = make_weights::<f64>(n).unwrap();
            assert!(w.weights.iter().all(|x| *x >= 0.0));
            let s = compensated_sum(w.weights.iter().copied());
            assert!((s - 1.0).abs() < 1e-14, "n={n} sum={s}");
        }
        let w = make_weights::<f64>(10).unwrap();
        for n in 1..10 {
            assert!((w.weights[n] - w.weights[10 - n]).abs() <= 1e-14 * w.weights[n]);
        }
    }

    #[test]
    fn average_of_constant() {
        let w = make_weights::<f64>(777).unwrap();
        let v = vec![3.25f64; 777];
        assert!((weighted_average(&v, &w).unwrap() - 3.25).abs() <= 4.0 * f64::EPSILON);
        assert!(weighted_average(&v[..10], &w).is_err());
    }

    fn rigid_angles(rho: f64, m: usize) -> AngleSequence<f64> {
        AngleSequence {
            center: Point2::new(0.0, 0.0),
            thetas: (0..=m).map(|k| (k as f64 * rho).frac1()).collect(),
        }
    }

    #[test]
    fn smooth_observable_averages_to_zero() {
        let rho = 2f64.sqrt() - 1.0;
        let n = 10_000;
        let w = make_weights::<f64>(n).unwrap();
        let f: Vec<f64> = (0..n).map(|k| (std::f64::consts::TAU * (k as f64 * rho).frac1()).sin()).collect();
        assert!(weighted_average(&f, &w).unwrap().abs() < 1e-12);
    }

    #[test]
    fn super_polynomial_convergence() {
        // {500..4000} sits at the roundoff floor already; the doubling
        // ladder below is where the decay is still visible.
        let rho = 2f64.sqrt() - 1.0;
        let wb = |n: usize| {
            let w = make_weights::<f64>(n).unwrap();
            let f: Vec<f64> = (0..n).map(|k| (std::f64::consts::TAU * (k as f64 * rho).frac1()).sin()).collect();
            weighted_average(&f, &w).unwrap().abs()
        };
        let vals: Vec<f64> = [20, 40, 80, 160].iter().map(|&n| wb(n)).collect();
        for pair in vals.windows(2) {
            assert!(pair[1] * 10.0 <= pair[0], "{vals:?}");
        }
    }

    #[test]
    fn rigid_rotation_number() {
        let rho = 2f64.sqrt() - 1.0;
        let est = rotation_number(&rigid_angles(rho, 1000), &[250, 500, 750, 1000]).unwrap();
        assert!((est.rho - rho).abs() < 1e-13);
        assert_eq!(est.history.len(), 4);
        assert!(est.spread < 1e-13);
        let c = classify_orbit(&rigid_angles(rho, 1000), &default_checkpoints(1000), 1e-9).unwrap();
        assert!(c.is_quasiperiodic());
    }

    #[test]
    fn surds_recovered() {
        for k in 2..22u32 {
            let rho = (k as f64).sqrt().frac1();
            if rho < 1e-3 {
                continue;
            }
            let est = rotation_number(&rigid_angles(rho, 1000), &[1000]).unwrap();
            assert!(circle_distance(est.rho, rho) <= 1e-13, "sqrt({k})");
        }
    }

    #[test]
    fn rotation_number_errors() {
        let a = rigid_angles(0.3, 100);
        assert!(rotation_number(&a, &[]).is_err());
        assert!(rotation_number(&a, &[50, 40]).is_err());
        assert!(rotation_number(&a, &[50, 101]).is_err());
        assert!(classify_orbit(&a, &[50, 100], 1e-9).is_err());
    }

    fn unit_circle(rho: f64, m: usize) -> Vec<Point2<f64>> {
        (0..=m)
            .map(|k| {
                let phi = std::f64::consts::TAU * (k as f64 * rho).frac1();
                Point2::new(phi.cos(), phi.sin())
            })
            .collect()
    }

    #[test]
    fn unit_circle_coefficients() {
        let rho = 2f64.sqrt() - 1.0;
        let pts = unit_circle(rho, 5000);
        let c1 = fourier_coefficient(&pts, rho, 1, 0.0).unwrap();
        assert!((c1.value.0 - Complex::new(0.5, 0.0)).norm() < 1e-10);
        assert!((c1.value.1 - Complex::new(0.0, -0.5)).norm() < 1e-10);
        let c3 = fourier_coefficient(&pts, rho, 3, 0.0).unwrap();
        assert!(c3.max_norm() < 1e-10);
        let decay = sample_decay(&pts, rho, &[2, 3]).unwrap();
        assert!(decay.iter().all(|(_, v)| *v < 1e-10));
    }

    #[test]
    fn coefficients_are_linear_in_data() {
        let rho = 3f64.sqrt() - 1.0;
        let u = unit_circle(rho, 2000);
        let v: Vec<_> = u.iter().map(|p| Point2::new(p.x * p.x - 0.2, p.x * p.y + 1.0)).collect();
        let sum: Vec<_> = u.iter().zip(&v).map(|(a, b)| *a * 2.0 + *b).collect();
        for n in -3..=3 {
            let cu = fourier_coefficient(&u, rho, n, 0.0).unwrap().value;
            let cv = fourier_coefficient(&v, rho, n, 0.0).unwrap().value;
            let cs = fourier_coefficient(&sum, rho, n, 0.0).unwrap().value;
            assert!((cs.0 - (cu.0 * 2.0 + cv.0)).norm() < 1e-13);
            assert!((cs.1 - (cu.1 * 2.0 + cv.1)).norm() < 1e-13);
        }
    }

    #[test]
    fn truncation_from_geometric_decay() {
        assert_eq!(estimate_truncation(&[(10, 1e-3), (20, 1e-6)], 1e-12).unwrap(), 64);
        let err = estimate_truncation(&[(2, 1e-6), (4, 1e-3)], 1e-12).unwrap_err();
        assert!(matches!(err, Error::NonDecaying { .. }));
        assert!(estimate_truncation(&[(2, 1e-3)], 1e-12).is_err());
    }

    #[test]
    fn truncation_from_reported_decay_list() {
        let list = [(2, 2.0e-2), (4, 4.3e-3), (6, 6.5e-4), (8, 4.8e-5), (10, 8.4e-6)];
        let n = estimate_truncation(&list, 2.2e-16).unwrap();
        assert!(n == 32 || n == 64, "{n}");
    }

    #[test]
    fn single_precision_path() {
        let rho = 0.381_966_f32;
        let a = AngleSequence { center: Point2::new(0.0f32, 0.0), thetas: (0..=400).map(|k| (k as f32 * rho).frac1()).collect() };
        let est = rotation_number(&a, &[400]).unwrap();
        assert!(circle_distance(est.rho, rho) < 1e-4);
    }
}
