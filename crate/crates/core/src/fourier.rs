//! Truncated Fourier series of closed plane curves.
//!
//! A sequence with truncation order `N` stores the modes `-N..=N` densely,
//! mode `n` at index `n + N`.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::maps::{PlanarMap, Point2};
use crate::scalar::{cis_turns, KahanSum, Real};

/// Relative tolerance on the imaginary part of an evaluated real curve.
pub const EVAL_IMAG_TOL: f64 = 1e-10;
/// Relative conjugate-symmetry tolerance.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Relative tolerance on the imaginary residue of the area functional.
pub const AREA_IMAG_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct CoeffSeq<T> {
    n: usize,
    c: Vec<Complex<T>>,
}

impl<T: Real> CoeffSeq<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, c: vec![Complex::zero(); 2 * n + 1] }
    }

    pub fn from_vec(c: Vec<Complex<T>>) -> Result<Self> {
        if c.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("coefficient array of even length {}", c.len())));
        }
        Ok(Self { n: c.len() / 2, c })
    }

    /// Single nonzero mode.
    pub fn delta(n: usize, k: i64, value: Complex<T>) -> Self {
        let mut s = Self::zeros(n);
        s[k] = value;
        s
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.c
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.c
    }

    pub fn into_vec(self) -> Vec<Complex<T>> {
        self.c
    }

    /// Mode index `n` paired with its coefficient.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex<T>)> + '_ {
        let n = self.n as i64;
        self.c.iter().enumerate().map(move |(i, v)| (i as i64 - n, *v))
    }

    /// Coefficient at mode `k`, zero outside the truncation.
    pub fn get(&self, k: i64) -> Complex<T> {
        if k.unsigned_abs() as usize > self.n {
            Complex::zero()
        } else {
            self.c[(k + self.n as i64) as usize]
        }
    }

    pub fn max_abs(&self) -> T {
        self.c.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    /// Sum of all coefficients, i.e. the value at `theta = 0`.
    pub fn sum(&self) -> Complex<T> {
        let mut acc = KahanSum::new();
        for v in &self.c {
            acc.add(*v);
        }
        acc.value()
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self { n: self.n, c: self.c.iter().map(|v| *v * s).collect() }
    }

    /// Zero-pads or truncates to order `n`.
    pub fn resized(&self, n: usize) -> Self {
        let mut out = Self::zeros(n);
        let m = n.min(self.n) as i64;
        for k in -m..=m {
            out[k] = self.get(k);
        }
        out
    }

    /// `max |c_n - conj(c_{-n})|`.
    pub fn symmetry_residual(&self) -> T {
        let n = self.n as i64;
        (0..=n).fold(T::zero(), |m, k| m.max((self.get(k) - self.get(-k).conj()).norm()))
    }

    pub fn eval(&self, theta: T) -> Complex<T> {
        let mut acc = KahanSum::new();
        for (k, v) in self.modes() {
            acc.add(v * cis_turns((T::from_i64_lossy(k) * theta).frac1()));
        }
        acc.value()
    }
}

impl<T: Real> std::ops::Index<i64> for CoeffSeq<T> {
    type Output = Complex<T>;
    fn index(&self, k: i64) -> &Complex<T> {
        &self.c[(k + self.n as i64) as usize]
    }
}

impl<T: Real> std::ops::IndexMut<i64> for CoeffSeq<T> {
    fn index_mut(&mut self, k: i64) -> &mut Complex<T> {
        &mut self.c[(k + self.n as i64) as usize]
    }
}

/// `(R_rho c)_n = exp(2 pi i n rho) c_n`.
pub fn rotate<T: Real>(c: &CoeffSeq<T>, rho: T) -> CoeffSeq<T> {
    let mut out = c.clone();
    for (i, v) in out.c.iter_mut().enumerate() {
        let k = i as i64 - c.n as i64;
        *v *= cis_turns((T::from_i64_lossy(k) * rho).frac1());
    }
    out
}

/// `(D c)_n = 2 pi i n c_n`.
pub fn differentiate<T: Real>(c: &CoeffSeq<T>) -> CoeffSeq<T> {
    let mut out = c.clone();
    for (i, v) in out.c.iter_mut().enumerate() {
        let k = T::from_i64_lossy(i as i64 - c.n as i64);
        *v *= Complex::new(T::zero(), T::TAU() * k);
    }
    out
}

/// Truncated discrete convolution: modes of both factors and of the result
/// are restricted to `|n| <= N`.
pub fn convolve<T: Real>(u: &CoeffSeq<T>, v: &CoeffSeq<T>) -> CoeffSeq<T> {
    assert_eq!(u.n, v.n, "convolution operands must share a truncation order");
    let n = u.n as i64;
    let mut out = CoeffSeq::zeros(u.n);
    for k in -n..=n {
        let lo = (-n).max(k - n);
        let hi = n.min(k + n);
        let mut acc = Complex::zero();
        for j in lo..=hi {
            acc += u[k - j] * v[j];
        }
        out[k] = acc;
    }
    out
}

/// `c_n <- (c_n + conj(c_{-n})) / 2`.
pub fn symmetrize<T: Real>(c: &CoeffSeq<T>) -> CoeffSeq<T> {
    let mut out = c.clone();
    let half = T::lit(0.5);
    let n = c.n as i64;
    for k in 0..=n {
        let v = (c[k] + c[-k].conj()) * half;
        out[k] = v;
        out[-k] = v.conj();
    }
    out
}

/// `sum |c_n| nu^|n|`.
pub fn weighted_l1_norm<T: Real>(c: &CoeffSeq<T>, nu: T) -> T {
    let mut acc = KahanSum::new();
    for (k, v) in c.modes() {
        acc.add(v.norm() * nu.powi(k.unsigned_abs() as i32));
    }
    acc.value()
}

/// Planar curve `K(theta) = sum (a_n, b_n) exp(2 pi i n theta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCircle<T> {
    pub a: CoeffSeq<T>,
    pub b: CoeffSeq<T>,
}

impl<T: Real> FourierCircle<T> {
    pub fn new(a: CoeffSeq<T>, b: CoeffSeq<T>) -> Result<Self> {
        if a.n != b.n {
            return Err(Error::LengthMismatch { expected: a.c.len(), actual: b.c.len() });
        }
        Ok(Self { a, b })
    }

    pub fn zeros(n: usize) -> Self {
        Self { a: CoeffSeq::zeros(n), b: CoeffSeq::zeros(n) }
    }

    /// Constant curve at `p`.
    pub fn constant(n: usize, p: Point2<T>) -> Self {
        Self {
            a: CoeffSeq::delta(n, 0, Complex::new(p.x, T::zero())),
            b: CoeffSeq::delta(n, 0, Complex::new(p.y, T::zero())),
        }
    }

    /// Ellipse `center + (rx cos 2 pi theta, ry sin 2 pi theta)`.
    pub fn ellipse(n: usize, center: Point2<T>, rx: T, ry: T) -> Self {
        let half = T::lit(0.5);
        let mut k = Self::constant(n.max(1), center);
        k.a[1] = Complex::new(rx * half, T::zero());
        k.a[-1] = Complex::new(rx * half, T::zero());
        k.b[1] = Complex::new(T::zero(), -ry * half);
        k.b[-1] = Complex::new(T::zero(), ry * half);
        k
    }

    pub fn order(&self) -> usize {
        self.a.n
    }

    pub fn scale(&self) -> T {
        self.a.max_abs().max(self.b.max_abs())
    }

    /// Mean point `(a_0, b_0)`.
    pub fn center(&self) -> Point2<T> {
        Point2::new(self.a[0].re, self.b[0].re)
    }

    pub fn symmetry_residual(&self) -> T {
        self.a.symmetry_residual().max(self.b.symmetry_residual())
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetry_residual() <= T::lit(SYMMETRY_TOL) * self.scale().max(T::min_positive_value())
    }

    pub fn symmetrized(&self) -> Self {
        Self { a: symmetrize(&self.a), b: symmetrize(&self.b) }
    }

    pub fn rotated(&self, rho: T) -> Self {
        Self { a: rotate(&self.a, rho), b: rotate(&self.b, rho) }
    }

    pub fn resized(&self, n: usize) -> Self {
        Self { a: self.a.resized(n), b: self.b.resized(n) }
    }

    /// `K(0)` taken as a real point.
    pub fn origin_point(&self) -> Point2<T> {
        Point2::new(self.a.sum().re, self.b.sum().re)
    }

    /// Evaluates the real curve, rejecting asymmetric data.
    pub fn eval(&self, theta: T) -> Result<Point2<T>> {
        let x = self.a.eval(theta);
        let y = self.b.eval(theta);
        let scale = self.scale().max(T::one());
        let tol = T::lit(EVAL_IMAG_TOL) * scale;
        if x.im.abs() > tol || y.im.abs() > tol {
            return Err(Error::SymmetryViolation { residual: x.im.abs().max(y.im.abs()).to_f64().unwrap_or(f64::NAN) });
        }
        Ok(Point2::new(x.re, y.re))
    }

    /// Per-mode `max(|a_n|, |b_n|)`.
    pub fn mode_norms(&self) -> impl Iterator<Item = (i64, T)> + '_ {
        self.a.modes().zip(self.b.modes()).map(|((k, a), (_, b))| (k, a.norm().max(b.norm())))
    }
}

/// `sum max(|a_n|, |b_n|) nu^|n|`.
pub fn circle_weighted_l1_norm<T: Real>(k: &FourierCircle<T>, nu: T) -> T {
    let mut acc = KahanSum::new();
    for (n, v) in k.mode_norms() {
        acc.add(v * nu.powi(n.unsigned_abs() as i32));
    }
    acc.value()
}

/// `sqrt(sum (1 + d^2)^|n| max(|a_n|^2, |b_n|^2))`.
pub fn sobolev_norm<T: Real>(k: &FourierCircle<T>, d: T) -> T {
    let base = T::one() + d * d;
    let mut acc = KahanSum::new();
    for (n, v) in k.mode_norms() {
        acc.add(base.powi(n.unsigned_abs() as i32) * v * v);
    }
    acc.value().sqrt()
}

/// Signed area `1/2 int (K1 K2' - K2 K1') dtheta`, computed in coefficient space.
pub fn enclosed_area<T: Real>(k: &FourierCircle<T>) -> T {
    let n = k.order() as i64;
    let mut acc = KahanSum::new();
    for m in -n..=n {
        let w = Complex::new(T::zero(), T::TAU() * T::from_i64_lossy(m));
        acc.add(w * (k.a[-m] * k.b[m] - k.b[-m] * k.a[m]));
    }
    let v = acc.value() * T::lit(0.5);
    v.re
}

/// Imaginary residue of [`enclosed_area`], for diagnostics.
pub fn enclosed_area_residue<T: Real>(k: &FourierCircle<T>) -> T {
    let n = k.order() as i64;
    let mut acc = KahanSum::new();
    for m in -n..=n {
        let w = Complex::new(T::zero(), T::TAU() * T::from_i64_lossy(m));
        acc.add(w * (k.a[-m] * k.b[m] - k.b[-m] * k.a[m]));
    }
    (acc.value() * T::lit(0.5)).im.abs()
}

/// Uniform grid on `[0, 1)` with an exact twiddle table.
#[derive(Clone, Debug)]
pub struct Grid<T> {
    twiddle: Vec<Complex<T>>,
}

impl<T: Real> Grid<T> {
    pub fn new(size: usize) -> Self {
        let g = T::from_usize_lossy(size);
        Self { twiddle: (0..size).map(|j| cis_turns(T::from_usize_lossy(j) / g)).collect() }
    }

    /// Default grid for a defect evaluation at order `n`: `max(1024, 8(2N+1))`.
    pub fn for_order(n: usize) -> Self {
        Self::new(defect_grid_size(n))
    }

    pub fn len(&self) -> usize {
        self.twiddle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.twiddle.is_empty()
    }

    pub fn theta(&self, j: usize) -> T {
        T::from_usize_lossy(j) / T::from_usize_lossy(self.len())
    }

    /// `exp(2 pi i k j / G)`.
    #[inline]
    pub fn cis(&self, k: i64, j: usize) -> Complex<T> {
        let g = self.len() as i64;
        self.twiddle[(k * j as i64).rem_euclid(g) as usize]
    }

    /// Values of the series at every grid node.
    pub fn eval(&self, c: &CoeffSeq<T>) -> Vec<Complex<T>> {
        (0..self.len())
            .map(|j| {
                let mut acc = Complex::zero();
                for (k, v) in c.modes() {
                    acc += v * self.cis(k, j);
                }
                acc
            })
            .collect()
    }

    /// Real curve values at every grid node.
    pub fn eval_curve(&self, k: &FourierCircle<T>) -> Vec<Point2<T>> {
        self.eval(&k.a).into_iter().zip(self.eval(&k.b)).map(|(x, y)| Point2::new(x.re, y.re)).collect()
    }

    /// Trapezoid-rule Fourier coefficients of grid samples for `|n| <= n`.
    pub fn transform(&self, samples: &[Complex<T>], n: usize) -> CoeffSeq<T> {
        let g = T::from_usize_lossy(self.len());
        let mut out = CoeffSeq::zeros(n);
        let ni = n as i64;
        for k in -ni..=ni {
            let mut acc = Complex::zero();
            for (j, s) in samples.iter().enumerate() {
                acc += *s * self.cis(-k, j);
            }
            out[k] = acc / g;
        }
        out
    }
}

pub fn defect_grid_size(n: usize) -> usize {
    1024.max(8 * (2 * n + 1))
}

/// Trapezoid-rule Fourier coefficients of equispaced samples on `[0, 1)`.
pub fn dft_from_samples<T: Real>(samples: &[Complex<T>], n: usize) -> Result<CoeffSeq<T>> {
    if samples.len() < 2 * (2 * n + 1) {
        return Err(Error::InsufficientData(format!(
            "{} samples cannot resolve {} modes",
            samples.len(),
            2 * n + 1
        )));
    }
    Ok(Grid::new(samples.len()).transform(samples, n))
}

/// Sup over a grid of `|F(K_j) - K_{j+1}|` (max-norm), with the last link closing
/// onto `K_1(theta + closing_rho)`. A single circle is the case `d = 1`.
pub fn system_defect<T: Real, M: PlanarMap<T> + ?Sized>(circles: &[FourierCircle<T>], map: &M, closing_rho: T) -> T {
    let order = circles.iter().map(|c| c.order()).max().unwrap_or(0);
    let grid = Grid::for_order(order);
    let d = circles.len();
    let values: Vec<Vec<Point2<T>>> = circles.iter().map(|k| grid.eval_curve(k)).collect();
    let closing = grid.eval_curve(&circles[0].rotated(closing_rho));
    let mut worst = T::zero();
    for (j, src) in values.iter().enumerate() {
        let dst = if j + 1 < d { &values[j + 1] } else { &closing };
        for (p, q) in src.iter().zip(dst) {
            let r = map.apply(*p) - *q;
            let e = r.x.abs().max(r.y.abs());
            if !(e <= worst) {
                worst = if e.is_nan() { T::infinity() } else { e };
            }
        }
    }
    worst
}

/// Conjugacy defect `sup |F(K(theta)) - K(theta + rho)|` of a single circle.
pub fn defect<T: Real, M: PlanarMap<T> + ?Sized>(k: &FourierCircle<T>, map: &M, rho: T) -> T {
    system_defect(std::slice::from_ref(k), map, rho)
}

/// Area enclosed by `F o K`, sampled on the defect grid and re-fit at order `2N`.
pub fn pushforward_area<T: Real, M: PlanarMap<T> + ?Sized>(k: &FourierCircle<T>, map: &M) -> T {
    let n = 2 * k.order();
    let grid = Grid::new(defect_grid_size(n).max(2 * (2 * n + 1)));
    let image: Vec<Point2<T>> = grid.eval_curve(k).into_iter().map(|p| map.apply(p)).collect();
    let xs: Vec<Complex<T>> = image.iter().map(|p| Complex::new(p.x, T::zero())).collect();
    let ys: Vec<Complex<T>> = image.iter().map(|p| Complex::new(p.y, T::zero())).collect();
    let fk = FourierCircle { a: grid.transform(&xs, n), b: grid.transform(&ys, n) };
    enclosed_area(&fk)
}
