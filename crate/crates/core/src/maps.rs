//! Area-preserving planar maps and point-wise dynamical utilities.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Orbits are aborted once a coordinate leaves this box.
pub const ESCAPE_RADIUS: f64 = 1e8;
/// Half-width of the parabolic band around trace = +-2.
pub const PARABOLIC_TOL: f64 = 1e-10;
const PERIODIC_MAX_ITER: usize = 50;
const PERIODIC_MAX_BACKTRACK: usize = 30;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }
}

impl<T: Real> Add for Point2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Real> Sub for Point2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Real> Mul<T> for Point2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

/// Row-major 2x2 matrix.
pub type Mat2<T> = [[T; 2]; 2];

pub fn mat2_mul<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

pub fn mat2_det<T: Real>(a: &Mat2<T>) -> T {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

fn mat2_apply<T: Real>(a: &Mat2<T>, p: Point2<T>) -> Point2<T> {
    Point2::new(a[0][0] * p.x + a[0][1] * p.y, a[1][0] * p.x + a[1][1] * p.y)
}

/// A planar map with an analytic derivative.
///
/// Anything implementing this trait can be iterated, projected and solved for
/// invariant circles through the grid-based residual in [`crate::solver`].
pub trait PlanarMap<T: Real> {
    fn apply(&self, p: Point2<T>) -> Point2<T>;
    fn derivative(&self, p: Point2<T>) -> Mat2<T>;
}

/// Map families known to the library.
///
/// `Rotation` and `Twist` are integrable reference maps: the rigid rotation by
/// `alpha` radians, and the shear `p -> R(alpha + |p|^2) p` whose origin-centered
/// circles exist for every rotation number above `alpha / 2pi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MapFamily {
    HenonAP,
    Standard,
    Rotation,
    Twist,
}

impl MapFamily {
    pub fn name(self) -> &'static str {
        match self {
            MapFamily::HenonAP => "henon",
            MapFamily::Standard => "standard",
            MapFamily::Rotation => "rotation",
            MapFamily::Twist => "twist",
        }
    }
}

impl fmt::Display for MapFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MapFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "henon" | "henonap" | "henon-ap" => Ok(MapFamily::HenonAP),
            "standard" | "std" => Ok(MapFamily::Standard),
            "rotation" => Ok(MapFamily::Rotation),
            "twist" => Ok(MapFamily::Twist),
            other => Err(Error::InvalidArgument(format!("unknown map family `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapSpec<T> {
    pub family: MapFamily,
    /// Map parameter in radians.
    pub alpha: T,
}

impl<T: Real> MapSpec<T> {
    pub fn new(family: MapFamily, alpha: T) -> Self {
        Self { family, alpha }
    }

    pub fn henon(alpha: T) -> Self {
        Self::new(MapFamily::HenonAP, alpha)
    }

    pub fn standard(alpha: T) -> Self {
        Self::new(MapFamily::Standard, alpha)
    }

    pub fn rotation(alpha: T) -> Self {
        Self::new(MapFamily::Rotation, alpha)
    }

    pub fn twist(alpha: T) -> Self {
        Self::new(MapFamily::Twist, alpha)
    }

    /// The elliptic fixed point used as the default projection center.
    pub fn default_center(&self) -> Point2<T> {
        match self.family {
            MapFamily::Standard => Point2::new(T::PI(), T::zero()),
            _ => Point2::new(T::zero(), T::zero()),
        }
    }
}

impl<T: Real> PlanarMap<T> for MapSpec<T> {
    fn apply(&self, p: Point2<T>) -> Point2<T> {
        let a = self.alpha;
        match self.family {
            MapFamily::HenonAP => {
                let (s, c) = a.sin_cos();
                let w = p.y - p.x * p.x;
                Point2::new(p.x * c - w * s, p.x * s + w * c)
            }
            MapFamily::Standard => {
                let kick = a * p.x.sin();
                Point2::new(p.x + p.y + kick, p.y + kick)
            }
            MapFamily::Rotation => {
                let (s, c) = a.sin_cos();
                Point2::new(c * p.x - s * p.y, s * p.x + c * p.y)
            }
            MapFamily::Twist => {
                let (s, c) = (a + p.dot(p)).sin_cos();
                Point2::new(c * p.x - s * p.y, s * p.x + c * p.y)
            }
        }
    }

    fn derivative(&self, p: Point2<T>) -> Mat2<T> {
        let a = self.alpha;
        let two = T::lit(2.0);
        match self.family {
            MapFamily::HenonAP => {
                let (s, c) = a.sin_cos();
                [[c + two * p.x * s, -s], [s - two * p.x * c, c]]
            }
            MapFamily::Standard => {
                let k = a * p.x.cos();
                [[T::one() + k, T::one()], [k, T::one()]]
            }
            MapFamily::Rotation => {
                let (s, c) = a.sin_cos();
                [[c, -s], [s, c]]
            }
            MapFamily::Twist => {
                // R + (R J p) (2p)^T, with J the quarter turn.
                let (s, c) = (a + p.dot(p)).sin_cos();
                let rjp = Point2::new(-(s * p.x) - c * p.y, c * p.x - s * p.y);
                [
                    [c + two * rjp.x * p.x, -s + two * rjp.x * p.y],
                    [s + two * rjp.y * p.x, c + two * rjp.y * p.y],
                ]
            }
        }
    }
}

/// One application of the map, rejecting non-finite results.
pub fn eval_map<T: Real>(spec: &MapSpec<T>, p: Point2<T>) -> Result<Point2<T>> {
    let q = spec.apply(p);
    if q.is_finite() {
        Ok(q)
    } else {
        Err(Error::Overflow { step: 1 })
    }
}

pub fn jacobian<T: Real>(spec: &MapSpec<T>, p: Point2<T>) -> Mat2<T> {
    spec.derivative(p)
}

/// A finite orbit of `F^stride` starting at `seed`.
#[derive(Clone, Debug)]
pub struct OrbitSegment<T> {
    pub spec: MapSpec<T>,
    pub seed: Point2<T>,
    pub points: Vec<Point2<T>>,
    pub stride: usize,
}

impl<T: Real> OrbitSegment<T> {
    /// Number of map steps `M` (one less than the number of points).
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn last(&self) -> Point2<T> {
        *self.points.last().expect("orbit is never empty")
    }

    /// Appends `extra` further samples.
    pub fn extend(&mut self, extra: usize) -> Result<()> {
        let base = self.steps() * self.stride;
        let escape = T::lit(ESCAPE_RADIUS);
        let mut p = self.last();
        self.points.reserve(extra);
        for k in 0..extra {
            for s in 0..self.stride {
                p = self.spec.apply(p);
                if !p.is_finite() || p.x.abs() > escape || p.y.abs() > escape {
                    return Err(Error::Overflow { step: base + k * self.stride + s + 1 });
                }
            }
            self.points.push(p);
        }
        Ok(())
    }

    /// The `phase`-th subsequence of an F-orbit, i.e. every `stride`-th point
    /// starting at index `phase`.
    pub fn subsequence(points: &[Point2<T>], phase: usize, stride: usize) -> Vec<Point2<T>> {
        points.iter().skip(phase).step_by(stride).copied().collect()
    }
}

/// Iterates `F` `stride * m` times from `seed`, keeping every `stride`-th point.
pub fn iterate_orbit<T: Real>(spec: &MapSpec<T>, seed: Point2<T>, m: usize, stride: usize) -> Result<OrbitSegment<T>> {
    if m < 1 || stride < 1 {
        return Err(Error::InvalidArgument("orbit length and stride must be positive".into()));
    }
    if !seed.is_finite() {
        return Err(Error::Overflow { step: 0 });
    }
    let mut orbit = OrbitSegment { spec: *spec, seed, points: vec![seed], stride };
    orbit.extend(m)?;
    Ok(orbit)
}

#[derive(Clone, Debug)]
pub struct PeriodicOrbit<T> {
    pub spec: MapSpec<T>,
    pub period: usize,
    pub points: Vec<Point2<T>>,
    pub residual: T,
}

impl<T: Real> PeriodicOrbit<T> {
    /// Product of the Jacobians along the orbit.
    pub fn monodromy(&self) -> Mat2<T> {
        let mut m = [[T::one(), T::zero()], [T::zero(), T::one()]];
        for p in &self.points {
            m = mat2_mul(&self.spec.derivative(*p), &m);
        }
        m
    }
}

/// `F^period(p) - p` and the derivative of `F^period` at `p`.
fn periodic_residual<T: Real>(spec: &MapSpec<T>, p: Point2<T>, period: usize) -> Result<(Point2<T>, Mat2<T>)> {
    let escape = T::lit(ESCAPE_RADIUS);
    let mut q = p;
    let mut dq = [[T::one(), T::zero()], [T::zero(), T::one()]];
    for step in 0..period {
        dq = mat2_mul(&spec.derivative(q), &dq);
        q = spec.apply(q);
        if !q.is_finite() || q.x.abs() > escape || q.y.abs() > escape {
            return Err(Error::Overflow { step: step + 1 });
        }
    }
    Ok((q - p, dq))
}

/// Damped Newton iteration on `F^period(p) - p`.
///
/// Full steps are halved until the residual decreases, which widens the basin
/// for long periods where `F^period` is strongly nonlinear.
pub fn find_periodic_orbit<T: Real>(spec: &MapSpec<T>, guess: Point2<T>, period: usize, tol: T) -> Result<PeriodicOrbit<T>> {
    if period == 0 || !(tol > T::zero()) {
        return Err(Error::InvalidArgument("period must be positive and tol > 0".into()));
    }
    let mut p = guess;
    let (mut g, mut dq) = periodic_residual(spec, p, period)?;
    let mut residual = g.norm();
    for _ in 0..PERIODIC_MAX_ITER {
        if residual <= tol {
            return Ok(build_periodic(spec, p, period));
        }
        let a = [[dq[0][0] - T::one(), dq[0][1]], [dq[1][0], dq[1][1] - T::one()]];
        let det = mat2_det(&a);
        let scale = a.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs()));
        if det.abs() <= T::epsilon() * scale * scale {
            return Err(Error::Singular { pivot: 0 });
        }
        let inv = [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]];
        let step = mat2_apply(&inv, g);
        let mut t = T::one();
        let mut accepted = false;
        for _ in 0..PERIODIC_MAX_BACKTRACK {
            let trial = p - step * t;
            if let Ok((g2, dq2)) = periodic_residual(spec, trial, period) {
                let r2 = g2.norm();
                if r2 < residual {
                    p = trial;
                    g = g2;
                    dq = dq2;
                    residual = r2;
                    accepted = true;
                    break;
                }
            }
            t *= T::lit(0.5);
        }
        if !accepted {
            break;
        }
    }
    if residual <= tol {
        return Ok(build_periodic(spec, p, period));
    }
    Err(Error::NoConvergence { iterations: PERIODIC_MAX_ITER, residual: residual.to_f64().unwrap_or(f64::NAN) })
}

fn build_periodic<T: Real>(spec: &MapSpec<T>, p: Point2<T>, period: usize) -> PeriodicOrbit<T> {
    let mut points = Vec::with_capacity(period);
    let mut q = p;
    for _ in 0..period {
        points.push(q);
        q = spec.apply(q);
    }
    let residual = (q - p).norm();
    PeriodicOrbit { spec: *spec, period, points, residual }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stability<T> {
    /// Rotation angle in radians, `acos(trace / 2)`.
    Elliptic(T),
    Hyperbolic,
    Parabolic,
}

impl<T> Stability<T> {
    pub fn is_elliptic(&self) -> bool {
        matches!(self, Stability::Elliptic(_))
    }
}

pub fn stability_type<T: Real>(orbit: &PeriodicOrbit<T>) -> Stability<T> {
    let m = orbit.monodromy();
    let t = m[0][0] + m[1][1];
    let two = T::lit(2.0);
    let band = T::lit(PARABOLIC_TOL);
    if (t - two).abs() <= band || (t + two).abs() <= band {
        Stability::Parabolic
    } else if t.abs() < two {
        Stability::Elliptic((t / two).acos())
    } else {
        Stability::Hyperbolic
    }
}
