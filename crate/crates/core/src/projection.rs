//! Projection of planar orbits onto the circle and circle arithmetic.

use crate::error::{Error, Result};
use crate::maps::{OrbitSegment, Point2};
use crate::scalar::Real;

const DEGENERATE_RADIUS: f64 = 1e-12;

/// Angles in turns, `[0, 1)`, of orbit points seen from `center`.
#[derive(Clone, Debug)]
pub struct AngleSequence<T> {
    pub center: Point2<T>,
    pub thetas: Vec<T>,
}

impl<T: Real> AngleSequence<T> {
    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }
}

/// Four-quadrant angle of `v` in turns, normalized to `[0, 1)`.
pub fn angle_turns<T: Real>(v: Point2<T>) -> T {
    let t = v.y.atan2(v.x) / T::TAU();
    let t = if t < T::zero() { t + T::one() } else { t };
    if t >= T::one() {
        T::zero()
    } else {
        t
    }
}

pub fn project_points<T: Real>(points: &[Point2<T>], center: Point2<T>) -> Result<AngleSequence<T>> {
    let eps = T::lit(DEGENERATE_RADIUS);
    let thetas = points
        .iter()
        .enumerate()
        .map(|(index, p)| {
            let v = *p - center;
            if v.norm() < eps {
                Err(Error::DegenerateProjection { index })
            } else {
                Ok(angle_turns(v))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AngleSequence { center, thetas })
}

pub fn project_angles<T: Real>(orbit: &OrbitSegment<T>, center: Point2<T>) -> Result<AngleSequence<T>> {
    project_points(&orbit.points, center)
}

/// Forward angular increment `frac(next - prev)`.
///
/// This is the mod-1 difference, so clockwise motion by `r` reports `1 - r`.
#[inline]
pub fn forward_diff<T: Real>(theta_next: T, theta_prev: T) -> T {
    let d = theta_next - theta_prev;
    let d = if d < T::zero() { d + T::one() } else { d };
    if d >= T::one() {
        T::zero()
    } else {
        d
    }
}

pub fn diff_sequence<T: Real>(angles: &AngleSequence<T>) -> Vec<T> {
    angles.thetas.windows(2).map(|w| forward_diff(w[1], w[0])).collect()
}

/// Distance between two points of the circle `R/Z`.
pub fn circle_distance<T: Real>(a: T, b: T) -> T {
    let d = (a - b).abs().frac1();
    d.min(T::one() - d)
}
