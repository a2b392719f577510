//! From a seed point to a converged invariant circle (or period-`d` system).
//!
//! 0. Classify the seed orbit by the spread of its rotation-number estimates.
//! 1. Refine the rotation number, growing the orbit until estimates settle.
//! 2. Sample coefficient decay on a short orbit and pick the truncation `N`.
//! 3. Build a low-order guess from weighted averages and check its defect.
//! 4. Run Newton, retrying once from a richer guess.

use crate::birkhoff::{
    classify_orbit, default_checkpoints, estimate_truncation, fourier_coefficients, rotation_number, sample_decay,
    Classification, RotationEstimate, DEFAULT_CLASSIFY_TOL,
};
use crate::error::{Error, Result};
use crate::fourier::{CoeffSeq, FourierCircle};
use crate::maps::{iterate_orbit, MapSpec, OrbitSegment, PlanarMap, Point2};
use crate::projection::project_points;
use crate::scalar::Real;
use crate::solver::{newton_solve, CircleSystem, NewtonOptions, PhaseCondition, SolveReport};

/// Decay-sampling modes.
pub const DECAY_MODES: [i64; 8] = [2, 4, 6, 8, 10, 15, 20, 30];
const INITIAL_GUESS_RETRIES: usize = 3;
const RHO_GROWTH: f64 = 1.15;
const RHO_AGREEMENT: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct RecipeConfig<T> {
    pub spec: MapSpec<T>,
    pub seed: Point2<T>,
    pub period: usize,
    pub m_classify: usize,
    pub m_rho: usize,
    pub m_coeff: usize,
    /// Orbit length for decay sampling.
    pub m_decay: usize,
    pub n0_fraction: T,
    pub initial_defect_tol: T,
    pub classify_tol: T,
    /// Fixes `N` instead of estimating it from the decay.
    pub n_modes: Option<usize>,
    pub max_modes: usize,
    /// Projection center per component; defaults to the map's elliptic fixed
    /// point for `d = 1` and to component centroids otherwise.
    pub centers: Option<Vec<Point2<T>>>,
    pub newton: NewtonOptions<T>,
}

impl<T: Real> RecipeConfig<T> {
    pub fn new(spec: MapSpec<T>, seed: Point2<T>, period: usize) -> Self {
        Self {
            spec,
            seed,
            period,
            m_classify: 20_000,
            m_rho: 200_000,
            m_coeff: 10_000,
            m_decay: 1000,
            n0_fraction: T::lit(0.15),
            initial_defect_tol: T::lit(0.05),
            classify_tol: T::lit(DEFAULT_CLASSIFY_TOL),
            n_modes: None,
            max_modes: 256,
            centers: None,
            newton: NewtonOptions::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.period == 0 {
            return Err(Error::InvalidArgument("period must be positive".into()));
        }
        if !(self.n0_fraction > T::zero() && self.n0_fraction < T::one()) {
            return Err(Error::InvalidArgument("n0_fraction must lie in (0, 1)".into()));
        }
        if !(self.initial_defect_tol > T::zero() && self.initial_defect_tol < T::one()) {
            return Err(Error::InvalidArgument("initial_defect_tol must lie in (0, 1)".into()));
        }
        if self.m_classify < 8 || self.m_coeff < 3 || self.m_decay < 3 {
            return Err(Error::InvalidArgument("orbit lengths are too short".into()));
        }
        if let Some(c) = &self.centers {
            if c.len() != self.period {
                return Err(Error::LengthMismatch { expected: self.period, actual: c.len() });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct RecipeResult<T> {
    pub classification: Classification<T>,
    /// Rotation-number estimate for `F^d`; the per-iterate value is `system.rho`.
    pub rho: RotationEstimate<T>,
    pub n: usize,
    pub n0: usize,
    pub decay: Vec<(i64, T)>,
    pub initial_defect: T,
    pub centers: Vec<Point2<T>>,
    pub phase: PhaseCondition<T>,
    pub system: CircleSystem<T>,
    pub report: SolveReport<T>,
}

fn centroid<T: Real>(points: &[Point2<T>]) -> Point2<T> {
    let k = T::from_usize_lossy(points.len());
    let sx: T = points.iter().map(|p| p.x).sum();
    let sy: T = points.iter().map(|p| p.y).sum();
    Point2::new(sx / k, sy / k)
}

/// Stride-`d` orbits of every component, `p_j = F^j(p_0)`.
fn component_orbits<T: Real>(orbit: &OrbitSegment<T>, d: usize) -> Result<Vec<Vec<Point2<T>>>> {
    let mut out = vec![orbit.points.clone()];
    for j in 1..d {
        let prev = &out[j - 1];
        let next: Vec<_> = prev.iter().map(|p| orbit.spec.apply(*p)).collect();
        if next.iter().any(|p| !p.is_finite()) {
            return Err(Error::Overflow { step: j });
        }
        out.push(next);
    }
    Ok(out)
}

/// Projection centers of the `d` components of an orbit of `F^d`.
pub fn default_centers<T: Real>(orbit: &OrbitSegment<T>, d: usize) -> Result<Vec<Point2<T>>> {
    if d == 1 {
        return Ok(vec![orbit.spec.default_center()]);
    }
    Ok(component_orbits(orbit, d)?.iter().map(|c| centroid(c)).collect())
}

/// Fourier guess from orbit data.
///
/// `orbit` samples `F^d` from `p_0`; `rho` is the rotation number of `F^d`.
/// Component `j` averages the orbit of `p_j = F^j(p_0)` over modes `|n| <= n0`
/// and is zero-padded to order `n`.
pub fn initial_guess<T: Real>(orbit: &OrbitSegment<T>, rho: T, n0: usize, n: usize, d: usize) -> Result<CircleSystem<T>> {
    if orbit.stride != d {
        return Err(Error::InvalidArgument(format!("orbit stride {} does not match period {d}", orbit.stride)));
    }
    if n0 > n {
        return Err(Error::InvalidArgument(format!("guess order {n0} exceeds truncation {n}")));
    }
    let modes: Vec<i64> = (-(n0 as i64)..=n0 as i64).collect();
    let mut circles = Vec::with_capacity(d);
    for points in component_orbits(orbit, d)? {
        let coeffs = fourier_coefficients(&points, rho, &modes, T::zero())?;
        let mut a = CoeffSeq::zeros(n);
        let mut b = CoeffSeq::zeros(n);
        for c in coeffs {
            a[c.n] = c.value.0;
            b[c.n] = c.value.1;
        }
        circles.push(FourierCircle { a, b }.symmetrized());
    }
    CircleSystem::new(rho / T::from_usize_lossy(d), circles)
}

/// Step 1: grows the orbit until consecutive estimates agree.
fn refine_rho<T: Real>(orbit: &mut OrbitSegment<T>, center: Point2<T>, m_max: usize) -> Result<RotationEstimate<T>> {
    let mut history: Vec<(usize, T)> = Vec::new();
    loop {
        let angles = project_points(&orbit.points, center)?;
        let m = orbit.steps();
        let est = rotation_number(&angles, &[m])?;
        history.push((m, est.rho));
        let settled = history.len() >= 2 && {
            let prev = history[history.len() - 2].1;
            crate::projection::circle_distance(prev, est.rho) <= T::lit(RHO_AGREEMENT)
        };
        if settled || m >= m_max {
            let tail = &history[history.len().saturating_sub(3)..];
            let mut spread = T::zero();
            for (i, a) in tail.iter().enumerate() {
                for b in &tail[i + 1..] {
                    spread = spread.max(crate::projection::circle_distance(a.1, b.1));
                }
            }
            return Ok(RotationEstimate { rho: est.rho, m, history, spread });
        }
        let grow = ((m as f64) * RHO_GROWTH).ceil() as usize;
        orbit.extend(grow.min(m_max) - m)?;
    }
}

fn n0_for<T: Real>(fraction: T, n: usize) -> usize {
    (fraction * T::from_usize_lossy(n)).ceil().to_usize().unwrap_or(1).clamp(1, n)
}

/// Orbit, projection centers and classification of the seed.
fn step_zero<T: Real>(cfg: &RecipeConfig<T>) -> Result<(OrbitSegment<T>, Vec<Point2<T>>, Classification<T>)> {
    let orbit = iterate_orbit(&cfg.spec, cfg.seed, cfg.m_classify, cfg.period)?;
    let centers = match &cfg.centers {
        Some(c) => c.clone(),
        None => default_centers(&orbit, cfg.period)?,
    };
    let angles = project_points(&orbit.points, centers[0])?;
    let classification = classify_orbit(&angles, &default_checkpoints(cfg.m_classify), cfg.classify_tol)?;
    Ok((orbit, centers, classification))
}

/// Runs only the classification step of the recipe.
pub fn classify_seed<T: Real>(cfg: &RecipeConfig<T>) -> Result<Classification<T>> {
    cfg.validate()?;
    Ok(step_zero(cfg)?.2)
}

pub fn run_recipe<T: Real>(cfg: &RecipeConfig<T>) -> Result<RecipeResult<T>> {
    cfg.validate()?;
    let d = cfg.period;
    let spec = cfg.spec;

    // Step 0.
    let (mut orbit, centers, classification) = step_zero(cfg)?;
    if let Classification::NonConvergent(est) = &classification {
        return Err(Error::NotQuasiperiodic { spread: est.spread.to_f64().unwrap_or(f64::NAN) });
    }

    // Step 1.
    let rho = refine_rho(&mut orbit, centers[0], cfg.m_rho.max(cfg.m_classify))?;

    // Step 2.
    let short = OrbitSegment { points: orbit.points[..=cfg.m_decay.min(orbit.steps())].to_vec(), ..orbit.clone() };
    let decay = sample_decay(&short.points, rho.rho, &DECAY_MODES)?;
    let n = match cfg.n_modes {
        Some(n) => n,
        None => estimate_truncation(&monotone_prefix(&decay), T::epsilon())?.min(cfg.max_modes),
    };

    // Step 3.
    let coeff_orbit = OrbitSegment { points: orbit.points[..=cfg.m_coeff.min(orbit.steps())].to_vec(), ..orbit.clone() };
    let phase = PhaseCondition::radial(cfg.seed, centers[0])?;
    let mut n0 = n0_for(cfg.n0_fraction, n);
    let (mut guess, mut initial_defect) = guess_with_retries(&coeff_orbit, rho.rho, &mut n0, n, d, cfg.initial_defect_tol)?;

    // Step 4.
    let first = newton_solve(&spec, &guess, &phase, &cfg.newton);
    let solved = if matches!(&first, Ok(s) if s.report.converged) || n0 >= n {
        first
    } else {
        n0 = (2 * n0).min(n);
        guess = initial_guess(&coeff_orbit, rho.rho, n0, n, d)?;
        initial_defect = guess.defect(&spec);
        newton_solve(&spec, &guess, &phase, &cfg.newton)
    }?;
    if !solved.report.converged {
        return Err(Error::NoConvergence {
            iterations: solved.report.iterations,
            residual: solved.report.final_defect.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(RecipeResult {
        classification,
        rho,
        n,
        n0,
        decay,
        initial_defect,
        centers,
        phase,
        system: solved.system,
        report: solved.report,
    })
}

fn guess_with_retries<T: Real>(
    orbit: &OrbitSegment<T>,
    rho: T,
    n0: &mut usize,
    n: usize,
    d: usize,
    tol: T,
) -> Result<(CircleSystem<T>, T)> {
    let mut last = T::infinity();
    for attempt in 0..=INITIAL_GUESS_RETRIES {
        let guess = initial_guess(orbit, rho, *n0, n, d)?;
        let defect = guess.defect(&orbit.spec);
        if defect <= tol {
            return Ok((guess, defect));
        }
        last = defect;
        if *n0 == n || attempt == INITIAL_GUESS_RETRIES {
            break;
        }
        *n0 = (2 * *n0).min(n);
    }
    Err(Error::InitialGuess { defect: last.to_f64().unwrap_or(f64::NAN) })
}

/// Leading run of decay samples that keeps decreasing; the tail of a sampled
/// spectrum flattens once it reaches the averaging noise floor.
pub fn monotone_prefix<T: Real>(decay: &[(i64, T)]) -> Vec<(i64, T)> {
    let mut out: Vec<(i64, T)> = Vec::with_capacity(decay.len());
    for &(n, v) in decay {
        if let Some(&(_, prev)) = out.last() {
            if !(v < prev) {
                break;
            }
        }
        out.push((n, v));
    }
    out
}

/// Evaluates every component on `samples` equispaced parameters.
pub fn sample_system<T: Real>(system: &CircleSystem<T>, samples: usize) -> Result<Vec<Vec<(T, Point2<T>)>>> {
    system
        .circles
        .iter()
        .map(|k| {
            (0..samples)
                .map(|j| {
                    let t = T::from_usize_lossy(j) / T::from_usize_lossy(samples);
                    k.eval(t).map(|p| (t, p))
                })
                .collect()
        })
        .collect()
}
