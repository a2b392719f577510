//! Discrete continuation of invariant circle systems in the rotation number.
//!
//! Each step adds `direction * step` to the per-iterate rotation number and
//! re-solves from the previous solution. Failed steps halve the increment;
//! two failures in a row also double the truncation order. The family stops
//! when a monitored Sobolev norm blows up relative to the first record.

use crate::birkhoff::Classification;
use crate::error::{Error, Result};
use crate::fourier::{sobolev_norm, FourierCircle};
use crate::maps::{find_periodic_orbit, stability_type, MapSpec, PeriodicOrbit, Point2, Stability};
use crate::recipe::{classify_seed, RecipeConfig};
use crate::scalar::Real;
use crate::solver::{newton_solve, CircleSystem, NewtonOptions, PhaseCondition};

const FAILURES_BEFORE_GROWTH: usize = 2;
const PERIODIC_TOL: f64 = 1e-12;
const NEAREST_SAMPLES: usize = 2048;
const MONITOR_FLOOR: f64 = 1e-12;
const OFFSET_HALVINGS: usize = 6;

#[derive(Clone, Debug)]
pub struct ContinuationConfig<T> {
    /// Initial additive increment of the per-iterate rotation number.
    pub initial_step: T,
    pub min_step: T,
    /// Maximum number of accepted records, the start included.
    pub max_steps: usize,
    pub sobolev_orders: Vec<T>,
    pub blowup_factor: T,
    /// Cap on the truncation order when modes are added.
    pub n_max: usize,
    /// Largest defect a solution may have to be recorded.
    pub record_tol: T,
    pub newton: NewtonOptions<T>,
}

impl<T: Real> Default for ContinuationConfig<T> {
    fn default() -> Self {
        Self {
            initial_step: T::lit(1e-3),
            min_step: T::lit(1e-13),
            max_steps: 500,
            sobolev_orders: (1..=10).map(T::from_usize_lossy).collect(),
            blowup_factor: T::lit(1e6),
            n_max: 256,
            record_tol: T::lit(1e-10),
            newton: NewtonOptions::default(),
        }
    }
}

impl<T: Real> ContinuationConfig<T> {
    fn validate(&self) -> Result<()> {
        if !(self.min_step > T::zero() && self.initial_step > T::zero()) {
            return Err(Error::InvalidArgument("steps must be positive".into()));
        }
        if !(self.blowup_factor > T::one()) {
            return Err(Error::InvalidArgument("blowup_factor must exceed 1".into()));
        }
        if !(self.record_tol > T::zero()) {
            return Err(Error::InvalidArgument("record_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuationRecord<T> {
    /// Per-iterate rotation number.
    pub rho: T,
    pub system: CircleSystem<T>,
    pub defect: T,
    /// `(order, norm)`, the norm taken as the maximum over component circles.
    pub sobolev: Vec<(T, T)>,
}

impl<T: Real> ContinuationRecord<T> {
    /// Record for a solved system, with norms over modes `|n| <= cutoff`.
    pub fn new(spec: &MapSpec<T>, system: CircleSystem<T>, orders: &[T], cutoff: usize) -> Self {
        let defect = system.defect(spec);
        let sobolev = monitored_norms(&system, orders, cutoff);
        Self { rho: system.rho, system, defect, sobolev }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    SobolevBlowup,
    StepUnderflow,
    MaxSteps,
    SolverHardFailure,
}

#[derive(Clone, Debug)]
pub struct FamilyResult<T> {
    pub records: Vec<ContinuationRecord<T>>,
    pub stop_reason: StopReason,
    /// Solves attempted after the start, successful or not.
    pub attempts: usize,
}

impl<T: Real> FamilyResult<T> {
    pub fn last(&self) -> &ContinuationRecord<T> {
        self.records.last().expect("a family holds at least its start")
    }
}

/// Sobolev norms of every order, maximized over components, on `|n| <= cutoff`.
pub fn monitored_norms<T: Real>(system: &CircleSystem<T>, orders: &[T], cutoff: usize) -> Vec<(T, T)> {
    let clipped: Vec<FourierCircle<T>> =
        system.circles.iter().map(|k| if k.order() > cutoff { k.resized(cutoff) } else { k.clone() }).collect();
    orders
        .iter()
        .map(|&d| (d, clipped.iter().map(|k| sobolev_norm(k, d)).fold(T::zero(), T::max)))
        .collect()
}

/// Largest `|n|` at which some component has a mode above `floor (1 + scale)`.
///
/// Modes at the roundoff floor carry no information about the circle but
/// dominate high-order Sobolev norms, so monitoring stops at this order.
pub fn resolved_order<T: Real>(system: &CircleSystem<T>, floor: T) -> usize {
    let level = floor * (T::one() + system.scale());
    system
        .circles
        .iter()
        .flat_map(|k| k.mode_norms().filter(|&(_, v)| v > level).map(|(n, _)| n.unsigned_abs() as usize).collect::<Vec<_>>())
        .max()
        .unwrap_or(0)
        .max(1)
}

fn blown_up<T: Real>(start: &[(T, T)], now: &[(T, T)], factor: T) -> bool {
    start.iter().zip(now).any(|(&(_, s), &(_, v))| !v.is_finite() || v > factor * s)
}

/// Continues `start` in the direction `direction` (its sign is used).
pub fn continue_family<T: Real>(
    spec: &MapSpec<T>,
    start: &ContinuationRecord<T>,
    cfg: &ContinuationConfig<T>,
    direction: i32,
) -> Result<FamilyResult<T>> {
    cfg.validate()?;
    if direction == 0 {
        return Err(Error::InvalidArgument("direction must be +1 or -1".into()));
    }
    let sign = if direction > 0 { T::one() } else { -T::one() };
    let cutoff = resolved_order(&start.system, T::lit(MONITOR_FLOOR));
    let reference = monitored_norms(&start.system, &cfg.sobolev_orders, cutoff);

    let mut records = vec![ContinuationRecord { sobolev: reference.clone(), ..start.clone() }];
    let mut current = start.system.clone();
    let mut step = cfg.initial_step;
    let mut failures = 0;
    let mut attempts = 0;
    let stop_reason = loop {
        if records.len() >= cfg.max_steps {
            break StopReason::MaxSteps;
        }
        if step < cfg.min_step {
            break StopReason::StepUnderflow;
        }
        let phase = match PhaseCondition::anchored_at(&current) {
            Ok(p) => p,
            Err(_) => break StopReason::SolverHardFailure,
        };
        let rho = current.rho + sign * step;
        let guess = CircleSystem { rho, circles: current.circles.clone() };
        attempts += 1;
        let accepted = match newton_solve(spec, &guess, &phase, &cfg.newton) {
            Ok(sol) if sol.report.converged && sol.report.final_defect <= cfg.record_tol => Some(sol.system),
            Ok(_)
            | Err(
                Error::NoConvergence { .. } | Error::Divergence { .. } | Error::UnfoldingNonzero { .. } | Error::Singular { .. },
            ) => None,
            Err(_) => break StopReason::SolverHardFailure,
        };
        match accepted {
            Some(system) => {
                failures = 0;
                let record = ContinuationRecord::new(spec, system, &cfg.sobolev_orders, cutoff);
                let stop = blown_up(&reference, &record.sobolev, cfg.blowup_factor);
                current = record.system.clone();
                records.push(record);
                if stop {
                    break StopReason::SobolevBlowup;
                }
            }
            None => {
                failures += 1;
                step *= T::lit(0.5);
                if failures >= FAILURES_BEFORE_GROWTH {
                    failures = 0;
                    let n = current.order();
                    if n < cfg.n_max {
                        current = current.resized((2 * n).min(cfg.n_max));
                    }
                }
            }
        }
    };
    Ok(FamilyResult { records, stop_reason, attempts })
}

/// Seed for the next family, found around an elliptic periodic orbit.
#[derive(Clone, Debug)]
pub struct Restart<T> {
    pub orbit: PeriodicOrbit<T>,
    pub rotation_angle: T,
    /// Offset used, as a fraction of the distance to the last circle.
    pub offset_fraction: T,
    pub config: RecipeConfig<T>,
}

/// Locates an elliptic periodic orbit from `guess` and seeds a recipe near it.
///
/// The seed moves from the orbit point closest to the last circle of `last`
/// toward that circle by `offset_fraction` of the distance. While the seed
/// orbit does not classify as quasiperiodic the offset is halved, a few times
/// at most. Component centers are the orbit points.
pub fn restart_next_family<T: Real>(
    last: &CircleSystem<T>,
    spec: &MapSpec<T>,
    guess: Point2<T>,
    period: usize,
    offset_fraction: T,
) -> Result<Restart<T>> {
    if !(offset_fraction > T::zero() && offset_fraction < T::one()) {
        return Err(Error::InvalidArgument("offset_fraction must lie in (0, 1)".into()));
    }
    let orbit = find_periodic_orbit(spec, guess, period, T::lit(PERIODIC_TOL))?;
    let angle = match stability_type(&orbit) {
        Stability::Elliptic(a) => a,
        _ => {
            let m = orbit.monodromy();
            return Err(Error::NotElliptic { trace: (m[0][0] + m[1][1]).to_f64().unwrap_or(f64::NAN) });
        }
    };
    let curve = sample_curves(last, NEAREST_SAMPLES);
    let (mut best, mut best_dist, mut target) = (0, T::infinity(), orbit.points[0]);
    for (i, p) in orbit.points.iter().enumerate() {
        for q in &curve {
            let dist = (*q - *p).norm();
            if dist < best_dist {
                best = i;
                best_dist = dist;
                target = *q;
            }
        }
    }
    let base = orbit.points[best];
    let centers: Vec<_> = (0..period).map(|j| orbit.points[(best + j) % period]).collect();
    let mut fraction = offset_fraction;
    let mut spread = f64::NAN;
    for _ in 0..=OFFSET_HALVINGS {
        let mut config = RecipeConfig::new(*spec, base + (target - base) * fraction, period);
        config.centers = Some(centers.clone());
        match classify_seed(&config)? {
            Classification::Quasiperiodic(_) => {
                return Ok(Restart { orbit, rotation_angle: angle, offset_fraction: fraction, config });
            }
            Classification::NonConvergent(est) => spread = est.spread.to_f64().unwrap_or(f64::NAN),
        }
        fraction *= T::lit(0.5);
    }
    Err(Error::NotQuasiperiodic { spread })
}

fn sample_curves<T: Real>(system: &CircleSystem<T>, samples: usize) -> Vec<Point2<T>> {
    let mut out = Vec::with_capacity(samples * system.d());
    for k in &system.circles {
        for j in 0..samples {
            let theta = T::from_usize_lossy(j) / T::from_usize_lossy(samples);
            if let Ok(p) = k.eval(theta) {
                out.push(p);
            }
        }
    }
    out
}
