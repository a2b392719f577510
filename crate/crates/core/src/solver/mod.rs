//! Newton iteration for the unfolded conjugacy equation in Fourier space.
//!
//! A period-`d` system of circles `K_1, ..., K_d` with rotation number `rho`
//! solves
//!
//! ```text
//! F(K_j(theta)) - K_{j+1}(theta)                 = 0,   j < d
//! F(K_d(theta)) - (1 + beta) K_1(theta + d rho)  = 0
//! <pbar - K_1(0), eta>                           = 0
//! ```
//!
//! with the unfolding parameter `beta`, which vanishes at every solution for
//! area-preserving `F`. The map enters through a [`ComponentModel`]: the
//! coefficient-space form of `F` on one component, possibly with auxiliary
//! unknowns and equations of its own.

mod quadratic;
mod recast;
mod sampled;

use num_complex::Complex;
use num_traits::Zero;

pub use quadratic::QuadraticModel;
pub use recast::RecastModel;
pub use sampled::SampledModel;

use crate::error::{Error, Result};
use crate::fourier::{enclosed_area, pushforward_area, system_defect, CoeffSeq, FourierCircle};
use crate::linalg::{BlockJacobian, CMatrix};
use crate::maps::{MapFamily, MapSpec, PlanarMap, Point2};
use crate::scalar::Real;

/// Line through `pbar` that `K_1(0)` is pinned to; `eta` is its unit normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseCondition<T> {
    pub pbar: Point2<T>,
    pub eta: Point2<T>,
}

impl<T: Real> PhaseCondition<T> {
    pub fn new(pbar: Point2<T>, eta: Point2<T>) -> Result<Self> {
        let r = eta.norm();
        if !(r > T::zero()) || !r.is_finite() {
            return Err(Error::InvalidArgument("phase normal must be a nonzero finite vector".into()));
        }
        Ok(Self { pbar, eta: eta * (T::one() / r) })
    }

    /// The radial line through `pbar` as seen from `center`.
    pub fn radial(pbar: Point2<T>, center: Point2<T>) -> Result<Self> {
        Self::new(pbar, (pbar - center).perp())
    }

    /// Re-anchors at `K_1(0)` of a converged system.
    pub fn anchored_at(system: &CircleSystem<T>) -> Result<Self> {
        let k = &system.circles[0];
        Self::radial(k.origin_point(), k.center())
    }

    pub fn value(&self, k0: Point2<T>) -> T {
        (self.pbar - k0).dot(self.eta)
    }
}

/// `d` circles sharing a rotation number.
///
/// `rho` is the rotation number per application of the map, so the closing
/// equation rotates by `d * rho`.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleSystem<T> {
    pub rho: T,
    pub circles: Vec<FourierCircle<T>>,
}

impl<T: Real> CircleSystem<T> {
    pub fn new(rho: T, circles: Vec<FourierCircle<T>>) -> Result<Self> {
        let Some(first) = circles.first() else {
            return Err(Error::InvalidArgument("a circle system needs at least one circle".into()));
        };
        let n = first.order();
        if let Some(bad) = circles.iter().find(|c| c.order() != n) {
            return Err(Error::LengthMismatch { expected: 2 * n + 1, actual: 2 * bad.order() + 1 });
        }
        Ok(Self { rho, circles })
    }

    pub fn single(rho: T, circle: FourierCircle<T>) -> Self {
        Self { rho, circles: vec![circle] }
    }

    pub fn d(&self) -> usize {
        self.circles.len()
    }

    pub fn order(&self) -> usize {
        self.circles[0].order()
    }

    /// Rotation applied on the closing link, `frac(d rho)`.
    pub fn closing_rotation(&self) -> T {
        (T::from_usize_lossy(self.d()) * self.rho).frac1()
    }

    pub fn scale(&self) -> T {
        self.circles.iter().fold(T::zero(), |m, c| m.max(c.scale()))
    }

    pub fn symmetry_residual(&self) -> T {
        self.circles.iter().fold(T::zero(), |m, c| m.max(c.symmetry_residual()))
    }

    pub fn resized(&self, n: usize) -> Self {
        Self { rho: self.rho, circles: self.circles.iter().map(|c| c.resized(n)).collect() }
    }

    /// Sup-norm conjugacy defect over the shooting equations.
    pub fn defect<M: PlanarMap<T> + ?Sized>(&self, map: &M) -> T {
        system_defect(&self.circles, map, self.closing_rotation())
    }
}

/// Unfolding parameters at the end of a solve. `gamma` and `omega` hold one
/// entry per component circle for the trigonometric recast and are empty
/// otherwise.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UnfoldingState<T> {
    pub beta: T,
    pub gamma: Vec<T>,
    pub omega: Vec<T>,
}

impl<T: Real> UnfoldingState<T> {
    pub fn max_abs(&self) -> T {
        self.gamma.iter().chain(&self.omega).fold(self.beta.abs(), |m, v| m.max(v.abs()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopKind {
    /// Defect fell below the tolerance.
    Tolerance,
    /// Defect below the stagnation floor stopped improving.
    Stagnation,
    MaxIterations,
}

#[derive(Clone, Debug)]
pub struct SolveReport<T> {
    pub converged: bool,
    pub stop: StopKind,
    pub iterations: usize,
    /// Point-space defect before the first step and after every step.
    pub defect_history: Vec<T>,
    pub final_defect: T,
    /// Max-norm of the coefficient-space residual at the returned state.
    pub coefficient_residual: T,
    pub unfolding: UnfoldingState<T>,
    /// Largest imaginary part discarded from a scalar unknown.
    pub scalar_imag: T,
    /// Set when some elimination saw a pivot ratio below the warning level.
    pub condition_warning: bool,
}

#[derive(Clone, Debug)]
pub struct Solution<T> {
    pub system: CircleSystem<T>,
    pub report: SolveReport<T>,
}

/// Which coefficient-space form of the map to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ResidualForm {
    /// Quadratic convolution form for polynomial maps, trigonometric recast
    /// for the standard map, sampled form otherwise.
    #[default]
    Auto,
    Quadratic,
    Recast,
    Sampled,
}

#[derive(Clone, Debug)]
pub struct NewtonOptions<T> {
    /// Absolute defect tolerance; `None` means `5e-15 (1 + coefficient scale)`.
    pub tol: Option<T>,
    pub max_iter: usize,
    pub stagnation_factor: T,
    /// Stagnation is only declared below this defect.
    pub stagnation_floor: T,
    pub divergence_factor: T,
    /// Bound on the unfolding parameters of a converged solve.
    pub unfolding_tol: T,
    pub form: ResidualForm,
}

impl<T: Real> Default for NewtonOptions<T> {
    fn default() -> Self {
        Self {
            tol: None,
            max_iter: 20,
            stagnation_factor: T::lit(0.5),
            stagnation_floor: T::lit(1e-9),
            divergence_factor: T::lit(10.0),
            unfolding_tol: T::lit(1e-10),
            form: ResidualForm::Auto,
        }
    }
}

impl<T: Real> NewtonOptions<T> {
    pub fn tolerance_for(&self, scale: T) -> T {
        self.tol.unwrap_or_else(|| T::lit(5e-15) * (T::one() + scale))
    }
}

/// Coefficient-space form of the map on one component circle.
///
/// A component vector starts with `a` and `b` (each `2N + 1` coefficients)
/// and may carry auxiliary unknowns after them. [`ComponentModel::rows`]
/// returns one residual entry per unknown; the first `2(2N + 1)` entries are
/// the coefficients of `F(K)`, from which the driver subtracts the shooting
/// target.
pub trait ComponentModel<T: Real> {
    fn order(&self) -> usize;
    /// Unknowns per component.
    fn width(&self) -> usize;
    /// Builds a component vector from a circle, initializing auxiliaries.
    fn init(&self, circle: &FourierCircle<T>) -> Vec<Complex<T>>;
    fn rows(&self, comp: &[Complex<T>]) -> Vec<Complex<T>>;
    fn rows_jacobian(&self, comp: &[Complex<T>]) -> CMatrix<T>;
    /// Restores conjugate symmetry and realness of auxiliary scalars, returning
    /// the largest discarded imaginary part of a scalar.
    fn symmetrize(&self, comp: &mut [Complex<T>]) -> T;
    /// Auxiliary unfolding scalars `(gamma, omega)`, if any.
    fn unfolding(&self, _comp: &[Complex<T>]) -> Option<(T, T)> {
        None
    }
}

pub(crate) fn mode_count(n: usize) -> usize {
    2 * n + 1
}

pub(crate) fn seq_from<T: Real>(c: &[Complex<T>]) -> CoeffSeq<T> {
    CoeffSeq::from_vec(c.to_vec()).expect("odd-length component slice")
}

/// Multiple-shooting system assembled from a component model.
pub struct ShootingSystem<T: Real, C> {
    pub model: C,
    pub d: usize,
    pub rho: T,
    pub phase: PhaseCondition<T>,
    rot: Vec<Complex<T>>,
}

impl<T: Real, C: ComponentModel<T>> ShootingSystem<T, C> {
    pub fn new(model: C, d: usize, rho: T, phase: PhaseCondition<T>) -> Self {
        let n = model.order() as i64;
        let sigma = (T::from_usize_lossy(d) * rho).frac1();
        let rot = (-n..=n).map(|k| crate::scalar::cis_turns((T::from_i64_lossy(k) * sigma).frac1())).collect();
        Self { model, d, rho, phase, rot }
    }

    pub fn width(&self) -> usize {
        self.model.width()
    }

    pub fn dim(&self) -> usize {
        self.d * self.width() + 1
    }

    fn comp<'a>(&self, x: &'a [Complex<T>], j: usize) -> &'a [Complex<T>] {
        let m = self.width();
        &x[j * m..(j + 1) * m]
    }

    /// State vector `[component 0, ..., component d - 1, beta]`.
    pub fn pack(&self, system: &CircleSystem<T>) -> Result<Vec<Complex<T>>> {
        if system.d() != self.d {
            return Err(Error::LengthMismatch { expected: self.d, actual: system.d() });
        }
        if system.order() != self.model.order() {
            return Err(Error::LengthMismatch { expected: mode_count(self.model.order()), actual: mode_count(system.order()) });
        }
        let mut x = Vec::with_capacity(self.dim());
        for c in &system.circles {
            x.extend(self.model.init(c));
        }
        x.push(Complex::zero());
        Ok(x)
    }

    pub fn circles(&self, x: &[Complex<T>]) -> Vec<FourierCircle<T>> {
        let l = mode_count(self.model.order());
        (0..self.d)
            .map(|j| {
                let c = self.comp(x, j);
                FourierCircle { a: seq_from(&c[..l]), b: seq_from(&c[l..2 * l]) }
            })
            .collect()
    }

    pub fn system(&self, x: &[Complex<T>]) -> CircleSystem<T> {
        CircleSystem { rho: self.rho, circles: self.circles(x) }
    }

    pub fn beta(&self, x: &[Complex<T>]) -> Complex<T> {
        x[self.d * self.width()]
    }

    pub fn unfolding(&self, x: &[Complex<T>]) -> UnfoldingState<T> {
        let mut u = UnfoldingState { beta: self.beta(x).re, gamma: Vec::new(), omega: Vec::new() };
        for j in 0..self.d {
            if let Some((g, w)) = self.model.unfolding(self.comp(x, j)) {
                u.gamma.push(g);
                u.omega.push(w);
            }
        }
        u
    }

    pub fn residual(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let m = self.width();
        let l = mode_count(self.model.order());
        let mut r = Vec::with_capacity(self.dim());
        let c0 = self.comp(x, 0);
        let k0x: Complex<T> = c0[..l].iter().copied().sum();
        let k0y: Complex<T> = c0[l..2 * l].iter().copied().sum();
        let p = self.phase;
        r.push((Complex::from(p.pbar.x) - k0x) * p.eta.x + (Complex::from(p.pbar.y) - k0y) * p.eta.y);
        let one_beta = Complex::from(T::one()) + self.beta(x);
        for j in 0..self.d {
            let mut rows = self.model.rows(self.comp(x, j));
            debug_assert_eq!(rows.len(), m);
            if j + 1 < self.d {
                let nx = self.comp(x, j + 1);
                for i in 0..2 * l {
                    rows[i] -= nx[i];
                }
            } else {
                for i in 0..2 * l {
                    rows[i] -= one_beta * self.rot[i % l] * c0[i];
                }
            }
            r.extend(rows);
        }
        r
    }

    pub fn jacobian(&self, x: &[Complex<T>]) -> BlockJacobian<T> {
        let m = self.width();
        let l = mode_count(self.model.order());
        let mut jac = BlockJacobian::new(self.d, m);
        for i in 0..l {
            jac.phase[i] = Complex::from(-self.phase.eta.x);
            jac.phase[l + i] = Complex::from(-self.phase.eta.y);
        }
        let one_beta = Complex::from(T::one()) + self.beta(x);
        let c0 = self.comp(x, 0);
        for j in 0..self.d {
            jac.diag[j] = self.model.rows_jacobian(self.comp(x, j));
            let next = &mut jac.next[j];
            for i in 0..2 * l {
                next[(i, i)] = if j + 1 < self.d { Complex::from(-T::one()) } else { -one_beta * self.rot[i % l] };
            }
        }
        for i in 0..2 * l {
            jac.scalar[i] = -self.rot[i % l] * c0[i];
        }
        jac
    }

    pub fn symmetrize(&self, x: &mut [Complex<T>]) -> T {
        let m = self.width();
        let mut imag = T::zero();
        for j in 0..self.d {
            imag = imag.max(self.model.symmetrize(&mut x[j * m..(j + 1) * m]));
        }
        let b = &mut x[self.d * m];
        imag = imag.max(b.im.abs());
        b.im = T::zero();
        imag
    }

    /// Dense Jacobian, for inspection and tests.
    pub fn assemble_jacobian(&self, x: &[Complex<T>]) -> CMatrix<T> {
        self.jacobian(x).to_dense()
    }
}

fn max_norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |m, z| m.max(z.norm()))
}

/// Runs Newton's method on a shooting system from the packed state `x`.
pub fn newton_iterate<T, C, M>(sys: &ShootingSystem<T, C>, map: &M, x: Vec<Complex<T>>, opts: &NewtonOptions<T>) -> Result<Solution<T>>
where
    T: Real,
    C: ComponentModel<T>,
    M: PlanarMap<T> + ?Sized,
{
    let mut x = x;
    let mut scalar_imag = sys.symmetrize(&mut x);
    let sigma = (T::from_usize_lossy(sys.d) * sys.rho).frac1();
    let defect_of = |x: &[Complex<T>]| system_defect(&sys.circles(x), map, sigma);

    let mut defect = defect_of(&x);
    if !defect.is_finite() {
        return Err(Error::InvalidArgument("initial defect is not finite".into()));
    }
    let tol = opts.tolerance_for(sys.system(&x).scale());
    let mut history = vec![defect];
    let mut best = (x.clone(), defect);
    let mut condition_warning = false;
    let mut stop = StopKind::MaxIterations;
    let mut iterations = 0;
    if defect <= tol {
        stop = StopKind::Tolerance;
    } else {
        for it in 1..=opts.max_iter {
            let r = sys.residual(&x);
            let rhs: Vec<_> = r.iter().map(|v| -*v).collect();
            let sol = sys.jacobian(&x).solve(&rhs)?;
            condition_warning |= sol.condition_warning();
            for (xi, dx) in x.iter_mut().zip(&sol.x) {
                *xi += *dx;
            }
            scalar_imag = scalar_imag.max(sys.symmetrize(&mut x));
            iterations = it;
            let new = defect_of(&x);
            history.push(new);
            if !new.is_finite() || new > opts.divergence_factor * defect {
                return Err(Error::Divergence {
                    from: defect.to_f64().unwrap_or(f64::NAN),
                    to: new.to_f64().unwrap_or(f64::INFINITY),
                });
            }
            if new < best.1 {
                best = (x.clone(), new);
            }
            if new <= tol {
                stop = StopKind::Tolerance;
                break;
            }
            if defect < opts.stagnation_floor && new > opts.stagnation_factor * defect {
                stop = StopKind::Stagnation;
                break;
            }
            defect = new;
        }
    }
    let (x, final_defect) = best;
    let converged = stop != StopKind::MaxIterations;
    let unfolding = sys.unfolding(&x);
    if converged {
        let bounds = [("beta", unfolding.beta)]
            .into_iter()
            .chain(unfolding.gamma.iter().map(|g| ("gamma", *g)))
            .chain(unfolding.omega.iter().map(|w| ("omega", *w)));
        for (name, v) in bounds {
            if v.abs() > opts.unfolding_tol {
                return Err(Error::UnfoldingNonzero { name, value: v.to_f64().unwrap_or(f64::NAN) });
            }
        }
    }
    let report = SolveReport {
        converged,
        stop,
        iterations,
        defect_history: history,
        final_defect,
        coefficient_residual: max_norm(&sys.residual(&x)),
        unfolding,
        scalar_imag,
        condition_warning,
    };
    Ok(Solution { system: sys.system(&x), report })
}

/// Picks the concrete residual form for a map.
pub fn resolve_form(family: MapFamily, form: ResidualForm) -> Result<ResidualForm> {
    match (form, family) {
        (ResidualForm::Auto, MapFamily::HenonAP | MapFamily::Rotation) => Ok(ResidualForm::Quadratic),
        (ResidualForm::Auto, MapFamily::Standard) => Ok(ResidualForm::Recast),
        (ResidualForm::Auto, MapFamily::Twist) => Ok(ResidualForm::Sampled),
        (ResidualForm::Quadratic, MapFamily::HenonAP | MapFamily::Rotation) => Ok(ResidualForm::Quadratic),
        (ResidualForm::Recast, MapFamily::Standard) => Ok(ResidualForm::Recast),
        (ResidualForm::Sampled, _) => Ok(ResidualForm::Sampled),
        (f, fam) => Err(Error::InvalidArgument(format!("residual form {f:?} does not apply to the {fam} map"))),
    }
}

/// Solves the system for `spec` starting from `initial`.
pub fn newton_solve<T: Real>(
    spec: &MapSpec<T>,
    initial: &CircleSystem<T>,
    phase: &PhaseCondition<T>,
    opts: &NewtonOptions<T>,
) -> Result<Solution<T>> {
    let n = initial.order();
    let d = initial.d();
    match resolve_form(spec.family, opts.form)? {
        ResidualForm::Quadratic => {
            let sys = ShootingSystem::new(QuadraticModel::for_spec(spec, n)?, d, initial.rho, *phase);
            let x = sys.pack(initial)?;
            newton_iterate(&sys, spec, x, opts)
        }
        ResidualForm::Recast => {
            let sys = ShootingSystem::new(RecastModel::for_spec(spec, n)?, d, initial.rho, *phase);
            let x = sys.pack(initial)?;
            newton_iterate(&sys, spec, x, opts)
        }
        ResidualForm::Sampled | ResidualForm::Auto => {
            let sys = ShootingSystem::new(SampledModel::new(*spec, n), d, initial.rho, *phase);
            let x = sys.pack(initial)?;
            newton_iterate(&sys, spec, x, opts)
        }
    }
}

/// Coefficient-space residual of the Hénon system at `(system, beta)`.
pub fn residual_henon<T: Real>(spec: &MapSpec<T>, system: &CircleSystem<T>, beta: T, phase: &PhaseCondition<T>) -> Result<Vec<Complex<T>>> {
    if spec.family != MapFamily::HenonAP {
        return Err(Error::InvalidArgument(format!("expected the henon map, got {}", spec.family)));
    }
    let sys = ShootingSystem::new(QuadraticModel::for_spec(spec, system.order())?, system.d(), system.rho, *phase);
    let mut x = sys.pack(system)?;
    *x.last_mut().expect("state has a beta slot") = Complex::from(beta);
    Ok(sys.residual(&x))
}

/// Auxiliary sequences `s ~ sin(K_1)`, `c ~ cos(K_1)` of one recast component.
#[derive(Clone, Debug, PartialEq)]
pub struct RecastAux<T> {
    pub s: CoeffSeq<T>,
    pub c: CoeffSeq<T>,
}

/// Coefficient-space residual of the standard-map recast system.
///
/// `unfolding.gamma` and `unfolding.omega` carry one value per component.
pub fn residual_standard_recast<T: Real>(
    spec: &MapSpec<T>,
    system: &CircleSystem<T>,
    aux: &[RecastAux<T>],
    unfolding: &UnfoldingState<T>,
    phase: &PhaseCondition<T>,
) -> Result<Vec<Complex<T>>> {
    let d = system.d();
    if aux.len() != d {
        return Err(Error::LengthMismatch { expected: d, actual: aux.len() });
    }
    if unfolding.gamma.len() != d || unfolding.omega.len() != d {
        return Err(Error::LengthMismatch { expected: d, actual: unfolding.gamma.len().min(unfolding.omega.len()) });
    }
    let model = RecastModel::for_spec(spec, system.order())?;
    let sys = ShootingSystem::new(model, d, system.rho, *phase);
    let mut x = Vec::with_capacity(sys.dim());
    for (j, k) in system.circles.iter().enumerate() {
        x.extend(sys.model.pack_parts(k, &aux[j], unfolding.gamma[j], unfolding.omega[j])?);
    }
    x.push(Complex::from(unfolding.beta));
    Ok(sys.residual(&x))
}

/// Areas `(A1, A2, A3)` of `K`, of `K(. + rho)` and of `F o K`.
pub fn unfolding_diagnostics<T: Real, M: PlanarMap<T> + ?Sized>(k: &FourierCircle<T>, map: &M, rho: T) -> (T, T, T) {
    (enclosed_area(k), enclosed_area(&k.rotated(rho)), pushforward_area(k, map))
}

/// Convolution operator `v -> (u * v)` truncated to order `n`, as a matrix
/// over modes `-n..=n`.
pub fn toeplitz<T: Real>(u: &CoeffSeq<T>, n: usize) -> CMatrix<T> {
    let l = mode_count(n);
    let ni = n as i64;
    let mut t = CMatrix::zeros(l, l);
    for k in -ni..=ni {
        for j in -ni..=ni {
            t[((k + ni) as usize, (j + ni) as usize)] = u.get(k - j);
        }
    }
    t
}

#[cfg(test)]
mod tests;
