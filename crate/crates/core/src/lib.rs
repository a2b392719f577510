//! Quasiperiodic invariant circles of area-preserving planar maps.
//!
//! Orbit data is turned into rotation numbers and Fourier coefficients with
//! weighted Birkhoff averages, then refined by Newton's method on the
//! invariance equation `F(K(theta)) = K(theta + rho)` in coefficient space,
//! for single circles and for period-`d` systems of circles.
//!
//! The numerics are generic over the scalar type (`f32` or `f64`); the
//! aliases below fix `f64`.

pub mod birkhoff;
pub mod continuation;
pub mod error;
pub mod fourier;
pub mod linalg;
pub mod maps;
pub mod projection;
pub mod recipe;
pub mod scalar;
pub mod solver;

pub use birkhoff::{classify_orbit, rotation_number, Classification, RotationEstimate};
pub use continuation::{continue_family, restart_next_family, ContinuationConfig, ContinuationRecord, FamilyResult, StopReason};
pub use error::{Error, Result};
pub use fourier::{defect, CoeffSeq, FourierCircle};
pub use maps::{eval_map, find_periodic_orbit, iterate_orbit, stability_type, MapFamily, MapSpec, OrbitSegment, Point2, Stability};
pub use recipe::{run_recipe, RecipeConfig, RecipeResult};
pub use scalar::Real;
pub use solver::{newton_solve, CircleSystem, NewtonOptions, PhaseCondition, ResidualForm, SolveReport, Solution};

pub type Point = Point2<f64>;
pub type Map = MapSpec<f64>;
pub type Circle = FourierCircle<f64>;
pub type Coefficients = CoeffSeq<f64>;
pub type System = CircleSystem<f64>;
pub type Recipe = RecipeConfig<f64>;
pub type Continuation = ContinuationConfig<f64>;
pub type Record = ContinuationRecord<f64>;
pub type Family = FamilyResult<f64>;
