//! Quasistatic dynamical systems: triangular arrays of circle maps, their
//! ergodic functionals, SRB measures and the statistics used to test the
//! convergence theorems numerically.
//!
//! Numeric types are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`. Ensemble sampling is `f64` only.

// `!(x >= 0)` style guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circle;
pub mod curve;
pub mod error;
pub mod maps;
pub mod observable;
pub mod orbit;
pub mod sampling;
pub mod scalar;
pub mod scheme;
pub mod spectral;
pub mod srb;
pub mod statistics;
pub mod ulam;
pub mod zeta;

pub use circle::{circle_distance, reduce_mod1, CirclePoint};
pub use curve::{array_rate_check, loglog_slope, CurvePiece, CurveSpec, PowerLaw, RateTable};
pub use error::{QdsError, Result};
pub use maps::{c1_distance, AdmissibilityReport, C1Distance, ExpandingMapParams, LambdaAstar};
pub use observable::Observable;
pub use orbit::{evolve_orbit, observable_sequence, OrbitStream};
pub use sampling::{Ensemble, Sampler};
pub use scalar::Real;
pub use scheme::{ArrayMode, TriangularArrayScheme};
pub use srb::{pushforward_expectations, zeta_curve, SrbTable, UlamSettings, ZetaCurve};
pub use statistics::EnsembleEstimate;
pub use ulam::{build_ulam, srb_density, stationary_density, InvariantDensity, UlamOperator};
pub use zeta::{sup_distance, zeta_path, ErgodicPath, SupDistance, TGrid};

pub type Point = CirclePoint<f64>;
pub type Map = ExpandingMapParams<f64>;
pub type Bounds = LambdaAstar<f64>;
pub type Curve = CurveSpec<f64>;
pub type Scheme = TriangularArrayScheme<f64>;
pub type Obs = Observable<f64>;
pub type Path = ErgodicPath<f64>;
pub type Grid = TGrid<f64>;
pub type Ulam = UlamOperator<f64>;
pub type Density = InvariantDensity<f64>;
pub type Zeta = ZetaCurve<f64>;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
