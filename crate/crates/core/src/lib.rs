//! The Interpolating Family (IF) of size distributions.
//!
//! A five-parameter family on `[x0, ∞)` that interpolates between power laws
//! (Pareto-type tails) and power laws with exponential cut-off
//! (Weibull-type tails). The crate provides:
//!
//! * the distribution kernel ([`IfParams`]): density, cdf, survival, hazard,
//!   quantiles and inverse-transform sampling;
//! * closed-form and numerical moments and modes ([`analytic`]);
//! * the catalog of named special cases ([`family`]);
//! * censored maximum-likelihood fitting, information criteria and
//!   likelihood-ratio submodel tests ([`fit`]);
//! * the special functions all of the above rely on ([`special`]).
//!
//! The kernel, the special functions and the analytic layer are generic over
//! [`Scalar`] (`f32` or `f64`). Fitting works in `f64`; the `*64` aliases
//! below name the concrete types used there.

pub mod analytic;
pub mod dist;
pub mod error;
pub mod family;
pub mod fit;
pub mod quadrature;
pub mod scalar;
pub mod special;

mod optim;

pub use analytic::{ModeKind, ModeResult, MomentResult};
pub use dist::{p_exponential, IfParams, PRegime, Subfamily};
pub use error::{Error, Result};
pub use family::{Constraint, ModelKind, NamedModel};
pub use fit::{FitConfig, FitResult, LrtResult, Observation};
pub use scalar::Scalar;
pub use special::ChiSquared;

/// Double-precision parameters.
pub type IfParams64 = IfParams<f64>;
/// Single-precision parameters.
pub type IfParams32 = IfParams<f32>;
/// Double-precision observation.
pub type Observation64 = Observation<f64>;
/// Double-precision moment summary.
pub type MomentResult64 = MomentResult<f64>;
/// Double-precision mode summary.
pub type ModeResult64 = ModeResult<f64>;
