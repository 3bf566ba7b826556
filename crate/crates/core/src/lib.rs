//! The McDonald-Gompertz lifetime family: a three-shape beta-type generator
//! applied to the Gompertz law, with its nested sub-models.
//!
//! Everything numeric is generic over [`real::Real`] (`f32` or `f64`); the
//! aliases below fix the common instantiations.

pub mod base;
pub mod data;
pub mod distribution;
pub mod errata;
pub mod error;
pub mod expansions;
pub mod family;
pub mod inference;
pub mod linalg;
pub mod optimize;
pub mod orderstats;
pub mod quadrature;
pub mod real;
pub mod selection;
pub mod shape;
pub mod specfun;

pub use base::{Baseline, ExpBase, GompertzBase};
pub use data::{aarset_devices, glass_fibers};
pub use distribution::{McDonald, McExpParams, McgParams};
pub use error::{McgError, Result};
pub use expansions::{SeriesEstimate, SeriesSum, TruncationPolicy};
pub use family::{Member, ModelName, ModelSpec};
pub use inference::{fit_mle, fit_mle_with_starts, FitResult, OptimizerConfig};
pub use orderstats::OrderSpec;
pub use quadrature::QuadratureSpec;
pub use real::Real;
pub use selection::{gof_report, GofReport};
pub use shape::{HazardShape, Measure};
pub use specfun::Tolerance;

pub type Params = McgParams<f64>;
pub type Params32 = McgParams<f32>;
pub type ExpParams = McExpParams<f64>;
pub type Data = data::Dataset<f64>;
pub type Data32 = data::Dataset<f32>;
pub type Fit = FitResult<f64>;
pub type Fit32 = FitResult<f32>;
pub type Report = GofReport<f64>;
