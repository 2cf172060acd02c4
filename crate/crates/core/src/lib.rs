//! Two-target MIMO radar parameter estimation under compound-Gaussian (SIRP)
//! clutter.
//!
//! The crate covers the full chain used to study the angular spacing `Δ`
//! between a known target and an unknown one:
//!
//! * [`radar_model`]: steering vectors, noise-free responses and their
//!   parameter derivatives for colocated linear arrays.
//! * [`clutter`]: K- and t-distributed clutter synthesis (gamma /
//!   inverse-gamma texture times circular Gaussian speckle).
//! * [`estimators`]: conventional ML, iterative ML and iterative MAP
//!   estimators of `Δ` using stepwise numerical concentration.
//! * [`bounds`]: standard CRB, extended Miller-Chang, modified and hybrid
//!   Cramér-Rao bounds for `Δ`.
//! * [`arl`]: linearized model, analytical CRB, and the angular resolution
//!   limit from the Smith equation (closed form, asymptotic, exact).
//! * [`experiments`] and [`cli`]: deterministic Monte Carlo sweeps and the
//!   command-line front end.
//!
//! Core math is generic over the real scalar type (see [`Scalar`]); the
//! aliases at the crate root fix it to `f64`, which is what the experiment
//! harness uses.

pub mod arl;
pub mod bounds;
pub mod cli;
pub mod clutter;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod linalg;
pub mod observations;
pub mod radar_model;
pub mod scalar;
pub mod special;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use num_complex::Complex;

/// Dense complex matrix over the scalar `T`.
pub type CMatrix<T> = nalgebra::DMatrix<Complex<T>>;
/// Dense complex column vector over the scalar `T`.
pub type CVector<T> = nalgebra::DVector<Complex<T>>;

pub type ArrayGeometry = radar_model::ArrayGeometry<f64>;
pub type RadarScene = radar_model::RadarScene<f64>;
pub type TargetResponse = radar_model::TargetResponse<f64>;
pub type SpeckleCovariance = clutter::SpeckleCovariance<f64>;
pub type ClutterDraw = clutter::ClutterDraw<f64>;
pub type EstimatorOptions = estimators::EstimatorOptions<f64>;
pub type EstimationResult = estimators::EstimationResult<f64>;
pub type FimBlock = bounds::FimBlock<f64>;
pub type BoundsReport = bounds::BoundsReport<f64>;
pub type LinearizedModel = arl::LinearizedModel<f64>;
pub type ArlReport = arl::ArlReport<f64>;

/// Single-precision variants, mainly useful for memory-bound batch work.
pub mod f32 {
    pub type RadarScene = crate::radar_model::RadarScene<f32>;
    pub type SpeckleCovariance = crate::clutter::SpeckleCovariance<f32>;
    pub type EstimatorOptions = crate::estimators::EstimatorOptions<f32>;
    pub type EstimationResult = crate::estimators::EstimationResult<f32>;
}
