//! Non-parametric estimation of `E[g(X)]` from judgment post-stratified
//! samples.
//!
//! The crate covers the whole pipeline: population models ([`distcat`]),
//! order-statistic stratum moments ([`strata`]), exact weight-scheme
//! coefficients ([`coeffs`]), sample generators ([`design`]), the estimator
//! family ([`estimators`]), efficiency analytics and the optimal class-size
//! search ([`efficiency`], [`tables`]) and a Monte Carlo oracle
//! ([`mcverify`]).

mod accum;
pub mod coeffs;
pub mod design;
pub mod distcat;
pub mod efficiency;
pub mod error;
pub mod estimators;
pub mod mcverify;
mod quadrature;
pub mod rng;
pub mod strata;
pub mod tables;

pub use design::{draw_brss, draw_jps, draw_srs, BrssSample, JpsSample, Observation, Ranker};
pub use distcat::{DistributionSpec, GFunction};
pub use error::{Error, Result};
pub use coeffs::{coefficient_set, CoefficientSet, Exactness, WeightScheme};
pub use strata::{stratum_moments, StratumMoments};
