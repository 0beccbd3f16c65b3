//! Outage capacity and average symbol error probability of underlay
//! cognitive two-way amplify-and-forward relay networks over Nakagami-m
//! fading, for a single relay and for best-relay selection.
//!
//! The numerical core is generic over the scalar type (`f32` or `f64`);
//! the aliases below fix it to `f64`.

// `!(x > 0)` rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod num;
pub mod quadrature;
pub mod specfun;
pub mod model;
pub mod analytic;
pub mod montecarlo;
pub mod oracle;
pub mod config;
pub mod sweep;
pub mod selfcheck;

pub use error::{Error, Result};
pub use num::Real;

pub type Link = model::FadingLink<f64>;
pub type Relay = model::RelayLinks<f64>;
pub type Powers = model::PowerProfile<f64>;
pub type Network = model::NetworkScenario<f64>;
pub type Modulation = model::ModulationSpec<f64>;
pub type PrimaryInputs = analytic::PrimaryOutageInputs<f64>;
pub type SecondaryInputs = analytic::SecondaryCdfInputs<f64>;
pub type Quadrature = quadrature::QuadratureSpec<f64>;
