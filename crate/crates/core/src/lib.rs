//! Stability switches of planar and triadic linear systems with one common
//! delay: characteristic quasi-polynomials, analytic switch enumeration, an
//! argument-principle root counter and a method-of-steps integrator.

pub mod charpoly;
pub mod cli;
pub mod model;
pub mod poly;
pub mod sim;
pub mod spectral;
pub mod switch_analysis;

pub use charpoly::{quasi_polynomial, ExponentialForm, QuasiPolynomial};
pub use model::{
    build_system, classify_baseline, homogenize, BaselineStability, BaselineVerdict, DelayPlacement, DelaySystem,
    GoalModel, InteractionMatrix, ModelError,
};
pub use switch_analysis::{switch_report, SwitchError, SwitchReport};
