//! Numerical certificates for the stochastic flow: pathwise contact defect,
//! conformal factor against a closed form, tangent flow against finite
//! differences, strong convergence orders and ensemble statistics.

mod convergence;
mod defect;
mod ensemble;

pub use convergence::{convergence_study, ConvergenceReport, ErrorMeasure};
pub use defect::{
    conformal_factor_check, conformal_factor_deviation, contact_defect, finite_difference_jacobian,
    relative_frobenius_error, ContactDefectReport,
};
pub use ensemble::{monte_carlo, sample_observable, EnsembleSpec, EnsembleStats};
