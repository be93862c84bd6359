//! Contact charts, Hamiltonian vector fields, the Jacobi bracket and
//! complete-integrability checks.

mod bracket;
mod chart;
mod sampling;
mod system;

pub use bracket::{
    bracket_expr, check_integrability, jacobi_bracket, reeb_derivative, weak_leibniz_diagnostic,
    IntegrabilityReport, LeibnizDiagnostic, PairBracket, INDEPENDENCE_THRESHOLD,
};
pub use chart::{Chart, ChartKind, SINGULAR_SIN_THRESHOLD};
pub use sampling::sample_states;
pub use system::{CompiledFunction, HamiltonianSystem};
