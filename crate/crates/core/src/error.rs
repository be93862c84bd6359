use alloc::string::String;

/// Errors raised anywhere in the kernel.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("syntax error at position {position}: unexpected {token}")]
    Syntax { position: usize, token: String },

    #[error("unknown identifier `{name}`")]
    UnknownIdentifier { name: String },

    #[error("exponent at position {position} must be a numeric constant")]
    VariableExponent { position: usize },

    #[error("domain error in {op}: {node}")]
    Domain { op: &'static str, node: String },

    #[error("singular chart point: |sin({coordinate})| = {value:e}")]
    SingularChartPoint { coordinate: &'static str, value: f64 },

    #[error("expected {expected} integrals (including h0 = 1), got {found}")]
    WrongIntegralCount { expected: usize, found: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("time step must be positive and finite, got {dt}")]
    InvalidStep { dt: f64 },

    #[error("factor {factor} does not divide {n_steps} steps")]
    IndivisibleFactor { n_steps: usize, factor: usize },

    #[error("midpoint iteration did not converge after {iterations} iterations (residual {residual:e})")]
    MidpointDivergence { iterations: usize, residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
