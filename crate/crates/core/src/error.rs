use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A value fell outside the domain of an elementary function or of a
    /// metric (e.g. `log` of a non-positive jet, a point outside the
    /// admissible region).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("jet space mismatch: ({0}, {1}) vs ({2}, {3})")]
    SpaceMismatch(usize, usize, usize, usize),

    #[error("derivative order exceeds jet truncation: {0}")]
    OrderExceeded(String),

    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },

    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),

    #[error("singular metric (determinant {det:e})")]
    SingularMetric { det: f64 },

    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("structure equation `{equation}` violated at ({x1}, {x2}): residual {residual:e}")]
    StructureViolation {
        equation: &'static str,
        x1: f64,
        x2: f64,
        residual: f64,
    },

    #[error("degenerate one-form: |b|^2 = {0:e}")]
    DegenerateForm(f64),

    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
