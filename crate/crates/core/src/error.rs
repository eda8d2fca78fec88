//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A required piece of configuration is missing (e.g. edge lengths).
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument is outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller-guaranteed precondition does not hold. `name` identifies the
    /// violated inequality.
    #[error("contract violation [{name}]: {detail}")]
    Contract { name: String, detail: String },

    /// An internal invariant that the algorithm's analysis guarantees was
    /// found false at runtime. Indicates a bug (or a tolerance problem), not
    /// bad input.
    #[error("invariant violation [{name}]: {detail} (context: {context})")]
    Invariant {
        name: String,
        detail: String,
        context: String,
    },

    /// The LP/MWU solver failed or did not converge.
    #[error("solver error: {0}")]
    Solver(String),

    /// The MWU solver hit its iteration cap before certifying the target
    /// accuracy. The best primal/dual pair found so far is attached.
    #[error("solver did not converge: {detail}")]
    SolverNoConvergence {
        detail: String,
        best: Box<(crate::flow::FlowCertificate, crate::flow::DualLengths)>,
    },

    /// The requested flow problem is infeasible (demand across disconnected
    /// components).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Instance too large for an exact/enumerative routine.
    #[error("size error: {0}")]
    Size(String),

    /// Text-format parse failure with a 1-based line number.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn contract(name: &str, detail: impl Into<String>) -> Self {
        Error::Contract {
            name: name.to_string(),
            detail: detail.into(),
        }
    }

    pub fn invariant(name: &str, detail: impl Into<String>, context: impl Into<String>) -> Self {
        Error::Invariant {
            name: name.to_string(),
            detail: detail.into(),
            context: context.into(),
        }
    }
}
