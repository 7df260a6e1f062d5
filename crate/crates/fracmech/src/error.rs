//! Crate-wide error type and result alias.

/// All failure modes surfaced by the library and the CLI.
///
/// The CLI maps variants onto its exit-code contract: input problems
/// (`Domain`, `Usage`, `Syntax`, `Undeclared`, `Io`) exit with 2, numerical
/// non-convergence (`Accuracy`) with 3.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A mathematical precondition was violated (bad order, degenerate grid,
    /// invalid exponent, and so on).
    #[error("domain error: {0}")]
    Domain(String),

    /// The caller combined otherwise valid objects incorrectly, for example
    /// applying an operator to samples from a different grid.
    #[error("usage error: {0}")]
    Usage(String),

    /// Expression text failed to parse; `offset` is a byte position into the
    /// source string.
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    /// Expression text referenced a variable outside the declared set.
    #[error("undeclared variable `{name}` at offset {offset}")]
    Undeclared { name: String, offset: usize },

    /// Numeric evaluation failed; `node` is the printed subexpression that
    /// produced the failure.
    #[error("evaluation error in `{node}`: {reason}")]
    Eval { node: String, reason: String },

    /// An adaptive numerical routine exhausted its refinement budget. The
    /// best estimate and its error bound are carried for diagnostics.
    #[error("accuracy not reached: best estimate {best:e}, error bound {bound:e}")]
    Accuracy { best: f64, bound: f64 },

    /// File or serialization failure in the CLI layer.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
