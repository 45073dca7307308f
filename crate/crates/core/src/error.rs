use thiserror::Error;

/// Unified error type for all toolkit operations.
///
/// The variants mirror the failure classes the CLI maps to exit codes:
/// domain/precondition problems are usage errors, `Resource` is a resource
/// error, and `Indeterminate` asks the caller to raise the working precision.
#[derive(Debug, Error)]
pub enum Error {
    /// An input fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A stated precondition (e.g. a Lipschitz bound vs. expansion rate) failed.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A configured resource cap (enumeration size, tiling cells) was exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// The tracked rounding error is too large to decide a predicate; retry
    /// with more precision bits.
    #[error("indeterminate at current precision: {0}")]
    Indeterminate(String),

    /// The operation is defined but deliberately unsupported for these inputs.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
