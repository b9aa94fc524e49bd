use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("{what}: {detail}")]
    Domain { what: &'static str, detail: String },
    /// The Prüfer phase lost its branch: the counting identity failed at `index`.
    #[error("phase branch check failed at n={index} (phase count {phase_count}, sturm count {sturm_count})")]
    Branch {
        index: u64,
        phase_count: i64,
        sturm_count: i64,
    },
    /// A trajectory or ledger was paired with data from a different noise stream.
    #[error("stream mismatch: {0}")]
    StreamMismatch(String),
    /// A path evaluated to a degenerate value (both components zero).
    #[error("degenerate value: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(what: &'static str, detail: impl Into<String>) -> Result<T> {
    Err(Error::Domain {
        what,
        detail: detail.into(),
    })
}
