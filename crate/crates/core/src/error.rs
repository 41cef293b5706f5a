use std::path::PathBuf;

/// Errors produced by this crate.
///
/// The CLI maps these onto exit codes, so variants are grouped by *kind of
/// failure* rather than by module: bad caller input ([`Error::Parameter`]),
/// inconsistent grid shapes ([`Error::Dimension`]), statistics that cannot be
/// formed ([`Error::DegenerateStatistics`]), and file problems
/// ([`Error::Format`], [`Error::Io`]).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Grid shapes or ROI bounds are inconsistent with each other.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A caller-supplied value is outside its documented domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A statistic is undefined for this input (zero variance, empty
    /// in-range support, all-degenerate denominators, ...).
    #[error("degenerate statistics: {0}")]
    DegenerateStatistics(String),

    /// A file did not match its declared binary or text layout.
    #[error("format error in {}: {reason} (byte offset {offset})", path.display())]
    Format {
        /// File that failed to parse or validate.
        path: PathBuf,
        /// Byte offset of the first offending datum.
        offset: u64,
        /// What was wrong there.
        reason: String,
    },

    /// An underlying I/O operation failed.
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        /// File involved in the failed operation.
        path: PathBuf,
        /// The OS-level error.
        #[source]
        source: std::io::Error,
    },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
