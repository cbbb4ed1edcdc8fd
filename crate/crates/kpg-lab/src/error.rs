//! Error type for the experiment tool, carrying the process exit code.

use thiserror::Error;

/// Anything that can stop a command, tagged by whose fault it is.
#[derive(Debug, Error)]
pub enum LabError {
    /// Bad configuration, arguments, or input files.
    #[error("{0}")]
    Config(String),
    /// File system trouble while reading or writing artifacts.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// Numeric failure at runtime (divergence into non-finite values,
    /// singular systems, degenerate geometry).
    #[error("{0}")]
    Numeric(String),
}

impl LabError {
    /// Exit code contract: 2 for input problems, 3 for numeric runtime
    /// failures (0 and 1 are reserved for pass/fail outcomes).
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) | LabError::Io { .. } => 2,
            LabError::Numeric(_) => 3,
        }
    }

    /// Attach a path to an I/O error.
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        LabError::Io { path: path.display().to_string(), source }
    }
}

impl From<kpg_core::Error> for LabError {
    fn from(err: kpg_core::Error) -> Self {
        match err {
            kpg_core::Error::InvalidInput(_) | kpg_core::Error::DimensionMismatch(_) => {
                LabError::Config(err.to_string())
            }
            kpg_core::Error::Numeric(_) | kpg_core::Error::DegenerateGeometry(_) => {
                LabError::Numeric(err.to_string())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(LabError::Config("bad".into()).exit_code(), 2);
        assert_eq!(LabError::Numeric("nan".into()).exit_code(), 3);
        let io = LabError::io(
            std::path::Path::new("x.json"),
            std::io::Error::new(std::io::ErrorKind::NotFound, "missing"),
        );
        assert_eq!(io.exit_code(), 2);
    }

    #[test]
    fn core_errors_map_to_the_right_codes() {
        let input: LabError = kpg_core::Error::InvalidInput("k".into()).into();
        assert_eq!(input.exit_code(), 2);
        let numeric: LabError = kpg_core::Error::Numeric("overflow".into()).into();
        assert_eq!(numeric.exit_code(), 3);
        let degenerate: LabError = kpg_core::Error::DegenerateGeometry("landing".into()).into();
        assert_eq!(degenerate.exit_code(), 3);
    }
}
