use thiserror::Error;

/// Exit status for a run whose checks all passed.
pub const EXIT_PASS: i32 = 0;
/// Exit status when at least one measured quantity misses its tolerance.
pub const EXIT_TOLERANCE: i32 = 1;
/// Exit status for configuration, usage and setup errors.
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("numerical setup failed: {0}")]
    Numerics(#[from] greenlab::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        EXIT_CONFIG
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
