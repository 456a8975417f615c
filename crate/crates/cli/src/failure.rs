use std::path::Path;

use cylgrating::ErrorKind;

/// Every way a run can end unsuccessfully, each with its own exit code.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Io(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] cylgrating::Error),
    #[error("not converged: {0}")]
    NotConverged(String),
    #[error("{0}")]
    CheckFailed(String),
}

impl Failure {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::Io(format!("{}: {e}", path.display()))
    }

    /// Wraps a core validation error with the config section it came from.
    pub fn config_field(section: &'static str) -> impl Fn(cylgrating::Error) -> Failure {
        move |e| match e {
            cylgrating::Error::InvalidConfig { field, reason } => {
                let field = match field {
                    "theta_i" => "theta_deg",
                    "phi_i" => "phi_deg",
                    f => f,
                };
                Failure::Config(format!("{section}.{field}: {reason}"))
            }
            other => Failure::Core(other),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Io(_) | Failure::CheckFailed(_) => 1,
            Failure::Config(_) => 2,
            Failure::NotConverged(_) => 6,
            Failure::Core(e) => match e.kind() {
                ErrorKind::Config => 2,
                ErrorKind::Anomaly => 3,
                ErrorKind::Unsupported => 4,
                ErrorKind::Singular => 5,
                ErrorKind::NonConvergence => 6,
            },
        }
    }
}
