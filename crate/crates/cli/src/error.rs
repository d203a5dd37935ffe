use std::fmt;

/// Failure classes mapped onto process exit codes.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
            CliError::Io(_) => "io",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "schema": 1, "error": self.kind(), "exit_code": self.exit_code(), "message": self.message() })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.kind(), self.message())
    }
}

impl std::error::Error for CliError {}

impl From<fhm_core::Error> for CliError {
    fn from(e: fhm_core::Error) -> Self {
        if e.is_config() {
            CliError::Config(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

macro_rules! via_core {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                fhm_core::Error::from(e).into()
            }
        })*
    };
}

via_core!(
    fhm_core::model::ModelError,
    fhm_core::ansatz::AnsatzError,
    fhm_core::simulator::SimError,
    fhm_core::vqe::VqeError,
    fhm_core::exact::ExactError,
    fhm_core::qeom::QeomError,
    fhm_core::spectral::SpectralError,
    fhm_core::resources::ResourceError
);

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(format!("csv: {e}"))
    }
}
