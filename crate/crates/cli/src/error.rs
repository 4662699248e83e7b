use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("data error: {source_name}, line {line}: {msg}")]
    DataLine { source_name: String, line: u64, msg: String },
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::DataLine { .. } | CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

macro_rules! numeric_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Numeric(e.to_string())
            }
        }
    )*};
}

numeric_from!(
    seiar_core::simulation::SimulationError,
    seiar_core::stability::StabilityError,
    seiar_core::scenario::ScenarioError
);

impl From<seiar_core::calibration::CalibrationError> for CliError {
    fn from(e: seiar_core::calibration::CalibrationError) -> Self {
        use seiar_core::calibration::CalibrationError as E;
        match e {
            E::InvalidSpec(_) | E::WrongDimension { .. } => CliError::Config(e.to_string()),
            E::InvalidData(_) => CliError::Data(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}
