use kpgeo::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver divergence: {0}")]
    Divergence(String),
    #[error("{0} acceptance criteria failed")]
    Acceptance(usize),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Divergence(_) => 3,
            CliError::Acceptance(_) => 4,
            CliError::Other(_) => 1,
        }
    }
}

fn is_divergence(e: &Error) -> bool {
    match e {
        Error::AtLambda { source, .. } => is_divergence(source),
        Error::LeftNeighborhood { .. }
        | Error::NeumannDiverged(_)
        | Error::NoConvergence(_)
        | Error::OutsideContraction(_)
        | Error::NoContraction(_)
        | Error::LeftKahlerCone(_)
        | Error::MetricDegenerate(_)
        | Error::FoliationNotInvertible(_)
        | Error::IntegrabilityViolated(_)
        | Error::PerturbationTooLarge(_)
        | Error::Singular(_)
        | Error::NotInvertible(_)
        | Error::OutsideDomain(_)
        | Error::ConformalMap(_)
        | Error::OracleInvalid { .. } => true,
        _ => false,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(io) => CliError::Other(io.to_string()),
            e if is_divergence(&e) => CliError::Divergence(e.to_string()),
            e => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Other(e.to_string())
    }
}
