use squeeze_core::floquet::FloquetError;
use squeeze_core::propagator::PropagateError;
use squeeze_core::pulse::PulseError;
use squeeze_core::strutt::StruttError;
use squeeze_core::theta::ThetaError;
use squeeze_core::units::UnitsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Validation(_) => 4,
        }
    }
}

impl From<PropagateError> for CliError {
    fn from(e: PropagateError) -> Self {
        match e {
            PropagateError::OutOfDomain { .. }
            | PropagateError::InvalidProfile(_)
            | PropagateError::InvalidConfig(_)
            | PropagateError::InvalidInterval(_) => CliError::Usage(e.to_string()),
            PropagateError::NotSymmetricProfile { .. } => CliError::Validation(e.to_string()),
            PropagateError::ToleranceNotMet { .. } => CliError::Numerical(e.to_string()),
            PropagateError::Theta(t) => t.into(),
        }
    }
}

impl From<ThetaError> for CliError {
    fn from(e: ThetaError) -> Self {
        match e {
            ThetaError::SingularTheta { .. } => CliError::Validation(e.to_string()),
            ThetaError::OutOfRange { .. } | ThetaError::InvalidSpec(_) => CliError::Usage(e.to_string()),
            ThetaError::Integration(inner) => (*inner).into(),
        }
    }
}

impl From<FloquetError> for CliError {
    fn from(e: FloquetError) -> Self {
        match e {
            FloquetError::NotPeriodic | FloquetError::InvalidPeriod(_) => CliError::Usage(e.to_string()),
            FloquetError::Propagate(p) => p.into(),
            FloquetError::Sym2(s) => CliError::Numerical(s.to_string()),
        }
    }
}

impl From<StruttError> for CliError {
    fn from(e: StruttError) -> Self {
        match e {
            StruttError::InvalidGrid(_) => CliError::Usage(e.to_string()),
            StruttError::EmptyResult(_) => CliError::Numerical(e.to_string()),
            StruttError::Propagate(p) => p.into(),
        }
    }
}

impl From<PulseError> for CliError {
    fn from(e: PulseError) -> Self {
        match e {
            PulseError::InvalidKappa(_) | PulseError::InvalidLambda(_) => CliError::Usage(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<UnitsError> for CliError {
    fn from(e: UnitsError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(format!("malformed JSON: {e}"))
    }
}
