use thiserror::Error;

/// Failures raised by the field operators, steppers and audits.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("field has {found} points, grid expects {expected}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("temperature must be positive, found {value}")]
    NonPositiveTemperature { value: f64 },

    #[error("temperature must be nonnegative, found {value}")]
    NegativeTemperature { value: f64 },

    #[error("time step must be positive and finite, found {0}")]
    InvalidTimeStep(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("temperature positivity lost (min theta = {theta_min:e}) at dt = {dt:e}")]
    Positivity { theta_min: f64, dt: f64 },

    #[error("Picard iteration did not converge in {iterations} passes (last update {update:e})")]
    PicardNotConverged { iterations: usize, update: f64 },

    #[error("time step {dt:e} violates the CFL limit {limit:e}")]
    Cfl { dt: f64, limit: f64 },

    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),

    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),

    #[error("empty trajectory")]
    EmptyTrajectory,

    #[error("MMS level {0} outside 0..=4")]
    InvalidLevel(u32),
}

impl Error {
    /// True for failures caused by the temperature losing positivity, which
    /// the orchestrator answers by shrinking the step.
    pub fn is_positivity(&self) -> bool {
        matches!(self, Error::Positivity { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
