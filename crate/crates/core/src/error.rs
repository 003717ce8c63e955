use thiserror::Error;

/// Errors produced by the simulation and estimation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rate or coupling `{name}` must be non-negative, got {value}")]
    NegativeRate { name: &'static str, value: f64 },

    #[error("non-finite value encountered in `{0}`")]
    NonFinite(&'static str),

    #[error("evolution time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("no-jump norm {0:e} is below the conditioning floor")]
    VanishedNorm(f64),

    #[error("integrator step-halving probe error {err:e} exceeds {tol:e}")]
    StepTooLarge { err: f64, tol: f64 },

    #[error("no surviving trajectories at t = {0}")]
    NoSurvivors(f64),

    #[error("only {kept} post-selected shots, need at least {min}")]
    InsufficientSurvivors { kept: u64, min: u64 },

    #[error("eigenenergy fit did not converge after {restarts} restarts")]
    NotConverged { restarts: usize },

    #[error("measurement data is constant; eigenenergy is unidentifiable")]
    DegenerateData,

    #[error("operating at the exceptional point; sensitivity diverges")]
    AtExceptionalPoint,

    #[error("power-law fit needs at least {need} points, got {got}")]
    InsufficientPoints { got: usize, need: usize },

    #[error("sensitivity point {index} has non-positive S = {value}")]
    NonPositiveS { index: usize, value: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
