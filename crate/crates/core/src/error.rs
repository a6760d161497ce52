use thiserror::Error;

/// Errors shared across the simulation and solver modules.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative scheme failed to reach its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The direct PDE integrator produced a non-finite value.
    #[error("instability at t = {time:.6e} (substep {substep:.3e}); reduce the substep or check the potential")]
    Instability { time: f64, substep: f64 },

    /// A configuration file or stage description is malformed.
    #[error("schema error in stage `{stage}`: {message}")]
    Schema { stage: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
