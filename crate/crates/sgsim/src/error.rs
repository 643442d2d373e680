//! Crate-wide error type.

use crate::physics::{ElectronState, Vec3};

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A physical precondition was violated (non-positive voltage, bad
    /// geometry ordering, velocity at or above c, and so on).
    #[error("domain error: {0}")]
    Domain(String),

    /// Field evaluation requested within the singularity guard distance of a
    /// wire. Carries the offending position in meters.
    #[error("field singularity at ({}, {}, {}) m", position.x, position.y, position.z)]
    Singularity { position: Vec3 },

    /// The integrator ran out of steps before reaching the exit plane.
    /// Carries the last good state so callers can diagnose turn-arounds.
    #[error("max steps ({max_steps}) exhausted at x = {} m", last.position.x)]
    MaxSteps {
        max_steps: u64,
        last: ElectronState,
    },

    /// More than the tolerated fraction of the ensemble failed to reach the
    /// screen.
    #[error("scenario lost {lost} of {total} electrons (more than 1% tolerated)")]
    ScenarioLoss { lost: usize, total: usize },

    /// Config text could not be parsed; names the 1-based line.
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
