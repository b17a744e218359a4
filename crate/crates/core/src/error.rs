use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({x:.4}, {z:.4}) is outside the terrain")]
    OutOfTerrain { x: f64, z: f64 },

    #[error("ray starts at y={y_start:.6}, below the surface at y={surface:.6}")]
    RayBelowSurface { y_start: f64, surface: f64 },

    #[error("body fell over: tilt {tilt:.4} rad reached the ±π/2 limit")]
    FallOver { tilt: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("scenario field `{field}`: {message}")]
    Scenario { field: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn scenario(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Scenario { field: field.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
