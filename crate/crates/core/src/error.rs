use thiserror::Error;

/// Failures of the camera geometry (projection and its inverse).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("bounding box width {0} px is degenerate")]
    DegenerateBox(f64),
    #[error("subtended angle {0} deg is outside the distance model (must be < 90 deg)")]
    OutOfModel(f64),
    #[error(
        "object at deviation {deviation} deg is outside the half field of view {half_fov} deg"
    )]
    NoBox { deviation: f64, half_fov: f64 },
    #[error("distance {distance} exceeds maximum range {d_max}")]
    OutOfRange { distance: f64, d_max: f64 },
}

/// Invalid scene, scenario, or parameter values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("unknown cav `{0}`")]
    UnknownCav(String),
    #[error("unknown sweep axis `{axis}`; valid axes: {valid}")]
    UnknownAxis { axis: String, valid: String },
}

impl ConfigError {
    pub fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum BusError {
    #[error("clock cannot move backwards from {now} ms to {requested} ms")]
    TimeRegression { now: u64, requested: u64 },
    #[error("topic name must not be empty")]
    EmptyTopic,
}

#[derive(Debug, Error)]
pub enum WireError {
    #[error("truncated payload at byte {0}")]
    Truncated(usize),
    #[error("malformed record: {0}")]
    Record(#[from] serde_json::Error),
}

/// Top-level error for the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Bus(#[from] BusError),
    #[error(transparent)]
    Wire(#[from] WireError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
