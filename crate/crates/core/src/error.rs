use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("initial potential state set is empty")]
    EmptyInitialPss,
    #[error("propagation removed every state")]
    EmptyResult,
    #[error("waypoint spacing {spacing:.3} mm at index {index} exceeds the admissible {limit:.3} mm")]
    WaypointSpacingTooLarge {
        index: usize,
        spacing: f64,
        limit: f64,
    },
    #[error("all probability mass left the state box at step {step}")]
    AllMassLost { step: usize },
    #[error("pusher never reaches the object")]
    NoContact,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("bad trajectory spec: {0}")]
    BadSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
