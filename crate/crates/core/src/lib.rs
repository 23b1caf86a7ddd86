//! Open-loop manipulation planning by keeping every possible object state
//! inside a cage that moves over time.

pub mod ball;
pub mod error;
pub mod geometry;
pub mod oracle;
pub mod pss;
pub mod qp;
pub mod push;
pub mod runlog;
pub mod trajectory;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::Vec2;
pub use pss::{contains_geometric, CageCircle, PssGrid};
pub use runlog::{EnergyRecord, RunLog, RunLogRecord};
pub use verify::{
    feasibility_quasi_static, verify_caging_in_time, Action, ActionSequence, FailureReason,
    StateSet, VerificationResult,
};
