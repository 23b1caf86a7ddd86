//! Ground-truth simulators and baseline controllers.

pub mod ball;
pub mod pcontrol;
pub mod qp;
pub mod sweep;
pub mod push;
