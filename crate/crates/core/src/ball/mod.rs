//! Ball balancing and catching on a tilting plate.

pub mod control;
pub mod dynamics;
pub mod energy;
pub mod grid;
pub mod params;
pub mod propagate;
pub mod scenario;

pub use dynamics::{accel_distribution, ball_accel, plate_frame_accels, AccelModel, Gaussian, NoiseSample, PlateFrameAccels};
pub use energy::{e_max, e_max_for, energy};
pub use grid::{entropy, Cell, GridSpec, ProbGrid, State};
pub use params::{BallParams, ControlParams, EnergyModel, PlateState, UncertaintyModel, GRAVITY};
pub use propagate::{propagate_prob, quadrature};
pub use scenario::{BallScenario, PlatePath};
pub use control::{
    cbf_value, clf_value, dynamic_control, lie_derivatives, max_energy, mean_energy, rate_box, rate_feasible,
    replay_beliefs, verify_dynamic_plan, BallBelief, DynamicPlan, DynamicProblem, LieDerivatives, PlateTrajectory,
};
