//! Quasi-static pushing with a line pusher.

pub mod heuristic;
pub mod motion;
pub mod planner;
pub mod poa;
pub mod problem;
pub mod propagate;

pub use heuristic::{find_push, heuristic_score, rank_candidates, outside_stats, OutsideStats, PushChoice};
pub use motion::{motion_set, pusher_pose, PusherPose, SemiEllipseMotionSet};
pub use planner::{cage_at, export_steps, initial_pss, plan_push, verify_push_plan, PlanStep, PushPlan};
pub use poa::{compute_poa, Poa};
pub use problem::PushProblem;
pub use propagate::propagate_pss;
