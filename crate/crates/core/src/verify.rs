//! Task-independent caging-in-time verification.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// One open-loop command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    NoAction,
    /// Line push from angle `theta` (radians, in `[0, 2π)`), candidate index `k` in `1..=K`.
    Push { theta: f64, k: usize },
    /// Plate tilt rate, rad/s, one entry per plate axis.
    TiltRate { dtheta: Vec<f64> },
}

impl Action {
    pub fn push_angle(&self) -> Option<f64> {
        match self {
            Action::Push { theta, .. } => Some(*theta),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ActionSequence {
    pub steps: Vec<Action>,
}

impl ActionSequence {
    pub fn new(steps: Vec<Action>) -> Self {
        Self { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    InfeasibleAction,
    EscapedCage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub success: bool,
    pub failure_step: Option<usize>,
    pub failure_reason: Option<FailureReason>,
}

impl VerificationResult {
    pub fn ok() -> Self {
        Self {
            success: true,
            failure_step: None,
            failure_reason: None,
        }
    }

    pub fn failed(step: usize, reason: FailureReason) -> Self {
        Self {
            success: false,
            failure_step: Some(step),
            failure_reason: Some(reason),
        }
    }
}

/// A set of hypothesised object states.
pub trait StateSet {
    fn has_support(&self) -> bool;
}

impl StateSet for crate::pss::PssGrid {
    fn has_support(&self) -> bool {
        !self.is_empty()
    }
}

/// Folds `propagate` over `actions`, checking `feasible` before each action
/// and `contains` against the cage of the following step after it.
///
/// Returns at the first violation. `cage_at(t)` is the cage that must hold the
/// states reached after executing action `t - 1`.
pub fn verify_caging_in_time<S, C>(
    initial: &S,
    actions: &ActionSequence,
    cage_at: impl Fn(usize) -> C,
    mut propagate: impl FnMut(&S, &Action, usize) -> Result<S>,
    contains: impl Fn(&S, &C) -> bool,
    mut feasible: impl FnMut(&Action, usize) -> bool,
) -> Result<VerificationResult>
where
    S: StateSet + Clone,
{
    if !initial.has_support() {
        return Err(Error::EmptyInitialPss);
    }
    let mut current = initial.clone();
    for (t, action) in actions.steps.iter().enumerate() {
        if !feasible(action, t) {
            return Ok(VerificationResult::failed(t, FailureReason::InfeasibleAction));
        }
        let next = propagate(&current, action, t)?;
        if !contains(&next, &cage_at(t + 1)) {
            return Ok(VerificationResult::failed(t, FailureReason::EscapedCage));
        }
        current = next;
    }
    Ok(VerificationResult::ok())
}

/// Quasi-static objects do not move between pushes, so any action can be
/// staged in time.
pub fn feasibility_quasi_static(_action: &Action) -> bool {
    true
}
