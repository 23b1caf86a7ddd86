//! Open-loop push planning along a waypoint trajectory.

use super::heuristic::{find_push, rank_candidates, PushChoice};
use super::problem::PushProblem;
use super::propagate::propagate_pss;
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::pss::{contains_geometric, CageCircle, PssGrid};
use crate::runlog::{RunLog, RunLogRecord};
use crate::verify::{
    feasibility_quasi_static, verify_caging_in_time, Action, ActionSequence, FailureReason,
    VerificationResult,
};
use serde::{Deserialize, Serialize};

/// Output of [`plan_push`].
#[derive(Debug, Clone)]
pub struct PushPlan {
    pub actions: ActionSequence,
    pub result: VerificationResult,
    pub log: RunLog,
    /// State sets after each step, starting with the initial one.
    pub pss_history: Vec<PssGrid>,
}

/// One row of an exported plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanStep {
    pub t: usize,
    pub theta: Option<f64>,
    pub k: Option<usize>,
}

impl PushPlan {
    pub fn steps(&self) -> Vec<PlanStep> {
        export_steps(&self.actions)
    }
}

pub fn export_steps(actions: &ActionSequence) -> Vec<PlanStep> {
    actions
        .steps
        .iter()
        .enumerate()
        .map(|(t, a)| match a {
            Action::Push { theta, k } => PlanStep { t, theta: Some(*theta), k: Some(*k) },
            _ => PlanStep { t, theta: None, k: None },
        })
        .collect()
}

/// Single-cell state set at `position`, in a window centered on `center`.
pub fn initial_pss(problem: &PushProblem, center: Vec2, position: Vec2) -> PssGrid {
    let mut g = PssGrid::empty(center, problem.grid_half_extent(), problem.resolution);
    g.insert_point(position);
    g
}

/// The cage the state set must respect after step `t - 1`.
pub fn cage_at(problem: &PushProblem, t: usize) -> CageCircle {
    let i = t.min(problem.trajectory.len() - 1);
    CageCircle::new(problem.trajectory[i], problem.cage_size)
}

/// Plans pushes that keep the object's possible positions inside a cage of
/// radius `cage_size` around each successive waypoint.
///
/// Candidates are scored against a cage shrunk by `containment_margin`;
/// success is judged against the full cage. Planning stops at the first
/// step whose state set escapes.
pub fn plan_push(problem: &PushProblem, initial_position: Vec2) -> Result<PushPlan> {
    problem.validate()?;
    let start = problem.trajectory[0];
    if start.distance(initial_position) > problem.cage_size + 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "initial position {:?} is outside the first cage",
            initial_position
        )));
    }
    let mut pss = initial_pss(problem, start, initial_position);
    let mut log = RunLog::default();
    log.push(RunLogRecord {
        t: 0,
        action: None,
        contained: contains_geometric(&pss, &cage_at(problem, 0)),
        pss_cells: pss.count(),
        cage_center: [start.x, start.y],
        energy: None,
    });
    let mut history = vec![pss.clone()];
    let mut steps = Vec::new();
    let mut prev: Option<f64> = None;
    let mut result = VerificationResult::ok();
    for t in 0..problem.trajectory.len() - 1 {
        let next_center = problem.trajectory[t + 1];
        let planning_cage = CageCircle::new(next_center, problem.planning_cage_size());
        let (action, next) = select_action(&pss, problem, &planning_cage, prev)?;
        if let Action::Push { theta, .. } = action {
            prev = Some(theta);
        }
        pss = next;
        let contained = contains_geometric(&pss, &cage_at(problem, t + 1));
        log.push(RunLogRecord {
            t: t + 1,
            action: Some(action.clone()),
            contained,
            pss_cells: pss.count(),
            cage_center: [next_center.x, next_center.y],
            energy: None,
        });
        steps.push(action);
        history.push(pss.clone());
        if !contained {
            result = VerificationResult::failed(t, FailureReason::EscapedCage);
            break;
        }
    }
    Ok(PushPlan {
        actions: ActionSequence::new(steps),
        result,
        log,
        pss_history: history,
    })
}

/// The action for one step and the state set it leads to.
///
/// The heuristic choice is kept whenever its outcome fits the planning cage.
/// Otherwise, with lookahead enabled, the `top_n` preferred candidates are
/// propagated and the one leaving the most compact set (smallest
/// farthest-cell distance from the cage center) is kept, earlier rank
/// winning ties; lower-ranked candidates are tried only when none of those
/// fits.
fn select_action(
    pss: &PssGrid,
    problem: &PushProblem,
    planning_cage: &CageCircle,
    prev: Option<f64>,
) -> Result<(Action, PssGrid)> {
    let center = planning_cage.center;
    let Some(first) = find_push(pss, problem, planning_cage, prev) else {
        return Ok((Action::NoAction, propagate_pss(pss, None, center, problem)?));
    };
    let push = |c: PushChoice| Action::Push { theta: c.theta, k: c.k };
    let first_next = propagate_pss(pss, Some(first.theta), center, problem)?;
    if !problem.lookahead || contains_geometric(&first_next, planning_cage) {
        return Ok((push(first), first_next));
    }
    let mut best: Option<(f64, PushChoice, PssGrid)> = None;
    let ranked = rank_candidates(pss, problem, planning_cage, prev);
    for (i, c) in ranked.into_iter().enumerate() {
        if i >= problem.top_n && best.as_ref().is_some_and(|b| b.0 <= planning_cage.radius) {
            break;
        }
        let next = if i == 0 {
            first_next.clone()
        } else {
            match propagate_pss(pss, Some(c.theta), center, problem) {
                Ok(next) => next,
                Err(_) => continue,
            }
        };
        let spread = if next.spilled() { f64::INFINITY } else { max_radius(&next, center) };
        if best.as_ref().map_or(true, |b| spread < b.0 - 1e-9) {
            best = Some((spread, c, next));
        }
    }
    let (_, c, next) = best.expect("the first candidate always propagates");
    Ok((push(c), next))
}

fn max_radius(pss: &PssGrid, center: Vec2) -> f64 {
    pss.occupied_points().map(|q| q.distance(center)).fold(0.0, f64::max)
}

/// Replays `actions` from `initial_position` through the generic verifier.
pub fn verify_push_plan(
    problem: &PushProblem,
    initial_position: Vec2,
    actions: &ActionSequence,
) -> Result<VerificationResult> {
    if actions.len() + 1 > problem.trajectory.len() {
        return Err(Error::InvalidParameter("plan is longer than the trajectory".into()));
    }
    let initial = initial_pss(problem, problem.trajectory[0], initial_position);
    verify_caging_in_time(
        &initial,
        actions,
        |t| cage_at(problem, t),
        |pss, action, t| propagate_pss(pss, action.push_angle(), problem.trajectory[t + 1], problem),
        contains_geometric,
        |a, _| feasibility_quasi_static(a),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::circle;

    #[test]
    fn stationary_target_needs_no_pushes() {
        let p = PushProblem::with_defaults(20.0, 32, vec![Vec2::new(10.0, 10.0); 12]);
        let plan = plan_push(&p, Vec2::new(10.0, 10.0)).unwrap();
        assert!(plan.result.success);
        assert_eq!(plan.actions.len(), 11);
        assert!(plan.actions.steps.iter().all(|a| *a == Action::NoAction));
        assert_eq!(plan.log.len(), 12);
    }

    #[test]
    fn straight_line_plan_reverifies() {
        let traj: Vec<Vec2> = (0..30).map(|i| Vec2::new(5.0 * i as f64, 0.0)).collect();
        let p = PushProblem::with_defaults(20.0, 32, traj);
        let plan = plan_push(&p, Vec2::ZERO).unwrap();
        assert!(plan.result.success, "{:?}", plan.result);
        assert!(plan.actions.steps.iter().any(|a| matches!(a, Action::Push { .. })));
        let v = verify_push_plan(&p, Vec2::ZERO, &plan.actions).unwrap();
        assert_eq!(v, plan.result);
    }

    #[test]
    fn circle_plan_reverifies() {
        let p = PushProblem::with_defaults(20.0, 128, circle(Vec2::ZERO, 150.0, 100));
        let start = p.trajectory[0];
        let plan = plan_push(&p, start).unwrap();
        assert!(plan.result.success, "{:?}", plan.result);
        assert!(verify_push_plan(&p, start, &plan.actions).unwrap().success);
    }

    #[test]
    fn wide_spacing_is_rejected() {
        let p = PushProblem::with_defaults(20.0, 32, vec![Vec2::ZERO, Vec2::new(60.0, 0.0)]);
        assert!(matches!(plan_push(&p, Vec2::ZERO), Err(Error::WaypointSpacingTooLarge { index: 1, .. })));
    }

    #[test]
    fn jumps_of_three_cages_fail() {
        let traj: Vec<Vec2> = (0..6).map(|i| Vec2::new(60.0 * i as f64, 0.0)).collect();
        let mut p = PushProblem::with_defaults(20.0, 32, traj);
        p.enforce_spacing = false;
        let plan = plan_push(&p, Vec2::ZERO).unwrap();
        assert!(!plan.result.success);
        assert_eq!(plan.result.failure_reason, Some(FailureReason::EscapedCage));
    }

    #[test]
    fn exported_steps_mirror_actions() {
        let actions = ActionSequence::new(vec![Action::NoAction, Action::Push { theta: 1.5, k: 7 }]);
        let steps = export_steps(&actions);
        assert_eq!(steps[0], PlanStep { t: 0, theta: None, k: None });
        assert_eq!(steps[1], PlanStep { t: 1, theta: Some(1.5), k: Some(7) });
        let json = serde_json::to_string(&steps).unwrap();
        assert_eq!(json, r#"[{"t":0,"theta":null,"k":null},{"t":1,"theta":1.5,"k":7}]"#);
    }
}
