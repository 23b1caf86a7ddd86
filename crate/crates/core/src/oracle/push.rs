//! Pushing simulator driven by the Peshkin rotation bound.

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::push::{pusher_pose, PushProblem, PusherPose};
use crate::verify::{Action, ActionSequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// Upper bound on the change of the contact angle `beta` while the pusher
/// advances `m`, for an object of radius `a` touched at distance `c` from the
/// mass center's projection.
pub fn peshkin_delta_beta(a: f64, c: f64, beta0: f64, m: f64) -> f64 {
    c * beta0.sin() / (a * a + c * c) * m
}

/// Parameters of the randomized pushing simulator. Lengths in millimeters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PushOracleConfig {
    /// Radius of the object about its mass center.
    pub a: f64,
    pub c_min: f64,
    pub c_max: f64,
    /// Integration step of pusher travel.
    pub micro_step: f64,
    /// Initial contact angles are drawn from `[beta0_min, π - beta0_min]`.
    pub beta0_min: f64,
    pub seed: u64,
}

impl Default for PushOracleConfig {
    fn default() -> Self {
        Self {
            a: 25.0,
            c_min: 0.0,
            c_max: 25.0,
            micro_step: 0.5,
            beta0_min: 0.3,
            seed: 0,
        }
    }
}

/// Pusher travel before the segment first comes within `r` of `q`, or
/// `None` if that never happens within `d_push`. Zero when it already does.
pub fn contact_travel(q: Vec2, pose: &PusherPose, r: f64, d_push: f64) -> Option<f64> {
    if pose.distance_to(q) <= r {
        return Some(0.0);
    }
    if pose.advanced(d_push).distance_to(q) > r {
        // the distance is convex in travel; check the minimum in between
        let (mut lo, mut hi) = (0.0, d_push);
        for _ in 0..60 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if pose.advanced(m1).distance_to(q) < pose.advanced(m2).distance_to(q) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        if pose.advanced(lo).distance_to(q) > r {
            return None;
        }
        hi = lo;
        lo = 0.0;
        return Some(bisect_contact(q, pose, r, lo, hi));
    }
    Some(bisect_contact(q, pose, r, 0.0, d_push))
}

fn bisect_contact(q: Vec2, pose: &PusherPose, r: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if pose.advanced(mid).distance_to(q) <= r {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Integrates one push of an object whose bounding circle (radius `r`) sits
/// at `q0`, returning the displacement of its center.
///
/// `draw` yields a contact distance and a fraction in `[0, 1]` of the
/// rotation bound for every micro-step. Each micro-step moves the object
/// inside the scaled semi-ellipse of that step, so the sum stays inside the
/// semi-ellipse of the whole contact travel.
pub fn simulate_push_with(
    q0: Vec2,
    pose: &PusherPose,
    r: f64,
    d_push: f64,
    cfg: &PushOracleConfig,
    beta0: f64,
    mut draw: impl FnMut() -> (f64, f64),
) -> Result<Vec2> {
    let s0 = contact_travel(q0, pose, r, d_push).ok_or(Error::NoContact)?;
    let dir = pose.direction;
    let side = dir.perp();
    // an object under the pusher's start pose is swept to the contact line
    let carry = (r - pose.distance_to(q0)).max(0.0);
    let mut disp = dir * carry;
    let d_con = d_push - s0;
    if d_con <= 0.0 {
        return Ok(disp);
    }
    let steps = (d_con / cfg.micro_step).ceil().max(1.0) as usize;
    let dm = d_con / steps as f64;
    let mut beta = beta0;
    for _ in 0..steps {
        let (c, frac) = draw();
        let dbeta = frac * peshkin_delta_beta(cfg.a, c, beta, dm);
        let lateral = (c * dbeta * beta.cos()).clamp(-dm / 2.0, dm / 2.0);
        let psi = (2.0 * lateral / dm).asin();
        disp += dir * (dm * psi.cos()) + side * (0.5 * dm * psi.sin());
        // the contact angle relaxes toward head-on
        let gap = FRAC_PI_2 - beta;
        beta = if gap.abs() <= dbeta { FRAC_PI_2 } else { beta + dbeta * gap.signum() };
    }
    Ok(disp)
}

/// Initial contact angle of a simulated object. It stands for the object's
/// shape and is drawn once per object, so the side it drifts to is a fixed
/// property of that object.
pub fn sample_beta0<R: Rng>(cfg: &PushOracleConfig, rng: &mut R) -> f64 {
    rng.gen_range(cfg.beta0_min..=std::f64::consts::PI - cfg.beta0_min)
}

/// Randomized push of an object with contact angle `beta0`: the contact
/// distance and rotation fraction of every micro-step are drawn from `rng`.
pub fn simulate_push<R: Rng>(
    q0: Vec2,
    pose: &PusherPose,
    r: f64,
    d_push: f64,
    cfg: &PushOracleConfig,
    beta0: f64,
    rng: &mut R,
) -> Result<Vec2> {
    let (c_min, c_max) = (cfg.c_min, cfg.c_max.max(cfg.c_min));
    // the draws are taken from a private stream so the caller's stream
    // advances by a fixed amount per push
    let mut inner = ChaCha8Rng::seed_from_u64(rng.gen());
    simulate_push_with(q0, pose, r, d_push, cfg, beta0, || {
        (inner.gen_range(c_min..=c_max), inner.gen_range(0.0..=1.0))
    })
}

/// Positions after each step of an open-loop execution, and tracking errors
/// against the waypoint each step targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub positions: Vec<Vec2>,
    pub errors: Vec<f64>,
}

impl Rollout {
    pub fn max_error(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }

    pub fn mean_error(&self) -> f64 {
        if self.errors.is_empty() {
            0.0
        } else {
            self.errors.iter().sum::<f64>() / self.errors.len() as f64
        }
    }
}

/// Executes a plan against the simulator. A push that never reaches the
/// object leaves it where it is.
pub fn rollout_push_plan<R: Rng>(
    plan: &ActionSequence,
    problem: &PushProblem,
    q0: Vec2,
    cfg: &PushOracleConfig,
    rng: &mut R,
) -> Rollout {
    let beta0 = sample_beta0(cfg, rng);
    let mut q = q0;
    let mut positions = vec![q];
    let mut errors = Vec::with_capacity(plan.len());
    for (t, action) in plan.steps.iter().enumerate() {
        let target = problem.trajectory[t + 1];
        if let Action::Push { theta, .. } = action {
            let pose = pusher_pose(target, problem.outer_radius(), *theta, problem.half_length());
            q += simulate_push(q, &pose, problem.object_radius, problem.d_push, cfg, beta0, rng)
                .unwrap_or(Vec2::ZERO);
        }
        positions.push(q);
        errors.push(q.distance(target));
    }
    Rollout { positions, errors }
}

/// Independent seeded rollouts, run in parallel. Rollout `i` uses seed
/// `cfg.seed + i`.
pub fn rollout_many(
    plan: &ActionSequence,
    problem: &PushProblem,
    q0: Vec2,
    cfg: &PushOracleConfig,
    count: usize,
) -> Vec<Rollout> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
            rollout_push_plan(plan, problem, q0, cfg, &mut rng)
        })
        .collect()
}

/// Baseline that places the pusher right behind the reference point with
/// its face across the path and pushes by the waypoint spacing along the
/// path direction.
pub fn rollout_naive<R: Rng>(
    trajectory: &[Vec2],
    r: f64,
    pusher_length: f64,
    q0: Vec2,
    cfg: &PushOracleConfig,
    rng: &mut R,
) -> Rollout {
    let beta0 = sample_beta0(cfg, rng);
    let mut q = q0;
    let mut positions = vec![q];
    let mut errors = Vec::with_capacity(trajectory.len().saturating_sub(1));
    for w in trajectory.windows(2) {
        let step = w[1] - w[0];
        let length = step.norm();
        if length > 0.0 {
            let dir = step * (1.0 / length);
            let pose = PusherPose {
                center: w[0] - dir * r,
                direction: dir,
                half_length: pusher_length / 2.0,
            };
            q += simulate_push(q, &pose, r, length, cfg, beta0, rng).unwrap_or(Vec2::ZERO);
        }
        positions.push(q);
        errors.push(q.distance(w[1]));
    }
    Rollout { positions, errors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::push::motion_set;
    use std::f64::consts::PI;

    fn east_pose() -> PusherPose {
        pusher_pose(Vec2::ZERO, 45.0, 0.0, 50.0)
    }

    #[test]
    fn delta_beta_closed_form() {
        assert!((peshkin_delta_beta(25.0, 25.0, PI / 2.0, 20.0) - 0.4).abs() < 1e-15);
        assert_eq!(peshkin_delta_beta(25.0, 25.0, PI / 2.0, 0.0), 0.0);
        assert!(peshkin_delta_beta(25.0, 25.0, 1e-9, 20.0) < 1e-9);
    }

    #[test]
    fn no_contact_when_out_of_reach() {
        let cfg = PushOracleConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = simulate_push(Vec2::new(-10.0, 0.0), &east_pose(), 25.0, 20.0, &cfg, 1.0, &mut rng);
        assert_eq!(r, Err(Error::NoContact));
    }

    #[test]
    fn head_on_without_rotation_translates() {
        let cfg = PushOracleConfig::default();
        // touching at x = 15 leaves 10 mm of contact travel
        let d = simulate_push_with(Vec2::new(10.0, 0.0), &east_pose(), 25.0, 20.0, &cfg, PI / 2.0, || (10.0, 1.0)).unwrap();
        assert!(d.distance(Vec2::new(-10.0, 0.0)) < 1e-9, "{d:?}");
        let d = simulate_push_with(Vec2::new(10.0, 0.0), &east_pose(), 25.0, 20.0, &cfg, 1.0, || (10.0, 0.0)).unwrap();
        assert!(d.distance(Vec2::new(-10.0, 0.0)) < 1e-9);
    }

    #[test]
    fn contact_travel_matches_geometry() {
        let pose = east_pose();
        assert!((contact_travel(Vec2::new(10.0, 0.0), &pose, 25.0, 20.0).unwrap() - 10.0).abs() < 1e-9);
        assert_eq!(contact_travel(Vec2::new(30.0, 0.0), &pose, 25.0, 20.0), Some(0.0));
        // beyond the pusher's end: distance is to the endpoint
        let q = Vec2::new(20.0, 70.0);
        let t = contact_travel(q, &pose, 25.0, 20.0).unwrap();
        assert!((pose.advanced(t).distance_to(q) - 25.0).abs() < 1e-6);
    }

    #[test]
    fn displacements_stay_in_the_semi_ellipse() {
        let cfg = PushOracleConfig::default();
        let pose = east_pose();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let q = Vec2::new(rng.gen_range(-5.0..20.0), rng.gen_range(-40.0..40.0));
            let set = motion_set(q, &pose, 25.0, 20.0);
            let beta0 = sample_beta0(&cfg, &mut rng);
            match simulate_push(q, &pose, 25.0, 20.0, &cfg, beta0, &mut rng) {
                Ok(d) => assert!(set.contains(d, 1e-6), "{q:?} {d:?} {set:?}"),
                Err(_) => assert!(set.is_null),
            }
        }
    }

    #[test]
    fn lag_behind_the_pusher_is_small() {
        // the object never trails the pusher by more than 14% of contact travel
        let cfg = PushOracleConfig::default();
        let pose = east_pose();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let q = Vec2::new(20.0, rng.gen_range(-20.0..20.0));
            let beta0 = sample_beta0(&cfg, &mut rng);
            let d = simulate_push(q, &pose, 25.0, 20.0, &cfg, beta0, &mut rng).unwrap();
            let along = d.dot(pose.direction);
            assert!(along >= 20.0 * 0.866 - 1e-9, "{along}");
        }
    }

    #[test]
    fn seeded_rollouts_are_reproducible() {
        let traj = crate::trajectory::circle(Vec2::ZERO, 150.0, 100);
        let p = PushProblem::with_defaults(20.0, 32, traj.clone());
        let plan = crate::push::plan_push(&p, traj[0]).unwrap();
        let a = rollout_many(&plan.actions, &p, traj[0], &PushOracleConfig::default(), 4);
        let b = rollout_many(&plan.actions, &p, traj[0], &PushOracleConfig::default(), 4);
        assert_eq!(a, b);
    }
}
