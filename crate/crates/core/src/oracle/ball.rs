//! Exact ball-on-plate integration of an open-loop tilt plan.

use crate::ball::control::DynamicProblem;
use crate::ball::dynamics::{ball_accel, NoiseSample};
use crate::ball::grid::{ProbGrid, State};
use crate::verify::{Action, ActionSequence};
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BallOracleConfig {
    pub trials: usize,
    pub seed: u64,
    /// Runge-Kutta steps per control step; at least ten.
    pub substeps: usize,
}

impl Default for BallOracleConfig {
    fn default() -> Self {
        Self {
            trials: 20,
            seed: 0,
            substeps: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallRollout {
    /// Ball position on the plate after every control step, starting state
    /// first.
    pub positions: Vec<[f64; 2]>,
    /// Largest coordinate magnitude reached, checked at every sub-step.
    pub max_abs: f64,
    pub mean_abs: f64,
    /// The ball never left the plate.
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallRolloutSummary {
    pub success_rate: f64,
    pub rollouts: Vec<BallRollout>,
}

impl BallRolloutSummary {
    pub fn max_abs(&self) -> f64 {
        self.rollouts.iter().map(|r| r.max_abs).fold(0.0, f64::max)
    }

    pub fn mean_abs(&self) -> f64 {
        self.rollouts.iter().map(|r| r.mean_abs).sum::<f64>() / self.rollouts.len().max(1) as f64
    }
}

fn rates(plan: &ActionSequence, n: usize) -> Vec<Vec<f64>> {
    plan.steps
        .iter()
        .map(|a| match a {
            Action::TiltRate { dtheta } => dtheta.clone(),
            _ => vec![0.0; n],
        })
        .collect()
}

/// Integrates one ball from `start` with fixed mass and friction errors and
/// plate-acceleration error redrawn every control step. The tilt ramps
/// linearly within a step and the plate acceleration is the one the planner
/// used for that step.
pub fn rollout_ball(
    start: State,
    plan: &ActionSequence,
    problem: &DynamicProblem,
    substeps: usize,
    rng: &mut ChaCha8Rng,
) -> BallRollout {
    let n = problem.n();
    let dt = problem.control.dt;
    let l = problem.half_length;
    let unc = &problem.uncertainty;
    let fixed = NoiseSample::draw(unc, rng);
    let sub = substeps.max(1);
    let h = dt / sub as f64;
    let mut s = start;
    let mut tilt = problem.initial_tilt.clone();
    let pos = |s: &State| [s[0], if n == 2 { s[1] } else { 0.0 }];
    let mut positions = vec![pos(&s)];
    let coord_max = |s: &State| (0..n).map(|i| s[i].abs()).fold(0.0, f64::max);
    let mut max_abs = coord_max(&s);
    let mut success = max_abs <= l;
    for (t, u) in rates(plan, n).iter().enumerate() {
        let step_noise = NoiseSample::draw(unc, rng);
        let noise = NoiseSample {
            mass: fixed.mass,
            plate: step_noise.plate,
            friction: fixed.friction,
        };
        let plate_at = |tau: f64| {
            let th: Vec<f64> = tilt.iter().zip(u).map(|(a, b)| a + b * tau).collect();
            problem.plate(&th, t + 1)
        };
        let deriv = |s: &State, tau: f64| -> State {
            let a = ball_accel(&s[n..2 * n], &plate_at(tau), &problem.ball, &noise);
            let mut d = [0.0; 4];
            for i in 0..n {
                d[i] = s[n + i];
                d[n + i] = a[i];
            }
            d
        };
        for k in 0..sub {
            let tau = k as f64 * h;
            let add = |a: &State, b: &State, f: f64| {
                let mut o = *a;
                for i in 0..4 {
                    o[i] += f * b[i];
                }
                o
            };
            let k1 = deriv(&s, tau);
            let k2 = deriv(&add(&s, &k1, h / 2.0), tau + h / 2.0);
            let k3 = deriv(&add(&s, &k2, h / 2.0), tau + h / 2.0);
            let k4 = deriv(&add(&s, &k3, h), tau + h);
            for i in 0..4 {
                s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            let m = coord_max(&s);
            max_abs = max_abs.max(m);
            if m > l {
                success = false;
            }
        }
        for (a, b) in tilt.iter_mut().zip(u) {
            *a += b * dt;
        }
        positions.push(pos(&s));
        if !success {
            break;
        }
    }
    let mean_abs = positions
        .iter()
        .map(|p| if n == 2 { (p[0] * p[0] + p[1] * p[1]).sqrt() } else { p[0].abs() })
        .sum::<f64>()
        / positions.len() as f64;
    BallRollout {
        positions,
        max_abs,
        mean_abs,
        success,
    }
}

/// Runs `cfg.trials` rollouts in parallel, trial `i` seeded with
/// `cfg.seed + i`. Starting states are drawn from the initial belief.
pub fn rollout_ball_many(initial: &ProbGrid, plan: &ActionSequence, problem: &DynamicProblem, cfg: &BallOracleConfig) -> BallRolloutSummary {
    let weights: Vec<f64> = initial.cells.iter().map(|c| c.prob).collect();
    let pick = WeightedIndex::new(&weights).expect("initial belief has positive mass");
    let rollouts: Vec<BallRollout> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
            let start = initial.cells[pick.sample(&mut rng)].mean;
            rollout_ball(start, plan, problem, cfg.substeps, &mut rng)
        })
        .collect();
    let ok = rollouts.iter().filter(|r| r.success).count();
    BallRolloutSummary {
        success_rate: ok as f64 / cfg.trials.max(1) as f64,
        rollouts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::control::PlateTrajectory;
    use crate::ball::params::{BallParams, ControlParams, EnergyModel, UncertaintyModel};

    fn problem(steps: usize, tilt: f64) -> DynamicProblem {
        let ball = BallParams::tennis();
        DynamicProblem {
            energy: EnergyModel::new(10.0, &ball),
            ball,
            uncertainty: UncertaintyModel::zero(1),
            control: ControlParams::default(),
            half_length: 0.08,
            initial_tilt: vec![tilt],
            trajectory: PlateTrajectory::stationary(1, 0.02, steps),
        }
    }

    fn zeros(steps: usize) -> ActionSequence {
        ActionSequence::new(vec![Action::TiltRate { dtheta: vec![0.0] }; steps])
    }

    #[test]
    fn resting_ball_stays_put() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = rollout_ball([0.0; 4], &zeros(50), &problem(50, 0.0), 4, &mut rng);
        assert!(r.success);
        assert_eq!(r.max_abs, 0.0);
    }

    #[test]
    fn constant_tilt_matches_closed_form() {
        // x'' = a - μ x' from rest: x = a/μ (t - (1 - e^{-μt})/μ)
        let pr = problem(25, 0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = rollout_ball([0.0; 4], &zeros(25), &pr, 8, &mut rng);
        let a = pr.ball.rolling_factor() * crate::ball::GRAVITY * 0.05f64.sin();
        let (mu, t) = (pr.ball.rolling_friction, 0.5);
        let x = a / mu * (t - (1.0 - (-mu * t).exp()) / mu);
        assert!((r.positions[25][0] - x).abs() < 1e-9);
    }

    #[test]
    fn leaving_the_plate_fails() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = rollout_ball([0.07, 0.5, 0.0, 0.0], &zeros(50), &problem(50, 0.0), 4, &mut rng);
        assert!(!r.success);
        assert!(r.max_abs > 0.08);
    }

    #[test]
    fn frictionless_level_plate_conserves_kinetic_energy() {
        let mut pr = problem(500, 0.0);
        pr.ball.rolling_friction = 0.0;
        pr.trajectory = PlateTrajectory::stationary(2, 0.02, 500);
        pr.uncertainty = UncertaintyModel::zero(2);
        pr.initial_tilt = vec![0.0, 0.0];
        let plan = ActionSequence::new(vec![Action::TiltRate { dtheta: vec![0.0, 0.0] }; 500]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = rollout_ball([0.0, 0.0, 0.003, -0.002], &plan, &pr, 10, &mut rng);
        let last = r.positions[500];
        // with no force the position moves linearly, so speed is the slope
        let speed = ((last[0] / 10.0).powi(2) + (last[1] / 10.0).powi(2)).sqrt();
        let start = (0.003f64.powi(2) + 0.002f64.powi(2)).sqrt();
        assert!((speed * speed / (start * start) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn seeded_rollouts_repeat() {
        let s = crate::ball::BallScenario::lemniscate();
        let (pr, g) = (s.problem().unwrap(), s.belief().unwrap());
        let plan = crate::ball::dynamic_control(&g, &pr).unwrap();
        let cfg = BallOracleConfig { trials: 4, ..Default::default() };
        assert_eq!(rollout_ball_many(&g, &plan.actions, &pr, &cfg), rollout_ball_many(&g, &plan.actions, &pr, &cfg));
    }

    #[test]
    fn spread_beyond_the_plan_is_caught_out() {
        let s = crate::ball::BallScenario::lemniscate();
        let (pr, g) = (s.problem().unwrap(), s.belief().unwrap());
        let plan = crate::ball::dynamic_control(&g, &pr).unwrap();
        assert!(plan.result.success);
        let wide = ProbGrid::uniform_box(s.grid_spec().unwrap(), [-0.02, -0.6, 0.0, 0.0], [0.02, 0.6, 0.0, 0.0]).unwrap();
        let r = rollout_ball_many(&wide, &plan.actions, &pr, &BallOracleConfig::default());
        assert!(r.success_rate < 1.0, "{}", r.success_rate);
    }
}
