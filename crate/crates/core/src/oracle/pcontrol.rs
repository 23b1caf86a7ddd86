//! Closed-loop proportional pushing baseline with noisy, delayed feedback.

use super::push::{sample_beta0, simulate_push, PushOracleConfig, Rollout};
use crate::geometry::Vec2;
use crate::push::PusherPose;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PControllerConfig {
    pub gain: f64,
    /// Longest push, mm.
    pub cap: f64,
    /// Standard deviation of the position measurement per axis, mm.
    pub noise_sigma: f64,
    /// With probability one half, the observation comes from one of
    /// `lag_seconds` ago (chosen uniformly).
    pub lag: bool,
    pub lag_seconds: Vec<f64>,
    /// Wall time of one control step, s.
    pub step_period: f64,
}

impl Default for PControllerConfig {
    fn default() -> Self {
        Self {
            gain: 0.5,
            cap: 20.0,
            noise_sigma: 0.0,
            lag: false,
            lag_seconds: vec![0.5, 1.0],
            step_period: 0.25,
        }
    }
}

/// Push vector from an observed position toward `target`: the error scaled
/// by `gain`, shortened to at most `cap`.
pub fn p_controller_step(observed: Vec2, target: Vec2, gain: f64, cap: f64) -> Vec2 {
    let cmd = (target - observed) * gain;
    let n = cmd.norm();
    if n > cap {
        cmd * (cap / n)
    } else {
        cmd
    }
}

/// Tracks `trajectory` by pushing toward the waypoint of the next step. The
/// pusher is placed just touching the observed bounding circle and travels
/// the commanded distance.
pub fn rollout_p_controller<R: Rng>(
    trajectory: &[Vec2],
    r: f64,
    pusher_length: f64,
    q0: Vec2,
    cfg: &PControllerConfig,
    oracle: &PushOracleConfig,
    rng: &mut R,
) -> Rollout {
    let noise = Normal::new(0.0, cfg.noise_sigma.max(0.0)).expect("finite sigma");
    let lag_steps: Vec<usize> = cfg
        .lag_seconds
        .iter()
        .map(|s| (s / cfg.step_period).round() as usize)
        .collect();
    let beta0 = sample_beta0(oracle, rng);
    let mut q = q0;
    let mut positions = vec![q];
    let mut errors = Vec::with_capacity(trajectory.len().saturating_sub(1));
    for t in 0..trajectory.len().saturating_sub(1) {
        let mut seen = q;
        if cfg.lag && !lag_steps.is_empty() && rng.gen_bool(0.5) {
            let back = lag_steps[rng.gen_range(0..lag_steps.len())];
            seen = positions[positions.len().saturating_sub(1 + back)];
        }
        if cfg.noise_sigma > 0.0 {
            seen += Vec2::new(noise.sample(rng), noise.sample(rng));
        }
        let target = trajectory[t + 1];
        let cmd = p_controller_step(seen, target, cfg.gain, cfg.cap);
        let length = cmd.norm();
        if length > 1e-12 {
            let dir = cmd * (1.0 / length);
            let pose = PusherPose {
                center: seen - dir * r,
                direction: dir,
                half_length: pusher_length / 2.0,
            };
            q += simulate_push(q, &pose, r, length, oracle, beta0, rng).unwrap_or(Vec2::ZERO);
        }
        positions.push(q);
        errors.push(q.distance(target));
    }
    Rollout { positions, errors }
}

/// Seeded rollouts in parallel; rollout `i` uses seed `oracle.seed + i`.
pub fn rollout_p_controller_many(
    trajectory: &[Vec2],
    r: f64,
    pusher_length: f64,
    q0: Vec2,
    cfg: &PControllerConfig,
    oracle: &PushOracleConfig,
    count: usize,
) -> Vec<Rollout> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(oracle.seed.wrapping_add(i as u64));
            rollout_p_controller(trajectory, r, pusher_length, q0, cfg, oracle, &mut rng)
        })
        .collect()
}
