//! Planning-feasibility sweep for catching a rolling ball.

use crate::ball::control::dynamic_control;
use crate::ball::params::{BallParams, ControlParams, UncertaintyModel};
use crate::ball::scenario::{BallScenario, PlatePath};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// A ball arriving on a level, stationary plate, moving toward the far edge.
/// Each trial draws the arrival position and the mean speed from the jitter
/// ranges; the velocity band of width `spread` is centered on that speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CatchScenario {
    pub ball: BallParams,
    pub uncertainty: UncertaintyModel,
    pub control: ControlParams,
    pub k_ve: f64,
    pub half_length: f64,
    /// Tilt held when the ball arrives, leaning against its motion.
    pub initial_tilt: f64,
    pub duration: f64,
    pub grid_cells: usize,
    pub v_max: f64,
    pub arrival_position: f64,
    pub position_width: f64,
    pub position_jitter: f64,
    pub speed_jitter: f64,
}

impl Default for CatchScenario {
    fn default() -> Self {
        Self {
            ball: BallParams::tennis(),
            uncertainty: UncertaintyModel::isotropic(1, 0.02, 0.05, 0.05),
            control: ControlParams::default(),
            k_ve: 60.0,
            half_length: 0.08,
            initial_tilt: -0.5,
            duration: 3.0,
            grid_cells: 81,
            v_max: 1.5,
            arrival_position: -0.06,
            position_width: 0.004,
            position_jitter: 0.005,
            speed_jitter: 0.02,
        }
    }
}

impl CatchScenario {
    /// The task for one arrival.
    pub fn arrival(&self, position: f64, speed: f64, spread: f64, beta_max: f64) -> BallScenario {
        let mut s = BallScenario::catching(position, speed, spread);
        let hw = self.position_width / 2.0;
        s.initial_lo[0] = position - hw;
        s.initial_hi[0] = position + hw;
        s.path = PlatePath::Stationary { duration_s: self.duration };
        s.ball = self.ball.clone();
        s.uncertainty = self.uncertainty.clone();
        s.control = ControlParams { beta_max, ..self.control.clone() };
        s.k_ve = self.k_ve;
        s.half_length = self.half_length;
        s.initial_tilt = vec![self.initial_tilt];
        s.grid_cells = self.grid_cells;
        s.v_max = self.v_max;
        s
    }

    /// Whether one seeded arrival can be caught.
    pub fn trial(&self, speed: f64, spread: f64, beta_max: f64, rng: &mut ChaCha8Rng) -> Result<bool> {
        let dx = rng.gen_range(-1.0..=1.0) * self.position_jitter;
        let dv = rng.gen_range(-1.0..=1.0) * self.speed_jitter;
        let task = self.arrival(self.arrival_position + dx, speed + dv, spread, beta_max);
        let plan = dynamic_control(&task.belief()?, &task.problem()?)?;
        Ok(plan.result.success)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub v0: f64,
    pub dv0: f64,
    pub beta_max: f64,
    pub success_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub cells: Vec<SweepCell>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("v0,dv0,beta_max,success_rate\n");
        for c in &self.cells {
            let _ = writeln!(out, "{},{},{},{}", c.v0, c.dv0, c.beta_max, c.success_rate);
        }
        out
    }

    /// Success rates along increasing `dv0` for one speed and bound.
    pub fn row(&self, v0: f64, beta_max: f64) -> Vec<f64> {
        self.cells
            .iter()
            .filter(|c| c.v0 == v0 && c.beta_max == beta_max)
            .map(|c| c.success_rate)
            .collect()
    }

    /// Success rates along increasing `beta_max` for one speed and spread.
    pub fn column(&self, v0: f64, dv0: f64) -> Vec<f64> {
        let mut cells: Vec<&SweepCell> = self.cells.iter().filter(|c| c.v0 == v0 && c.dv0 == dv0).collect();
        cells.sort_by(|a, b| a.beta_max.total_cmp(&b.beta_max));
        cells.iter().map(|c| c.success_rate).collect()
    }
}

/// Number of places a sequence steps the wrong way.
pub fn inversions(values: &[f64], increasing: bool) -> usize {
    values
        .windows(2)
        .filter(|w| if increasing { w[1] < w[0] } else { w[1] > w[0] })
        .count()
}

/// Planning success rate for every combination of mean speed, velocity
/// spread and rate-change bound. Trial `i` of every cell uses seed
/// `seed + i`, so cells share their arrival draws.
pub fn sensitivity_sweep(
    scenario: &CatchScenario,
    speeds: &[f64],
    spreads: &[f64],
    betas: &[f64],
    trials: usize,
    seed: u64,
) -> Result<SweepTable> {
    if speeds.is_empty() || spreads.is_empty() || betas.is_empty() || trials == 0 {
        return Err(Error::InvalidParameter("sweep grids and trial count must be nonempty".into()));
    }
    let mut jobs = Vec::new();
    for &v0 in speeds {
        for &beta in betas {
            for &dv0 in spreads {
                jobs.push((v0, dv0, beta));
            }
        }
    }
    let cells = jobs
        .into_par_iter()
        .map(|(v0, dv0, beta_max)| {
            let mut wins = 0usize;
            for i in 0..trials {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
                if scenario.trial(v0, dv0, beta_max, &mut rng)? {
                    wins += 1;
                }
            }
            Ok(SweepCell {
                v0,
                dv0,
                beta_max,
                success_rate: wins as f64 / trials as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { cells })
}

/// `count` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inversion_count() {
        assert_eq!(inversions(&[1.0, 1.0, 0.5, 0.0], false), 0);
        assert_eq!(inversions(&[1.0, 0.5, 0.6, 0.0], false), 1);
        assert_eq!(inversions(&[0.0, 0.5, 0.4, 1.0], true), 1);
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(0.05, 0.5, 10);
        assert_eq!(v.len(), 10);
        assert!((v[0] - 0.05).abs() < 1e-15 && (v[9] - 0.5).abs() < 1e-15);
        assert!((v[1] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn csv_header_and_rows() {
        let t = SweepTable {
            cells: vec![SweepCell { v0: 0.8, dv0: 0.05, beta_max: 25.0, success_rate: 1.0 }],
        };
        assert_eq!(t.to_csv(), "v0,dv0,beta_max,success_rate\n0.8,0.05,25,1\n");
    }

    #[test]
    fn empty_grid_is_rejected() {
        assert!(sensitivity_sweep(&CatchScenario::default(), &[], &[0.1], &[1.0], 1, 0).is_err());
    }

    #[test]
    fn no_rate_authority_catches_nothing() {
        let t = sensitivity_sweep(&CatchScenario::default(), &[0.8], &[0.1], &[1e-3], 4, 0).unwrap();
        assert_eq!(t.cells[0].success_rate, 0.0);
    }

    #[test]
    fn nominal_catch_succeeds() {
        let t = sensitivity_sweep(&CatchScenario::default(), &[0.8], &[0.05], &[25.0], 4, 0).unwrap();
        assert_eq!(t.cells[0].success_rate, 1.0);
    }
}
