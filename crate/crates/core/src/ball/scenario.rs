//! Ready-made plate tasks: a plate path, the model around it and the
//! initial belief.

use super::control::{DynamicProblem, PlateTrajectory};
use super::grid::{GridSpec, ProbGrid, State};
use super::params::{BallParams, ControlParams, EnergyModel, UncertaintyModel};
use crate::error::{Error, Result};
use crate::trajectory::{plate_circle, plate_lemniscate, rice_vertices, timed_polyline};
use serde::{Deserialize, Serialize};

/// Motion of the plate center. Lengths in meters, times in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlatePath {
    Stationary { duration_s: f64 },
    Lemniscate { amplitude_m: f64, period_s: f64, loops: usize },
    Circle { radius_m: f64, period_s: f64, duration_s: f64 },
    /// Vertices visited at rest, each segment on a minimum-jerk profile.
    Polyline { vertices: Vec<Vec<f64>>, speed_m_s: f64, min_segment_s: f64, dwell_s: f64 },
}

impl PlatePath {
    pub fn positions(&self, n: usize, dt: f64) -> Result<Vec<Vec<f64>>> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(dt > 0.0) {
            return bad("time step must be positive");
        }
        match self {
            PlatePath::Stationary { duration_s } => {
                let steps = (duration_s / dt).round();
                if !(steps >= 1.0) {
                    return bad("duration must cover at least one step");
                }
                Ok(vec![vec![0.0; n + 1]; steps as usize + 1])
            }
            PlatePath::Lemniscate { amplitude_m, period_s, loops } => {
                if !(*period_s > 0.0) || *loops == 0 {
                    return bad("lemniscate needs a positive period and at least one loop");
                }
                Ok(plate_lemniscate(n, *amplitude_m, *period_s, *loops, dt))
            }
            PlatePath::Circle { radius_m, period_s, duration_s } => {
                if n != 2 {
                    return bad("a circular plate path needs two tilt axes");
                }
                if !(*period_s > 0.0) || !(*duration_s > 0.0) {
                    return bad("circle needs a positive period and duration");
                }
                // repeat the loop until the duration is covered
                let one = plate_circle(*radius_m, *period_s, dt);
                let steps = (duration_s / dt).round() as usize;
                let per = one.len() - 1;
                Ok((0..=steps).map(|i| one[i % per.max(1)].clone()).collect())
            }
            PlatePath::Polyline { vertices, speed_m_s, min_segment_s, dwell_s } => {
                if vertices.iter().any(|v| v.len() != n + 1) {
                    return bad("polyline vertices need one coordinate per tilt axis plus the vertical");
                }
                timed_polyline(vertices, *speed_m_s, *min_segment_s, *dwell_s, dt)
            }
        }
    }
}

/// Everything needed to plan and check one plate task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallScenario {
    pub n: usize,
    pub path: PlatePath,
    pub ball: BallParams,
    pub uncertainty: UncertaintyModel,
    pub control: ControlParams,
    pub k_ve: f64,
    pub half_length: f64,
    pub initial_tilt: Vec<f64>,
    pub grid_cells: usize,
    pub v_max: f64,
    /// Corners of the uniform initial belief.
    pub initial_lo: State,
    pub initial_hi: State,
}

impl BallScenario {
    /// One-axis plate on a figure-eight, ball near the center.
    pub fn lemniscate() -> Self {
        Self::one_axis(PlatePath::Lemniscate {
            amplitude_m: 0.15,
            period_s: 4.0,
            loops: 4,
        })
    }

    /// One-axis plate tracing the illustrative letter outline.
    pub fn rice() -> Self {
        Self::one_axis(PlatePath::Polyline {
            vertices: rice_vertices(),
            speed_m_s: 0.2,
            min_segment_s: 0.3,
            dwell_s: 0.5,
        })
    }

    /// Two-axis plate moving on a horizontal circle.
    pub fn circle_2d(duration_s: f64, grid_cells: usize) -> Self {
        Self {
            n: 2,
            path: PlatePath::Circle {
                radius_m: 0.1,
                period_s: 5.0,
                duration_s,
            },
            uncertainty: UncertaintyModel::isotropic(2, 0.02, 0.05, 0.05),
            initial_tilt: vec![0.0, 0.0],
            grid_cells,
            initial_lo: [-0.008, -0.008, -0.05, -0.05],
            initial_hi: [0.008, 0.008, 0.05, 0.05],
            ..Self::lemniscate()
        }
    }

    /// Level, stationary one-axis plate pre-tilted against a ball that
    /// arrives at `position` with speeds in `speed ± spread / 2`.
    pub fn catching(position: f64, speed: f64, spread: f64) -> Self {
        Self {
            path: PlatePath::Stationary { duration_s: 3.0 },
            initial_tilt: vec![-0.5],
            v_max: 1.5,
            initial_lo: [position - 0.002, speed - spread / 2.0, 0.0, 0.0],
            initial_hi: [position + 0.002, speed + spread / 2.0, 0.0, 0.0],
            ..Self::lemniscate()
        }
    }

    fn one_axis(path: PlatePath) -> Self {
        Self {
            n: 1,
            path,
            ball: BallParams::tennis(),
            uncertainty: UncertaintyModel::isotropic(1, 0.02, 0.05, 0.05),
            control: ControlParams::default(),
            k_ve: 60.0,
            half_length: 0.08,
            initial_tilt: vec![0.0],
            grid_cells: 81,
            v_max: 1.0,
            initial_lo: [-0.004, -0.02, 0.0, 0.0],
            initial_hi: [0.004, 0.02, 0.0, 0.0],
        }
    }

    pub fn problem(&self) -> Result<DynamicProblem> {
        let dt = self.control.dt;
        let problem = DynamicProblem {
            ball: self.ball.clone(),
            uncertainty: self.uncertainty.clone(),
            energy: EnergyModel::new(self.k_ve, &self.ball),
            control: self.control.clone(),
            half_length: self.half_length,
            initial_tilt: self.initial_tilt.clone(),
            trajectory: PlateTrajectory::new(self.n, dt, self.path.positions(self.n, dt)?)?,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.n, self.grid_cells, self.half_length, self.v_max)
    }

    pub fn belief(&self) -> Result<ProbGrid> {
        ProbGrid::uniform_box(self.grid_spec()?, self.initial_lo, self.initial_hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_build() {
        for s in [BallScenario::lemniscate(), BallScenario::rice(), BallScenario::circle_2d(5.0, 31), BallScenario::catching(-0.06, 0.8, 0.05)] {
            let p = s.problem().unwrap();
            assert_eq!(p.n(), s.n);
            assert!(s.belief().unwrap().support_len() > 1);
        }
    }

    #[test]
    fn circle_path_repeats_for_the_duration() {
        let path = PlatePath::Circle { radius_m: 0.1, period_s: 1.0, duration_s: 2.5 };
        let pos = path.positions(2, 0.02).unwrap();
        assert_eq!(pos.len(), 126);
        assert!((pos[50][0] - pos[0][0]).abs() < 1e-12);
        assert!(path.positions(1, 0.02).is_err());
    }

    #[test]
    fn stationary_length() {
        let pos = PlatePath::Stationary { duration_s: 1.0 }.positions(1, 0.02).unwrap();
        assert_eq!(pos.len(), 51);
    }
}
