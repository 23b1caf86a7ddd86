//! TOML run configuration. Every physical quantity carries its unit in the
//! field name; pushing works in millimeters, the plate tasks in meters.

use anyhow::{bail, Context, Result};
use caging_core::ball::{BallScenario, PlatePath, UncertaintyModel};
use caging_core::oracle::push::PushOracleConfig;
use caging_core::oracle::sweep::{linspace, CatchScenario};
use caging_core::push::PushProblem;
use caging_core::trajectory::{circle, lemniscate, parse_vertices, resample_polyline};
use caging_core::Vec2;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Push,
    Ball,
    Sweep,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional; when present it must match the subcommand.
    pub task: Option<Task>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub render: Option<bool>,
    #[serde(default)]
    pub push: PushSection,
    pub trajectory: Option<TrajectorySpec>,
    #[serde(default)]
    pub ball: BallSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub oracle: OracleSection,
}

/// Waypoints for the pushing task, in millimeters.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectorySpec {
    Circle { radius_mm: f64, steps: usize },
    /// `steps` waypoints per loop.
    Lemniscate { amplitude_mm: f64, steps: usize, loops: usize },
    /// CSV of `x,y` vertices in millimeters, resampled at `spacing_mm`.
    Polyline { file: PathBuf, spacing_mm: f64 },
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        TrajectorySpec::Circle { radius_mm: 150.0, steps: 200 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PushSection {
    pub cage_size_mm: f64,
    pub candidates: usize,
    pub object_radius_mm: f64,
    /// Defaults to the smaller of 20 mm and the cage size.
    pub d_push_mm: Option<f64>,
    pub pusher_length_mm: f64,
    pub resolution_mm: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub top_n: usize,
    pub lookahead: bool,
    /// Object start relative to the first waypoint.
    pub initial_offset_mm: [f64; 2],
}

impl Default for PushSection {
    fn default() -> Self {
        Self {
            cage_size_mm: 20.0,
            candidates: 128,
            object_radius_mm: 25.0,
            d_push_mm: None,
            pusher_length_mm: 100.0,
            resolution_mm: 1.0,
            lambda1: 1.0,
            lambda2: 1.0,
            top_n: 5,
            lookahead: true,
            initial_offset_mm: [0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallPreset {
    #[default]
    Lemniscate,
    Letters,
    Circle,
    Catch,
}

/// A plate task preset with optional overrides.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BallSection {
    pub preset: BallPreset,
    /// Vertices for the letters preset: CSV rows of `x,z` in meters.
    pub letters_file: Option<PathBuf>,
    /// Length of the circle and catch runs.
    pub duration_s: Option<f64>,
    pub loops: Option<usize>,
    pub k_ve_n_per_m: Option<f64>,
    pub half_length_m: Option<f64>,
    pub grid_cells: Option<usize>,
    pub v_max_m_s: Option<f64>,
    pub beta_max_rad_s2: Option<f64>,
    pub dtheta_max_rad_s: Option<f64>,
    pub horizon_steps: Option<usize>,
    pub lambda: Option<f64>,
    pub gamma: Option<f64>,
    pub c: Option<f64>,
    pub k_s: Option<f64>,
    pub sigma_m: Option<f64>,
    pub sigma_p_m_s2: Option<f64>,
    pub sigma_mu: Option<f64>,
    pub initial_tilt_rad: Option<Vec<f64>>,
    /// Band `[lo, hi]` of the initial belief, applied to every plate axis.
    pub initial_position_m: Option<[f64; 2]>,
    pub initial_velocity_m_s: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub speeds_m_s: Vec<f64>,
    pub spreads_m_s: Vec<f64>,
    pub betas_rad_s2: Vec<f64>,
    pub trials: usize,
    pub k_ve_n_per_m: Option<f64>,
    pub initial_tilt_rad: Option<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            speeds_m_s: vec![0.8],
            spreads_m_s: linspace(0.05, 0.5, 10),
            betas_rad_s2: linspace(2.5, 25.0, 10),
            trials: 100,
            k_ve_n_per_m: None,
            initial_tilt_rad: None,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    /// Defaults to 100 for pushing and 20 for the plate tasks.
    pub rollouts: Option<usize>,
    pub object_radius_mm: Option<f64>,
    pub contact_min_mm: Option<f64>,
    pub contact_max_mm: Option<f64>,
    pub micro_step_mm: Option<f64>,
    pub substeps: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        // relative files are taken relative to the config
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(TrajectorySpec::Polyline { file, .. }) = &mut cfg.trajectory {
            if file.is_relative() {
                *file = base.join(&*file);
            }
        }
        if let Some(file) = &mut cfg.ball.letters_file {
            if file.is_relative() {
                *file = base.join(&*file);
            }
        }
        Ok(cfg)
    }

    pub fn check_task(&self, task: Task) -> Result<()> {
        match self.task {
            Some(t) if t != task => bail!("config is for the {t:?} task, not {task:?}"),
            _ => Ok(()),
        }
    }
}

fn read_vertices(file: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(file).with_context(|| format!("reading vertices {}", file.display()))?;
    parse_vertices(&text).with_context(|| format!("parsing vertices {}", file.display()))
}

/// Waypoints of the pushing task.
pub fn waypoints(spec: &TrajectorySpec) -> Result<Vec<Vec2>> {
    let pts = match spec {
        TrajectorySpec::Circle { radius_mm, steps } => {
            if *steps < 2 || !(*radius_mm > 0.0) {
                bail!("circle needs a positive radius and at least two steps");
            }
            circle(Vec2::ZERO, *radius_mm, *steps)
        }
        TrajectorySpec::Lemniscate { amplitude_mm, steps, loops } => {
            if *steps < 2 || *loops == 0 || !(*amplitude_mm > 0.0) {
                bail!("lemniscate needs a positive amplitude, at least two steps and one loop");
            }
            lemniscate(Vec2::ZERO, *amplitude_mm, *steps, *loops)
        }
        TrajectorySpec::Polyline { file, spacing_mm } => {
            let rows = read_vertices(file)?;
            if rows[0].len() != 2 {
                bail!("polyline file {} must have two columns", file.display());
            }
            let v: Vec<Vec2> = rows.iter().map(|r| Vec2::new(r[0], r[1])).collect();
            resample_polyline(&v, *spacing_mm)?
        }
    };
    if pts.len() < 2 {
        bail!("trajectory must have at least two waypoints");
    }
    Ok(pts)
}

pub fn push_problem(cfg: &RunConfig) -> Result<(PushProblem, Vec2)> {
    let s = &cfg.push;
    let traj = waypoints(&cfg.trajectory.clone().unwrap_or_default())?;
    let mut p = PushProblem::with_defaults(s.cage_size_mm, s.candidates, traj);
    p.object_radius = s.object_radius_mm;
    p.d_push = s.d_push_mm.unwrap_or(p.d_push);
    p.pusher_length = s.pusher_length_mm;
    p.resolution = s.resolution_mm;
    p.lambda1 = s.lambda1;
    p.lambda2 = s.lambda2;
    p.top_n = s.top_n;
    p.lookahead = s.lookahead;
    p.validate()?;
    let start = p.trajectory[0] + Vec2::new(s.initial_offset_mm[0], s.initial_offset_mm[1]);
    Ok((p, start))
}

pub fn push_oracle(cfg: &RunConfig, seed: u64) -> PushOracleConfig {
    let o = &cfg.oracle;
    let d = PushOracleConfig::default();
    PushOracleConfig {
        a: o.object_radius_mm.unwrap_or(d.a),
        c_min: o.contact_min_mm.unwrap_or(d.c_min),
        c_max: o.contact_max_mm.unwrap_or(d.c_max),
        micro_step: o.micro_step_mm.unwrap_or(d.micro_step),
        seed,
        ..d
    }
}

pub fn ball_scenario(cfg: &RunConfig) -> Result<BallScenario> {
    let b = &cfg.ball;
    let mut s = match b.preset {
        BallPreset::Lemniscate => BallScenario::lemniscate(),
        BallPreset::Letters => BallScenario::rice(),
        BallPreset::Circle => BallScenario::circle_2d(b.duration_s.unwrap_or(5.0), b.grid_cells.unwrap_or(31)),
        BallPreset::Catch => BallScenario::catching(-0.06, 0.8, 0.05),
    };
    match (&mut s.path, b.preset) {
        (PlatePath::Lemniscate { loops, .. }, _) => *loops = b.loops.unwrap_or(*loops),
        (PlatePath::Polyline { vertices, .. }, _) => {
            if let Some(file) = &b.letters_file {
                *vertices = read_vertices(file)?;
            }
        }
        (PlatePath::Stationary { duration_s }, _) => *duration_s = b.duration_s.unwrap_or(*duration_s),
        _ => {}
    }
    let n = s.n;
    s.k_ve = b.k_ve_n_per_m.unwrap_or(s.k_ve);
    s.half_length = b.half_length_m.unwrap_or(s.half_length);
    s.grid_cells = b.grid_cells.unwrap_or(s.grid_cells);
    s.v_max = b.v_max_m_s.unwrap_or(s.v_max);
    let c = &mut s.control;
    c.beta_max = b.beta_max_rad_s2.unwrap_or(c.beta_max);
    if let Some(m) = b.dtheta_max_rad_s {
        c.dtheta_min = -m;
        c.dtheta_max = m;
    }
    c.horizon = b.horizon_steps.unwrap_or(c.horizon);
    c.lambda = b.lambda.unwrap_or(c.lambda);
    c.gamma = b.gamma.unwrap_or(c.gamma);
    c.c = b.c.unwrap_or(c.c);
    c.k_s = b.k_s.unwrap_or(c.k_s);
    if b.sigma_m.is_some() || b.sigma_p_m_s2.is_some() || b.sigma_mu.is_some() {
        let sp = s.uncertainty.sigma_p[0][0].sqrt();
        s.uncertainty = UncertaintyModel::isotropic(
            n,
            b.sigma_m.unwrap_or(s.uncertainty.sigma_m),
            b.sigma_p_m_s2.unwrap_or(sp),
            b.sigma_mu.unwrap_or(s.uncertainty.sigma_mu),
        );
    }
    if let Some(t) = &b.initial_tilt_rad {
        s.initial_tilt = t.clone();
    }
    if let Some([lo, hi]) = b.initial_position_m {
        for i in 0..n {
            s.initial_lo[i] = lo;
            s.initial_hi[i] = hi;
        }
    }
    if let Some([lo, hi]) = b.initial_velocity_m_s {
        for i in 0..n {
            s.initial_lo[n + i] = lo;
            s.initial_hi[n + i] = hi;
        }
    }
    // surface parameter errors now rather than after outputs exist
    s.problem()?;
    s.belief()?;
    Ok(s)
}

pub fn catch_scenario(cfg: &RunConfig) -> CatchScenario {
    let mut c = CatchScenario::default();
    c.k_ve = cfg.sweep.k_ve_n_per_m.unwrap_or(c.k_ve);
    c.initial_tilt = cfg.sweep.initial_tilt_rad.unwrap_or(c.initial_tilt);
    c
}
