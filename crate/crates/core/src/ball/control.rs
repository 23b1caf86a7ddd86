//! Open-loop tilt-rate synthesis: an energy barrier keeps every possible ball
//! state below the escape energy while a Lyapunov term pulls the belief
//! toward the plate center.

use super::dynamics::{plate_frame_accels, AccelModel};
use super::energy::{e_max, energy};
use super::grid::{entropy, ProbGrid, State};
use super::params::{BallParams, ControlParams, EnergyModel, PlateState, UncertaintyModel};
use super::propagate::{euler_step, for_each_successor, propagate_prob};
use crate::error::{Error, Result};
use crate::qp::{solve, CbfClfQP};
use crate::runlog::{EnergyRecord, RunLog, RunLogRecord};
use crate::verify::{verify_caging_in_time, Action, ActionSequence, FailureReason, StateSet, VerificationResult};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Lost probability above which a step is flagged in the log.
pub const MASS_LOSS_WARNING: f64 = 1e-3;

/// Plate positions sampled every `dt`, in-plane axes first, vertical last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateTrajectory {
    pub n: usize,
    pub dt: f64,
    pub positions: Vec<Vec<f64>>,
}

impl PlateTrajectory {
    pub fn new(n: usize, dt: f64, positions: Vec<Vec<f64>>) -> Result<Self> {
        if positions.len() < 2 {
            return Err(Error::BadSpec("plate trajectory needs at least two samples".into()));
        }
        if positions.iter().any(|p| p.len() != n + 1) {
            return Err(Error::BadSpec("plate samples must have n + 1 coordinates".into()));
        }
        if !(dt > 0.0) {
            return Err(Error::BadSpec("sample period must be positive".into()));
        }
        Ok(Self { n, dt, positions })
    }

    pub fn stationary(n: usize, dt: f64, steps: usize) -> Self {
        Self {
            n,
            dt,
            positions: vec![vec![0.0; n + 1]; steps + 1],
        }
    }

    /// Number of control steps.
    pub fn steps(&self) -> usize {
        self.positions.len() - 1
    }

    /// Second central difference, taken one sample inward at the ends.
    pub fn accel_at(&self, t: usize) -> Vec<f64> {
        let len = self.positions.len();
        if len < 3 {
            return vec![0.0; self.n + 1];
        }
        let i = t.clamp(1, len - 2);
        let (a, b, c) = (&self.positions[i - 1], &self.positions[i], &self.positions[i + 1]);
        (0..=self.n).map(|k| (a[k] - 2.0 * b[k] + c[k]) / (self.dt * self.dt)).collect()
    }

    pub fn center_at(&self, t: usize) -> [f64; 2] {
        let p = &self.positions[t.min(self.positions.len() - 1)];
        [p[0], if self.n == 2 { p[1] } else { 0.0 }]
    }
}

/// Everything the controller needs besides the initial belief.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicProblem {
    pub ball: BallParams,
    pub uncertainty: UncertaintyModel,
    pub energy: EnergyModel,
    pub control: ControlParams,
    pub half_length: f64,
    pub initial_tilt: Vec<f64>,
    pub trajectory: PlateTrajectory,
}

impl DynamicProblem {
    pub fn n(&self) -> usize {
        self.trajectory.n
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        self.ball.validate()?;
        self.uncertainty.validate(n)?;
        self.control.validate()?;
        if !(self.energy.k_ve > 0.0) || !(self.half_length > 0.0) {
            return Err(Error::InvalidParameter("spring constant and plate size must be positive".into()));
        }
        if self.initial_tilt.len() != n || self.initial_tilt.iter().any(|t| t.abs() >= std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidParameter("initial tilt must have n entries below a quarter turn".into()));
        }
        if (self.trajectory.dt - self.control.dt).abs() > 1e-12 {
            return Err(Error::InvalidParameter("trajectory sample period must equal the control step".into()));
        }
        Ok(())
    }

    pub fn plate(&self, tilt: &[f64], t: usize) -> PlateState {
        PlateState {
            n: self.n(),
            half_length: self.half_length,
            tilt: tilt.to_vec(),
            accel: self.trajectory.accel_at(t),
        }
    }
}

/// Highest energy over the supported cells, evaluated at their mean states.
pub fn max_energy(grid: &ProbGrid, plate: &PlateState, model: &EnergyModel) -> f64 {
    let a = plate_frame_accels(plate).effective;
    let n = grid.n();
    grid.cells
        .iter()
        .map(|c| energy(&c.mean[..n], &c.mean[n..2 * n], &a, model))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn mean_energy(grid: &ProbGrid, plate: &PlateState, model: &EnergyModel) -> f64 {
    let a = plate_frame_accels(plate).effective;
    let n = grid.n();
    grid.cells
        .iter()
        .map(|c| c.prob * energy(&c.mean[..n], &c.mean[n..2 * n], &a, model))
        .sum()
}

/// Barrier: escape energy minus the highest energy in the belief.
pub fn cbf_value(grid: &ProbGrid, plate: &PlateState, model: &EnergyModel) -> f64 {
    e_max(plate, model) - max_energy(grid, plate, model)
}

/// Lyapunov value: expected energy minus weighted entropy.
pub fn clf_value(grid: &ProbGrid, plate: &PlateState, model: &EnergyModel, k_s: f64) -> f64 {
    mean_energy(grid, plate, model) - k_s * entropy(grid)
}

/// Finite-difference Lie derivatives of the barrier and Lyapunov values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LieDerivatives {
    pub lf_h: f64,
    pub lg_h: Vec<f64>,
    pub lf_v: f64,
    pub lg_v: Vec<f64>,
}

/// Plate models along one probed preview.
struct Probe {
    models: Vec<AccelModel>,
    a_eff: Vec<f64>,
    e_max: f64,
}

/// Max and expected energy after the preview under each probe. The first
/// step spreads every cell mean over the acceleration quadrature; later steps
/// follow the mean dynamics.
fn probe_energies(grid: &ProbGrid, probes: &[Probe], model: &EnergyModel, dt: f64) -> Vec<(f64, f64)> {
    let n = grid.n();
    let parts: Vec<Vec<(f64, f64)>> = grid
        .cells
        .par_chunks(256)
        .map(|chunk| {
            let mut acc = vec![(f64::NEG_INFINITY, 0.0); probes.len()];
            for cell in chunk {
                for (k, p) in probes.iter().enumerate() {
                    for_each_successor(&cell.mean, &p.models[0], dt, |w, mut s: State| {
                        for m in &p.models[1..] {
                            let a = m.mean([s[n], if n == 2 { s[n + 1] } else { 0.0 }]);
                            s = euler_step(&s, a, n, dt);
                        }
                        let e = energy(&s[..n], &s[n..2 * n], &p.a_eff, model);
                        acc[k].0 = acc[k].0.max(e);
                        acc[k].1 += cell.prob * w * e;
                    });
                }
            }
            acc
        })
        .collect();
    let mut out = vec![(f64::NEG_INFINITY, 0.0); probes.len()];
    for part in parts {
        for (o, p) in out.iter_mut().zip(part) {
            o.0 = o.0.max(p.0);
            o.1 += p.1;
        }
    }
    out
}

/// Lie derivatives at step `t` by finite differences: the belief's mean
/// states are pushed through the dynamics over the preview horizon after one
/// step at a tilt rate of zero or `±ε` per axis, with the tilt then held, and
/// the barrier and Lyapunov values at the end are differenced over the
/// preview time. Like a gradient
/// with respect to the state, the energy function keeps the current plate's
/// parameters, so the rate acts only through the motion it causes. The
/// entropy part of the drift comes from an actual one-step zero-rate
/// propagation.
pub fn lie_derivatives(grid: &ProbGrid, problem: &DynamicProblem, tilt: &[f64], t: usize) -> Result<LieDerivatives> {
    let n = problem.n();
    let p = &problem.control;
    let horizon = p.horizon.max(1);
    let span = horizon as f64 * p.dt;
    let plate_now = problem.plate(tilt, t);
    let h_now = cbf_value(grid, &plate_now, &problem.energy);
    let s_now = entropy(grid);
    let v_now = mean_energy(grid, &plate_now, &problem.energy) - p.k_s * s_now;
    // the probed rate acts for one step; the tilt it leaves is then held
    let plate_after = |u: &[f64], k: usize| {
        let next: Vec<f64> = tilt.iter().zip(u).map(|(a, b)| a + b * p.dt).collect();
        problem.plate(&next, t + k)
    };
    let mut rates = vec![vec![0.0; n]];
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut u = vec![0.0; n];
            u[i] = sign * p.epsilon;
            rates.push(u);
        }
    }
    let probes: Vec<Probe> = rates
        .iter()
        .map(|u| Probe {
            models: (1..=horizon)
                .map(|k| AccelModel::new(&plate_after(u, k), &problem.ball, &problem.uncertainty))
                .collect(),
            a_eff: plate_frame_accels(&plate_now).effective,
            e_max: e_max(&plate_now, &problem.energy),
        })
        .collect();
    let values = probe_energies(grid, &probes, &problem.energy, p.dt);
    let h = |k: usize| probes[k].e_max - values[k].0;
    let entropy_rate = if p.k_s > 0.0 {
        let (g, _) = propagate_prob(grid, &plate_after(&rates[0], 1), &problem.ball, &problem.uncertainty, p.dt)?;
        (entropy(&g) - s_now) / p.dt
    } else {
        0.0
    };
    let mut out = LieDerivatives {
        lf_h: (h(0) - h_now) / span,
        lg_h: vec![0.0; n],
        lf_v: (values[0].1 - (v_now + p.k_s * s_now)) / span - p.k_s * entropy_rate,
        lg_v: vec![0.0; n],
    };
    for i in 0..n {
        let (plus, minus) = (1 + 2 * i, 2 + 2 * i);
        let scale = 2.0 * p.epsilon * span;
        out.lg_h[i] = (h(plus) - h(minus)) / scale;
        out.lg_v[i] = (values[plus].1 - values[minus].1) / scale;
    }
    Ok(out)
}

/// Tilt-rate box at one step: the rate bounds intersected with the slew
/// bound around the previous rate.
pub fn rate_box(params: &ControlParams, prev: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let slew = params.beta_max * params.dt;
    let lo = prev.iter().map(|u| params.dtheta_min.max(u - slew)).collect();
    let hi = prev.iter().map(|u| params.dtheta_max.min(u + slew)).collect();
    (lo, hi)
}

pub fn rate_feasible(params: &ControlParams, prev: &[f64], u: &[f64]) -> bool {
    let (lo, hi) = rate_box(params, prev);
    u.iter().zip(lo.iter().zip(&hi)).all(|(x, (l, h))| *x >= l - 1e-12 && *x <= h + 1e-12)
}

/// Belief together with the plate attitude it was propagated under.
#[derive(Debug, Clone, PartialEq)]
pub struct BallBelief {
    pub grid: ProbGrid,
    pub tilt: Vec<f64>,
    pub prev_rate: Vec<f64>,
}

impl StateSet for BallBelief {
    fn has_support(&self) -> bool {
        self.grid.has_support()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicPlan {
    pub actions: ActionSequence,
    pub result: VerificationResult,
    pub log: RunLog,
    /// Tilt before each step and after the last.
    pub tilts: Vec<Vec<f64>>,
}

impl DynamicPlan {
    pub fn rates(&self) -> Vec<Vec<f64>> {
        self.actions
            .steps
            .iter()
            .map(|a| match a {
                Action::TiltRate { dtheta } => dtheta.clone(),
                _ => Vec::new(),
            })
            .collect()
    }
}

fn record(t: usize, action: Option<Action>, contained: bool, grid: &ProbGrid, center: [f64; 2], e: EnergyRecord) -> RunLogRecord {
    RunLogRecord {
        t,
        action,
        contained,
        pss_cells: grid.support_len(),
        cage_center: center,
        energy: Some(e),
    }
}

/// Plans tilt rates step by step: at each step a quadratic program picks the
/// smallest rate that keeps the barrier decaying no faster than `γ h`, within
/// the rate and slew bounds, trading the Lyapunov decrease against a slack.
/// Stops at the first infeasible program or the first step whose belief
/// exceeds the escape energy.
pub fn dynamic_control(initial: &ProbGrid, problem: &DynamicProblem) -> Result<DynamicPlan> {
    problem.validate()?;
    if initial.n() != problem.n() {
        return Err(Error::InvalidParameter("belief and plate dimensions differ".into()));
    }
    if !initial.has_support() {
        return Err(Error::EmptyInitialPss);
    }
    let n = problem.n();
    let p = &problem.control;
    let traj = &problem.trajectory;
    let mut grid = initial.clone();
    let mut tilt = problem.initial_tilt.clone();
    let mut prev = vec![0.0; n];
    let mut log = RunLog::default();
    let mut actions = Vec::new();
    let mut tilts = vec![tilt.clone()];

    let plate0 = problem.plate(&tilt, 0);
    let emax0 = e_max(&plate0, &problem.energy);
    let maxe0 = max_energy(&grid, &plate0, &problem.energy);
    let h0 = emax0 - maxe0;
    log.push(record(
        0,
        None,
        h0 >= 0.0,
        &grid,
        traj.center_at(0),
        EnergyRecord {
            e_max: emax0,
            max_e: maxe0,
            h: h0,
            v: clf_value(&grid, &plate0, &problem.energy, p.k_s),
            entropy: entropy(&grid),
            lost_mass: 0.0,
            dtheta: vec![0.0; n],
            mass_loss_warning: false,
        },
    ));
    if h0 < 0.0 {
        return Ok(DynamicPlan {
            actions: ActionSequence::default(),
            result: VerificationResult::failed(0, FailureReason::EscapedCage),
            log,
            tilts,
        });
    }

    for t in 0..traj.steps() {
        let plate = problem.plate(&tilt, t);
        let h = cbf_value(&grid, &plate, &problem.energy);
        let v = clf_value(&grid, &plate, &problem.energy, p.k_s);
        let lie = lie_derivatives(&grid, problem, &tilt, t)?;
        let (lo, hi) = rate_box(p, &prev);
        let qp = CbfClfQP {
            n,
            lf_h: lie.lf_h,
            lg_h: lie.lg_h,
            alpha_h: p.gamma * h,
            lf_v: lie.lf_v,
            lg_v: lie.lg_v,
            c_v: p.c * v,
            lambda: p.lambda,
            lo,
            hi,
        };
        let sol = solve(&qp);
        if !sol.feasible {
            return Ok(DynamicPlan {
                actions: ActionSequence::new(actions),
                result: VerificationResult::failed(t, FailureReason::InfeasibleAction),
                log,
                tilts,
            });
        }
        let u = sol.dtheta;
        for (a, b) in tilt.iter_mut().zip(&u) {
            *a += b * p.dt;
        }
        let next_plate = problem.plate(&tilt, t + 1);
        let (next, lost) = propagate_prob(&grid, &next_plate, &problem.ball, &problem.uncertainty, p.dt)
            .map_err(|e| match e {
                Error::AllMassLost { .. } => Error::AllMassLost { step: t },
                e => e,
            })?;
        grid = next;
        let emax = e_max(&next_plate, &problem.energy);
        let maxe = max_energy(&grid, &next_plate, &problem.energy);
        let contained = maxe <= emax;
        let action = Action::TiltRate { dtheta: u.clone() };
        actions.push(action.clone());
        tilts.push(tilt.clone());
        log.push(record(
            t + 1,
            Some(action),
            contained,
            &grid,
            traj.center_at(t + 1),
            EnergyRecord {
                e_max: emax,
                max_e: maxe,
                h: emax - maxe,
                v: clf_value(&grid, &next_plate, &problem.energy, p.k_s),
                entropy: entropy(&grid),
                lost_mass: lost,
                dtheta: u.clone(),
                mass_loss_warning: lost > MASS_LOSS_WARNING,
            },
        ));
        if !contained {
            return Ok(DynamicPlan {
                actions: ActionSequence::new(actions),
                result: VerificationResult::failed(t, FailureReason::EscapedCage),
                log,
                tilts,
            });
        }
        prev = u;
    }
    Ok(DynamicPlan {
        actions: ActionSequence::new(actions),
        result: VerificationResult::ok(),
        log,
        tilts,
    })
}

/// Beliefs after every step of a rate plan, the initial one first, each
/// paired with the plate it is judged on.
pub fn replay_beliefs(initial: &ProbGrid, problem: &DynamicProblem, rates: &[Vec<f64>]) -> Result<Vec<(ProbGrid, PlateState)>> {
    let mut tilt = problem.initial_tilt.clone();
    let mut out = vec![(initial.clone(), problem.plate(&tilt, 0))];
    for (t, u) in rates.iter().enumerate() {
        for (a, b) in tilt.iter_mut().zip(u) {
            *a += b * problem.control.dt;
        }
        let plate = problem.plate(&tilt, t + 1);
        let (next, _) = propagate_prob(&out[t].0, &plate, &problem.ball, &problem.uncertainty, problem.control.dt)?;
        out.push((next, plate));
    }
    Ok(out)
}

/// Replays a tilt-rate plan through the generic verifier: rates must respect
/// the bounds and every propagated belief must stay below the escape energy.
pub fn verify_dynamic_plan(initial: &ProbGrid, problem: &DynamicProblem, actions: &ActionSequence) -> Result<VerificationResult> {
    problem.validate()?;
    let n = problem.n();
    let start = BallBelief {
        grid: initial.clone(),
        tilt: problem.initial_tilt.clone(),
        prev_rate: vec![0.0; n],
    };
    let rate = |a: &Action| match a {
        Action::TiltRate { dtheta } if dtheta.len() == n => Some(dtheta.clone()),
        _ => None,
    };
    let prevs: Vec<Vec<f64>> = std::iter::once(vec![0.0; n])
        .chain(actions.steps.iter().map(|a| rate(a).unwrap_or_else(|| vec![0.0; n])))
        .collect();
    verify_caging_in_time(
        &start,
        actions,
        |t| t,
        |b: &BallBelief, a, t| {
            let u = rate(a).ok_or_else(|| Error::InvalidParameter("expected a tilt rate".into()))?;
            let tilt: Vec<f64> = b.tilt.iter().zip(&u).map(|(x, r)| x + r * problem.control.dt).collect();
            let plate = problem.plate(&tilt, t + 1);
            let (grid, _) = propagate_prob(&b.grid, &plate, &problem.ball, &problem.uncertainty, problem.control.dt)?;
            Ok(BallBelief { grid, tilt, prev_rate: u })
        },
        |b, &t| {
            let plate = problem.plate(&b.tilt, t);
            max_energy(&b.grid, &plate, &problem.energy) <= e_max(&plate, &problem.energy)
        },
        |a, t| rate(a).is_some_and(|u| rate_feasible(&problem.control, &prevs[t], &u)),
    )
}
