//! Plan, verify, check against the oracle and write the artifacts.

use crate::config::{ball_scenario, catch_scenario, push_oracle, push_problem, RunConfig, Task};
use crate::render::{render_ball_frame, render_push_frame};
use anyhow::{Context, Result};
use caging_core::ball::{dynamic_control, replay_beliefs, verify_dynamic_plan};
use caging_core::oracle::ball::{rollout_ball_many, BallOracleConfig};
use caging_core::oracle::push::rollout_many;
use caging_core::oracle::sweep::sensitivity_sweep;
use caging_core::push::{cage_at, plan_push, pusher_pose, verify_push_plan};
use caging_core::Action;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    PlanningFailed,
    OracleFailed,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::PlanningFailed => 2,
            Status::OracleFailed => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    pub seed: u64,
    pub out: PathBuf,
    pub render: bool,
    pub trials: Option<usize>,
}

impl Options {
    /// Command-line values win over the config file.
    pub fn resolve(cfg: &RunConfig, seed: Option<u64>, out: Option<PathBuf>, render: bool, trials: Option<usize>) -> Self {
        Self {
            seed: seed.or(cfg.seed).unwrap_or(0),
            out: out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out")),
            render: render || cfg.render.unwrap_or(false),
            trials,
        }
    }
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn prepare(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn frames_dir(out: &Path) -> Result<PathBuf> {
    let dir = out.join("frames");
    prepare(&dir)?;
    Ok(dir)
}

fn frame_path(dir: &Path, t: usize) -> PathBuf {
    dir.join(format!("step_{t:05}.pgm"))
}

#[derive(Serialize)]
struct PushPlanFile<'a> {
    task: &'static str,
    result: &'a caging_core::VerificationResult,
    verified: bool,
    steps: Vec<caging_core::push::PlanStep>,
}

#[derive(Serialize)]
struct BallPlanFile<'a> {
    task: &'static str,
    result: &'a caging_core::VerificationResult,
    verified: bool,
    rates: Vec<Vec<f64>>,
    tilts: &'a [Vec<f64>],
}

/// Pushing along the configured waypoints. With `oracle` off only the plan,
/// log and (if asked) frames are written.
pub fn run_push(cfg: &RunConfig, opts: &Options, oracle: bool) -> Result<Status> {
    cfg.check_task(Task::Push)?;
    let (problem, start) = push_problem(cfg)?;
    let plan = plan_push(&problem, start)?;
    let verified = plan.result.success && verify_push_plan(&problem, start, &plan.actions)?.success;
    prepare(&opts.out)?;
    let file = PushPlanFile {
        task: "push",
        result: &plan.result,
        verified,
        steps: plan.steps(),
    };
    write(&opts.out.join("plan.json"), serde_json::to_string_pretty(&file)?)?;
    write(&opts.out.join("runlog.jsonl"), plan.log.to_jsonl())?;
    if opts.render {
        let dir = frames_dir(&opts.out)?;
        for (t, pss) in plan.pss_history.iter().enumerate() {
            let cage = cage_at(&problem, t);
            let pose = t
                .checked_sub(1)
                .and_then(|i| plan.actions.steps.get(i))
                .and_then(Action::push_angle)
                .map(|theta| pusher_pose(cage.center, problem.outer_radius(), theta, problem.pusher_length / 2.0).advanced(problem.d_push));
            let img = render_push_frame(pss, problem.object_radius, &cage, pose.as_ref());
            write(&frame_path(&dir, t), img.to_pgm())?;
        }
    }
    println!("push: planned {} verified {} over {} steps", plan.result.success, verified, plan.actions.len());
    if !verified {
        return Ok(Status::PlanningFailed);
    }
    if !oracle {
        return Ok(Status::Success);
    }
    let count = opts.trials.or(cfg.oracle.rollouts).unwrap_or(100);
    let rollouts = rollout_many(&plan.actions, &problem, start, &push_oracle(cfg, opts.seed), count);
    let mut summary = String::from("rollout,max_error_mm,mean_error_mm,contained\n");
    let mut trace = String::from("rollout,t,x,y\n");
    let mut contained_all = true;
    for (i, r) in rollouts.iter().enumerate() {
        let ok = r.max_error() <= problem.cage_size;
        contained_all &= ok;
        let _ = writeln!(summary, "{i},{},{},{ok}", r.max_error(), r.mean_error());
        for (t, p) in r.positions.iter().enumerate() {
            let _ = writeln!(trace, "{i},{t},{},{}", p.x, p.y);
        }
    }
    write(&opts.out.join("oracle.csv"), summary)?;
    write(&opts.out.join("trace.csv"), trace)?;
    let worst = rollouts.iter().map(|r| r.max_error()).fold(0.0, f64::max);
    println!("push oracle: {count} rollouts, worst error {worst:.2} mm against a {} mm cage", problem.cage_size);
    Ok(if contained_all { Status::Success } else { Status::OracleFailed })
}

/// A plate task from the configured preset.
pub fn run_ball(cfg: &RunConfig, opts: &Options, oracle: bool) -> Result<Status> {
    cfg.check_task(Task::Ball)?;
    let scenario = ball_scenario(cfg)?;
    let problem = scenario.problem()?;
    let belief = scenario.belief()?;
    let plan = dynamic_control(&belief, &problem)?;
    let verified = plan.result.success && verify_dynamic_plan(&belief, &problem, &plan.actions)?.success;
    prepare(&opts.out)?;
    let file = BallPlanFile {
        task: "ball",
        result: &plan.result,
        verified,
        rates: plan.rates(),
        tilts: &plan.tilts,
    };
    write(&opts.out.join("plan.json"), serde_json::to_string_pretty(&file)?)?;
    write(&opts.out.join("runlog.jsonl"), plan.log.to_jsonl())?;
    if opts.render {
        let dir = frames_dir(&opts.out)?;
        for (t, (grid, plate)) in replay_beliefs(&belief, &problem, &plan.rates())?.iter().enumerate() {
            write(&frame_path(&dir, t), render_ball_frame(grid, plate, &problem.energy).to_pgm())?;
        }
    }
    println!("ball: planned {} verified {} over {} steps", plan.result.success, verified, plan.actions.len());
    if !verified {
        return Ok(Status::PlanningFailed);
    }
    if !oracle {
        return Ok(Status::Success);
    }
    let ocfg = BallOracleConfig {
        trials: opts.trials.or(cfg.oracle.rollouts).unwrap_or(20),
        seed: opts.seed,
        substeps: cfg.oracle.substeps.unwrap_or(BallOracleConfig::default().substeps),
    };
    let summary = rollout_ball_many(&belief, &plan.actions, &problem, &ocfg);
    let n = problem.n();
    let mut table = String::from("rollout,max_abs_m,mean_abs_m,success\n");
    let mut trace = String::from(if n == 1 { "rollout,t,x\n" } else { "rollout,t,x,y\n" });
    for (i, r) in summary.rollouts.iter().enumerate() {
        let _ = writeln!(table, "{i},{},{},{}", r.max_abs, r.mean_abs, r.success);
        for (t, p) in r.positions.iter().enumerate() {
            let time = t as f64 * problem.control.dt;
            let _ = if n == 1 { writeln!(trace, "{i},{time},{}", p[0]) } else { writeln!(trace, "{i},{time},{},{}", p[0], p[1]) };
        }
    }
    write(&opts.out.join("oracle.csv"), table)?;
    write(&opts.out.join("trace.csv"), trace)?;
    println!(
        "ball oracle: {} rollouts, success rate {:.2}, max |x| {:.4} m, mean |x| {:.4} m",
        ocfg.trials,
        summary.success_rate,
        summary.max_abs(),
        summary.mean_abs()
    );
    Ok(if summary.success_rate == 1.0 { Status::Success } else { Status::OracleFailed })
}

/// Planning success over a grid of catching arrivals.
pub fn run_sweep(cfg: &RunConfig, opts: &Options) -> Result<Status> {
    cfg.check_task(Task::Sweep)?;
    let s = &cfg.sweep;
    let trials = opts.trials.unwrap_or(s.trials);
    let table = sensitivity_sweep(&catch_scenario(cfg), &s.speeds_m_s, &s.spreads_m_s, &s.betas_rad_s2, trials, opts.seed)?;
    prepare(&opts.out)?;
    write(&opts.out.join("sweep.csv"), table.to_csv())?;
    println!("sweep: {} cells, {trials} trials each", table.cells.len());
    Ok(Status::Success)
}

/// Frames only: plans the configured task (pushing unless the config says
/// otherwise) and renders every step.
pub fn run_render(cfg: &RunConfig, opts: &Options) -> Result<Status> {
    let opts = Options { render: true, ..opts.clone() };
    match cfg.task.unwrap_or(Task::Push) {
        Task::Push => run_push(cfg, &opts, false),
        Task::Ball => run_ball(cfg, &opts, false),
        Task::Sweep => anyhow::bail!("a sweep has no frames to render"),
    }
}
