//! End-to-end acceptance checks. Each criterion prints one PASS or FAIL line;
//! the process exits nonzero if any criterion fails.

use caging_core::ball::propagate::euler_step;
use caging_core::ball::*;
use caging_core::oracle::ball::{rollout_ball_many, BallOracleConfig};
use caging_core::oracle::pcontrol::{rollout_p_controller_many, PControllerConfig};
use caging_core::oracle::push::{
    contact_travel, peshkin_delta_beta, rollout_many, rollout_naive, sample_beta0, simulate_push, PushOracleConfig, Rollout,
};
use caging_core::oracle::qp::grid_search;
use caging_core::oracle::sweep::{inversions, linspace, sensitivity_sweep, CatchScenario};
use caging_core::push::{plan_push, pusher_pose, verify_push_plan, PushProblem};
use caging_core::qp::{kkt_violation, solve, CbfClfQP};
use caging_core::trajectory::{circle, lemniscate};
use caging_core::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn mean_error(rs: &[Rollout]) -> f64 {
    rs.iter().map(|r| r.mean_error()).sum::<f64>() / rs.len() as f64
}

fn max_error(rs: &[Rollout]) -> f64 {
    rs.iter().map(|r| r.max_error()).fold(0.0, f64::max)
}

const CAGES: [f64; 4] = [10.0, 20.0, 30.0, 40.0];
const CANDIDATES: [usize; 4] = [16, 32, 64, 128];

struct PushCell {
    cage: f64,
    k: usize,
    planned: bool,
    verified: bool,
    max_error: f64,
    mae: f64,
}

fn push_circle() -> Vec<Vec2> {
    circle(Vec2::ZERO, 150.0, 200)
}

fn push_grid() -> (Vec<PushCell>, Duration) {
    let start = Instant::now();
    let traj = push_circle();
    let mut cells = Vec::new();
    for cage in CAGES {
        for k in CANDIDATES {
            let p = PushProblem::with_defaults(cage, k, traj.clone());
            let plan = plan_push(&p, traj[0]).expect("valid push problem");
            let verified = verify_push_plan(&p, traj[0], &plan.actions).expect("replay").success;
            let rs = rollout_many(&plan.actions, &p, traj[0], &PushOracleConfig::default(), 100);
            cells.push(PushCell {
                cage,
                k,
                planned: plan.result.success,
                verified,
                max_error: max_error(&rs),
                mae: mean_error(&rs),
            });
        }
    }
    (cells, start.elapsed())
}

fn push_containment(cells: &[PushCell], elapsed: Duration) -> Outcome {
    let bad: Vec<String> = cells
        .iter()
        .filter(|c| !(c.planned && c.verified && c.max_error <= c.cage))
        .map(|c| format!("cage {} K {} max {:.2}", c.cage, c.k, c.max_error))
        .collect();
    let worst = cells.iter().map(|c| c.max_error / c.cage).fold(0.0, f64::max);
    outcome(
        bad.is_empty() && elapsed < Duration::from_secs(600),
        format!("16 cells, worst error/cage {worst:.3}, {:.1?}{}", elapsed, if bad.is_empty() { String::new() } else { format!(", failing {bad:?}") }),
    )
}

fn push_trend(cells: &[PushCell]) -> Outcome {
    let mae = |cage: f64, k: usize| cells.iter().find(|c| c.cage == cage && c.k == k).unwrap().mae;
    let mut notes = Vec::new();
    for cage in CAGES {
        if mae(cage, 128) >= mae(cage, 16) {
            notes.push(format!("cage {cage}: K128 {:.2} >= K16 {:.2}", mae(cage, 128), mae(cage, 16)));
        }
    }
    for k in CANDIDATES {
        if mae(40.0, k) <= mae(10.0, k) {
            notes.push(format!("K {k}: cage40 {:.2} <= cage10 {:.2}", mae(40.0, k), mae(10.0, k)));
        }
    }
    let table: Vec<String> = CAGES
        .iter()
        .map(|&c| format!("cage {c}: K16 {:.2} K128 {:.2}", mae(c, 16), mae(c, 128)))
        .collect();
    outcome(notes.is_empty(), format!("{}{}", table.join("; "), if notes.is_empty() { String::new() } else { format!("; violations {notes:?}") }))
}

fn peshkin_bound() -> Outcome {
    let cfg = PushOracleConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (r, d_push) = (25.0, 20.0);
    let mut worst_lat: f64 = f64::NEG_INFINITY;
    let mut worst_len: f64 = f64::NEG_INFINITY;
    let mut runs = 0;
    while runs < 10_000 {
        let pose = pusher_pose(Vec2::ZERO, 45.0, rng.gen_range(0.0..2.0 * PI), 50.0);
        let lateral_offset = rng.gen_range(-40.0..40.0);
        let gap = rng.gen_range(0.0..d_push);
        // an object just out of reach of the pusher's start pose
        let q = pose.center + pose.direction * (r + gap) + pose.direction.perp() * lateral_offset;
        let Some(s0) = contact_travel(q, &pose, r, d_push) else { continue };
        let d_con = d_push - s0;
        let beta0 = sample_beta0(&cfg, &mut rng);
        let Ok(d) = simulate_push(q, &pose, r, d_push, &cfg, beta0, &mut rng) else { continue };
        runs += 1;
        worst_lat = worst_lat.max(d.dot(pose.direction.perp()).abs() - d_con / 2.0);
        worst_len = worst_len.max(d.norm() - d_con);
    }
    let db = peshkin_delta_beta(25.0, 25.0, PI / 2.0, 20.0);
    outcome(
        worst_lat <= 0.1 && worst_len <= 0.1 && (db - 0.4).abs() < 1e-15,
        format!("lateral excess {worst_lat:.4} mm, length excess {worst_len:.4} mm, delta beta {db}"),
    )
}

fn baseline_comparison() -> Outcome {
    let traj = push_circle();
    let oc = PushOracleConfig::default();
    let p = PushProblem::with_defaults(20.0, 128, traj.clone());
    let plan = plan_push(&p, traj[0]).expect("valid push problem");
    let caging = mean_error(&rollout_many(&plan.actions, &p, traj[0], &oc, 20));
    let run = |cfg: PControllerConfig| mean_error(&rollout_p_controller_many(&traj, 25.0, 100.0, traj[0], &cfg, &oc, 20));
    let clean = run(PControllerConfig::default());
    let noisy = run(PControllerConfig { noise_sigma: 10.0, ..Default::default() });
    let lagged = run(PControllerConfig { lag: true, ..Default::default() });
    outcome(
        plan.result.success && clean <= caging && noisy > caging && lagged > caging,
        format!("caging {caging:.2}, P clean {clean:.2}, P noisy {noisy:.2}, P lagged {lagged:.2} mm"),
    )
}

fn naive_failure() -> Outcome {
    let traj = lemniscate(Vec2::ZERO, 150.0, 160, 10);
    let oc = PushOracleConfig::default();
    let cage = 20.0;
    let mut lost = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if rollout_naive(&traj, 25.0, 100.0, traj[0], &oc, &mut rng).max_error() > cage {
            lost += 1;
        }
    }
    let p = PushProblem::with_defaults(cage, 64, traj.clone());
    let plan = plan_push(&p, traj[0]).expect("valid push problem");
    let caging_max = max_error(&rollout_many(&plan.actions, &p, traj[0], &oc, 20));
    outcome(
        lost >= 1 && plan.result.success && caging_max <= cage,
        format!("naive lost {lost}/20 seeds, caging plan max error {caging_max:.2} mm over 10 loops"),
    )
}

fn random_belief(spec: GridSpec, rng: &mut ChaCha8Rng) -> ProbGrid {
    let n = spec.n;
    let mut cells = Vec::new();
    for _ in 0..rng.gen_range(1..30) {
        let mut s = [0.0; 4];
        for i in 0..n {
            s[i] = rng.gen_range(-0.06..0.06);
            s[n + i] = rng.gen_range(-0.5..0.5);
        }
        let index = spec.index_of(&s).unwrap();
        cells.push(Cell { index, prob: rng.gen_range(0.05..1.0), mean: s });
    }
    cells.sort_by_key(|c| c.index);
    cells.dedup_by_key(|c| c.index);
    let mut g = ProbGrid::from_cells(spec, cells);
    g.normalize();
    g
}

fn grid_integrity() -> Outcome {
    let ball = BallParams::tennis();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut calls = 0;
    let mut empty = 0;
    while calls < 1000 {
        let n = if calls % 4 == 3 { 2 } else { 1 };
        let spec = GridSpec::new(n, if n == 1 { 81 } else { 31 }, 0.08, 1.0).unwrap();
        let g = random_belief(spec, &mut rng);
        let tilt: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.3..0.3)).collect();
        let plate = PlateState::flat(n, 0.08).with_tilt(tilt);
        let unc = UncertaintyModel::isotropic(n, rng.gen_range(0.0..0.1), rng.gen_range(0.0..0.3), rng.gen_range(0.0..0.1));
        match propagate_prob(&g, &plate, &ball, &unc, 0.02) {
            Ok((out, _)) => {
                worst = worst.max((out.total() - 1.0).abs());
                if out.support_len() == 0 {
                    empty += 1;
                }
            }
            // every state left the box; not a normalization failure
            Err(_) => continue,
        }
        calls += 1;
    }
    // a zero-noise point mass moves by one explicit Euler step of the mean
    let mut off = 0;
    for _ in 0..200 {
        let spec = GridSpec::new(1, 81, 0.08, 1.0).unwrap();
        let s = [rng.gen_range(-0.05..0.05), rng.gen_range(-0.4..0.4), 0.0, 0.0];
        let plate = PlateState::flat(1, 0.08).with_tilt(vec![rng.gen_range(-0.2..0.2)]);
        let g = ProbGrid::delta(spec, s).unwrap();
        let zero = UncertaintyModel::zero(1);
        let (out, _) = propagate_prob(&g, &plate, &ball, &zero, 0.02).unwrap();
        let a = accel_distribution(&s[1..2], &plate, &ball, &zero).mean;
        let e = euler_step(&g.cells[0].mean, a, 1, 0.02);
        let got = spec.center_of(out.cells[0].index);
        if out.cells.len() != 1 || (got[0] - e[0]).abs() > spec.pos_step() || (got[1] - e[1]).abs() > spec.vel_step() {
            off += 1;
        }
    }
    outcome(
        worst <= 1e-9 && empty == 0 && off == 0,
        format!("{calls} calls, worst |sum - 1| {worst:.1e}, empty {empty}, delta steps off by more than a cell {off}/200"),
    )
}

fn envelope_fraction(n: usize, cells: usize, start: State, tilt: Vec<f64>, seed: u64) -> f64 {
    let spec = GridSpec::new(n, cells, 0.08, 1.0).unwrap();
    let ball = BallParams::tennis();
    let unc = UncertaintyModel::isotropic(n, 0.1, 0.5, 0.2);
    let plate = PlateState::flat(n, 0.08).with_tilt(tilt);
    let g = ProbGrid::delta(spec, start).unwrap();
    let (out, _) = propagate_prob(&g, &plate, &ball, &unc, 0.02).unwrap();
    let support: Vec<[usize; 4]> = out.cells.iter().map(|c| spec.coords_of(c.index)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = 10_000;
    let mut inside = 0;
    for _ in 0..total {
        let noise = NoiseSample::draw(&unc, &mut rng);
        let a = ball_accel(&start[n..2 * n], &plate, &ball, &noise);
        let s = euler_step(&start, a, n, 0.02);
        let Some(idx) = spec.index_of(&s) else { continue };
        let c = spec.coords_of(idx);
        if support.iter().any(|d| (0..2 * n).all(|i| (d[i] as i64 - c[i] as i64).abs() <= 1)) {
            inside += 1;
        }
    }
    inside as f64 / total as f64
}

fn monte_carlo_envelope() -> Outcome {
    let one = envelope_fraction(1, 81, [0.01, 0.3, 0.0, 0.0], vec![0.05], 7);
    let two = envelope_fraction(2, 31, [0.01, -0.02, 0.3, 0.1], vec![0.05, -0.03], 8);
    outcome(one >= 0.999 && two >= 0.999, format!("inside dilated support: one axis {one:.4}, two axes {two:.4}"))
}

fn random_qp(rng: &mut ChaCha8Rng, n: usize) -> CbfClfQP {
    let v = |rng: &mut ChaCha8Rng| (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect::<Vec<f64>>();
    CbfClfQP {
        n,
        lf_h: rng.gen_range(-2.0..1.0),
        lg_h: v(rng),
        alpha_h: rng.gen_range(0.0..1.0),
        lf_v: rng.gen_range(-1.0..2.0),
        lg_v: v(rng),
        c_v: rng.gen_range(0.0..1.0),
        lambda: rng.gen_range(0.1..20.0),
        lo: vec![-1.0; n],
        hi: vec![1.0; n],
    }
}

fn qp_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut worst_gap, mut worst_kkt): (f64, f64) = (0.0, 0.0);
    let mut mismatches = 0;
    let mut infeasible = 0;
    for i in 0..100 {
        let qp = random_qp(&mut rng, 1 + i % 2);
        let s = solve(&qp);
        match grid_search(&qp, 1e-3) {
            Some(g) => {
                let gap = (s.objective - g).abs();
                worst_gap = worst_gap.max(gap);
                if s.feasible {
                    worst_kkt = worst_kkt.max(kkt_violation(&qp, &s));
                }
                if !s.feasible || gap > 1e-4 {
                    mismatches += 1;
                }
            }
            None => {
                infeasible += 1;
                // a feasible sliver thinner than the grid is acceptable only
                // if the solver lands right on the barrier edge
                if s.feasible && qp.barrier_margin(&s.dtheta) > 1e-3 {
                    mismatches += 1;
                }
            }
        }
    }
    outcome(
        mismatches == 0 && worst_kkt <= 1e-8,
        format!("100 programs ({infeasible} infeasible), worst objective gap {worst_gap:.1e}, worst KKT residual {worst_kkt:.1e}"),
    )
}

fn dynamic_task(name: &str, scenario: &BallScenario) -> (bool, String) {
    let problem = scenario.problem().expect("valid scenario");
    let belief = scenario.belief().expect("valid belief");
    let start = Instant::now();
    let plan = dynamic_control(&belief, &problem).expect("planning runs");
    let elapsed = start.elapsed();
    let below = plan.log.records.iter().all(|r| r.energy.as_ref().is_some_and(|e| e.max_e < e.e_max));
    let oracle = rollout_ball_many(&belief, &plan.actions, &problem, &BallOracleConfig::default());
    let pass = plan.result.success
        && below
        && oracle.success_rate == 1.0
        && oracle.max_abs() <= scenario.half_length
        && oracle.mean_abs() <= 0.04
        && elapsed < Duration::from_secs(120);
    (
        pass,
        format!(
            "{name}: planned {}, {} steps, energy below cage {below}, rollouts {:.2}, max |x| {:.1} mm, mean |x| {:.1} mm, {:.1?}",
            plan.result.success,
            problem.trajectory.steps(),
            oracle.success_rate,
            oracle.max_abs() * 1e3,
            oracle.mean_abs() * 1e3,
            elapsed
        ),
    )
}

fn dynamic_end_to_end() -> Outcome {
    let (a, da) = dynamic_task("figure eight", &BallScenario::lemniscate());
    let (b, db) = dynamic_task("letters", &BallScenario::rice());
    outcome(a && b, format!("{da}; {db}"))
}

fn sensitivity() -> Outcome {
    let scenario = CatchScenario::default();
    let spreads = linspace(0.05, 0.5, 10);
    let betas = linspace(2.5, 25.0, 10);
    let v0 = 0.8;
    let table = sensitivity_sweep(&scenario, &[v0], &spreads, &betas, 100, 0).expect("sweep runs");
    let row_inv = betas.iter().map(|&b| inversions(&table.row(v0, b), false)).max().unwrap();
    let col_inv = spreads.iter().map(|&d| inversions(&table.column(v0, d), true)).max().unwrap();
    let anchor = table.cells.iter().find(|c| c.beta_max == 25.0 && c.dv0 == spreads[0]).unwrap().success_rate;
    let first_col: Vec<String> = table.column(v0, spreads[0]).iter().map(|r| format!("{r:.2}")).collect();
    outcome(
        row_inv <= 1 && col_inv <= 1 && anchor == 1.0,
        format!("anchor {anchor:.2}, worst inversions per row {row_inv} and per column {col_inv}, success by bound at the narrowest spread [{}]", first_col.join(" ")),
    )
}

fn two_axis_smoke() -> Outcome {
    let scenario = BallScenario::circle_2d(5.0, 31);
    let problem = scenario.problem().expect("valid scenario");
    let belief = scenario.belief().expect("valid belief");
    let start = Instant::now();
    let plan = dynamic_control(&belief, &problem).expect("planning runs");
    let elapsed = start.elapsed();
    // replay the plan independently and check every belief
    let mut grid = belief.clone();
    let mut tilt = problem.initial_tilt.clone();
    let (mut worst_sum, mut contained) = (0.0f64, true);
    for (t, u) in plan.rates().iter().enumerate() {
        for (a, b) in tilt.iter_mut().zip(u) {
            *a += b * problem.control.dt;
        }
        let plate = problem.plate(&tilt, t + 1);
        grid = propagate_prob(&grid, &plate, &problem.ball, &problem.uncertainty, problem.control.dt).expect("mass stays").0;
        worst_sum = worst_sum.max((grid.total() - 1.0).abs());
        contained &= max_energy(&grid, &plate, &problem.energy) <= e_max(&plate, &problem.energy);
    }
    outcome(
        plan.result.success && worst_sum <= 1e-9 && contained && elapsed < Duration::from_secs(300),
        format!(
            "planned {}, {} steps, worst |sum - 1| {worst_sum:.1e}, energy contained {contained}, {:.1?}",
            plan.result.success,
            plan.actions.len(),
            elapsed
        ),
    )
}

fn step_times() -> Outcome {
    let traj = push_circle();
    let p = PushProblem::with_defaults(20.0, 128, traj.clone());
    let start = Instant::now();
    let plan = plan_push(&p, traj[0]).expect("valid push problem");
    let push_ms = start.elapsed().as_secs_f64() * 1e3 / plan.actions.len().max(1) as f64;
    let scenario = BallScenario::lemniscate();
    let problem = scenario.problem().expect("valid scenario");
    let belief = scenario.belief().expect("valid belief");
    let start = Instant::now();
    let dplan = dynamic_control(&belief, &problem).expect("planning runs");
    let ball_ms = start.elapsed().as_secs_f64() * 1e3 / dplan.actions.len().max(1) as f64;
    outcome(
        push_ms <= 250.0 && ball_ms <= 700.0,
        format!("pushing {push_ms:.2} ms/step, one-axis dynamics {ball_ms:.2} ms/step"),
    )
}

fn main() {
    let (cells, push_elapsed) = push_grid();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("push containment", Box::new(|| push_containment(&cells, push_elapsed))),
        ("tracking error trends", Box::new(|| push_trend(&cells))),
        ("rotation bound", Box::new(peshkin_bound)),
        ("feedback baseline", Box::new(baseline_comparison)),
        ("naive pusher", Box::new(naive_failure)),
        ("probability grid integrity", Box::new(grid_integrity)),
        ("sampled envelope", Box::new(monte_carlo_envelope)),
        ("program exactness", Box::new(qp_exactness)),
        ("dynamic end to end", Box::new(dynamic_end_to_end)),
        ("sensitivity sweep", Box::new(sensitivity)),
        ("two-axis smoke run", Box::new(two_axis_smoke)),
        ("step time", Box::new(step_times)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {:>2} {name}: {} ({})", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
