//! One step of probability-grid propagation under Gaussian acceleration
//! uncertainty.

use super::dynamics::{AccelModel, Gaussian};
use super::grid::{Cell, ProbGrid, State};
use super::params::{BallParams, PlateState, UncertaintyModel};
use crate::error::{Error, Result};
use rayon::prelude::*;

/// Cells with less than this fraction of the peak probability are dropped.
pub const PRUNE_FRACTION: f64 = 1e-3;

const NODES: [f64; 7] = [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
const CHUNK: usize = 2048;

fn node_weights() -> [f64; 7] {
    let mut w = NODES.map(|z| (-0.5 * z * z).exp());
    let s: f64 = w.iter().sum();
    for v in &mut w {
        *v /= s;
    }
    w
}

/// Deterministic quadrature of a Gaussian: seven nodes per dimension at
/// integer standard deviations, collapsed where the spread is zero.
pub fn quadrature(g: &Gaussian, n: usize) -> Vec<([f64; 2], f64)> {
    let w = node_weights();
    let l11 = g.cov[0][0].max(0.0).sqrt();
    let axis = |active: bool| -> Vec<(f64, f64)> {
        if active {
            NODES.iter().copied().zip(w.iter().copied()).collect()
        } else {
            vec![(0.0, 1.0)]
        }
    };
    if n == 1 {
        return axis(l11 > 0.0)
            .into_iter()
            .map(|(z, p)| ([g.mean[0] + l11 * z, 0.0], p))
            .collect();
    }
    let l21 = if l11 > 0.0 { g.cov[1][0] / l11 } else { 0.0 };
    let l22 = (g.cov[1][1] - l21 * l21).max(0.0).sqrt();
    let mut out = Vec::new();
    for (z1, p1) in axis(l11 > 0.0 || l21 != 0.0) {
        for (z2, p2) in axis(l22 > 0.0) {
            out.push(([g.mean[0] + l11 * z1, g.mean[1] + l21 * z1 + l22 * z2], p1 * p2));
        }
    }
    out
}

/// One explicit Euler step of a state under acceleration `a`.
pub fn euler_step(s: &State, a: [f64; 2], n: usize, dt: f64) -> State {
    let mut out = [0.0; 4];
    for i in 0..n {
        out[i] = s[i] + s[n + i] * dt;
        out[n + i] = s[n + i] + a[i] * dt;
    }
    out
}

/// Calls `f(weight, successor)` for every quadrature successor of `s`.
pub fn for_each_successor(s: &State, model: &AccelModel, dt: f64, mut f: impl FnMut(f64, State)) {
    let n = model.n;
    let vel = [s[n], if n == 2 { s[n + 1] } else { 0.0 }];
    for (a, w) in quadrature(&model.distribution(vel), n) {
        f(w, euler_step(s, a, n, dt));
    }
}

struct Deposit {
    index: usize,
    prob: f64,
    moment: State,
}

fn merge(mut v: Vec<Deposit>) -> Vec<Deposit> {
    v.sort_by_key(|d| d.index);
    let mut out: Vec<Deposit> = Vec::with_capacity(v.len() / 4 + 1);
    for d in v {
        match out.last_mut() {
            Some(last) if last.index == d.index => {
                last.prob += d.prob;
                for k in 0..4 {
                    last.moment[k] += d.moment[k];
                }
            }
            _ => out.push(d),
        }
    }
    out
}

/// Advances the grid by `dt` on a plate whose tilt has already been stepped.
/// Each cell carries the mean continuous state of the mass it holds, so the
/// nearest-cell rule applies to the successors of that mean. Returns the
/// renormalized grid and the probability that left the state box.
pub fn propagate_prob(
    grid: &ProbGrid,
    plate: &PlateState,
    ball: &BallParams,
    unc: &UncertaintyModel,
    dt: f64,
) -> Result<(ProbGrid, f64)> {
    let spec = grid.spec;
    let model = AccelModel::new(plate, ball, unc);
    let chunks: Vec<(Vec<Deposit>, f64)> = grid
        .cells
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut deposits = Vec::with_capacity(chunk.len() * 7);
            let mut lost = 0.0;
            for cell in chunk {
                for_each_successor(&cell.mean, &model, dt, |w, s| {
                    let p = cell.prob * w;
                    match spec.index_of(&s) {
                        Some(index) => deposits.push(Deposit {
                            index,
                            prob: p,
                            moment: s.map(|x| x * p),
                        }),
                        None => lost += p,
                    }
                });
            }
            (merge(deposits), lost)
        })
        .collect();
    let total_in = grid.total();
    let mut lost = 0.0;
    let mut all = Vec::new();
    for (d, l) in chunks {
        lost += l;
        all.extend(d);
    }
    let merged = merge(all);
    let lost_fraction = if total_in > 0.0 { (lost / total_in).min(1.0) } else { 1.0 };
    let peak = merged.iter().map(|d| d.prob).fold(0.0, f64::max);
    if peak <= 0.0 {
        return Err(Error::AllMassLost { step: 0 });
    }
    let cells = merged
        .into_iter()
        .filter(|d| d.prob >= PRUNE_FRACTION * peak)
        .map(|d| Cell {
            index: d.index,
            prob: d.prob,
            mean: d.moment.map(|x| x / d.prob),
        })
        .collect();
    let mut out = ProbGrid { spec, cells };
    out.normalize();
    Ok((out, lost_fraction))
}
