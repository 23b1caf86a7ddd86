//! Brute-force reference for the barrier/Lyapunov program.

use crate::qp::CbfClfQP;

fn eval(qp: &CbfClfQP, d: &[f64]) -> Option<f64> {
    if qp.barrier_margin(d) < 0.0 {
        return None;
    }
    // for fixed dθ the best slack is the Lyapunov residual clipped at zero
    let delta = qp.lyapunov_residual(d).max(0.0);
    Some(qp.objective(d, delta))
}

fn scan(qp: &CbfClfQP, lo: &[f64], hi: &[f64], step: f64) -> Option<(f64, Vec<f64>)> {
    let counts: Vec<usize> = (0..qp.n).map(|i| ((hi[i] - lo[i]) / step).round() as usize + 1).collect();
    let at = |i: usize, k: usize| (lo[i] + k as f64 * step).min(hi[i]);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |d: Vec<f64>| {
        if let Some(v) = eval(qp, &d) {
            if best.as_ref().map_or(true, |b| v < b.0) {
                best = Some((v, d));
            }
        }
    };
    if qp.n == 1 {
        for a in 0..counts[0] {
            consider(vec![at(0, a)]);
        }
    } else {
        for a in 0..counts[0] {
            for b in 0..counts[1] {
                consider(vec![at(0, a), at(1, b)]);
            }
        }
    }
    best
}

/// Minimum objective over a grid of tilt rates with spacing `step`, then
/// three zoom rounds around the best point, each ten times finer. The slack is
/// optimal in closed form for each grid point. `None` if no grid point meets
/// the barrier row.
pub fn grid_search(qp: &CbfClfQP, step: f64) -> Option<f64> {
    let mut best = scan(qp, &qp.lo, &qp.hi, step)?;
    let mut s = step;
    for _ in 0..3 {
        let d = &best.1;
        let lo: Vec<f64> = (0..qp.n).map(|i| (d[i] - 8.0 * s).max(qp.lo[i])).collect();
        let hi: Vec<f64> = (0..qp.n).map(|i| (d[i] + 8.0 * s).min(qp.hi[i])).collect();
        s /= 10.0;
        if let Some(b) = scan(qp, &lo, &hi, s) {
            if b.0 <= best.0 {
                best = b;
            }
        }
    }
    Some(best.0)
}
