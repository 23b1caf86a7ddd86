//! Exact solver for the small barrier/Lyapunov quadratic program
//!
//! ```text
//! min |dθ|² + λ δ²
//! s.t. Lf_h + Lg_h·dθ + α_h >= 0
//!      Lf_V + Lg_V·dθ + cV <= δ
//!      lo <= dθ <= hi
//! ```
//!
//! by enumerating active sets.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CbfClfQP {
    pub n: usize,
    pub lf_h: f64,
    pub lg_h: Vec<f64>,
    /// Class-K term, `γ h`.
    pub alpha_h: f64,
    pub lf_v: f64,
    pub lg_v: Vec<f64>,
    /// Decay term, `c V`.
    pub c_v: f64,
    pub lambda: f64,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QPSolution {
    pub dtheta: Vec<f64>,
    pub delta: f64,
    pub objective: f64,
    pub feasible: bool,
    /// Multipliers in constraint order: barrier, Lyapunov, upper bounds,
    /// lower bounds.
    pub multipliers: Vec<f64>,
}

/// Constraint rows `a·z <= b` over `z = (dθ, δ)`.
struct Rows {
    a: Vec<[f64; 3]>,
    b: Vec<f64>,
}

impl CbfClfQP {
    fn vars(&self) -> usize {
        self.n + 1
    }

    fn rows(&self) -> Rows {
        let n = self.n;
        let mut a = Vec::with_capacity(2 + 2 * n);
        let mut b = Vec::with_capacity(2 + 2 * n);
        let mut r = [0.0; 3];
        for i in 0..n {
            r[i] = -self.lg_h[i];
        }
        a.push(r);
        b.push(self.lf_h + self.alpha_h);
        let mut r = [0.0; 3];
        for i in 0..n {
            r[i] = self.lg_v[i];
        }
        r[n] = -1.0;
        a.push(r);
        b.push(-(self.lf_v + self.c_v));
        for i in 0..n {
            let mut r = [0.0; 3];
            r[i] = 1.0;
            a.push(r);
            b.push(self.hi[i]);
        }
        for i in 0..n {
            let mut r = [0.0; 3];
            r[i] = -1.0;
            a.push(r);
            b.push(-self.lo[i]);
        }
        Rows { a, b }
    }

    /// Diagonal of the objective Hessian `H` in `½ zᵀ H z`.
    fn hessian(&self) -> [f64; 3] {
        let mut h = [2.0; 3];
        h[self.n] = 2.0 * self.lambda;
        h
    }

    pub fn objective(&self, dtheta: &[f64], delta: f64) -> f64 {
        dtheta.iter().map(|x| x * x).sum::<f64>() + self.lambda * delta * delta
    }

    /// Barrier value `Lf_h + Lg_h·dθ + α_h`; non-negative when satisfied.
    pub fn barrier_margin(&self, dtheta: &[f64]) -> f64 {
        self.lf_h + self.alpha_h + dot(&self.lg_h, dtheta)
    }

    /// Smallest slack that satisfies the Lyapunov row at `dθ`.
    pub fn lyapunov_residual(&self, dtheta: &[f64]) -> f64 {
        self.lf_v + self.c_v + dot(&self.lg_v, dtheta)
    }

    /// Box point with the largest barrier margin.
    fn best_barrier_point(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| if self.lg_h[i] >= 0.0 { self.hi[i] } else { self.lo[i] })
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves the square system `m x = rhs` by Gaussian elimination with partial
/// pivoting; `None` when singular.
fn solve_dense(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let k = rhs.len();
    let scale = m.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..k {
            let f = m[r][col] / m[col][col];
            for c in col..k {
                m[r][c] -= f * m[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|c| m[r][c] * x[c]).sum();
        x[r] = (rhs[r] - s) / m[r][r];
    }
    Some(x)
}

/// Feasibility slack for one row, relative to its scale.
fn row_tol(a: &[f64; 3], b: f64, z: &[f64; 3]) -> f64 {
    let s = a.iter().zip(z).map(|(x, y)| (x * y).abs()).sum::<f64>();
    1e-9 * (1.0 + b.abs() + s)
}

/// Global optimum of the program. When the barrier row cannot be met inside
/// the box, returns the box point of largest barrier margin with
/// `feasible = false`.
pub fn solve(qp: &CbfClfQP) -> QPSolution {
    let m = qp.vars();
    let rows = qp.rows();
    let h = qp.hessian();
    let count = rows.a.len();
    let best_point = qp.best_barrier_point();
    if qp.barrier_margin(&best_point) < -1e-12 * (1.0 + qp.lf_h.abs() + qp.alpha_h.abs()) {
        let delta = qp.lyapunov_residual(&best_point).max(0.0);
        return QPSolution {
            objective: qp.objective(&best_point, delta),
            dtheta: best_point,
            delta,
            feasible: false,
            multipliers: vec![0.0; count],
        };
    }
    let mut best: Option<(f64, [f64; 3], Vec<f64>)> = None;
    for mask in 0u32..(1 << count) {
        let active: Vec<usize> = (0..count).filter(|i| mask & (1 << i) != 0).collect();
        if active.len() > m {
            continue;
        }
        if active.iter().any(|&i| rows.a[i][..m].iter().all(|v| *v == 0.0)) {
            continue;
        }
        // z = -H⁻¹ Aᵀ μ with A H⁻¹ Aᵀ μ = -b on the active rows
        let mu = if active.is_empty() {
            Vec::new()
        } else {
            let gram: Vec<Vec<f64>> = active
                .iter()
                .map(|&i| {
                    active
                        .iter()
                        .map(|&j| (0..m).map(|v| rows.a[i][v] * rows.a[j][v] / h[v]).sum())
                        .collect()
                })
                .collect();
            let rhs = active.iter().map(|&i| -rows.b[i]).collect();
            match solve_dense(gram, rhs) {
                Some(mu) => mu,
                None => continue,
            }
        };
        if mu.iter().any(|&v| v < -1e-12) {
            continue;
        }
        let mut z = [0.0; 3];
        for v in 0..m {
            z[v] = -active.iter().zip(&mu).map(|(&i, u)| rows.a[i][v] * u).sum::<f64>() / h[v];
        }
        let feasible = (0..count).all(|i| dot(&rows.a[i][..m], &z[..m]) - rows.b[i] <= row_tol(&rows.a[i], rows.b[i], &z));
        if !feasible {
            continue;
        }
        let obj = qp.objective(&z[..qp.n], z[qp.n]);
        if best.as_ref().map_or(true, |b| obj < b.0) {
            let mut full = vec![0.0; count];
            for (&i, u) in active.iter().zip(&mu) {
                full[i] = u.max(0.0);
            }
            best = Some((obj, z, full));
        }
    }
    let (objective, z, multipliers) = best.expect("a strictly convex feasible program has a KKT point");
    QPSolution {
        dtheta: z[..qp.n].to_vec(),
        delta: z[qp.n],
        objective,
        feasible: true,
        multipliers,
    }
}

/// Largest violation of the optimality conditions: stationarity, primal and
/// dual feasibility and complementary slackness, each scaled to the problem.
pub fn kkt_violation(qp: &CbfClfQP, sol: &QPSolution) -> f64 {
    let m = qp.vars();
    let rows = qp.rows();
    let h = qp.hessian();
    let mut z = [0.0; 3];
    z[..qp.n].copy_from_slice(&sol.dtheta);
    z[qp.n] = sol.delta;
    let mut worst = 0.0f64;
    for v in 0..m {
        let g = h[v] * z[v] + (0..rows.a.len()).map(|i| rows.a[i][v] * sol.multipliers[i]).sum::<f64>();
        let scale = 1.0 + h[v] * z[v].abs();
        worst = worst.max(g.abs() / scale);
    }
    for i in 0..rows.a.len() {
        let slack = rows.b[i] - dot(&rows.a[i][..m], &z[..m]);
        let scale = 1.0 + rows.b[i].abs() + rows.a[i].iter().zip(&z).map(|(x, y)| (x * y).abs()).sum::<f64>();
        worst = worst.max((-slack).max(0.0) / scale);
        worst = worst.max((-sol.multipliers[i]).max(0.0));
        worst = worst.max((sol.multipliers[i] * slack).abs() / scale);
    }
    worst
}
