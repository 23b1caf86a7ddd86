//! Rolling-ball dynamics in the plate frame.

use super::params::{BallParams, PlateState, UncertaintyModel, GRAVITY};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Gravity and plate acceleration resolved along the plate axes, plus their
/// in-plane resultant.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateFrameAccels {
    /// In-plane components first, plate normal last.
    pub gravity: Vec<f64>,
    pub plate: Vec<f64>,
    /// In-plane acceleration driving the ball, one entry per plate axis.
    pub effective: Vec<f64>,
}

/// Each plate axis tilts independently; axis `i` sees gravity plus the
/// vertical plate acceleration through `sin θ_i` and its own horizontal
/// acceleration through `cos θ_i`.
pub fn plate_frame_accels(plate: &PlateState) -> PlateFrameAccels {
    let n = plate.n;
    let az = plate.accel[n];
    let mut gravity = Vec::with_capacity(n + 1);
    let mut accel = Vec::with_capacity(n + 1);
    let mut normal_g = GRAVITY;
    let mut normal_a = az;
    for i in 0..n {
        let (s, c) = plate.tilt[i].sin_cos();
        gravity.push(GRAVITY * s);
        accel.push(plate.accel[i] * c + az * s);
        normal_g *= c;
        normal_a = normal_a * c - plate.accel[i] * s;
    }
    gravity.push(normal_g);
    accel.push(normal_a);
    let effective = (0..n).map(|i| gravity[i] + accel[i]).collect();
    PlateFrameAccels {
        gravity,
        plate: accel,
        effective,
    }
}

/// Mean and covariance of the ball's in-plane acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

/// The cell-independent part of the acceleration model at one plate state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelModel {
    pub n: usize,
    /// Rolling factor times the effective in-plane acceleration.
    pub drive: [f64; 2],
    pub friction: f64,
    pub sigma_mu: f64,
    /// Covariance contributed by mass and plate-acceleration noise.
    pub base_cov: [[f64; 2]; 2],
}

impl AccelModel {
    pub fn new(plate: &PlateState, ball: &BallParams, unc: &UncertaintyModel) -> Self {
        let n = plate.n;
        let k = ball.rolling_factor();
        let fa = plate_frame_accels(plate);
        let mut drive = [0.0; 2];
        for i in 0..n {
            drive[i] = k * fa.effective[i];
        }
        // sensitivity of the drive to plate acceleration noise
        let mut t = [[0.0; 3]; 2];
        for i in 0..n {
            let (s, c) = plate.tilt[i].sin_cos();
            t[i][i] = k * c;
            t[i][n] = k * s;
        }
        let mut base_cov = [[0.0; 2]; 2];
        for i in 0..n {
            for j in 0..n {
                let mut v = unc.sigma_m * unc.sigma_m * drive[i] * drive[j];
                for a in 0..=n {
                    for b in 0..=n {
                        v += t[i][a] * unc.sigma_p[a][b] * t[j][b];
                    }
                }
                base_cov[i][j] = v;
            }
        }
        Self {
            n,
            drive,
            friction: ball.rolling_friction,
            sigma_mu: unc.sigma_mu,
            base_cov,
        }
    }

    pub fn mean(&self, vel: [f64; 2]) -> [f64; 2] {
        let mut m = [0.0; 2];
        for i in 0..self.n {
            m[i] = self.drive[i] - self.friction * vel[i];
        }
        m
    }

    pub fn distribution(&self, vel: [f64; 2]) -> Gaussian {
        let mut cov = self.base_cov;
        let s2 = self.sigma_mu * self.sigma_mu;
        for i in 0..self.n {
            for j in 0..self.n {
                cov[i][j] += s2 * vel[i] * vel[j];
            }
        }
        Gaussian {
            mean: self.mean(vel),
            cov,
        }
    }
}

/// Gaussian over the ball acceleration for a ball moving at `vel` (the
/// position does not enter the dynamics).
pub fn accel_distribution(vel: &[f64], plate: &PlateState, ball: &BallParams, unc: &UncertaintyModel) -> Gaussian {
    let mut v = [0.0; 2];
    v[..plate.n].copy_from_slice(&vel[..plate.n]);
    AccelModel::new(plate, ball, unc).distribution(v)
}

/// One draw of the model errors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NoiseSample {
    /// Relative error of the driving term.
    pub mass: f64,
    /// Additive plate acceleration error, vertical last.
    pub plate: Vec<f64>,
    pub friction: f64,
}

impl NoiseSample {
    /// Draws independent mass, plate and friction errors.
    pub fn draw<R: Rng + ?Sized>(unc: &UncertaintyModel, rng: &mut R) -> Self {
        let l = cholesky(&unc.sigma_p);
        let z: Vec<f64> = (0..l.len()).map(|_| StandardNormal.sample(rng)).collect();
        let plate = (0..l.len())
            .map(|i| (0..=i).map(|j| l[i][j] * z[j]).sum())
            .collect();
        let mass: f64 = StandardNormal.sample(rng);
        let friction: f64 = StandardNormal.sample(rng);
        Self {
            mass: unc.sigma_m * mass,
            plate,
            friction: unc.sigma_mu * friction,
        }
    }
}

/// Lower Cholesky factor of a positive semidefinite matrix; directions with
/// no variance get zero columns.
fn cholesky(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                l[i][i] = s.max(0.0).sqrt();
            } else if l[j][j] > 0.0 {
                l[i][j] = s / l[j][j];
            }
        }
    }
    l
}

/// Exact ball acceleration for given model errors:
/// `k (1 + η_m) a_eff(ẍ_p + η_p) - (μ_r + η_μ) ẋ`.
pub fn ball_accel(vel: &[f64], plate: &PlateState, ball: &BallParams, noise: &NoiseSample) -> [f64; 2] {
    let n = plate.n;
    let mut noisy = plate.clone();
    if !noise.plate.is_empty() {
        for (a, e) in noisy.accel.iter_mut().zip(&noise.plate) {
            *a += e;
        }
    }
    let fa = plate_frame_accels(&noisy);
    let k = ball.rolling_factor() * (1.0 + noise.mass);
    let mut out = [0.0; 2];
    for i in 0..n {
        out[i] = k * fa.effective[i] - (ball.rolling_friction + noise.friction) * vel[i];
    }
    out
}
