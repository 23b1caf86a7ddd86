//! Parameters of the ball-on-plate task. SI units throughout.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallParams {
    pub mass: f64,
    pub radius: f64,
    pub inertia: f64,
    /// Viscous rolling resistance, 1/s.
    pub rolling_friction: f64,
}

impl BallParams {
    /// Tennis ball modeled as a thin hollow sphere.
    pub fn tennis() -> Self {
        let (mass, radius) = (0.058, 0.033);
        Self {
            mass,
            radius,
            inertia: 2.0 / 3.0 * mass * radius * radius,
            rolling_friction: 0.5,
        }
    }

    pub fn effective_mass(&self) -> f64 {
        self.mass + self.inertia / (self.radius * self.radius)
    }

    /// Fraction of the in-plane acceleration that drives a rolling ball.
    pub fn rolling_factor(&self) -> f64 {
        self.mass / self.effective_mass()
    }

    pub fn validate(&self) -> Result<()> {
        if [self.mass, self.radius, self.inertia, self.rolling_friction]
            .iter()
            .any(|v| !(*v > 0.0))
        {
            return Err(Error::InvalidParameter("ball parameters must be positive".into()));
        }
        Ok(())
    }
}

/// Gaussian model errors: relative mass error, plate acceleration noise and
/// friction error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyModel {
    pub sigma_m: f64,
    /// Covariance of the plate acceleration noise, `(n + 1) x (n + 1)`, with the
    /// vertical axis last.
    pub sigma_p: Vec<Vec<f64>>,
    pub sigma_mu: f64,
}

impl UncertaintyModel {
    pub fn zero(n: usize) -> Self {
        Self {
            sigma_m: 0.0,
            sigma_p: vec![vec![0.0; n + 1]; n + 1],
            sigma_mu: 0.0,
        }
    }

    /// Independent noise with the same standard deviation on every plate axis.
    pub fn isotropic(n: usize, sigma_m: f64, sigma_p: f64, sigma_mu: f64) -> Self {
        let mut cov = vec![vec![0.0; n + 1]; n + 1];
        for (i, row) in cov.iter_mut().enumerate() {
            row[i] = sigma_p * sigma_p;
        }
        Self {
            sigma_m,
            sigma_p: cov,
            sigma_mu,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(self.sigma_m >= 0.0) || !(self.sigma_mu >= 0.0) {
            return bad("noise deviations must be non-negative");
        }
        if self.sigma_p.len() != n + 1 || self.sigma_p.iter().any(|r| r.len() != n + 1) {
            return bad("plate noise covariance must be (n+1)x(n+1)");
        }
        for i in 0..=n {
            if self.sigma_p[i][i] < 0.0 {
                return bad("plate noise covariance must have a non-negative diagonal");
            }
            for j in 0..=n {
                if (self.sigma_p[i][j] - self.sigma_p[j][i]).abs() > 1e-12 {
                    return bad("plate noise covariance must be symmetric");
                }
            }
        }
        Ok(())
    }
}

/// Plate geometry and motion at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateState {
    pub n: usize,
    pub half_length: f64,
    /// Tilt per plate axis, rad.
    pub tilt: Vec<f64>,
    /// World acceleration of the plate, in-plane axes first, vertical last.
    pub accel: Vec<f64>,
}

impl PlateState {
    pub fn flat(n: usize, half_length: f64) -> Self {
        Self {
            n,
            half_length,
            tilt: vec![0.0; n],
            accel: vec![0.0; n + 1],
        }
    }

    pub fn with_tilt(&self, tilt: Vec<f64>) -> Self {
        Self { tilt, ..self.clone() }
    }
}

/// Energy shaping: a virtual spring pulling toward the plate center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyModel {
    pub k_ve: f64,
    pub effective_mass: f64,
    pub mass: f64,
}

impl EnergyModel {
    pub fn new(k_ve: f64, ball: &BallParams) -> Self {
        Self {
            k_ve,
            effective_mass: ball.effective_mass(),
            mass: ball.mass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControlParams {
    /// Gain of the linear class-K function on the barrier.
    pub gamma: f64,
    /// Decay rate demanded of the Lyapunov function.
    pub c: f64,
    /// Weight on the Lyapunov slack.
    pub lambda: f64,
    /// Weight on entropy in the Lyapunov function, J.
    pub k_s: f64,
    pub dtheta_min: f64,
    pub dtheta_max: f64,
    /// Bound on the change of tilt rate, rad/s².
    pub beta_max: f64,
    pub dt: f64,
    /// Probe of the finite-difference Lie derivatives, rad/s.
    pub epsilon: f64,
    /// Steps a probed rate is held when differencing; one gives the plain
    /// one-step difference.
    pub horizon: usize,
}

impl Default for ControlParams {
    fn default() -> Self {
        Self {
            gamma: 5.0,
            c: 1.0,
            lambda: 1e3,
            k_s: 1e-4,
            dtheta_min: -3.0,
            dtheta_max: 3.0,
            beta_max: 25.0,
            dt: 0.02,
            epsilon: 0.01,
            horizon: 20,
        }
    }
}

impl ControlParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.c > 0.0 && self.lambda > 0.0 && self.dt > 0.0 && self.epsilon > 0.0) {
            return Err(Error::InvalidParameter("gamma, c, lambda, dt and epsilon must be positive".into()));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidParameter("preview horizon must be at least one step".into()));
        }
        if !(self.dtheta_min < self.dtheta_max) || !(self.beta_max >= 0.0) || !(self.k_s >= 0.0) {
            return Err(Error::InvalidParameter("tilt-rate bounds are inconsistent".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hollow_sphere_rolls_at_three_fifths() {
        let b = BallParams::tennis();
        assert!((b.rolling_factor() - 0.6).abs() < 1e-12);
        assert!((b.effective_mass() - 5.0 / 3.0 * 0.058).abs() < 1e-12);
        assert!(b.validate().is_ok());
    }

    #[test]
    fn covariance_checks() {
        assert!(UncertaintyModel::isotropic(2, 0.1, 0.05, 0.1).validate(2).is_ok());
        assert!(UncertaintyModel::isotropic(1, 0.1, 0.05, 0.1).validate(2).is_err());
        let mut u = UncertaintyModel::zero(1);
        u.sigma_p[0][1] = 0.1;
        assert!(u.validate(1).is_err());
    }
}
