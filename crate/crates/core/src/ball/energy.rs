//! Energy cage: kinetic energy, a virtual spring toward the plate center and
//! the potential of the in-plane effective acceleration.

use super::dynamics::plate_frame_accels;
use super::params::{EnergyModel, PlateState};

/// `½ m_eff |v|² + ½ k_ve |x|² - m (a_eff · x)`.
pub fn energy(pos: &[f64], vel: &[f64], a_eff: &[f64], model: &EnergyModel) -> f64 {
    let mut e = 0.0;
    for i in 0..a_eff.len() {
        e += 0.5 * model.effective_mass * vel[i] * vel[i] + 0.5 * model.k_ve * pos[i] * pos[i]
            - model.mass * a_eff[i] * pos[i];
    }
    e
}

/// Lowest static energy on the plate boundary: the least energy a ball needs
/// to reach the edge.
pub fn e_max(plate: &PlateState, model: &EnergyModel) -> f64 {
    e_max_for(&plate_frame_accels(plate).effective, plate.half_length, model)
}

pub fn e_max_for(a_eff: &[f64], l: f64, model: &EnergyModel) -> f64 {
    let (k, m) = (model.k_ve, model.mass);
    match a_eff.len() {
        1 => 0.5 * k * l * l - m * a_eff[0].abs() * l,
        2 => {
            // each edge of the square is a parabola in the free coordinate
            let mut best = f64::INFINITY;
            for axis in 0..2 {
                let other = 1 - axis;
                let free = (m * a_eff[other] / k).clamp(-l, l);
                for side in [-l, l] {
                    let e = 0.5 * k * (l * l + free * free) - m * (a_eff[axis] * side + a_eff[other] * free);
                    best = best.min(e);
                }
            }
            best
        }
        _ => panic!("plate dimension must be 1 or 2"),
    }
}
