use crate::error::{Error, Result};
use crate::geometry::Vec2;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Quasi-static pushing task. Lengths in millimeters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PushProblem {
    /// Radius of the object's bounding circle.
    pub object_radius: f64,
    /// Radius of the cage in state space (outer circle radius minus object radius).
    pub cage_size: f64,
    /// Number of candidate push angles.
    pub candidates: usize,
    pub d_push: f64,
    pub pusher_length: f64,
    /// Millimeters per grid cell.
    pub resolution: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// How many top-scoring candidates are considered before picking the one
    /// closest to the previous push.
    #[serde(default = "default_top_n")]
    pub top_n: usize,
    /// Planning shrinks the cage by this much so that states off the grid
    /// lattice still respect the nominal cage.
    #[serde(default)]
    pub containment_margin: f64,
    /// States closer than `object_radius - cut_tolerance` to the final pusher
    /// pose are discarded after a push.
    #[serde(default)]
    pub cut_tolerance: f64,
    #[serde(default = "default_true")]
    pub enforce_spacing: bool,
    /// Propagate the preferred candidates and keep the one whose outcome is
    /// most compact, instead of committing to the closest-angle choice.
    #[serde(default = "default_true")]
    pub lookahead: bool,
    pub trajectory: Vec<Vec2>,
}

fn default_top_n() -> usize {
    5
}

fn default_true() -> bool {
    true
}

impl PushProblem {
    /// Setup used for the desk-scale experiments: 25 mm bounding circle,
    /// 100 mm pusher, 1 mm cells, pushes of 20 mm or the cage size if that is
    /// smaller.
    pub fn with_defaults(cage_size: f64, candidates: usize, trajectory: Vec<Vec2>) -> Self {
        Self {
            object_radius: 25.0,
            cage_size,
            candidates,
            d_push: cage_size.min(20.0),
            pusher_length: 100.0,
            resolution: 1.0,
            lambda1: 1.0,
            lambda2: 1.0,
            top_n: 5,
            containment_margin: 1.0,
            cut_tolerance: 1.0,
            enforce_spacing: true,
            lookahead: true,
            trajectory,
        }
    }

    /// Radius of the circle the pusher starts on.
    pub fn outer_radius(&self) -> f64 {
        self.cage_size + self.object_radius
    }

    pub fn planning_cage_size(&self) -> f64 {
        self.cage_size - self.containment_margin
    }

    pub fn half_length(&self) -> f64 {
        self.pusher_length / 2.0
    }

    /// Half extent of the grid window: the pusher sweep plus a 10 mm margin.
    pub fn grid_half_extent(&self) -> f64 {
        self.outer_radius() + self.d_push + 10.0
    }

    /// Candidate angle for index `k` in `1..=K`, wrapped into `[0, 2π)`.
    pub fn candidate_angle(&self, k: usize) -> f64 {
        (TAU * k as f64 / self.candidates as f64).rem_euclid(TAU)
    }

    pub fn max_waypoint_spacing(&self) -> f64 {
        self.cage_size / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(self.object_radius > 0.0) {
            return bad("object_radius must be positive");
        }
        if !(self.cage_size > 0.0) {
            return bad("cage_size must be positive");
        }
        if self.candidates < 3 {
            return bad("at least 3 candidate angles are required");
        }
        if !(self.d_push > 0.0) || !(self.pusher_length > 0.0) {
            return bad("d_push and pusher_length must be positive");
        }
        if !(self.resolution > 0.0) || self.resolution > self.cage_size / 10.0 {
            return bad("resolution must be positive and at most cage_size / 10");
        }
        if !(self.planning_cage_size() > 0.0) || self.containment_margin < 0.0 {
            return bad("containment_margin must be in [0, cage_size)");
        }
        if self.top_n == 0 {
            return bad("top_n must be at least 1");
        }
        if self.trajectory.is_empty() || self.trajectory.iter().any(|p| !p.is_finite()) {
            return bad("trajectory must be non-empty and finite");
        }
        if self.enforce_spacing {
            let limit = self.max_waypoint_spacing();
            for (i, w) in self.trajectory.windows(2).enumerate() {
                let spacing = w[0].distance(w[1]);
                if spacing > limit + 1e-9 {
                    return Err(Error::WaypointSpacingTooLarge {
                        index: i + 1,
                        spacing,
                        limit,
                    });
                }
            }
        }
        Ok(())
    }
}
