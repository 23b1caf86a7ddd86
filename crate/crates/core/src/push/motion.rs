//! Pusher geometry and the bounded displacement set of a pushed object.

use crate::geometry::{point_segment_distance, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PusherPose {
    pub center: Vec2,
    /// Unit push direction.
    pub direction: Vec2,
    pub half_length: f64,
}

impl PusherPose {
    pub fn endpoints(&self) -> (Vec2, Vec2) {
        let along = self.direction.perp() * self.half_length;
        (self.center - along, self.center + along)
    }

    pub fn distance_to(&self, p: Vec2) -> f64 {
        let (a, b) = self.endpoints();
        point_segment_distance(p, a, b)
    }

    /// Pose after moving `travel` along the push direction.
    pub fn advanced(&self, travel: f64) -> PusherPose {
        PusherPose {
            center: self.center + self.direction * travel,
            ..*self
        }
    }
}

/// Pusher tangent to the circle of radius `outer_radius` around
/// `cage_center`, at angle `theta`, facing the center.
pub fn pusher_pose(cage_center: Vec2, outer_radius: f64, theta: f64, half_length: f64) -> PusherPose {
    let radial = Vec2::from_angle(theta);
    PusherPose {
        center: cage_center + radial * outer_radius,
        direction: -radial,
        half_length,
    }
}

/// Displacements reachable by an object pushed over `d_con` of pusher travel:
/// at most `d_con` along the push and `d_con / 2` sideways, never against the
/// push.
///
/// A state the pusher already overlaps when placed is first carried forward
/// by the overlap, so the semi-ellipse is offset by `carry` along the push.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiEllipseMotionSet {
    pub d_con: f64,
    pub push_direction: Vec2,
    pub is_null: bool,
    pub carry: f64,
}

impl SemiEllipseMotionSet {
    pub fn null(push_direction: Vec2) -> Self {
        Self {
            d_con: 0.0,
            push_direction,
            is_null: true,
            carry: 0.0,
        }
    }

    /// Along-push and lateral components of `v`.
    pub fn local(&self, v: Vec2) -> (f64, f64) {
        (v.dot(self.push_direction), v.dot(self.push_direction.perp()))
    }

    pub fn contains(&self, v: Vec2, tol: f64) -> bool {
        if self.is_null || self.d_con <= 0.0 {
            return v.norm() <= tol;
        }
        if v.norm() <= tol {
            return true;
        }
        let (along, lat) = self.local(v);
        let along = along - self.carry;
        if along < -tol {
            return false;
        }
        let a = self.d_con + tol;
        let b = self.d_con / 2.0 + tol;
        (along / a).powi(2) + (lat / b).powi(2) <= 1.0
    }

    /// Lattice displacements (in cells) inside the closed semi-ellipse, plus
    /// the zero displacement.
    pub fn lattice_displacements(&self, resolution: f64) -> Vec<(i64, i64)> {
        let mut out = vec![(0, 0)];
        if self.is_null || self.d_con <= 0.0 {
            return out;
        }
        let reach = ((self.d_con + self.carry) / resolution).ceil() as i64;
        let a2 = self.d_con * self.d_con;
        let b2 = a2 / 4.0;
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let v = Vec2::new(dx as f64 * resolution, dy as f64 * resolution);
                let (along, lat) = self.local(v);
                let along = along - self.carry;
                if along < -1e-9 {
                    continue;
                }
                if along * along / a2 + lat * lat / b2 <= 1.0 + 1e-9 {
                    out.push((dx, dy));
                }
            }
        }
        out
    }
}

/// Travel of the pusher after first touching the bounding circle, or the null
/// set when the pusher never gets within `r` of `q`.
pub fn motion_set(q: Vec2, pose: &PusherPose, r: f64, d_push: f64) -> SemiEllipseMotionSet {
    let dist = pose.distance_to(q);
    if dist > r + d_push {
        return SemiEllipseMotionSet::null(pose.direction);
    }
    let d_con = (d_push - (dist - r).max(0.0)).clamp(0.0, d_push);
    SemiEllipseMotionSet {
        d_con,
        push_direction: pose.direction,
        is_null: false,
        carry: (r - dist).max(0.0),
    }
}
