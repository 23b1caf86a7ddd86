//! Grid propagation of the potential state set under one push.

use super::motion::{motion_set, pusher_pose};
use super::problem::PushProblem;
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::pss::PssGrid;

/// Advances `pss` through one step.
///
/// The output window is centered on `cage_center_next`. With no action the
/// occupancy is unchanged in world coordinates. With a push at `theta`, each
/// state is replaced by every lattice displacement of its motion set, then
/// states whose bounding circle would overlap the pusher's final pose are
/// removed.
pub fn propagate_pss(
    pss: &PssGrid,
    action: Option<f64>,
    cage_center_next: Vec2,
    problem: &PushProblem,
) -> Result<PssGrid> {
    let Some(theta) = action else {
        return Ok(pss.recentered(cage_center_next));
    };
    let r = problem.object_radius;
    let pose = pusher_pose(cage_center_next, problem.outer_radius(), theta, problem.half_length());
    let mut out = pss.cleared_at(cage_center_next);
    if pss.spilled() {
        out.mark_spilled();
    }
    let rho = pss.resolution();
    for (ix, iy) in pss.occupied_lattice() {
        let q = pss.lattice_to_world(ix, iy);
        let set = motion_set(q, &pose, r, problem.d_push);
        for (dx, dy) in set.lattice_displacements(rho) {
            out.insert_lattice(ix + dx, iy + dy);
        }
    }

    let final_pose = pose.advanced(problem.d_push);
    let keep_from = r - problem.cut_tolerance;
    let occupied: Vec<usize> = out.occupied_indices().collect();
    for idx in occupied {
        let (ix, iy) = out.lattice_of_index(idx);
        if final_pose.distance_to(out.lattice_to_world(ix, iy)) < keep_from {
            out.set_index(idx, false);
        }
    }
    if out.is_empty() && !out.spilled() {
        return Err(Error::EmptyResult);
    }
    Ok(out)
}
