//! Area possibly covered by the object's bounding circle.

use crate::pss::PssGrid;

/// Occupancy of the state grid dilated by the object's bounding circle.
#[derive(Debug, Clone, PartialEq)]
pub struct Poa {
    pub grid: PssGrid,
}

impl Poa {
    pub fn area(&self) -> f64 {
        self.grid.count() as f64 * self.grid.resolution().powi(2)
    }
}

/// Dilates the occupancy with a disk of radius `r`. Cells falling outside
/// the window are dropped.
pub fn compute_poa(pss: &PssGrid, r: f64) -> Poa {
    let mut out = pss.cleared_at(pss.frame_center());
    let rp = r / pss.resolution();
    let reach = rp.ceil() as i64;
    let spans: Vec<(i64, i64)> = (-reach..=reach)
        .filter_map(|dy| {
            let rem = rp * rp - (dy * dy) as f64;
            (rem >= 0.0).then(|| (dy, (rem + 1e-9).sqrt().floor() as i64))
        })
        .collect();
    for (ix, iy) in pss.occupied_lattice() {
        for &(dy, half) in &spans {
            for x in ix - half..=ix + half {
                if let Some(idx) = out.index_of_lattice(x, iy + dy) {
                    out.set_index(idx, true);
                }
            }
        }
    }
    Poa { grid: out }
}
