//! Binary occupancy grid of possible planar object positions.
//!
//! Cells live on a world-fixed lattice of pitch `resolution`; the grid frame is
//! the window of that lattice centered on the lattice point nearest the cage
//! center. Re-centering therefore shifts occupancy by whole cells and never
//! resamples.

use crate::geometry::Vec2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CageCircle {
    pub center: Vec2,
    pub radius: f64,
}

impl CageCircle {
    pub fn new(center: Vec2, radius: f64) -> Self {
        debug_assert!(radius > 0.0);
        Self { center, radius }
    }

    pub fn contains_point(&self, p: Vec2) -> bool {
        p.distance(self.center) <= self.radius + 1e-9
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticeCell {
    pub ix: i64,
    pub iy: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PssGrid {
    width: usize,
    height: usize,
    resolution: f64,
    /// Lattice coordinates of the center cell.
    origin: (i64, i64),
    cells: Vec<bool>,
    /// Set when a state was pushed outside the window; such a grid is never
    /// considered contained.
    spilled: bool,
}

impl PssGrid {
    /// Empty grid of odd dimensions covering at least `half_extent` around
    /// `center` in every direction.
    pub fn empty(center: Vec2, half_extent: f64, resolution: f64) -> Self {
        assert!(resolution > 0.0, "resolution must be positive");
        let half = (half_extent / resolution).ceil() as usize;
        let side = 2 * half + 1;
        Self::with_dims(center, side, side, resolution)
    }

    pub fn with_dims(center: Vec2, width: usize, height: usize, resolution: f64) -> Self {
        assert!(resolution > 0.0, "resolution must be positive");
        assert!(center.is_finite());
        Self {
            width,
            height,
            resolution,
            origin: snap(center, resolution),
            cells: vec![false; width * height],
            spilled: false,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn spilled(&self) -> bool {
        self.spilled
    }

    pub fn mark_spilled(&mut self) {
        self.spilled = true;
    }

    /// World position of the grid's center cell.
    pub fn frame_center(&self) -> Vec2 {
        Vec2::new(
            self.origin.0 as f64 * self.resolution,
            self.origin.1 as f64 * self.resolution,
        )
    }

    fn half(&self) -> (i64, i64) {
        ((self.width / 2) as i64, (self.height / 2) as i64)
    }

    /// Row-major index of a lattice cell, if it lies in the window.
    pub fn index_of_lattice(&self, ix: i64, iy: i64) -> Option<usize> {
        let (hx, hy) = self.half();
        let col = ix - self.origin.0 + hx;
        let row = iy - self.origin.1 + hy;
        if col < 0 || row < 0 || col >= self.width as i64 || row >= self.height as i64 {
            None
        } else {
            Some(row as usize * self.width + col as usize)
        }
    }

    pub fn lattice_of_index(&self, idx: usize) -> (i64, i64) {
        let (hx, hy) = self.half();
        let row = (idx / self.width) as i64;
        let col = (idx % self.width) as i64;
        (col - hx + self.origin.0, row - hy + self.origin.1)
    }

    pub fn lattice_of_point(&self, p: Vec2) -> (i64, i64) {
        snap(p, self.resolution)
    }

    pub fn lattice_to_world(&self, ix: i64, iy: i64) -> Vec2 {
        Vec2::new(ix as f64 * self.resolution, iy as f64 * self.resolution)
    }

    /// World position of the cell at (row, col).
    pub fn cell_center(&self, row: usize, col: usize) -> Vec2 {
        let (ix, iy) = self.lattice_of_index(row * self.width + col);
        self.lattice_to_world(ix, iy)
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.width + col]
    }

    pub fn get_index(&self, idx: usize) -> bool {
        self.cells[idx]
    }

    pub fn set_index(&mut self, idx: usize, value: bool) {
        self.cells[idx] = value;
    }

    /// Marks the cell nearest to `p`; flags the grid as spilled when `p` is
    /// outside the window.
    pub fn insert_point(&mut self, p: Vec2) {
        let (ix, iy) = self.lattice_of_point(p);
        self.insert_lattice(ix, iy);
    }

    pub fn insert_lattice(&mut self, ix: i64, iy: i64) {
        match self.index_of_lattice(ix, iy) {
            Some(i) => self.cells[i] = true,
            None => self.spilled = true,
        }
    }

    pub fn contains_lattice(&self, ix: i64, iy: i64) -> bool {
        self.index_of_lattice(ix, iy).is_some_and(|i| self.cells[i])
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&c| c)
    }

    pub fn occupied_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| c.then_some(i))
    }

    pub fn occupied_lattice(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.occupied_indices().map(|i| self.lattice_of_index(i))
    }

    pub fn occupied_points(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.occupied_lattice()
            .map(|(ix, iy)| self.lattice_to_world(ix, iy))
    }

    /// Same occupancy, window moved to the lattice point nearest `center`.
    pub fn recentered(&self, center: Vec2) -> PssGrid {
        let mut out = self.cleared_at(center);
        out.spilled = self.spilled;
        for (ix, iy) in self.occupied_lattice() {
            out.insert_lattice(ix, iy);
        }
        out
    }

    /// Empty grid with identical geometry, centered at `center`.
    pub fn cleared_at(&self, center: Vec2) -> PssGrid {
        PssGrid::with_dims(center, self.width, self.height, self.resolution)
    }

    /// Translates the whole grid (frame and occupancy) by a whole number of
    /// lattice steps.
    pub fn translated_lattice(&self, dx: i64, dy: i64) -> PssGrid {
        let mut out = self.clone();
        out.origin = (self.origin.0 + dx, self.origin.1 + dy);
        out
    }
}

fn snap(p: Vec2, resolution: f64) -> (i64, i64) {
    (
        (p.x / resolution).round() as i64,
        (p.y / resolution).round() as i64,
    )
}

/// True iff every occupied cell center lies within the cage (inclusive).
/// An empty grid is vacuously contained; a spilled grid never is.
pub fn contains_geometric(pss: &PssGrid, cage: &CageCircle) -> bool {
    !pss.spilled() && pss.occupied_points().all(|p| cage.contains_point(p))
}
