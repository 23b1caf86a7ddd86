//! Probability grid over plate position and ball velocity.

use crate::error::{Error, Result};
use crate::verify::StateSet;
use serde::{Deserialize, Serialize};

/// Geometry of a probability grid: `cells` per dimension over positions in
/// `[-x_max, x_max]` and velocities in `[-v_max, v_max]`, positions first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub cells: usize,
    pub x_max: f64,
    pub v_max: f64,
}

/// A state vector: positions in `[..n]`, velocities in `[n..2n]`.
pub type State = [f64; 4];

impl GridSpec {
    pub fn new(n: usize, cells: usize, x_max: f64, v_max: f64) -> Result<Self> {
        if !(n == 1 || n == 2) {
            return Err(Error::InvalidParameter("plate dimension must be 1 or 2".into()));
        }
        if cells < 3 || cells % 2 == 0 {
            return Err(Error::InvalidParameter("cells per dimension must be odd and at least 3".into()));
        }
        if !(x_max > 0.0) || !(v_max > 0.0) {
            return Err(Error::InvalidParameter("state box must have positive extent".into()));
        }
        Ok(Self { n, cells, x_max, v_max })
    }

    pub fn dims(&self) -> usize {
        2 * self.n
    }

    pub fn len(&self) -> usize {
        self.cells.pow(self.dims() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn pos_step(&self) -> f64 {
        2.0 * self.x_max / (self.cells - 1) as f64
    }

    pub fn vel_step(&self) -> f64 {
        2.0 * self.v_max / (self.cells - 1) as f64
    }

    fn half(&self, d: usize) -> f64 {
        if d < self.n {
            self.x_max
        } else {
            self.v_max
        }
    }

    fn step(&self, d: usize) -> f64 {
        if d < self.n {
            self.pos_step()
        } else {
            self.vel_step()
        }
    }

    /// Index of the nearest cell, or `None` outside the state box.
    pub fn index_of(&self, s: &State) -> Option<usize> {
        let mut idx = 0usize;
        for d in 0..self.dims() {
            let c = ((s[d] + self.half(d)) / self.step(d)).round();
            if !(c >= 0.0 && c <= (self.cells - 1) as f64) {
                return None;
            }
            idx = idx * self.cells + c as usize;
        }
        Some(idx)
    }

    pub fn coords_of(&self, mut index: usize) -> [usize; 4] {
        let mut c = [0; 4];
        for d in (0..self.dims()).rev() {
            c[d] = index % self.cells;
            index /= self.cells;
        }
        c
    }

    pub fn center_of(&self, index: usize) -> State {
        let c = self.coords_of(index);
        let mut s = [0.0; 4];
        for d in 0..self.dims() {
            s[d] = -self.half(d) + c[d] as f64 * self.step(d);
        }
        s
    }
}

/// One supported cell: its probability and the probability-weighted mean of
/// the continuous states that fell into it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub index: usize,
    pub prob: f64,
    pub mean: State,
}

/// Sparse probability grid. Only cells with positive probability are stored,
/// sorted by index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbGrid {
    pub spec: GridSpec,
    pub cells: Vec<Cell>,
}

impl ProbGrid {
    pub fn delta(spec: GridSpec, state: State) -> Result<Self> {
        let index = spec
            .index_of(&state)
            .ok_or_else(|| Error::InvalidParameter("initial state outside the grid".into()))?;
        Ok(Self {
            spec,
            cells: vec![Cell { index, prob: 1.0, mean: state }],
        })
    }

    /// Uniform over the cells whose centers lie in the box `[lo, hi]`; if none
    /// does, the cell nearest the box center.
    pub fn uniform_box(spec: GridSpec, lo: State, hi: State) -> Result<Self> {
        let dims = spec.dims();
        let mut ranges = [(0usize, 0usize); 4];
        for d in 0..dims {
            let step = spec.step(d);
            let a = ((lo[d] + spec.half(d)) / step - 1e-9).ceil().max(0.0);
            let b = ((hi[d] + spec.half(d)) / step + 1e-9).floor().min((spec.cells - 1) as f64);
            if a > b {
                let mut mid = [0.0; 4];
                for k in 0..dims {
                    mid[k] = 0.5 * (lo[k] + hi[k]);
                }
                return Self::delta(spec, mid);
            }
            ranges[d] = (a as usize, b as usize);
        }
        let mut cells = Vec::new();
        let mut c = [0usize; 4];
        for d in 0..dims {
            c[d] = ranges[d].0;
        }
        loop {
            let mut index = 0;
            for d in 0..dims {
                index = index * spec.cells + c[d];
            }
            cells.push(Cell { index, prob: 1.0, mean: spec.center_of(index) });
            // odometer increment
            let mut d = dims;
            loop {
                if d == 0 {
                    let total = cells.len() as f64;
                    for cell in &mut cells {
                        cell.prob = 1.0 / total;
                    }
                    cells.sort_by_key(|c| c.index);
                    return Ok(Self { spec, cells });
                }
                d -= 1;
                if c[d] < ranges[d].1 {
                    c[d] += 1;
                    break;
                }
                c[d] = ranges[d].0;
            }
        }
    }

    pub fn from_cells(spec: GridSpec, mut cells: Vec<Cell>) -> Self {
        cells.retain(|c| c.prob > 0.0);
        cells.sort_by_key(|c| c.index);
        Self { spec, cells }
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn support_len(&self) -> usize {
        self.cells.len()
    }

    pub fn total(&self) -> f64 {
        self.cells.iter().map(|c| c.prob).sum()
    }

    pub fn normalize(&mut self) {
        let t = self.total();
        if t > 0.0 {
            for c in &mut self.cells {
                c.prob /= t;
            }
        }
    }

    pub fn max_prob(&self) -> f64 {
        self.cells.iter().map(|c| c.prob).fold(0.0, f64::max)
    }

    /// Dense array of `cells^(2n)` probabilities.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.spec.len()];
        for c in &self.cells {
            v[c.index] = c.prob;
        }
        v
    }

    pub fn probability_at(&self, index: usize) -> f64 {
        self.cells
            .binary_search_by_key(&index, |c| c.index)
            .map(|i| self.cells[i].prob)
            .unwrap_or(0.0)
    }

    /// Probability-weighted mean state.
    pub fn mean_state(&self) -> State {
        let mut m = [0.0; 4];
        for c in &self.cells {
            for d in 0..4 {
                m[d] += c.prob * c.mean[d];
            }
        }
        m
    }
}

impl StateSet for ProbGrid {
    fn has_support(&self) -> bool {
        !self.cells.is_empty()
    }
}

/// Shannon entropy in nats.
pub fn entropy(grid: &ProbGrid) -> f64 {
    -grid
        .cells
        .iter()
        .filter(|c| c.prob > 0.0)
        .map(|c| c.prob * c.prob.ln())
        .sum::<f64>()
}
