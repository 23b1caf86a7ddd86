//! Grayscale frames of state sets, written as binary PGM.

use anyhow::{bail, Result};
use caging_core::ball::{e_max, energy, plate_frame_accels, EnergyModel, PlateState, ProbGrid};
use caging_core::geometry::point_segment_distance;
use caging_core::push::{compute_poa, PusherPose};
use caging_core::{CageCircle, PssGrid};

pub const STATE: u8 = 255;
pub const FOOTPRINT: u8 = 160;
pub const CAGE: u8 = 96;
pub const ROBOT: u8 = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameImage {
    pub width: usize,
    pub height: usize,
    /// Row-major, top row first.
    pub pixels: Vec<u8>,
}

impl FrameImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![0; width * height],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.pixels[row * self.width + col] = value;
    }

    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn from_pgm(bytes: &[u8]) -> Result<Self> {
        // header: magic, width, height, maxval, each followed by one whitespace
        let mut fields = Vec::new();
        let mut pos = 0;
        while fields.len() < 4 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                bail!("truncated PGM header");
            }
            fields.push(std::str::from_utf8(&bytes[start..pos])?.to_string());
        }
        if fields[0] != "P5" || fields[3] != "255" {
            bail!("not an 8-bit binary PGM");
        }
        let (width, height): (usize, usize) = (fields[1].parse()?, fields[2].parse()?);
        let pixels = bytes.get(pos + 1..).unwrap_or_default().to_vec();
        if pixels.len() != width * height {
            bail!("PGM body has {} bytes, header says {}", pixels.len(), width * height);
        }
        Ok(Self { width, height, pixels })
    }
}

/// One pixel per grid cell, +y up. The state set is white, its footprint
/// ring gray, the cage circle darker and the pusher darkest.
pub fn render_push_frame(pss: &PssGrid, object_radius: f64, cage: &CageCircle, pusher: Option<&PusherPose>) -> FrameImage {
    let (w, h) = (pss.width(), pss.height());
    let res = pss.resolution();
    let poa = compute_poa(pss, object_radius);
    let mut img = FrameImage::new(w, h);
    let ends = pusher.map(|p| p.endpoints());
    for row in 0..h {
        for col in 0..w {
            let p = pss.cell_center(row, col);
            let mut v = 0;
            if poa.grid.get(row, col) {
                v = FOOTPRINT;
            }
            if (p.distance(cage.center) - cage.radius).abs() <= res / 2.0 {
                v = CAGE;
            }
            if pss.get(row, col) {
                v = STATE;
            }
            if let Some((a, b)) = ends {
                if point_segment_distance(p, a, b) <= res / 2.0 {
                    v = ROBOT;
                }
            }
            img.set(h - 1 - row, col, v);
        }
    }
    img
}

/// Probability mass as brightness, with the escape-energy boundary drawn at
/// zero probability cells and a strip on top showing the plate tilt per
/// axis. One axis: position across, velocity up. Two axes: the position
/// marginal, `x` across and `y` up, and the boundary taken at rest.
pub fn render_ball_frame(grid: &ProbGrid, plate: &PlateState, model: &EnergyModel) -> FrameImage {
    let spec = grid.spec;
    let n = spec.n;
    let cells = spec.cells;
    let strip = (cells / 4).max(9);
    let mut img = FrameImage::new(cells, cells + strip);
    let mut mass = vec![0.0; cells * cells];
    for c in &grid.cells {
        // the first two grid coordinates are x then v, or x then y
        let k = spec.coords_of(c.index);
        mass[k[1] * cells + k[0]] += c.prob;
    }
    let peak = mass.iter().copied().fold(0.0, f64::max);
    let a_eff = plate_frame_accels(plate).effective;
    let limit = e_max(plate, model);
    let inside = |row: usize, col: usize| {
        let step = |i: usize, extent: f64| -extent + 2.0 * extent * i as f64 / (cells - 1) as f64;
        let (pos, vel) = if n == 1 {
            (vec![step(col, spec.x_max)], vec![step(row, spec.v_max)])
        } else {
            (vec![step(col, spec.x_max), step(row, spec.x_max)], vec![0.0, 0.0])
        };
        energy(&pos, &vel, &a_eff[..n], model) <= limit
    };
    for row in 0..cells {
        for col in 0..cells {
            let m = mass[row * cells + col];
            let v = if m > 0.0 && peak > 0.0 {
                (255.0 * m / peak).round().max(1.0) as u8
            } else {
                let here = inside(row, col);
                let edge = [(0i64, 1i64), (0, -1), (1, 0), (-1, 0)].iter().any(|&(dr, dc)| {
                    let (r, c) = (row as i64 + dr, col as i64 + dc);
                    r >= 0 && c >= 0 && (r as usize) < cells && (c as usize) < cells && inside(r as usize, c as usize) != here
                });
                if here && edge {
                    CAGE
                } else {
                    0
                }
            };
            img.set(strip + cells - 1 - row, col, v);
        }
    }
    // plate strip: one tilted line per axis, side by side
    let lane = cells / n;
    for axis in 0..n {
        let slope = plate.tilt[axis].tan();
        let mid = (strip / 2) as f64;
        let center = (axis * lane) as f64 + lane as f64 / 2.0;
        for col in axis * lane..(axis + 1) * lane {
            let r = mid - slope * (col as f64 - center);
            if r >= 0.0 && r <= (strip - 1) as f64 {
                img.set(r.round() as usize, col, ROBOT);
            }
        }
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;
    use caging_core::ball::{BallParams, GridSpec};
    use caging_core::push::pusher_pose;
    use caging_core::Vec2;

    #[test]
    fn pgm_round_trip() {
        let mut img = FrameImage::new(3, 2);
        img.set(1, 2, 7);
        let bytes = img.to_pgm();
        assert!(bytes.starts_with(b"P5\n3 2\n255\n"));
        assert_eq!(FrameImage::from_pgm(&bytes).unwrap(), img);
    }

    #[test]
    fn push_frame_layers() {
        let mut pss = PssGrid::empty(Vec2::ZERO, 40.0, 1.0);
        pss.insert_point(Vec2::ZERO);
        let cage = CageCircle::new(Vec2::ZERO, 20.0);
        let pose = pusher_pose(Vec2::ZERO, 45.0, 0.0, 50.0);
        let img = render_push_frame(&pss, 5.0, &cage, Some(&pose));
        let mid = img.height / 2;
        assert_eq!(img.get(mid, img.width / 2), STATE);
        assert_eq!(img.get(mid, img.width / 2 + 3), FOOTPRINT);
        assert_eq!(img.get(mid, img.width / 2 + 20), CAGE);
        assert_eq!(img.get(mid - 40, img.width / 2), 0);
        // pusher at x = 45 lies outside this 81-cell window
        assert!(img.pixels.iter().all(|&p| p != ROBOT));
        let near = pusher_pose(Vec2::ZERO, 30.0, 0.0, 10.0);
        let img = render_push_frame(&pss, 5.0, &cage, Some(&near));
        assert_eq!(img.get(mid, img.width / 2 + 30), ROBOT);
    }

    #[test]
    fn ball_frame_scales_to_peak() {
        let spec = GridSpec::new(1, 31, 0.08, 1.0).unwrap();
        let g = ProbGrid::delta(spec, [0.0; 4]).unwrap();
        let plate = PlateState::flat(1, 0.08);
        let model = EnergyModel::new(60.0, &BallParams::tennis());
        let img = render_ball_frame(&g, &plate, &model);
        assert_eq!((img.width, img.height), (31, 40));
        assert_eq!(img.get(9 + 15, 15), 255);
        assert!(img.pixels.contains(&CAGE));
        // a level plate draws a level line
        assert_eq!(img.get(4, 0), ROBOT);
        assert_eq!(img.get(4, 30), ROBOT);
    }
}
