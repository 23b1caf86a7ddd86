//! Waypoint generators.

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use std::f64::consts::TAU;

/// `steps` points on a circle, counter-clockwise from angle 0. The last
/// point is one spacing short of the first.
pub fn circle(center: Vec2, radius: f64, steps: usize) -> Vec<Vec2> {
    (0..steps)
        .map(|i| center + Vec2::from_angle(TAU * i as f64 / steps as f64) * radius)
        .collect()
}

/// `steps + 1` evenly spaced points from `a` to `b`.
pub fn line(a: Vec2, b: Vec2, steps: usize) -> Vec<Vec2> {
    (0..=steps)
        .map(|i| a + (b - a) * (i as f64 / steps as f64))
        .collect()
}

/// Resamples a polyline at constant arc-length spacing no larger than
/// `max_spacing`. The first and last vertices are kept.
pub fn resample_polyline(vertices: &[Vec2], max_spacing: f64) -> Result<Vec<Vec2>> {
    if vertices.len() < 2 {
        return Err(Error::BadSpec("a polyline needs at least two vertices".into()));
    }
    if !(max_spacing > 0.0) || vertices.iter().any(|v| !v.is_finite()) {
        return Err(Error::BadSpec("polyline spacing and vertices must be finite and positive".into()));
    }
    let cumulative: Vec<f64> = std::iter::once(0.0)
        .chain(vertices.windows(2).scan(0.0, |acc, w| {
            *acc += w[0].distance(w[1]);
            Some(*acc)
        }))
        .collect();
    let total = *cumulative.last().unwrap();
    if total == 0.0 {
        return Ok(vec![vertices[0]]);
    }
    let n = (total / max_spacing).ceil().max(1.0) as usize;
    let mut out = Vec::with_capacity(n + 1);
    let mut seg = 0;
    for i in 0..=n {
        let s = total * i as f64 / n as f64;
        while seg + 2 < cumulative.len() && cumulative[seg + 1] < s {
            seg += 1;
        }
        let len = cumulative[seg + 1] - cumulative[seg];
        let u = if len > 0.0 { ((s - cumulative[seg]) / len).clamp(0.0, 1.0) } else { 0.0 };
        out.push(vertices[seg] + (vertices[seg + 1] - vertices[seg]) * u);
    }
    Ok(out)
}

/// Figure eight `(A sin s, A sin s cos s)` around `center`, `steps_per_loop`
/// points per loop, closed at the end.
pub fn lemniscate(center: Vec2, amplitude: f64, steps_per_loop: usize, loops: usize) -> Vec<Vec2> {
    let total = steps_per_loop * loops;
    (0..=total)
        .map(|i| {
            let s = TAU * i as f64 / steps_per_loop as f64;
            center + Vec2::new(amplitude * s.sin(), amplitude * s.sin() * s.cos())
        })
        .collect()
}

/// The figure eight traced over `period` seconds per loop, sampled every
/// `dt`. Each sample holds `n` in-plane coordinates then the vertical one:
/// a one-axis plate traces it in the x-z plane, a square plate in x-y.
pub fn plate_lemniscate(n: usize, amplitude: f64, period: f64, loops: usize, dt: f64) -> Vec<Vec<f64>> {
    let samples = (period * loops as f64 / dt).round() as usize;
    (0..=samples)
        .map(|i| {
            let s = TAU * i as f64 * dt / period;
            let (a, b) = (amplitude * s.sin(), amplitude * s.sin() * s.cos());
            if n == 1 {
                vec![a, b]
            } else {
                vec![a, b, 0.0]
            }
        })
        .collect()
}

/// A circle of `radius` in the horizontal plane, one loop over `period`
/// seconds, starting and ending at its center-left point.
pub fn plate_circle(radius: f64, period: f64, dt: f64) -> Vec<Vec<f64>> {
    let samples = (period / dt).round() as usize;
    (0..=samples)
        .map(|i| {
            let s = TAU * i as f64 * dt / period;
            vec![radius * (1.0 - s.cos()), radius * s.sin(), 0.0]
        })
        .collect()
}

/// Minimum-jerk profile on `[0, 1]`.
fn min_jerk(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
}

/// Visits `vertices` in order at rest at every vertex, each segment on a
/// minimum-jerk profile lasting its length over `speed`, but no less than
/// `min_segment_time`. Holds `dwell` seconds at both ends. Sampled every `dt`.
pub fn timed_polyline(vertices: &[Vec<f64>], speed: f64, min_segment_time: f64, dwell: f64, dt: f64) -> Result<Vec<Vec<f64>>> {
    if vertices.len() < 2 || vertices.iter().any(|v| v.len() != vertices[0].len() || v.iter().any(|x| !x.is_finite())) {
        return Err(Error::BadSpec("a timed polyline needs two or more finite vertices of equal size".into()));
    }
    if !(speed > 0.0 && dt > 0.0 && min_segment_time >= 0.0 && dwell >= 0.0) {
        return Err(Error::BadSpec("polyline timing must be positive".into()));
    }
    let mut out = Vec::new();
    let hold = (dwell / dt).round() as usize;
    out.extend(std::iter::repeat(vertices[0].clone()).take(hold));
    out.push(vertices[0].clone());
    for w in vertices.windows(2) {
        let len = w[0].iter().zip(&w[1]).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt();
        let steps = ((len / speed).max(min_segment_time) / dt).ceil().max(1.0) as usize;
        for k in 1..=steps {
            let s = min_jerk(k as f64 / steps as f64);
            out.push(w[0].iter().zip(&w[1]).map(|(a, b)| a + (b - a) * s).collect());
        }
    }
    let last = out.last().unwrap().clone();
    out.extend(std::iter::repeat(last).take(hold));
    Ok(out)
}

const RICE: &str = include_str!("../assets/rice.csv");

/// Vertices of the illustrative "RICE" lettering, `[x, z]` in meters.
pub fn rice_vertices() -> Vec<Vec<f64>> {
    parse_vertices(RICE).expect("bundled lettering parses")
}

/// Parses comma-separated vertices, skipping `#` comments and a header row.
pub fn parse_vertices(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let fields: std::result::Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        match fields {
            Ok(v) => out.push(v),
            Err(_) if out.is_empty() => continue,
            Err(_) => return Err(Error::BadSpec(format!("unparsable vertex row: {line}"))),
        }
    }
    if out.len() < 2 || out.iter().any(|v| v.len() != out[0].len()) {
        return Err(Error::BadSpec("need two or more vertex rows of equal width".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemniscate_crosses_center_and_closes() {
        let l = lemniscate(Vec2::ZERO, 150.0, 160, 10);
        assert_eq!(l.len(), 1601);
        assert!(l[0].distance(Vec2::ZERO) < 1e-9);
        assert!(l[80].distance(Vec2::ZERO) < 1e-9);
        assert!(l[1600].distance(l[0]) < 1e-9);
        assert!((l[40].x - 150.0).abs() < 1e-9);
        let max_step = l.windows(2).map(|w| w[0].distance(w[1])).fold(0.0, f64::max);
        assert!(max_step < 10.0);
    }

    #[test]
    fn timed_polyline_rests_at_vertices() {
        let v = vec![vec![0.0, 0.0], vec![0.1, 0.0], vec![0.1, 0.05]];
        let p = timed_polyline(&v, 0.2, 0.3, 0.1, 0.02).unwrap();
        assert_eq!(p[0], v[0]);
        assert_eq!(p.last().unwrap(), &v[2]);
        // 5 dwell + start + 25 + 15 + 5 dwell
        assert_eq!(p.len(), 51);
        assert_eq!(p[5 + 25], v[1]);
        // starts and stops smoothly
        assert!((p[6][0] - p[5][0]).abs() < 1e-4);
    }

    #[test]
    fn rice_asset_loads() {
        let v = rice_vertices();
        assert!(v.len() > 10);
        assert!(v.iter().all(|p| p.len() == 2 && p[0].abs() <= 0.15 && p[1].abs() <= 0.05));
        assert!(parse_vertices("x,z\n1,2\nbad,3").is_err());
    }

    #[test]
    fn circle_closes_and_spacing_is_uniform() {
        let c = circle(Vec2::ZERO, 150.0, 120);
        assert_eq!(c.len(), 120);
        assert!(c.iter().all(|p| (p.norm() - 150.0).abs() < 1e-9));
        let d0 = c[0].distance(c[1]);
        assert!((c[0].distance(c[119]) - d0).abs() < 1e-9);
        assert!(c.windows(2).all(|w| (w[0].distance(w[1]) - d0).abs() < 1e-9));
    }

    #[test]
    fn resample_keeps_ends_and_bounds_spacing() {
        let v = [Vec2::ZERO, Vec2::new(10.0, 0.0), Vec2::new(10.0, 7.0)];
        let r = resample_polyline(&v, 2.0).unwrap();
        assert_eq!(r[0], Vec2::ZERO);
        assert!(r.last().unwrap().distance(v[2]) < 1e-9);
        assert!(r.windows(2).all(|w| w[0].distance(w[1]) <= 2.0 + 1e-9));
        assert_eq!(r.len(), 10);
    }

    #[test]
    fn resample_rejects_single_vertex() {
        assert!(resample_polyline(&[Vec2::ZERO], 1.0).is_err());
    }
}
