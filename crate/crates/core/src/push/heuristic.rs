//! Candidate scoring and push selection.

use super::poa::{compute_poa, Poa};
use super::problem::PushProblem;
use crate::geometry::{angular_distance, Vec2};
use crate::pss::{contains_geometric, CageCircle, PssGrid};
use std::f64::consts::PI;

/// Area of the object footprint beyond the pusher line and its farthest
/// reach, both measured from a pusher resting at `cage_next.radius + r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutsideStats {
    pub area: f64,
    pub depth: f64,
}

pub fn outside_stats(poa: &Poa, theta: f64, cage_next: &CageCircle, r: f64) -> OutsideStats {
    let normal = Vec2::from_angle(theta);
    let line = cage_next.radius + r;
    let cell_area = poa.grid.resolution().powi(2);
    let mut area = 0.0;
    let mut depth: f64 = 0.0;
    for p in poa.grid.occupied_points() {
        let beyond = (p - cage_next.center).dot(normal) - line;
        if beyond > 1e-9 {
            area += cell_area;
            depth = depth.max(beyond);
        }
    }
    OutsideStats { area, depth }
}

/// Weighted score of the footprint left outside by a push from `theta`.
/// Area is normalized by the cage disk and depth by the cage radius.
pub fn heuristic_score(
    poa: &Poa,
    theta: f64,
    cage_next: &CageCircle,
    r: f64,
    lambda1: f64,
    lambda2: f64,
) -> f64 {
    let s = outside_stats(poa, theta, cage_next, r);
    let c = cage_next.radius;
    lambda1 * s.area / (PI * c * c) + lambda2 * (s.depth / c).powi(2)
}

/// A chosen push: candidate index `k` in `1..=K` and its angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PushChoice {
    pub k: usize,
    pub theta: f64,
}

/// Picks the next push, or `None` when the states already sit inside
/// `cage_next`.
///
/// All candidates are scored; among the `top_n` best the one closest to
/// `prev_action` wins. Without a previous push the best score wins.
pub fn find_push(
    pss: &PssGrid,
    problem: &PushProblem,
    cage_next: &CageCircle,
    prev_action: Option<f64>,
) -> Option<PushChoice> {
    if contains_geometric(pss, cage_next) {
        return None;
    }
    rank_candidates(pss, problem, cage_next, prev_action).into_iter().next()
}

/// Every candidate in preference order. The first entry is the one
/// [`find_push`] returns; the remaining `top_n` entries follow by closeness
/// to `prev_action`, then the rest by score.
pub fn rank_candidates(
    pss: &PssGrid,
    problem: &PushProblem,
    cage_next: &CageCircle,
    prev_action: Option<f64>,
) -> Vec<PushChoice> {
    let poa = compute_poa(&pss.recentered(cage_next.center), problem.object_radius);
    let mut scored: Vec<(usize, f64, f64)> = (1..=problem.candidates)
        .map(|k| {
            let theta = problem.candidate_angle(k);
            let h = heuristic_score(&poa, theta, cage_next, problem.object_radius, problem.lambda1, problem.lambda2);
            (k, theta, h)
        })
        .collect();
    // highest score first, lowest index on ties; keys are quantized so that
    // rounding noise between mirror-image candidates cannot break a tie
    scored.sort_by_key(|&(k, _, h)| (std::cmp::Reverse(quantize(h)), k));
    if let Some(prev) = prev_action {
        let top = problem.top_n.min(scored.len());
        scored[..top].sort_by_key(|&(k, theta, _)| (quantize(angular_distance(theta, prev)), k));
    }
    scored.into_iter().map(|(k, theta, _)| PushChoice { k, theta }).collect()
}

fn quantize(v: f64) -> i64 {
    (v * 1e9).round() as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poa_from(points: &[(i64, i64)]) -> Poa {
        let mut g = PssGrid::empty(Vec2::ZERO, 80.0, 1.0);
        for &(x, y) in points {
            g.insert_lattice(x, y);
        }
        Poa { grid: g }
    }

    #[test]
    fn near_side_scores_zero() {
        let poa = compute_poa(&poa_from(&[(0, 0), (5, 5)]).grid, 25.0);
        let cage = CageCircle::new(Vec2::ZERO, 20.0);
        for k in 0..16 {
            let h = heuristic_score(&poa, k as f64 * PI / 8.0, &cage, 25.0, 1.0, 1.0);
            assert_eq!(h, 0.0);
        }
    }

    #[test]
    fn symmetric_footprint_scores_opposites_equally() {
        let poa = compute_poa(&poa_from(&[(30, 4), (-30, -4)]).grid, 25.0);
        let cage = CageCircle::new(Vec2::ZERO, 20.0);
        for k in 0..16 {
            let t = k as f64 * PI / 8.0;
            let a = heuristic_score(&poa, t, &cage, 25.0, 1.0, 1.0);
            let b = heuristic_score(&poa, t + PI, &cage, 25.0, 1.0, 1.0);
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn square_block_behind_the_line() {
        // line at x = 45; block covers x in 41..=50, y in -5..=4
        let mut pts = Vec::new();
        for y in -5..5 {
            for x in 41..51 {
                pts.push((x, y));
            }
        }
        let poa = poa_from(&pts);
        let cage = CageCircle::new(Vec2::ZERO, 20.0);
        let s = outside_stats(&poa, 0.0, &cage, 25.0);
        // columns 46..=50 are strictly beyond the line
        assert_eq!(s.area, 50.0);
        assert_eq!(s.depth, 5.0);
        let h = heuristic_score(&poa, 0.0, &cage, 25.0, 1.0, 1.0);
        let expected = 50.0 / (PI * 400.0) + (5.0f64 / 20.0).powi(2);
        assert!((h - expected).abs() < 1e-12);
    }

    fn escaping_east() -> (PssGrid, PushProblem, CageCircle) {
        let p = PushProblem::with_defaults(20.0, 32, vec![Vec2::ZERO]);
        let mut g = PssGrid::empty(Vec2::ZERO, p.grid_half_extent(), 1.0);
        for y in -3..=3 {
            for x in 15..=26 {
                g.insert_lattice(x, y);
            }
        }
        let cage = CageCircle::new(Vec2::ZERO, p.planning_cage_size());
        (g, p, cage)
    }

    #[test]
    fn contained_states_need_no_push() {
        let p = PushProblem::with_defaults(20.0, 32, vec![Vec2::ZERO]);
        let mut g = PssGrid::empty(Vec2::ZERO, p.grid_half_extent(), 1.0);
        g.insert_lattice(3, -4);
        let cage = CageCircle::new(Vec2::ZERO, 19.0);
        assert_eq!(find_push(&g, &p, &cage, Some(1.0)), None);
    }

    #[test]
    fn escaping_east_is_pushed_from_the_east() {
        let (g, p, cage) = escaping_east();
        let poa = compute_poa(&g.recentered(cage.center), p.object_radius);
        let mut scores: Vec<(usize, f64)> = (1..=p.candidates)
            .map(|k| (k, heuristic_score(&poa, p.candidate_angle(k), &cage, 25.0, 1.0, 1.0)))
            .collect();
        scores.sort_by_key(|&(k, h)| (std::cmp::Reverse(quantize(h)), k));
        let top: Vec<usize> = scores.iter().take(5).map(|s| s.0).collect();
        // the block's corners reach farther from the two neighbours of east
        assert_eq!(top, vec![1, 31, 32, 2, 30]);
        let choice = find_push(&g, &p, &cage, Some(0.0)).unwrap();
        assert_eq!(choice.k, 32);
        assert_eq!(choice.theta, 0.0);
        // from the north-east the nearest top-5 candidate is k = 2
        let choice = find_push(&g, &p, &cage, Some(PI / 4.0)).unwrap();
        assert_eq!(choice.k, 2);
    }

    #[test]
    fn first_push_takes_the_global_best() {
        let (g, p, cage) = escaping_east();
        assert_eq!(find_push(&g, &p, &cage, None).unwrap().k, 1);
    }

    #[test]
    fn ties_go_to_the_lower_index() {
        let (g, p, cage) = escaping_east();
        // k = 1 and k = 31 tie on score and sit equally far from east
        let mut q = p.clone();
        q.top_n = 3; // 1, 31, 32
        let choice = find_push(&g, &q, &cage, Some(PI)).unwrap();
        assert_eq!(choice.k, 1);
    }
}
