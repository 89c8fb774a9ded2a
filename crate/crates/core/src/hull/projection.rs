//! Orthogonal projection onto a coordinate plane and the 2D convex outline.

use serde::{Deserialize, Serialize};

use super::{Axis, Point3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub dropped: Axis,
    pub points: Vec<[f64; 2]>,
    /// Counterclockwise outline, indices into `points`.
    pub outline: Vec<usize>,
}

pub fn project_to_plane(points: &[Point3], drop_axis: Axis, eps: f64) -> Projection {
    let keep: Vec<usize> = (0..3).filter(|&k| k != drop_axis.index()).collect();
    let pts: Vec<[f64; 2]> = points.iter().map(|p| [p[keep[0]], p[keep[1]]]).collect();
    let outline = convex_outline_2d(&pts, eps);
    Projection {
        dropped: drop_axis,
        points: pts,
        outline,
    }
}

fn turn(o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Monotone chain; points within eps of an outline edge are not corners.
pub fn convex_outline_2d(pts: &[[f64; 2]], eps: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| {
        pts[a][0]
            .total_cmp(&pts[b][0])
            .then(pts[a][1].total_cmp(&pts[b][1]))
            .then(a.cmp(&b))
    });
    idx.dedup_by(|a, b| pts[*a] == pts[*b]);
    if idx.len() <= 2 {
        return idx;
    }
    let keeps_left = |o: usize, a: usize, b: usize| {
        let l = (pts[b][0] - pts[o][0]).hypot(pts[b][1] - pts[o][1]);
        turn(&pts[o], &pts[a], &pts[b]) > eps * l
    };
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2 && !keeps_left(lower[lower.len() - 2], lower[lower.len() - 1], i) {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2 && !keeps_left(upper[upper.len() - 2], upper[upper.len() - 1], i) {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}
