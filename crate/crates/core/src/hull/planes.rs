//! Flat facets perpendicular to a coordinate axis: the hull signature of a
//! level crossing.

use serde::{Deserialize, Serialize};

use super::{cross, dot, norm, scale, sub, Axis, Hull3, Point3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneOptions {
    pub angle_tol: f64,
    pub min_vertices: usize,
    /// Smallest in-plane width; narrower facets are finite-grid slivers.
    pub min_width: f64,
}

impl Default for PlaneOptions {
    fn default() -> Self {
        Self {
            angle_tol: 1e-6,
            min_vertices: 4,
            min_width: 1e-4,
        }
    }
}

/// Minimum caliper width of a convex polygon given in loop order.
pub fn min_width(poly: &[[f64; 2]]) -> f64 {
    let m = poly.len();
    if m < 3 {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for i in 0..m {
        let (a, b) = (poly[i], poly[(i + 1) % m]);
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let l = dx.hypot(dy);
        if l == 0.0 {
            continue;
        }
        let w = poly
            .iter()
            .map(|p| ((p[0] - a[0]) * dy - (p[1] - a[1]) * dx).abs() / l)
            .fold(0.0, f64::max);
        best = best.min(w);
    }
    best
}

fn in_plane(hull: &Hull3, f: usize) -> Vec<[f64; 2]> {
    let n = hull.facets[f].normal;
    let helper: Point3 = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = cross(&n, &helper);
    let e1 = scale(&e1, 1.0 / norm(&e1));
    let e2 = cross(&n, &e1);
    let o = hull.points[hull.facets[f].vertex_loop[0]];
    hull.facets[f]
        .vertex_loop
        .iter()
        .map(|&v| {
            let d = sub(&hull.points[v], &o);
            [dot(&d, &e1), dot(&d, &e2)]
        })
        .collect()
}

/// Facet ids whose normal is parallel to `normal_axis`.
pub fn detect_first_order_plane(hull: &Hull3, normal_axis: Axis, opts: &PlaneOptions) -> Vec<usize> {
    let u = normal_axis.unit();
    (0..hull.facets.len())
        .filter(|&f| {
            let fc = &hull.facets[f];
            dot(&fc.normal, &u).abs() >= opts.angle_tol.cos()
                && fc.vertex_loop.len() >= opts.min_vertices
                && min_width(&in_plane(hull, f)) >= opts.min_width
        })
        .collect()
}
