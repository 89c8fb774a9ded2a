//! Ruled-surface verification. Candidate segments come from upstream physics
//! (symmetry-partner or degenerate ground-state pairs); geometry only checks
//! that each one is axis-parallel and lies in a merged facet plane whose
//! normal is perpendicular to the axis.

use serde::{Deserialize, Serialize};

use super::{dot, norm, sub, Hull3, Point3};
use crate::lmg::RdmPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Jz,
    Jz2,
    Jpm2,
}

impl Axis {
    pub fn index(&self) -> usize {
        match self {
            Axis::Jz => 0,
            Axis::Jz2 => 1,
            Axis::Jpm2 => 2,
        }
    }

    pub fn unit(&self) -> Point3 {
        let mut u = [0.0; 3];
        u[self.index()] = 1.0;
        u
    }

    pub fn name(&self) -> &'static str {
        match self {
            Axis::Jz => "jz",
            Axis::Jz2 => "jz2",
            Axis::Jpm2 => "jpm2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "jz" => Some(Axis::Jz),
            "jz2" => Some(Axis::Jz2),
            "jpm2" => Some(Axis::Jpm2),
            _ => None,
        }
    }

    /// Symmetry whose breaking produces rulings along this axis.
    pub fn interpretation(&self) -> &'static str {
        match self {
            Axis::Jz => "spin_flip",
            Axis::Jpm2 => "parity",
            Axis::Jz2 => "none",
        }
    }
}

/// Segment between two input points of the hull.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSegment {
    pub a: usize,
    pub b: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RulingSegment {
    pub endpoints: [usize; 2],
    pub a: Point3,
    pub b: Point3,
    /// Merged facets whose plane holds the segment.
    pub facets: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuledSurfaceReport {
    pub axis: Axis,
    pub interpretation: String,
    pub facet_ids: Vec<usize>,
    /// Facets grouped by normal direction up to sign.
    pub families: Vec<Vec<usize>>,
    pub segments: Vec<RulingSegment>,
}

impl RuledSurfaceReport {
    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Partner pairs whose connecting segment is parallel to `axis`: spin-flip
/// partners (eps, l) and (-eps, l) for jz, parity partners (eps, l) and
/// (eps, -l) for jpm2.
pub fn partner_segments(points: &[RdmPoint], axis: Axis) -> Vec<CandidateSegment> {
    let mut out = Vec::new();
    for i in 0..points.len() {
        let pi = &points[i].params;
        for j in i + 1..points.len() {
            let pj = &points[j].params;
            if pi.n_particles != pj.n_particles {
                continue;
            }
            let pair = match axis {
                Axis::Jz => pi.epsilon != 0.0 && close(pi.epsilon, -pj.epsilon) && close(pi.lambda, pj.lambda),
                Axis::Jpm2 => pi.lambda != 0.0 && close(pi.lambda, -pj.lambda) && close(pi.epsilon, pj.epsilon),
                Axis::Jz2 => false,
            };
            if pair {
                out.push(CandidateSegment { a: i, b: j });
            }
        }
    }
    out
}

/// Loop edges of merged facets that run parallel to `axis`.
pub fn axis_parallel_edges(hull: &Hull3, axis: Axis, angle_tol: f64) -> Vec<CandidateSegment> {
    let u = axis.unit();
    let mut out: Vec<CandidateSegment> = Vec::new();
    for f in &hull.facets {
        let m = f.vertex_loop.len();
        for i in 0..m {
            let (a, b) = (f.vertex_loop[i], f.vertex_loop[(i + 1) % m]);
            let d = sub(&hull.points[b], &hull.points[a]);
            let l = norm(&d);
            if l > hull.eps && (dot(&d, &u).abs() / l) >= angle_tol.cos() {
                out.push(CandidateSegment { a: a.min(b), b: a.max(b) });
            }
        }
    }
    out.sort_by_key(|c| (c.a, c.b));
    out.dedup();
    out
}

pub fn detect_ruled_surfaces(
    hull: &Hull3,
    axis: Axis,
    angle_tol: f64,
    min_lines: usize,
    candidates: &[CandidateSegment],
) -> RuledSurfaceReport {
    let u = axis.unit();
    let perp_tol = angle_tol.sin();
    let facets_perp: Vec<usize> = (0..hull.facets.len())
        .filter(|&f| dot(&hull.facets[f].normal, &u).abs() <= perp_tol)
        .collect();
    let mut segments = Vec::new();
    for c in candidates {
        let (pa, pb) = (hull.points[c.a], hull.points[c.b]);
        let d = sub(&pb, &pa);
        let l = norm(&d);
        if l <= hull.eps || dot(&d, &u).abs() / l < angle_tol.cos() {
            continue;
        }
        let holders: Vec<usize> = facets_perp
            .iter()
            .copied()
            .filter(|&f| {
                let fc = &hull.facets[f];
                fc.signed_distance(&pa).abs() <= hull.eps && fc.signed_distance(&pb).abs() <= hull.eps
            })
            .collect();
        if !holders.is_empty() {
            segments.push(RulingSegment {
                endpoints: [c.a, c.b],
                a: pa,
                b: pb,
                facets: holders,
            });
        }
    }
    if segments.len() < min_lines {
        segments.clear();
    }
    let mut facet_ids: Vec<usize> = segments.iter().flat_map(|s| s.facets.iter().copied()).collect();
    facet_ids.sort_unstable();
    facet_ids.dedup();

    let mut families: Vec<Vec<usize>> = Vec::new();
    for &f in &facet_ids {
        let n = hull.facets[f].normal;
        match families
            .iter_mut()
            .find(|fam| dot(&hull.facets[fam[0]].normal, &n).abs() >= hull.angle_tol.max(angle_tol).cos())
        {
            Some(fam) => fam.push(f),
            None => families.push(vec![f]),
        }
    }
    RuledSurfaceReport {
        axis,
        interpretation: axis.interpretation().to_string(),
        facet_ids,
        families,
        segments,
    }
}
