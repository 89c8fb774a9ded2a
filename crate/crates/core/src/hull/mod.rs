//! 3D convex hull with merged coplanar facets.
//!
//! Construction is incremental with conflict lists. Visibility uses the exact
//! `orient3d` predicate, so the triangulation is topologically consistent even
//! on nearly coplanar data; `eps` only enters the dimensionality check,
//! facet merging and the on-boundary queries.

mod obj;
mod planes;
mod projection;
mod ruled;

pub use obj::{facet_groups, write_obj, FacetGroup};
pub use planes::{detect_first_order_plane, min_width, PlaneOptions};
pub use projection::{convex_outline_2d, project_to_plane, Projection};
pub use ruled::{
    axis_parallel_edges, detect_ruled_surfaces, partner_segments, Axis, CandidateSegment, RuledSurfaceReport,
    RulingSegment,
};

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point3 = [f64; 3];

pub(crate) fn sub(a: &Point3, b: &Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: &Point3, b: &Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: &Point3, b: &Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: &Point3) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn scale(a: &Point3, s: f64) -> Point3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn coord(p: &Point3) -> robust::Coord3D<f64> {
    robust::Coord3D {
        x: p[0],
        y: p[1],
        z: p[2],
    }
}

/// Positive when `d` is strictly on the outer side of the outward face (a, b, c).
fn above(a: &Point3, b: &Point3, c: &Point3, d: &Point3) -> f64 {
    -robust::orient3d(coord(a), coord(b), coord(c), coord(d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HullOptions {
    pub eps: f64,
    /// Maximum normal deviation (radians) for merging adjacent triangles.
    pub angle_tol: f64,
}

impl HullOptions {
    pub fn exact() -> Self {
        Self {
            eps: 1e-9,
            angle_tol: 1e-7,
        }
    }

    pub fn noisy(eps: f64) -> Self {
        Self { eps, angle_tol: 1e-2 }
    }
}

impl Default for HullOptions {
    fn default() -> Self {
        Self::exact()
    }
}

/// A merged planar face.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    /// Counterclockwise seen from outside; indices into `Hull3::points`.
    pub vertex_loop: Vec<usize>,
    pub normal: Point3,
    pub offset: f64,
    pub area: f64,
    pub triangles: Vec<[usize; 3]>,
}

impl Facet {
    pub fn signed_distance(&self, p: &Point3) -> f64 {
        dot(&self.normal, p) - self.offset
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hull3 {
    pub points: Vec<Point3>,
    /// Extreme points, ascending input index.
    pub vertex_ids: Vec<usize>,
    pub facets: Vec<Facet>,
    pub eps: f64,
    pub angle_tol: f64,
}

struct Face {
    v: [usize; 3],
    alive: bool,
    outside: Vec<usize>,
    normal: Point3,
    offset: f64,
}

impl Face {
    fn new(v: [usize; 3], pts: &[Point3]) -> Self {
        let n = cross(&sub(&pts[v[1]], &pts[v[0]]), &sub(&pts[v[2]], &pts[v[0]]));
        let len = norm(&n);
        let normal = if len > 0.0 { scale(&n, 1.0 / len) } else { n };
        Self {
            v,
            alive: true,
            outside: Vec::new(),
            offset: dot(&normal, &pts[v[0]]),
            normal,
        }
    }

    fn sees(&self, pts: &[Point3], p: usize) -> bool {
        above(&pts[self.v[0]], &pts[self.v[1]], &pts[self.v[2]], &pts[p]) > 0.0
    }

    fn distance(&self, p: &Point3) -> f64 {
        dot(&self.normal, p) - self.offset
    }
}

fn line_distance(a: &Point3, b: &Point3, p: &Point3) -> f64 {
    let d = sub(b, a);
    let l = norm(&d);
    if l == 0.0 {
        return norm(&sub(p, a));
    }
    norm(&cross(&d, &sub(p, a))) / l
}

fn initial_simplex(pts: &[Point3], eps: f64) -> Result<[usize; 4]> {
    let n = pts.len();
    if n < 4 {
        return Err(Error::Domain(format!("convex hull needs at least 4 points, got {n}")));
    }
    // Widest axis-extreme pair seeds a well-conditioned simplex.
    let mut best = (0usize, 0usize, -1.0);
    for axis in 0..3 {
        let (mut lo, mut hi) = (0, 0);
        for i in 0..n {
            if pts[i][axis] < pts[lo][axis] {
                lo = i;
            }
            if pts[i][axis] > pts[hi][axis] {
                hi = i;
            }
        }
        let d = norm(&sub(&pts[hi], &pts[lo]));
        if d > best.2 {
            best = (lo, hi, d);
        }
    }
    let (i0, i1, d01) = best;
    if d01 <= eps {
        return Err(Error::Degenerate { rank: 0 });
    }
    let argmax = |f: &dyn Fn(&Point3) -> f64| -> (usize, f64) {
        let mut m = (0, -1.0);
        for (i, p) in pts.iter().enumerate() {
            let v = f(p);
            if v > m.1 {
                m = (i, v);
            }
        }
        m
    };
    let (i2, d2) = argmax(&|p| line_distance(&pts[i0], &pts[i1], p));
    if d2 <= eps {
        return Err(Error::Degenerate { rank: 1 });
    }
    let n012 = cross(&sub(&pts[i1], &pts[i0]), &sub(&pts[i2], &pts[i0]));
    let n012 = scale(&n012, 1.0 / norm(&n012));
    let (i3, d3) = argmax(&|p| dot(&n012, &sub(p, &pts[i0])).abs());
    if d3 <= eps {
        return Err(Error::Degenerate { rank: 2 });
    }
    Ok([i0, i1, i2, i3])
}

/// Convex hull of `points` with the default merge angle.
pub fn quickhull3(points: &[Point3], eps: f64) -> Result<Hull3> {
    quickhull3_with(
        points,
        &HullOptions {
            eps,
            ..HullOptions::exact()
        },
    )
}

pub fn quickhull3_with(points: &[Point3], opts: &HullOptions) -> Result<Hull3> {
    if points.iter().any(|p| p.iter().any(|x| !x.is_finite())) {
        return Err(Error::Domain("non-finite hull input".into()));
    }
    let pts = points;
    let s = initial_simplex(pts, opts.eps)?;
    let mut faces: Vec<Face> = Vec::new();
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();

    let add_face = |faces: &mut Vec<Face>, edges: &mut HashMap<(usize, usize), usize>, v: [usize; 3]| -> usize {
        let id = faces.len();
        faces.push(Face::new(v, pts));
        for k in 0..3 {
            edges.insert((v[k], v[(k + 1) % 3]), id);
        }
        id
    };

    let [a, b, c, d] = s;
    let (b, c) = if above(&pts[a], &pts[b], &pts[c], &pts[d]) > 0.0 {
        (c, b)
    } else {
        (b, c)
    };
    // Tetrahedron with (a, b, c) seeing d from below.
    for v in [[a, b, c], [a, d, b], [b, d, c], [c, d, a]] {
        add_face(&mut faces, &mut edges, v);
    }

    for p in 0..pts.len() {
        if s.contains(&p) {
            continue;
        }
        if let Some(f) = (0..faces.len()).find(|&f| faces[f].sees(pts, p)) {
            faces[f].outside.push(p);
        }
    }

    let mut cursor = 0;
    loop {
        while cursor < faces.len() && (!faces[cursor].alive || faces[cursor].outside.is_empty()) {
            cursor += 1;
        }
        if cursor >= faces.len() {
            break;
        }
        let f0 = cursor;
        let eye = {
            let f = &faces[f0];
            let mut best = (f.outside[0], f64::NEG_INFINITY);
            for &p in &f.outside {
                let d = f.distance(&pts[p]);
                if d > best.1 {
                    best = (p, d);
                }
            }
            best.0
        };

        let mut visible = vec![f0];
        let mut is_visible: HashMap<usize, bool> = HashMap::from([(f0, true)]);
        let mut queue = VecDeque::from([f0]);
        while let Some(f) = queue.pop_front() {
            let v = faces[f].v;
            for k in 0..3 {
                let nb = edges[&(v[(k + 1) % 3], v[k])];
                if is_visible.contains_key(&nb) {
                    continue;
                }
                let vis = faces[nb].sees(pts, eye);
                is_visible.insert(nb, vis);
                if vis {
                    visible.push(nb);
                    queue.push_back(nb);
                }
            }
        }

        let mut horizon = Vec::new();
        for &f in &visible {
            let v = faces[f].v;
            for k in 0..3 {
                let (u, w) = (v[k], v[(k + 1) % 3]);
                let nb = edges[&(w, u)];
                if !is_visible.get(&nb).copied().unwrap_or(false) {
                    horizon.push((u, w));
                }
            }
        }

        let mut orphans = Vec::new();
        for &f in &visible {
            faces[f].alive = false;
            orphans.append(&mut faces[f].outside);
            let v = faces[f].v;
            for k in 0..3 {
                let key = (v[k], v[(k + 1) % 3]);
                if edges.get(&key) == Some(&f) {
                    edges.remove(&key);
                }
            }
        }
        let new_faces: Vec<usize> = horizon
            .iter()
            .map(|&(u, w)| add_face(&mut faces, &mut edges, [u, w, eye]))
            .collect();
        for p in orphans {
            if p == eye {
                continue;
            }
            if let Some(&f) = new_faces.iter().find(|&&f| faces[f].sees(pts, p)) {
                faces[f].outside.push(p);
            }
        }
    }

    let tris: Vec<[usize; 3]> = faces.iter().filter(|f| f.alive).map(|f| f.v).collect();
    Ok(merge_facets(pts, &tris, opts))
}

fn tri_normal_area(pts: &[Point3], t: &[usize; 3]) -> (Point3, f64) {
    let n = cross(&sub(&pts[t[1]], &pts[t[0]]), &sub(&pts[t[2]], &pts[t[0]]));
    let l = norm(&n);
    if l > 0.0 {
        (scale(&n, 1.0 / l), 0.5 * l)
    } else {
        ([0.0; 3], 0.0)
    }
}

fn merge_facets(pts: &[Point3], tris: &[[usize; 3]], opts: &HullOptions) -> Hull3 {
    let nt = tris.len();
    let mut edge_owner: HashMap<(usize, usize), usize> = HashMap::new();
    for (i, t) in tris.iter().enumerate() {
        for k in 0..3 {
            edge_owner.insert((t[k], t[(k + 1) % 3]), i);
        }
    }
    let geo: Vec<(Point3, f64)> = tris.iter().map(|t| tri_normal_area(pts, t)).collect();
    let mut order: Vec<usize> = (0..nt).collect();
    order.sort_by(|&a, &b| geo[b].1.total_cmp(&geo[a].1).then(a.cmp(&b)));
    let cos_tol = opts.angle_tol.cos();

    let mut group = vec![usize::MAX; nt];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &seed in &order {
        if group[seed] != usize::MAX {
            continue;
        }
        let gid = groups.len();
        let (n0, _) = geo[seed];
        let d0 = dot(&n0, &pts[tris[seed][0]]);
        let mut members = vec![seed];
        group[seed] = gid;
        let mut queue = VecDeque::from([seed]);
        while let Some(t) = queue.pop_front() {
            let v = tris[t];
            for k in 0..3 {
                let nb = edge_owner[&(v[(k + 1) % 3], v[k])];
                if group[nb] != usize::MAX {
                    continue;
                }
                let (n1, area) = geo[nb];
                let within = tris[nb].iter().all(|&q| (dot(&n0, &pts[q]) - d0).abs() <= opts.eps);
                let longest = (0..3)
                    .map(|k| norm(&sub(&pts[tris[nb][k]], &pts[tris[nb][(k + 1) % 3]])))
                    .fold(0.0, f64::max);
                let sliver = longest > 0.0 && 2.0 * area / longest <= opts.eps;
                let aligned = dot(&n0, &n1) >= cos_tol;
                if within && (aligned || (sliver && dot(&n0, &n1) >= 0.0) || area == 0.0) {
                    group[nb] = gid;
                    members.push(nb);
                    queue.push_back(nb);
                }
            }
        }
        groups.push(members);
    }

    // Boundary loops of each group.
    let mut loops: Vec<Vec<usize>> = Vec::with_capacity(groups.len());
    for (gid, members) in groups.iter().enumerate() {
        let mut next: HashMap<usize, usize> = HashMap::new();
        let mut start = usize::MAX;
        for &t in members {
            let v = tris[t];
            for k in 0..3 {
                let (u, w) = (v[k], v[(k + 1) % 3]);
                if group[edge_owner[&(w, u)]] != gid {
                    next.insert(u, w);
                    start = start.min(u);
                }
            }
        }
        let mut lp = vec![start];
        let mut cur = next[&start];
        while cur != start && lp.len() <= next.len() {
            lp.push(cur);
            cur = next[&cur];
        }
        loops.push(lp);
    }

    // A vertex is redundant when it is collinear within eps in every loop
    // that contains it.
    let mut seen_in = vec![0usize; pts.len()];
    let mut collinear_in = vec![0usize; pts.len()];
    for lp in &loops {
        let m = lp.len();
        for i in 0..m {
            let (prev, cur, nxt) = (lp[(i + m - 1) % m], lp[i], lp[(i + 1) % m]);
            seen_in[cur] += 1;
            if line_distance(&pts[prev], &pts[nxt], &pts[cur]) <= opts.eps {
                collinear_in[cur] += 1;
            }
        }
    }
    let redundant = |v: usize| seen_in[v] > 0 && collinear_in[v] == seen_in[v];

    let mut facets = Vec::with_capacity(groups.len());
    for (members, lp) in groups.iter().zip(&loops) {
        let vertex_loop: Vec<usize> = lp.iter().copied().filter(|&v| !redundant(v)).collect();
        let mut nsum = [0.0; 3];
        let mut area = 0.0;
        for &t in members {
            let (n, a) = geo[t];
            nsum = [nsum[0] + n[0] * a, nsum[1] + n[1] * a, nsum[2] + n[2] * a];
            area += a;
        }
        let l = norm(&nsum);
        let normal = if l > 0.0 { scale(&nsum, 1.0 / l) } else { geo[members[0]].0 };
        let offset = vertex_loop.iter().map(|&v| dot(&normal, &pts[v])).sum::<f64>() / vertex_loop.len().max(1) as f64;
        facets.push(Facet {
            vertex_loop,
            normal,
            offset,
            area,
            triangles: members.iter().map(|&t| tris[t]).collect(),
        });
    }
    let mut vertex_ids: Vec<usize> = facets.iter().flat_map(|f| f.vertex_loop.iter().copied()).collect();
    vertex_ids.sort_unstable();
    vertex_ids.dedup();

    Hull3 {
        points: pts.to_vec(),
        vertex_ids,
        facets,
        eps: opts.eps,
        angle_tol: opts.angle_tol,
    }
}

impl Hull3 {
    pub fn vertices(&self) -> Vec<Point3> {
        self.vertex_ids.iter().map(|&i| self.points[i]).collect()
    }

    pub fn interior_point(&self) -> Point3 {
        let vs = self.vertices();
        let k = vs.len() as f64;
        let s = vs.iter().fold([0.0; 3], |a, p| [a[0] + p[0], a[1] + p[1], a[2] + p[2]]);
        scale(&s, 1.0 / k)
    }

    /// Positive outside, zero on the boundary, negative inside.
    pub fn signed_distance(&self, p: &Point3) -> f64 {
        self.facets
            .iter()
            .map(|f| f.signed_distance(p))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, p: &Point3, tol: f64) -> bool {
        self.signed_distance(p) <= tol
    }

    pub fn on_boundary(&self, p: &Point3, tol: f64) -> bool {
        self.signed_distance(p).abs() <= tol
    }

    pub fn volume(&self) -> f64 {
        let c = self.interior_point();
        let mut v = 0.0;
        for f in &self.facets {
            for t in &f.triangles {
                let a = sub(&self.points[t[0]], &c);
                let b = sub(&self.points[t[1]], &c);
                let d = sub(&self.points[t[2]], &c);
                v += dot(&a, &cross(&b, &d)) / 6.0;
            }
        }
        v
    }

    /// Distinct undirected edges of the merged polytope.
    pub fn edge_count(&self) -> usize {
        let mut e: Vec<(usize, usize)> = Vec::new();
        for f in &self.facets {
            let m = f.vertex_loop.len();
            for i in 0..m {
                let (a, b) = (f.vertex_loop[i], f.vertex_loop[(i + 1) % m]);
                e.push((a.min(b), a.max(b)));
            }
        }
        e.sort_unstable();
        e.dedup();
        e.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_ids.len() as i64 - self.edge_count() as i64 + self.facets.len() as i64
    }

    /// Normals point away from the vertex centroid.
    pub fn normals_outward(&self) -> bool {
        let c = self.interior_point();
        self.facets.iter().all(|f| f.signed_distance(&c) < 0.0)
    }

    pub fn facet_centroid(&self, f: usize) -> Point3 {
        let lp = &self.facets[f].vertex_loop;
        let s = lp.iter().fold([0.0; 3], |a, &v| {
            let p = self.points[v];
            [a[0] + p[0], a[1] + p[1], a[2] + p[2]]
        });
        scale(&s, 1.0 / lp.len() as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Containment {
    pub contained: bool,
    /// Largest signed distance of an inner vertex outside the outer hull.
    pub max_outside: f64,
    pub volume_ratio: f64,
}

pub fn containment(outer: &Hull3, inner: &Hull3, tol: f64) -> Containment {
    let max_outside = inner
        .vertices()
        .iter()
        .map(|p| outer.signed_distance(p))
        .fold(f64::NEG_INFINITY, f64::max);
    Containment {
        contained: max_outside <= tol,
        max_outside,
        volume_ratio: inner.volume() / outer.volume(),
    }
}
