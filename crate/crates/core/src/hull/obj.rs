//! Wavefront OBJ export with named facet groups.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{Axis, Hull3, RuledSurfaceReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FacetGroup {
    RuledJz,
    RuledJpm2,
    FirstOrderPlane,
    Other,
}

impl FacetGroup {
    pub fn name(&self) -> &'static str {
        match self {
            FacetGroup::RuledJz => "ruled_jz",
            FacetGroup::RuledJpm2 => "ruled_jpm2",
            FacetGroup::FirstOrderPlane => "first_order_plane",
            FacetGroup::Other => "other",
        }
    }
}

/// Plane membership wins over rulings; unclassified facets are `Other`.
pub fn facet_groups(hull: &Hull3, reports: &[RuledSurfaceReport], planes: &[usize]) -> Vec<FacetGroup> {
    let mut g = vec![FacetGroup::Other; hull.facets.len()];
    for r in reports {
        let tag = match r.axis {
            Axis::Jz => FacetGroup::RuledJz,
            Axis::Jpm2 => FacetGroup::RuledJpm2,
            Axis::Jz2 => continue,
        };
        for &f in &r.facet_ids {
            if g[f] == FacetGroup::Other {
                g[f] = tag;
            }
        }
    }
    for &f in planes {
        g[f] = FacetGroup::FirstOrderPlane;
    }
    g
}

pub fn write_obj(hull: &Hull3, groups: &[FacetGroup]) -> String {
    let mut out = String::from("# convex hull: jz jz2 jpm2\n");
    let mut obj_index = vec![0usize; hull.points.len()];
    for (k, &v) in hull.vertex_ids.iter().enumerate() {
        obj_index[v] = k + 1;
        let p = hull.points[v];
        let _ = writeln!(out, "v {} {} {}", p[0], p[1], p[2]);
    }
    for group in [
        FacetGroup::RuledJz,
        FacetGroup::RuledJpm2,
        FacetGroup::FirstOrderPlane,
        FacetGroup::Other,
    ] {
        let members: Vec<usize> = (0..hull.facets.len()).filter(|&f| groups[f] == group).collect();
        if members.is_empty() {
            continue;
        }
        let _ = writeln!(out, "g {}", group.name());
        for f in members {
            let ids: Vec<String> = hull.facets[f]
                .vertex_loop
                .iter()
                .map(|&v| obj_index[v].to_string())
                .collect();
            let _ = writeln!(out, "f {}", ids.join(" "));
        }
    }
    out
}
