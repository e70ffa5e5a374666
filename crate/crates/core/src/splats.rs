//! Per-point splat radii from a Delaunay-filtered fan of tangent-plane
//! neighbors.

use std::collections::VecDeque;
use std::f64::consts::PI;

use crate::boxgrid::BoxGrid;
use crate::cloud::PointCloud;
use crate::error::Result;
use crate::geometry::{UnitVec3, Vec2, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplatMode {
    /// Every splat gets radius `s`.
    Global(f64),
    /// Radii from the local neighborhood, capped at `s`.
    Local(f64),
}

impl SplatMode {
    pub fn size(self) -> f64 {
        match self {
            SplatMode::Global(s) | SplatMode::Local(s) => s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentNeighbor {
    pub index: u32,
    pub position: Vec2,
    pub distance: f64,
}

/// Rotates `q` about `p` in the plane spanned by `q - p` and the normal until
/// it lies in the tangent plane. Distance to `p` is preserved. `None` when
/// `q - p` has no tangential component.
pub fn rotate_to_tangent(p: Vec3, normal: UnitVec3, q: Vec3) -> Option<Vec2> {
    let r = q - p;
    let dist = r.norm();
    let t = r - normal.get() * normal.dot(r);
    let tn = t.norm();
    if dist == 0.0 || tn <= 1e-12 * dist {
        return None;
    }
    let (t1, t2) = normal.tangent_frame();
    let s = dist / tn;
    Some(Vec2::new(t.dot(t1) * s, t.dot(t2) * s))
}

/// Neighbors registered in the box of point `i`, rotated into its tangent
/// plane, sorted by angle. Ties keep the nearer point only, since farther
/// points on the same ray cannot be fan vertices.
pub fn tangent_neighborhood(i: usize, grid: &BoxGrid, cloud: &PointCloud) -> Vec<TangentNeighbor> {
    let p = cloud.point(i);
    let n = cloud.normal(i);
    let mut out: Vec<(f64, TangentNeighbor)> = Vec::new();
    for &j in grid.splats_near(p) {
        if j as usize == i {
            continue;
        }
        let q = cloud.point(j as usize);
        if let Some(pos) = rotate_to_tangent(p, n, q) {
            out.push((
                pos.angle(),
                TangentNeighbor {
                    index: j,
                    position: pos,
                    distance: q.distance(p),
                },
            ));
        }
    }
    out.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.distance.total_cmp(&b.1.distance))
            .then(a.1.index.cmp(&b.1.index))
    });
    out.dedup_by(|later, kept| later.0 == kept.0);
    out.into_iter().map(|(_, t)| t).collect()
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).perp_dot(c - a)
}

/// Circumcenter of a triangle, `None` when degenerate.
pub fn circumcenter(a: Vec2, b: Vec2, c: Vec2) -> Option<Vec2> {
    let (b, c) = (b - a, c - a);
    let det = 2.0 * b.perp_dot(c);
    let scale = b.dot(b).max(c.dot(c));
    if det.abs() <= 1e-14 * scale {
        return None;
    }
    let (bb, cc) = (b.dot(b), c.dot(c));
    Some(a + Vec2::new(c.y * bb - b.y * cc, b.x * cc - c.x * bb) * (1.0 / det))
}

/// Whether the edge from the fan center (origin) to `mid` should be flipped:
/// the quad `origin, before, mid, after` must be strictly convex and `after`
/// strictly inside the circumcircle of `origin, before, mid`.
pub fn central_edge_flips(before: Vec2, mid: Vec2, after: Vec2) -> bool {
    let o = Vec2::new(0.0, 0.0);
    let convex = orient(o, before, mid) > 0.0
        && orient(before, mid, after) > 0.0
        && orient(mid, after, o) > 0.0
        && orient(after, o, before) > 0.0;
    if !convex {
        return false;
    }
    let Some(c) = circumcenter(o, before, mid) else {
        return false;
    };
    let r = c.norm();
    (after - c).norm() < r * (1.0 - 1e-9)
}

/// Indices into `fan` of the neighbors that survive Delaunay filtering.
pub fn delaunay_filter(fan: &[Vec2]) -> Vec<usize> {
    let n = fan.len();
    let mut alive = vec![true; n];
    let mut prev: Vec<usize> = (0..n).map(|i| (i + n - 1) % n).collect();
    let mut next: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    let mut count = n;
    let mut work: VecDeque<usize> = (0..n).collect();
    while let Some(i) = work.pop_front() {
        if !alive[i] || count < 4 {
            continue;
        }
        let (a, b) = (prev[i], next[i]);
        if central_edge_flips(fan[a], fan[i], fan[b]) {
            alive[i] = false;
            count -= 1;
            next[a] = b;
            prev[b] = a;
            work.push_back(a);
            work.push_back(b);
        }
    }
    (0..n).filter(|&i| alive[i]).collect()
}

/// Distance from the fan center to the farthest circumcenter of the
/// surviving fan triangles, or `fallback` when the fan does not surround
/// the center.
pub fn fan_radius(neighbors: &[Vec2], fallback: f64) -> f64 {
    let keep = delaunay_filter(neighbors);
    if keep.len() < 3 {
        return fallback;
    }
    let o = Vec2::new(0.0, 0.0);
    let mut worst: f64 = 0.0;
    for k in 0..keep.len() {
        let (a, b) = (neighbors[keep[k]], neighbors[keep[(k + 1) % keep.len()]]);
        let gap = crate::geometry::ccw_angle_2d(a, b);
        if gap >= PI {
            return fallback;
        }
        match circumcenter(o, a, b) {
            Some(c) => worst = worst.max(c.norm()),
            None => return fallback,
        }
    }
    worst
}

pub fn local_splat_size(i: usize, grid: &BoxGrid, cloud: &PointCloud, s: f64) -> f64 {
    let fan: Vec<Vec2> = tangent_neighborhood(i, grid, cloud).iter().map(|t| t.position).collect();
    fan_radius(&fan, s).min(s)
}

/// Attaches splat radii to the cloud. Local mode needs a grid built from the
/// cloud without radii.
pub fn assign_splat_sizes(cloud: PointCloud, grid: Option<&BoxGrid>, mode: SplatMode) -> Result<PointCloud> {
    let radii = match (mode, grid) {
        (SplatMode::Global(s), _) => vec![s; cloud.len()],
        (SplatMode::Local(s), Some(grid)) => (0..cloud.len()).map(|i| local_splat_size(i, grid, &cloud, s)).collect(),
        (SplatMode::Local(_), None) => {
            return Err(crate::error::Error::Contract("local splat sizes need a box grid".into()));
        }
    };
    cloud.with_splat_radii(radii)
}
