//! Region triangulation by smallest-angle ear cutting, plus a manifold check
//! for the finished mesh.

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;

use serde::Serialize;

use crate::geometry::{ccw_angle_2d, UnitVec3, Vec2, Vec3};
use crate::growth::GrowthGraph;
use crate::mesh::{canonical_rotation, TriangleMesh};

pub const DEFAULT_MAX_BORDER: usize = 40;

/// Counterclockwise angle at `v` from `next - v` to `prev - v` after
/// projecting both onto the plane of `normal`. Values above pi mark reflex
/// corners. A direction that vanishes in projection yields 0.
pub fn inner_angle(prev: Vec3, v: Vec3, next: Vec3, normal: UnitVec3) -> f64 {
    let (t1, t2) = normal.tangent_frame();
    let flat = |p: Vec3| {
        let r = p - v;
        Vec2::new(r.dot(t1), r.dot(t2))
    };
    let (a, b) = (flat(next), flat(prev));
    if a.norm() == 0.0 || b.norm() == 0.0 {
        return 0.0;
    }
    ccw_angle_2d(a, b)
}

/// Drops consecutive repeats, including the pair across the wrap.
fn collapse_repeats(cycle: &mut Vec<u32>) {
    cycle.dedup();
    while cycle.len() > 1 && cycle.first() == cycle.last() {
        cycle.pop();
    }
}

/// Triangulates one border cycle. Each step cuts the corner with the smallest
/// inner angle among the non-reflex corners (lowest vertex index on ties);
/// only when every corner is reflex does the smallest reflex one go. Cutting
/// a spike `u, v, u` left by a dangling edge emits nothing.
pub fn cut_ears(cycle: &[u32], positions: &[Vec3], normals: &[UnitVec3]) -> Vec<[u32; 3]> {
    let mut poly = cycle.to_vec();
    collapse_repeats(&mut poly);
    let angle_at = |poly: &[u32], k: usize| {
        let m = poly.len();
        let (p, v, n) = (poly[(k + m - 1) % m], poly[k], poly[(k + 1) % m]);
        inner_angle(positions[p as usize], positions[v as usize], positions[n as usize], normals[v as usize])
    };
    let mut out = Vec::with_capacity(poly.len().saturating_sub(2));
    while poly.len() >= 3 {
        // Borders stay short, so rescanning every corner is cheap.
        let angles: Vec<f64> = (0..poly.len()).map(|k| angle_at(&poly, k)).collect();
        let pick = |reflex_ok: bool| {
            (0..poly.len())
                .filter(|&k| reflex_ok || angles[k] <= PI)
                .min_by(|&i, &j| angles[i].total_cmp(&angles[j]).then(poly[i].cmp(&poly[j])))
        };
        let k = pick(false).or_else(|| pick(true)).expect("polygon is nonempty");
        let m = poly.len();
        let (p, v, n) = (poly[(k + m - 1) % m], poly[k], poly[(k + 1) % m]);
        if p != n {
            out.push([p, v, n]);
        }
        poly.remove(k);
        // Removing a spike tip leaves its base twice in a row.
        collapse_repeats(&mut poly);
    }
    out
}

/// Triangulates every border with `3 <= length < max_border` in border id
/// order; longer borders become holes.
pub fn triangulate_regions(graph: &GrowthGraph, max_border: usize) -> TriangleMesh {
    let positions = graph.positions();
    let normals: Vec<UnitVec3> = graph.vertices().iter().map(|v| v.normal).collect();
    let mut mesh = TriangleMesh {
        vertices: positions.clone(),
        ..TriangleMesh::default()
    };
    let mut seen = HashSet::new();
    for id in graph.live_borders() {
        let len = graph.border(id).length;
        if len < 3 {
            continue;
        }
        let cycle = graph.border_vertices(id);
        if len >= max_border {
            mesh.holes.push(cycle);
            continue;
        }
        for t in cut_ears(&cycle, &positions, &normals) {
            if seen.insert(canonical_rotation(t)) {
                mesh.triangles.push(t);
            }
        }
    }
    mesh
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifoldReport {
    /// No edge with more than two triangles and every vertex fan a disk or
    /// half-disk.
    pub is_manifold_with_boundary: bool,
    /// Manifold and without boundary edges.
    pub is_closed: bool,
    /// Neighboring triangles agree on orientation.
    pub consistently_oriented: bool,
    pub nonmanifold_edges: Vec<(u32, u32)>,
    pub nonmanifold_vertices: Vec<u32>,
    pub boundary_edges: usize,
    /// V - E + F over the vertices used by triangles.
    pub euler_characteristic: i64,
}

pub fn validate_manifold(mesh: &TriangleMesh) -> ManifoldReport {
    let mut edge_faces: HashMap<(u32, u32), usize> = HashMap::new();
    let mut directed: HashMap<(u32, u32), usize> = HashMap::new();
    // Opposite edge of each corner, per vertex: the vertex link.
    let mut links: HashMap<u32, Vec<(u32, u32)>> = HashMap::new();
    for t in &mesh.triangles {
        for k in 0..3 {
            let (a, b, c) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
            *edge_faces.entry((a.min(b), a.max(b))).or_default() += 1;
            *directed.entry((a, b)).or_default() += 1;
            links.entry(a).or_default().push((b, c));
        }
    }
    let mut nonmanifold_edges: Vec<(u32, u32)> = edge_faces.iter().filter(|(_, &n)| n > 2).map(|(&e, _)| e).collect();
    nonmanifold_edges.sort_unstable();
    let boundary_edges = edge_faces.values().filter(|&&n| n == 1).count();
    let consistently_oriented = directed.values().all(|&n| n == 1);

    let mut nonmanifold_vertices: Vec<u32> = links
        .iter()
        .filter(|(_, link)| !is_disk_link(link))
        .map(|(&v, _)| v)
        .collect();
    nonmanifold_vertices.sort_unstable();

    let euler_characteristic = links.len() as i64 - edge_faces.len() as i64 + mesh.triangles.len() as i64;
    let is_manifold_with_boundary = nonmanifold_edges.is_empty() && nonmanifold_vertices.is_empty();
    ManifoldReport {
        is_manifold_with_boundary,
        is_closed: is_manifold_with_boundary && boundary_edges == 0 && !mesh.triangles.is_empty(),
        consistently_oriented,
        nonmanifold_edges,
        nonmanifold_vertices,
        boundary_edges,
        euler_characteristic,
    }
}

/// A link is a single cycle or a single path.
fn is_disk_link(link: &[(u32, u32)]) -> bool {
    let mut adj: HashMap<u32, Vec<u32>> = HashMap::new();
    for &(a, b) in link {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    if adj.values().any(|n| n.len() > 2) {
        return false;
    }
    let ends = adj.values().filter(|n| n.len() == 1).count();
    if ends != 0 && ends != 2 {
        return false;
    }
    // Connected?
    let start = link[0].0;
    let mut seen = HashSet::from([start]);
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &w in &adj[&u] {
            if seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen.len() == adj.len()
}
