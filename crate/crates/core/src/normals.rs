//! Normal estimation for clouds that come without them: PCA over the k
//! nearest neighbors, then greedy orientation propagation along the
//! neighbor graph, cheapest turn first.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use nalgebra::{Matrix3, SymmetricEigen};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::{UnitVec3, Vec3};

pub fn estimate_normals(points: &[Vec3], k: usize) -> Result<PointCloud> {
    if k < 3 {
        return Err(Error::Input("normal estimation needs k >= 3".into()));
    }
    if points.len() < k + 1 {
        return Err(Error::Input(format!(
            "normal estimation with k = {k} needs at least {} points, got {}",
            k + 1,
            points.len()
        )));
    }
    let neighbors = knn(points, k);
    let mut normals = Vec::with_capacity(points.len());
    for (i, nb) in neighbors.iter().enumerate() {
        normals.push(pca_normal(points, i, nb)?);
    }
    orient(points, &neighbors, &mut normals);
    let normals = normals
        .into_iter()
        .map(UnitVec3::new_normalize)
        .collect::<Result<Vec<_>, _>>()?;
    PointCloud::new(points.to_vec(), normals)
}

fn pca_normal(points: &[Vec3], i: usize, nb: &[usize]) -> Result<Vec3> {
    let n = (nb.len() + 1) as f64;
    let mut mean = points[i];
    for &j in nb {
        mean += points[j];
    }
    let mean = mean / n;
    let mut cov = Matrix3::<f64>::zeros();
    for &j in nb.iter().chain(std::iter::once(&i)) {
        let r = points[j] - mean;
        let r = nalgebra::Vector3::new(r.x, r.y, r.z);
        cov += r * r.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let (mid, hi) = (eig.eigenvalues[order[1]], eig.eigenvalues[order[2]]);
    // A neighborhood that spans no plane (all points on a line) leaves the
    // normal undetermined.
    if !(hi > 0.0) || mid <= 1e-12 * hi {
        return Err(Error::Input(format!(
            "degenerate covariance around point {i} (collinear neighborhood)"
        )));
    }
    let e = eig.eigenvectors.column(order[0]);
    Ok(Vec3::new(e[0], e[1], e[2]))
}

/// k nearest neighbors (excluding the point itself) using a uniform hash
/// grid sized for about two points per cell.
fn knn(points: &[Vec3], k: usize) -> Vec<Vec<usize>> {
    let (mut lo, mut hi) = (points[0], points[0]);
    for p in points {
        lo = Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
        hi = Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
    }
    let ext = hi - lo;
    let diag = ext.norm().max(1e-12);
    // Surface samples: cell area scales like extent^2 / n.
    let area = (ext.x * ext.y + ext.y * ext.z + ext.z * ext.x).max(diag * diag * 1e-6);
    let cell = (2.0 * area / points.len() as f64).sqrt().max(diag * 1e-6);
    let key = |p: Vec3| {
        let q = (p - lo) / cell;
        (q.x.floor() as i64, q.y.floor() as i64, q.z.floor() as i64)
    };
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        grid.entry(key(*p)).or_default().push(i);
    }
    let max_ring = (diag / cell).ceil() as i64 + 1;

    points
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let c = key(p);
            let mut found: Vec<(f64, usize)> = Vec::new();
            let mut ring = 0i64;
            loop {
                let side = (2 * ring + 1) as usize;
                if side.saturating_pow(3) > grid.len() * 8 {
                    // Shells have outgrown the occupied cells; finish by brute force.
                    found = (0..points.len())
                        .filter(|&j| j != i)
                        .map(|j| (p.distance_squared(points[j]), j))
                        .collect();
                    break;
                }
                for dx in -ring..=ring {
                    for dy in -ring..=ring {
                        for dz in -ring..=ring {
                            if dx.abs().max(dy.abs()).max(dz.abs()) != ring {
                                continue;
                            }
                            if let Some(cell_pts) = grid.get(&(c.0 + dx, c.1 + dy, c.2 + dz)) {
                                for &j in cell_pts {
                                    if j != i {
                                        found.push((p.distance_squared(points[j]), j));
                                    }
                                }
                            }
                        }
                    }
                }
                // Everything within `ring * cell` of p has been seen.
                if found.len() >= k {
                    found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                    let reach = ring as f64 * cell;
                    if found[k - 1].0 <= reach * reach || ring >= max_ring {
                        break;
                    }
                } else if ring >= max_ring {
                    break;
                }
                ring += 1;
            }
            found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            found.truncate(k);
            found.into_iter().map(|(_, j)| j).collect()
        })
        .collect()
}

#[derive(PartialEq)]
struct Edge {
    cost: f64,
    to: usize,
    from: usize,
}

impl Eq for Edge {}

impl PartialOrd for Edge {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Edge {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on cost, deterministic on ties.
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.to.cmp(&self.to))
            .then_with(|| other.from.cmp(&self.from))
    }
}

/// Prim-style propagation over the symmetrized kNN graph. Each component is
/// seeded at its highest point, whose normal is turned to face +z.
fn orient(points: &[Vec3], neighbors: &[Vec<usize>], normals: &mut [Vec3]) {
    let n = points.len();
    let mut adj: Vec<Vec<usize>> = neighbors.to_vec();
    for (i, nb) in neighbors.iter().enumerate() {
        for &j in nb {
            adj[j].push(i);
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    let mut by_height: Vec<usize> = (0..n).collect();
    by_height.sort_by(|&a, &b| points[b].z.total_cmp(&points[a].z).then(a.cmp(&b)));

    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &seed in &by_height {
        if done[seed] {
            continue;
        }
        if normals[seed].z < 0.0 {
            normals[seed] = -normals[seed];
        }
        done[seed] = true;
        let push = |heap: &mut BinaryHeap<Edge>, normals: &[Vec3], done: &[bool], from: usize| {
            for &to in &adj[from] {
                if !done[to] {
                    let cost = 1.0 - normals[from].dot(normals[to]).abs();
                    heap.push(Edge { cost, to, from });
                }
            }
        };
        push(&mut heap, normals, &done, seed);
        while let Some(Edge { to, from, .. }) = heap.pop() {
            if done[to] {
                continue;
            }
            if normals[from].dot(normals[to]) < 0.0 {
                normals[to] = -normals[to];
            }
            done[to] = true;
            push(&mut heap, normals, &done, to);
        }
    }
}
