//! Sparse grid of cubes with side `d`.
//!
//! Every box keeps the splats within reach of it, a box normal derived from
//! those splats, and the growth vertices that currently sit inside it.

use std::collections::HashMap;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::{point_cube_distance, UnitVec3, Vec3, REL_EPS};

/// Average-normal length below which a box keeps all of its points.
pub const FILTER_THRESHOLD: f64 = 0.1;

/// Subdivision level of the icosphere used to search box normals
/// (642 directions).
pub const SPHERE_SAMPLING_LEVEL: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoxKey {
    pub ix: i64,
    pub iy: i64,
    pub iz: i64,
}

impl BoxKey {
    pub fn containing(p: Vec3, d: f64) -> Self {
        BoxKey {
            ix: (p.x / d).floor() as i64,
            iy: (p.y / d).floor() as i64,
            iz: (p.z / d).floor() as i64,
        }
    }

    pub fn offset(self, dx: i64, dy: i64, dz: i64) -> Self {
        BoxKey {
            ix: self.ix + dx,
            iy: self.iy + dy,
            iz: self.iz + dz,
        }
    }

    /// Minimum corner of the cube.
    pub fn corner(self, d: f64) -> Vec3 {
        Vec3::new(self.ix as f64 * d, self.iy as f64 * d, self.iz as f64 * d)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridBox {
    /// Indices of registered points, ascending.
    pub registered: Vec<u32>,
    /// Registered points the normal filter removed, ascending.
    pub filtered_out: Vec<u32>,
    pub normal: Option<UnitVec3>,
}

#[derive(Debug, Clone)]
pub struct BoxGrid {
    d: f64,
    boxes: HashMap<BoxKey, GridBox>,
    sphere_sampling: Vec<UnitVec3>,
    resident: HashMap<BoxKey, Vec<(u32, Vec3)>>,
}

/// Registers every input point in all boxes within reach, filters each box by
/// its average normal and computes box normals.
///
/// A point is registered in a box when the box cube lies within
/// `d + r` of the point, `r` being its splat radius (0 when radii are not yet
/// assigned). With radii present a box therefore sees every splat disk that
/// comes within `d` of it.
pub fn build_box_grid(cloud: &PointCloud, d: f64) -> Result<BoxGrid> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Config(format!("edge length must be positive, got {d}")));
    }
    if cloud.is_empty() {
        return Err(Error::Input("point cloud is empty".into()));
    }
    let mut boxes: HashMap<BoxKey, GridBox> = HashMap::new();
    for (i, &p) in cloud.points().iter().enumerate() {
        let reach = d + cloud.radius(i);
        // One extra box on each side; the cube distance test decides.
        let lo = BoxKey::containing(p - Vec3::new(reach, reach, reach), d).offset(-1, -1, -1);
        let hi = BoxKey::containing(p + Vec3::new(reach, reach, reach), d).offset(1, 1, 1);
        for ix in lo.ix..=hi.ix {
            for iy in lo.iy..=hi.iy {
                for iz in lo.iz..=hi.iz {
                    let key = BoxKey { ix, iy, iz };
                    if point_cube_distance(p, key.corner(d), d) <= reach {
                        boxes.entry(key).or_default().registered.push(i as u32);
                    }
                }
            }
        }
    }
    let sphere_sampling = icosphere(SPHERE_SAMPLING_LEVEL);
    for b in boxes.values_mut() {
        filter_box_points(b, cloud);
        b.normal = Some(compute_box_normal(b, cloud, &sphere_sampling));
    }
    Ok(BoxGrid {
        d,
        boxes,
        sphere_sampling,
        resident: HashMap::new(),
    })
}

/// Drops points facing against the box's summed normal, unless the sum is
/// too short to be trusted.
pub fn filter_box_points(b: &mut GridBox, cloud: &PointCloud) {
    let mut sum = Vec3::ZERO;
    for &i in &b.registered {
        sum += cloud.normal(i as usize).get();
    }
    if sum.norm() < FILTER_THRESHOLD {
        return;
    }
    let (keep, drop): (Vec<u32>, Vec<u32>) =
        b.registered.iter().partition(|&&i| cloud.normal(i as usize).dot(sum) >= 0.0);
    b.registered = keep;
    b.filtered_out = drop;
}

/// The sampled direction maximizing the smallest scalar product with the
/// registered point normals. Ties go to the first direction in `sampling`.
pub fn compute_box_normal(b: &GridBox, cloud: &PointCloud, sampling: &[UnitVec3]) -> UnitVec3 {
    let normals: Vec<Vec3> = b.registered.iter().map(|&i| cloud.normal(i as usize).get()).collect();
    let mut best = (f64::NEG_INFINITY, sampling[0]);
    'dirs: for &dir in sampling {
        let mut worst = f64::INFINITY;
        for n in &normals {
            worst = worst.min(dir.dot(*n));
            if worst <= best.0 {
                continue 'dirs;
            }
        }
        if worst > best.0 {
            best = (worst, dir);
        }
    }
    best.1
}

impl BoxGrid {
    pub fn edge_length(&self) -> f64 {
        self.d
    }

    pub fn key_of(&self, p: Vec3) -> BoxKey {
        BoxKey::containing(p, self.d)
    }

    pub fn get(&self, key: BoxKey) -> Option<&GridBox> {
        self.boxes.get(&key)
    }

    pub fn box_count(&self) -> usize {
        self.boxes.len()
    }

    /// Keys of all stored boxes, sorted.
    pub fn keys(&self) -> Vec<BoxKey> {
        let mut keys: Vec<BoxKey> = self.boxes.keys().copied().collect();
        keys.sort_unstable();
        keys
    }

    pub fn sphere_sampling(&self) -> &[UnitVec3] {
        &self.sphere_sampling
    }

    /// Normal of the box containing `p`, if that box exists.
    pub fn box_normal_at(&self, p: Vec3) -> Option<UnitVec3> {
        self.boxes.get(&self.key_of(p)).and_then(|b| b.normal)
    }

    /// Registered points of the box containing `q`; a superset of every
    /// splat meeting the ball of radius `d` around `q`.
    pub fn splats_near(&self, q: Vec3) -> &[u32] {
        self.boxes
            .get(&self.key_of(q))
            .map_or(&[][..], |b| b.registered.as_slice())
    }

    /// Boxes where some registered normal points away from the box normal,
    /// a sign that `d` is too large for the input.
    pub fn validate_parameter_choice(&self, cloud: &PointCloud) -> Vec<BoxKey> {
        self.keys()
            .into_iter()
            .filter(|k| {
                let b = &self.boxes[k];
                let Some(n) = b.normal else { return false };
                b.registered
                    .iter()
                    .chain(&b.filtered_out)
                    .any(|&i| cloud.normal(i as usize).dot(n.get()) < 0.0)
            })
            .collect()
    }

    pub fn insert_vertex(&mut self, index: u32, position: Vec3) {
        self.resident
            .entry(self.key_of(position))
            .or_default()
            .push((index, position));
    }

    /// Vertices within the closed ball of `radius` around `q`, ascending.
    /// `radius` may not exceed `2d`.
    pub fn vertices_near(&self, q: Vec3, radius: f64) -> Result<Vec<u32>> {
        let mut out = Vec::new();
        self.for_each_vertex_near(q, radius, |i, _| out.push(i))?;
        out.sort_unstable();
        Ok(out)
    }

    /// Calls `f` for every vertex in the closed ball, in no particular order.
    pub fn for_each_vertex_near(&self, q: Vec3, radius: f64, mut f: impl FnMut(u32, Vec3)) -> Result<()> {
        let span = if radius <= self.d * (1.0 + REL_EPS) {
            1
        } else if radius <= 2.0 * self.d * (1.0 + REL_EPS) {
            2
        } else {
            return Err(Error::Contract(format!(
                "vertex query radius {radius} exceeds twice the box size {}",
                self.d
            )));
        };
        let r2 = radius * radius;
        let c = self.key_of(q);
        for dx in -span..=span {
            for dy in -span..=span {
                for dz in -span..=span {
                    if let Some(vs) = self.resident.get(&c.offset(dx, dy, dz)) {
                        for &(i, p) in vs {
                            if p.distance_squared(q) <= r2 {
                                f(i, p);
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Vertices of a subdivided icosahedron projected to the unit sphere.
pub fn icosphere(level: u32) -> Vec<UnitVec3> {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| {
        let v = Vec3::new(x, y, z);
        v / v.norm()
    })
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Vec3>| {
            let key = (a.min(b), a.max(b));
            *mids.entry(key).or_insert_with(|| {
                let m = verts[a].midpoint(verts[b]);
                verts.push(m / m.norm());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    verts.into_iter().map(UnitVec3::new_unchecked).collect()
}
