//! Vector primitives and the closed-form kernels used by the mesher:
//! sphere/sphere circles, circle/splat intersection, plane projection and a
//! couple of 2D predicates.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Relative slack applied to distance comparisons throughout the crate.
pub const REL_EPS: f64 = 1e-9;

/// Squared half-chord length below which a circle/plane intersection is
/// reported as a single tangent point.
pub const TANGENT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("argument out of domain: {0}")]
    Domain(&'static str),
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    pub fn distance_squared(self, o: Vec3) -> f64 {
        (self - o).norm_squared()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn midpoint(self, o: Vec3) -> Vec3 {
        (self + o) * 0.5
    }

    pub fn component(self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// A direction on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitVec3(Vec3);

impl UnitVec3 {
    pub const X: UnitVec3 = UnitVec3(Vec3::X);
    pub const Y: UnitVec3 = UnitVec3(Vec3::Y);
    pub const Z: UnitVec3 = UnitVec3(Vec3::Z);

    /// Normalizes `v`; fails on zero or non-finite input.
    pub fn new_normalize(v: Vec3) -> Result<Self, GeometryError> {
        let n = v.norm();
        if !n.is_finite() || n <= f64::MIN_POSITIVE {
            return Err(GeometryError::Degenerate("cannot normalize a zero vector"));
        }
        Ok(UnitVec3(v / n))
    }

    /// Wraps a vector the caller already knows to be unit length.
    pub fn new_unchecked(v: Vec3) -> Self {
        debug_assert!((v.norm() - 1.0).abs() < 1e-9, "not a unit vector: {v:?}");
        UnitVec3(v)
    }

    pub fn get(self) -> Vec3 {
        self.0
    }

    pub fn dot(self, v: Vec3) -> f64 {
        self.0.dot(v)
    }

    /// Orthonormal tangent basis `(t1, t2)` with `t1 x t2 = self`.
    ///
    /// The first tangent is seeded from the coordinate axis along which the
    /// normal has its smallest component, so the frame is reproducible.
    pub fn tangent_frame(self) -> (Vec3, Vec3) {
        let n = self.0;
        let (ax, ay, az) = (n.x.abs(), n.y.abs(), n.z.abs());
        let seed = if ax <= ay && ax <= az {
            Vec3::X
        } else if ay <= az {
            Vec3::Y
        } else {
            Vec3::Z
        };
        let t1 = seed - n * n.dot(seed);
        let t1 = t1 / t1.norm();
        let t2 = n.cross(t1);
        (t1, t2)
    }
}

impl Neg for UnitVec3 {
    type Output = UnitVec3;
    fn neg(self) -> UnitVec3 {
        UnitVec3(-self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn perp_dot(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

/// An oriented plane with a cached orthonormal in-plane frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub origin: Vec3,
    pub normal: UnitVec3,
    t1: Vec3,
    t2: Vec3,
}

impl Plane {
    pub fn new(origin: Vec3, normal: UnitVec3) -> Self {
        let (t1, t2) = normal.tangent_frame();
        Plane {
            origin,
            normal,
            t1,
            t2,
        }
    }

    /// Signed offset of `p` along the plane normal.
    pub fn signed_distance(&self, p: Vec3) -> f64 {
        self.normal.dot(p - self.origin)
    }

    /// 2D coordinates of the parallel projection of `p` along the normal.
    pub fn project(&self, p: Vec3) -> Vec2 {
        let r = p - self.origin;
        Vec2::new(r.dot(self.t1), r.dot(self.t2))
    }

    /// The 3D foot point of the projection of `p`.
    pub fn project_3d(&self, p: Vec3) -> Vec3 {
        p - self.normal.get() * self.signed_distance(p)
    }

    /// Maps in-plane coordinates back to world space.
    pub fn lift(&self, q: Vec2) -> Vec3 {
        self.origin + self.t1 * q.x + self.t2 * q.y
    }

    pub fn frame(&self) -> (Vec3, Vec3) {
        (self.t1, self.t2)
    }
}

/// Oriented disk centered at an input point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Splat {
    pub center: Vec3,
    pub normal: UnitVec3,
    pub radius: f64,
}

impl Splat {
    pub fn new(center: Vec3, normal: UnitVec3, radius: f64) -> Self {
        debug_assert!(radius > 0.0);
        Splat {
            center,
            normal,
            radius,
        }
    }

    /// Closest point of the (closed) disk to `q`.
    pub fn closest_point(&self, q: Vec3) -> Vec3 {
        let n = self.normal.get();
        let foot = q - n * n.dot(q - self.center);
        let radial = foot - self.center;
        let r = radial.norm();
        if r <= self.radius {
            foot
        } else {
            self.center + radial * (self.radius / r)
        }
    }

    pub fn distance_to(&self, q: Vec3) -> f64 {
        self.closest_point(q).distance(q)
    }

    pub fn contains_in_plane(&self, p: Vec3) -> bool {
        p.distance(self.center) <= self.radius * (1.0 + REL_EPS)
    }
}

/// Locus of points at equal distance `d` from two sphere centers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Vec3,
    pub radius: f64,
    pub axis: UnitVec3,
}

/// `2 rho sin(phi / 2)`: the guaranteed separation of surface points whose
/// normals differ by `phi` on a surface of reach `rho`.
pub fn min_distance_bound(phi: f64, rho: f64) -> Result<f64, GeometryError> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(GeometryError::Domain("reach must be positive"));
    }
    if !(0.0..=PI).contains(&phi) {
        return Err(GeometryError::Domain("angle must lie in [0, pi]"));
    }
    Ok(2.0 * rho * (phi * 0.5).sin())
}

/// Circle of points at distance `d` from both `v` and `v_new`.
///
/// Returns `Ok(None)` when the two spheres are disjoint and a zero-radius
/// circle when they touch.
pub fn candidate_circle(v: Vec3, v_new: Vec3, d: f64) -> Result<Option<Circle>, GeometryError> {
    if !(d > 0.0) {
        return Err(GeometryError::Domain("target length must be positive"));
    }
    let delta = v_new - v;
    let dist = delta.norm();
    if dist == 0.0 {
        return Err(GeometryError::Degenerate("coincident sphere centers"));
    }
    let two_d = 2.0 * d;
    if dist > two_d * (1.0 + REL_EPS) {
        return Ok(None);
    }
    let axis = UnitVec3::new_unchecked(delta / dist);
    let center = v.midpoint(v_new);
    let radius = if dist >= two_d * (1.0 - REL_EPS) {
        0.0
    } else {
        (d * d - dist * dist * 0.25).sqrt()
    };
    Ok(Some(Circle {
        center,
        radius,
        axis,
    }))
}

/// Intersection of a circle with a splat disk.
///
/// The circle's plane is cut with the splat plane to a line; the line is
/// intersected with the circle (a quadratic in the line parameter) and the
/// roots outside the disk are dropped. Parallel planes yield nothing, as do
/// coincident ones.
pub fn circle_splat_intersection(circle: &Circle, splat: &Splat) -> Vec<Vec3> {
    let a = circle.axis.get();
    let n = splat.normal.get();
    let offset = n.dot(circle.center - splat.center);
    // Component of the splat normal inside the circle plane.
    let n_in = n - a * a.dot(n);
    let n_in_sq = n_in.norm_squared();
    let scale = circle.radius.max(splat.radius).max(1.0);

    if n_in_sq < 1e-24 {
        return Vec::new();
    }

    if circle.radius == 0.0 {
        if offset.abs() <= REL_EPS * scale && splat.contains_in_plane(circle.center) {
            return vec![circle.center];
        }
        return Vec::new();
    }

    // Foot of the perpendicular from the circle center onto the line.
    let foot = circle.center - n_in * (offset / n_in_sq);
    let h_sq = offset * offset / n_in_sq;
    let r_sq = circle.radius * circle.radius;
    let disc = r_sq - h_sq;
    if disc < -TANGENT_EPS {
        return Vec::new();
    }
    let dir = a.cross(n);
    let dir = dir / dir.norm();

    let roots: Vec<Vec3> = if disc <= TANGENT_EPS {
        vec![foot]
    } else {
        let t = disc.sqrt();
        vec![foot - dir * t, foot + dir * t]
    };
    roots
        .into_iter()
        .filter(|p| splat.contains_in_plane(*p))
        .collect()
}

/// Projects `p` onto `plane`, returning 2D in-plane coordinates.
pub fn project_to_plane(p: Vec3, plane: &Plane) -> Vec2 {
    plane.project(p)
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).perp_dot(c - a)
}

/// True iff the open segments `a1a2` and `b1b2` cross at a single interior
/// point. Touching, shared endpoints and collinear overlap do not count.
pub fn segments_cross_2d(a1: Vec2, a2: Vec2, b1: Vec2, b2: Vec2) -> bool {
    let o1 = orient(a1, a2, b1);
    let o2 = orient(a1, a2, b2);
    let o3 = orient(b1, b2, a1);
    let o4 = orient(b1, b2, a2);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Counterclockwise angle from `u` to `v`, in `(-pi, pi]`.
pub fn signed_angle_2d(u: Vec2, v: Vec2) -> Result<f64, GeometryError> {
    if u.norm() == 0.0 || v.norm() == 0.0 {
        return Err(GeometryError::Domain("zero vector has no direction"));
    }
    let a = u.perp_dot(v).atan2(u.dot(v));
    Ok(if a <= -PI { PI } else { a })
}

/// Counterclockwise angle from `u` to `v`, in `[0, 2 pi)`.
pub(crate) fn ccw_angle_2d(u: Vec2, v: Vec2) -> f64 {
    let a = u.perp_dot(v).atan2(u.dot(v));
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Euclidean distance from `p` to the axis-aligned cube `[lo, lo + side]^3`.
pub fn point_cube_distance(p: Vec3, lo: Vec3, side: f64) -> f64 {
    let gap = |c: f64, l: f64| {
        if c < l {
            l - c
        } else if c > l + side {
            c - (l + side)
        } else {
            0.0
        }
    };
    let dx = gap(p.x, lo.x);
    let dy = gap(p.y, lo.y);
    let dz = gap(p.z, lo.z);
    (dx * dx + dy * dy + dz * dz).sqrt()
}
