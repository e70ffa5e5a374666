//! Seeded samplers for the analytic test surfaces.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::{UnitVec3, Vec3};

pub const TORUS_MAJOR: f64 = 2.0;
pub const TORUS_MINOR: f64 = 1.0;

fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Input("sample count must be at least 1".into()));
    }
    Ok(())
}

/// Uniform on the unit sphere (uniform height and azimuth), normals equal to
/// positions.
pub fn sample_sphere_uniform(n: usize, seed: u64) -> Result<PointCloud> {
    check_count(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    for _ in 0..n {
        let z: f64 = rng.gen_range(-1.0..=1.0);
        let phi: f64 = rng.gen_range(0.0..TAU);
        let r = (1.0 - z * z).max(0.0).sqrt();
        let u = UnitVec3::new_normalize(Vec3::new(r * phi.cos(), r * phi.sin(), z))?;
        points.push(u.get());
        normals.push(u);
    }
    PointCloud::new(points, normals)
}

/// Area-uniform on the torus with major radius 2 and minor radius 1 around
/// the z axis. The minor angle is drawn by rejection with density
/// proportional to `R + r cos(theta)`.
pub fn sample_torus_uniform(n: usize, seed: u64) -> Result<PointCloud> {
    check_count(n)?;
    let (big, small) = (TORUS_MAJOR, TORUS_MINOR);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    while points.len() < n {
        let theta: f64 = rng.gen_range(-PI..PI);
        let accept: f64 = rng.gen_range(0.0..big + small);
        let phi: f64 = rng.gen_range(0.0..TAU);
        if accept >= big + small * theta.cos() {
            continue;
        }
        let ring = big + small * theta.cos();
        let (c, s) = (phi.cos(), phi.sin());
        let normal = UnitVec3::new_normalize(Vec3::new(theta.cos() * c, theta.cos() * s, theta.sin()))?;
        points.push(Vec3::new(ring * c, ring * s, small * theta.sin()));
        normals.push(normal);
    }
    PointCloud::new(points, normals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_samples() {
        let c = sample_sphere_uniform(20_000, 7).unwrap();
        assert!(c.points().iter().all(|p| (p.norm() - 1.0).abs() < 1e-12));
        assert!(c.points().iter().zip(c.normals()).all(|(p, n)| p.distance(n.get()) < 1e-15));
        let n = c.len() as f64;
        let mean = c.points().iter().fold(Vec3::ZERO, |a, &p| a + p) / n;
        let bound = 4.0 / n.sqrt();
        assert!(mean.x.abs() < bound && mean.y.abs() < bound && mean.z.abs() < bound);
        let one = sample_sphere_uniform(1, 3).unwrap();
        assert_eq!(one.point(0), one.normal(0).get());
        assert!(sample_sphere_uniform(0, 1).is_err());
        assert_eq!(sample_sphere_uniform(50, 9).unwrap().points(), sample_sphere_uniform(50, 9).unwrap().points());
    }

    #[test]
    fn torus_samples_lie_on_the_surface() {
        let c = sample_torus_uniform(5000, 11).unwrap();
        for (p, nrm) in c.points().iter().zip(c.normals()) {
            let rho = (p.x * p.x + p.y * p.y).sqrt();
            assert!(((rho - 2.0).powi(2) + p.z * p.z - 1.0).abs() < 1e-12);
            // The normal points away from the spine circle.
            let spine = Vec3::new(p.x / rho * 2.0, p.y / rho * 2.0, 0.0);
            assert!((*p - spine).distance(nrm.get()) < 1e-12);
        }
    }

    #[test]
    fn torus_outer_fraction_matches_area_integral() {
        // Area with sqrt(x^2 + y^2) > 2 versus total, by midpoint rule over
        // the minor angle; the area element is r (R + r cos theta).
        let steps = 200_000;
        let (mut outer, mut total) = (0.0, 0.0);
        for k in 0..steps {
            let theta = -PI + (k as f64 + 0.5) * TAU / steps as f64;
            let da = 2.0 + theta.cos();
            total += da;
            if theta.cos() > 0.0 {
                outer += da;
            }
        }
        let expected = outer / total;
        let n = 60_000;
        let c = sample_torus_uniform(n, 5).unwrap();
        let got = c.points().iter().filter(|p| (p.x * p.x + p.y * p.y).sqrt() > 2.0).count() as f64 / n as f64;
        // 4 sigma of a binomial proportion.
        let sigma = (expected * (1.0 - expected) / n as f64).sqrt();
        assert!((got - expected).abs() < 4.0 * sigma, "{got} vs {expected}");
    }
}
