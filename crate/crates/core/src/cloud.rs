use crate::error::{Error, Result};
use crate::geometry::{Splat, UnitVec3, Vec3};

/// Oriented input samples, optionally with a splat radius per point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec3>,
    normals: Vec<UnitVec3>,
    splat_radii: Option<Vec<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>, normals: Vec<UnitVec3>) -> Result<Self> {
        if points.len() != normals.len() {
            return Err(Error::Input(format!(
                "{} points but {} normals",
                points.len(),
                normals.len()
            )));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::Input(format!("point {i} has non-finite coordinates")));
        }
        Ok(PointCloud {
            points,
            normals,
            splat_radii: None,
        })
    }

    pub fn with_splat_radii(mut self, radii: Vec<f64>) -> Result<Self> {
        if radii.len() != self.points.len() {
            return Err(Error::Input(format!(
                "{} splat radii for {} points",
                radii.len(),
                self.points.len()
            )));
        }
        if let Some(i) = radii.iter().position(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(Error::Input(format!("splat radius {i} is not positive")));
        }
        self.splat_radii = Some(radii);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn normals(&self) -> &[UnitVec3] {
        &self.normals
    }

    pub fn splat_radii(&self) -> Option<&[f64]> {
        self.splat_radii.as_deref()
    }

    pub fn point(&self, i: usize) -> Vec3 {
        self.points[i]
    }

    pub fn normal(&self, i: usize) -> UnitVec3 {
        self.normals[i]
    }

    /// Splat radius of point `i`, or 0 when radii have not been assigned.
    pub fn radius(&self, i: usize) -> f64 {
        self.splat_radii.as_ref().map_or(0.0, |r| r[i])
    }

    /// The splat of point `i`. Panics when radii have not been assigned.
    pub fn splat(&self, i: usize) -> Splat {
        let r = self
            .splat_radii
            .as_ref()
            .expect("splat radii must be assigned before splats are used")[i];
        Splat::new(self.points[i], self.normals[i], r)
    }
}
