//! Triangle quality, edge statistics, histograms and distances to the
//! analytic test surfaces.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::mesh::TriangleMesh;

/// Added before flooring a bin index so values sitting on a bin boundary
/// (60 degrees, exactly `d`) land in the bin they start.
const BIN_EPS: f64 = 1e-6;

/// `4 sqrt(3) A / (l1^2 + l2^2 + l3^2)`: 1 for equilateral, 0 for collinear.
pub fn triangle_quality(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let area = 0.5 * (b - a).cross(c - a).norm();
    let sq = a.distance_squared(b) + b.distance_squared(c) + c.distance_squared(a);
    if sq == 0.0 {
        return 0.0;
    }
    (4.0 * 3f64.sqrt() * area / sq).clamp(0.0, 1.0)
}

/// Interior angles in degrees, at `a`, `b`, `c`.
pub fn triangle_angles(a: Vec3, b: Vec3, c: Vec3) -> [f64; 3] {
    let at = |p: Vec3, q: Vec3, r: Vec3| {
        let (u, v) = (q - p, r - p);
        u.cross(v).norm().atan2(u.dot(v)).to_degrees()
    };
    [at(a, b, c), at(b, c, a), at(c, a, b)]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub bin_width: f64,
    /// Bin `i` covers `[i w, (i + 1) w)`; trailing empty bins are dropped.
    pub counts: Vec<u64>,
    #[serde(skip)]
    max_bin: Option<usize>,
}

impl Histogram {
    pub fn new(bin_width: f64) -> Self {
        Histogram {
            bin_width,
            counts: Vec::new(),
            max_bin: None,
        }
    }

    /// Values past the last bin go into it.
    pub fn with_max_bin(bin_width: f64, max_bin: usize) -> Self {
        Histogram {
            max_bin: Some(max_bin),
            ..Self::new(bin_width)
        }
    }

    pub fn add(&mut self, value: f64) {
        let mut i = (value / self.bin_width + BIN_EPS).floor().max(0.0) as usize;
        if let Some(m) = self.max_bin {
            i = i.min(m);
        }
        if self.counts.len() <= i {
            self.counts.resize(i + 1, 0);
        }
        self.counts[i] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bin_lower(&self, i: usize) -> f64 {
        i as f64 * self.bin_width
    }

    /// Index of the first nonempty bin.
    pub fn first_nonzero(&self) -> Option<usize> {
        self.counts.iter().position(|&c| c > 0)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_lower,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            writeln!(s, "{:.6},{}", self.bin_lower(i), c).unwrap();
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualityReport {
    pub triangles: usize,
    pub q_avg: f64,
    /// Percent of `q_avg`.
    pub q_rms: f64,
    pub e_avg: f64,
    /// Percent of `e_avg`.
    pub e_rms: f64,
    pub min_edge: f64,
    pub max_edge: f64,
    pub angles: Histogram,
    pub edges: Histogram,
    pub quality: Histogram,
}

/// Mean and the root mean square deviation in percent of the mean.
pub fn mean_and_rms_percent(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let rms = if mean == 0.0 { 0.0 } else { 100.0 / mean * var.sqrt() };
    (mean, rms)
}

/// Statistics over all triangles and over each undirected edge once.
/// `edge_bin` is the edge histogram bin width, usually `d / 20`.
pub fn aggregate(mesh: &TriangleMesh, edge_bin: f64) -> Result<QualityReport> {
    if mesh.triangles.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let v = |i: u32| mesh.vertices[i as usize];
    let mut angles = Histogram::new(1.0);
    let mut quality = Histogram::with_max_bin(0.01, 99);
    let mut qs = Vec::with_capacity(mesh.triangles.len());
    for t in &mesh.triangles {
        let (a, b, c) = (v(t[0]), v(t[1]), v(t[2]));
        let q = triangle_quality(a, b, c);
        qs.push(q);
        quality.add(q);
        for ang in triangle_angles(a, b, c) {
            angles.add(ang);
        }
    }
    let lengths: Vec<f64> = mesh.unique_edges().iter().map(|&(a, b)| v(a).distance(v(b))).collect();
    let mut edges = Histogram::new(edge_bin);
    for &l in &lengths {
        edges.add(l);
    }
    let (q_avg, q_rms) = mean_and_rms_percent(&qs);
    let (e_avg, e_rms) = mean_and_rms_percent(&lengths);
    Ok(QualityReport {
        triangles: mesh.triangles.len(),
        q_avg,
        q_rms,
        e_avg,
        e_rms,
        min_edge: lengths.iter().copied().fold(f64::INFINITY, f64::min),
        max_edge: lengths.iter().copied().fold(0.0, f64::max),
        angles,
        edges,
        quality,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Surface {
    UnitSphere,
    /// Major radius 2, minor radius 1, around the z axis.
    Torus,
}

impl Surface {
    /// Distance to the sphere center or to the torus spine circle; 1 on the
    /// surface itself.
    pub fn norm(self, p: Vec3) -> f64 {
        match self {
            Surface::UnitSphere => p.norm(),
            Surface::Torus => {
                let rho = (p.x * p.x + p.y * p.y).sqrt() - 2.0;
                (rho * rho + p.z * p.z).sqrt()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

/// Norms over all mesh vertices; `None` without vertices.
pub fn reconstruction_norms(mesh: &TriangleMesh, surface: Surface) -> Option<NormStats> {
    if mesh.vertices.is_empty() {
        return None;
    }
    let norms: Vec<f64> = mesh.vertices.iter().map(|&p| surface.norm(p)).collect();
    Some(NormStats {
        min: norms.iter().copied().fold(f64::INFINITY, f64::min),
        max: norms.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean: norms.iter().sum::<f64>() / norms.len() as f64,
    })
}

/// Writes `<prefix>_angles.csv`, `<prefix>_edges.csv` and
/// `<prefix>_quality.csv`.
pub fn export_histograms(report: &QualityReport, prefix: &Path) -> Result<[PathBuf; 3]> {
    write_histograms([&report.angles, &report.edges, &report.quality], prefix)
}

pub fn write_histograms(hists: [&Histogram; 3], prefix: &Path) -> Result<[PathBuf; 3]> {
    let path = |suffix: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    let paths = [path("_angles.csv"), path("_edges.csv"), path("_quality.csv")];
    for (h, p) in hists.iter().zip(&paths) {
        std::fs::write(p, h.to_csv()).map_err(|e| Error::io(p, e))?;
    }
    Ok(paths)
}

/// The JSON summary of a run. Statistics are `null` for an empty mesh.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshReport {
    pub triangles: usize,
    pub q_avg: Option<f64>,
    pub q_rms: Option<f64>,
    pub e_avg: Option<f64>,
    pub e_rms: Option<f64>,
    pub min_edge: Option<f64>,
    pub max_edge: Option<f64>,
    pub euler_characteristic: i64,
    pub hole_count: usize,
}

impl MeshReport {
    pub fn new(quality: Option<&QualityReport>, euler_characteristic: i64, hole_count: usize) -> Self {
        MeshReport {
            triangles: quality.map_or(0, |q| q.triangles),
            q_avg: quality.map(|q| q.q_avg),
            q_rms: quality.map(|q| q.q_rms),
            e_avg: quality.map(|q| q.e_avg),
            e_rms: quality.map(|q| q.e_rms),
            min_edge: quality.map(|q| q.min_edge),
            max_edge: quality.map(|q| q.max_edge),
            euler_characteristic,
            hole_count,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn equilateral(s: f64) -> [Vec3; 3] {
        [Vec3::ZERO, Vec3::new(s, 0.0, 0.0), Vec3::new(s / 2.0, s * 3f64.sqrt() / 2.0, 0.0)]
    }

    #[test]
    fn quality_examples() {
        for s in [1e-3, 0.2, 7.0] {
            let [a, b, c] = equilateral(s);
            assert!((triangle_quality(a, b, c) - 1.0).abs() < 1e-12);
        }
        assert_eq!(triangle_quality(Vec3::ZERO, Vec3::X, Vec3::X * 2.0), 0.0);
        assert_eq!(triangle_quality(Vec3::ZERO, Vec3::ZERO, Vec3::ZERO), 0.0);
        let q = triangle_quality(Vec3::ZERO, Vec3::X, Vec3::Y);
        assert!((q - 3f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn aggregate_of_equilateral_strip() {
        // Strip of identical equilateral triangles with edge 0.2.
        let h = 0.2 * 3f64.sqrt() / 2.0;
        let mut vertices = Vec::new();
        for i in 0..6 {
            vertices.push(Vec3::new(i as f64 * 0.2, 0.0, 0.0));
            vertices.push(Vec3::new(i as f64 * 0.2 + 0.1, h, 0.0));
        }
        let triangles = (0..10u32).map(|k| if k % 2 == 0 { [k, k + 2, k + 1] } else { [k, k + 1, k + 2] }).collect();
        let mesh = TriangleMesh {
            vertices,
            triangles,
            holes: vec![],
        };
        let r = aggregate(&mesh, 0.01).unwrap();
        assert!((r.q_avg - 1.0).abs() < 1e-12 && r.q_rms < 1e-9);
        assert!((r.e_avg - 0.2).abs() < 1e-12 && r.e_rms < 1e-9);
        assert_eq!(r.angles.counts[60], 30);
        assert_eq!(r.angles.total(), 30);
        assert_eq!(r.edges.first_nonzero(), Some(20));
        assert_eq!(r.edges.total(), 21);
        assert_eq!(r.quality.counts.len(), 100);
        assert_eq!(r.quality.counts[99], 10);
    }

    #[test]
    fn two_element_rms() {
        let (m, rms) = mean_and_rms_percent(&[1.0, 0.5]);
        assert!((m - 0.75).abs() < 1e-15);
        assert!((rms - 100.0 * 0.25 / 0.75).abs() < 1e-9);
    }

    #[test]
    fn empty_mesh_is_an_error() {
        assert!(matches!(aggregate(&TriangleMesh::default(), 0.01), Err(Error::EmptyMesh)));
        assert_eq!(Histogram::new(1.0).to_csv(), "bin_lower,count\n");
    }

    #[test]
    fn norms_on_test_surfaces() {
        assert_eq!(Surface::UnitSphere.norm(Vec3::Z), 1.0);
        assert_eq!(Surface::Torus.norm(Vec3::new(3.0, 0.0, 0.0)), 1.0);
        assert_eq!(Surface::Torus.norm(Vec3::new(0.0, 2.0, 1.0)), 1.0);
        let mesh = TriangleMesh {
            vertices: vec![Vec3::Z, Vec3::X * 2.0],
            ..Default::default()
        };
        let s = reconstruction_norms(&mesh, Surface::UnitSphere).unwrap();
        assert_eq!((s.min, s.max, s.mean), (1.0, 2.0, 1.5));
        assert!(reconstruction_norms(&TriangleMesh::default(), Surface::Torus).is_none());
    }

    #[test]
    fn histogram_files() {
        let [a, b, c] = equilateral(0.2);
        let mesh = TriangleMesh {
            vertices: vec![a, b, c],
            triangles: vec![[0, 1, 2]],
            holes: vec![],
        };
        let r = aggregate(&mesh, 0.01).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = export_histograms(&r, &dir.path().join("run")).unwrap();
        let angles = std::fs::read_to_string(&paths[0]).unwrap();
        assert!(angles.ends_with("60.000000,3\n"));
        assert_eq!(angles.lines().count(), 62);
        let edges = std::fs::read_to_string(&paths[1]).unwrap();
        let total: u64 = edges.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap()).sum();
        assert_eq!(total, 3);
        assert!(export_histograms(&r, Path::new("/nonexistent/dir/run")).is_err());
    }

    #[test]
    fn report_json_fields() {
        let r = MeshReport::new(None, 0, 2);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert!(v["q_avg"].is_null());
        assert_eq!(v["hole_count"], 2);
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        assert_eq!(keys.len(), 9);
    }

    /// Rotation about a random axis by Rodrigues' formula.
    fn similarity(p: Vec3, axis: Vec3, angle: f64, scale: f64, shift: Vec3) -> Vec3 {
        let k = axis / axis.norm();
        let r = p * angle.cos() + k.cross(p) * angle.sin() + k * (k.dot(p) * (1.0 - angle.cos()));
        r * scale + shift
    }

    proptest! {
        #[test]
        fn quality_is_similarity_invariant(
            pts in proptest::collection::vec(-1.0..1.0f64, 9),
            axis in proptest::collection::vec(-1.0..1.0f64, 3),
            angle in 0.0..std::f64::consts::TAU,
            scale in 0.01..100.0f64,
            shift in proptest::collection::vec(-10.0..10.0f64, 3),
        ) {
            let axis = Vec3::new(axis[0], axis[1], axis[2]);
            prop_assume!(axis.norm() > 1e-3);
            let p: Vec<Vec3> = pts.chunks(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect();
            let q0 = triangle_quality(p[0], p[1], p[2]);
            prop_assume!(q0 > 1e-3);
            let s = Vec3::new(shift[0], shift[1], shift[2]);
            let t: Vec<Vec3> = p.iter().map(|&x| similarity(x, axis, angle, scale, s)).collect();
            let q1 = triangle_quality(t[0], t[1], t[2]);
            prop_assert!((q1 - q0).abs() <= 1e-12 * q0, "{} vs {}", q0, q1);
        }

        #[test]
        fn rms_is_permutation_invariant(mut v in proptest::collection::vec(0.1..2.0f64, 2..40), seed in 0u64..1000) {
            let (m0, r0) = mean_and_rms_percent(&v);
            use rand::{seq::SliceRandom, SeedableRng};
            v.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let (m1, r1) = mean_and_rms_percent(&v);
            prop_assert!((m0 - m1).abs() < 1e-12 && (r0 - r1).abs() < 1e-9);
        }
    }
}
