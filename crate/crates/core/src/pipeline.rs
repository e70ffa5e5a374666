//! End-to-end meshing: cloud in, mesh plus statistics out.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::boxgrid::build_box_grid;
use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::growth::{initialize, GrowthGraph, GrowthParams, GrowthStats, DEFAULT_WINDOW};
use crate::io::{load_point_cloud, save_mesh, CloudFormat, MeshFormat};
use crate::mesh::TriangleMesh;
use crate::metrics::{aggregate, write_histograms, Histogram, MeshReport, QualityReport};
use crate::normals::estimate_normals;
use crate::splats::{assign_splat_sizes, SplatMode};
use crate::synthetic::{sample_sphere_uniform, sample_torus_uniform};
use crate::triangulate::{triangulate_regions, validate_manifold, ManifoldReport, DEFAULT_MAX_BORDER};

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    File(PathBuf),
    Sphere { n: usize, seed: u64 },
    Torus { n: usize, seed: u64 },
}

impl FromStr for Source {
    type Err = Error;

    /// Parses `sphere:N,SEED` or `torus:N,SEED`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("synthetic source {s:?} is not of the form sphere:N,SEED or torus:N,SEED"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let (n, seed) = rest.split_once(',').ok_or_else(bad)?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        let seed: u64 = seed.trim().parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(Error::Config("synthetic sample count must be at least 1".into()));
        }
        match kind.trim() {
            "sphere" => Ok(Source::Sphere { n, seed }),
            "torus" => Ok(Source::Torus { n, seed }),
            _ => Err(bad()),
        }
    }
}

/// Meshing parameters independent of where the cloud comes from.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshingParams {
    pub d: f64,
    pub splats: SplatMode,
    pub window: usize,
    pub max_border: usize,
    /// Two starting positions; chosen from the cloud when absent.
    pub start: Option<[Vec3; 2]>,
}

impl MeshingParams {
    pub fn new(d: f64, splats: SplatMode) -> Self {
        MeshingParams {
            d,
            splats,
            window: DEFAULT_WINDOW,
            max_border: DEFAULT_MAX_BORDER,
            start: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::Config(format!("edge length must be positive, got {}", self.d)));
        }
        let s = self.splats.size();
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Config(format!("splat size must be positive, got {s}")));
        }
        if self.max_border < 3 {
            return Err(Error::Config(format!("maximum border length must be at least 3, got {}", self.max_border)));
        }
        if let Some(st) = &self.start {
            if !st.iter().all(|p| p.is_finite()) {
                return Err(Error::Config("starting points must be finite".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: Source,
    pub params: MeshingParams,
    /// Neighborhood size for estimating normals instead of using stored ones.
    pub estimate_normals: Option<usize>,
    pub output: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub histograms: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(source: Source, params: MeshingParams) -> Self {
        RunConfig {
            source,
            params,
            estimate_normals: None,
            output: None,
            report: None,
            histograms: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if let Some(k) = self.estimate_normals {
            if k < 3 {
                return Err(Error::Config(format!("normal estimation needs k >= 3, got {k}")));
            }
        }
        if let Some(out) = &self.output {
            if MeshFormat::from_path(out).is_none() {
                return Err(Error::Config(format!("{}: mesh output must end in .obj or .ply", out.display())));
            }
        }
        if let Source::File(p) = &self.source {
            if CloudFormat::from_path(p).is_none() {
                return Err(Error::Config(format!("{}: unknown point cloud extension", p.display())));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub mesh: TriangleMesh,
    pub graph: GrowthGraph,
    pub stats: GrowthStats,
    pub manifold: ManifoldReport,
    /// `None` when no triangle was produced.
    pub quality: Option<QualityReport>,
    /// Boxes flagged by the parameter check.
    pub flagged_boxes: usize,
    /// Starting positions before projection.
    pub start: [Vec3; 2],
}

impl Reconstruction {
    pub fn report(&self) -> MeshReport {
        MeshReport::new(self.quality.as_ref(), self.manifold.euler_characteristic, self.mesh.holes.len())
    }
}

/// The highest point (largest z, lowest index on ties) and the point whose
/// distance to it is closest to `1.5 d`.
pub fn default_start_points(cloud: &PointCloud, d: f64) -> Result<[Vec3; 2]> {
    if cloud.len() < 2 {
        return Err(Error::Initialization("need at least two points to pick starting vertices".into()));
    }
    let pts = cloud.points();
    let mut top = 0;
    for (i, p) in pts.iter().enumerate() {
        if p.z > pts[top].z {
            top = i;
        }
    }
    let q = pts[top];
    let mut best = (f64::INFINITY, usize::MAX);
    for (i, p) in pts.iter().enumerate() {
        if i == top {
            continue;
        }
        let miss = (p.distance(q) - 1.5 * d).abs();
        if miss < best.0 {
            best = (miss, i);
        }
    }
    Ok([q, pts[best.1]])
}

pub fn load_source(source: &Source, estimate_k: Option<usize>) -> Result<PointCloud> {
    let cloud = match source {
        Source::File(path) => {
            let format = CloudFormat::from_path(path)
                .ok_or_else(|| Error::Config(format!("{}: unknown point cloud extension", path.display())))?;
            return load_point_cloud(path, format, estimate_k);
        }
        Source::Sphere { n, seed } => sample_sphere_uniform(*n, *seed)?,
        Source::Torus { n, seed } => sample_torus_uniform(*n, *seed)?,
    };
    match estimate_k {
        Some(k) => estimate_normals(cloud.points(), k),
        None => Ok(cloud),
    }
}

/// Runs grid construction, splat sizing, growth, triangulation and the mesh
/// checks on an oriented cloud. Any splat radii on the input are replaced.
pub fn reconstruct(cloud: &PointCloud, params: &MeshingParams) -> Result<Reconstruction> {
    params.validate()?;
    let d = params.d;
    let bare = PointCloud::new(cloud.points().to_vec(), cloud.normals().to_vec())?;
    let grid = build_box_grid(&bare, d)?;
    let flagged = grid.validate_parameter_choice(&bare);
    if !flagged.is_empty() {
        log::warn!(
            "{} of {} boxes see point normals opposing their box normal; d = {d} may be too large for this input",
            flagged.len(),
            grid.box_count()
        );
    }
    let sized = assign_splat_sizes(bare, Some(&grid), params.splats)?;
    drop(grid);
    let grid = build_box_grid(&sized, d)?;
    let start = match params.start {
        Some(s) => s,
        None => default_start_points(&sized, d)?,
    };
    let growth = GrowthParams { d, window: params.window };
    let state = initialize(start[0], start[1], &sized, grid, growth)?;
    let grown = state.grow();
    log::info!(
        "placed {} vertices, {} edges, largest border {}",
        grown.graph.vertex_count(),
        grown.graph.edge_count(),
        grown.graph.max_border_length()
    );
    let mesh = triangulate_regions(&grown.graph, params.max_border);
    let manifold = validate_manifold(&mesh);
    if !manifold.is_manifold_with_boundary {
        log::warn!(
            "mesh is not manifold: {} edges and {} vertices with bad neighborhoods",
            manifold.nonmanifold_edges.len(),
            manifold.nonmanifold_vertices.len()
        );
    }
    let quality = match aggregate(&mesh, d / 20.0) {
        Ok(q) => Some(q),
        Err(Error::EmptyMesh) => {
            log::warn!("no triangles were produced");
            None
        }
        Err(e) => return Err(e),
    };
    Ok(Reconstruction {
        mesh,
        graph: grown.graph,
        stats: grown.stats,
        manifold,
        quality,
        flagged_boxes: flagged.len(),
        start,
    })
}

/// Loads or samples the cloud, reconstructs and writes the requested files.
pub fn run(config: &RunConfig) -> Result<Reconstruction> {
    config.validate()?;
    let cloud = load_source(&config.source, config.estimate_normals)?;
    let rec = reconstruct(&cloud, &config.params)?;
    write_outputs(&rec, config)?;
    Ok(rec)
}

pub fn write_outputs(rec: &Reconstruction, config: &RunConfig) -> Result<()> {
    if let Some(out) = &config.output {
        let format = MeshFormat::from_path(out)
            .ok_or_else(|| Error::Config(format!("{}: mesh output must end in .obj or .ply", out.display())))?;
        save_mesh(&rec.mesh, out, format)?;
    }
    if let Some(path) = &config.report {
        write_text(path, &rec.report().to_json())?;
    }
    if let Some(prefix) = &config.histograms {
        match &rec.quality {
            Some(q) => write_histograms([&q.angles, &q.edges, &q.quality], prefix)?,
            None => {
                let empty = [Histogram::new(1.0), Histogram::new(config.params.d / 20.0), Histogram::new(0.01)];
                write_histograms([&empty[0], &empty[1], &empty[2]], prefix)?
            }
        };
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
