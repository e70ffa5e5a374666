//! Surface reconstruction from oriented point clouds by packing spheres of
//! diameter `d` on splat disks, then triangulating the gaps between them.

pub mod boxgrid;
pub mod cloud;
pub mod error;
pub mod geometry;
pub mod growth;
pub mod io;
pub mod mesh;
pub mod metrics;
pub mod normals;
pub mod pipeline;
pub mod splats;
pub mod synthetic;
pub mod triangulate;

pub use boxgrid::{build_box_grid, BoxGrid, BoxKey};
pub use cloud::PointCloud;
pub use error::{Error, Result};
pub use geometry::{Circle, Plane, Splat, UnitVec3, Vec2, Vec3};
pub use growth::{initialize, GrowthGraph, GrowthParams, GrowthResult, GrowthState, GrowthStats, DEFAULT_WINDOW};
pub use io::{load_mesh, load_point_cloud, save_mesh, CloudFormat, MeshFormat};
pub use mesh::TriangleMesh;
pub use metrics::{aggregate, reconstruction_norms, triangle_quality, MeshReport, QualityReport, Surface};
pub use pipeline::{reconstruct, run, MeshingParams, Reconstruction, RunConfig, Source};
pub use splats::{assign_splat_sizes, SplatMode};
pub use synthetic::{sample_sphere_uniform, sample_torus_uniform};
pub use triangulate::{triangulate_regions, validate_manifold, ManifoldReport, DEFAULT_MAX_BORDER};
