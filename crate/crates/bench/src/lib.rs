//! Inputs shared by the benchmarks.

use spheremesh::{assign_splat_sizes, build_box_grid, sample_sphere_uniform, PointCloud, SplatMode};

pub const D: f64 = 0.2;

pub fn sphere(n: usize) -> PointCloud {
    sample_sphere_uniform(n, 1).expect("n > 0")
}

/// Sphere samples with local splat radii capped at 0.3.
pub fn sized_sphere(n: usize) -> PointCloud {
    let cloud = sphere(n);
    let grid = build_box_grid(&cloud, D).expect("valid d");
    assign_splat_sizes(cloud, Some(&grid), SplatMode::Local(0.3)).expect("grid given")
}
