//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any of them fails.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spheremesh::boxgrid::{build_box_grid, BoxKey};
use spheremesh::geometry::{point_cube_distance, Splat};
use spheremesh::growth::GrowthState;
use spheremesh::metrics::mean_and_rms_percent;
use spheremesh::pipeline::{reconstruct, run, MeshingParams, Reconstruction, RunConfig, Source};
use spheremesh::triangulate::{cut_ears, inner_angle};
use spheremesh::{
    reconstruction_norms, sample_sphere_uniform, sample_torus_uniform, triangle_quality, GrowthParams, PointCloud,
    SplatMode, Surface, UnitVec3, Vec3,
};

const D: f64 = 0.2;
/// Relative slack on the minimum edge length and on parent edges.
const EDGE_REL_TOL: f64 = 1e-9;
const SPHERE_N: usize = 10_000;
const TORUS_N: usize = 60_000;
const PATCH_N: usize = 2_000;
const PATCH_SEEDS: u64 = 20;
/// A patch run must actually mesh most of the 2 x 2 square.
const PATCH_MIN_TRIANGLES: usize = 100;
const LOCAL_CAP: f64 = 0.3;
const SPHERE_MIN_NORM_TOL: f64 = 1e-6;
const SPHERE_MAX_NORM: f64 = 1.05;
const TORUS_NORM_RANGE: (f64, f64) = (0.95, 1.05);
const SWEEP_SIZES: [f64; 5] = [0.10, 0.15, 0.20, 0.25, 0.30];
const SWEEP_MAX_CHANGE: f64 = 0.05;
const WINDOW_BORDER_CAP: usize = 20;
const Q_AVG_MIN: f64 = 0.90;
const E_AVG_RANGE: (f64, f64) = (0.20, 0.23);
const QUALITY_EXACT_TOL: f64 = 1e-12;
const RMS_TOL: f64 = 1e-9;
const SIMILARITY_TRIALS: usize = 1_000;
const CANDIDATE_TOL: f64 = 1e-6;

struct Outcome {
    results: Vec<(usize, bool, String)>,
}

impl Outcome {
    fn record(&mut self, id: usize, pass: bool, detail: String) {
        println!("criterion {id}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
        self.results.push((id, pass, detail));
    }
}

fn mesh_sphere(window: usize, splats: SplatMode) -> Reconstruction {
    let cloud = sample_sphere_uniform(SPHERE_N, 1).unwrap();
    let mut p = MeshingParams::new(D, splats);
    p.window = window;
    reconstruct(&cloud, &p).unwrap()
}

/// Shortest triangle edge and worst parent edge deviation, both relative to d.
fn edge_check(rec: &Reconstruction) -> (f64, f64) {
    let pos = &rec.mesh.vertices;
    let mut shortest = f64::INFINITY;
    for t in &rec.mesh.triangles {
        for k in 0..3 {
            shortest = shortest.min(pos[t[k] as usize].distance(pos[t[(k + 1) % 3] as usize]) / D);
        }
    }
    let worst_parent = rec
        .graph
        .edges()
        .iter()
        .map(|&(a, b)| (pos[a as usize].distance(pos[b as usize]) - D).abs() / D)
        .fold(0.0, f64::max);
    (shortest, worst_parent)
}

fn planar_patch(seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Vec3> = (0..PATCH_N)
        .map(|_| Vec3::new(rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0), 0.0))
        .collect();
    PointCloud::new(pts, vec![UnitVec3::Z; PATCH_N]).unwrap()
}

/// Roots of |x - a| = |x - b| = d on the splat disk: sign changes on a grid
/// over the disk, polished with Newton steps.
fn grid_search_roots(a: Vec3, b: Vec3, d: f64, splat: &Splat) -> Vec<Vec3> {
    let (t1, t2) = splat.normal.tangent_frame();
    let at = |u: f64, v: f64| splat.center + t1 * u + t2 * v;
    let f = |x: Vec3| (x.distance(a) - d, x.distance(b) - d);
    let r = splat.radius;
    let n = 240;
    let h = 2.0 * r / n as f64;
    let mut roots: Vec<Vec3> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let (u0, v0) = (-r + i as f64 * h, -r + j as f64 * h);
            let vals: Vec<(f64, f64)> = [(u0, v0), (u0 + h, v0), (u0, v0 + h), (u0 + h, v0 + h)]
                .iter()
                .map(|&(u, v)| f(at(u, v)))
                .collect();
            let straddles = |g: fn(&(f64, f64)) -> f64| vals.iter().any(|x| g(x) <= 0.0) && vals.iter().any(|x| g(x) >= 0.0);
            if !(straddles(|x| x.0) && straddles(|x| x.1)) {
                continue;
            }
            let (mut u, mut v) = (u0 + h / 2.0, v0 + h / 2.0);
            for _ in 0..50 {
                let x = at(u, v);
                let (f1, f2) = f(x);
                let ga = (x - a) / x.distance(a);
                let gb = (x - b) / x.distance(b);
                let (j11, j12, j21, j22) = (ga.dot(t1), ga.dot(t2), gb.dot(t1), gb.dot(t2));
                let det = j11 * j22 - j12 * j21;
                if det.abs() < 1e-300 {
                    break;
                }
                u -= (j22 * f1 - j12 * f2) / det;
                v -= (-j21 * f1 + j11 * f2) / det;
            }
            let x = at(u, v);
            let (f1, f2) = f(x);
            let inside = (u * u + v * v).sqrt() <= r;
            if f1.abs() < 1e-10 && f2.abs() < 1e-10 && inside && !roots.iter().any(|y| y.distance(x) < 1e-6) {
                roots.push(x);
            }
        }
    }
    roots
}

fn candidates_match_grid_search() -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let d = 1.0;
    let mut compared = 0;
    for trial in 0..30 {
        let n = UnitVec3::new_normalize(Vec3::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6), 1.0)).unwrap();
        let center = Vec3::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
        let r = rng.gen_range(0.6..1.4);
        let cloud = PointCloud::new(vec![center], vec![n]).unwrap().with_splat_radii(vec![r]).unwrap();
        let a = Vec3::new(rng.gen_range(-1.2..-0.4), rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
        let b = a + Vec3::new(rng.gen_range(1.0..1.9), rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
        if a.distance(b) >= 2.0 * d || a.distance(b) < d {
            continue;
        }
        let grid = build_box_grid(&cloud, d).unwrap();
        let mut st = GrowthState::new(&cloud, grid, GrowthParams::new(d)).unwrap();
        st.add_start_vertex(a);
        let vb = st.add_start_vertex(b);
        st.spawn_candidates(vb);
        let got: Vec<Vec3> = std::iter::from_fn(|| st.pop_candidate()).map(|c| c.position).collect();
        let splat = cloud.splat(0);
        let expect = if splat.distance_to(a) <= d && splat.distance_to(b) <= d {
            grid_search_roots(a, b, d, &splat)
        } else {
            Vec::new()
        };
        if got.len() != expect.len() || !got.iter().all(|g| expect.iter().any(|e| e.distance(*g) < CANDIDATE_TOL)) {
            return Err(format!("trial {trial}: {got:?} vs {expect:?}"));
        }
        compared += got.len();
    }
    Ok(compared)
}

fn registration_matches_brute_force() -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let d = 0.25;
    let pts: Vec<Vec3> = (0..60)
        .map(|_| Vec3::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
        .collect();
    let radii: Vec<f64> = (0..60).map(|_| rng.gen_range(0.0..0.3)).collect();
    let cloud = PointCloud::new(pts.clone(), vec![UnitVec3::Z; pts.len()])
        .unwrap()
        .with_splat_radii(radii.clone())
        .unwrap();
    let grid = build_box_grid(&cloud, d).unwrap();
    let mut checked = 0;
    // Every box within 3 cells of the cloud's bounding cube.
    for ix in -6..6 {
        for iy in -6..6 {
            for iz in -6..6 {
                let key = BoxKey { ix, iy, iz };
                let mut expect: Vec<u32> = (0..pts.len())
                    .filter(|&i| point_cube_distance(pts[i], key.corner(d), d) <= d + radii[i])
                    .map(|i| i as u32)
                    .collect();
                expect.sort_unstable();
                let got = grid
                    .get(key)
                    .map(|b| {
                        let mut all: Vec<u32> = b.registered.iter().chain(&b.filtered_out).copied().collect();
                        all.sort_unstable();
                        all
                    })
                    .unwrap_or_default();
                if got != expect {
                    return Err(format!("box {key:?}: {got:?} vs {expect:?}"));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}

fn vertices_near_matches_scan() -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let d = 0.3;
    let cloud = PointCloud::new(vec![Vec3::ZERO], vec![UnitVec3::Z]).unwrap();
    let mut grid = build_box_grid(&cloud, d).unwrap();
    let verts: Vec<Vec3> = (0..400)
        .map(|_| Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    for (i, &v) in verts.iter().enumerate() {
        grid.insert_vertex(i as u32, v);
    }
    for q in 0..300 {
        let c = Vec3::new(rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2));
        let radius = rng.gen_range(0.0..2.0 * d);
        let got = grid.vertices_near(c, radius).map_err(|e| e.to_string())?;
        let expect: Vec<u32> = (0..verts.len() as u32).filter(|&i| verts[i as usize].distance(c) <= radius).collect();
        if got != expect {
            return Err(format!("query {q}: {got:?} vs {expect:?}"));
        }
    }
    Ok(300)
}

/// Step-by-step reference for smallest-angle ear cutting.
fn exhaustive_ears(cycle: &[u32], p: &[Vec3]) -> Vec<[u32; 3]> {
    let mut poly = cycle.to_vec();
    let mut out = Vec::new();
    while poly.len() >= 3 {
        let m = poly.len();
        let corner = |k: usize| (poly[(k + m - 1) % m], poly[k], poly[(k + 1) % m]);
        let mut best: Option<(f64, u32, usize)> = None;
        for pass in [false, true] {
            for k in 0..m {
                let (a, v, b) = corner(k);
                // All in the z = 0 plane: angle from (b - v) to (a - v), ccw.
                let (u, w) = (p[b as usize] - p[v as usize], p[a as usize] - p[v as usize]);
                let mut ang = (u.x * w.y - u.y * w.x).atan2(u.x * w.x + u.y * w.y);
                if ang < 0.0 {
                    ang += 2.0 * PI;
                }
                if !pass && ang > PI {
                    continue;
                }
                if best.is_none_or(|(ba, bv, _)| ang < ba || (ang == ba && v < bv)) {
                    best = Some((ang, v, k));
                }
            }
            if best.is_some() {
                break;
            }
        }
        let (_, _, k) = best.unwrap();
        let (a, v, b) = corner(k);
        out.push([a, v, b]);
        poly.remove(k);
    }
    out
}

fn reflex_hexagon_matches() -> Result<usize, String> {
    let p: Vec<Vec3> = [(0.0, 0.0), (2.0, -0.3), (4.0, 0.0), (2.2, 1.0), (4.0, 2.2), (0.3, 2.0)]
        .iter()
        .map(|&(x, y)| Vec3::new(x, y, 0.0))
        .collect();
    let normals = vec![UnitVec3::Z; p.len()];
    if inner_angle(p[2], p[3], p[4], UnitVec3::Z) <= PI {
        return Err("hexagon has no reflex corner".into());
    }
    let cycle = [0, 1, 2, 3, 4, 5];
    let ours = cut_ears(&cycle, &p, &normals);
    let reference = exhaustive_ears(&cycle, &p);
    if ours != reference {
        return Err(format!("{ours:?} vs {reference:?}"));
    }
    Ok(ours.len())
}

fn similarity_invariance(trials: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < trials {
        let p: Vec<Vec3> = (0..3)
            .map(|_| Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let q0 = triangle_quality(p[0], p[1], p[2]);
        if q0 < 0.05 {
            continue;
        }
        let axis = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if axis.norm() < 1e-3 {
            continue;
        }
        let k = axis / axis.norm();
        let angle = rng.gen_range(0.0..2.0 * PI);
        let scale = rng.gen_range(0.01..100.0);
        let shift = Vec3::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let map = |x: Vec3| {
            let r = x * angle.cos() + k.cross(x) * angle.sin() + k * (k.dot(x) * (1.0 - angle.cos()));
            r * scale + shift
        };
        let q1 = triangle_quality(map(p[0]), map(p[1]), map(p[2]));
        worst = worst.max((q1 - q0).abs() / q0);
        done += 1;
    }
    worst
}

fn read_all(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn acceptance() {
    let mut out = Outcome { results: Vec::new() };
    let started = Instant::now();

    let sphere = mesh_sphere(8, SplatMode::Local(LOCAL_CAP));
    let torus = {
        let cloud = sample_torus_uniform(TORUS_N, 1).unwrap();
        reconstruct(&cloud, &MeshingParams::new(D, SplatMode::Local(LOCAL_CAP))).unwrap()
    };

    // 1. Minimum edge length and exact parent edges.
    {
        let t = Instant::now();
        let mut runs = vec![("sphere".to_string(), edge_check(&sphere)), ("torus".to_string(), edge_check(&torus))];
        let mut fewest = usize::MAX;
        for seed in 0..PATCH_SEEDS {
            let rec = reconstruct(&planar_patch(seed), &MeshingParams::new(D, SplatMode::Local(LOCAL_CAP))).unwrap();
            fewest = fewest.min(rec.mesh.triangles.len());
            runs.push((format!("patch {seed}"), edge_check(&rec)));
        }
        let bad: Vec<&String> = runs
            .iter()
            .filter(|(_, (short, parent))| !(*short >= 1.0 - EDGE_REL_TOL && *parent <= EDGE_REL_TOL))
            .map(|(name, _)| name)
            .collect();
        let shortest = runs.iter().map(|r| r.1 .0).fold(f64::INFINITY, f64::min);
        let parent = runs.iter().map(|r| r.1 .1).fold(0.0, f64::max);
        out.record(
            1,
            bad.is_empty() && fewest >= PATCH_MIN_TRIANGLES,
            format!(
                "{} runs, shortest edge {shortest:.12} d, worst parent deviation {parent:.2e}, failing {bad:?}, fewest patch triangles {fewest}, {:.1}s for patches",
                runs.len(),
                t.elapsed().as_secs_f64()
            ),
        );
    }

    // 2. Sphere reconstruction.
    {
        let norms = reconstruction_norms(&sphere.mesh, Surface::UnitSphere).unwrap();
        let m = &sphere.manifold;
        let pass = (norms.min - 1.0).abs() <= SPHERE_MIN_NORM_TOL
            && norms.max <= SPHERE_MAX_NORM
            && m.is_closed
            && m.euler_characteristic == 2;
        out.record(
            2,
            pass,
            format!(
                "norm min {:.9} max {:.4}, closed {}, chi {}",
                norms.min, norms.max, m.is_closed, m.euler_characteristic
            ),
        );
    }

    // 3. Torus reconstruction.
    {
        let norms = reconstruction_norms(&torus.mesh, Surface::Torus).unwrap();
        let m = &torus.manifold;
        let pass = norms.min >= TORUS_NORM_RANGE.0
            && norms.max <= TORUS_NORM_RANGE.1
            && m.is_manifold_with_boundary
            && m.euler_characteristic == 0;
        out.record(
            3,
            pass,
            format!(
                "norm range [{:.4}, {:.4}], manifold {}, chi {}, {} vertices",
                norms.min,
                norms.max,
                m.is_manifold_with_boundary,
                m.euler_characteristic,
                torus.mesh.vertices.len()
            ),
        );
    }

    // 4. Plateau of vertex counts over global splat sizes. The covering
    // regime is where the run closes the sphere.
    {
        let runs: Vec<(f64, usize, bool)> = SWEEP_SIZES
            .iter()
            .map(|&s| {
                let rec = mesh_sphere(8, SplatMode::Global(s));
                let covers = rec.manifold.is_closed && rec.manifold.euler_characteristic == 2;
                (s, rec.graph.vertex_count(), covers)
            })
            .collect();
        let covering: Vec<&(f64, usize, bool)> = runs.iter().filter(|r| r.2).collect();
        let worst = covering
            .windows(2)
            .map(|w| (w[1].1 as f64 - w[0].1 as f64).abs() / w[0].1 as f64)
            .fold(0.0, f64::max);
        let pass = covering.len() >= 2 && worst < SWEEP_MAX_CHANGE;
        let counts: Vec<String> = runs.iter().map(|r| format!("{}:{}{}", r.0, r.1, if r.2 { "" } else { "(open)" })).collect();
        out.record(4, pass, format!("vertex counts {}, largest step {:.2}%", counts.join(" "), 100.0 * worst));
    }

    // 5. Window size and border lengths.
    {
        let w0 = mesh_sphere(0, SplatMode::Local(LOCAL_CAP)).graph.max_border_length();
        let w8 = sphere.graph.max_border_length();
        out.record(5, w8 <= w0 && w8 <= WINDOW_BORDER_CAP, format!("largest border w=8 {w8}, w=0 {w0}"));
    }

    // 6. Quality regime.
    {
        let q = sphere.quality.as_ref().unwrap();
        let pass = q.q_avg >= Q_AVG_MIN && q.e_avg >= E_AVG_RANGE.0 && q.e_avg <= E_AVG_RANGE.1;
        out.record(6, pass, format!("q_avg {:.4}, e_avg {:.4}", q.q_avg, q.e_avg));
    }

    // 7. Metric formulas.
    {
        let s = 0.37;
        let eq = triangle_quality(Vec3::ZERO, Vec3::new(s, 0.0, 0.0), Vec3::new(s / 2.0, s * 3f64.sqrt() / 2.0, 0.0));
        let (_, rms) = mean_and_rms_percent(&[1.0, 0.5]);
        let worst = similarity_invariance(SIMILARITY_TRIALS);
        let pass = (eq - 1.0).abs() <= QUALITY_EXACT_TOL
            && (rms - 100.0 * 0.25 / 0.75).abs() <= RMS_TOL
            && worst <= QUALITY_EXACT_TOL;
        out.record(
            7,
            pass,
            format!("equilateral {eq:.15}, two-element rms {rms:.12}, worst similarity change {worst:.2e}"),
        );
    }

    // 8. Oracle equivalence suite.
    {
        let checks = [
            ("candidates", candidates_match_grid_search()),
            ("registration", registration_matches_brute_force()),
            ("vertices_near", vertices_near_matches_scan()),
            ("reflex hexagon", reflex_hexagon_matches()),
        ];
        let pass = checks.iter().all(|c| c.1.is_ok());
        let detail: Vec<String> = checks
            .iter()
            .map(|(name, r)| match r {
                Ok(n) => format!("{name} ok ({n})"),
                Err(e) => format!("{name} failed: {e}"),
            })
            .collect();
        out.record(8, pass, detail.join(", "));
    }

    // 9. Determinism of written artifacts.
    {
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        for dir in &dirs {
            let mut cfg = RunConfig::new(Source::Sphere { n: SPHERE_N, seed: 1 }, MeshingParams::new(D, SplatMode::Local(LOCAL_CAP)));
            cfg.output = Some(dir.path().join("mesh.obj"));
            cfg.report = Some(dir.path().join("report.json"));
            cfg.histograms = Some(dir.path().join("hist"));
            run(&cfg).unwrap();
        }
        let (a, b) = (read_all(dirs[0].path()), read_all(dirs[1].path()));
        out.record(9, a.len() == 5 && a == b, format!("{} files compared", a.len()));
    }

    println!("acceptance finished in {:.1}s", started.elapsed().as_secs_f64());
    let failed: Vec<usize> = out.results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
