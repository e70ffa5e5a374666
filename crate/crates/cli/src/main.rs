use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde::Deserialize;

use spheremesh::pipeline::{run, MeshingParams, RunConfig, Source};
use spheremesh::{Error, SplatMode, Vec3, DEFAULT_MAX_BORDER, DEFAULT_WINDOW};

/// Mesh an oriented point cloud by packing spheres of diameter D on it.
#[derive(Debug, Parser)]
#[command(name = "spheremesh", version)]
struct Args {
    /// Point cloud file (.ply, or .xyz / .xyzn / .txt / .pts with x y z nx ny nz).
    #[arg(long, conflicts_with = "synthetic")]
    input: Option<PathBuf>,
    /// Sample a test surface instead: sphere:N,SEED or torus:N,SEED.
    #[arg(long)]
    synthetic: Option<String>,
    /// Target edge length d.
    #[arg(long)]
    edge_length: Option<f64>,
    /// Splat radius, or the cap on local radii with --local-splats.
    #[arg(long)]
    splat_size: Option<f64>,
    /// Size splats from their neighborhoods.
    #[arg(long)]
    local_splats: bool,
    /// Border tracing window for candidate priorities.
    #[arg(long)]
    window: Option<usize>,
    /// Borders at least this long are left as holes.
    #[arg(long)]
    max_border: Option<usize>,
    /// Two starting points, "x,y,z;x,y,z".
    #[arg(long)]
    start: Option<String>,
    /// Estimate normals from K nearest neighbors.
    #[arg(long, value_name = "K")]
    estimate_normals: Option<usize>,
    /// Mesh output (.obj or .ply).
    #[arg(long)]
    output: Option<PathBuf>,
    /// JSON report output.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Prefix for the three histogram CSV files.
    #[arg(long, value_name = "PREFIX")]
    histograms: Option<PathBuf>,
    /// TOML file with any of the options above; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    input: Option<PathBuf>,
    synthetic: Option<String>,
    edge_length: Option<f64>,
    splat_size: Option<f64>,
    local_splats: Option<bool>,
    window: Option<usize>,
    max_border: Option<usize>,
    start: Option<String>,
    estimate_normals: Option<usize>,
    output: Option<PathBuf>,
    report: Option<PathBuf>,
    histograms: Option<PathBuf>,
}

fn parse_point(s: &str) -> Result<Vec3, Error> {
    let c: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Error::Config(format!("bad starting point {s:?}")))?;
    match c[..] {
        [x, y, z] => Ok(Vec3::new(x, y, z)),
        _ => Err(Error::Config(format!("starting point {s:?} needs three coordinates"))),
    }
}

fn parse_start(s: &str) -> Result<[Vec3; 2], Error> {
    let (a, b) = s
        .split_once(';')
        .ok_or_else(|| Error::Config(format!("--start {s:?} needs two points separated by ';'")))?;
    Ok([parse_point(a)?, parse_point(b)?])
}

fn load_file_config(path: &PathBuf) -> Result<FileConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn build_config(args: Args) -> Result<RunConfig, Error> {
    let file = match &args.config {
        Some(p) => load_file_config(p)?,
        None => FileConfig::default(),
    };
    // A source given on the command line replaces the file's, whichever kind.
    let (input, synthetic) = if args.input.is_some() || args.synthetic.is_some() {
        (args.input, args.synthetic)
    } else {
        (file.input, file.synthetic)
    };
    let source = match (input, synthetic) {
        (Some(p), None) => Source::File(p),
        (None, Some(s)) => s.parse()?,
        (Some(_), Some(_)) => return Err(Error::Config("give either an input file or a synthetic surface, not both".into())),
        (None, None) => return Err(Error::Config("no input: pass --input or --synthetic".into())),
    };
    let d = args
        .edge_length
        .or(file.edge_length)
        .ok_or_else(|| Error::Config("--edge-length is required".into()))?;
    let s = args
        .splat_size
        .or(file.splat_size)
        .ok_or_else(|| Error::Config("--splat-size is required".into()))?;
    let local = args.local_splats || file.local_splats.unwrap_or(false);
    let mut params = MeshingParams::new(d, if local { SplatMode::Local(s) } else { SplatMode::Global(s) });
    params.window = args.window.or(file.window).unwrap_or(DEFAULT_WINDOW);
    params.max_border = args.max_border.or(file.max_border).unwrap_or(DEFAULT_MAX_BORDER);
    params.start = args.start.or(file.start).as_deref().map(parse_start).transpose()?;
    Ok(RunConfig {
        source,
        params,
        estimate_normals: args.estimate_normals.or(file.estimate_normals),
        output: args.output.or(file.output),
        report: args.report.or(file.report),
        histograms: args.histograms.or(file.histograms),
    })
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::Initialization(_) => 3,
        Error::Io { .. } | Error::Parse { .. } | Error::Format(_) | Error::Input(_) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let result = build_config(args).and_then(|config| run(&config));
    match result {
        Ok(rec) => {
            let report = rec.report();
            println!(
                "vertices {} triangles {} holes {} largest_border {} euler {} manifold {}",
                rec.mesh.vertices.len(),
                report.triangles,
                report.hole_count,
                rec.graph.max_border_length(),
                report.euler_characteristic,
                rec.manifold.is_manifold_with_boundary
            );
            if let (Some(q), Some(e)) = (report.q_avg, report.e_avg) {
                println!("q_avg {q:.4} e_avg {e:.4}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
