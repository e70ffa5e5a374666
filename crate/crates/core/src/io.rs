//! Text formats: ASCII PLY and whitespace-separated `x y z nx ny nz` files
//! for point clouds, OBJ and ASCII PLY for meshes.
//!
//! Meshes record untriangulated borders too. OBJ stores them as
//! `# hole i j k ...` comment lines (1-based like `f`), PLY as a separate
//! `hole` element with an index list property.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::{UnitVec3, Vec3};
use crate::mesh::TriangleMesh;
use crate::normals::estimate_normals;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudFormat {
    PlyAscii,
    XyzNormals,
}

impl CloudFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "ply" => Some(CloudFormat::PlyAscii),
            "xyz" | "xyzn" | "txt" | "pts" => Some(CloudFormat::XyzNormals),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    PlyAscii,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "obj" => Some(MeshFormat::Obj),
            "ply" => Some(MeshFormat::PlyAscii),
            _ => None,
        }
    }
}

/// Points as read from disk, before normals are required.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPoints {
    pub points: Vec<Vec3>,
    pub normals: Option<Vec<Vec3>>,
}

/// Tolerance on the length of stored normals before they are rejected.
const NORMAL_LENGTH_TOL: f64 = 1e-3;

/// Loads an oriented point cloud.
///
/// Stored normals are renormalized when their length is within 1e-3 of one.
/// If the file carries no normals, `estimate_k` selects the neighborhood size
/// for estimating them; without it the load fails.
pub fn load_point_cloud(path: &Path, format: CloudFormat, estimate_k: Option<usize>) -> Result<PointCloud> {
    let raw = read_points(path, format)?;
    match (raw.normals, estimate_k) {
        (_, Some(k)) => estimate_normals(&raw.points, k),
        (Some(normals), None) => {
            let mut units = Vec::with_capacity(normals.len());
            for (i, n) in normals.into_iter().enumerate() {
                let len = n.norm();
                if !len.is_finite() || (len - 1.0).abs() > NORMAL_LENGTH_TOL {
                    return Err(Error::Input(format!(
                        "normal of point {i} has length {len}, expected unit length"
                    )));
                }
                units.push(UnitVec3::new_unchecked(n / len));
            }
            PointCloud::new(raw.points, units)
        }
        (None, None) => Err(Error::Format(format!(
            "{} has no normals; pass a neighbor count to estimate them",
            path.display()
        ))),
    }
}

pub fn read_points(path: &Path, format: CloudFormat) -> Result<RawPoints> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    match format {
        CloudFormat::XyzNormals => read_xyz(path, reader),
        CloudFormat::PlyAscii => read_ply_points(path, reader),
    }
}

fn parse_reals(path: &Path, line_no: usize, text: &str) -> Result<Vec<f64>> {
    text.split_whitespace()
        .map(|tok| {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("not a number: {tok:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    message: format!("non-finite value {tok:?}"),
                });
            }
            Ok(v)
        })
        .collect()
}

fn read_xyz(path: &Path, reader: impl BufRead) -> Result<RawPoints> {
    let mut points = Vec::new();
    let mut normals = Vec::new();
    let mut width = None;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let vals = parse_reals(path, i + 1, text)?;
        if vals.len() != 3 && vals.len() != 6 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("expected 3 or 6 values, found {}", vals.len()),
            });
        }
        if *width.get_or_insert(vals.len()) != vals.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: "inconsistent column count".into(),
            });
        }
        points.push(Vec3::new(vals[0], vals[1], vals[2]));
        if vals.len() == 6 {
            normals.push(Vec3::new(vals[3], vals[4], vals[5]));
        }
    }
    let normals = (width == Some(6)).then_some(normals);
    Ok(RawPoints { points, normals })
}

#[derive(Debug)]
struct PlyElement {
    name: String,
    count: usize,
    /// Scalar property names; list properties are recorded as `None`.
    properties: Vec<Option<String>>,
}

fn read_ply_header(path: &Path, lines: &mut impl Iterator<Item = (usize, std::io::Result<String>)>) -> Result<Vec<PlyElement>> {
    let perr = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut elements: Vec<PlyElement> = Vec::new();
    let mut first = true;
    for (i, line) in lines.by_ref() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let mut toks = line.split_whitespace();
        let Some(key) = toks.next() else { continue };
        if first {
            if key != "ply" {
                return Err(Error::Format(format!("{} is not a PLY file", path.display())));
            }
            first = false;
            continue;
        }
        match key {
            "format" => {
                if toks.next() != Some("ascii") {
                    return Err(Error::Format("only ASCII PLY is supported".into()));
                }
            }
            "comment" | "obj_info" => {}
            "element" => {
                let name = toks.next().ok_or_else(|| perr(i + 1, "element without name".into()))?;
                let count = toks
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| perr(i + 1, "element without count".into()))?;
                elements.push(PlyElement {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            "property" => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| perr(i + 1, "property before element".into()))?;
                let kind = toks.next().unwrap_or_default();
                if kind == "list" {
                    el.properties.push(None);
                } else {
                    let name = toks.next().ok_or_else(|| perr(i + 1, "property without name".into()))?;
                    el.properties.push(Some(name.to_string()));
                }
            }
            "end_header" => return Ok(elements),
            other => return Err(perr(i + 1, format!("unexpected header keyword {other:?}"))),
        }
    }
    Err(Error::Format(format!("{}: missing end_header", path.display())))
}

fn read_ply_points(path: &Path, reader: impl BufRead) -> Result<RawPoints> {
    let mut lines = reader.lines().enumerate();
    let elements = read_ply_header(path, &mut lines)?;
    let mut points = Vec::new();
    let mut normals = None;
    for el in &elements {
        if el.name != "vertex" {
            skip_ply_element(path, &mut lines, el)?;
            continue;
        }
        let idx = |n: &str| el.properties.iter().position(|p| p.as_deref() == Some(n));
        let (Some(ix), Some(iy), Some(iz)) = (idx("x"), idx("y"), idx("z")) else {
            return Err(Error::Format("PLY vertex element lacks x/y/z".into()));
        };
        let normal_idx = match (idx("nx"), idx("ny"), idx("nz")) {
            (Some(a), Some(b), Some(c)) => Some((a, b, c)),
            _ => None,
        };
        if el.properties.iter().any(Option::is_none) {
            return Err(Error::Format("list properties on vertices are not supported".into()));
        }
        let mut ns = Vec::new();
        for _ in 0..el.count {
            let (line_no, text) = next_data_line(path, &mut lines)?;
            let vals = parse_reals(path, line_no, &text)?;
            if vals.len() < el.properties.len() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    message: format!("expected {} values", el.properties.len()),
                });
            }
            points.push(Vec3::new(vals[ix], vals[iy], vals[iz]));
            if let Some((a, b, c)) = normal_idx {
                ns.push(Vec3::new(vals[a], vals[b], vals[c]));
            }
        }
        if normal_idx.is_some() {
            normals = Some(ns);
        }
    }
    Ok(RawPoints { points, normals })
}

fn next_data_line(
    path: &Path,
    lines: &mut impl Iterator<Item = (usize, std::io::Result<String>)>,
) -> Result<(usize, String)> {
    for (i, line) in lines.by_ref() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            return Ok((i + 1, line));
        }
    }
    Err(Error::Format(format!("{}: unexpected end of file", path.display())))
}

fn skip_ply_element(
    path: &Path,
    lines: &mut impl Iterator<Item = (usize, std::io::Result<String>)>,
    el: &PlyElement,
) -> Result<()> {
    for _ in 0..el.count {
        next_data_line(path, lines)?;
    }
    Ok(())
}

/// Writes a mesh. Coordinates use the shortest exact decimal representation,
/// so a reload reproduces them bit for bit.
pub fn save_mesh(mesh: &TriangleMesh, path: &Path, format: MeshFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let res = match format {
        MeshFormat::Obj => write_obj(mesh, &mut w),
        MeshFormat::PlyAscii => write_ply(mesh, &mut w),
    };
    res.and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn write_obj(mesh: &TriangleMesh, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "# {} vertices, {} triangles, {} holes", mesh.vertices.len(), mesh.triangles.len(), mesh.holes.len())?;
    for v in &mesh.vertices {
        writeln!(w, "v {} {} {}", v.x, v.y, v.z)?;
    }
    for t in &mesh.triangles {
        writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    for h in &mesh.holes {
        write!(w, "# hole")?;
        for i in h {
            write!(w, " {}", i + 1)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn write_ply(mesh: &TriangleMesh, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "ply")?;
    writeln!(w, "format ascii 1.0")?;
    writeln!(w, "element vertex {}", mesh.vertices.len())?;
    writeln!(w, "property double x")?;
    writeln!(w, "property double y")?;
    writeln!(w, "property double z")?;
    writeln!(w, "element face {}", mesh.triangles.len())?;
    writeln!(w, "property list uchar int vertex_indices")?;
    writeln!(w, "element hole {}", mesh.holes.len())?;
    writeln!(w, "property list int int vertex_indices")?;
    writeln!(w, "end_header")?;
    for v in &mesh.vertices {
        writeln!(w, "{} {} {}", v.x, v.y, v.z)?;
    }
    for t in &mesh.triangles {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    for h in &mesh.holes {
        write!(w, "{}", h.len())?;
        for i in h {
            write!(w, " {i}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<TriangleMesh> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mesh = match format {
        MeshFormat::Obj => read_obj(path, reader)?,
        MeshFormat::PlyAscii => read_ply_mesh(path, reader)?,
    };
    mesh.validate()?;
    Ok(mesh)
}

fn parse_indices(path: &Path, line: usize, toks: &[&str], one_based: bool) -> Result<Vec<u32>> {
    toks.iter()
        .map(|t| {
            // OBJ allows `i/t/n`; only the position index matters here.
            let head = t.split('/').next().unwrap_or_default();
            let v: i64 = head.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("bad index {t:?}"),
            })?;
            let v = if one_based { v - 1 } else { v };
            u32::try_from(v).map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("index {t:?} out of range"),
            })
        })
        .collect()
}

fn read_obj(path: &Path, reader: impl BufRead) -> Result<TriangleMesh> {
    let mut mesh = TriangleMesh::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["v", rest @ ..] => {
                let vals = parse_reals(path, i + 1, &rest.join(" "))?;
                if vals.len() < 3 {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: i + 1,
                        message: "vertex needs three coordinates".into(),
                    });
                }
                mesh.vertices.push(Vec3::new(vals[0], vals[1], vals[2]));
            }
            ["f", rest @ ..] => {
                let idx = parse_indices(path, i + 1, rest, true)?;
                if idx.len() != 3 {
                    return Err(Error::Format("only triangular faces are supported".into()));
                }
                mesh.triangles.push([idx[0], idx[1], idx[2]]);
            }
            ["#", "hole", rest @ ..] => mesh.holes.push(parse_indices(path, i + 1, rest, true)?),
            _ => {}
        }
    }
    Ok(mesh)
}

fn read_ply_mesh(path: &Path, reader: impl BufRead) -> Result<TriangleMesh> {
    let mut lines = reader.lines().enumerate();
    let elements = read_ply_header(path, &mut lines)?;
    let mut mesh = TriangleMesh::default();
    for el in &elements {
        match el.name.as_str() {
            "vertex" => {
                let idx = |n: &str| el.properties.iter().position(|p| p.as_deref() == Some(n));
                let (Some(ix), Some(iy), Some(iz)) = (idx("x"), idx("y"), idx("z")) else {
                    return Err(Error::Format("PLY vertex element lacks x/y/z".into()));
                };
                for _ in 0..el.count {
                    let (n, text) = next_data_line(path, &mut lines)?;
                    let vals = parse_reals(path, n, &text)?;
                    mesh.vertices.push(Vec3::new(vals[ix], vals[iy], vals[iz]));
                }
            }
            "face" | "hole" => {
                for _ in 0..el.count {
                    let (n, text) = next_data_line(path, &mut lines)?;
                    let toks: Vec<&str> = text.split_whitespace().collect();
                    let idx = parse_indices(path, n, toks.get(1..).unwrap_or_default(), false)?;
                    if el.name == "face" {
                        if idx.len() != 3 {
                            return Err(Error::Format("only triangular faces are supported".into()));
                        }
                        mesh.triangles.push([idx[0], idx[1], idx[2]]);
                    } else {
                        mesh.holes.push(idx);
                    }
                }
            }
            _ => skip_ply_element(path, &mut lines, el)?,
        }
    }
    Ok(mesh)
}
