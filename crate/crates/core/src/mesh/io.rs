//! Mesh readers and writers.
//!
//! Surfaces are read from OFF or OBJ (vertices and triangles only; OBJ texture
//! and normal references are ignored). Solids use a plain-text tet format:
//!
//! ```text
//! # comments and blank lines are ignored
//! tetmesh 1
//! vertices <N>
//! <x> <y> <z>            N lines
//! tets <M>
//! <a> <b> <c> <d>        M lines, 0-based vertex indices
//! boundary <K>
//! <a> <b> <c>            K lines, wound counter-clockwise seen from outside
//! ```
//!
//! Tetrahedra may have either orientation. The boundary list must match the
//! faces that belong to exactly one tetrahedron, with outward winding.

use std::path::Path;
use std::str::FromStr;

use super::{component_labels, MeshComplex, MeshError, MeshStats, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
    Tet,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .unwrap_or_default()
            .to_ascii_lowercase();
        ext.parse()
    }
}

impl FromStr for MeshFormat {
    type Err = MeshError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Ok(Self::Off),
            "obj" => Ok(Self::Obj),
            "tet" => Ok(Self::Tet),
            other => Err(MeshError::UnknownFormat(other.to_string())),
        }
    }
}

/// Reads and validates a mesh. `format` defaults to the file extension.
pub fn load_mesh(path: &Path, format: Option<MeshFormat>) -> Result<MeshComplex> {
    let format = match format {
        Some(f) => f,
        None => MeshFormat::from_path(path)?,
    };
    let text = std::fs::read_to_string(path).map_err(|e| MeshError::Io(format!("{}: {e}", path.display())))?;
    parse_mesh(&text, format)
}

pub fn parse_mesh(text: &str, format: MeshFormat) -> Result<MeshComplex> {
    match format {
        MeshFormat::Off => {
            let (v, f) = parse_off(text)?;
            oriented_surface(v, f)
        }
        MeshFormat::Obj => {
            let (v, f) = parse_obj(text)?;
            oriented_surface(v, f)
        }
        MeshFormat::Tet => parse_tet(text),
    }
}

/// Validates a surface, then flips any component enclosing negative volume so
/// every component winds outward.
fn oriented_surface(vertices: Vec<Vec3>, mut faces: Vec<[usize; 3]>) -> Result<MeshComplex> {
    let mesh = MeshComplex::surface(vertices, faces.clone())?;
    let labels = component_labels(
        mesh.vertices().len(),
        mesh.edges().iter().copied(),
    );
    let mut volume = vec![0.0; labels.iter().max().map_or(0, |m| m + 1)];
    for t in &faces {
        let [a, b, c] = t.map(|i| mesh.vertices()[i]);
        volume[labels[t[0]]] += a.dot(&b.cross(&c)) / 6.0;
    }
    if volume.iter().all(|&v| v >= 0.0) {
        return Ok(mesh);
    }
    for t in faces.iter_mut() {
        if volume[labels[t[0]]] < 0.0 {
            t.swap(1, 2);
        }
    }
    MeshComplex::surface(mesh.vertices().to_vec(), faces)
}

/// Non-empty, non-comment lines with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn parse_num<T: FromStr>(token: Option<&str>, line: usize, what: &str) -> Result<T> {
    let token = token.ok_or_else(|| MeshError::Parse {
        line,
        message: format!("missing {what}"),
    })?;
    token.parse().map_err(|_| MeshError::Parse {
        line,
        message: format!("invalid {what} `{token}`"),
    })
}

fn parse_point<'a>(mut tokens: impl Iterator<Item = &'a str>, line: usize) -> Result<Vec3> {
    let x = parse_num(tokens.next(), line, "x coordinate")?;
    let y = parse_num(tokens.next(), line, "y coordinate")?;
    let z = parse_num(tokens.next(), line, "z coordinate")?;
    Ok(Vec3::new(x, y, z))
}

fn unexpected_end(text: &str, what: &str) -> MeshError {
    MeshError::Parse {
        line: text.lines().count() + 1,
        message: format!("unexpected end of file, expected {what}"),
    }
}

pub fn parse_off(text: &str) -> Result<(Vec<Vec3>, Vec<[usize; 3]>)> {
    let mut lines = content_lines(text);
    let (line, header) = lines.next().ok_or_else(|| unexpected_end(text, "OFF header"))?;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some("OFF") {
        return Err(MeshError::Parse {
            line,
            message: "expected `OFF` header".into(),
        });
    }
    // counts may share the header line
    let rest: Vec<&str> = tokens.collect();
    let (count_line, counts) = if rest.is_empty() {
        let (l, c) = lines.next().ok_or_else(|| unexpected_end(text, "vertex and face counts"))?;
        (l, c.split_whitespace().collect::<Vec<_>>())
    } else {
        (line, rest)
    };
    let mut counts = counts.into_iter();
    let nv: usize = parse_num(counts.next(), count_line, "vertex count")?;
    let nf: usize = parse_num(counts.next(), count_line, "face count")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (l, s) = lines.next().ok_or_else(|| unexpected_end(text, "vertex"))?;
        vertices.push(parse_point(s.split_whitespace(), l)?);
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (l, s) = lines.next().ok_or_else(|| unexpected_end(text, "face"))?;
        let mut tokens = s.split_whitespace();
        let k: usize = parse_num(tokens.next(), l, "face size")?;
        if k != 3 {
            return Err(MeshError::Parse {
                line: l,
                message: format!("only triangles are supported, found a {k}-gon"),
            });
        }
        faces.push([
            parse_num(tokens.next(), l, "vertex index")?,
            parse_num(tokens.next(), l, "vertex index")?,
            parse_num(tokens.next(), l, "vertex index")?,
        ]);
    }
    Ok((vertices, faces))
}

pub fn parse_obj(text: &str) -> Result<(Vec<Vec3>, Vec<[usize; 3]>)> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (l, s) in content_lines(text) {
        let mut tokens = s.split_whitespace();
        match tokens.next() {
            Some("v") => vertices.push(parse_point(tokens, l)?),
            Some("f") => {
                let refs: Vec<&str> = tokens.collect();
                if refs.len() != 3 {
                    return Err(MeshError::Parse {
                        line: l,
                        message: format!("only triangles are supported, found {} vertices", refs.len()),
                    });
                }
                let mut face = [0usize; 3];
                for (slot, r) in face.iter_mut().zip(&refs) {
                    // `v`, `v/vt`, `v//vn` or `v/vt/vn`: keep the position index
                    let idx: i64 = parse_num(r.split('/').next(), l, "vertex index")?;
                    let resolved = if idx > 0 {
                        idx - 1
                    } else {
                        vertices.len() as i64 + idx
                    };
                    if idx == 0 || resolved < 0 {
                        return Err(MeshError::Parse {
                            line: l,
                            message: format!("invalid vertex reference `{r}`"),
                        });
                    }
                    *slot = resolved as usize;
                }
                faces.push(face);
            }
            _ => {}
        }
    }
    Ok((vertices, faces))
}

fn parse_tet(text: &str) -> Result<MeshComplex> {
    let mut lines = content_lines(text);
    let header = |name: &str, lines: &mut dyn Iterator<Item = (usize, &str)>| -> Result<(usize, usize)> {
        let (l, s) = lines.next().ok_or_else(|| unexpected_end(text, name))?;
        let mut tokens = s.split_whitespace();
        if tokens.next() != Some(name) {
            return Err(MeshError::Parse {
                line: l,
                message: format!("expected `{name}`"),
            });
        }
        Ok((l, parse_num(tokens.next(), l, name)?))
    };
    let (l, version) = header("tetmesh", &mut lines)?;
    if version != 1 {
        return Err(MeshError::Parse {
            line: l,
            message: format!("unsupported tetmesh version {version}"),
        });
    }
    let nv = header("vertices", &mut lines)?.1;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (l, s) = lines.next().ok_or_else(|| unexpected_end(text, "vertex"))?;
        vertices.push(parse_point(s.split_whitespace(), l)?);
    }
    let nt = header("tets", &mut lines)?.1;
    let mut tets = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (l, s) = lines.next().ok_or_else(|| unexpected_end(text, "tetrahedron"))?;
        let mut t = s.split_whitespace();
        let mut cell = [0usize; 4];
        for slot in cell.iter_mut() {
            *slot = parse_num(t.next(), l, "vertex index")?;
        }
        tets.push(cell);
    }
    let nb = header("boundary", &mut lines)?.1;
    let mut boundary = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (l, s) = lines.next().ok_or_else(|| unexpected_end(text, "boundary face"))?;
        let mut t = s.split_whitespace();
        let mut face = [0usize; 3];
        for slot in face.iter_mut() {
            *slot = parse_num(t.next(), l, "vertex index")?;
        }
        boundary.push(face);
    }
    if let Some((l, _)) = lines.next() {
        return Err(MeshError::Parse {
            line: l,
            message: "trailing content after boundary list".into(),
        });
    }
    MeshComplex::solid_with_boundary(vertices, tets, &boundary)
}

pub fn write_off(mesh: &MeshComplex) -> String {
    let mut out = format!("OFF\n{} {} 0\n", mesh.vertices().len(), mesh.triangles().len());
    for v in mesh.vertices() {
        out.push_str(&format!("{:.17e} {:.17e} {:.17e}\n", v.x, v.y, v.z));
    }
    for t in mesh.triangles() {
        out.push_str(&format!("3 {} {} {}\n", t[0], t[1], t[2]));
    }
    out
}

pub fn write_tet(mesh: &MeshComplex) -> Result<String> {
    if mesh.is_surface() {
        return Err(MeshError::WrongKind { expected: "solid" });
    }
    let mut out = format!("tetmesh 1\nvertices {}\n", mesh.vertices().len());
    for v in mesh.vertices() {
        out.push_str(&format!("{:.17e} {:.17e} {:.17e}\n", v.x, v.y, v.z));
    }
    out.push_str(&format!("tets {}\n", mesh.tets().len()));
    for t in mesh.tets() {
        out.push_str(&format!("{} {} {} {}\n", t[0], t[1], t[2], t[3]));
    }
    out.push_str(&format!("boundary {}\n", mesh.boundary_faces().len()));
    for f in mesh.boundary_faces() {
        out.push_str(&format!("{} {} {}\n", f[0], f[1], f[2]));
    }
    Ok(out)
}

/// Writes the mesh statistics as pretty-printed JSON.
pub fn save_stats(path: &Path, stats: &MeshStats) -> Result<()> {
    let json = serde_json::to_string_pretty(stats).map_err(|e| MeshError::Io(e.to_string()))?;
    std::fs::write(path, json + "\n").map_err(|e| MeshError::Io(format!("{}: {e}", path.display())))
}
