//! OBJ (ASCII) and PLY (binary little-endian) mesh files.
//!
//! Coordinates are written and read as `f32`. The PLY reader also accepts
//! ASCII and big-endian files and ignores extra properties and elements.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::TriangleMesh;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl MeshFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        path.extension()
            .and_then(|e| e.to_str())
            .ok_or_else(|| {
                Error::InvalidArgument(format!("{} has no mesh extension", path.display()))
            })?
            .parse()
    }
}

impl std::str::FromStr for MeshFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(MeshFormat::Obj),
            "ply" => Ok(MeshFormat::Ply),
            other => Err(Error::InvalidArgument(format!(
                "unknown mesh format '{other}' (expected obj or ply)"
            ))),
        }
    }
}

pub fn export_mesh(mesh: &TriangleMesh, path: impl AsRef<Path>, format: MeshFormat) -> Result<()> {
    let path = path.as_ref();
    let bytes = match format {
        MeshFormat::Obj => obj_bytes(mesh),
        MeshFormat::Ply => ply_bytes(mesh),
    };
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&bytes)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn import_mesh(path: impl AsRef<Path>, format: MeshFormat) -> Result<TriangleMesh> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mesh = match format {
        MeshFormat::Obj => parse_obj(&bytes),
        MeshFormat::Ply => parse_ply(&bytes),
    }
    .map_err(|e| match e {
        Error::Parse { location, message } => Error::Parse {
            location: format!("{}:{location}", path.display()),
            message,
        },
        other => other,
    })?;
    Ok(mesh)
}

fn obj_bytes(mesh: &TriangleMesh) -> Vec<u8> {
    let mut out = String::with_capacity(mesh.vertices.len() * 32 + mesh.triangles.len() * 24);
    use std::fmt::Write as _;
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {} {} {}", v[0] as f32, v[1] as f32, v[2] as f32);
    }
    for t in &mesh.triangles {
        let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    out.into_bytes()
}

fn parse_obj(bytes: &[u8]) -> Result<TriangleMesh> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::parse("byte 0", e.to_string()))?;
    let mut mesh = TriangleMesh::default();
    let mut faces: Vec<(usize, Vec<i64>)> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line_no = no + 1;
        let at = || format!("line {line_no}");
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let coords = tokens
                    .take(3)
                    .map(|t| t.parse::<f32>().map(f64::from))
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::parse(at(), e.to_string()))?;
                if coords.len() != 3 {
                    return Err(Error::parse(at(), "vertex needs 3 coordinates"));
                }
                mesh.vertices.push([coords[0], coords[1], coords[2]]);
            }
            Some("f") => {
                let idx = tokens
                    .map(|t| {
                        t.split('/')
                            .next()
                            .unwrap_or_default()
                            .parse::<i64>()
                            .map_err(|e| Error::parse(at(), format!("face index '{t}': {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if idx.len() < 3 {
                    return Err(Error::parse(at(), "face needs at least 3 vertices"));
                }
                if idx.contains(&0) {
                    return Err(Error::parse(at(), "face index 0 (OBJ indices are 1-based)"));
                }
                faces.push((line_no, idx));
            }
            _ => {}
        }
    }

    let n = mesh.vertices.len() as i64;
    for (line_no, idx) in faces {
        let resolved = idx
            .iter()
            .map(|&i| {
                let r = if i > 0 { i - 1 } else { n + i };
                if (0..n).contains(&r) {
                    Ok(r as u32)
                } else {
                    Err(Error::parse(
                        format!("line {line_no}"),
                        format!("face index {i} out of range for {n} vertices"),
                    ))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        for k in 1..resolved.len() - 1 {
            mesh.triangles.push([resolved[0], resolved[k], resolved[k + 1]]);
        }
    }
    mesh.validate()
        .map_err(|e| Error::parse("mesh", e.to_string()))?;
    Ok(mesh)
}

fn ply_bytes(mesh: &TriangleMesh) -> Vec<u8> {
    let header = format!(
        "ply\nformat binary_little_endian 1.0\ncomment skinseg\n\
         element vertex {}\nproperty float x\nproperty float y\nproperty float z\n\
         element face {}\nproperty list uchar int vertex_indices\nend_header\n",
        mesh.vertices.len(),
        mesh.triangles.len()
    );
    let mut out = header.into_bytes();
    for v in &mesh.vertices {
        for c in v {
            out.extend_from_slice(&(*c as f32).to_le_bytes());
        }
    }
    for t in &mesh.triangles {
        out.push(3);
        for &i in t {
            out.extend_from_slice(&(i as i32).to_le_bytes());
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar(String, Scalar),
    List(String, Scalar, Scalar),
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Encoding {
    Ascii,
    LittleEndian,
    BigEndian,
}

/// Sequential value source over the PLY body.
trait Values {
    fn next(&mut self, ty: Scalar) -> Result<f64>;
}

struct Binary<'a> {
    bytes: &'a [u8],
    pos: usize,
    big: bool,
}

impl Values for Binary<'_> {
    fn next(&mut self, ty: Scalar) -> Result<f64> {
        let n = ty.size();
        let Some(raw) = self.bytes.get(self.pos..self.pos + n) else {
            return Err(Error::parse(
                format!("byte {}", self.pos),
                "unexpected end of binary data",
            ));
        };
        let mut b = [0u8; 8];
        b[..n].copy_from_slice(raw);
        if self.big {
            b[..n].reverse();
        }
        self.pos += n;
        Ok(match ty {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes(b),
        })
    }
}

struct Ascii<'a> {
    tokens: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
}

impl Values for Ascii<'_> {
    fn next(&mut self, ty: Scalar) -> Result<f64> {
        let (line, tok) = self
            .tokens
            .next()
            .ok_or_else(|| Error::parse("end of file", "unexpected end of ASCII data"))?;
        let value = if matches!(ty, Scalar::F32) {
            tok.parse::<f32>().map(f64::from).ok()
        } else {
            tok.parse::<f64>().ok()
        };
        value.ok_or_else(|| Error::parse(format!("line {line}"), format!("bad number '{tok}'")))
    }
}

fn parse_ply(bytes: &[u8]) -> Result<TriangleMesh> {
    let end = bytes
        .windows(11)
        .position(|w| w == b"end_header\n")
        .ok_or_else(|| Error::parse("header", "missing end_header"))?;
    let body_start = end + 11;
    let header = std::str::from_utf8(&bytes[..end])
        .map_err(|e| Error::parse("header", e.to_string()))?;

    let mut lines = header.lines().enumerate();
    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(Error::parse("line 1", "missing 'ply' magic")),
    }
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    for (no, line) in lines {
        let at = || format!("line {}", no + 1);
        let t: Vec<&str> = line.split_whitespace().collect();
        match t.as_slice() {
            ["format", fmt, _] => {
                encoding = Some(match *fmt {
                    "ascii" => Encoding::Ascii,
                    "binary_little_endian" => Encoding::LittleEndian,
                    "binary_big_endian" => Encoding::BigEndian,
                    other => return Err(Error::parse(at(), format!("unknown format {other}"))),
                })
            }
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count
                    .parse()
                    .map_err(|_| Error::parse(at(), format!("bad element count '{count}'")))?,
                properties: Vec::new(),
            }),
            ["property", "list", count_ty, item_ty, name] => {
                let (Some(c), Some(i)) = (Scalar::parse(count_ty), Scalar::parse(item_ty)) else {
                    return Err(Error::parse(at(), "unknown list property type"));
                };
                elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(at(), "property before element"))?
                    .properties
                    .push(Property::List(name.to_string(), c, i));
            }
            ["property", ty, name] => {
                let ty = Scalar::parse(ty)
                    .ok_or_else(|| Error::parse(at(), format!("unknown property type '{ty}'")))?;
                elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(at(), "property before element"))?
                    .properties
                    .push(Property::Scalar(name.to_string(), ty));
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            _ => return Err(Error::parse(at(), format!("unrecognized header line '{line}'"))),
        }
    }
    let encoding = encoding.ok_or_else(|| Error::parse("header", "missing format line"))?;

    let body = &bytes[body_start..];
    let mut source: Box<dyn Values> = match encoding {
        Encoding::Ascii => {
            let text = std::str::from_utf8(body)
                .map_err(|e| Error::parse("body", e.to_string()))?;
            let header_lines = header.lines().count() + 1;
            let iter: Box<dyn Iterator<Item = (usize, &str)>> = Box::new(
                text.lines()
                    .enumerate()
                    .flat_map(move |(i, l)| l.split_whitespace().map(move |t| (i + 1 + header_lines, t))),
            );
            Box::new(Ascii {
                tokens: iter.peekable(),
            })
        }
        Encoding::LittleEndian | Encoding::BigEndian => Box::new(Binary {
            bytes: body,
            pos: 0,
            big: encoding == Encoding::BigEndian,
        }),
    };

    let mut mesh = TriangleMesh::default();
    for el in &elements {
        let xyz = ["x", "y", "z"].map(|axis| {
            el.properties
                .iter()
                .position(|p| matches!(p, Property::Scalar(n, _) if n == axis))
        });
        let face_list = el.properties.iter().position(
            |p| matches!(p, Property::List(n, _, _) if n == "vertex_indices" || n == "vertex_index"),
        );
        if el.name == "vertex" && xyz.iter().any(Option::is_none) {
            return Err(Error::parse("header", "vertex element lacks x, y or z"));
        }
        for _ in 0..el.count {
            let mut pos = [0.0; 3];
            for (pi, prop) in el.properties.iter().enumerate() {
                match prop {
                    Property::Scalar(_, ty) => {
                        let v = source.next(*ty)?;
                        if el.name == "vertex" {
                            if let Some(axis) = xyz.iter().position(|&i| i == Some(pi)) {
                                pos[axis] = v;
                            }
                        }
                    }
                    Property::List(_, count_ty, item_ty) => {
                        let n = source.next(*count_ty)?;
                        if !(n >= 0.0) {
                            return Err(Error::parse("body", format!("negative list length {n}")));
                        }
                        let items = (0..n as usize)
                            .map(|_| source.next(*item_ty))
                            .collect::<Result<Vec<_>>>()?;
                        if el.name == "face" && face_list == Some(pi) {
                            if items.len() < 3 {
                                return Err(Error::parse(
                                    format!("face {}", mesh.triangles.len()),
                                    "face needs at least 3 vertices",
                                ));
                            }
                            let idx = items
                                .iter()
                                .map(|&i| {
                                    if i >= 0.0 && i <= u32::MAX as f64 {
                                        Ok(i as u32)
                                    } else {
                                        Err(Error::parse("face", format!("bad vertex index {i}")))
                                    }
                                })
                                .collect::<Result<Vec<_>>>()?;
                            for k in 1..idx.len() - 1 {
                                mesh.triangles.push([idx[0], idx[k], idx[k + 1]]);
                            }
                        }
                    }
                }
            }
            if el.name == "vertex" {
                mesh.vertices.push(pos);
            }
        }
    }
    mesh.validate()
        .map_err(|e| Error::parse("mesh", e.to_string()))?;
    Ok(mesh)
}
