//! The rawvol format: a JSON header plus a sibling little-endian payload.
//!
//! `scan.json` holds `{"dims":[nx,ny,nz],"spacing":[sx,sy,sz],"origin":[ox,oy,oz],"dtype":"f32"}`
//! and `scan.raw` holds `nx*ny*nz` samples in x-fastest order. `dtype` is
//! `"f32"` for intensities or `"u8"` for label grids.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{check_geometry, Volume};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RawDtype {
    #[serde(rename = "f32")]
    F32,
    #[serde(rename = "u8")]
    U8,
}

impl RawDtype {
    fn size(self) -> usize {
        match self {
            RawDtype::F32 => 4,
            RawDtype::U8 => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawvolHeader {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    #[serde(default)]
    pub origin: [f64; 3],
    pub dtype: RawDtype,
}

impl RawvolHeader {
    pub fn sample_count(&self) -> usize {
        self.dims.iter().product()
    }
}

/// Header and payload paths for a rawvol pair. Either file may be named.
pub fn paths(path: &Path) -> (PathBuf, PathBuf) {
    match path.extension().and_then(|e| e.to_str()) {
        Some("raw") => (path.with_extension("json"), path.to_path_buf()),
        _ => (path.to_path_buf(), path.with_extension("raw")),
    }
}

fn read_header(path: &Path) -> Result<RawvolHeader> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header: RawvolHeader = serde_json::from_str(&text).map_err(|e| {
        Error::parse(
            format!("{}:{}:{}", path.display(), e.line(), e.column()),
            e.to_string(),
        )
    })?;
    check_geometry(header.dims, header.spacing, header.origin)?;
    Ok(header)
}

/// Reads the header and raw payload bytes, checking the payload length.
pub fn read_raw(path: &Path) -> Result<(RawvolHeader, Vec<u8>)> {
    let (header_path, data_path) = paths(path);
    let header = read_header(&header_path)?;
    let bytes = fs::read(&data_path).map_err(|e| Error::io(&data_path, e))?;
    let width = header.dtype.size();
    let expected = header.sample_count();
    if bytes.len() != expected * width {
        return Err(Error::SizeMismatch {
            expected,
            found: bytes.len() / width,
        });
    }
    Ok((header, bytes))
}

/// Loads a rawvol as a floating-point volume. `u8` payloads are widened.
pub fn load(path: &Path) -> Result<Volume> {
    let (header, bytes) = read_raw(path)?;
    let data = match header.dtype {
        RawDtype::F32 => bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect(),
        RawDtype::U8 => bytes.iter().map(|&b| b as f32).collect(),
    };
    Volume::new(header.dims, header.spacing, header.origin, data)
}

fn write_pair(header: &RawvolHeader, payload: &[u8], path: &Path) -> Result<()> {
    let (header_path, data_path) = paths(path);
    let mut text = serde_json::to_string(header).expect("header serializes");
    text.push('\n');
    fs::write(&header_path, text).map_err(|e| Error::io(&header_path, e))?;
    fs::write(&data_path, payload).map_err(|e| Error::io(&data_path, e))?;
    Ok(())
}

pub fn save(volume: &Volume, path: &Path) -> Result<()> {
    let header = RawvolHeader {
        dims: volume.dims(),
        spacing: volume.spacing(),
        origin: volume.origin(),
        dtype: RawDtype::F32,
    };
    let mut payload = Vec::with_capacity(volume.len() * 4);
    for v in volume.data() {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    write_pair(&header, &payload, path)
}

/// Writes a `u8` rawvol (used for label grids).
pub fn save_u8(
    dims: [usize; 3],
    spacing: [f64; 3],
    origin: [f64; 3],
    samples: &[u8],
    path: &Path,
) -> Result<()> {
    let header = RawvolHeader {
        dims,
        spacing,
        origin,
        dtype: RawDtype::U8,
    };
    if samples.len() != header.sample_count() {
        return Err(Error::SizeMismatch {
            expected: header.sample_count(),
            found: samples.len(),
        });
    }
    write_pair(&header, samples, path)
}
