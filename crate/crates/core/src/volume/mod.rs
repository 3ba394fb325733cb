//! 3D scalar volumes with physical metadata and their on-disk formats.
//!
//! Samples are stored x-fastest: `index = x + nx * (y + ny * z)`. World
//! coordinates of a voxel center are `origin + index * spacing` per axis, in
//! millimeters. Anatomical orientation is not modeled.

mod nifti;
pub mod rawvol;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use nifti::load_nifti;

/// Integer voxel index into a volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VoxelCoord {
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

impl VoxelCoord {
    pub fn new(x: usize, y: usize, z: usize) -> Self {
        Self { x, y, z }
    }
}

/// Supported volume file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VolumeFormat {
    Nifti1,
    Rawvol,
}

impl std::str::FromStr for VolumeFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nifti1" | "nifti" | "nii" => Ok(VolumeFormat::Nifti1),
            "rawvol" | "raw" => Ok(VolumeFormat::Rawvol),
            other => Err(Error::InvalidArgument(format!(
                "unknown volume format '{other}' (expected nifti1 or rawvol)"
            ))),
        }
    }
}

/// A 3D grid of scalar intensities.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    dims: [usize; 3],
    spacing: [f64; 3],
    origin: [f64; 3],
    data: Vec<f32>,
}

pub(crate) fn check_geometry(dims: [usize; 3], spacing: [f64; 3], origin: [f64; 3]) -> Result<()> {
    if dims.iter().any(|&n| n == 0) {
        return Err(Error::InvalidArgument(format!(
            "dims must all be >= 1, got {dims:?}"
        )));
    }
    if spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "spacing must be finite and > 0, got {spacing:?}"
        )));
    }
    if origin.iter().any(|o| !o.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "origin must be finite, got {origin:?}"
        )));
    }
    Ok(())
}

impl Volume {
    pub fn new(
        dims: [usize; 3],
        spacing: [f64; 3],
        origin: [f64; 3],
        data: Vec<f32>,
    ) -> Result<Self> {
        check_geometry(dims, spacing, origin)?;
        let expected = dims[0] * dims[1] * dims[2];
        if data.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                found: data.len(),
            });
        }
        let count = data.iter().filter(|v| !v.is_finite()).count();
        if count > 0 {
            return Err(Error::NonFinite { count });
        }
        Ok(Self {
            dims,
            spacing,
            origin,
            data,
        })
    }

    /// Volume filled with a single value.
    pub fn filled(dims: [usize; 3], spacing: [f64; 3], origin: [f64; 3], value: f32) -> Result<Self> {
        check_geometry(dims, spacing, origin)?;
        Self::new(dims, spacing, origin, vec![value; dims[0] * dims[1] * dims[2]])
    }

    /// Builds a volume by evaluating `f(x, y, z)` at every voxel.
    pub fn from_fn(
        dims: [usize; 3],
        spacing: [f64; 3],
        origin: [f64; 3],
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        check_geometry(dims, spacing, origin)?;
        let mut data = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    data.push(f(x, y, z));
                }
            }
        }
        Self::new(dims, spacing, origin, data)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> f32 {
        self.data[self.index(x, y, z)]
    }

    pub fn contains(&self, c: VoxelCoord) -> bool {
        c.x < self.dims[0] && c.y < self.dims[1] && c.z < self.dims[2]
    }

    /// World position (mm) of a voxel center.
    pub fn world(&self, x: usize, y: usize, z: usize) -> [f64; 3] {
        [
            self.origin[0] + x as f64 * self.spacing[0],
            self.origin[1] + y as f64 * self.spacing[1],
            self.origin[2] + z as f64 * self.spacing[2],
        ]
    }

    /// Minimum and maximum intensity.
    pub fn min_max(&self) -> (f32, f32) {
        self.data
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// The x-y plane at height `z`.
    pub fn slice_at(&self, z: usize) -> Result<Slice<'_>> {
        if z >= self.dims[2] {
            return Err(Error::OutOfRange(format!(
                "slice z={z} but volume has nz={}",
                self.dims[2]
            )));
        }
        let n = self.dims[0] * self.dims[1];
        Ok(Slice {
            nx: self.dims[0],
            ny: self.dims[1],
            data: &self.data[z * n..(z + 1) * n],
        })
    }

    /// Replaces the samples, keeping the geometry.
    pub(crate) fn with_data(&self, data: Vec<f32>) -> Result<Self> {
        Self::new(self.dims, self.spacing, self.origin, data)
    }
}

/// Borrowed x-y plane of a volume, x-fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slice<'a> {
    nx: usize,
    ny: usize,
    data: &'a [f32],
}

impl<'a> Slice<'a> {
    pub fn new(nx: usize, ny: usize, data: &'a [f32]) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidArgument(format!(
                "slice dims must be >= 1, got {nx}x{ny}"
            )));
        }
        if data.len() != nx * ny {
            return Err(Error::SizeMismatch {
                expected: nx * ny,
                found: data.len(),
            });
        }
        Ok(Self { nx, ny, data })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn data(&self) -> &'a [f32] {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[x + self.nx * y]
    }
}

/// Loads a volume from `path`.
///
/// For rawvol, `path` may name either the JSON header or the binary payload;
/// the other file is found by swapping the extension (`.json` / `.raw`).
pub fn load_volume(path: impl AsRef<Path>, format: VolumeFormat) -> Result<Volume> {
    match format {
        VolumeFormat::Nifti1 => load_nifti(path.as_ref()),
        VolumeFormat::Rawvol => rawvol::load(path.as_ref()),
    }
}

/// Saves a volume. Only rawvol is writable.
pub fn save_volume(volume: &Volume, path: impl AsRef<Path>, format: VolumeFormat) -> Result<()> {
    match format {
        VolumeFormat::Rawvol => rawvol::save(volume, path.as_ref()),
        VolumeFormat::Nifti1 => Err(Error::InvalidArgument(
            "NIfTI writing is not supported; use rawvol".into(),
        )),
    }
}
