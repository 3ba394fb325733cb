//! Graphics-based skin segmentation.
//!
//! Every axial slice is flood filled from a single background seed. Pixels
//! below the isovalue are background and keep the fill going; the first
//! pixels at or above it become the skin boundary and stop the fill there.
//! Whatever the fill never reaches stays interior.

use std::collections::VecDeque;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::{gradient_magnitude, normalize_intensities, pad_volume, subsample};
use crate::volume::{rawvol, Slice, Volume, VoxelCoord};

pub const DEFAULT_FIXED_ISOVALUE: f64 = 0.1;
pub const DEFAULT_GRADIENT_ISOVALUE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Label {
    Background = 0,
    Boundary = 1,
    Interior = 2,
}

impl Label {
    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(Label::Background),
            1 => Some(Label::Boundary),
            2 => Some(Label::Interior),
            _ => None,
        }
    }

    /// Boundary and interior both belong to the body.
    pub fn is_body(self) -> bool {
        self != Label::Background
    }
}

/// Per-voxel labels with the geometry of the volume they were computed on.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelGrid {
    dims: [usize; 3],
    spacing: [f64; 3],
    origin: [f64; 3],
    labels: Vec<Label>,
}

impl LabelGrid {
    pub fn new(
        dims: [usize; 3],
        spacing: [f64; 3],
        origin: [f64; 3],
        labels: Vec<Label>,
    ) -> Result<Self> {
        crate::volume::check_geometry(dims, spacing, origin)?;
        let expected = dims.iter().product();
        if labels.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                found: labels.len(),
            });
        }
        Ok(Self {
            dims,
            spacing,
            origin,
            labels,
        })
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

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> Label {
        self.labels[x + self.dims[0] * (y + self.dims[1] * z)]
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// World position (mm) of a voxel center.
    pub fn world(&self, x: usize, y: usize, z: usize) -> [f64; 3] {
        [
            self.origin[0] + x as f64 * self.spacing[0],
            self.origin[1] + y as f64 * self.spacing[1],
            self.origin[2] + z as f64 * self.spacing[2],
        ]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.labels.iter().map(|&l| l as u8).collect()
    }

    /// Writes the grid as a `u8` rawvol.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        rawvol::save_u8(
            self.dims,
            self.spacing,
            self.origin,
            &self.to_bytes(),
            path.as_ref(),
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let (header, bytes) = rawvol::read_raw(path.as_ref())?;
        if header.dtype != rawvol::RawDtype::U8 {
            return Err(Error::InvalidHeader(
                "label grids must use dtype \"u8\"".into(),
            ));
        }
        let labels = bytes
            .iter()
            .enumerate()
            .map(|(i, &b)| {
                Label::from_u8(b).ok_or_else(|| {
                    Error::parse(format!("sample {i}"), format!("invalid label value {b}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(header.dims, header.spacing, header.origin, labels)
    }
}

/// Labels of a single slice, x-fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSlice {
    pub nx: usize,
    pub ny: usize,
    pub labels: Vec<Label>,
}

impl LabelSlice {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Label {
        self.labels[x + self.nx * y]
    }
}

/// In-slice neighborhood used by the flood fill.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Connectivity {
    #[default]
    #[serde(rename = "4")]
    Four,
    #[serde(rename = "8")]
    Eight,
}

impl Connectivity {
    pub fn offsets(self) -> &'static [(isize, isize)] {
        const FOUR: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
        const EIGHT: [(isize, isize); 8] = [
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (-1, 1),
            (1, -1),
            (-1, -1),
        ];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }
}

impl TryFrom<u8> for Connectivity {
    type Error = Error;

    fn try_from(n: u8) -> Result<Self> {
        match n {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(Error::InvalidArgument(format!(
                "connectivity must be 4 or 8, got {other}"
            ))),
        }
    }
}

/// How the skin isovalue is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum IsovalueStrategy {
    /// Threshold on normalized intensities.
    Fixed(f64),
    /// Threshold on the normalized gradient magnitude.
    Gradient(f64),
}

impl Default for IsovalueStrategy {
    fn default() -> Self {
        IsovalueStrategy::Fixed(DEFAULT_FIXED_ISOVALUE)
    }
}

impl IsovalueStrategy {
    pub fn fixed() -> Self {
        IsovalueStrategy::Fixed(DEFAULT_FIXED_ISOVALUE)
    }

    pub fn gradient() -> Self {
        IsovalueStrategy::Gradient(DEFAULT_GRADIENT_ISOVALUE)
    }

    pub fn value(self) -> f64 {
        match self {
            IsovalueStrategy::Fixed(v) | IsovalueStrategy::Gradient(v) => v,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            IsovalueStrategy::Fixed(_) => "fixed",
            IsovalueStrategy::Gradient(_) => "gradient",
        }
    }

    fn validate(self) -> Result<()> {
        let v = self.value();
        if v > 0.0 && v < 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "{} isovalue must lie in (0, 1), got {v}",
                self.name()
            )))
        }
    }
}

/// Where each slice's flood fill starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedPolicy {
    /// First background corner in the order (0,0), (nx-1,0), (0,ny-1), (nx-1,ny-1).
    #[default]
    CornerScan,
    /// A fixed pixel, in voxel coordinates of the input volume. Its `x, y`
    /// is used on every slice; slices where it is not background fall back
    /// to the corner scan.
    Explicit(VoxelCoord),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationConfig {
    pub isovalue_strategy: IsovalueStrategy,
    pub connectivity: Connectivity,
    pub pad_width: usize,
    pub seed_policy: SeedPolicy,
    pub subsample_factor: [usize; 3],
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            isovalue_strategy: IsovalueStrategy::default(),
            connectivity: Connectivity::Four,
            pad_width: 1,
            seed_policy: SeedPolicy::CornerScan,
            subsample_factor: [1, 1, 1],
        }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> Result<()> {
        self.isovalue_strategy.validate()?;
        if self.subsample_factor.iter().any(|&f| f < 1) {
            return Err(Error::InvalidArgument(format!(
                "subsample factor must be >= 1, got {:?}",
                self.subsample_factor
            )));
        }
        Ok(())
    }
}

/// Which isovalue a run used and on what field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsovalueReport {
    pub strategy: String,
    pub isovalue: f64,
    pub gradient_preprocessed: bool,
}

/// Prepares the field the flood fill thresholds and reports the isovalue.
pub fn resolve_isovalue(
    volume: &Volume,
    strategy: IsovalueStrategy,
) -> Result<(Volume, IsovalueReport)> {
    strategy.validate()?;
    let (field, gradient) = match strategy {
        IsovalueStrategy::Fixed(_) => (normalize_intensities(volume)?, false),
        IsovalueStrategy::Gradient(_) => {
            (gradient_magnitude(&normalize_intensities(volume)?)?, true)
        }
    };
    Ok((
        field,
        IsovalueReport {
            strategy: strategy.name().to_string(),
            isovalue: strategy.value(),
            gradient_preprocessed: gradient,
        },
    ))
}

#[inline]
fn is_background(value: f32, isovalue: f64) -> bool {
    (value as f64) < isovalue
}

/// Returns the first corner whose intensity is below the isovalue.
pub fn select_seed(slice: &Slice<'_>, isovalue: f64) -> Result<(usize, usize)> {
    let (mx, my) = (slice.nx() - 1, slice.ny() - 1);
    [(0, 0), (mx, 0), (0, my), (mx, my)]
        .into_iter()
        .find(|&(x, y)| is_background(slice.get(x, y), isovalue))
        .ok_or(Error::NoBackgroundSeed)
}

/// Counters collected during a slice fill.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FillStats {
    /// Number of intensity comparisons made.
    pub evaluations: usize,
}

/// Flood fills one slice from `seed`.
pub fn segment_slice(
    slice: &Slice<'_>,
    isovalue: f64,
    seed: (usize, usize),
    connectivity: Connectivity,
) -> Result<LabelSlice> {
    segment_slice_with_stats(slice, isovalue, seed, connectivity).map(|(labels, _)| labels)
}

pub fn segment_slice_with_stats(
    slice: &Slice<'_>,
    isovalue: f64,
    seed: (usize, usize),
    connectivity: Connectivity,
) -> Result<(LabelSlice, FillStats)> {
    let (nx, ny) = (slice.nx(), slice.ny());
    let mut labels = vec![Label::Interior; nx * ny];
    let stats = fill_into(slice, isovalue, seed, connectivity, &mut labels)?;
    Ok((LabelSlice { nx, ny, labels }, stats))
}

/// Core frontier fill. `labels` must be pre-set to `Interior`.
fn fill_into(
    slice: &Slice<'_>,
    isovalue: f64,
    (sx, sy): (usize, usize),
    connectivity: Connectivity,
    labels: &mut [Label],
) -> Result<FillStats> {
    let (nx, ny) = (slice.nx(), slice.ny());
    if sx >= nx || sy >= ny {
        return Err(Error::OutOfRange(format!(
            "seed ({sx}, {sy}) outside {nx}x{ny} slice"
        )));
    }
    let data = slice.data();
    let seed = sx + nx * sy;
    let mut stats = FillStats { evaluations: 1 };
    if !is_background(data[seed], isovalue) {
        return Err(Error::SeedNotBackground {
            x: sx,
            y: sy,
            value: data[seed],
            isovalue,
        });
    }

    // A pixel is marked visited when it enters the queue, so it is
    // evaluated at most once.
    let mut visited = vec![false; nx * ny];
    let mut queue = VecDeque::new();
    labels[seed] = Label::Background;
    visited[seed] = true;

    let offsets = connectivity.offsets();
    let push_neighbors = |x: usize, y: usize, visited: &mut [bool], queue: &mut VecDeque<usize>| {
        for &(dx, dy) in offsets {
            let (Some(qx), Some(qy)) = (x.checked_add_signed(dx), y.checked_add_signed(dy)) else {
                continue;
            };
            if qx < nx && qy < ny {
                let q = qx + nx * qy;
                if !visited[q] {
                    visited[q] = true;
                    queue.push_back(q);
                }
            }
        }
    };
    push_neighbors(sx, sy, &mut visited, &mut queue);

    while let Some(p) = queue.pop_front() {
        stats.evaluations += 1;
        if is_background(data[p], isovalue) {
            labels[p] = Label::Background;
            push_neighbors(p % nx, p / nx, &mut visited, &mut queue);
        } else {
            labels[p] = Label::Boundary;
        }
    }
    Ok(stats)
}

/// A slice that could not be segmented normally.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceWarning {
    pub slice: usize,
    pub message: String,
}

/// Result of [`segment_volume`].
#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub grid: LabelGrid,
    pub isovalue: IsovalueReport,
    pub warnings: Vec<SliceWarning>,
}

/// Runs subsample, isovalue resolution, padding and the per-slice fill.
///
/// Slices without a background seed (only possible when `pad_width == 0`)
/// are labeled all interior and reported in `warnings`.
pub fn segment_volume(volume: &Volume, config: &SegmentationConfig) -> Result<Segmentation> {
    config.validate()?;
    let explicit = match config.seed_policy {
        SeedPolicy::Explicit(c) => {
            if !volume.contains(c) {
                return Err(Error::OutOfRange(format!(
                    "explicit seed {c:?} outside volume {:?}",
                    volume.dims()
                )));
            }
            let f = config.subsample_factor;
            Some((
                c.x / f[0] + config.pad_width,
                c.y / f[1] + config.pad_width,
            ))
        }
        SeedPolicy::CornerScan => None,
    };

    let reduced = subsample(volume, config.subsample_factor)?;
    let (field, report) = resolve_isovalue(&reduced, config.isovalue_strategy)?;
    let field = pad_volume(&field, config.pad_width, None)?;
    let isovalue = report.isovalue;
    let [nx, ny, _] = field.dims();

    let mut labels = vec![Label::Interior; field.len()];
    let warnings: Vec<SliceWarning> = labels
        .par_chunks_mut(nx * ny)
        .enumerate()
        .filter_map(|(z, out)| {
            let slice = field.slice_at(z).expect("z within volume");
            let seed = explicit
                .filter(|&(x, y)| is_background(slice.get(x, y), isovalue))
                .map(Ok)
                .unwrap_or_else(|| select_seed(&slice, isovalue));
            match seed {
                Ok(seed) => {
                    fill_into(&slice, isovalue, seed, config.connectivity, out)
                        .expect("seed is background and in range");
                    None
                }
                Err(e) => Some(SliceWarning {
                    slice: z,
                    message: e.to_string(),
                }),
            }
        })
        .collect();

    for w in &warnings {
        log::warn!("slice {}: {}; labeled interior", w.slice, w.message);
    }

    Ok(Segmentation {
        grid: LabelGrid::new(field.dims(), field.spacing(), field.origin(), labels)?,
        isovalue: report,
        warnings,
    })
}
