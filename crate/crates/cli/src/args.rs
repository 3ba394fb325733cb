//! Command-line syntax.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use skinseg::{
    Connectivity, CropBox, IsovalueStrategy, SeedPolicy, SegmentationConfig, VolumeFormat,
    VoxelCoord,
};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "skinseg", version, about = "Skin surface extraction and comparison")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Do not print the summary JSON to stdout.
    #[arg(short, long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment a volume and write the skin mesh plus a JSON report.
    Segment(SegmentArgs),
    /// Compare two meshes with directed Hausdorff distances.
    Compare(CompareArgs),
    /// Segment and compare every subject in a manifest.
    Batch(BatchArgs),
    /// Write a synthetic phantom volume and its analytic surface.
    Phantom(PhantomArgs),
    /// Time the segmentation on sphere phantoms of increasing size.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Fixed,
    Gradient,
}

/// Segmentation flags shared by `segment` and `batch`.
#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    #[arg(long, value_enum, default_value = "fixed")]
    pub isovalue_strategy: StrategyArg,

    /// Override the strategy's default isovalue.
    #[arg(long)]
    pub isovalue: Option<f64>,

    #[arg(long, default_value = "4", value_parser = ["4", "8"])]
    pub connectivity: String,

    /// Padding voxels added on every face before the fill.
    #[arg(long, default_value_t = 1)]
    pub pad: usize,

    /// Decimation factors `fx,fy,fz`.
    #[arg(long, default_value = "1,1,1")]
    pub subsample: String,

    /// Fixed seed voxel `x,y,z` instead of the corner scan.
    #[arg(long)]
    pub seed_voxel: Option<String>,
}

impl Default for ConfigArgs {
    fn default() -> Self {
        Self {
            isovalue_strategy: StrategyArg::Fixed,
            isovalue: None,
            connectivity: "4".into(),
            pad: 1,
            subsample: "1,1,1".into(),
            seed_voxel: None,
        }
    }
}

impl ConfigArgs {
    pub fn to_config(&self) -> CliResult<SegmentationConfig> {
        let isovalue_strategy = match (self.isovalue_strategy, self.isovalue) {
            (StrategyArg::Fixed, None) => IsovalueStrategy::fixed(),
            (StrategyArg::Fixed, Some(v)) => IsovalueStrategy::Fixed(v),
            (StrategyArg::Gradient, None) => IsovalueStrategy::gradient(),
            (StrategyArg::Gradient, Some(v)) => IsovalueStrategy::Gradient(v),
        };
        let connectivity = match self.connectivity.as_str() {
            "8" => Connectivity::Eight,
            "4" => Connectivity::Four,
            other => return Err(CliError::Config(format!("connectivity must be 4 or 8, got {other}"))),
        };
        let f = parse_triple::<usize>(&self.subsample, "--subsample")?;
        let seed_policy = match &self.seed_voxel {
            None => SeedPolicy::CornerScan,
            Some(s) => {
                let [x, y, z] = parse_triple::<usize>(s, "--seed-voxel")?;
                SeedPolicy::Explicit(VoxelCoord::new(x, y, z))
            }
        };
        let config = SegmentationConfig {
            isovalue_strategy,
            connectivity,
            pad_width: self.pad,
            seed_policy,
            subsample_factor: f,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SegmentArgs {
    pub input: PathBuf,

    /// Input format; inferred from the extension when omitted.
    #[arg(long)]
    pub format: Option<VolumeFormat>,

    /// Output mesh (`.obj` or `.ply`).
    #[arg(short, long)]
    pub output: PathBuf,

    /// Also write the label grid as a u8 rawvol.
    #[arg(long)]
    pub labels: Option<PathBuf>,

    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    pub mesh_a: PathBuf,
    pub mesh_b: PathBuf,

    /// Keep only vertices inside `x0,y0,z0,x1,y1,z1` (mm). Given once it
    /// applies to both meshes; given twice the first crops A, the second B.
    #[arg(long, allow_hyphen_values = true)]
    pub crop: Vec<CropBox>,

    /// Report JSON; per-vertex CSVs are written beside it.
    #[arg(short, long)]
    pub output: PathBuf,
}

impl CompareArgs {
    pub fn crops(&self) -> CliResult<(Option<CropBox>, Option<CropBox>)> {
        match self.crop.as_slice() {
            [] => Ok((None, None)),
            [c] => Ok((Some(*c), Some(*c))),
            [a, b] => Ok((Some(*a), Some(*b))),
            more => Err(CliError::Config(format!(
                "--crop given {} times; at most 2 allowed",
                more.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct BatchArgs {
    pub manifest: PathBuf,

    #[arg(short, long)]
    pub output_dir: PathBuf,

    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PhantomKindArg {
    Sphere,
    Box,
    BodyWithBed,
    BorderSphere,
}

#[derive(Debug, Clone, Args)]
pub struct PhantomArgs {
    /// Full phantom description as JSON; overrides the shape flags.
    #[arg(long)]
    pub spec: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "sphere")]
    pub kind: PhantomKindArg,

    /// Cubic volume edge in voxels.
    #[arg(long, default_value_t = 64)]
    pub size: usize,

    /// Non-cubic dims `nx,ny,nz`; overrides `--size`.
    #[arg(long)]
    pub dims: Option<String>,

    /// Voxel spacing in mm, one value or `sx,sy,sz`.
    #[arg(long, default_value = "1")]
    pub spacing: String,

    /// Center `x,y,z` in mm (default: volume center).
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<String>,

    #[arg(long, default_value_t = 20.0)]
    pub radius: f64,

    /// Box corners or bed slab corners, `x,y,z` in mm.
    #[arg(long, allow_hyphen_values = true)]
    pub min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub max: Option<String>,

    /// Body ellipsoid radii `rx,ry,rz` in mm.
    #[arg(long)]
    pub radii: Option<String>,

    #[arg(long, default_value_t = 1.0)]
    pub body_intensity: f32,

    #[arg(long, default_value_t = 0.0)]
    pub background_intensity: f32,

    /// Half-width of uniform additive noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f32,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output rawvol (`name.json` or `name.raw`).
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Ascending cube edges.
    #[arg(long, default_value = "32,64,128")]
    pub sizes: String,

    /// Minimum timed runs per size.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,

    /// CSV of `voxels,seconds`; the slope goes to the same path as `.json`.
    #[arg(short, long)]
    pub output: PathBuf,
}

pub fn parse_list<T: std::str::FromStr>(s: &str, flag: &str) -> CliResult<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<T>()
                .map_err(|e| CliError::Config(format!("{flag} '{s}': {e}")))
        })
        .collect()
}

pub fn parse_triple<T: std::str::FromStr + Copy>(s: &str, flag: &str) -> CliResult<[T; 3]>
where
    T::Err: std::fmt::Display,
{
    let v = parse_list::<T>(s, flag)?;
    match v.as_slice() {
        [a, b, c] => Ok([*a, *b, *c]),
        _ => Err(CliError::Config(format!("{flag} '{s}' needs 3 values"))),
    }
}

/// Volume format from an explicit flag or the file extension.
pub fn resolve_format(path: &Path, explicit: Option<VolumeFormat>) -> CliResult<VolumeFormat> {
    if let Some(f) = explicit {
        return Ok(f);
    }
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    if name.ends_with(".nii") || name.ends_with(".nii.gz") {
        Ok(VolumeFormat::Nifti1)
    } else if name.ends_with(".json") || name.ends_with(".raw") {
        Ok(VolumeFormat::Rawvol)
    } else {
        Err(CliError::Config(format!(
            "cannot infer volume format of {}; pass --format",
            path.display()
        )))
    }
}
