use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use skinseg::segmentation::SliceWarning;
use skinseg::{
    export_mesh, extract_surface, load_volume, segment_volume, IsovalueReport, MeshFormat,
    Segmentation, SegmentationConfig, TriangleMesh, Volume,
};

use crate::args::{resolve_format, SegmentArgs};
use crate::error::{CliError, CliResult};
use crate::write_json;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshStats {
    pub vertices: usize,
    pub triangles: usize,
    pub watertight: bool,
}

impl MeshStats {
    pub fn of(mesh: &TriangleMesh) -> Self {
        Self {
            vertices: mesh.vertex_count(),
            triangles: mesh.triangle_count(),
            watertight: mesh.is_watertight(),
        }
    }
}

/// Written beside the mesh as `<stem>.report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    pub input: String,
    pub mesh: String,
    pub isovalue: IsovalueReport,
    pub config: SegmentationConfig,
    pub label_dims: [usize; 3],
    pub mesh_stats: MeshStats,
    pub warnings: Vec<SliceWarning>,
}

#[derive(Debug, Clone)]
pub struct SegmentOutcome {
    pub report: SegmentReport,
    pub report_path: PathBuf,
    pub mesh: TriangleMesh,
}

/// Segmentation followed by surface extraction.
pub fn segment_to_mesh(
    volume: &Volume,
    config: &SegmentationConfig,
) -> CliResult<(Segmentation, TriangleMesh)> {
    let seg = segment_volume(volume, config)?;
    for w in &seg.warnings {
        log::warn!("slice {}: {}", w.slice, w.message);
    }
    let mesh = extract_surface(&seg.grid)?;
    Ok((seg, mesh))
}

pub fn report_path_for(mesh_path: &Path) -> PathBuf {
    let stem = mesh_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "mesh".into());
    mesh_path.with_file_name(format!("{stem}.report.json"))
}

pub fn cmd_segment(args: &SegmentArgs) -> CliResult<SegmentOutcome> {
    let config = args.config.to_config()?;
    let format = resolve_format(&args.input, args.format)?;
    let mesh_format = MeshFormat::from_path(&args.output).map_err(|e| CliError::Config(e.to_string()))?;

    let volume = load_volume(&args.input, format)?;
    log::info!("loaded {} with dims {:?}", args.input.display(), volume.dims());
    let (seg, mesh) = segment_to_mesh(&volume, &config)?;
    log::info!(
        "isovalue {} ({}), {} vertices, {} triangles",
        seg.isovalue.isovalue,
        seg.isovalue.strategy,
        mesh.vertex_count(),
        mesh.triangle_count()
    );

    if let Some(labels) = &args.labels {
        seg.grid.save(labels)?;
    }
    export_mesh(&mesh, &args.output, mesh_format)?;

    let report = SegmentReport {
        input: args.input.display().to_string(),
        mesh: args.output.display().to_string(),
        isovalue: seg.isovalue,
        config,
        label_dims: seg.grid.dims(),
        mesh_stats: MeshStats::of(&mesh),
        warnings: seg.warnings,
    };
    let report_path = report_path_for(&args.output);
    write_json(&report_path, &report)?;
    Ok(SegmentOutcome {
        report,
        report_path,
        mesh,
    })
}
