use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use skinseg::{
    directed_hausdorff, export_per_vertex_scalars, import_mesh, CropBox, DistanceReport,
    DistanceSummary, MeshFormat, TriangleMesh,
};

use crate::args::CompareArgs;
use crate::error::{CliError, CliResult};
use crate::write_json;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub mesh_a: String,
    pub mesh_b: String,
    pub crop_a: Option<CropBox>,
    pub crop_b: Option<CropBox>,
    /// Vertices left after cropping.
    pub vertices_a: usize,
    pub vertices_b: usize,
    pub a_to_b: DistanceSummary,
    pub b_to_a: DistanceSummary,
    pub symmetric_hausdorff_mm: f64,
}

/// Both directed reports between two (optionally cropped) meshes.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub a: TriangleMesh,
    pub b: TriangleMesh,
    pub a_to_b: DistanceReport,
    pub b_to_a: DistanceReport,
}

impl Comparison {
    pub fn symmetric(&self) -> f64 {
        self.a_to_b.hausdorff.max(self.b_to_a.hausdorff)
    }

    /// Writes `<dir>/<prefix>a_to_b.csv` and `b_to_a.csv` with their JSON summaries.
    pub fn export(&self, dir: &Path, prefix: &str) -> CliResult<()> {
        export_per_vertex_scalars(&self.a_to_b, dir.join(format!("{prefix}a_to_b.csv")))?;
        export_per_vertex_scalars(&self.b_to_a, dir.join(format!("{prefix}b_to_a.csv")))?;
        Ok(())
    }
}

fn apply_crop(mesh: TriangleMesh, crop: Option<CropBox>, name: &str) -> CliResult<TriangleMesh> {
    let Some(c) = crop else { return Ok(mesh) };
    let before = mesh.vertex_count();
    let cropped = mesh.crop(&c);
    log::info!("crop {name}: {before} -> {} vertices", cropped.vertex_count());
    if cropped.vertices.is_empty() {
        return Err(CliError::EmptyAfterCrop(name.to_string()));
    }
    Ok(cropped)
}

pub fn compare_meshes(
    a: TriangleMesh,
    b: TriangleMesh,
    crop_a: Option<CropBox>,
    crop_b: Option<CropBox>,
    names: (&str, &str),
) -> CliResult<Comparison> {
    let a = apply_crop(a, crop_a, names.0)?;
    let b = apply_crop(b, crop_b, names.1)?;
    let a_to_b = directed_hausdorff(&a, &b)?.with_direction(names.0, names.1);
    let b_to_a = directed_hausdorff(&b, &a)?.with_direction(names.1, names.0);
    Ok(Comparison { a, b, a_to_b, b_to_a })
}

#[derive(Debug, Clone)]
pub struct CompareOutcome {
    pub report: CompareReport,
    pub comparison: Comparison,
    pub csv_paths: [PathBuf; 2],
}

pub fn cmd_compare(args: &CompareArgs) -> CliResult<CompareOutcome> {
    let (crop_a, crop_b) = args.crops()?;
    let load = |p: &Path| -> CliResult<TriangleMesh> {
        let fmt = MeshFormat::from_path(p).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(import_mesh(p, fmt)?)
    };
    let a = load(&args.mesh_a)?;
    let b = load(&args.mesh_b)?;
    let cmp = compare_meshes(a, b, crop_a, crop_b, ("a", "b"))?;

    let stem = args
        .output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "compare".into());
    let dir = args.output.parent().unwrap_or(Path::new("")).to_path_buf();
    cmp.export(&dir, &format!("{stem}."))?;

    let report = CompareReport {
        mesh_a: args.mesh_a.display().to_string(),
        mesh_b: args.mesh_b.display().to_string(),
        crop_a,
        crop_b,
        vertices_a: cmp.a.vertex_count(),
        vertices_b: cmp.b.vertex_count(),
        a_to_b: cmp.a_to_b.summary(),
        b_to_a: cmp.b_to_a.summary(),
        symmetric_hausdorff_mm: cmp.symmetric(),
    };
    write_json(&args.output, &report)?;
    Ok(CompareOutcome {
        report,
        comparison: cmp,
        csv_paths: [
            dir.join(format!("{stem}.a_to_b.csv")),
            dir.join(format!("{stem}.b_to_a.csv")),
        ],
    })
}
