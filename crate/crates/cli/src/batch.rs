use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use skinseg::{
    export_mesh, load_volume, CropBox, DistanceSummary, IsovalueReport, MeshFormat,
    SegmentationConfig, VolumeFormat,
};

use crate::args::{resolve_format, BatchArgs};
use crate::compare::compare_meshes;
use crate::error::{CliError, CliResult};
use crate::segment::{segment_to_mesh, MeshStats};
use crate::write_json;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeRef {
    pub path: PathBuf,
    #[serde(default)]
    pub format: Option<VolumeFormat>,
}

/// A crop box as `{"min": [..], "max": [..]}` or `[x0, y0, z0, x1, y1, z1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CropSpec {
    Flat([f64; 6]),
    Box(CropBox),
}

impl CropSpec {
    pub fn to_box(self) -> CliResult<CropBox> {
        let b = match self {
            CropSpec::Flat(v) => CropBox::from(v),
            CropSpec::Box(b) => b,
        };
        Ok(CropBox::new(b.min, b.max)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub subject_id: String,
    pub volume_a: VolumeRef,
    pub volume_b: VolumeRef,
    #[serde(default)]
    pub crop_a: Option<CropSpec>,
    #[serde(default)]
    pub crop_b: Option<CropSpec>,
}

/// Reads a manifest; relative volume paths resolve against its directory.
pub fn load_manifest(path: &Path) -> CliResult<Vec<SubjectRecord>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read manifest {}: {e}", path.display())))?;
    let mut records: Vec<SubjectRecord> = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid manifest {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut seen = HashSet::new();
    for r in &mut records {
        let id = r.subject_id.as_str();
        if id.is_empty() || id == "." || id == ".." || id.contains(['/', '\\']) {
            return Err(CliError::Config(format!("subject_id '{id}' is not a valid directory name")));
        }
        if !seen.insert(r.subject_id.clone()) {
            return Err(CliError::Config(format!("duplicate subject_id '{id}'")));
        }
        for c in [r.crop_a, r.crop_b].into_iter().flatten() {
            c.to_box()
                .map_err(|e| CliError::Config(format!("subject '{id}': {e}")))?;
        }
        for v in [&mut r.volume_a, &mut r.volume_b] {
            if v.path.is_relative() {
                v.path = base.join(&v.path);
            }
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubjectStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideSummary {
    pub isovalue: IsovalueReport,
    pub mesh: MeshStats,
    pub slice_warnings: usize,
}

/// Wall-clock seconds per stage, both volumes together.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub load_s: f64,
    pub segment_s: f64,
    pub compare_s: f64,
    pub write_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectRow {
    pub subject_id: String,
    pub status: SubjectStatus,
    pub error: Option<String>,
    pub a: Option<SideSummary>,
    pub b: Option<SideSummary>,
    pub a_to_b: Option<DistanceSummary>,
    pub b_to_a: Option<DistanceSummary>,
    pub symmetric_hausdorff_mm: Option<f64>,
    pub timings: Timings,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanMax {
    pub mean: f64,
    pub max: f64,
}

impl MeanMax {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        Some(Self {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

/// Over successful subjects: `hausdorff_mm` aggregates the symmetric
/// Hausdorff distance, `mean_distance_mm` the mean of the a->b distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub subjects: usize,
    pub succeeded: usize,
    pub failed: usize,
    pub hausdorff_mm: Option<MeanMax>,
    pub mean_distance_mm: Option<MeanMax>,
}

impl Aggregate {
    pub fn from_rows(rows: &[SubjectRow]) -> Self {
        let ok: Vec<&SubjectRow> = rows.iter().filter(|r| r.status == SubjectStatus::Ok).collect();
        let h: Vec<f64> = ok.iter().filter_map(|r| r.symmetric_hausdorff_mm).collect();
        let m: Vec<f64> = ok.iter().filter_map(|r| r.a_to_b.as_ref().map(|s| s.mean_mm)).collect();
        Self {
            subjects: rows.len(),
            succeeded: ok.len(),
            failed: rows.len() - ok.len(),
            hausdorff_mm: MeanMax::of(&h),
            mean_distance_mm: MeanMax::of(&m),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: SegmentationConfig,
    pub subjects: Vec<SubjectRow>,
    pub aggregate: Aggregate,
}

struct Done {
    a: SideSummary,
    b: SideSummary,
    a_to_b: DistanceSummary,
    b_to_a: DistanceSummary,
    symmetric: f64,
}

fn run_subject(
    rec: &SubjectRecord,
    config: &SegmentationConfig,
    out_dir: &Path,
    t: &mut Timings,
) -> CliResult<Done> {
    let clock = Instant::now();
    let fa = resolve_format(&rec.volume_a.path, rec.volume_a.format)?;
    let fb = resolve_format(&rec.volume_b.path, rec.volume_b.format)?;
    let va = load_volume(&rec.volume_a.path, fa)?;
    let vb = load_volume(&rec.volume_b.path, fb)?;
    t.load_s = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let (sa, ma) = segment_to_mesh(&va, config)?;
    let (sb, mb) = segment_to_mesh(&vb, config)?;
    t.segment_s = clock.elapsed().as_secs_f64();
    let side = |s: &skinseg::Segmentation, m| SideSummary {
        isovalue: s.isovalue.clone(),
        mesh: MeshStats::of(m),
        slice_warnings: s.warnings.len(),
    };
    let (a, b) = (side(&sa, &ma), side(&sb, &mb));

    let dir = out_dir.join(&rec.subject_id);
    let clock = Instant::now();
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    export_mesh(&ma, dir.join("a.obj"), MeshFormat::Obj)?;
    export_mesh(&mb, dir.join("b.obj"), MeshFormat::Obj)?;
    t.write_s = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let crop_a = rec.crop_a.map(CropSpec::to_box).transpose()?;
    let crop_b = rec.crop_b.map(CropSpec::to_box).transpose()?;
    let cmp = compare_meshes(ma, mb, crop_a, crop_b, ("a", "b"))?;
    t.compare_s = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    cmp.export(&dir, "")?;
    t.write_s += clock.elapsed().as_secs_f64();

    Ok(Done {
        a,
        b,
        a_to_b: cmp.a_to_b.summary(),
        b_to_a: cmp.b_to_a.summary(),
        symmetric: cmp.symmetric(),
    })
}

fn subject_row(rec: &SubjectRecord, config: &SegmentationConfig, out_dir: &Path) -> SubjectRow {
    let mut timings = Timings::default();
    let result = run_subject(rec, config, out_dir, &mut timings);
    match result {
        Ok(d) => SubjectRow {
            subject_id: rec.subject_id.clone(),
            status: SubjectStatus::Ok,
            error: None,
            a: Some(d.a),
            b: Some(d.b),
            a_to_b: Some(d.a_to_b),
            b_to_a: Some(d.b_to_a),
            symmetric_hausdorff_mm: Some(d.symmetric),
            timings,
        },
        Err(e) => {
            log::error!("subject {}: {e}", rec.subject_id);
            SubjectRow {
                subject_id: rec.subject_id.clone(),
                status: SubjectStatus::Failed,
                error: Some(e.to_string()),
                a: None,
                b: None,
                a_to_b: None,
                b_to_a: None,
                symmetric_hausdorff_mm: None,
                timings,
            }
        }
    }
}

fn write_csv(path: &Path, rows: &[SubjectRow]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::io(path, std::io::Error::other(e)))?;
    let io = |e: csv::Error| CliError::io(path, std::io::Error::other(e));
    w.write_record([
        "subject_id",
        "status",
        "vertices_a",
        "vertices_b",
        "hausdorff_a_to_b_mm",
        "hausdorff_b_to_a_mm",
        "symmetric_hausdorff_mm",
        "mean_a_to_b_mm",
        "mean_b_to_a_mm",
        "error",
    ])
    .map_err(io)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        let status = match r.status {
            SubjectStatus::Ok => "ok",
            SubjectStatus::Failed => "failed",
        };
        w.write_record([
            r.subject_id.clone(),
            status.to_string(),
            r.a.as_ref().map(|s| s.mesh.vertices.to_string()).unwrap_or_default(),
            r.b.as_ref().map(|s| s.mesh.vertices.to_string()).unwrap_or_default(),
            opt(r.a_to_b.as_ref().map(|s| s.hausdorff_mm)),
            opt(r.b_to_a.as_ref().map(|s| s.hausdorff_mm)),
            opt(r.symmetric_hausdorff_mm),
            opt(r.a_to_b.as_ref().map(|s| s.mean_mm)),
            opt(r.b_to_a.as_ref().map(|s| s.mean_mm)),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Runs every subject on the current rayon pool. Rows keep manifest order.
pub fn cmd_batch(args: &BatchArgs) -> CliResult<RunReport> {
    let config = args.config.to_config()?;
    let records = load_manifest(&args.manifest)?;
    fs::create_dir_all(&args.output_dir).map_err(|e| CliError::io(&args.output_dir, e))?;

    let rows: Vec<SubjectRow> = records
        .par_iter()
        .map(|rec| subject_row(rec, &config, &args.output_dir))
        .collect();

    let report = RunReport {
        config,
        aggregate: Aggregate::from_rows(&rows),
        subjects: rows,
    };
    write_json(&args.output_dir.join("run_report.json"), &report)?;
    write_csv(&args.output_dir.join("run_report.csv"), &report.subjects)?;

    if report.aggregate.failed > 0 {
        return Err(CliError::BatchFailures {
            failed: report.aggregate.failed,
            total: report.aggregate.subjects,
        });
    }
    Ok(report)
}
