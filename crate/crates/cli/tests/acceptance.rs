//! Acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so the PASS/FAIL lines always show.

mod common;

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use common::{brute_force_distances, closed_by_edge_count, component_oracle, p, phantom, run};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skinseg::{
    import_mesh, segment_slice, select_seed, Connectivity, GroundTruth, MeshFormat, Slice,
    TriangleMesh,
};
use skinseg_cli::args::{BenchArgs, CompareArgs};
use skinseg_cli::batch::RunReport;
use skinseg_cli::phantom::TruthFile;
use skinseg_cli::segment::SegmentReport;
use skinseg_cli::{cmd_bench, cmd_compare};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn segment(input: &Path, out: &Path, extra: &[&str]) -> Result<SegmentReport, String> {
    let mut args = vec!["segment", p(input), "-o", p(out)];
    args.extend_from_slice(extra);
    let code = run(&args);
    ensure!(code == 0, "segment {} exited {code}", input.display());
    let report = out.with_file_name(format!(
        "{}.report.json",
        out.file_stem().unwrap().to_string_lossy()
    ));
    let text = fs::read_to_string(&report).map_err(|e| e.to_string())?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn load_obj(path: &Path) -> TriangleMesh {
    import_mesh(path, MeshFormat::Obj).unwrap()
}

fn compare(a: &Path, b: &Path, crops: &[&str], out: &Path) -> skinseg_cli::compare::CompareOutcome {
    cmd_compare(&CompareArgs {
        mesh_a: a.into(),
        mesh_b: b.into(),
        crop: crops.iter().map(|c| c.parse().unwrap()).collect(),
        output: out.into(),
    })
    .unwrap()
}

fn flood_fill_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut compared = 0;
    let mut trials = 0;
    while compared < 1000 * 2 {
        trials += 1;
        let binary = trials % 2 == 0;
        let nx = rng.random_range(1..=64);
        let ny = rng.random_range(1..=64);
        let density = rng.random_range(0.05..0.75);
        let data: Vec<f32> = (0..nx * ny)
            .map(|_| match binary {
                true => f32::from(u8::from(rng.random_bool(density))),
                false => rng.random_range(0.0..1.0),
            })
            .collect();
        let iso = if binary { 0.5 } else { rng.random_range(0.02..0.7) };
        let slice = Slice::new(nx, ny, &data).unwrap();
        let Ok(seed) = select_seed(&slice, iso) else { continue };
        for conn in [Connectivity::Four, Connectivity::Eight] {
            let got = segment_slice(&slice, iso, seed, conn).unwrap();
            let want = component_oracle(nx, ny, &data, iso, seed, conn);
            ensure!(got.labels == want, "{nx}x{ny} slice (trial {trials}, {conn:?}) differs");
            compared += 1;
        }
    }
    Ok(format!("{} slices x 2 connectivities identical", compared / 2))
}

fn sphere_accuracy(dir: &Path) -> Check {
    let vol = phantom(dir, "sphere20", &["--size", "64", "--radius", "20"]);
    let truth: TruthFile = serde_json::from_str(&fs::read_to_string(dir.join("sphere20.truth.json")).unwrap()).unwrap();
    let GroundTruth::Sphere { center, radius } = truth.truth else {
        return Err("truth is not a sphere".into());
    };
    let report = segment(&vol, &dir.join("sphere20.obj"), &["--pad", "1"])?;
    ensure!(report.isovalue.isovalue == 0.1, "isovalue {}", report.isovalue.isovalue);
    let mesh = load_obj(&dir.join("sphere20.obj"));
    ensure!(!mesh.vertices.is_empty(), "empty mesh");
    let worst = mesh
        .vertices
        .iter()
        .map(|v| {
            let d = ((v[0] - center[0]).powi(2) + (v[1] - center[1]).powi(2) + (v[2] - center[2]).powi(2)).sqrt();
            (d - radius).abs()
        })
        .fold(0.0, f64::max);
    ensure!(worst <= 3f64.sqrt(), "max radial error {worst:.4} mm");
    Ok(format!("{} vertices, max radial error {worst:.4} mm <= {:.4}", mesh.vertex_count(), 3f64.sqrt()))
}

fn concentric_spheres(dir: &Path) -> Check {
    let mut meshes = Vec::new();
    for r in ["20", "25"] {
        let vol = phantom(dir, &format!("c{r}"), &["--size", "64", "--radius", r]);
        let out = dir.join(format!("c{r}.obj"));
        segment(&vol, &out, &[])?;
        meshes.push(out);
    }
    let big = compare(&meshes[0], &meshes[1], &[], &dir.join("c.json"));
    let h = big.report.symmetric_hausdorff_mm;
    let tol = 2.0 * 3f64.sqrt();
    ensure!((h - 5.0).abs() <= tol, "symmetric hausdorff {h}");

    // Bit-exact agreement with a linear scan on meshes under 5000 vertices.
    let mut small = Vec::new();
    for r in ["10", "12.5"] {
        let vol = phantom(dir, &format!("s{r}"), &["--size", "40", "--radius", r]);
        let out = dir.join(format!("s{r}.obj"));
        segment(&vol, &out, &[])?;
        small.push(out);
    }
    let cmp = compare(&small[0], &small[1], &[], &dir.join("s.json")).comparison;
    ensure!(
        cmp.a.vertex_count() <= 5000 && cmp.b.vertex_count() <= 5000,
        "meshes too large for the brute-force check"
    );
    let ab = brute_force_distances(&cmp.a.vertices, &cmp.b.vertices);
    let ba = brute_force_distances(&cmp.b.vertices, &cmp.a.vertices);
    let same = |x: &[f64], y: &[f64]| x.len() == y.len() && x.iter().zip(y).all(|(a, b)| a.to_bits() == b.to_bits());
    ensure!(same(&ab, &cmp.a_to_b.per_vertex), "a->b differs from brute force");
    ensure!(same(&ba, &cmp.b_to_a.per_vertex), "b->a differs from brute force");
    Ok(format!(
        "symmetric {h:.4} mm in [{:.4}, {:.4}]; {}+{} vertices bit-exact vs brute force",
        5.0 - tol,
        5.0 + tol,
        cmp.a.vertex_count(),
        cmp.b.vertex_count()
    ))
}

fn padding_watertight(dir: &Path) -> Check {
    let vol = phantom(
        dir,
        "border",
        &["--kind", "border-sphere", "--size", "48", "--center", "23.5,23.5,8", "--radius", "16"],
    );
    let bare = segment(&vol, &dir.join("border0.obj"), &["--pad", "0"])?;
    let padded = segment(&vol, &dir.join("border1.obj"), &["--pad", "1"])?;
    let m0 = load_obj(&dir.join("border0.obj"));
    let m1 = load_obj(&dir.join("border1.obj"));
    ensure!(!m0.is_empty(), "unpadded mesh is empty");
    ensure!(!bare.mesh_stats.watertight && !closed_by_edge_count(&m0), "unpadded mesh is closed");
    ensure!(padded.mesh_stats.watertight && closed_by_edge_count(&m1), "padded mesh has holes");
    Ok(format!(
        "pad 0: open ({} triangles); pad 1: closed ({} triangles)",
        m0.triangle_count(),
        m1.triangle_count()
    ))
}

fn linear_scaling(dir: &Path) -> Check {
    let report = cmd_bench(&BenchArgs {
        sizes: "32,64,128,192".into(),
        repeats: 3,
        output: dir.join("bench.csv"),
    })
    .map_err(|e| e.to_string())?;
    let csv = fs::read_to_string(dir.join("bench.csv")).unwrap();
    ensure!(csv.lines().count() == 5, "bench CSV has {} lines", csv.lines().count());
    let slope = report.slope.ok_or("no slope")?;
    let times: Vec<String> = report.rows.iter().map(|r| format!("{}^3 {:.4}s", r.size, r.seconds)).collect();
    ensure!((0.8..=1.25).contains(&slope), "slope {slope:.3} ({})", times.join(", "));
    Ok(format!("log-log slope {slope:.3} ({})", times.join(", ")))
}

fn subsampling_stability(dir: &Path) -> Check {
    let vol = dir.join("sphere20.json");
    if !vol.exists() {
        phantom(dir, "sphere20", &["--size", "64", "--radius", "20"]);
    }
    segment(&vol, &dir.join("full.obj"), &[])?;
    let coarse = segment(&vol, &dir.join("half.obj"), &["--subsample", "2,2,2"])?;
    ensure!(coarse.label_dims == [34, 34, 34], "coarse grid {:?}", coarse.label_dims);
    let cmp = compare(&dir.join("full.obj"), &dir.join("half.obj"), &[], &dir.join("sub.json"));
    let h = cmp.report.symmetric_hausdorff_mm;
    let limit = 4.0 * 3f64.sqrt();
    ensure!(h <= limit, "symmetric hausdorff {h}");
    Ok(format!("symmetric {h:.4} mm <= {limit:.4}"))
}

fn isovalue_defaults(dir: &Path) -> Check {
    let vol = phantom(dir, "iso", &["--size", "32", "--radius", "10", "--noise", "0.02", "--seed", "4"]);
    let fixed = segment(&vol, &dir.join("iso_fixed.obj"), &["--isovalue-strategy", "fixed"])?;
    let grad = segment(&vol, &dir.join("iso_grad.obj"), &["--isovalue-strategy", "gradient"])?;
    ensure!(fixed.isovalue.strategy == "fixed" && fixed.isovalue.isovalue == 0.1, "fixed: {:?}", fixed.isovalue);
    ensure!(!fixed.isovalue.gradient_preprocessed, "fixed used gradient field");
    ensure!(grad.isovalue.strategy == "gradient" && grad.isovalue.isovalue == 0.01, "gradient: {:?}", grad.isovalue);
    ensure!(grad.isovalue.gradient_preprocessed, "gradient did not use gradient field");
    Ok("fixed -> 0.1, gradient -> 0.01 in segment report".into())
}

fn batch_determinism(dir: &Path) -> Check {
    let mut subjects = Vec::new();
    for i in 0..4 {
        let r_a = format!("{}", 12 + i);
        let r_b = format!("{}", 14 + i);
        let seed = format!("{}", 100 + i);
        phantom(dir, &format!("s{i}_a"), &["--size", "48", "--radius", &r_a, "--noise", "0.05", "--seed", &seed]);
        phantom(dir, &format!("s{i}_b"), &["--size", "48", "--radius", &r_b, "--noise", "0.05", "--seed", &seed]);
        subjects.push(serde_json::json!({
            "subject_id": format!("subject{i}"),
            "volume_a": {"path": format!("s{i}_a.json"), "format": "rawvol"},
            "volume_b": {"path": format!("s{i}_b.raw")},
        }));
    }
    let manifest = dir.join("manifest.json");
    fs::write(&manifest, serde_json::to_string_pretty(&subjects).unwrap()).unwrap();

    let mut reports = Vec::new();
    for jobs in ["4", "1"] {
        let out = dir.join(format!("batch_j{jobs}"));
        let code = run(&["--jobs", jobs, "batch", p(&manifest), "-o", p(&out)]);
        ensure!(code == 0, "batch --jobs {jobs} exited {code}");
        let mut rep: RunReport =
            serde_json::from_str(&fs::read_to_string(out.join("run_report.json")).unwrap()).unwrap();
        for row in &mut rep.subjects {
            row.timings = Default::default();
        }
        reports.push((out, rep));
    }
    let (ref d4, ref r4) = reports[0];
    let (ref d1, ref r1) = reports[1];
    ensure!(r4 == r1, "report rows differ between --jobs 4 and --jobs 1");
    ensure!(r4.subjects.len() == 4, "{} rows", r4.subjects.len());
    let order: Vec<&str> = r4.subjects.iter().map(|r| r.subject_id.as_str()).collect();
    ensure!(order == ["subject0", "subject1", "subject2", "subject3"], "row order {order:?}");
    let mut files = 0;
    for i in 0..4 {
        for f in ["a.obj", "b.obj", "a_to_b.csv", "b_to_a.csv", "a_to_b.json", "b_to_a.json"] {
            let x = fs::read(d4.join(format!("subject{i}")).join(f)).unwrap();
            let y = fs::read(d1.join(format!("subject{i}")).join(f)).unwrap();
            ensure!(x == y, "subject{i}/{f} differs");
            files += 1;
        }
    }
    ensure!(
        fs::read(d4.join("run_report.csv")).unwrap() == fs::read(d1.join("run_report.csv")).unwrap(),
        "run_report.csv differs"
    );
    Ok(format!("4 subjects, {files} per-subject files byte-identical, rows equal"))
}

fn bed_persistence(dir: &Path) -> Check {
    let vol = phantom(
        dir,
        "bed",
        &[
            "--kind", "body-with-bed", "--size", "64",
            "--center", "31.5,26,31.5", "--radii", "20,14,26",
            "--min", "3.5,45.5,1.5", "--max", "59.5,49.5,61.5",
            "--noise", "0.05", "--seed", "9",
        ],
    );
    let truth: TruthFile = serde_json::from_str(&fs::read_to_string(dir.join("bed.truth.json")).unwrap()).unwrap();
    let skinseg::PhantomKind::BodyWithBed { bed_min, bed_max, .. } = truth.spec.kind else {
        return Err("spec is not body_with_bed".into());
    };
    let GroundTruth::Union { parts } = &truth.truth else {
        return Err("truth is not a union".into());
    };
    let body = parts
        .iter()
        .find(|g| matches!(g, GroundTruth::Ellipsoid { .. }))
        .ok_or("no ellipsoid part")?;

    let mesh_path = dir.join("bed.obj");
    segment(&vol, &mesh_path, &[])?;
    let mesh = load_obj(&mesh_path);
    let (lo, hi) = mesh.bounding_box().ok_or("empty mesh")?;
    ensure!(
        (0..3).all(|k| lo[k] <= bed_min[k] && hi[k] >= bed_max[k]),
        "bbox {lo:?}..{hi:?} misses slab {bed_min:?}..{bed_max:?}"
    );

    // The body ends near y = 40, the slab starts at 45.5.
    let cut = 43.0;
    let in_slab = |v: &[f64; 3]| v[1] > cut;
    let slab_before = mesh.vertices.iter().filter(|v| in_slab(v)).count();
    ensure!(slab_before > 0, "no slab vertices before cropping");
    let crop = format!("-1000,-1000,-1000,1000,{cut},1000");
    let cmp = compare(&mesh_path, &mesh_path, &[&crop], &dir.join("bed_cmp.json"));
    let kept = &cmp.comparison.a;
    ensure!(!kept.vertices.iter().any(in_slab), "slab vertices survive the crop");
    ensure!(
        kept.vertex_count() + slab_before == mesh.vertex_count(),
        "crop removed body vertices too"
    );
    let far = kept.vertices.iter().map(|v| body.distance(*v)).fold(0.0, f64::max);
    ensure!(far <= 3f64.sqrt(), "cropped vertex {far} mm from the body");
    Ok(format!(
        "slab inside mesh bbox; crop removed {slab_before} slab vertices, kept {} within {far:.3} mm of the body",
        kept.vertex_count()
    ))
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let criteria: Vec<(&str, Box<dyn Fn() -> Check>)> = vec![
        ("flood-fill oracle equivalence", Box::new(flood_fill_oracle)),
        ("sphere accuracy", Box::new(|| sphere_accuracy(d))),
        ("concentric-sphere hausdorff", Box::new(|| concentric_spheres(d))),
        ("padding makes the mesh watertight", Box::new(|| padding_watertight(d))),
        ("linear scaling", Box::new(|| linear_scaling(d))),
        ("subsampling stability", Box::new(|| subsampling_stability(d))),
        ("isovalue defaults", Box::new(|| isovalue_defaults(d))),
        ("batch determinism", Box::new(|| batch_determinism(d))),
        ("bed persistence and cropping", Box::new(|| bed_persistence(d))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(msg)
        });
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {} PASS {name} [{secs:.1}s]: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL {name} [{secs:.1}s]: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
