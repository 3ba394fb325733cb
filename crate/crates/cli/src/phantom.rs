use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use skinseg::{generate, save_volume, GroundTruth, PhantomKind, PhantomSpec, VolumeFormat};

use crate::args::{parse_list, parse_triple, PhantomArgs, PhantomKindArg};
use crate::error::{CliError, CliResult};
use crate::write_json;

/// Contents of `<stem>.truth.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthFile {
    pub spec: PhantomSpec,
    pub seed: u64,
    pub truth: GroundTruth,
}

fn spacing_of(s: &str) -> CliResult<[f64; 3]> {
    let v = parse_list::<f64>(s, "--spacing")?;
    match v.as_slice() {
        [h] => Ok([*h; 3]),
        [a, b, c] => Ok([*a, *b, *c]),
        _ => Err(CliError::Config(format!("--spacing '{s}' needs 1 or 3 values"))),
    }
}

/// Builds the spec from flags. Unset geometry scales with the volume.
pub fn spec_from_args(args: &PhantomArgs) -> CliResult<PhantomSpec> {
    if let Some(path) = &args.spec {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read spec {}: {e}", path.display())))?;
        return serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid spec {}: {e}", path.display())));
    }
    let dims = match &args.dims {
        Some(d) => parse_triple::<usize>(d, "--dims")?,
        None => [args.size; 3],
    };
    let spacing = spacing_of(&args.spacing)?;
    let ext: [f64; 3] =
        std::array::from_fn(|k| dims[k].saturating_sub(1) as f64 * spacing[k]);
    let triple = |v: &Option<String>, flag: &str, default: [f64; 3]| -> CliResult<[f64; 3]> {
        match v {
            Some(s) => parse_triple::<f64>(s, flag),
            None => Ok(default),
        }
    };
    let frac = |f: [f64; 3]| -> [f64; 3] { std::array::from_fn(|k| f[k] * ext[k]) };
    let center = triple(&args.center, "--center", frac([0.5; 3]))?;

    let kind = match args.kind {
        PhantomKindArg::Sphere => PhantomKind::Sphere {
            center,
            radius: args.radius,
        },
        PhantomKindArg::BorderSphere => PhantomKind::BorderTouchingSphere {
            center,
            radius: args.radius,
        },
        PhantomKindArg::Box => PhantomKind::Box {
            min: triple(&args.min, "--min", frac([0.25; 3]))?,
            max: triple(&args.max, "--max", frac([0.75; 3]))?,
        },
        // A lying body with a thin slab under it along +y.
        PhantomKindArg::BodyWithBed => PhantomKind::BodyWithBed {
            body_center: triple(&args.center, "--center", frac([0.5, 0.41, 0.5]))?,
            body_radii: triple(&args.radii, "--radii", frac([0.32, 0.22, 0.41]))?,
            bed_min: triple(&args.min, "--min", frac([0.06, 0.73, 0.03]))?,
            bed_max: triple(&args.max, "--max", frac([0.94, 0.79, 0.97]))?,
        },
    };
    Ok(PhantomSpec {
        kind,
        dims,
        spacing,
        body_intensity: args.body_intensity,
        background_intensity: args.background_intensity,
        noise_amplitude: args.noise,
    })
}

pub fn truth_path_for(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "phantom".into());
    output.with_file_name(format!("{stem}.truth.json"))
}

pub fn cmd_phantom(args: &PhantomArgs) -> CliResult<TruthFile> {
    let spec = spec_from_args(args)?;
    let phantom = generate(&spec, args.seed)?;
    save_volume(&phantom.volume, &args.output, VolumeFormat::Rawvol)?;
    let truth = TruthFile {
        spec,
        seed: args.seed,
        truth: phantom.truth,
    };
    write_json(&truth_path_for(&args.output), &truth)?;
    Ok(truth)
}
