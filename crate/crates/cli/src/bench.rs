use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use skinseg::{generate, segment_volume, PhantomSpec, SegmentationConfig};

use crate::args::{parse_list, BenchArgs};
use crate::error::{CliError, CliResult};
use crate::write_json;

/// Each size is timed at least this long in total.
const MIN_TOTAL: Duration = Duration::from_millis(250);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub size: usize,
    pub voxels: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of ln(seconds) against ln(voxels).
    pub slope: Option<f64>,
}

pub fn log_log_slope(rows: &[BenchRow]) -> Option<f64> {
    if rows.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.voxels as f64).ln(), r.seconds.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Best-of-N wall time of `segment_volume` on one thread.
fn time_size(size: usize, repeats: usize) -> CliResult<f64> {
    let spec = PhantomSpec::centered_sphere(size, 1.0, 0.3 * size as f64);
    let volume = generate(&spec, 0)?.volume;
    let config = SegmentationConfig::default();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    pool.install(|| {
        let started = Instant::now();
        let mut best = f64::INFINITY;
        let mut runs = 0;
        while runs < repeats || started.elapsed() < MIN_TOTAL {
            let t = Instant::now();
            let seg = segment_volume(&volume, &config)?;
            best = best.min(t.elapsed().as_secs_f64());
            drop(seg);
            runs += 1;
        }
        Ok(best)
    })
}

pub fn cmd_bench(args: &BenchArgs) -> CliResult<BenchReport> {
    let sizes = parse_list::<usize>(&args.sizes, "--sizes")?;
    if sizes.is_empty() {
        return Err(CliError::Config("--sizes is empty".into()));
    }
    if sizes.iter().any(|&s| s < 2) || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config(format!(
            "--sizes must be strictly ascending and >= 2, got {sizes:?}"
        )));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &size in &sizes {
        let seconds = time_size(size, args.repeats.max(1))?;
        log::info!("bench {size}^3: {seconds:.6} s");
        rows.push(BenchRow {
            size,
            voxels: size * size * size,
            seconds,
        });
    }
    let report = BenchReport {
        slope: log_log_slope(&rows),
        rows,
    };

    let path = &args.output;
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::io(path, std::io::Error::other(e)))?;
    let io = |e: csv::Error| CliError::io(path, std::io::Error::other(e));
    w.write_record(["voxels", "seconds"]).map_err(io)?;
    for r in &report.rows {
        w.write_record([r.voxels.to_string(), r.seconds.to_string()])
            .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    write_json(&path.with_extension("json"), &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let rows: Vec<BenchRow> = [10usize, 20, 40]
            .iter()
            .map(|&n| BenchRow {
                size: n,
                voxels: n * n * n,
                seconds: 1e-9 * (n * n * n) as f64,
            })
            .collect();
        assert!((log_log_slope(&rows).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(log_log_slope(&rows[..1]), None);
    }
}
