use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use vlmc::{Point, TargetProblem};

use crate::bench::{estimate_once, sampler_config};
use crate::config::{ExperimentConfig, MethodSpec};
use crate::error::CliResult;

/// Equal-width histogram over the sample range. Returns
/// `(left, right, count)` rows; the last bin is closed on the right.
pub fn histogram(values: &[f64], bins: usize) -> Vec<(f64, f64, u64)> {
    if values.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    };
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &v in values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| (lo + k as f64 * width, lo + (k + 1) as f64 * width, c))
        .collect()
}

pub fn histogram_csv(rows: &[(f64, f64, u64)]) -> String {
    let mut out = String::from("bin_left,bin_right,count\n");
    for (l, r, c) in rows {
        let _ = writeln!(out, "{l},{r},{c}");
    }
    out
}

fn slug(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect::<String>()
        .trim_matches('_')
        .to_string()
}

/// Max-normalized prior and likelihood along the first coordinate, other
/// coordinates held at zero.
pub fn overlay_curves(problem: &dyn TargetProblem, x_max: f64, points: usize) -> String {
    let mut rows = Vec::with_capacity(points);
    for i in 0..points {
        let x = x_max * i as f64 / (points - 1) as f64;
        let mut c = vec![0.0; problem.dim()];
        c[0] = x;
        let p = Point::new(c);
        rows.push((x, problem.log_prior_density(&p), problem.log_likelihood(&p)));
    }
    let pm = rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let lm = rows.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
    let mut out = String::from("x,prior,likelihood\n");
    for (x, lp, ll) in rows {
        let _ = writeln!(out, "{x},{},{}", (lp - pm).exp(), (ll - lm).exp());
    }
    out
}

/// Write `hist_x_*.csv` (first coordinate of the retained draws of one
/// run), `hist_logz_*.csv` (`ln Ẑ` across repetitions), `trace_*.csv` and
/// `curves.csv`. Returns the paths written.
pub fn export_ordinate_histograms(
    config: &ExperimentConfig,
    out_dir: &Path,
) -> CliResult<Vec<PathBuf>> {
    let (problem, methods) = config.prepare()?;
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut x_max: f64 = 0.0;
    for (idx, method) in methods.iter().enumerate() {
        let name = format!("{idx}_{}", slug(&method.label));
        let sampler = sampler_config(config, 0).with_trace();

        if matches!(
            method.spec,
            MethodSpec::Harmonic | MethodSpec::WeightedSlice { .. }
        ) {
            let path = out_dir.join(format!("hist_x_{name}.csv"));
            let xs: Vec<f64> = if config.samples == 0 {
                Vec::new()
            } else {
                let (_, trace) = estimate_once(problem.as_ref(), method, &sampler)?;
                std::fs::write(out_dir.join(format!("trace_{name}.csv")), trace.to_csv())?;
                trace.retained_coords().to_vec()
            };
            if xs.is_empty() {
                log::warn!("{}: empty trace, writing header only", method.label);
            }
            x_max = xs.iter().cloned().fold(x_max, f64::max);
            std::fs::write(&path, histogram_csv(&histogram(&xs, config.bins)))?;
            written.push(path);
        }

        let path = out_dir.join(format!("hist_logz_{name}.csv"));
        if config.samples == 0 {
            log::warn!("{}: no retained samples, writing header only", method.label);
            std::fs::write(&path, histogram_csv(&[]))?;
            written.push(path);
            continue;
        }
        let log_z: Vec<f64> = (0..config.repetitions)
            .into_par_iter()
            .map(|rep| {
                estimate_once(problem.as_ref(), method, &sampler_config(config, rep))
                    .map(|(e, _)| e.log_z)
            })
            .collect::<CliResult<_>>()?;
        std::fs::write(&path, histogram_csv(&histogram(&log_z, config.bins)))?;
        written.push(path);
    }
    if x_max > 0.0 {
        let path = out_dir.join("curves.csv");
        std::fs::write(&path, overlay_curves(problem.as_ref(), x_max, 500))?;
        written.push(path);
    }
    Ok(written)
}
