//! CSV and metadata writers.
//!
//! Numbers are written with Rust's shortest round-trip formatting in
//! exponent form, so parsing a file back yields the exact stored `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use super::{ScenarioOutput, TailRow};
use crate::observables::{FieldProfile, ObservableSeries};

pub const SERIES_HEADER: &str = "t,p1,p2,p3,norm2,energy";
pub const PROFILE_HEADER: &str = "x,e2";
pub const TAILS_HEADER: &str = "mode_count,t,tail_fraction,precausal_avg";
/// Appended to a series file when the run was stopped early.
pub const TRUNCATED_TRAILER: &str = "# truncated";

pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:e}")
    }
}

pub fn series_csv(series: &ObservableSeries, truncated: bool) -> String {
    let mut out = String::with_capacity(series.rows.len() * 96);
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for r in &series.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            format_float(r.t),
            format_float(r.p[0]),
            format_float(r.p[1]),
            format_float(r.p[2]),
            format_float(r.norm2),
            format_float(r.energy)
        );
    }
    if truncated {
        out.push_str(TRUNCATED_TRAILER);
        out.push('\n');
    }
    out
}

pub fn profile_csv(profile: &FieldProfile) -> String {
    let mut out = String::with_capacity(profile.grid.len() * 40);
    out.push_str(PROFILE_HEADER);
    out.push('\n');
    for (x, v) in profile.grid.iter().zip(&profile.values) {
        let _ = writeln!(out, "{},{}", format_float(*x), format_float(*v));
    }
    out
}

pub fn tails_csv(rows: &[TailRow]) -> String {
    let mut out = String::from(TAILS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.mode_count,
            format_float(r.t),
            format_float(r.tail_fraction),
            format_float(r.precausal_avg)
        );
    }
    out
}

/// Flat `key=value` record of everything that determines the run.
pub fn metadata_text(run: &ScenarioOutput) -> String {
    let c = &run.config;
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k}={v}");
    };
    kv("scenario", c.scenario.to_string());
    kv("code_version", env!("CARGO_PKG_VERSION").to_string());
    kv("scale", c.scale.to_string());
    kv("mode_policy", c.modes.to_string());
    kv("mode_count", c.modes.mode_count().to_string());
    kv("resonance_index", c.resonance_index.to_string());
    kv("omega_1", format_float(c.omega_1()));
    kv("detuning", c.detuning.to_string());
    for j in 0..3 {
        kv(&format!("gamma{}", j + 1), c.decay_rates[j].to_string());
        kv(&format!("x{}", j + 1), c.positions[j].to_string());
    }
    kv("t_end", c.t_end.to_string());
    kv("integrator", "abm4-pece".to_string());
    kv("bootstrap", "rk4".to_string());
    kv("corrector_iterations", c.corrector_iterations.to_string());
    kv("phase_per_step", c.phase_per_step.to_string());
    kv("resolution_cap", c.resolution_cap.to_string());
    kv("step_size", format_float(run.step_size));
    kv("steps", run.steps.to_string());
    kv("sample_stride", run.sample_stride.to_string());
    kv("grid_points", c.grid_points.to_string());
    kv("t_causal", c.t_causal.to_string());
    kv("complete", run.complete.to_string());
    let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    kv("timestamp", ts.to_string());
    out
}

fn profile_file_name(label: &str, t: f64) -> String {
    format!("{label}_profile_t{t:.4}.csv")
}

/// Writes series, profiles and metadata for each run plus one tails table
/// for the whole set. Returns the written paths.
pub fn write_outputs(dir: &Path, stem: &str, runs: &[ScenarioOutput]) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> std::io::Result<()> {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };
    for run in runs {
        let label = run.config.label();
        put(format!("{label}_series.csv"), series_csv(&run.series, !run.complete))?;
        for p in &run.profiles {
            // named after the closest scheduled time, not the step it landed on
            let nominal = run
                .config
                .profile_times
                .iter()
                .copied()
                .min_by(|a, b| (a - p.t).abs().total_cmp(&(b - p.t).abs()))
                .unwrap_or(p.t);
            put(profile_file_name(&label, nominal), profile_csv(p))?;
        }
        put(format!("{label}.meta"), metadata_text(run))?;
    }
    let rows: Vec<TailRow> = runs.iter().map(ScenarioOutput::tail_row).collect();
    put(format!("{stem}_tails.csv"), tails_csv(&rows))?;
    Ok(written)
}
