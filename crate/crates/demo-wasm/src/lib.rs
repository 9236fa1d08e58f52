//! Browser bindings for the cavity model. The page in `www/` calls the three
//! exported functions; each one runs a small scenario from scratch.
//!
//! The plain Rust functions ([`profile`], [`excitation`], [`tail_sweep`]) are
//! what the bindings wrap and what the native tests exercise.

use cavity_rwa::experiments::{run_scenario, ScenarioConfig, ScenarioId, ScenarioOutput};
use cavity_rwa::model::ModePolicy;
use wasm_bindgen::prelude::*;

/// Largest mode count the page accepts; beyond this a run takes too long to
/// feel interactive.
pub const MAX_MODES: u64 = 4001;

/// Mode-set choice shared by all three operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setup {
    pub symmetric: bool,
    pub resonance_index: u64,
    /// Symmetric sets round an even count up to the next odd one.
    pub mode_count: u64,
}

impl Setup {
    fn policy(&self) -> ModePolicy {
        if self.symmetric {
            ModePolicy::Symmetric { center_index: self.resonance_index, half_count: self.mode_count / 2 }
        } else {
            ModePolicy::Asymmetric { lowest_index: 1, count: self.mode_count }
        }
    }

    fn config(&self, t_end: f64, profile_t: Option<f64>) -> Result<ScenarioConfig, String> {
        if self.mode_count == 0 || self.mode_count > MAX_MODES {
            return Err(format!("mode count must be between 1 and {MAX_MODES}"));
        }
        Ok(ScenarioConfig {
            scenario: ScenarioId::Custom,
            resonance_index: self.resonance_index as f64,
            modes: self.policy(),
            t_end,
            profile_times: profile_t.into_iter().collect(),
            sample_rows: 400,
            ..ScenarioConfig::default()
        })
    }
}

fn run(cfg: &ScenarioConfig) -> Result<ScenarioOutput, String> {
    run_scenario(cfg, None).map_err(|e| e.to_string())
}

/// Field energy density on `grid_points` evenly spaced points of [0, 1] at
/// time `t`.
pub fn profile(setup: Setup, t: f64, grid_points: usize) -> Result<Vec<f64>, String> {
    let mut cfg = setup.config(t, Some(t))?;
    cfg.grid_points = grid_points;
    let out = run(&cfg)?;
    out.profiles.into_iter().next().map(|p| p.values).ok_or_else(|| "no profile recorded".to_string())
}

/// Atom excitation probabilities up to `t_end`, flattened as
/// `[t, p1, p2, p3, t, p1, ...]`.
pub fn excitation(setup: Setup, t_end: f64) -> Result<Vec<f64>, String> {
    let out = run(&setup.config(t_end, None)?)?;
    Ok(out.series.rows.iter().flat_map(|r| [r.t, r.p[0], r.p[1], r.p[2]]).collect())
}

/// Tail fraction at time `t` for each mode count, keeping the rest of `setup`.
pub fn tail_sweep(setup: Setup, counts: &[u64], t: f64) -> Result<Vec<f64>, String> {
    counts
        .iter()
        .map(|&mode_count| {
            let out = run(&Setup { mode_count, ..setup }.config(t, Some(t))?)?;
            Ok(out.tail_row().tail_fraction)
        })
        .collect()
}

fn js_err(msg: String) -> JsError {
    JsError::new(&msg)
}

#[wasm_bindgen(js_name = fieldProfile)]
pub fn field_profile_js(
    symmetric: bool,
    resonance_index: u32,
    mode_count: u32,
    t: f64,
    grid_points: u32,
) -> Result<Vec<f64>, JsError> {
    let setup = Setup { symmetric, resonance_index: resonance_index.into(), mode_count: mode_count.into() };
    profile(setup, t, grid_points as usize).map_err(js_err)
}

#[wasm_bindgen(js_name = excitationSeries)]
pub fn excitation_series_js(
    symmetric: bool,
    resonance_index: u32,
    mode_count: u32,
    t_end: f64,
) -> Result<Vec<f64>, JsError> {
    let setup = Setup { symmetric, resonance_index: resonance_index.into(), mode_count: mode_count.into() };
    excitation(setup, t_end).map_err(js_err)
}

#[wasm_bindgen(js_name = tailSweep)]
pub fn tail_sweep_js(
    symmetric: bool,
    resonance_index: u32,
    counts: Vec<u32>,
    t: f64,
) -> Result<Vec<f64>, JsError> {
    let setup = Setup { symmetric, resonance_index: resonance_index.into(), mode_count: 1 };
    let counts: Vec<u64> = counts.into_iter().map(u64::from).collect();
    tail_sweep(setup, &counts, t).map_err(js_err)
}
