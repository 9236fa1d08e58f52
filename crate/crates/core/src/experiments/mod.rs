//! Figure scenarios, sweeps over the number of modes, and their CSV outputs.
//!
//! A scenario is one integration: build the atoms and the mode set, evolve
//! the single-excitation state, and record the excitation probabilities,
//! field profiles at scheduled times and the light-cone metrics. Figure
//! presets reproduce the published setup at a reduced `scale`, which shrinks
//! the mode counts and the resonance index together while leaving the atomic
//! parameters, positions and time windows unchanged.

mod config;
mod output;

pub use config::{ConfigError, ConfigMap, KeySpec, CONFIG_KEYS};
pub use output::{
    format_float, metadata_text, profile_csv, series_csv, tails_csv, write_outputs, TRUNCATED_TRAILER,
};

use std::ops::ControlFlow;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};

use thiserror::Error;

use crate::dynamics::{initial_state, integrate_with, CavitySystem, IntegratorConfig};
use crate::error::{DynamicsError, ModelError, ObservableError};
use crate::model::{standard_atoms, ModePolicy, N_ATOMS};
use crate::observables::{
    field_profile, precausal_average, tail_fraction, FieldProfile, ObservableSeries, SeriesRow,
    TailReport,
};

/// Full-scale mode counts; presets multiply these by `scale`.
const FULL_SYMMETRIC_HALF: [u64; 2] = [5000, 10000];
const FULL_ASYMMETRIC_COUNTS: [u64; 3] = [10000, 20000, 30000];

/// Estimated cost of one amplitude update in one derivative evaluation.
const SECONDS_PER_AMPLITUDE_EVAL: f64 = 8e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScenarioId {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Custom,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 7] = [
        ScenarioId::Fig1,
        ScenarioId::Fig2,
        ScenarioId::Fig3,
        ScenarioId::Fig4,
        ScenarioId::Fig5,
        ScenarioId::Fig6,
        ScenarioId::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::Fig1 => "fig1",
            ScenarioId::Fig2 => "fig2",
            ScenarioId::Fig3 => "fig3",
            ScenarioId::Fig4 => "fig4",
            ScenarioId::Fig5 => "fig5",
            ScenarioId::Fig6 => "fig6",
            ScenarioId::Custom => "custom",
        }
    }
}

impl std::str::FromStr for ScenarioId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| format!("unknown scenario '{s}'"))
    }
}

impl std::fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything needed to reproduce one run.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    pub scale: f64,
    pub decay_rates: [f64; N_ATOMS],
    pub detuning: f64,
    pub positions: [f64; N_ATOMS],
    /// `omega_1 = resonance_index * pi`; need not be an integer.
    pub resonance_index: f64,
    pub modes: ModePolicy,
    /// Mode counts for sweeps; empty for single runs.
    pub sweep: Vec<u64>,
    pub t_end: f64,
    pub phase_per_step: f64,
    pub resolution_cap: f64,
    pub corrector_iterations: usize,
    /// Approximate number of stored series rows.
    pub sample_rows: usize,
    pub grid_points: usize,
    pub profile_times: Vec<f64>,
    pub t_causal: f64,
    pub budget_seconds: f64,
    pub output_dir: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioId::Custom,
            scale: 1.0,
            decay_rates: [1.0, 16.0, 256.0],
            detuning: 4.0,
            positions: [0.25, 0.5, 0.75],
            resonance_index: 2500.0,
            modes: ModePolicy::Symmetric { center_index: 2500, half_count: 1000 },
            sweep: Vec::new(),
            t_end: 0.25,
            phase_per_step: crate::dynamics::DEFAULT_PHASE_PER_STEP,
            resolution_cap: crate::dynamics::DEFAULT_RESOLUTION_CAP,
            corrector_iterations: 1,
            sample_rows: 2000,
            grid_points: crate::observables::DEFAULT_GRID_POINTS,
            profile_times: vec![0.25],
            t_causal: 0.5,
            budget_seconds: 86_400.0,
            output_dir: None,
        }
    }
}

fn scaled(count: u64, scale: f64) -> u64 {
    ((count as f64 * scale).round() as u64).max(1)
}

impl ScenarioConfig {
    /// Preset for one of the published figures at the given scale.
    pub fn preset(id: ScenarioId, scale: f64) -> Self {
        let base = Self { scenario: id, scale, ..Self::default() };
        let half = scaled(FULL_SYMMETRIC_HALF[0], scale);
        let half2 = scaled(FULL_SYMMETRIC_HALF[1], scale);
        let asym: Vec<u64> = FULL_ASYMMETRIC_COUNTS.iter().map(|&c| scaled(c, scale)).collect();
        // Smallest legal center for the larger symmetric set, shared by the
        // whole sweep so all rows see the same atoms.
        let center_sweep = half2 + 1;
        let center_single = half + 1;
        match id {
            ScenarioId::Fig1 | ScenarioId::Fig4 => Self {
                resonance_index: center_single as f64,
                modes: ModePolicy::Symmetric { center_index: center_single, half_count: half },
                t_end: if id == ScenarioId::Fig1 { 0.25 } else { 0.6 },
                ..base
            },
            ScenarioId::Fig2 | ScenarioId::Fig5 => Self {
                resonance_index: center_sweep as f64,
                modes: ModePolicy::Symmetric { center_index: center_sweep, half_count: half },
                sweep: vec![2 * half + 1, 2 * half2 + 1],
                t_end: if id == ScenarioId::Fig2 { 0.25 } else { 0.6 },
                ..base
            },
            ScenarioId::Fig3 | ScenarioId::Fig6 => Self {
                resonance_index: center_single as f64,
                modes: ModePolicy::Asymmetric { lowest_index: 1, count: asym[0] },
                sweep: asym,
                t_end: if id == ScenarioId::Fig3 { 0.25 } else { 0.6 },
                ..base
            },
            ScenarioId::Custom => base,
        }
    }

    pub fn omega_1(&self) -> f64 {
        self.resonance_index * std::f64::consts::PI
    }

    pub fn build_system(&self) -> Result<CavitySystem, ExperimentError> {
        let atoms = standard_atoms(self.omega_1(), self.detuning, self.decay_rates, self.positions)?;
        let modes = self.modes.build()?;
        Ok(CavitySystem::new(atoms, modes))
    }

    pub fn integrator_config(&self, system: &CavitySystem) -> IntegratorConfig {
        let mut cfg = IntegratorConfig::resolved(system.max_frequency(), self.phase_per_step);
        cfg.resolution_cap = self.resolution_cap;
        cfg.corrector_iterations = self.corrector_iterations;
        let steps = self.aligned_step_count(cfg.steps_for(self.t_end).0);
        cfg.step_size = self.t_end / steps as f64;
        cfg.sample_stride = ((steps as usize) / self.sample_rows.max(1)).max(1);
        cfg
    }

    /// Smallest step count `>= min_steps` (searching up to twice that) for
    /// which every profile time lands on the step grid, so snapshots are taken
    /// at the scheduled times rather than at the nearest step.
    fn aligned_step_count(&self, min_steps: u64) -> u64 {
        let on_grid = |n: u64| {
            self.profile_times.iter().all(|&tp| {
                let k = tp / self.t_end * n as f64;
                (k - k.round()).abs() < 1e-6
            })
        };
        (min_steps..=2 * min_steps).find(|&n| on_grid(n)).unwrap_or(min_steps)
    }

    /// Rough wall-clock estimate for one run, in seconds.
    pub fn estimated_seconds(&self) -> f64 {
        let modes = self.modes.mode_count() as f64;
        let omega_max = (self.modes_upper_index() as f64 * std::f64::consts::PI).max(self.omega_1());
        let steps = self.t_end * omega_max / self.phase_per_step;
        let evals = 1.0 + self.corrector_iterations as f64;
        steps * evals * (N_ATOMS as f64 + modes) * SECONDS_PER_AMPLITUDE_EVAL
    }

    fn modes_upper_index(&self) -> u64 {
        match self.modes {
            ModePolicy::Symmetric { center_index, half_count } => center_index + half_count,
            ModePolicy::Asymmetric { lowest_index, count } => lowest_index + count - 1,
        }
    }

    /// Same configuration with a different number of modes. Symmetric sets
    /// keep their center (the count must be odd); asymmetric sets keep their
    /// lowest index.
    pub fn with_mode_count(&self, count: u64) -> Result<Self, ExperimentError> {
        let modes = match self.modes {
            ModePolicy::Symmetric { center_index, .. } => {
                if count.is_multiple_of(2) {
                    return Err(ExperimentError::Config(format!(
                        "symmetric mode count {count} must be odd (center mode included)"
                    )));
                }
                ModePolicy::Symmetric { center_index, half_count: count / 2 }
            }
            ModePolicy::Asymmetric { lowest_index, .. } => ModePolicy::Asymmetric { lowest_index, count },
        };
        Ok(Self { modes, sweep: Vec::new(), ..self.clone() })
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.build_system_checks()?;
        if !(self.t_end > 0.0) {
            return Err(ExperimentError::Config("t_end must be positive".into()));
        }
        if !(self.scale > 0.0 && self.scale <= 1.0) {
            return Err(ExperimentError::Config(format!("scale {} must lie in (0, 1]", self.scale)));
        }
        if !(self.phase_per_step > 0.0) {
            return Err(ExperimentError::Config("phase_per_step must be positive".into()));
        }
        if self.grid_points < 2 {
            return Err(ExperimentError::Config("grid_points must be at least 2".into()));
        }
        if self.sample_rows == 0 {
            return Err(ExperimentError::Config("sample_rows must be at least 1".into()));
        }
        for &t in &self.profile_times {
            if !(t > 0.0 && t <= self.t_end) {
                return Err(ExperimentError::Config(format!(
                    "profile time {t} outside (0, t_end = {}]",
                    self.t_end
                )));
            }
        }
        for &count in &self.sweep {
            self.with_mode_count(count)?.build_system_checks()?;
        }
        Ok(())
    }

    fn build_system_checks(&self) -> Result<(), ExperimentError> {
        standard_atoms(self.omega_1(), self.detuning, self.decay_rates, self.positions)?;
        self.modes.build()?;
        if self.phase_per_step > self.resolution_cap {
            return Err(ExperimentError::Config(format!(
                "phase_per_step {} exceeds resolution_cap {}",
                self.phase_per_step, self.resolution_cap
            )));
        }
        Ok(())
    }

    pub fn check_budget(&self) -> Result<(), ExperimentError> {
        let runs: Vec<Self> = if self.sweep.is_empty() {
            vec![self.clone()]
        } else {
            self.sweep.iter().map(|&c| self.with_mode_count(c)).collect::<Result<_, _>>()?
        };
        let estimate: f64 = runs.iter().map(Self::estimated_seconds).sum();
        if estimate > self.budget_seconds {
            return Err(ExperimentError::Budget { estimate, budget: self.budget_seconds });
        }
        Ok(())
    }

    /// File-name stem for this run's outputs.
    pub fn label(&self) -> String {
        format!("{}_n{}", self.scenario, self.modes.mode_count())
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error("{0}")]
    Config(String),
    #[error("estimated run time {estimate:.0} s exceeds the budget of {budget:.0} s")]
    Budget { estimate: f64, budget: f64 },
    #[error("interrupted at t = {t}")]
    Interrupted { t: f64 },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// One tails-table row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailRow {
    pub mode_count: u64,
    pub t: f64,
    pub tail_fraction: f64,
    pub precausal_avg: f64,
}

#[derive(Clone, Debug)]
pub struct ScenarioOutput {
    pub config: ScenarioConfig,
    pub series: ObservableSeries,
    pub profiles: Vec<FieldProfile>,
    pub tails: Vec<TailReport>,
    pub step_size: f64,
    pub steps: u64,
    pub sample_stride: usize,
    /// False when the run was interrupted before `t_end`.
    pub complete: bool,
}

impl ScenarioOutput {
    /// Summary row: tail fraction of the first profile that fits inside the
    /// cavity cone, and the pre-causal average of `p_3` when the run covers
    /// the causality time. Missing metrics are NaN.
    pub fn tail_row(&self) -> TailRow {
        let (t, tf) = self
            .tails
            .first()
            .map(|r| (r.t, r.tail_fraction))
            .unwrap_or((self.config.t_end, f64::NAN));
        let pre = if self.config.t_end >= self.config.t_causal {
            precausal_average(&self.series, self.config.t_causal).unwrap_or(f64::NAN)
        } else {
            f64::NAN
        };
        TailRow { mode_count: self.config.modes.mode_count(), t, tail_fraction: tf, precausal_avg: pre }
    }

    pub fn precausal_average(&self) -> Result<f64, ObservableError> {
        precausal_average(&self.series, self.config.t_causal)
    }
}

/// Builds, integrates and measures one configuration.
///
/// `cancel`, when set during the run, stops it at the next step; the partial
/// output is returned with `complete = false`.
pub fn run_scenario(
    config: &ScenarioConfig,
    cancel: Option<&AtomicBool>,
) -> Result<ScenarioOutput, ExperimentError> {
    config.validate()?;
    let system = config.build_system()?;
    let icfg = config.integrator_config(&system);
    let omega_1 = config.omega_1();
    let source_x = config.positions[0];

    let psi0 = initial_state(&system.modes);
    let (n_steps, h) = icfg.steps_for(config.t_end);
    // scheduled profile times snapped to the step grid
    let mut targets: Vec<u64> = config
        .profile_times
        .iter()
        .map(|&t| ((t / h).round() as u64).clamp(1, n_steps))
        .collect();
    targets.sort_unstable();
    targets.dedup();

    let mut profiles = Vec::new();
    let mut profile_err = None;
    let mut interrupted = false;
    let trajectory = integrate_with(&psi0, &system, icfg.clone(), config.t_end, |integ| {
        if targets.binary_search(&integ.steps()).is_ok() {
            match field_profile(&integ.state(), &system.modes, omega_1, config.grid_points) {
                Ok(p) => profiles.push(p),
                Err(e) => {
                    profile_err = Some(e);
                    return ControlFlow::Break(());
                }
            }
        }
        if cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            interrupted = true;
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    })?;
    if let Some(e) = profile_err {
        return Err(e.into());
    }

    let mut series = ObservableSeries::default();
    for s in &trajectory.samples {
        series.push(SeriesRow {
            t: s.t,
            p: [s.c[0].norm_sqr(), s.c[1].norm_sqr(), s.c[2].norm_sqr()],
            norm2: s.norm2,
            energy: s.energy,
        });
    }
    let tails = profiles
        .iter()
        .filter(|p| p.t <= source_x.min(1.0 - source_x) + 1e-12)
        .map(|p| tail_fraction(p, source_x, p.t))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(ScenarioOutput {
        config: config.clone(),
        series,
        profiles,
        tails,
        step_size: trajectory.step_size,
        steps: trajectory.steps,
        sample_stride: icfg.sample_stride,
        complete: !interrupted,
    })
}

/// Runs `base` once per mode count, in parallel, and returns the outputs in
/// the order of `mode_counts`.
pub fn convergence_study(
    base: &ScenarioConfig,
    mode_counts: &[u64],
    cancel: Option<&AtomicBool>,
) -> Result<Vec<ScenarioOutput>, ExperimentError> {
    if mode_counts.is_empty() {
        return Err(ExperimentError::Config("a sweep needs at least one mode count".into()));
    }
    let configs: Vec<ScenarioConfig> =
        mode_counts.iter().map(|&c| base.with_mode_count(c)).collect::<Result<_, _>>()?;
    for c in &configs {
        c.validate()?;
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|c| scope.spawn(move || run_scenario(c, cancel)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    })
}

/// Runs a configuration: its sweep if it has one, otherwise a single run.
pub fn run_config(
    config: &ScenarioConfig,
    cancel: Option<&AtomicBool>,
) -> Result<Vec<ScenarioOutput>, ExperimentError> {
    if config.sweep.is_empty() {
        Ok(vec![run_scenario(config, cancel)?])
    } else {
        convergence_study(config, &config.sweep, cancel)
    }
}

/// Acceptance bound on the integrator's deviation from exact propagation.
pub const ORACLE_CHECK_TOLERANCE: f64 = 1e-8;

/// Step used for the oracle comparison.
pub const ORACLE_CHECK_STEP: f64 = 2.5e-4;

/// The standard three atoms with `omega_1 = 6 pi` coupled to the eight modes
/// `n = 2..=9`.
pub fn oracle_check_system() -> CavitySystem {
    let atoms = standard_atoms(6.0 * std::f64::consts::PI, 4.0, [1.0, 16.0, 256.0], [0.25, 0.5, 0.75])
        .expect("standard atoms are valid");
    let modes = crate::model::asymmetric_mode_set(2, 8).expect("non-empty mode set");
    CavitySystem::new(atoms, modes)
}

/// Largest amplitude deviation between the multistep integrator with step
/// `step` and exact propagation, over snapshots every 0.1 up to `t = 1`.
pub fn oracle_deviation(system: &CavitySystem, step: f64) -> Result<f64, ExperimentError> {
    let psi0 = initial_state(&system.modes);
    let mut cfg = IntegratorConfig::with_step(step);
    let (steps, _) = cfg.steps_for(1.0);
    cfg.snapshot_stride = Some(((steps / 10) as usize).max(1));
    let traj = crate::dynamics::integrate(&psi0, system, cfg, 1.0)?;
    let mut worst: f64 = 0.0;
    for snap in &traj.snapshots {
        let exact = crate::dynamics::propagate_oracle(&psi0, system, snap.t)?;
        for (a, b) in snap.amplitudes().iter().zip(exact.amplitudes()) {
            worst = worst.max((a - b).norm());
        }
    }
    Ok(worst)
}

/// [`oracle_deviation`] on [`oracle_check_system`] at [`ORACLE_CHECK_STEP`].
pub fn oracle_check() -> Result<f64, ExperimentError> {
    oracle_deviation(&oracle_check_system(), ORACLE_CHECK_STEP)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_at_desk_scale() {
        let f1 = ScenarioConfig::preset(ScenarioId::Fig1, 0.2);
        assert_eq!(f1.modes, ModePolicy::Symmetric { center_index: 1001, half_count: 1000 });
        assert_eq!(f1.modes.mode_count(), 2001);
        assert_eq!(f1.t_end, 0.25);

        let f2 = ScenarioConfig::preset(ScenarioId::Fig2, 0.1);
        assert_eq!(f2.sweep, vec![1001, 2001]);
        assert_eq!(f2.resonance_index, 1001.0);

        let f3 = ScenarioConfig::preset(ScenarioId::Fig3, 0.2);
        assert_eq!(f3.sweep, vec![2000, 4000, 6000]);
        assert_eq!(f3.modes, ModePolicy::Asymmetric { lowest_index: 1, count: 2000 });

        let f6 = ScenarioConfig::preset(ScenarioId::Fig6, 0.2);
        assert_eq!(f6.t_end, 0.6);
        for id in ScenarioId::ALL {
            ScenarioConfig::preset(id, 0.2).validate().unwrap();
        }
        // full scale reproduces the published counts
        let f5 = ScenarioConfig::preset(ScenarioId::Fig5, 1.0);
        assert_eq!(f5.sweep, vec![10001, 20001]);
    }

    #[test]
    fn mode_count_substitution() {
        let f2 = ScenarioConfig::preset(ScenarioId::Fig2, 0.1);
        let c = f2.with_mode_count(1001).unwrap();
        assert_eq!(c.modes, ModePolicy::Symmetric { center_index: 1001, half_count: 500 });
        assert!(f2.with_mode_count(1000).is_err());
        let f3 = ScenarioConfig::preset(ScenarioId::Fig3, 0.2);
        assert_eq!(
            f3.with_mode_count(4000).unwrap().modes,
            ModePolicy::Asymmetric { lowest_index: 1, count: 4000 }
        );
        // symmetric count too large for the center
        assert!(f2.with_mode_count(4001).unwrap().validate().is_err());
    }

    #[test]
    fn budget_refusal() {
        let mut c = ScenarioConfig::preset(ScenarioId::Fig6, 1.0);
        c.budget_seconds = 1.0;
        assert!(matches!(c.check_budget(), Err(ExperimentError::Budget { .. })));
        c.budget_seconds = 1e9;
        c.check_budget().unwrap();
    }

    #[test]
    fn scenario_ids_round_trip() {
        for id in ScenarioId::ALL {
            assert_eq!(id.name().parse::<ScenarioId>().unwrap(), id);
        }
        assert!("fig7".parse::<ScenarioId>().is_err());
    }
}
