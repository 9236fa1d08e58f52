//! Fixed-step fourth-order Adams-Bashforth-Moulton predictor-corrector.
//!
//! Predictor (AB4):
//! ```text
//! p = y_n + h/24 (55 f_n - 59 f_{n-1} + 37 f_{n-2} - 9 f_{n-3})
//! ```
//! Corrector (AM4), applied `corrector_iterations` times:
//! ```text
//! y_{n+1} = y_n + h/24 (9 f(p) + 19 f_n - 5 f_{n-1} + f_{n-2})
//! ```
//! The first three steps are taken with classical RK4 to fill the history.

use std::ops::ControlFlow;

use super::{energy_of, AmplitudeState, CavitySystem, C64};
use crate::error::DynamicsError;
use crate::model::{ModePolicy, N_ATOMS};

/// Phase advance per step of the fastest oscillation above which a run is refused.
pub const DEFAULT_RESOLUTION_CAP: f64 = 0.3;

/// Phase advance per step of the fastest oscillation used by [`IntegratorConfig::resolved`].
///
/// The lab-frame ABM4 amplitude error per step grows like `0.16 (h w)^6`,
/// so norm conservation at the 1e-8 level over thousands of oscillation
/// periods needs a much finer step than the refusal cap.
pub const DEFAULT_PHASE_PER_STEP: f64 = 0.01;

/// Single-step scheme used to start the multistep history.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bootstrap {
    RungeKutta4,
}

impl std::fmt::Display for Bootstrap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("rk4")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub step_size: f64,
    /// Refuse to run when `step_size * omega_max` exceeds this.
    pub resolution_cap: f64,
    pub bootstrap: Bootstrap,
    /// 1 gives PECE.
    pub corrector_iterations: usize,
    /// Keep every k-th step in the trajectory's reduced samples.
    pub sample_stride: usize,
    /// Keep a full amplitude snapshot every k-th step, if set.
    pub snapshot_stride: Option<usize>,
}

impl IntegratorConfig {
    /// Step size chosen so the fastest bare frequency advances by
    /// `phase_per_step` radians per step.
    pub fn resolved(omega_max: f64, phase_per_step: f64) -> Self {
        Self {
            step_size: phase_per_step / omega_max,
            resolution_cap: DEFAULT_RESOLUTION_CAP,
            bootstrap: Bootstrap::RungeKutta4,
            corrector_iterations: 1,
            sample_stride: 1,
            snapshot_stride: None,
        }
    }

    pub fn with_step(step_size: f64) -> Self {
        Self { step_size, ..Self::resolved(1.0, 1.0) }
    }

    pub fn validate(&self, omega_max: f64) -> Result<(), DynamicsError> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(DynamicsError::InvalidStepSize { step_size: self.step_size });
        }
        if self.corrector_iterations == 0 {
            return Err(DynamicsError::InvalidConfig("corrector_iterations must be >= 1".into()));
        }
        if self.sample_stride == 0 || self.snapshot_stride == Some(0) {
            return Err(DynamicsError::InvalidConfig("strides must be >= 1".into()));
        }
        let phase = self.step_size * omega_max;
        if phase > self.resolution_cap {
            return Err(DynamicsError::UnderResolved {
                step_size: self.step_size,
                omega_max,
                phase,
                cap: self.resolution_cap,
            });
        }
        Ok(())
    }

    /// Number of steps and the (possibly shortened) step that exactly span `span`.
    pub fn steps_for(&self, span: f64) -> (u64, f64) {
        let n = (span / self.step_size * (1.0 - 1e-12)).ceil().max(1.0) as u64;
        (n, span / n as f64)
    }
}

/// Reduced per-step record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub c: [C64; N_ATOMS],
    pub norm2: f64,
    pub energy: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub snapshots: Vec<AmplitudeState>,
    pub config: IntegratorConfig,
    /// Step actually used (may be slightly below the configured one).
    pub step_size: f64,
    pub steps: u64,
    pub mode_policy: ModePolicy,
    pub mode_count: usize,
}

impl Trajectory {
    pub fn final_sample(&self) -> &Sample {
        self.samples.last().expect("trajectory always holds the initial sample")
    }
}

/// Stepping state of one evolution.
pub struct Integrator<'a> {
    system: &'a CavitySystem,
    config: IntegratorConfig,
    h: f64,
    t0: f64,
    steps: u64,
    y: Vec<C64>,
    /// `f_n, f_{n-1}, f_{n-2}, f_{n-3}`; valid entries = min(steps + 1, 4).
    history: [Vec<C64>; 4],
    scratch: Vec<C64>,
    scratch2: Vec<C64>,
}

impl<'a> Integrator<'a> {
    pub fn new(
        system: &'a CavitySystem,
        initial: &AmplitudeState,
        config: IntegratorConfig,
    ) -> Result<Self, DynamicsError> {
        initial.check_dims(system)?;
        config.validate(system.max_frequency())?;
        let dim = initial.amps.len();
        let zero = C64::new(0.0, 0.0);
        let mut history: [Vec<C64>; 4] = std::array::from_fn(|_| vec![zero; dim]);
        system.derivative_into(&initial.amps, &mut history[0]);
        Ok(Self {
            system,
            h: config.step_size,
            config,
            t0: initial.t,
            steps: 0,
            y: initial.amps.clone(),
            history,
            scratch: vec![zero; dim],
            scratch2: vec![zero; dim],
        })
    }

    pub fn t(&self) -> f64 {
        self.t0 + self.steps as f64 * self.h
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.config
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.y
    }

    pub fn c(&self) -> [C64; N_ATOMS] {
        [self.y[0], self.y[1], self.y[2]]
    }

    pub fn state(&self) -> AmplitudeState {
        AmplitudeState::from_flat(self.y.clone(), self.t())
    }

    pub fn norm_squared(&self) -> f64 {
        self.y.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn energy(&self) -> f64 {
        energy_of(&self.y, self.system)
    }

    pub fn sample(&self) -> Sample {
        Sample { t: self.t(), c: self.c(), norm2: self.norm_squared(), energy: self.energy() }
    }

    /// Overrides the step size. Only allowed before the first step.
    fn set_step(&mut self, h: f64) {
        assert_eq!(self.steps, 0, "step size fixed once stepping started");
        self.h = h;
    }

    pub fn step(&mut self) -> Result<(), DynamicsError> {
        if self.steps < 3 {
            self.rk4_step();
        } else {
            self.abm_step();
        }
        self.steps += 1;
        // rotate history: new derivative was written into history[3]
        self.history.rotate_right(1);
        // Every field amplitude feeds the atomic derivatives (NaN * 0 is NaN),
        // so a non-finite value anywhere shows up in the first three entries.
        let finite = |v: &[C64]| v[..N_ATOMS].iter().all(|a| a.re.is_finite() && a.im.is_finite());
        if !finite(&self.history[0]) || !finite(&self.y) {
            return Err(DynamicsError::NonFinite { t: self.t() });
        }
        Ok(())
    }

    /// Classical RK4; leaves `f(y_{n+1})` in `history[3]`.
    fn rk4_step(&mut self) {
        let h = self.h;
        let sys = self.system;
        let dim = self.y.len();
        let f0 = &self.history[0];
        let mut acc = f0.clone();
        let tmp = &mut self.scratch;
        let k = &mut self.scratch2;

        for i in 0..dim {
            tmp[i] = self.y[i] + f0[i] * (0.5 * h);
        }
        sys.derivative_into(tmp, k);
        for i in 0..dim {
            acc[i] += k[i] * 2.0;
            tmp[i] = self.y[i] + k[i] * (0.5 * h);
        }
        sys.derivative_into(tmp, k);
        for i in 0..dim {
            acc[i] += k[i] * 2.0;
            tmp[i] = self.y[i] + k[i] * h;
        }
        sys.derivative_into(tmp, k);
        for i in 0..dim {
            acc[i] += k[i];
            self.y[i] += acc[i] * (h / 6.0);
        }
        sys.derivative_into(&self.y, &mut self.history[3]);
    }

    /// PE(CE)^k; leaves `f(y_{n+1})` in `history[3]`.
    fn abm_step(&mut self) {
        let h24 = self.h / 24.0;
        let sys = self.system;
        let dim = self.y.len();
        let [f0, f1, f2, f3] = &mut self.history;
        let pred = &mut self.scratch;
        for i in 0..dim {
            pred[i] = self.y[i] + (f0[i] * 55.0 - f1[i] * 59.0 + f2[i] * 37.0 - f3[i] * 9.0) * h24;
        }
        // f3 is no longer needed: reuse it for f(p) and finally f(y_{n+1}).
        sys.derivative_into(pred, f3);
        // history part of the corrector, shared by every iteration
        let base = &mut self.scratch2;
        for i in 0..dim {
            base[i] = self.y[i] + (f0[i] * 19.0 - f1[i] * 5.0 + f2[i]) * h24;
        }
        for _ in 0..self.config.corrector_iterations {
            for i in 0..dim {
                pred[i] = base[i] + f3[i] * (9.0 * h24);
            }
            sys.derivative_into(pred, f3);
        }
        std::mem::swap(&mut self.y, &mut self.scratch);
    }
}

/// Integrates from `initial.t` to `t_end`, keeping reduced samples every
/// `sample_stride` steps (the first and last step are always kept).
///
/// If the span is not a whole number of steps, the step is shortened
/// uniformly so that the last step lands exactly on `t_end`.
pub fn integrate(
    initial: &AmplitudeState,
    system: &CavitySystem,
    config: IntegratorConfig,
    t_end: f64,
) -> Result<Trajectory, DynamicsError> {
    integrate_with(initial, system, config, t_end, |_| ControlFlow::Continue(()))
}

/// Like [`integrate`], calling `observer` after every step. Returning
/// `ControlFlow::Break` stops the run early; the trajectory then ends at the
/// last completed step.
pub fn integrate_with<F>(
    initial: &AmplitudeState,
    system: &CavitySystem,
    config: IntegratorConfig,
    t_end: f64,
    mut observer: F,
) -> Result<Trajectory, DynamicsError>
where
    F: FnMut(&Integrator<'_>) -> ControlFlow<()>,
{
    if !(t_end > initial.t) {
        return Err(DynamicsError::InvalidInterval { t_start: initial.t, t_end });
    }
    let mut integ = Integrator::new(system, initial, config.clone())?;
    let (n_steps, h) = config.steps_for(t_end - initial.t);
    integ.set_step(h);

    let mut samples = vec![integ.sample()];
    let mut snapshots = Vec::new();
    if config.snapshot_stride.is_some() {
        snapshots.push(integ.state());
    }
    for _ in 0..n_steps {
        integ.step()?;
        let s = integ.steps();
        let last = s == n_steps;
        if s % config.sample_stride as u64 == 0 || last {
            samples.push(integ.sample());
        }
        if let Some(stride) = config.snapshot_stride {
            if s % stride as u64 == 0 || last {
                snapshots.push(integ.state());
            }
        }
        if observer(&integ).is_break() {
            if !last && s % config.sample_stride as u64 != 0 {
                samples.push(integ.sample());
            }
            break;
        }
    }
    Ok(Trajectory {
        samples,
        snapshots,
        step_size: h,
        steps: integ.steps(),
        config,
        mode_policy: system.modes.policy(),
        mode_count: system.mode_count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::initial_state;
    use crate::model::{asymmetric_mode_set, AtomParams};
    use std::f64::consts::PI;

    fn rabi_system() -> CavitySystem {
        let atoms = [
            AtomParams::new(1, 0.5, PI, 1.0).unwrap(),
            AtomParams::new(2, 0.25, PI, 0.0).unwrap(),
            AtomParams::new(3, 0.75, PI, 0.0).unwrap(),
        ];
        CavitySystem::new(atoms, asymmetric_mode_set(1, 1).unwrap())
    }

    #[test]
    fn rabi_half_period() {
        let sys = rabi_system();
        let cfg = IntegratorConfig::with_step(1e-3);
        let traj = integrate(&initial_state(&sys.modes), &sys, cfg, PI / 2.0).unwrap();
        let last = traj.final_sample();
        assert!((last.t - PI / 2.0).abs() < 1e-15);
        assert!(last.c[0].norm_sqr() < 1e-10);
        assert!((last.norm2 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn refuses_under_resolved_step() {
        let sys = rabi_system();
        let cfg = IntegratorConfig::with_step(0.2);
        let err = integrate(&initial_state(&sys.modes), &sys, cfg, 1.0).unwrap_err();
        assert!(matches!(err, DynamicsError::UnderResolved { .. }));
    }

    #[test]
    fn rejects_bad_configs() {
        let sys = rabi_system();
        let psi = initial_state(&sys.modes);
        let mut cfg = IntegratorConfig::with_step(1e-3);
        cfg.corrector_iterations = 0;
        assert!(integrate(&psi, &sys, cfg, 1.0).is_err());
        let cfg = IntegratorConfig::with_step(-1.0);
        assert!(integrate(&psi, &sys, cfg, 1.0).is_err());
        let cfg = IntegratorConfig::with_step(1e-3);
        assert!(matches!(
            integrate(&psi, &sys, cfg, 0.0),
            Err(DynamicsError::InvalidInterval { .. })
        ));
    }

    #[test]
    fn non_finite_aborts_with_time() {
        let sys = rabi_system();
        let mut psi = initial_state(&sys.modes);
        psi.c_mut()[1] = C64::new(f64::NAN, 0.0);
        let err = integrate(&psi, &sys, IntegratorConfig::with_step(1e-3), 1.0).unwrap_err();
        assert!(matches!(err, DynamicsError::NonFinite { t } if t > 0.0));
    }

    #[test]
    fn steps_land_on_end_time() {
        let cfg = IntegratorConfig::with_step(0.3);
        let (n, h) = cfg.steps_for(1.0);
        assert_eq!(n, 4);
        assert_eq!(h, 0.25);
        let (n, _) = IntegratorConfig::with_step(0.25).steps_for(1.0);
        assert_eq!(n, 4);
    }

    #[test]
    fn sampling_and_early_stop() {
        let sys = rabi_system();
        let mut cfg = IntegratorConfig::with_step(0.01);
        cfg.sample_stride = 7;
        cfg.snapshot_stride = Some(50);
        let traj = integrate(&initial_state(&sys.modes), &sys, cfg.clone(), 1.0).unwrap();
        assert_eq!(traj.steps, 100);
        // initial + 14 strided + final
        assert_eq!(traj.samples.len(), 16);
        assert_eq!(traj.snapshots.len(), 3);
        assert!(traj.samples.windows(2).all(|w| w[0].t < w[1].t));

        let stopped = integrate_with(&initial_state(&sys.modes), &sys, cfg, 1.0, |i| {
            if i.steps() == 10 { ControlFlow::Break(()) } else { ControlFlow::Continue(()) }
        })
        .unwrap();
        assert_eq!(stopped.steps, 10);
        assert!((stopped.final_sample().t - 0.1).abs() < 1e-15);
    }
}
