use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("atom {index}: position fraction {value} must lie strictly inside (0, 1)")]
    AtomPosition { index: usize, value: f64 },
    #[error("atom {index}: transition frequency {value} must be positive and finite")]
    AtomFrequency { index: usize, value: f64 },
    #[error("atom {index}: decay rate {value} must be non-negative and finite")]
    AtomDecayRate { index: usize, value: f64 },
    #[error(
        "symmetric mode set with center {center_index} and half-count {half_count} \
         would start below mode 1; raise the center index"
    )]
    LowerEdgeBelowOne { center_index: u64, half_count: u64 },
    #[error("lowest mode index must be at least 1")]
    LowestIndexZero,
    #[error("mode set must contain at least one mode")]
    EmptyModeSet,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("state has {state} field amplitudes but the mode set has {modes}")]
    DimensionMismatch { state: usize, modes: usize },
    #[error("step size {step_size} must be positive and finite")]
    InvalidStepSize { step_size: f64 },
    #[error(
        "step size {step_size} resolves the highest frequency {omega_max} with \
         {phase} rad/step, above the cap of {cap}"
    )]
    UnderResolved { step_size: f64, omega_max: f64, phase: f64, cap: f64 },
    #[error("end time {t_end} must be after the start time {t_start}")]
    InvalidInterval { t_start: f64, t_end: f64 },
    #[error("non-finite amplitude at t = {t}")]
    NonFinite { t: f64 },
    #[error("{modes} modes exceed the dense oracle cap of {cap}")]
    OracleTooLarge { modes: usize, cap: usize },
    #[error("integrator configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObservableError {
    #[error("light cone [{lo}, {hi}] leaves the cavity; reflected fronts are not handled")]
    ConeOutsideCavity { lo: f64, hi: f64 },
    #[error("fewer than two samples before t = {t_causal}")]
    EmptyWindow { t_causal: f64 },
    #[error("a field profile needs at least two grid points")]
    GridTooSmall,
}
