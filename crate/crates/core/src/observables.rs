//! Field energy density, excitation probabilities and light-cone metrics.

use crate::dynamics::{AmplitudeState, C64};
use crate::error::ObservableError;
use crate::model::{mode_profile, ModeSet};

pub use crate::dynamics::excitation_probabilities;

/// Default number of grid points over `[0, 1]`.
pub const DEFAULT_GRID_POINTS: usize = 2001;

/// Slack on cone boundaries and time windows, in cavity units.
const EDGE_TOL: f64 = 1e-12;

/// `<E^2(x, t)>` sampled on a uniform grid over the cavity.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldProfile {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub t: f64,
}

impl FieldProfile {
    pub fn max_over(&self, keep: impl Fn(f64) -> bool) -> f64 {
        self.grid
            .iter()
            .zip(&self.values)
            .filter(|(x, _)| keep(**x))
            .map(|(_, v)| *v)
            .fold(0.0, f64::max)
    }
}

/// Light-cone partition of a profile's grid weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailReport {
    pub inside_weight: f64,
    pub outside_weight: f64,
    pub tail_fraction: f64,
    pub source_x: f64,
    pub t: f64,
}

/// `2 omega_1 |sum_n b_n sin(n pi x)|^2` (zero-point terms dropped, `L = 1`).
pub fn field_energy_density(state: &AmplitudeState, x: f64, modes: &ModeSet, omega_1: f64) -> f64 {
    let mut sum = C64::new(0.0, 0.0);
    for (b, &n) in state.b().iter().zip(modes.indices()) {
        sum += b * mode_profile(n, x);
    }
    2.0 * omega_1 * sum.norm_sqr()
}

/// Evaluates the energy density at `grid_points` evenly spaced positions
/// `x_i = i / (grid_points - 1)`.
///
/// Grid positions are rational, so every `sin(n pi x_i)` is looked up from a
/// table of `2 (grid_points - 1)` phases after exact integer reduction.
pub fn field_profile(
    state: &AmplitudeState,
    modes: &ModeSet,
    omega_1: f64,
    grid_points: usize,
) -> Result<FieldProfile, ObservableError> {
    if grid_points < 2 {
        return Err(ObservableError::GridTooSmall);
    }
    let den = (grid_points - 1) as u64;
    let period = 2 * den;
    let table: Vec<f64> = (0..period)
        .map(|r| if r % den == 0 { 0.0 } else { (std::f64::consts::PI * r as f64 / den as f64).sin() })
        .collect();
    // n mod period per mode, reused across grid points
    let residues: Vec<u64> = modes.indices().iter().map(|&n| n % period).collect();
    let b = state.b();
    let grid: Vec<f64> = (0..grid_points).map(|i| i as f64 / den as f64).collect();
    let values = (0..den + 1)
        .map(|i| {
            let mut sum = C64::new(0.0, 0.0);
            for (bk, &nr) in b.iter().zip(&residues) {
                sum += bk * table[((nr * i) % period) as usize];
            }
            2.0 * omega_1 * sum.norm_sqr()
        })
        .collect();
    Ok(FieldProfile { grid, values, t: state.t })
}

/// Fraction of the profile's grid weight outside the cone
/// `[source_x - t, source_x + t]`.
pub fn tail_fraction(
    profile: &FieldProfile,
    source_x: f64,
    t: f64,
) -> Result<TailReport, ObservableError> {
    let (lo, hi) = (source_x - t, source_x + t);
    if lo < -EDGE_TOL || hi > 1.0 + EDGE_TOL {
        return Err(ObservableError::ConeOutsideCavity { lo, hi });
    }
    let (mut inside, mut outside) = (0.0, 0.0);
    for (&x, &v) in profile.grid.iter().zip(&profile.values) {
        if x >= lo - EDGE_TOL && x <= hi + EDGE_TOL {
            inside += v;
        } else {
            outside += v;
        }
    }
    let total = inside + outside;
    let tail_fraction = if total > 0.0 { outside / total } else { 0.0 };
    Ok(TailReport { inside_weight: inside, outside_weight: outside, tail_fraction, source_x, t })
}

/// One row of a time series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub p: [f64; 3],
    pub norm2: f64,
    pub energy: f64,
}

/// Time-stamped excitation probabilities and conserved quantities.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ObservableSeries {
    pub rows: Vec<SeriesRow>,
}

impl ObservableSeries {
    pub fn push(&mut self, row: SeriesRow) {
        debug_assert!(self.rows.last().is_none_or(|r| r.t <= row.t));
        self.rows.push(row);
    }

    pub fn max_norm_deviation(&self) -> f64 {
        self.rows.iter().map(|r| (r.norm2 - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Largest `|E(t) - E(0)| / |E(0)|` over the series.
    pub fn max_relative_energy_drift(&self) -> f64 {
        let Some(first) = self.rows.first() else { return 0.0 };
        let e0 = first.energy;
        self.rows
            .iter()
            .map(|r| ((r.energy - e0) / e0).abs())
            .fold(0.0, f64::max)
    }
}

/// Mean of `p_3` over the samples with `0 <= t < t_causal`.
pub fn precausal_average(series: &ObservableSeries, t_causal: f64) -> Result<f64, ObservableError> {
    let window: Vec<f64> = series
        .rows
        .iter()
        .filter(|r| r.t >= 0.0 && r.t < t_causal - EDGE_TOL)
        .map(|r| r.p[2])
        .collect();
    if window.len() < 2 {
        return Err(ObservableError::EmptyWindow { t_causal });
    }
    Ok(window.iter().sum::<f64>() / window.len() as f64)
}
