//! Physical system construction: atoms, cavity mode sets and couplings.
//!
//! Units are those of a cavity of length `L = 1` with `c = 1`: positions are
//! fractions of the cavity length, times are cavity-crossing times and mode
//! `n` has angular frequency `n * pi`.

use std::f64::consts::PI;

use crate::error::ModelError;

/// Number of atoms in the system. Fixed by construction.
pub const N_ATOMS: usize = 3;

/// One two-level atom.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtomParams {
    /// 1-based label.
    pub index: usize,
    /// `x_j / L`, strictly inside the cavity.
    pub position_fraction: f64,
    /// Transition frequency `omega_j`.
    pub transition_frequency: f64,
    /// `gamma_j = |Omega_j|^2`.
    pub decay_rate: f64,
}

impl AtomParams {
    pub fn new(
        index: usize,
        position_fraction: f64,
        transition_frequency: f64,
        decay_rate: f64,
    ) -> Result<Self, ModelError> {
        if !(position_fraction > 0.0 && position_fraction < 1.0) {
            return Err(ModelError::AtomPosition { index, value: position_fraction });
        }
        if !(transition_frequency > 0.0 && transition_frequency.is_finite()) {
            return Err(ModelError::AtomFrequency { index, value: transition_frequency });
        }
        if !(decay_rate >= 0.0 && decay_rate.is_finite()) {
            return Err(ModelError::AtomDecayRate { index, value: decay_rate });
        }
        Ok(Self { index, position_fraction, transition_frequency, decay_rate })
    }

    /// Coupling amplitude `Omega_j = sqrt(gamma_j)`.
    pub fn coupling_amplitude(&self) -> f64 {
        self.decay_rate.sqrt()
    }
}

/// Builds the standard three-atom layout: atoms at `L/4`, `L/2`, `3L/4`,
/// atoms 1 and 3 resonant at `omega_1`, atom 2 detuned to `omega_1 - detuning`.
pub fn standard_atoms(
    omega_1: f64,
    detuning: f64,
    decay_rates: [f64; N_ATOMS],
    positions: [f64; N_ATOMS],
) -> Result<[AtomParams; N_ATOMS], ModelError> {
    let freqs = [omega_1, omega_1 - detuning, omega_1];
    Ok([
        AtomParams::new(1, positions[0], freqs[0], decay_rates[0])?,
        AtomParams::new(2, positions[1], freqs[1], decay_rates[1])?,
        AtomParams::new(3, positions[2], freqs[2], decay_rates[2])?,
    ])
}

/// How a [`ModeSet`] was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModePolicy {
    /// `center_index - half_count ..= center_index + half_count`.
    Symmetric { center_index: u64, half_count: u64 },
    /// `lowest_index .. lowest_index + count`.
    Asymmetric { lowest_index: u64, count: u64 },
}

impl ModePolicy {
    pub fn build(self) -> Result<ModeSet, ModelError> {
        match self {
            ModePolicy::Symmetric { center_index, half_count } => {
                symmetric_mode_set(center_index, half_count)
            }
            ModePolicy::Asymmetric { lowest_index, count } => {
                asymmetric_mode_set(lowest_index, count)
            }
        }
    }

    pub fn mode_count(self) -> u64 {
        match self {
            ModePolicy::Symmetric { half_count, .. } => 2 * half_count + 1,
            ModePolicy::Asymmetric { count, .. } => count,
        }
    }
}

impl std::fmt::Display for ModePolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModePolicy::Symmetric { center_index, half_count } => {
                write!(f, "symmetric(center={center_index},half={half_count})")
            }
            ModePolicy::Asymmetric { lowest_index, count } => {
                write!(f, "asymmetric(lowest={lowest_index},count={count})")
            }
        }
    }
}

/// An ordered set of consecutive cavity modes.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeSet {
    indices: Vec<u64>,
    frequencies: Vec<f64>,
    policy: ModePolicy,
}

impl ModeSet {
    fn consecutive(first: u64, count: u64, policy: ModePolicy) -> Self {
        let indices: Vec<u64> = (first..first + count).collect();
        let frequencies = indices.iter().map(|&n| mode_frequency(n)).collect();
        Self { indices, frequencies, policy }
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn policy(&self) -> ModePolicy {
        self.policy
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Highest mode frequency in the set.
    pub fn max_frequency(&self) -> f64 {
        self.frequencies.last().copied().unwrap_or(0.0)
    }
}

/// `omega_n = n * pi`.
pub fn mode_frequency(n: u64) -> f64 {
    n as f64 * PI
}

/// Modes placed evenly below and above `center_index`, the center included.
pub fn symmetric_mode_set(center_index: u64, half_count: u64) -> Result<ModeSet, ModelError> {
    if center_index == 0 || half_count == 0 {
        return Err(ModelError::EmptyModeSet);
    }
    if center_index <= half_count {
        return Err(ModelError::LowerEdgeBelowOne { center_index, half_count });
    }
    Ok(ModeSet::consecutive(
        center_index - half_count,
        2 * half_count + 1,
        ModePolicy::Symmetric { center_index, half_count },
    ))
}

/// Modes from a fixed lowest index upward.
pub fn asymmetric_mode_set(lowest_index: u64, count: u64) -> Result<ModeSet, ModelError> {
    if lowest_index == 0 {
        return Err(ModelError::LowestIndexZero);
    }
    if count == 0 {
        return Err(ModelError::EmptyModeSet);
    }
    Ok(ModeSet::consecutive(lowest_index, count, ModePolicy::Asymmetric { lowest_index, count }))
}

/// `g[j][k] = Omega_j * sin(n_k * pi * x_j)`, stored row-major by atom.
///
/// Couplings are real, so the field-to-atom and atom-to-field blocks of the
/// single-excitation Hamiltonian are transposes of each other.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingMatrix {
    rows: [Vec<f64>; N_ATOMS],
    amplitudes: [f64; N_ATOMS],
}

impl CouplingMatrix {
    /// Explicit couplings, one row per atom. `Omega_j` is taken as the largest
    /// magnitude in each row.
    pub fn from_rows(rows: [Vec<f64>; N_ATOMS]) -> Self {
        let amplitudes = std::array::from_fn(|j| rows[j].iter().fold(0.0, |m: f64, g| m.max(g.abs())));
        Self { rows, amplitudes }
    }

    pub fn row(&self, atom: usize) -> &[f64] {
        &self.rows[atom]
    }

    pub fn rows(&self) -> &[Vec<f64>; N_ATOMS] {
        &self.rows
    }

    /// `Omega_j` for each atom.
    pub fn amplitudes(&self) -> [f64; N_ATOMS] {
        self.amplitudes
    }

    pub fn mode_count(&self) -> usize {
        self.rows[0].len()
    }

    pub fn get(&self, atom: usize, slot: usize) -> f64 {
        self.rows[atom][slot]
    }
}

/// Value of `sin(n * pi * x)`, exactly zero on the nodes of the mode.
///
/// `x` is split into an exact rational part when it is a dyadic fraction
/// with a small denominator, which is the case for all standard atom
/// positions; the phase is then reduced modulo `2 pi` in integer arithmetic
/// before calling `sin`, keeping large `n` accurate and nodes exact.
pub fn mode_profile(n: u64, x: f64) -> f64 {
    match dyadic(x) {
        Some((num, den)) => mode_profile_rational(n, num, den),
        None => (n as f64 * PI * x).sin(),
    }
}

/// `sin(n * pi * num / den)` with the phase reduced modulo one full turn in
/// integer arithmetic.
pub fn mode_profile_rational(n: u64, num: u64, den: u64) -> f64 {
    // phase = n * num / den half-turns; one full turn is 2 * den.
    let period = 2 * den as u128;
    let r = ((n as u128 * num as u128) % period) as u64;
    if r.is_multiple_of(den) {
        return 0.0;
    }
    (PI * r as f64 / den as f64).sin()
}

fn dyadic(x: f64) -> Option<(u64, u64)> {
    const MAX_DEN: u64 = 1 << 20;
    let mut den = 1u64;
    while den <= MAX_DEN {
        let scaled = x * den as f64;
        if scaled.fract() == 0.0 {
            return Some((scaled as u64, den));
        }
        den <<= 1;
    }
    None
}

pub fn coupling_matrix(atoms: &[AtomParams; N_ATOMS], modes: &ModeSet) -> CouplingMatrix {
    let amplitudes = atoms.map(|a| a.coupling_amplitude());
    let rows = std::array::from_fn(|j| {
        let x = atoms[j].position_fraction;
        modes.indices().iter().map(|&n| amplitudes[j] * mode_profile(n, x)).collect()
    });
    CouplingMatrix { rows, amplitudes }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_atoms(omega_1: f64) -> [AtomParams; 3] {
        standard_atoms(omega_1, 4.0, [1.0, 16.0, 256.0], [0.25, 0.5, 0.75]).unwrap()
    }

    #[test]
    fn symmetric_small() {
        let m = symmetric_mode_set(3, 2).unwrap();
        assert_eq!(m.indices(), &[1, 2, 3, 4, 5]);
        let expected: Vec<f64> = (1..=5).map(|n| n as f64 * PI).collect();
        assert_eq!(m.frequencies(), expected.as_slice());
    }

    #[test]
    fn symmetric_rejects_lower_edge_zero() {
        assert_eq!(
            symmetric_mode_set(5000, 5000),
            Err(ModelError::LowerEdgeBelowOne { center_index: 5000, half_count: 5000 })
        );
    }

    #[test]
    fn symmetric_full_scale() {
        let m = symmetric_mode_set(5001, 5000).unwrap();
        assert_eq!(m.len(), 10001);
        assert_eq!(m.indices()[0], 1);
        assert_eq!(*m.indices().last().unwrap(), 10001);
    }

    #[test]
    fn asymmetric_sets() {
        assert_eq!(asymmetric_mode_set(1, 3).unwrap().indices(), &[1, 2, 3]);
        for count in [10_000, 20_000, 30_000] {
            let m = asymmetric_mode_set(1, count).unwrap();
            assert_eq!(m.len() as u64, count);
            assert_eq!(m.indices()[0], 1);
        }
        let single = asymmetric_mode_set(5, 1).unwrap();
        assert_eq!(single.indices(), &[5]);
        assert_eq!(single.frequencies(), &[5.0 * PI]);
        assert!(asymmetric_mode_set(0, 3).is_err());
        assert!(asymmetric_mode_set(1, 0).is_err());
    }

    #[test]
    fn coupling_nodes_and_values() {
        let atoms = default_atoms(3.0 * PI);
        let modes = asymmetric_mode_set(1, 4).unwrap();
        let g = coupling_matrix(&atoms, &modes);
        // atom 2 at L/2: even modes have a node there
        assert_eq!(g.get(1, 1), 0.0);
        assert_eq!(g.get(1, 3), 0.0);
        // atom 1 at L/4, gamma = 1, n = 2
        assert_eq!(g.get(0, 1), 1.0);
        let col: Vec<f64> = (0..3).map(|j| g.get(j, 0)).collect();
        approx::assert_relative_eq!(col[0], (PI / 4.0).sin(), max_relative = 1e-15);
        assert_eq!(col[1], 4.0);
        approx::assert_relative_eq!(col[2], 16.0 * (3.0 * PI / 4.0).sin(), max_relative = 1e-15);
        approx::assert_relative_eq!(col[2], 11.313708498984761, max_relative = 1e-15);
    }

    #[test]
    fn mode_profile_large_index_is_accurate() {
        // n * x not dyadic-small: falls back to direct evaluation
        let x = 0.3;
        assert_eq!(mode_profile(7, x), (7.0 * PI * x).sin());
        // dyadic: exact reduction matches the small-index value
        assert_eq!(mode_profile(10_001, 0.25), mode_profile(1, 0.25));
        assert_eq!(mode_profile(8 * 1_000_000 + 3, 0.125), mode_profile(3, 0.125));
    }

    #[test]
    fn atom_validation() {
        assert!(AtomParams::new(1, 0.0, 1.0, 1.0).is_err());
        assert!(AtomParams::new(1, 1.0, 1.0, 1.0).is_err());
        assert!(AtomParams::new(1, 0.5, 0.0, 1.0).is_err());
        assert!(AtomParams::new(1, 0.5, 1.0, -1.0).is_err());
        assert!(AtomParams::new(1, 0.5, 1.0, 0.0).is_ok());
    }
}
