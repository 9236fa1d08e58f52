//! Single-excitation state and its time evolution.
//!
//! With one excitation shared between three atoms and the cavity modes, the
//! state is `c_1 |e,g,g,0> + c_2 |g,e,g,0> + c_3 |g,g,e,0> + sum_n b_n |g,g,g,1_n>`
//! and the Schrödinger equation becomes a linear system for the `3 + N`
//! amplitudes, generated by a real symmetric matrix.

mod abm;
mod oracle;

pub use abm::{
    integrate, integrate_with, Bootstrap, Integrator, IntegratorConfig, Sample, Trajectory,
    DEFAULT_PHASE_PER_STEP, DEFAULT_RESOLUTION_CAP,
};
pub use oracle::{hamiltonian_matrix, propagate_oracle, propagate_oracle_capped, DEFAULT_ORACLE_CAP};

use num_complex::Complex64;

use crate::error::DynamicsError;
use crate::model::{coupling_matrix, AtomParams, CouplingMatrix, ModeSet, N_ATOMS};

pub type C64 = Complex64;

/// Atoms, modes and their couplings, bundled for evolution.
#[derive(Clone, Debug)]
pub struct CavitySystem {
    pub atoms: [AtomParams; N_ATOMS],
    pub modes: ModeSet,
    pub couplings: CouplingMatrix,
}

impl CavitySystem {
    pub fn new(atoms: [AtomParams; N_ATOMS], modes: ModeSet) -> Self {
        let couplings = coupling_matrix(&atoms, &modes);
        Self { atoms, modes, couplings }
    }

    /// Builds a system from explicit couplings, bypassing the cavity sine
    /// profile. Used for toy systems (e.g. a single resonant mode with g = 1).
    pub fn with_couplings(
        atoms: [AtomParams; N_ATOMS],
        modes: ModeSet,
        couplings: CouplingMatrix,
    ) -> Result<Self, DynamicsError> {
        if couplings.mode_count() != modes.len() {
            return Err(DynamicsError::DimensionMismatch {
                state: couplings.mode_count(),
                modes: modes.len(),
            });
        }
        Ok(Self { atoms, modes, couplings })
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    /// Largest bare frequency of the system (atoms or modes).
    pub fn max_frequency(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.transition_frequency)
            .fold(self.modes.max_frequency(), f64::max)
    }

    pub fn atom_frequencies(&self) -> [f64; N_ATOMS] {
        self.atoms.map(|a| a.transition_frequency)
    }

    /// `out = H psi` over a flat amplitude slice (atoms first, then modes).
    ///
    /// One pass over the modes. The three atomic sums are accumulated in
    /// `LANES` interleaved partial sums (mode `k` goes to lane `k % LANES`)
    /// that are combined in a fixed order, so the result depends only on the
    /// inputs, never on scheduling.
    pub(crate) fn apply_hamiltonian(&self, psi: &[C64], out: &mut [C64]) {
        const LANES: usize = 4;
        let n = self.mode_count();
        debug_assert_eq!(psi.len(), N_ATOMS + n);
        debug_assert_eq!(out.len(), N_ATOMS + n);
        let (c, b) = psi.split_at(N_ATOMS);
        let (oc, ob) = out.split_at_mut(N_ATOMS);
        let [g0, g1, g2] = self.couplings.rows();
        let w = self.modes.frequencies();
        let (c0, c1, c2) = (c[0], c[1], c[2]);
        let zero = [0.0; LANES];
        let (mut re0, mut im0, mut re1, mut im1, mut re2, mut im2) = (zero, zero, zero, zero, zero, zero);

        let full = n - n % LANES;
        for base in (0..full).step_by(LANES) {
            let bb = &b[base..base + LANES];
            let (gg0, gg1, gg2) = (&g0[base..base + LANES], &g1[base..base + LANES], &g2[base..base + LANES]);
            let ww = &w[base..base + LANES];
            let oo = &mut ob[base..base + LANES];
            for l in 0..LANES {
                let (br, bi) = (bb[l].re, bb[l].im);
                re0[l] += gg0[l] * br;
                im0[l] += gg0[l] * bi;
                re1[l] += gg1[l] * br;
                im1[l] += gg1[l] * bi;
                re2[l] += gg2[l] * br;
                im2[l] += gg2[l] * bi;
                oo[l] = C64::new(
                    ww[l] * br + gg0[l] * c0.re + gg1[l] * c1.re + gg2[l] * c2.re,
                    ww[l] * bi + gg0[l] * c0.im + gg1[l] * c1.im + gg2[l] * c2.im,
                );
            }
        }
        for k in full..n {
            let l = k - full;
            let (br, bi) = (b[k].re, b[k].im);
            re0[l] += g0[k] * br;
            im0[l] += g0[k] * bi;
            re1[l] += g1[k] * br;
            im1[l] += g1[k] * bi;
            re2[l] += g2[k] * br;
            im2[l] += g2[k] * bi;
            ob[k] = C64::new(
                w[k] * br + g0[k] * c0.re + g1[k] * c1.re + g2[k] * c2.re,
                w[k] * bi + g0[k] * c0.im + g1[k] * c1.im + g2[k] * c2.im,
            );
        }
        let fold = |v: [f64; LANES]| (v[0] + v[1]) + (v[2] + v[3]);
        let acc = [
            C64::new(fold(re0), fold(im0)),
            C64::new(fold(re1), fold(im1)),
            C64::new(fold(re2), fold(im2)),
        ];
        for j in 0..N_ATOMS {
            oc[j] = c[j] * self.atoms[j].transition_frequency + acc[j];
        }
    }

    /// `out = -i H psi`.
    pub(crate) fn derivative_into(&self, psi: &[C64], out: &mut [C64]) {
        self.apply_hamiltonian(psi, out);
        for v in out.iter_mut() {
            *v = C64::new(v.im, -v.re);
        }
    }
}

/// Amplitudes of the single-excitation state at time `t`.
///
/// Stored as one contiguous vector: the three atomic amplitudes followed by
/// one field amplitude per mode slot.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeState {
    amps: Vec<C64>,
    pub t: f64,
}

impl AmplitudeState {
    pub fn new(c: [C64; N_ATOMS], b: Vec<C64>, t: f64) -> Self {
        let mut amps = Vec::with_capacity(N_ATOMS + b.len());
        amps.extend_from_slice(&c);
        amps.extend(b);
        Self { amps, t }
    }

    pub(crate) fn from_flat(amps: Vec<C64>, t: f64) -> Self {
        debug_assert!(amps.len() >= N_ATOMS);
        Self { amps, t }
    }

    pub fn c(&self) -> &[C64] {
        &self.amps[..N_ATOMS]
    }

    pub fn b(&self) -> &[C64] {
        &self.amps[N_ATOMS..]
    }

    pub fn b_mut(&mut self) -> &mut [C64] {
        &mut self.amps[N_ATOMS..]
    }

    pub fn c_mut(&mut self) -> &mut [C64] {
        &mut self.amps[..N_ATOMS]
    }

    /// All `3 + N` amplitudes, atoms first.
    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn mode_count(&self) -> usize {
        self.amps.len() - N_ATOMS
    }

    /// Complex conjugate of every amplitude (time reversal for a real `H`).
    pub fn conjugated(&self) -> Self {
        Self { amps: self.amps.iter().map(|a| a.conj()).collect(), t: self.t }
    }

    pub fn norm_squared(&self) -> f64 {
        norm_squared(self)
    }

    fn check_dims(&self, system: &CavitySystem) -> Result<(), DynamicsError> {
        if self.mode_count() != system.mode_count() {
            return Err(DynamicsError::DimensionMismatch {
                state: self.mode_count(),
                modes: system.mode_count(),
            });
        }
        Ok(())
    }
}

/// Atom 1 excited, atoms 2 and 3 in the ground state, field in vacuum.
pub fn initial_state(modes: &ModeSet) -> AmplitudeState {
    let zero = C64::new(0.0, 0.0);
    AmplitudeState::new([C64::new(1.0, 0.0), zero, zero], vec![zero; modes.len()], 0.0)
}

/// Time derivative of every amplitude, in the state's flat layout.
pub fn rhs(state: &AmplitudeState, system: &CavitySystem) -> Result<Vec<C64>, DynamicsError> {
    state.check_dims(system)?;
    let mut out = vec![C64::new(0.0, 0.0); state.amps.len()];
    system.derivative_into(&state.amps, &mut out);
    Ok(out)
}

pub fn norm_squared(state: &AmplitudeState) -> f64 {
    state.amps.iter().map(|a| a.norm_sqr()).sum()
}

/// `<psi|H|psi>` without the constant pseudospin offset.
pub fn energy_expectation(
    state: &AmplitudeState,
    system: &CavitySystem,
) -> Result<f64, DynamicsError> {
    state.check_dims(system)?;
    Ok(energy_of(&state.amps, system))
}

pub(crate) fn energy_of(psi: &[C64], system: &CavitySystem) -> f64 {
    let (c, b) = psi.split_at(N_ATOMS);
    let mut diag: f64 = system.atoms.iter().zip(c).map(|(a, cj)| a.transition_frequency * cj.norm_sqr()).sum();
    let w = system.modes.frequencies();
    let mut cross = C64::new(0.0, 0.0);
    let rows = system.couplings.rows();
    for k in 0..b.len() {
        diag += w[k] * b[k].norm_sqr();
        let gc = c[0].conj() * rows[0][k] + c[1].conj() * rows[1][k] + c[2].conj() * rows[2][k];
        cross += gc * b[k];
    }
    diag + 2.0 * cross.re
}

/// Excitation probabilities `|c_j|^2`.
pub fn excitation_probabilities(state: &AmplitudeState) -> [f64; N_ATOMS] {
    let c = state.c();
    [c[0].norm_sqr(), c[1].norm_sqr(), c[2].norm_sqr()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{asymmetric_mode_set, AtomParams};
    use std::f64::consts::PI;

    pub(crate) fn single_mode_rabi() -> CavitySystem {
        // One atom at the center of the cavity, resonant with mode 1, g = 1.
        let atoms = [
            AtomParams::new(1, 0.5, PI, 1.0).unwrap(),
            AtomParams::new(2, 0.25, PI, 0.0).unwrap(),
            AtomParams::new(3, 0.75, PI, 0.0).unwrap(),
        ];
        CavitySystem::new(atoms, asymmetric_mode_set(1, 1).unwrap())
    }

    #[test]
    fn decoupled_limit() {
        let atoms = [
            AtomParams::new(1, 0.25, 7.0, 0.0).unwrap(),
            AtomParams::new(2, 0.5, 3.0, 0.0).unwrap(),
            AtomParams::new(3, 0.75, 7.0, 0.0).unwrap(),
        ];
        let modes = asymmetric_mode_set(1, 4).unwrap();
        let sys = CavitySystem::new(atoms, modes.clone());
        let psi = initial_state(&modes);
        let d = rhs(&psi, &sys).unwrap();
        assert_eq!(d[0], C64::new(0.0, -7.0));
        assert!(d[1..].iter().all(|v| *v == C64::new(0.0, 0.0)));
    }

    #[test]
    fn single_resonant_mode_rhs() {
        let sys = single_mode_rabi();
        let psi = initial_state(&sys.modes);
        let d = rhs(&psi, &sys).unwrap();
        assert_eq!(d[0], C64::new(0.0, -PI));
        assert_eq!(d[3], C64::new(0.0, -1.0));
    }

    #[test]
    fn rhs_dimension_mismatch() {
        let sys = single_mode_rabi();
        let bad = AmplitudeState::new([C64::new(1.0, 0.0); 3], vec![C64::new(0.0, 0.0); 2], 0.0);
        assert_eq!(
            rhs(&bad, &sys),
            Err(DynamicsError::DimensionMismatch { state: 2, modes: 1 })
        );
    }

    #[test]
    fn conserved_quantities_of_simple_states() {
        let modes = asymmetric_mode_set(3, 5).unwrap();
        let atoms = crate::model::standard_atoms(
            6.0 * PI,
            4.0,
            [1.0, 16.0, 256.0],
            [0.25, 0.5, 0.75],
        )
        .unwrap();
        let sys = CavitySystem::new(atoms, modes.clone());
        let psi = initial_state(&modes);
        assert_eq!(norm_squared(&psi), 1.0);
        assert_eq!(energy_expectation(&psi, &sys).unwrap(), 6.0 * PI);

        let mut photon = AmplitudeState::new([C64::new(0.0, 0.0); 3], vec![C64::new(0.0, 0.0); 5], 0.0);
        photon.b_mut()[0] = C64::new(1.0, 0.0);
        assert_eq!(energy_expectation(&photon, &sys).unwrap(), 3.0 * PI);
        assert_eq!(excitation_probabilities(&psi), [1.0, 0.0, 0.0]);
    }
}
