//! Exact propagation for small systems by dense eigendecomposition.
//!
//! Independent of the multistep integrator: the single-excitation Hamiltonian
//! is assembled as an explicit real symmetric matrix and `exp(-iHt)` is
//! applied through its eigenbasis.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{AmplitudeState, CavitySystem, C64};
use crate::error::DynamicsError;
use crate::model::N_ATOMS;

pub const DEFAULT_ORACLE_CAP: usize = 512;

/// Dense `(3 + N) x (3 + N)` Hamiltonian: atom frequencies then mode
/// frequencies on the diagonal, couplings in the atom/mode blocks.
pub fn hamiltonian_matrix(system: &CavitySystem) -> DMatrix<f64> {
    let n = system.mode_count();
    let dim = N_ATOMS + n;
    let mut h = DMatrix::zeros(dim, dim);
    for j in 0..N_ATOMS {
        h[(j, j)] = system.atoms[j].transition_frequency;
        for k in 0..n {
            let g = system.couplings.get(j, k);
            h[(j, N_ATOMS + k)] = g;
            h[(N_ATOMS + k, j)] = g;
        }
    }
    for (k, &w) in system.modes.frequencies().iter().enumerate() {
        h[(N_ATOMS + k, N_ATOMS + k)] = w;
    }
    h
}

/// `exp(-iH t) psi`, with `t` measured from `initial.t`.
pub fn propagate_oracle(
    initial: &AmplitudeState,
    system: &CavitySystem,
    t: f64,
) -> Result<AmplitudeState, DynamicsError> {
    propagate_oracle_capped(initial, system, t, DEFAULT_ORACLE_CAP)
}

pub fn propagate_oracle_capped(
    initial: &AmplitudeState,
    system: &CavitySystem,
    t: f64,
    cap: usize,
) -> Result<AmplitudeState, DynamicsError> {
    initial.check_dims(system)?;
    let n = system.mode_count();
    if n > cap {
        return Err(DynamicsError::OracleTooLarge { modes: n, cap });
    }
    let eig = SymmetricEigen::new(hamiltonian_matrix(system));
    let v = &eig.eigenvectors;
    let re = DVector::from_iterator(initial.amps.len(), initial.amps.iter().map(|a| a.re));
    let im = DVector::from_iterator(initial.amps.len(), initial.amps.iter().map(|a| a.im));
    let (pr, pi) = (v.tr_mul(&re), v.tr_mul(&im));
    // rotate each eigencomponent by exp(-i lambda t)
    let mut rr = DVector::zeros(pr.len());
    let mut ri = DVector::zeros(pr.len());
    for k in 0..pr.len() {
        let (s, c) = (eig.eigenvalues[k] * t).sin_cos();
        rr[k] = c * pr[k] + s * pi[k];
        ri[k] = c * pi[k] - s * pr[k];
    }
    let (outr, outi) = (v * rr, v * ri);
    let amps = outr.iter().zip(outi.iter()).map(|(&r, &i)| C64::new(r, i)).collect();
    Ok(AmplitudeState::from_flat(amps, initial.t + t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::initial_state;
    use crate::model::{asymmetric_mode_set, AtomParams};
    use std::f64::consts::PI;

    fn atoms(gammas: [f64; 3], w: f64) -> [AtomParams; 3] {
        [
            AtomParams::new(1, 0.5, w, gammas[0]).unwrap(),
            AtomParams::new(2, 0.25, w, gammas[1]).unwrap(),
            AtomParams::new(3, 0.75, w, gammas[2]).unwrap(),
        ]
    }

    #[test]
    fn identity_at_zero_time() {
        let sys = CavitySystem::new(atoms([1.0, 2.0, 3.0], 5.0), asymmetric_mode_set(1, 4).unwrap());
        let psi = initial_state(&sys.modes);
        let out = propagate_oracle(&psi, &sys, 0.0).unwrap();
        for (a, b) in out.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn rabi_half_period() {
        let sys = CavitySystem::new(atoms([1.0, 0.0, 0.0], PI), asymmetric_mode_set(1, 1).unwrap());
        let out = propagate_oracle(&initial_state(&sys.modes), &sys, PI / 2.0).unwrap();
        assert!(out.c()[0].norm() < 1e-14);
        assert!((out.b()[0].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn free_evolution() {
        let sys = CavitySystem::new(atoms([0.0; 3], 3.7), asymmetric_mode_set(2, 3).unwrap());
        let t = 2.3;
        let out = propagate_oracle(&initial_state(&sys.modes), &sys, t).unwrap();
        let expected = C64::from_polar(1.0, -3.7 * t);
        assert!((out.c()[0] - expected).norm() < 1e-14);
    }

    #[test]
    fn matrix_is_symmetric() {
        let sys = CavitySystem::new(atoms([1.0, 16.0, 256.0], 6.0 * PI), asymmetric_mode_set(2, 8).unwrap());
        let h = hamiltonian_matrix(&sys);
        assert_eq!(h, h.transpose());
    }

    #[test]
    fn cap_enforced() {
        let sys = CavitySystem::new(atoms([1.0; 3], 5.0), asymmetric_mode_set(1, 10).unwrap());
        let psi = initial_state(&sys.modes);
        assert_eq!(
            propagate_oracle_capped(&psi, &sys, 1.0, 8).unwrap_err(),
            DynamicsError::OracleTooLarge { modes: 10, cap: 8 }
        );
    }
}
