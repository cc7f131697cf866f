//! Matrix-free toric-code Hamiltonian in the computational (Z) basis.
//!
//! A basis index `s` has bit `q` set when qubit `q` reads `Z = -1`. Z-type terms
//! are diagonal, X-type terms flip a fixed bit mask, so
//! `(H x)[s] = diag[s] x[s] - sum_m c_m x[s ^ m]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::scalar::Real;

/// Largest qubit count accepted by default: `2^24` amplitudes.
pub const DEFAULT_QUBIT_CAP: usize = 24;

/// Hard upper bound regardless of configuration (indices are `u64` masks, memory).
pub const ABSOLUTE_QUBIT_CAP: usize = 32;

/// Field strengths and the logical-loop penalty weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    pub h_x: f64,
    pub h_z: f64,
    pub penalty: f64,
}

impl FieldParams {
    pub fn new(h_x: f64, h_z: f64, penalty: f64) -> Result<Self> {
        let p = Self { h_x, h_z, penalty };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h_x.is_finite() && self.h_z.is_finite()) {
            return Err(Error::InvalidParameter(format!("fields must be finite, got h_x={} h_z={}", self.h_x, self.h_z)));
        }
        if !(self.penalty.is_finite() && self.penalty >= 0.0) {
            return Err(Error::InvalidParameter(format!("penalty must be finite and >= 0, got {}", self.penalty)));
        }
        Ok(())
    }

    pub fn without_penalty(self) -> Self {
        Self { penalty: 0.0, ..self }
    }
}

fn mask_of(qubits: &[usize]) -> u64 {
    qubits.iter().fold(0u64, |m, &q| m | (1u64 << q))
}

#[inline]
fn parity_sign(s: u64, mask: u64) -> f64 {
    if (s & mask).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `-sum A - sum B - h_z sum Z - h_x sum X - penalty (W_Z + W_X)`, applied without a stored matrix.
#[derive(Clone, Debug)]
pub struct SparseHamiltonian<T> {
    n_qubits: usize,
    params: FieldParams,
    vertex_masks: Vec<u64>,
    plaquette_masks: Vec<u64>,
    w_z: u64,
    w_x: u64,
    /// Off-diagonal flips with their (positive) coefficients.
    flips: Vec<(u64, T)>,
    diag: Vec<T>,
}

impl<T: Real> SparseHamiltonian<T> {
    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn params(&self) -> FieldParams {
        self.params
    }

    pub fn vertex_masks(&self) -> &[u64] {
        &self.vertex_masks
    }

    pub fn plaquette_masks(&self) -> &[u64] {
        &self.plaquette_masks
    }

    /// Masks of the penalised loops `(W_Z, W_X)`.
    pub fn loop_masks(&self) -> (u64, u64) {
        (self.w_z, self.w_x)
    }

    /// The diagonal in the Z basis.
    pub fn diagonal(&self) -> &[T] {
        &self.diag
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        y.par_iter_mut().with_min_len(1 << 12).enumerate().for_each(|(s, out)| {
            let mut acc = self.diag[s] * x[s];
            for &(m, c) in &self.flips {
                acc -= c * x[s ^ m as usize];
            }
            *out = acc;
        });
    }

    /// Same Hamiltonian with different fields, reusing the geometry masks.
    pub fn with_params(&self, params: FieldParams) -> Result<Self> {
        params.validate()?;
        Ok(assemble(self.n_qubits, params, self.vertex_masks.clone(), self.plaquette_masks.clone(), self.w_z, self.w_x))
    }

    /// Dense matrix, for small test oracles only.
    pub fn to_dense(&self) -> nalgebra::DMatrix<T> {
        let d = self.dim();
        let mut m = nalgebra::DMatrix::<T>::zeros(d, d);
        for s in 0..d {
            m[(s, s)] = self.diag[s];
            for &(mask, c) in &self.flips {
                m[(s ^ mask as usize, s)] -= c;
            }
        }
        m
    }
}

fn assemble<T: Real>(
    n_qubits: usize,
    params: FieldParams,
    vertex_masks: Vec<u64>,
    plaquette_masks: Vec<u64>,
    w_z: u64,
    w_x: u64,
) -> SparseHamiltonian<T> {
    let dim = 1usize << n_qubits;
    let diag: Vec<T> = (0..dim as u64)
        .into_par_iter()
        .map(|s| {
            let mut e = -vertex_masks.iter().map(|&m| parity_sign(s, m)).sum::<f64>();
            e -= params.h_z * (n_qubits as f64 - 2.0 * s.count_ones() as f64);
            e -= params.penalty * parity_sign(s, w_z);
            T::lit(e)
        })
        .collect();
    let mut flips: Vec<(u64, T)> = plaquette_masks.iter().map(|&m| (m, T::one())).collect();
    if params.h_x != 0.0 {
        flips.extend((0..n_qubits).map(|q| (1u64 << q, T::lit(params.h_x))));
    }
    if params.penalty != 0.0 {
        flips.push((w_x, T::lit(params.penalty)));
    }
    SparseHamiltonian { n_qubits, params, vertex_masks, plaquette_masks, w_z, w_x, flips, diag }
}

/// Builds the Hamiltonian, refusing lattices with more than `qubit_cap` qubits.
pub fn build_hamiltonian<T: Real>(
    geom: &LatticeGeometry,
    params: FieldParams,
    qubit_cap: usize,
) -> Result<SparseHamiltonian<T>> {
    params.validate()?;
    let n = geom.n_qubits();
    let cap = qubit_cap.min(ABSOLUTE_QUBIT_CAP);
    if n > cap {
        return Err(Error::ResourceLimit { n_qubits: n as u64, cap: cap as u64 });
    }
    let lo = geom.logical_operators();
    Ok(assemble(
        n,
        params,
        geom.vertices().iter().map(|v| mask_of(v)).collect(),
        geom.plaquettes().iter().map(|p| mask_of(p)).collect(),
        mask_of(&lo.z_horizontal),
        mask_of(&lo.x_horizontal),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom() -> LatticeGeometry {
        LatticeGeometry::build_torus(2, 2).unwrap()
    }

    #[test]
    fn rejects_oversized_lattice() {
        let g = LatticeGeometry::build_torus(3, 3).unwrap();
        let err = build_hamiltonian::<f64>(&g, FieldParams::new(0.0, 0.0, 0.0).unwrap(), 16).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit { n_qubits: 18, cap: 16 }));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(FieldParams::new(f64::NAN, 0.0, 0.0).is_err());
        assert!(FieldParams::new(0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn dense_matrix_is_symmetric() {
        let h = build_hamiltonian::<f64>(&geom(), FieldParams::new(0.3, 0.7, 1.0).unwrap(), 24).unwrap();
        let m = h.to_dense();
        assert_eq!(m, m.transpose());
    }

    #[test]
    fn apply_matches_dense() {
        let h = build_hamiltonian::<f64>(&geom(), FieldParams::new(0.4, 0.2, 0.5).unwrap(), 24).unwrap();
        let x: Vec<f64> = (0..h.dim()).map(|i| ((i * 37 % 11) as f64) - 5.0).collect();
        let mut y = vec![0.0; h.dim()];
        h.apply(&x, &mut y);
        let dense = h.to_dense() * nalgebra::DVector::from_vec(x);
        for (a, b) in y.iter().zip(dense.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_field_dense_spectrum() {
        // Independent check on the smallest torus: 8 stabilizers, 2 of them redundant.
        let h = build_hamiltonian::<f64>(&geom(), FieldParams::new(0.0, 0.0, 0.0).unwrap(), 24).unwrap();
        let mut ev: Vec<f64> = h.to_dense().symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for e in &ev[..4] {
            assert!((e + 8.0).abs() < 1e-10);
        }
        assert!(ev[4] > -8.0 + 1.0);
    }
}
