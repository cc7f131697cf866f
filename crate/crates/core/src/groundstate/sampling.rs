//! State vectors, expectation values and snapshot sampling.

use rand::Rng;
use rayon::prelude::*;

use super::hamiltonian::SparseHamiltonian;
use super::lanczos::ordered_sum;
use crate::error::{Error, Result};
use crate::pooling::Basis;
use crate::scalar::Real;

/// Real amplitudes over the `2^n` computational basis states (bit `q` set = `Z_q = -1`).
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T> {
    n_qubits: usize,
    amps: Vec<T>,
}

/// Allowed deviation of `||psi||` from 1.
pub fn norm_tolerance<T: Real>() -> f64 {
    (1e3 * T::epsilon().to_f64_lossy()).max(1e-10)
}

impl<T: Real> StateVector<T> {
    /// Wraps amplitudes, checking the length is a power of two and the norm is 1.
    pub fn new(amps: Vec<T>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::InvalidParameter(format!("{} amplitudes is not a power of two", amps.len())));
        }
        let n = super::lanczos::norm(&amps);
        if (n - 1.0).abs() > norm_tolerance::<T>() {
            return Err(Error::InvalidParameter(format!("state norm {n} is not 1")));
        }
        Ok(Self { n_qubits: amps.len().trailing_zeros() as usize, amps })
    }

    /// Normalises arbitrary nonzero amplitudes.
    pub fn normalized(mut amps: Vec<T>) -> Result<Self> {
        if super::lanczos::normalize(&mut amps) == 0.0 {
            return Err(Error::InvalidParameter("zero vector".into()));
        }
        Self::new(amps)
    }

    pub fn basis_state(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![T::zero(); 1 << n_qubits];
        amps[index] = T::one();
        Self { n_qubits, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[T] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<T> {
        self.amps
    }

    /// `<psi| prod_{q in mask} Z_q |psi>`.
    pub fn expect_z_string(&self, mask: u64) -> f64 {
        ordered_sum(self.amps.len(), |s| {
            let p = self.amps[s].to_f64_lossy().powi(2);
            if (s as u64 & mask).count_ones().is_multiple_of(2) {
                p
            } else {
                -p
            }
        })
    }

    /// `<psi| prod_{q in mask} X_q |psi>`.
    pub fn expect_x_string(&self, mask: u64) -> f64 {
        ordered_sum(self.amps.len(), |s| self.amps[s].to_f64_lossy() * self.amps[s ^ mask as usize].to_f64_lossy())
    }

    /// `<psi|H|psi>`.
    pub fn energy(&self, h: &SparseHamiltonian<T>) -> Result<f64> {
        if h.dim() != self.amps.len() {
            return Err(Error::SizeMismatch { expected: h.dim(), actual: self.amps.len() });
        }
        let mut hx = vec![T::zero(); self.amps.len()];
        h.apply(&self.amps, &mut hx);
        Ok(ordered_sum(hx.len(), |s| self.amps[s].to_f64_lossy() * hx[s].to_f64_lossy()))
    }

    /// `||H psi - e psi||` with `e = <psi|H|psi>`.
    pub fn residual(&self, h: &SparseHamiltonian<T>) -> Result<f64> {
        let e = self.energy(h)?;
        let mut hx = vec![T::zero(); self.amps.len()];
        h.apply(&self.amps, &mut hx);
        Ok(ordered_sum(hx.len(), |s| (hx[s].to_f64_lossy() - e * self.amps[s].to_f64_lossy()).powi(2)).sqrt())
    }

    /// Amplitudes in the X eigenbasis (bit `q` set = `X_q = -1`).
    pub fn hadamard_all(&self) -> Vec<T> {
        let mut v = self.amps.clone();
        let r = T::lit(std::f64::consts::FRAC_1_SQRT_2);
        let mut h = 1;
        while h < v.len() {
            v.par_chunks_mut(2 * h).for_each(|chunk| {
                let (lo, hi) = chunk.split_at_mut(h);
                for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = (x + y) * r;
                    *b = (x - y) * r;
                }
            });
            h *= 2;
        }
        v
    }
}

/// Inverse-CDF sampler over one measurement basis.
#[derive(Clone, Debug)]
pub struct SnapshotSampler {
    n_qubits: usize,
    cdf: Vec<f64>,
}

impl SnapshotSampler {
    pub fn new<T: Real>(state: &StateVector<T>, basis: Basis) -> Self {
        let amps = match basis {
            Basis::Z => state.amps.clone(),
            Basis::X => state.hadamard_all(),
        };
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = amps
            .iter()
            .map(|&a| {
                acc += a.to_f64_lossy().powi(2);
                acc
            })
            .collect();
        let total = acc;
        cdf.iter_mut().for_each(|c| *c /= total);
        Self { n_qubits: state.n_qubits, cdf }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Draws one outcome as a basis index.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        let i = self.cdf.partition_point(|&c| c <= u);
        if i < self.cdf.len() {
            return i as u64;
        }
        // u beyond the rounded total: fall back to the last outcome with weight.
        let last = self.cdf[self.cdf.len() - 1];
        let i = self.cdf.partition_point(|&c| c < last);
        i as u64
    }

    /// Draws one outcome as per-qubit bits.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<bool> {
        index_to_bits(self.sample_index(rng), self.n_qubits)
    }
}

pub fn index_to_bits(index: u64, n_qubits: usize) -> Vec<bool> {
    (0..n_qubits).map(|q| (index >> q) & 1 == 1).collect()
}

/// `n` i.i.d. snapshots of `state` measured in `basis`.
pub fn sample_snapshots<T: Real, R: Rng + ?Sized>(
    state: &StateVector<T>,
    basis: Basis,
    n: usize,
    rng: &mut R,
) -> Vec<Vec<bool>> {
    let sampler = SnapshotSampler::new(state, basis);
    (0..n).map(|_| sampler.sample(rng)).collect()
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn zero_state_snapshots() {
        let s = StateVector::<f64>::basis_state(5, 0);
        let snaps = sample_snapshots(&s, Basis::Z, 50, &mut ChaCha8Rng::seed_from_u64(3));
        assert!(snaps.iter().all(|b| b.iter().all(|&x| !x)));
    }

    #[test]
    fn plus_state_is_zero_in_x_basis() {
        let amps = vec![0.5f64; 4];
        let s = StateVector::new(amps).unwrap();
        let snaps = sample_snapshots(&s, Basis::X, 50, &mut ChaCha8Rng::seed_from_u64(3));
        assert!(snaps.iter().all(|b| b.iter().all(|&x| !x)));
    }

    #[test]
    fn hadamard_is_involution() {
        let s = StateVector::<f64>::normalized((0..16).map(|i| (i as f64).sin()).collect()).unwrap();
        let back = StateVector::new(s.hadamard_all()).unwrap().hadamard_all();
        for (a, b) in back.iter().zip(s.amplitudes()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_frequencies_match_probabilities() {
        let amps = vec![0.6f64, 0.0, 0.0, 0.8];
        let s = StateVector::new(amps).unwrap();
        let sampler = SnapshotSampler::new(&s, Basis::Z);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 20_000;
        let hits = (0..n).filter(|_| sampler.sample_index(&mut rng) == 3).count() as f64 / n as f64;
        // 0.64 +- 5 sigma
        assert!((hits - 0.64).abs() < 5.0 * (0.64f64 * 0.36 / n as f64).sqrt());
        assert!((0..1000).all(|_| matches!(sampler.sample_index(&mut rng), 0 | 3)));
    }

    #[test]
    fn rejects_unnormalised() {
        assert!(StateVector::new(vec![1.0f64, 1.0]).is_err());
        assert!(StateVector::new(vec![1.0f64, 0.0, 0.0]).is_err());
        assert!(StateVector::<f64>::normalized(vec![0.0; 4]).is_err());
    }

    #[test]
    fn string_expectations() {
        // |psi> = (|00> + |11>)/sqrt2
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let s = StateVector::new(vec![r, 0.0, 0.0, r]).unwrap();
        assert!((s.expect_z_string(0b11) - 1.0).abs() < 1e-12);
        assert!((s.expect_x_string(0b11) - 1.0).abs() < 1e-12);
        assert!(s.expect_z_string(0b01).abs() < 1e-12);
    }
}
