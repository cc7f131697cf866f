//! Pauli strings as X/Z bit masks, the independent X/Z noise channel, and
//! conjugation through Clifford gate sequences.
//!
//! Phases are dropped throughout. Only the X component of a frame decides which
//! Z-basis measurements flip, so the sign of the string never matters here.

use bitvec::prelude::*;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuits::{CircuitOp, GateSequence};
use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::pooling::{Basis, SyndromeGrid};

pub type Mask = BitVec<u64, Lsb0>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }
}

/// A Pauli string on `n` qubits: X on `q` iff `x[q]`, Z iff `z[q]`, Y iff both.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliFrame {
    x: Mask,
    z: Mask,
}

impl PauliFrame {
    pub fn identity(n_qubits: usize) -> Self {
        Self { x: bitvec![u64, Lsb0; 0; n_qubits], z: bitvec![u64, Lsb0; 0; n_qubits] }
    }

    pub fn from_masks(x: Mask, z: Mask) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::SizeMismatch { expected: x.len(), actual: z.len() });
        }
        Ok(Self { x, z })
    }

    pub fn single(n_qubits: usize, qubit: usize, pauli: Pauli) -> Self {
        let mut frame = Self::identity(n_qubits);
        frame.set(qubit, pauli);
        frame
    }

    /// X on every listed qubit.
    pub fn x_string(n_qubits: usize, qubits: &[usize]) -> Self {
        let mut frame = Self::identity(n_qubits);
        for &q in qubits {
            frame.x.set(q, true);
        }
        frame
    }

    /// Z on every listed qubit.
    pub fn z_string(n_qubits: usize, qubits: &[usize]) -> Self {
        let mut frame = Self::identity(n_qubits);
        for &q in qubits {
            frame.z.set(q, true);
        }
        frame
    }

    pub fn n_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn x_mask(&self) -> &Mask {
        &self.x
    }

    pub fn z_mask(&self) -> &Mask {
        &self.z
    }

    pub fn get(&self, q: usize) -> Pauli {
        match (self.x[q], self.z[q]) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn set(&mut self, q: usize, pauli: Pauli) {
        let (x, z) = pauli.bits();
        self.x.set(q, x);
        self.z.set(q, z);
    }

    pub fn is_identity(&self) -> bool {
        self.x.not_any() && self.z.not_any()
    }

    /// Number of non-identity positions.
    pub fn weight(&self) -> usize {
        (self.x.clone() | &self.z).count_ones()
    }

    /// Multiplies `other` into `self` (XOR of masks, phase dropped).
    pub fn compose(&mut self, other: &PauliFrame) {
        self.x ^= &other.x;
        self.z ^= &other.z;
    }

    /// Symplectic product: true when the two strings anticommute.
    pub fn anticommutes(&self, other: &PauliFrame) -> bool {
        let a = (self.x.clone() & &other.z).count_ones();
        let b = (self.z.clone() & &other.x).count_ones();
        (a + b) % 2 == 1
    }

    /// Conjugates the frame by one gate: `P -> U P U^dagger`. Reset clears both bits.
    pub fn apply_op(&mut self, op: &CircuitOp) {
        match *op {
            CircuitOp::Hadamard(q) => {
                let (x, z) = (self.x[q], self.z[q]);
                self.x.set(q, z);
                self.z.set(q, x);
            }
            CircuitOp::Cnot { control, target } => {
                // X copies control -> target, Z copies target -> control
                if self.x[control] {
                    let t = self.x[target];
                    self.x.set(target, !t);
                }
                if self.z[target] {
                    let c = self.z[control];
                    self.z.set(control, !c);
                }
            }
            CircuitOp::Swap(a, b) => {
                self.x.swap(a, b);
                self.z.swap(a, b);
            }
            CircuitOp::Reset(q) => {
                self.x.set(q, false);
                self.z.set(q, false);
            }
        }
    }

    /// Propagates the frame forward through every gate of `seq`.
    pub fn conjugate_through(&self, seq: &GateSequence) -> Result<PauliFrame> {
        if seq.n_qubits() != self.n_qubits() {
            return Err(Error::SizeMismatch { expected: seq.n_qubits(), actual: self.n_qubits() });
        }
        let mut out = self.clone();
        for op in seq.ops() {
            out.apply_op(op);
        }
        Ok(out)
    }

    /// Z-basis measurement outcomes flipped by this frame.
    pub fn measurement_flips(&self) -> Mask {
        self.x.clone()
    }

    /// Stabilizer syndromes of the frame, `(plaquette grid, vertex grid)`.
    ///
    /// A plaquette bit is the parity of Z components on its edges, a vertex bit
    /// the parity of X components.
    pub fn syndromes_direct(&self, geom: &LatticeGeometry) -> Result<(SyndromeGrid, SyndromeGrid)> {
        if self.n_qubits() != geom.n_qubits() {
            return Err(Error::SizeMismatch { expected: geom.n_qubits(), actual: self.n_qubits() });
        }
        let parity = |mask: &Mask, edges: &[usize; 4]| edges.iter().fold(false, |acc, &q| acc ^ mask[q]);
        let plaq = geom.plaquettes().iter().map(|e| parity(&self.z, e)).collect();
        let vert = geom.vertices().iter().map(|e| parity(&self.x, e)).collect();
        Ok((
            SyndromeGrid::from_bits(Basis::X, geom.l2(), geom.l1(), plaq)?,
            SyndromeGrid::from_bits(Basis::Z, geom.l2(), geom.l1(), vert)?,
        ))
    }
}

/// Heisenberg image of the Z measurement on `qubit` at the end of `seq`.
///
/// The returned Pauli string `P` on the input satisfies: the measured bit equals
/// the `P` eigenvalue bit of the input state (for inputs where that is
/// deterministic). Reset qubits contribute a deterministic 0, so their Z support
/// is dropped. Fails if an X component would have to pass backwards through a
/// reset, because the outcome then does not correspond to a Pauli observable.
pub fn measurement_observable(seq: &GateSequence, qubit: usize) -> Result<PauliFrame> {
    let mut obs = PauliFrame::single(seq.n_qubits(), qubit, Pauli::Z);
    for op in seq.ops().iter().rev() {
        if let CircuitOp::Reset(q) = *op {
            if obs.x[q] {
                return Err(Error::InvalidCircuit(format!(
                    "measurement of {qubit} has X support on reset qubit {q}"
                )));
            }
            obs.z.set(q, false);
            continue;
        }
        // H, CNOT and SWAP are self-inverse, so U^dagger P U uses the same rule.
        obs.apply_op(op);
    }
    Ok(obs)
}

/// Independent per-qubit X and Z flips; Y arises when both fire.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    p_x: f64,
    p_z: f64,
}

impl NoiseModel {
    pub fn new(p_x: f64, p_z: f64) -> Result<Self> {
        for (name, value) in [("p_x", p_x), ("p_z", p_z)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidProbability { name, value });
            }
        }
        Ok(Self { p_x, p_z })
    }

    pub fn noiseless() -> Self {
        Self { p_x: 0.0, p_z: 0.0 }
    }

    pub fn p_x(&self) -> f64 {
        self.p_x
    }

    pub fn p_z(&self) -> f64 {
        self.p_z
    }

    /// Probability that a qubit is left untouched.
    pub fn p_identity(&self) -> f64 {
        (1.0 - self.p_x) * (1.0 - self.p_z)
    }
}

/// Calls `f` with every index in `0..n` selected independently with probability `p`.
///
/// Gaps between hits are drawn geometrically, so the cost scales with the number of
/// hits rather than with `n`.
pub fn for_each_bernoulli<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R, mut f: impl FnMut(usize)) {
    if p <= 0.0 || n == 0 {
        return;
    }
    if p >= 1.0 {
        (0..n).for_each(f);
        return;
    }
    let log_keep = (-p).ln_1p();
    let mut pos = 0usize;
    loop {
        let u: f64 = rng.random();
        let gap = ((-u).ln_1p() / log_keep).floor();
        if gap >= (n - pos) as f64 {
            return;
        }
        pos += gap as usize;
        f(pos);
        pos += 1;
        if pos >= n {
            return;
        }
    }
}

/// Draws one noise realisation on `n_qubits` qubits.
///
/// The X and Z parts come from two generators seeded off `rng`, so `rng` advances
/// by a fixed amount and the Z part does not depend on `p_x` (and vice versa).
pub fn sample_noise<R: RngCore>(model: &NoiseModel, n_qubits: usize, rng: &mut R) -> PauliFrame {
    let mut x_rng = ChaCha8Rng::from_rng(rng);
    let mut z_rng = ChaCha8Rng::from_rng(rng);
    let mut frame = PauliFrame::identity(n_qubits);
    for_each_bernoulli(n_qubits, model.p_x, &mut x_rng, |q| frame.x.set(q, true));
    for_each_bernoulli(n_qubits, model.p_z, &mut z_rng, |q| frame.z.set(q, true));
    frame
}

#[cfg(test)]
mod tests {
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::lattice::StabilizerId;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn one(n: usize, ops: Vec<CircuitOp>) -> GateSequence {
        GateSequence::from_ops(n, ops).unwrap()
    }

    #[test]
    fn hadamard_swaps_x_and_z() {
        let f = PauliFrame::single(1, 0, Pauli::Z);
        let out = f.conjugate_through(&one(1, vec![CircuitOp::Hadamard(0)])).unwrap();
        assert_eq!(out.get(0), Pauli::X);
    }

    #[test]
    fn cnot_copies_x_forward_and_z_backward() {
        let seq = one(2, vec![CircuitOp::cnot(0, 1)]);
        let out = PauliFrame::single(2, 0, Pauli::X).conjugate_through(&seq).unwrap();
        assert_eq!((out.get(0), out.get(1)), (Pauli::X, Pauli::X));
        let out = PauliFrame::single(2, 1, Pauli::Z).conjugate_through(&seq).unwrap();
        assert_eq!((out.get(0), out.get(1)), (Pauli::Z, Pauli::Z));
        // X on target and Z on control pass through unchanged
        let out = PauliFrame::single(2, 1, Pauli::X).conjugate_through(&seq).unwrap();
        assert_eq!((out.get(0), out.get(1)), (Pauli::I, Pauli::X));
    }

    #[test]
    fn swap_and_reset() {
        let seq = one(2, vec![CircuitOp::Swap(0, 1)]);
        let out = PauliFrame::single(2, 0, Pauli::Y).conjugate_through(&seq).unwrap();
        assert_eq!((out.get(0), out.get(1)), (Pauli::I, Pauli::Y));
        let seq = one(2, vec![CircuitOp::Reset(1)]);
        assert!(PauliFrame::single(2, 1, Pauli::Y).conjugate_through(&seq).unwrap().is_identity());
    }

    #[test]
    fn size_mismatch_is_reported() {
        let seq = one(3, vec![]);
        assert!(PauliFrame::identity(2).conjugate_through(&seq).is_err());
    }

    #[test]
    fn measurement_flips_follow_x_part() {
        assert!(PauliFrame::single(3, 1, Pauli::Z).measurement_flips().not_any());
        assert!(PauliFrame::single(3, 1, Pauli::X).measurement_flips()[1]);
        let y = PauliFrame::single(3, 2, Pauli::Y).measurement_flips();
        assert_eq!(y.iter_ones().collect::<Vec<_>>(), vec![2]);
    }

    #[test]
    fn direct_syndromes() {
        let g = LatticeGeometry::build_torus(3, 3).unwrap();
        let (p, v) = PauliFrame::identity(18).syndromes_direct(&g).unwrap();
        assert_eq!(p.count_ones() + v.count_ones(), 0);
        for q in 0..g.n_qubits() {
            let (p, v) = PauliFrame::single(18, q, Pauli::Z).syndromes_direct(&g).unwrap();
            assert_eq!((p.count_ones(), v.count_ones()), (2, 0));
            for s in g.plaquettes_of(q) {
                assert!(p.bits()[s]);
            }
            let (p, v) = PauliFrame::single(18, q, Pauli::X).syndromes_direct(&g).unwrap();
            assert_eq!((p.count_ones(), v.count_ones()), (0, 2));
            for s in g.vertices_of(q) {
                assert!(v.bits()[s]);
            }
        }
    }

    #[test]
    fn anticommutation() {
        let x = PauliFrame::single(2, 0, Pauli::X);
        let z = PauliFrame::single(2, 0, Pauli::Z);
        let y = PauliFrame::single(2, 0, Pauli::Y);
        assert!(x.anticommutes(&z));
        assert!(y.anticommutes(&z));
        assert!(!y.anticommutes(&y));
        assert!(!x.anticommutes(&PauliFrame::single(2, 1, Pauli::Z)));
    }

    #[test]
    fn noise_extremes() {
        let mut r = rng(1);
        assert!(sample_noise(&NoiseModel::noiseless(), 100, &mut r).is_identity());
        let f = sample_noise(&NoiseModel::new(0.0, 1.0).unwrap(), 100, &mut r);
        assert!(f.z_mask().all());
        assert!(f.x_mask().not_any());
    }

    #[test]
    fn noise_rejects_bad_probabilities() {
        assert!(NoiseModel::new(-0.1, 0.0).is_err());
        assert!(NoiseModel::new(0.0, 1.5).is_err());
        assert!(NoiseModel::new(f64::NAN, 0.0).is_err());
        let m = NoiseModel::new(0.1, 0.2).unwrap();
        assert!((m.p_identity() - 0.72).abs() < 1e-15);
    }

    #[test]
    fn noise_density_matches_binomial() {
        let n = 1_000_000;
        let p = 0.0228;
        let f = sample_noise(&NoiseModel::new(0.0, p).unwrap(), n, &mut rng(7));
        let k = f.z_mask().count_ones() as f64;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((k - n as f64 * p).abs() < 3.0 * sigma, "count {k}");
    }

    #[test]
    fn z_noise_independent_of_px() {
        let a = sample_noise(&NoiseModel::new(0.0, 0.05).unwrap(), 500, &mut rng(3));
        let b = sample_noise(&NoiseModel::new(0.3, 0.05).unwrap(), 500, &mut rng(3));
        assert_eq!(a.z_mask(), b.z_mask());
    }

    #[test]
    fn observable_of_plain_cnot() {
        let seq = one(2, vec![CircuitOp::cnot(0, 1)]);
        let obs = measurement_observable(&seq, 1).unwrap();
        assert_eq!((obs.get(0), obs.get(1)), (Pauli::Z, Pauli::Z));
        let seq = one(2, vec![CircuitOp::Hadamard(0), CircuitOp::Reset(0)]);
        assert!(measurement_observable(&seq, 0).unwrap().is_identity());
    }

    #[test]
    fn plaquette_stabilizer_frame_has_no_syndrome() {
        let g = LatticeGeometry::build_torus(3, 3).unwrap();
        let p = PauliFrame::x_string(18, &g.plaquette_qubits(StabilizerId::plaquette(1, 2)));
        let (ps, vs) = p.syndromes_direct(&g).unwrap();
        assert_eq!(ps.count_ones() + vs.count_ones(), 0);
    }

    mod props {
        use proptest::prelude::*;

        use super::*;
        use crate::circuits::build_convolution;

        fn frame(n: usize) -> impl Strategy<Value = PauliFrame> {
            (proptest::collection::vec(any::<bool>(), n), proptest::collection::vec(any::<bool>(), n)).prop_map(
                |(x, z)| {
                    PauliFrame::from_masks(x.into_iter().collect(), z.into_iter().collect()).unwrap()
                },
            )
        }

        proptest! {
            #[test]
            fn conjugation_is_linear(a in frame(18), b in frame(18)) {
                let g = LatticeGeometry::build_torus(3, 3).unwrap();
                let conv = build_convolution(&g).unwrap();
                let mut ab = a.clone();
                ab.compose(&b);
                let mut lhs = a.conjugate_through(&conv).unwrap();
                lhs.compose(&b.conjugate_through(&conv).unwrap());
                prop_assert_eq!(lhs, ab.conjugate_through(&conv).unwrap());
            }

            #[test]
            fn direct_syndromes_are_linear(a in frame(18), b in frame(18)) {
                let g = LatticeGeometry::build_torus(3, 3).unwrap();
                let mut ab = a.clone();
                ab.compose(&b);
                let (pa, va) = a.syndromes_direct(&g).unwrap();
                let (pb, vb) = b.syndromes_direct(&g).unwrap();
                let (pab, vab) = ab.syndromes_direct(&g).unwrap();
                let xor = |u: &SyndromeGrid, w: &SyndromeGrid| -> Vec<bool> {
                    u.bits().iter().zip(w.bits()).map(|(p, q)| p ^ q).collect()
                };
                prop_assert_eq!(xor(&pa, &pb), pab.bits().to_vec());
                prop_assert_eq!(xor(&va, &vb), vab.bits().to_vec());
            }
        }
    }
}
