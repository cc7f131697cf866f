//! Stabilizer tableau simulator (destabilizer/stabilizer form with phase bits).
//!
//! This is the exact oracle for the circuit identities: it never tracks
//! amplitudes, and deterministic measurement outcomes are read off the
//! destabilizers without collapsing anything.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuits::{build_convolution, build_prep_circuit, CircuitOp, GateSequence};
use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::pauli_frame::{Pauli, PauliFrame};

/// `2n + 1` generator rows (destabilizers, stabilizers, scratch) over `n` qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<bool>,
}

#[inline]
fn bit(q: usize) -> (usize, u64) {
    (q / 64, 1u64 << (q % 64))
}

impl Tableau {
    /// The state `|0...0>`.
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        let rows = 2 * n + 1;
        let mut t = Self { n, words, x: vec![0; rows * words], z: vec![0; rows * words], r: vec![false; rows] };
        for q in 0..n {
            let (w, m) = bit(q);
            t.x[q * words + w] |= m;
            t.z[(n + q) * words + w] |= m;
        }
        t
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    fn get_x(&self, row: usize, q: usize) -> bool {
        let (w, m) = bit(q);
        self.x[row * self.words + w] & m != 0
    }

    #[inline]
    fn get_z(&self, row: usize, q: usize) -> bool {
        let (w, m) = bit(q);
        self.z[row * self.words + w] & m != 0
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(Error::InvalidCircuit(format!("qubit {q} outside 0..{}", self.n)));
        }
        Ok(())
    }

    /// Applies one gate. Reset measures Z (drawing from `rng` if the outcome is
    /// random) and flips the qubit back to `|0>`.
    pub fn apply<R: Rng + ?Sized>(&mut self, op: &CircuitOp, rng: &mut R) -> Result<()> {
        match *op {
            CircuitOp::Hadamard(q) => {
                self.check_qubit(q)?;
                self.hadamard(q);
            }
            CircuitOp::Cnot { control, target } => {
                self.check_qubit(control)?;
                self.check_qubit(target)?;
                if control == target {
                    return Err(Error::InvalidCircuit("CNOT with control == target".into()));
                }
                self.cnot(control, target);
            }
            CircuitOp::Swap(a, b) => {
                self.check_qubit(a)?;
                self.check_qubit(b)?;
                self.swap(a, b);
            }
            CircuitOp::Reset(q) => {
                self.check_qubit(q)?;
                let (outcome, _) = self.measure(q, rng);
                if outcome {
                    self.apply_pauli(q, Pauli::X);
                }
            }
        }
        Ok(())
    }

    pub fn apply_sequence<R: Rng + ?Sized>(&mut self, seq: &GateSequence, rng: &mut R) -> Result<()> {
        if seq.n_qubits() != self.n {
            return Err(Error::SizeMismatch { expected: self.n, actual: seq.n_qubits() });
        }
        for op in seq.ops() {
            self.apply(op, rng)?;
        }
        Ok(())
    }

    fn hadamard(&mut self, q: usize) {
        let (w, m) = bit(q);
        for row in 0..2 * self.n {
            let i = row * self.words + w;
            let (xb, zb) = (self.x[i] & m, self.z[i] & m);
            if xb != 0 && zb != 0 {
                self.r[row] ^= true;
            }
            self.x[i] = (self.x[i] & !m) | zb;
            self.z[i] = (self.z[i] & !m) | xb;
        }
    }

    fn cnot(&mut self, a: usize, b: usize) {
        for row in 0..2 * self.n {
            let (xa, za, xb, zb) = (self.get_x(row, a), self.get_z(row, a), self.get_x(row, b), self.get_z(row, b));
            if xa && zb && (xb == za) {
                self.r[row] ^= true;
            }
            if xa {
                let (w, m) = bit(b);
                self.x[row * self.words + w] ^= m;
            }
            if zb {
                let (w, m) = bit(a);
                self.z[row * self.words + w] ^= m;
            }
        }
    }

    fn swap(&mut self, a: usize, b: usize) {
        for row in 0..2 * self.n {
            for plane in [&mut self.x, &mut self.z] {
                let (wa, ma) = bit(a);
                let (wb, mb) = bit(b);
                let va = plane[row * self.words + wa] & ma != 0;
                let vb = plane[row * self.words + wb] & mb != 0;
                if va != vb {
                    plane[row * self.words + wa] ^= ma;
                    plane[row * self.words + wb] ^= mb;
                }
            }
        }
    }

    /// Multiplies a Pauli operator onto the state.
    pub fn apply_pauli(&mut self, q: usize, pauli: Pauli) {
        for row in 0..2 * self.n {
            let flip = match pauli {
                Pauli::I => false,
                Pauli::X => self.get_z(row, q),
                Pauli::Z => self.get_x(row, q),
                Pauli::Y => self.get_x(row, q) ^ self.get_z(row, q),
            };
            self.r[row] ^= flip;
        }
    }

    /// Multiplies a whole Pauli string onto the state.
    pub fn apply_frame(&mut self, frame: &PauliFrame) -> Result<()> {
        if frame.n_qubits() != self.n {
            return Err(Error::SizeMismatch { expected: self.n, actual: frame.n_qubits() });
        }
        for q in 0..self.n {
            let p = frame.get(q);
            if p != Pauli::I {
                self.apply_pauli(q, p);
            }
        }
        Ok(())
    }

    /// Row `h` <- row `i` * row `h`, tracking the phase.
    fn rowsum(&mut self, h: usize, i: usize) {
        let w = self.words;
        let mut plus = 0u32;
        let mut minus = 0u32;
        for k in 0..w {
            let (x1, z1) = (self.x[i * w + k], self.z[i * w + k]);
            let (x2, z2) = (self.x[h * w + k], self.z[h * w + k]);
            let y1 = x1 & z1;
            let xo = x1 & !z1;
            let zo = !x1 & z1;
            plus += ((y1 & z2 & !x2) | (xo & z2 & x2) | (zo & x2 & !z2)).count_ones();
            minus += ((y1 & x2 & !z2) | (xo & z2 & !x2) | (zo & x2 & z2)).count_ones();
        }
        let total = 2 * (self.r[h] as i64) + 2 * (self.r[i] as i64) + plus as i64 - minus as i64;
        self.r[h] = total.rem_euclid(4) == 2;
        for k in 0..w {
            self.x[h * w + k] ^= self.x[i * w + k];
            self.z[h * w + k] ^= self.z[i * w + k];
        }
    }

    fn clear_row(&mut self, row: usize) {
        let w = self.words;
        self.x[row * w..(row + 1) * w].fill(0);
        self.z[row * w..(row + 1) * w].fill(0);
        self.r[row] = false;
    }

    fn copy_row(&mut self, dst: usize, src: usize) {
        let w = self.words;
        self.x.copy_within(src * w..(src + 1) * w, dst * w);
        self.z.copy_within(src * w..(src + 1) * w, dst * w);
        self.r[dst] = self.r[src];
    }

    /// Outcome of a Z measurement on `q` if it is deterministic. Does not change the state.
    pub fn peek_z(&mut self, q: usize) -> Option<bool> {
        let n = self.n;
        if (n..2 * n).any(|row| self.get_x(row, q)) {
            return None;
        }
        let scratch = 2 * n;
        self.clear_row(scratch);
        for i in 0..n {
            if self.get_x(i, q) {
                self.rowsum(scratch, i + n);
            }
        }
        Some(self.r[scratch])
    }

    /// Measures Z on `q`, returning `(outcome, deterministic)`.
    pub fn measure<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> (bool, bool) {
        let n = self.n;
        let Some(p) = (n..2 * n).find(|&row| self.get_x(row, q)) else {
            let outcome = self.peek_z(q).expect("no stabilizer anticommutes with Z_q");
            return (outcome, true);
        };
        for i in 0..2 * n {
            if i != p && self.get_x(i, q) {
                self.rowsum(i, p);
            }
        }
        self.copy_row(p - n, p);
        self.clear_row(p);
        let (w, m) = bit(q);
        self.z[p * self.words + w] |= m;
        let outcome = rng.random::<bool>();
        self.r[p] = outcome;
        (outcome, false)
    }

    /// Measures every qubit in the Z basis, in index order.
    pub fn measure_all<R: Rng + ?Sized>(&mut self, rng: &mut R) -> (Vec<bool>, Vec<bool>) {
        (0..self.n).map(|q| self.measure(q, rng)).unzip()
    }

    /// Eigenvalue bit of a Hermitian Pauli string (`Y` where both masks are set),
    /// or `None` when the outcome would be random.
    pub fn expectation_bit(&mut self, observable: &PauliFrame) -> Result<Option<bool>> {
        if observable.n_qubits() != self.n {
            return Err(Error::SizeMismatch { expected: self.n, actual: observable.n_qubits() });
        }
        let n = self.n;
        let anticommutes = |t: &Tableau, row: usize| -> bool {
            let mut parity = false;
            for q in observable.x_mask().iter_ones() {
                parity ^= t.get_z(row, q);
            }
            for q in observable.z_mask().iter_ones() {
                parity ^= t.get_x(row, q);
            }
            parity
        };
        if (n..2 * n).any(|row| anticommutes(self, row)) {
            return Ok(None);
        }
        let scratch = 2 * n;
        self.clear_row(scratch);
        for i in 0..n {
            if anticommutes(self, i) {
                self.rowsum(scratch, i + n);
            }
        }
        debug_assert!((0..n).all(|q| {
            self.get_x(scratch, q) == observable.x_mask()[q] && self.get_z(scratch, q) == observable.z_mask()[q]
        }));
        Ok(Some(self.r[scratch]))
    }

    /// Checks the symplectic structure: stabilizers commute pairwise, destabilizer
    /// `i` anticommutes only with stabilizer `i`, destabilizers commute pairwise.
    pub fn is_valid(&self) -> bool {
        let n = self.n;
        let w = self.words;
        let sym = |a: usize, b: usize| -> bool {
            let mut c = 0u32;
            for k in 0..w {
                c += (self.x[a * w + k] & self.z[b * w + k]).count_ones();
                c += (self.z[a * w + k] & self.x[b * w + k]).count_ones();
            }
            c % 2 == 1
        };
        for i in 0..n {
            for j in 0..n {
                if sym(n + i, n + j) || sym(i, j) || sym(i, n + j) != (i == j) {
                    return false;
                }
            }
        }
        true
    }
}

/// Result of running the preparation and the convolution on `|0...0>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityReport {
    /// Qubits whose final outcome was random.
    pub random: Vec<usize>,
    /// Qubits that deterministically read 1.
    pub ones: Vec<usize>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.random.is_empty() && self.ones.is_empty()
    }
}

fn oracle_rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_7ab1_ea00)
}

/// Runs `prep`, then optionally an error, then `conv`, and measures everything.
pub fn run_prepared(
    prep: &GateSequence,
    error: Option<&PauliFrame>,
    conv: &GateSequence,
) -> Result<(Vec<bool>, Vec<bool>)> {
    let mut rng = oracle_rng();
    let mut tab = Tableau::new(prep.n_qubits());
    tab.apply_sequence(prep, &mut rng)?;
    if let Some(e) = error {
        tab.apply_frame(e)?;
    }
    tab.apply_sequence(conv, &mut rng)?;
    Ok(tab.measure_all(&mut rng))
}

/// Checks that the convolution maps the prepared ground state to `|0...0>`.
pub fn verify_identity_with(prep: &GateSequence, conv: &GateSequence) -> Result<IdentityReport> {
    let (outcomes, deterministic) = run_prepared(prep, None, conv)?;
    let random = (0..outcomes.len()).filter(|&q| !deterministic[q]).collect();
    let ones = (0..outcomes.len()).filter(|&q| deterministic[q] && outcomes[q]).collect();
    Ok(IdentityReport { random, ones })
}

pub fn verify_convolution_identity(geom: &LatticeGeometry) -> Result<IdentityReport> {
    verify_identity_with(&build_prep_circuit(geom)?, &build_convolution(geom)?)
}

/// Measurement flips caused by an error injected between preparation and convolution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyndromeMapReport {
    pub flips: Vec<usize>,
    pub random: Vec<usize>,
}

/// Convenience wrapper holding the two circuits for repeated oracle runs.
pub struct ConvolutionOracle {
    prepared: Tableau,
    conv: GateSequence,
}

impl ConvolutionOracle {
    pub fn new(geom: &LatticeGeometry) -> Result<Self> {
        let prep = build_prep_circuit(geom)?;
        let mut prepared = Tableau::new(geom.n_qubits());
        prepared.apply_sequence(&prep, &mut oracle_rng())?;
        Ok(Self { prepared, conv: build_convolution(geom)? })
    }

    pub fn with_circuits(prep: &GateSequence, conv: GateSequence) -> Result<Self> {
        let mut prepared = Tableau::new(prep.n_qubits());
        prepared.apply_sequence(prep, &mut oracle_rng())?;
        Ok(Self { prepared, conv })
    }

    /// Injects `error` on the prepared state, runs the convolution and measures.
    pub fn syndrome_map(&self, error: &PauliFrame) -> Result<SyndromeMapReport> {
        let mut rng = oracle_rng();
        let mut tab = self.prepared.clone();
        tab.apply_frame(error)?;
        tab.apply_sequence(&self.conv, &mut rng)?;
        let (outcomes, deterministic) = tab.measure_all(&mut rng);
        Ok(SyndromeMapReport {
            flips: (0..outcomes.len()).filter(|&q| deterministic[q] && outcomes[q]).collect(),
            random: (0..outcomes.len()).filter(|&q| !deterministic[q]).collect(),
        })
    }

    /// The prepared (pre-convolution) state.
    pub fn prepared(&self) -> &Tableau {
        &self.prepared
    }
}

/// Flipped measurement bits for an error injected after preparation.
pub fn check_syndrome_map(geom: &LatticeGeometry, error: &PauliFrame) -> Result<SyndromeMapReport> {
    ConvolutionOracle::new(geom)?.syndrome_map(error)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::StabilizerId;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(1)
    }

    #[test]
    fn zero_state_measures_zero() {
        let mut t = Tableau::new(5);
        let (out, det) = t.measure_all(&mut rng());
        assert!(out.iter().all(|&b| !b));
        assert!(det.iter().all(|&d| d));
    }

    #[test]
    fn hadamard_gives_random_outcome() {
        let mut t = Tableau::new(1);
        t.apply(&CircuitOp::Hadamard(0), &mut rng()).unwrap();
        assert_eq!(t.peek_z(0), None);
        let (_, det) = t.measure(0, &mut rng());
        assert!(!det);
        // collapsed: repeated measurement is deterministic
        assert!(t.peek_z(0).is_some());
    }

    #[test]
    fn cnot_on_zero_is_trivial() {
        let mut t = Tableau::new(2);
        t.apply(&CircuitOp::cnot(0, 1), &mut rng()).unwrap();
        assert_eq!(t.measure_all(&mut rng()), (vec![false, false], vec![true, true]));
    }

    #[test]
    fn bell_pair_correlations() {
        let mut t = Tableau::new(2);
        let mut r = rng();
        t.apply(&CircuitOp::Hadamard(0), &mut r).unwrap();
        t.apply(&CircuitOp::cnot(0, 1), &mut r).unwrap();
        let zz = PauliFrame::z_string(2, &[0, 1]);
        let xx = PauliFrame::x_string(2, &[0, 1]);
        assert_eq!(t.expectation_bit(&zz).unwrap(), Some(false));
        assert_eq!(t.expectation_bit(&xx).unwrap(), Some(false));
        let mut yy = PauliFrame::identity(2);
        yy.set(0, Pauli::Y);
        yy.set(1, Pauli::Y);
        // YY = -(XX)(ZZ) on the Bell state
        assert_eq!(t.expectation_bit(&yy).unwrap(), Some(true));
        let (out, det) = t.measure_all(&mut r);
        assert_eq!(det, vec![false, true]);
        assert_eq!(out[0], out[1]);
    }

    #[test]
    fn reset_after_x() {
        let mut t = Tableau::new(1);
        t.apply_pauli(0, Pauli::X);
        assert_eq!(t.peek_z(0), Some(true));
        t.apply(&CircuitOp::Reset(0), &mut rng()).unwrap();
        assert_eq!(t.peek_z(0), Some(false));
    }

    #[test]
    fn swap_moves_excitation() {
        let mut t = Tableau::new(3);
        t.apply_pauli(0, Pauli::X);
        t.apply(&CircuitOp::Swap(0, 2), &mut rng()).unwrap();
        assert_eq!((t.peek_z(0), t.peek_z(2)), (Some(false), Some(true)));
    }

    #[test]
    fn rejects_out_of_range() {
        let mut t = Tableau::new(2);
        assert!(t.apply(&CircuitOp::Hadamard(2), &mut rng()).is_err());
    }

    #[test]
    fn symplectic_form_preserved_through_convolution() {
        let g = LatticeGeometry::build_torus(3, 3).unwrap();
        let mut t = Tableau::new(18);
        let mut r = rng();
        for op in build_prep_circuit(&g).unwrap().ops().iter().chain(build_convolution(&g).unwrap().ops()) {
            t.apply(op, &mut r).unwrap();
            assert!(t.is_valid(), "after {op}");
        }
    }

    #[test]
    fn prepared_state_is_stabilized() {
        for l in [3, 4, 9] {
            let g = LatticeGeometry::build_torus(l, l).unwrap();
            let mut t = Tableau::new(g.n_qubits());
            t.apply_sequence(&build_prep_circuit(&g).unwrap(), &mut rng()).unwrap();
            for r in 0..l {
                for c in 0..l {
                    let a = PauliFrame::x_string(g.n_qubits(), &g.plaquette_qubits(StabilizerId::plaquette(r, c)));
                    let b = PauliFrame::z_string(g.n_qubits(), &g.vertex_qubits(StabilizerId::vertex(r, c)));
                    assert_eq!(t.expectation_bit(&a).unwrap(), Some(false));
                    assert_eq!(t.expectation_bit(&b).unwrap(), Some(false));
                }
            }
            let lo = g.logical_operators();
            // Wilson loops are fixed at +1, 't Hooft loops are undetermined
            assert_eq!(t.expectation_bit(&PauliFrame::z_string(g.n_qubits(), &lo.z_horizontal)).unwrap(), Some(false));
            assert_eq!(t.expectation_bit(&PauliFrame::z_string(g.n_qubits(), &lo.z_vertical)).unwrap(), Some(false));
            assert_eq!(t.expectation_bit(&PauliFrame::x_string(g.n_qubits(), &lo.x_horizontal)).unwrap(), None);
        }
    }

    #[test]
    fn prep_then_inverse_is_identity() {
        let g = LatticeGeometry::build_torus(4, 4).unwrap();
        let prep = build_prep_circuit(&g).unwrap();
        let inv = crate::circuits::invert_sequence(&prep).unwrap();
        assert!(verify_identity_with(&prep, &inv).unwrap().passed());
    }

    #[test]
    fn convolution_identity_small() {
        for (l1, l2) in [(3, 3), (4, 4), (3, 5), (6, 4)] {
            let g = LatticeGeometry::build_torus(l1, l2).unwrap();
            let rep = verify_convolution_identity(&g).unwrap();
            assert!(rep.passed(), "{l1}x{l2}: {rep:?}");
        }
    }

    #[test]
    fn deleted_cnot_breaks_identity() {
        let g = LatticeGeometry::build_torus(3, 3).unwrap();
        let prep = build_prep_circuit(&g).unwrap();
        let mut conv = build_convolution(&g).unwrap();
        let idx = conv.ops().iter().position(|op| matches!(op, CircuitOp::Cnot { .. })).unwrap();
        conv.remove(idx);
        assert!(!verify_identity_with(&prep, &conv).unwrap().passed());
    }
}
