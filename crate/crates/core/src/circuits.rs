//! Explicit gate sequences for the toric-code preparation circuit and the
//! first convolution layer.
//!
//! The preparation circuit creates each plaquette's X-parity from a
//! representative qubit: Hadamard on the representative, then CNOTs fanning out
//! to the other three edges. Plaquettes are prepared column by column from the
//! left. In every column but the last the representative is the east edge
//! `V(r, c + 1)`; in the last column it is the south edge `H(r + 1, l1 - 1)`, and
//! the bottom-right plaquette is skipped because it is the product of all others.
//!
//! The convolution inverts the preparation and then moves every stabilizer onto
//! one qubit:
//!
//! - plaquette `(r, c)` is read out on `V(r, c + 1)`,
//! - vertex `(r, c)` is read out on `H(r, c - 1)`.
//!
//! Plaquette readouts in the last column and all vertex readouts need extra
//! CNOTs and SWAPs across the periodic boundary. The two corner qubits that end
//! up holding the logical Wilson loops (`V(l2 - 1, 0)` and `H(0, l1 - 1)`) are
//! reset and refilled with the product of all other stabilizers of their kind.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lattice::{LatticeGeometry, StabilizerId, StabilizerKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CircuitOp {
    Hadamard(usize),
    Cnot { control: usize, target: usize },
    Swap(usize, usize),
    /// Return the qubit to `|0>`.
    Reset(usize),
}

impl CircuitOp {
    pub fn cnot(control: usize, target: usize) -> Self {
        CircuitOp::Cnot { control, target }
    }

    fn max_qubit(&self) -> usize {
        match *self {
            CircuitOp::Hadamard(q) | CircuitOp::Reset(q) => q,
            CircuitOp::Cnot { control, target } => control.max(target),
            CircuitOp::Swap(a, b) => a.max(b),
        }
    }
}

impl fmt::Display for CircuitOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CircuitOp::Hadamard(q) => write!(f, "H {q}"),
            CircuitOp::Cnot { control, target } => write!(f, "CNOT {control} {target}"),
            CircuitOp::Swap(a, b) => write!(f, "SWAP {a} {b}"),
            CircuitOp::Reset(q) => write!(f, "RESET {q}"),
        }
    }
}

impl FromStr for CircuitOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let name = parts.next().ok_or_else(|| Error::Parse("empty gate line".into()))?;
        let args: Vec<usize> = parts
            .map(|p| p.parse().map_err(|_| Error::Parse(format!("bad qubit in {s:?}"))))
            .collect::<Result<_>>()?;
        let op = match (name, args.as_slice()) {
            ("H", &[q]) => CircuitOp::Hadamard(q),
            ("CNOT", &[c, t]) if c != t => CircuitOp::cnot(c, t),
            ("SWAP", &[a, b]) => CircuitOp::Swap(a, b),
            ("RESET", &[q]) => CircuitOp::Reset(q),
            _ => return Err(Error::Parse(format!("unrecognized gate line {s:?}"))),
        };
        Ok(op)
    }
}

/// Ordered list of gates on a fixed number of qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateSequence {
    n_qubits: usize,
    ops: Vec<CircuitOp>,
}

impl GateSequence {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, ops: Vec::new() }
    }

    /// Validates qubit ranges and CNOT operands.
    pub fn from_ops(n_qubits: usize, ops: Vec<CircuitOp>) -> Result<Self> {
        let mut seq = Self::new(n_qubits);
        for op in ops {
            seq.try_push(op)?;
        }
        Ok(seq)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[CircuitOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn contains_reset(&self) -> bool {
        self.ops.iter().any(|op| matches!(op, CircuitOp::Reset(_)))
    }

    pub fn try_push(&mut self, op: CircuitOp) -> Result<()> {
        if op.max_qubit() >= self.n_qubits {
            return Err(Error::InvalidCircuit(format!(
                "{op} addresses a qubit outside 0..{}",
                self.n_qubits
            )));
        }
        if let CircuitOp::Cnot { control, target } = op {
            if control == target {
                return Err(Error::InvalidCircuit(format!("{op} has control == target")));
            }
        }
        self.ops.push(op);
        Ok(())
    }

    fn push(&mut self, op: CircuitOp) {
        self.try_push(op).expect("generated gate must be valid");
    }

    /// Appends all gates of `other`.
    pub fn extend_from(&mut self, other: &GateSequence) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::SizeMismatch { expected: self.n_qubits, actual: other.n_qubits });
        }
        self.ops.extend_from_slice(&other.ops);
        Ok(())
    }

    /// Removes the gate at `index`. Used for mutation tests of the oracles.
    pub fn remove(&mut self, index: usize) -> CircuitOp {
        self.ops.remove(index)
    }

    /// Parses the line-oriented text produced by `Display`. Blank lines and `#`
    /// comments are skipped.
    pub fn parse_text(n_qubits: usize, text: &str) -> Result<Self> {
        let ops = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        Self::from_ops(n_qubits, ops)
    }
}

impl fmt::Display for GateSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for op in &self.ops {
            writeln!(f, "{op}")?;
        }
        Ok(())
    }
}

/// Reverses a reset-free sequence. H, CNOT and SWAP are their own inverses.
pub fn invert_sequence(seq: &GateSequence) -> Result<GateSequence> {
    if seq.contains_reset() {
        return Err(Error::InvalidCircuit("cannot invert a sequence containing RESET".into()));
    }
    Ok(GateSequence { n_qubits: seq.n_qubits, ops: seq.ops.iter().rev().copied().collect() })
}

/// A plaquette together with the qubit that carries its X-parity during preparation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Representative {
    pub plaquette: StabilizerId,
    pub qubit: usize,
}

/// Plaquettes in preparation order with their representative qubits.
pub fn representatives(geom: &LatticeGeometry) -> Vec<Representative> {
    let (l1, l2) = (geom.l1(), geom.l2());
    let mut reps = Vec::with_capacity(l1 * l2 - 1);
    for c in 0..l1 {
        for r in 0..l2 {
            let qubit = if c + 1 < l1 {
                geom.v(r, c + 1)
            } else if r + 1 < l2 {
                geom.h(r + 1, c)
            } else {
                continue;
            };
            reps.push(Representative { plaquette: StabilizerId::plaquette(r, c), qubit });
        }
    }
    reps
}

/// Checks that representatives are distinct edges of their own plaquette and have
/// not been touched by any earlier plaquette.
fn validate_representatives(geom: &LatticeGeometry, reps: &[Representative]) -> Result<()> {
    let mut touched = vec![false; geom.n_qubits()];
    for rep in reps {
        let edges = geom.plaquette_qubits(rep.plaquette);
        if !edges.contains(&rep.qubit) {
            return Err(Error::InvalidLattice(format!(
                "representative {} is not an edge of {:?}",
                rep.qubit, rep.plaquette
            )));
        }
        if touched[rep.qubit] {
            return Err(Error::InvalidLattice(format!(
                "representative {} of {:?} was entangled earlier",
                rep.qubit, rep.plaquette
            )));
        }
        for q in edges {
            touched[q] = true;
        }
    }
    if reps.len() + 1 != geom.n_cells() {
        return Err(Error::InvalidLattice("representatives do not cover l1*l2 - 1 plaquettes".into()));
    }
    Ok(())
}

/// Builds `U_prep`, which maps `|0...0>` to a toric-code ground state.
pub fn build_prep_circuit(geom: &LatticeGeometry) -> Result<GateSequence> {
    let reps = representatives(geom);
    validate_representatives(geom, &reps)?;
    let mut seq = GateSequence::new(geom.n_qubits());
    for rep in &reps {
        seq.push(CircuitOp::Hadamard(rep.qubit));
        // plaquette_qubits is [N, W, S, E]
        for q in geom.plaquette_qubits(rep.plaquette) {
            if q != rep.qubit {
                seq.push(CircuitOp::cnot(rep.qubit, q));
            }
        }
    }
    Ok(seq)
}

/// Builds the convolution `U_C^(0)`: inverse preparation, vertex mapping, boundary
/// swaps, corner resets and the corner CNOT fans.
pub fn build_convolution(geom: &LatticeGeometry) -> Result<GateSequence> {
    let prep = build_prep_circuit(geom)?;
    let mut seq = invert_sequence(&prep)?;
    let (l1, l2) = (geom.l1(), geom.l2());

    // After the inverse preparation V(k, 0) holds the Z loop along row k and
    // H(k + 1, 0) the product of the vertices (k + 1, 1..l1). Combine them into
    // vertex (k + 1, 0).
    for k in 0..l2 - 1 {
        seq.push(CircuitOp::cnot(geom.v(k + 1, 0), geom.v(k, 0)));
        seq.push(CircuitOp::cnot(geom.h(k + 1, 0), geom.v(k, 0)));
    }

    // H(r, c) holds the product of vertices (r, c+1..l1); peel off one vertex
    // each. Row 0 additionally strips the vertical Wilson loop held by H(0, l1-1).
    for r in 0..l2 {
        for c in 0..l1.saturating_sub(2) {
            seq.push(CircuitOp::cnot(geom.h(r, c + 1), geom.h(r, c)));
        }
    }
    seq.push(CircuitOp::cnot(geom.h(0, l1 - 1), geom.h(0, l1 - 2)));

    // Restore translation symmetry across the periodic edge.
    for r in 1..l2 {
        seq.push(CircuitOp::Swap(geom.h(r, l1 - 1), geom.v(r - 1, 0)));
    }

    let v_corner = geom.v(l2 - 1, 0);
    let h_corner = geom.h(0, l1 - 1);
    seq.push(CircuitOp::Reset(v_corner));
    seq.push(CircuitOp::Reset(h_corner));
    for r in 0..l2 {
        for c in 0..l1 {
            let q = geom.v(r, c);
            if q != v_corner {
                seq.push(CircuitOp::cnot(q, v_corner));
            }
        }
    }
    for r in 0..l2 {
        for c in 0..l1 {
            let q = geom.h(r, c);
            if q != h_corner {
                seq.push(CircuitOp::cnot(q, h_corner));
            }
        }
    }
    Ok(seq)
}

/// Qubit whose Z measurement after the convolution reports stabilizer `id`.
pub fn readout_qubit(geom: &LatticeGeometry, id: StabilizerId) -> usize {
    match id.kind {
        StabilizerKind::Plaquette => geom.v(id.row, id.col + 1),
        StabilizerKind::Vertex => geom.h(id.row, id.col + geom.l1() - 1),
    }
}

/// Splits post-convolution measurement bits into `(plaquette, vertex)` cell
/// vectors, both indexed by flat cell index.
pub fn readout_grids(geom: &LatticeGeometry, bits: &[bool]) -> Result<(Vec<bool>, Vec<bool>)> {
    if bits.len() != geom.n_qubits() {
        return Err(Error::SizeMismatch { expected: geom.n_qubits(), actual: bits.len() });
    }
    let mut plaq = Vec::with_capacity(geom.n_cells());
    let mut vert = Vec::with_capacity(geom.n_cells());
    for r in 0..geom.l2() {
        for c in 0..geom.l1() {
            plaq.push(bits[readout_qubit(geom, StabilizerId::plaquette(r, c))]);
            vert.push(bits[readout_qubit(geom, StabilizerId::vertex(r, c))]);
        }
    }
    Ok((plaq, vert))
}
