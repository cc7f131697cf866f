//! Exact oracle checks of the circuits and the pooling layers.

use std::time::Instant;

use serde::Serialize;

use crate::circuits::{build_convolution, readout_qubit};
use crate::error::Result;
use crate::lattice::{LatticeGeometry, PoolingSchedule, StabilizerId};
use crate::pauli_frame::{Pauli, PauliFrame};
use crate::pooling::{pool_all, SyndromeGrid};
use crate::stabilizer_sim::{verify_convolution_identity, ConvolutionOracle};

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub mismatches: usize,
    pub seconds: f64,
    pub detail: String,
}

impl std::fmt::Display for CheckResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: {} cases, {} mismatches, {:.2}s{}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.mismatches,
            self.seconds,
            if self.detail.is_empty() { String::new() } else { format!(" ({})", self.detail) }
        )
    }
}

fn finish(name: String, start: Instant, cases: usize, mismatches: usize, detail: String) -> CheckResult {
    CheckResult { name, passed: mismatches == 0, cases, mismatches, seconds: start.elapsed().as_secs_f64(), detail }
}

/// Preparation followed by the convolution gives deterministic all-zero readout.
pub fn check_identity(l: usize) -> Result<CheckResult> {
    let start = Instant::now();
    let geom = LatticeGeometry::build_torus(l, l)?;
    let rep = verify_convolution_identity(&geom)?;
    let bad = rep.random.len() + rep.ones.len();
    let detail = if bad == 0 { String::new() } else { format!("random {:?}, ones {:?}", rep.random, rep.ones) };
    Ok(finish(format!("convolution identity {l}x{l}"), start, geom.n_qubits(), bad, detail))
}

fn grid_to_qubits(geom: &LatticeGeometry, grid: &SyndromeGrid, plaquettes: bool) -> Vec<usize> {
    let l1 = geom.l1();
    grid.bits()
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| {
            let (r, c) = (i / l1, i % l1);
            let id = if plaquettes { StabilizerId::plaquette(r, c) } else { StabilizerId::vertex(r, c) };
            readout_qubit(geom, id)
        })
        .collect()
}

/// Readout flips predicted by the stabilizer oracle, by frame propagation and by the
/// direct parity map, for every single-qubit X and Z error.
pub fn check_syndrome_maps(l: usize) -> Result<CheckResult> {
    let start = Instant::now();
    let geom = LatticeGeometry::build_torus(l, l)?;
    let oracle = ConvolutionOracle::new(&geom)?;
    let conv = build_convolution(&geom)?;
    let n = geom.n_qubits();
    let (mut cases, mut bad) = (0, 0);
    let mut first = String::new();
    for q in 0..n {
        for p in [Pauli::X, Pauli::Z] {
            cases += 1;
            let e = PauliFrame::single(n, q, p);
            let tab = oracle.syndrome_map(&e)?;
            let frame: Vec<usize> = e.conjugate_through(&conv)?.measurement_flips().iter_ones().collect();
            let (pg, vg) = e.syndromes_direct(&geom)?;
            let mut direct = grid_to_qubits(&geom, &pg, true);
            direct.extend(grid_to_qubits(&geom, &vg, false));
            direct.sort_unstable();
            if !tab.random.is_empty() || tab.flips != frame || frame != direct {
                bad += 1;
                if first.is_empty() {
                    first = format!("{p:?} on {q}: oracle {:?} frame {frame:?} direct {direct:?}", tab.flips);
                }
            }
        }
    }
    Ok(finish(format!("syndrome maps {l}x{l}"), start, cases, bad, first))
}

/// The four logical strings leave every readout bit deterministic and unchanged.
pub fn check_logical_erasure(l: usize) -> Result<CheckResult> {
    let start = Instant::now();
    let geom = LatticeGeometry::build_torus(l, l)?;
    let oracle = ConvolutionOracle::new(&geom)?;
    let n = geom.n_qubits();
    let lo = geom.logical_operators();
    let strings = [
        ("Z horizontal", PauliFrame::z_string(n, &lo.z_horizontal)),
        ("Z vertical", PauliFrame::z_string(n, &lo.z_vertical)),
        ("X horizontal", PauliFrame::x_string(n, &lo.x_horizontal)),
        ("X vertical", PauliFrame::x_string(n, &lo.x_vertical)),
    ];
    let mut bad = Vec::new();
    for (name, e) in &strings {
        let rep = oracle.syndrome_map(e)?;
        if !rep.flips.is_empty() || !rep.random.is_empty() {
            bad.push(*name);
        }
    }
    let detail = if bad.is_empty() { String::new() } else { format!("changed: {}", bad.join(", ")) };
    Ok(finish(format!("logical erasure {l}x{l}"), start, strings.len(), bad.len(), detail))
}

/// Every single X or Z input error is removed by the first pooling layer.
pub fn check_single_error_correction(depth: usize) -> Result<CheckResult> {
    let start = Instant::now();
    let side = 3usize.pow(depth as u32);
    let geom = LatticeGeometry::build_torus(side, side)?;
    let schedule = PoolingSchedule::new(depth)?;
    let n = geom.n_qubits();
    let (mut cases, mut bad) = (0, 0);
    let mut first = String::new();
    for q in 0..n {
        for p in [Pauli::X, Pauli::Z] {
            cases += 1;
            let (pg, vg) = PauliFrame::single(n, q, p).syndromes_direct(&geom)?;
            for g in [&pg, &vg] {
                let lz = pool_all(g, &schedule)?;
                let clean = (1..lz.zeros.len()).all(|l| lz.zeros[l] == lz.cells[l]);
                if !clean {
                    bad += 1;
                    if first.is_empty() {
                        first = format!("{p:?} on {q}: zeros {:?} of {:?}", lz.zeros, lz.cells);
                    }
                }
            }
        }
    }
    Ok(finish(format!("single-error correction depth {depth}"), start, cases, bad, first))
}

/// All oracle checks on the `3x3` and `9x9` tori.
pub fn run_all() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for l in [3, 9] {
        out.push(check_identity(l)?);
    }
    out.push(check_syndrome_maps(9)?);
    for l in [3, 9] {
        out.push(check_logical_erasure(l)?);
    }
    out.push(check_single_error_correction(2)?);
    Ok(out)
}
