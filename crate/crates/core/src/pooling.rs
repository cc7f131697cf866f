//! Classical pooling layers and the per-layer readout.
//!
//! Each pooling layer corrects every target cell `t` of the grid with
//!
//! ```text
//! t ^= XOR_{c in N(t)} c                       (CNOT from the four neighbours)
//! t ^= XOR_{c in N(t)} XOR_{n in N(c)\t} c & n   (Toffolis undoing false flips)
//! ```
//!
//! evaluated on the pre-layer bits, and then keeps only the targets, shrinking the
//! side by three. Controls are never targets inside one layer, so the simultaneous
//! update equals applying the gates one after another.
//!
//! [`SyndromeGrid`] is the single-sample form. [`BatchGrid`] stores 64 samples per
//! cell as the bits of a `u64` and runs the same rule with word operations.

use std::fmt;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeGeometry, PoolingLayer, PoolingSchedule};
use crate::scalar::Real;

/// Which stabilizer family a grid holds.
///
/// `X` grids carry plaquette (X-type) stabilizers and come from X-basis
/// snapshots; `Z` grids carry vertex (Z-type) stabilizers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::X => "X",
            Basis::Z => "Z",
        })
    }
}

/// Row-major grid of stabilizer outcomes; `true` marks eigenvalue -1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyndromeGrid {
    basis: Basis,
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl SyndromeGrid {
    pub fn zeros(basis: Basis, side: usize) -> Self {
        Self { basis, rows: side, cols: side, bits: vec![false; side * side] }
    }

    pub fn from_bits(basis: Basis, rows: usize, cols: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != rows * cols {
            return Err(Error::SizeMismatch { expected: rows * cols, actual: bits.len() });
        }
        Ok(Self { basis, rows, cols, bits })
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Side length of a square grid.
    pub fn side(&self) -> Option<usize> {
        (self.rows == self.cols).then_some(self.rows)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[(row % self.rows) * self.cols + col % self.cols]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        let i = (row % self.rows) * self.cols + col % self.cols;
        self.bits[i] = value;
    }

    pub fn toggle(&mut self, index: usize) {
        self.bits[index] ^= true;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

fn check_layer(schedule: &PoolingSchedule, layer: usize, side: Option<usize>) -> Result<&PoolingLayer> {
    let pl = schedule
        .layer(layer)
        .ok_or(Error::LayerOutOfRange { depth: schedule.depth(), layer })?;
    match side {
        Some(s) if s % 3 != 0 => Err(Error::InvalidParameter(format!("grid side {s} is not divisible by 3"))),
        Some(s) if s == pl.side => Ok(pl),
        Some(s) => Err(Error::SizeMismatch { expected: pl.side, actual: s }),
        None => Err(Error::InvalidParameter("pooling needs a square grid".into())),
    }
}

/// Applies pooling layer `layer` and returns the coarse grid of side `side / 3`.
pub fn apply_pooling_layer(grid: &SyndromeGrid, schedule: &PoolingSchedule, layer: usize) -> Result<SyndromeGrid> {
    let pl = check_layer(schedule, layer, grid.side())?;
    let b = &grid.bits;
    let bits = pl
        .targets
        .iter()
        .map(|t| {
            let mut v = b[t.target];
            for (k, &c) in t.controls.iter().enumerate() {
                let [n0, n1, n2] = t.partners[k];
                v ^= b[c] ^ (b[c] & (b[n0] ^ b[n1] ^ b[n2]));
            }
            v
        })
        .collect();
    let side = pl.side / 3;
    Ok(SyndromeGrid { basis: grid.basis, rows: side, cols: side, bits })
}

/// Readout `2 * (fraction of +1 stabilizers) - 1`: 1 when clean, about 0 for random bits.
pub fn layer_output<T: Real>(grid: &SyndromeGrid) -> T {
    assert!(!grid.is_empty(), "readout of an empty grid");
    readout_from_zeros(grid.len() - grid.count_ones(), grid.len())
}

fn readout_from_zeros<T: Real>(zeros: usize, cells: usize) -> T {
    T::lit(2.0) * T::lit(zeros as f64) / T::lit(cells as f64) - T::one()
}

/// Builds the stabilizer grid of one snapshot.
///
/// Z-basis snapshots give the vertex grid, X-basis snapshots the plaquette grid.
pub fn snapshot_to_grid(bits: &[bool], basis: Basis, geom: &LatticeGeometry) -> Result<SyndromeGrid> {
    if bits.len() != geom.n_qubits() {
        return Err(Error::SizeMismatch { expected: geom.n_qubits(), actual: bits.len() });
    }
    let supports = match basis {
        Basis::Z => geom.vertices(),
        Basis::X => geom.plaquettes(),
    };
    let cells = supports.iter().map(|s| s.iter().fold(false, |acc, &q| acc ^ bits[q])).collect();
    SyndromeGrid::from_bits(basis, geom.l2(), geom.l1(), cells)
}

/// Readout values of one sample at every layer `0..=depth`, per basis.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOutputs<T> {
    pub x: Vec<T>,
    pub z: Vec<T>,
}

impl<T: Real> PipelineOutputs<T> {
    /// `M_X^l * M_Z^l` per layer.
    pub fn combined(&self) -> Vec<T> {
        self.x.iter().zip(&self.z).map(|(&a, &b)| a * b).collect()
    }
}

/// Zero-bit counts of one sample's grids at every layer; the exact form of the readout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerZeros {
    /// `zeros[l]` for layer `l`.
    pub zeros: Vec<usize>,
    /// Cells at layer `l`.
    pub cells: Vec<usize>,
}

/// Runs every pooling layer on one grid and records the zero counts.
pub fn pool_all(grid: &SyndromeGrid, schedule: &PoolingSchedule) -> Result<LayerZeros> {
    let mut zeros = Vec::with_capacity(schedule.depth() + 1);
    let mut cells = Vec::with_capacity(schedule.depth() + 1);
    let mut current = grid.clone();
    for layer in 0..=schedule.depth() {
        zeros.push(current.len() - current.count_ones());
        cells.push(current.len());
        if layer < schedule.depth() {
            current = apply_pooling_layer(&current, schedule, layer)?;
        }
    }
    Ok(LayerZeros { zeros, cells })
}

/// Pools both bases of one sample and returns `M^l` for `l = 0..=depth`.
pub fn run_pipeline<T: Real>(
    x_grid: &SyndromeGrid,
    z_grid: &SyndromeGrid,
    schedule: &PoolingSchedule,
) -> Result<PipelineOutputs<T>> {
    if x_grid.basis() != Basis::X || z_grid.basis() != Basis::Z {
        return Err(Error::InvalidParameter("run_pipeline expects an X grid and a Z grid".into()));
    }
    let readout = |lz: LayerZeros| -> Vec<T> {
        lz.zeros.iter().zip(&lz.cells).map(|(&z, &n)| readout_from_zeros(z, n)).collect()
    };
    Ok(PipelineOutputs {
        x: readout(pool_all(x_grid, schedule)?),
        z: readout(pool_all(z_grid, schedule)?),
    })
}

/// Mean readout with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayerStat<T> {
    pub mean: T,
    /// Sample standard deviation over `sqrt(n)`.
    pub stderr: T,
    pub n: u64,
}

/// Exact running sums of per-sample zero counts for one grid family.
///
/// Sums are integers, so merging partial accumulators gives the same result in
/// any order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReadoutAccumulator {
    cells: Vec<u64>,
    n: u64,
    sum: Vec<u128>,
    sum_sq: Vec<u128>,
}

impl ReadoutAccumulator {
    pub fn new(schedule: &PoolingSchedule) -> Self {
        let cells = (0..=schedule.depth()).map(|l| (schedule.side(l) * schedule.side(l)) as u64).collect();
        Self::with_cells(cells)
    }

    pub fn with_cells(cells: Vec<u64>) -> Self {
        let layers = cells.len();
        Self { cells, n: 0, sum: vec![0; layers], sum_sq: vec![0; layers] }
    }

    pub fn layers(&self) -> usize {
        self.cells.len()
    }

    pub fn samples(&self) -> u64 {
        self.n
    }

    /// Adds one sample given its zero count at every layer.
    pub fn push(&mut self, zeros: &[usize]) {
        assert_eq!(zeros.len(), self.cells.len());
        self.n += 1;
        for (l, &z) in zeros.iter().enumerate() {
            let z = z as u128;
            self.sum[l] += z;
            self.sum_sq[l] += z * z;
        }
    }

    pub fn merge(&mut self, other: &ReadoutAccumulator) {
        assert_eq!(self.cells, other.cells);
        self.n += other.n;
        for l in 0..self.cells.len() {
            self.sum[l] += other.sum[l];
            self.sum_sq[l] += other.sum_sq[l];
        }
    }

    /// Mean and standard error of `M^l` at `layer`.
    pub fn stat<T: Real>(&self, layer: usize) -> LayerStat<T> {
        let n = self.n as f64;
        let cells = self.cells[layer] as f64;
        if self.n == 0 {
            return LayerStat { mean: T::nan(), stderr: T::nan(), n: 0 };
        }
        // M = 2 z / N - 1, so mean and variance follow from the moments of z
        let mean_z = self.sum[layer] as f64 / n;
        let mean = 2.0 * mean_z / cells - 1.0;
        let stderr = if self.n > 1 {
            let ss = self.sum_sq[layer] as f64 - n * mean_z * mean_z;
            let var_z = (ss / (n - 1.0)).max(0.0);
            2.0 / cells * (var_z / n).sqrt()
        } else {
            0.0
        };
        LayerStat { mean: T::lit(mean), stderr: T::lit(stderr), n: self.n }
    }
}

/// Aggregated outputs for both bases at every layer.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerOutputs<T> {
    pub x: Vec<LayerStat<T>>,
    pub z: Vec<LayerStat<T>>,
}

impl<T: Real> LayerOutputs<T> {
    pub fn from_accumulators(x: &ReadoutAccumulator, z: &ReadoutAccumulator) -> Self {
        Self {
            x: (0..x.layers()).map(|l| x.stat(l)).collect(),
            z: (0..z.layers()).map(|l| z.stat(l)).collect(),
        }
    }

    /// Product of the two bases' means per layer, with first-order error propagation.
    pub fn combined(&self) -> Vec<LayerStat<T>> {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| {
                let se = Float::sqrt(
                    Float::powi(b.mean * a.stderr, 2) + Float::powi(a.mean * b.stderr, 2),
                );
                LayerStat { mean: a.mean * b.mean, stderr: se, n: a.n.min(b.n) }
            })
            .collect()
    }
}

/// 64 samples of one grid, bit-sliced: bit `k` of `words[i]` is cell `i` of lane `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BatchGrid {
    side: usize,
    words: Vec<u64>,
}

impl BatchGrid {
    pub fn zeros(side: usize) -> Self {
        Self { side, words: vec![0; side * side] }
    }

    /// Packs up to 64 single-sample grids into lanes `0..grids.len()`.
    pub fn from_grids(grids: &[SyndromeGrid]) -> Result<Self> {
        let side = grids
            .first()
            .and_then(|g| g.side())
            .ok_or_else(|| Error::InvalidParameter("need at least one square grid".into()))?;
        if grids.len() > 64 {
            return Err(Error::InvalidParameter("a batch holds at most 64 lanes".into()));
        }
        let mut batch = Self::zeros(side);
        for (lane, g) in grids.iter().enumerate() {
            if g.side() != Some(side) {
                return Err(Error::SizeMismatch { expected: side, actual: g.rows() });
            }
            for (i, &b) in g.bits().iter().enumerate() {
                batch.words[i] |= (b as u64) << lane;
            }
        }
        Ok(batch)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn toggle(&mut self, cell: usize, lane: usize) {
        self.words[cell] ^= 1u64 << lane;
    }

    /// Unpacks one lane.
    pub fn lane(&self, lane: usize, basis: Basis) -> SyndromeGrid {
        let bits = self.words.iter().map(|w| (w >> lane) & 1 == 1).collect();
        SyndromeGrid { basis, rows: self.side, cols: self.side, bits }
    }

    pub fn pool(&self, schedule: &PoolingSchedule, layer: usize) -> Result<BatchGrid> {
        let pl = check_layer(schedule, layer, Some(self.side))?;
        let w = &self.words;
        let words = pl
            .targets
            .iter()
            .map(|t| {
                let mut v = w[t.target];
                for (k, &c) in t.controls.iter().enumerate() {
                    let [n0, n1, n2] = t.partners[k];
                    v ^= w[c] ^ (w[c] & (w[n0] ^ w[n1] ^ w[n2]));
                }
                v
            })
            .collect();
        Ok(BatchGrid { side: pl.side / 3, words })
    }

    /// Number of set cells in every lane.
    pub fn lane_popcounts(&self) -> [u32; 64] {
        lane_popcounts(&self.words)
    }

    /// Pools through every layer and returns the per-lane zero counts at each layer.
    pub fn pool_all(&self, schedule: &PoolingSchedule) -> Result<Vec<[u32; 64]>> {
        let mut out = Vec::with_capacity(schedule.depth() + 1);
        let mut current = self.clone();
        for layer in 0..=schedule.depth() {
            let cells = (current.side * current.side) as u32;
            out.push(current.lane_popcounts().map(|ones| cells - ones));
            if layer < schedule.depth() {
                current = current.pool(schedule, layer)?;
            }
        }
        Ok(out)
    }
}

/// Per-lane population counts using a bit-sliced ripple counter.
pub fn lane_popcounts(words: &[u64]) -> [u32; 64] {
    let mut planes = [0u64; 33];
    let mut used = 0;
    for &w in words {
        let mut carry = w;
        let mut i = 0;
        while carry != 0 {
            let next = planes[i] & carry;
            planes[i] ^= carry;
            carry = next;
            i += 1;
        }
        used = used.max(i);
    }
    let mut counts = [0u32; 64];
    for (lane, count) in counts.iter_mut().enumerate() {
        *count = (0..used).map(|i| (((planes[i] >> lane) & 1) as u32) << i).sum();
    }
    counts
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn random_grid(side: usize, basis: Basis, rng: &mut impl Rng) -> SyndromeGrid {
        let bits = (0..side * side).map(|_| rng.random()).collect();
        SyndromeGrid::from_bits(basis, side, side, bits).unwrap()
    }

    /// Literal gate list: CNOT(c, t) and Toffoli(n, c, t) applied one by one.
    fn gate_by_gate(grid: &SyndromeGrid, schedule: &PoolingSchedule, layer: usize) -> SyndromeGrid {
        enum Gate {
            Cnot(usize, usize),
            Toffoli(usize, usize, usize),
        }
        let pl = schedule.layer(layer).unwrap();
        let mut gates = Vec::new();
        for t in &pl.targets {
            for (k, &c) in t.controls.iter().enumerate() {
                gates.push(Gate::Cnot(c, t.target));
                for &n in &t.partners[k] {
                    gates.push(Gate::Toffoli(n, c, t.target));
                }
            }
        }
        let mut bits = grid.bits().to_vec();
        for g in gates {
            match g {
                Gate::Cnot(c, t) => bits[t] ^= bits[c],
                Gate::Toffoli(n, c, t) => bits[t] ^= bits[n] & bits[c],
            }
        }
        let kept = pl.targets.iter().map(|t| bits[t.target]).collect();
        SyndromeGrid::from_bits(grid.basis(), pl.side / 3, pl.side / 3, kept).unwrap()
    }

    #[test]
    fn zero_grid_stays_zero() {
        let s = PoolingSchedule::new(2).unwrap();
        let g = SyndromeGrid::zeros(Basis::X, 9);
        let out = apply_pooling_layer(&g, &s, 0).unwrap();
        assert_eq!(out.side(), Some(3));
        assert_eq!(out.count_ones(), 0);
    }

    #[test]
    fn target_control_pair_is_corrected() {
        let s = PoolingSchedule::new(2).unwrap();
        let t = &s.layer(0).unwrap().targets[4];
        for &c in &t.controls {
            let mut g = SyndromeGrid::zeros(Basis::X, 9);
            g.toggle(t.target);
            g.toggle(c);
            assert_eq!(apply_pooling_layer(&g, &s, 0).unwrap().count_ones(), 0);
        }
    }

    #[test]
    fn control_partner_pair_does_not_flip() {
        let s = PoolingSchedule::new(2).unwrap();
        let t = &s.layer(0).unwrap().targets[4];
        for (k, &c) in t.controls.iter().enumerate() {
            for &n in &t.partners[k] {
                let mut g = SyndromeGrid::zeros(Basis::X, 9);
                g.toggle(c);
                g.toggle(n);
                assert_eq!(apply_pooling_layer(&g, &s, 0).unwrap().count_ones(), 0);
            }
        }
    }

    #[test]
    fn every_adjacent_pair_matches_gate_oracle() {
        let s = PoolingSchedule::new(2).unwrap();
        for r in 0..9 {
            for c in 0..9 {
                for (dr, dc) in [(0, 1), (1, 0)] {
                    let mut g = SyndromeGrid::zeros(Basis::Z, 9);
                    g.set(r, c, true);
                    g.set(r + dr, c + dc, true);
                    let fast = apply_pooling_layer(&g, &s, 0).unwrap();
                    assert_eq!(fast, gate_by_gate(&g, &s, 0), "pair at ({r},{c})+({dr},{dc})");
                    // isolated pairs never survive the first layer
                    assert_eq!(fast.count_ones(), 0);
                }
            }
        }
    }

    #[test]
    fn random_grids_match_gate_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for depth in 1..=3 {
            let s = PoolingSchedule::new(depth).unwrap();
            for layer in 0..depth {
                for _ in 0..20 {
                    let g = random_grid(s.side(layer), Basis::X, &mut rng);
                    assert_eq!(apply_pooling_layer(&g, &s, layer).unwrap(), gate_by_gate(&g, &s, layer));
                }
            }
        }
    }

    #[test]
    fn rejects_wrong_sides() {
        let s = PoolingSchedule::new(2).unwrap();
        assert!(apply_pooling_layer(&SyndromeGrid::zeros(Basis::X, 3), &s, 0).is_err());
        assert!(apply_pooling_layer(&SyndromeGrid::zeros(Basis::X, 4), &s, 0).is_err());
        assert!(apply_pooling_layer(&SyndromeGrid::zeros(Basis::X, 9), &s, 2).is_err());
        let rect = SyndromeGrid::from_bits(Basis::X, 3, 9, vec![false; 27]).unwrap();
        assert!(apply_pooling_layer(&rect, &s, 0).is_err());
    }

    #[test]
    fn readout_endpoints() {
        let zero = SyndromeGrid::zeros(Basis::X, 3);
        assert_eq!(layer_output::<f64>(&zero), 1.0);
        let ones = SyndromeGrid::from_bits(Basis::X, 3, 3, vec![true; 9]).unwrap();
        assert_eq!(layer_output::<f64>(&ones), -1.0);
        let mut half = SyndromeGrid::zeros(Basis::Z, 2);
        half.toggle(0);
        half.toggle(3);
        assert_eq!(layer_output::<f32>(&half), 0.0);
    }

    #[test]
    fn random_bits_read_out_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_grid(243, Basis::X, &mut rng);
        let m: f64 = layer_output(&g);
        assert!(m.abs() < 4.0 / 243.0, "{m}");
    }

    #[test]
    fn snapshot_grids() {
        let g = LatticeGeometry::build_torus(3, 3).unwrap();
        let zero = vec![false; 18];
        assert_eq!(snapshot_to_grid(&zero, Basis::Z, &g).unwrap().count_ones(), 0);
        for q in 0..18 {
            let mut s = zero.clone();
            s[q] = true;
            let v = snapshot_to_grid(&s, Basis::Z, &g).unwrap();
            assert_eq!((v.basis(), v.count_ones()), (Basis::Z, 2));
            let p = snapshot_to_grid(&s, Basis::X, &g).unwrap();
            assert_eq!((p.basis(), p.count_ones()), (Basis::X, 2));
        }
        assert!(snapshot_to_grid(&zero[..5], Basis::Z, &g).is_err());
    }

    #[test]
    fn random_snapshot_gives_fair_vertex_bits() {
        let g = LatticeGeometry::build_torus(27, 27).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut ones = 0;
        let trials = 40;
        for _ in 0..trials {
            let snap: Vec<bool> = (0..g.n_qubits()).map(|_| rng.random()).collect();
            ones += snapshot_to_grid(&snap, Basis::Z, &g).unwrap().count_ones();
        }
        let n = (trials * g.n_cells()) as f64;
        assert!((ones as f64 / n - 0.5).abs() < 4.0 * 0.5 / n.sqrt());
    }

    #[test]
    fn pipeline_on_clean_and_z_noisy_input() {
        let s = PoolingSchedule::new(2).unwrap();
        let clean = SyndromeGrid::zeros(Basis::X, 9);
        let out: PipelineOutputs<f64> = run_pipeline(&clean, &SyndromeGrid::zeros(Basis::Z, 9), &s).unwrap();
        assert_eq!(out.x, vec![1.0; 3]);
        assert_eq!(out.combined(), vec![1.0; 3]);

        // Z errors only touch the plaquette (X) grid
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let noisy = random_grid(9, Basis::X, &mut rng);
        let out: PipelineOutputs<f64> = run_pipeline(&noisy, &SyndromeGrid::zeros(Basis::Z, 9), &s).unwrap();
        assert_eq!(out.z, vec![1.0; 3]);
        assert!(out.x[0] < 1.0);
        for l in 0..3 {
            assert_eq!(out.combined()[l], out.x[l] * out.z[l]);
        }
        assert!(run_pipeline::<f64>(&noisy, &noisy, &s).is_err());
    }

    #[test]
    fn popcounts_match_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let words: Vec<u64> = (0..1000).map(|_| rng.random()).collect();
        let counts = lane_popcounts(&words);
        for lane in 0..64 {
            let naive = words.iter().filter(|&&w| (w >> lane) & 1 == 1).count() as u32;
            assert_eq!(counts[lane], naive);
        }
        assert_eq!(lane_popcounts(&[]), [0; 64]);
        assert_eq!(lane_popcounts(&vec![u64::MAX; 70_000]), [70_000; 64]);
    }

    #[test]
    fn batch_pooling_matches_single_lane() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = PoolingSchedule::new(3).unwrap();
        let grids: Vec<_> = (0..64).map(|_| random_grid(27, Basis::X, &mut rng)).collect();
        let batch = BatchGrid::from_grids(&grids).unwrap();
        let zeros = batch.pool_all(&s).unwrap();
        for (lane, g) in grids.iter().enumerate() {
            let single = pool_all(g, &s).unwrap();
            for l in 0..=3 {
                assert_eq!(zeros[l][lane] as usize, single.zeros[l]);
            }
            assert_eq!(&batch.lane(lane, Basis::X), g);
        }
    }

    #[test]
    fn accumulator_merge_is_order_independent() {
        let s = PoolingSchedule::new(1).unwrap();
        let mut a = ReadoutAccumulator::new(&s);
        let mut b = ReadoutAccumulator::new(&s);
        a.push(&[9, 1]);
        a.push(&[4, 0]);
        b.push(&[7, 1]);
        let mut ab = a.clone();
        ab.merge(&b);
        let mut ba = b.clone();
        ba.merge(&a);
        assert_eq!(ab, ba);
        let st: LayerStat<f64> = ab.stat(1);
        // per-sample outputs 1, -1, 1
        assert!((st.mean - 1.0 / 3.0).abs() < 1e-12);
        let sd = ((2.0 * (2.0f64 / 3.0).powi(2) + (4.0f64 / 3.0).powi(2)) / 2.0).sqrt();
        assert!((st.stderr - sd / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn combined_stat_is_product_of_means() {
        let x = LayerStat { mean: 0.5, stderr: 0.1, n: 10 };
        let z = LayerStat { mean: 0.8, stderr: 0.2, n: 10 };
        let out = LayerOutputs { x: vec![x], z: vec![z] }.combined();
        assert!((out[0].mean - 0.4).abs() < 1e-15);
        assert!((out[0].stderr - (0.08f64.powi(2) + 0.1f64.powi(2)).sqrt()).abs() < 1e-15);
    }

    mod props {
        use proptest::prelude::*;

        use super::*;

        proptest! {
            // a lone flip anywhere on a 27x27 grid, paired with a neighbour, never
            // survives the first pooling layer
            #[test]
            fn isolated_pairs_vanish(r in 0usize..27, c in 0usize..27, horizontal in any::<bool>()) {
                let s = PoolingSchedule::new(3).unwrap();
                let mut g = SyndromeGrid::zeros(Basis::X, 27);
                g.set(r, c, true);
                if horizontal { g.set(r, c + 1, true) } else { g.set(r + 1, c, true) }
                prop_assert_eq!(apply_pooling_layer(&g, &s, 0).unwrap().count_ones(), 0);
            }
        }
    }
}
