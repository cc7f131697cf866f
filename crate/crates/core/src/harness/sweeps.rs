//! Noise and field sweeps.
//!
//! Every sample draws from its own ChaCha8 stream keyed by the master seed, a
//! purpose tag, the point's two parameters and the sample index. Results are
//! therefore independent of thread count, of scheduling, and of which other
//! points are in the grid.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Mode, Precision, SweepParam};
use crate::error::{Error, Result};
use crate::groundstate::{
    solve_multicritical, solve_two_step, FieldParams, GroundState, LanczosOptions, SnapshotSampler,
};
use crate::lattice::{layer_qubit_count, LatticeGeometry, PoolingSchedule};
use crate::pauli_frame::{sample_noise, NoiseModel};
use crate::pooling::{pool_all, snapshot_to_grid, Basis, BatchGrid, LayerOutputs, LayerStat, ReadoutAccumulator};
use crate::scalar::Real;

const TAG_NOISE: u64 = 1;
const TAG_SNAPSHOT_X: u64 = 2;
const TAG_SNAPSHOT_Z: u64 = 3;
const TAG_SNAPSHOT_NOISE: u64 = 4;

/// Generator for one sample: `(seed, tag, a, b)` pick the key, `sample` the stream.
pub fn sample_rng(seed: u64, tag: u64, a: f64, b: f64, sample: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&tag.to_le_bytes());
    key[16..24].copy_from_slice(&a.to_bits().to_le_bytes());
    key[24..].copy_from_slice(&b.to_bits().to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(sample);
    rng
}

/// Grid family of a result row; `XZ` is the per-layer product of the two.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReadoutBasis {
    X,
    Z,
    XZ,
}

impl From<Basis> for ReadoutBasis {
    fn from(b: Basis) -> Self {
        match b {
            Basis::X => ReadoutBasis::X,
            Basis::Z => ReadoutBasis::Z,
        }
    }
}

impl fmt::Display for ReadoutBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReadoutBasis::X => "X",
            ReadoutBasis::Z => "Z",
            ReadoutBasis::XZ => "XZ",
        })
    }
}

impl FromStr for ReadoutBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" => Ok(ReadoutBasis::X),
            "Z" => Ok(ReadoutBasis::Z),
            "XZ" => Ok(ReadoutBasis::XZ),
            _ => Err(Error::Parse(format!("unknown basis {s:?}"))),
        }
    }
}

/// One output row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub layer: usize,
    pub basis: ReadoutBasis,
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
}

/// A sweep point whose ground state could not be computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub sweep_value: f64,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    #[serde(default)]
    pub failures: Vec<PointFailure>,
}

impl SweepMetadata {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            failures: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub metadata: SweepMetadata,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// `(sweep_value, mean, stderr)` of one layer and basis, in sweep order.
    pub fn curve(&self, layer: usize, basis: ReadoutBasis) -> Vec<(f64, f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.layer == layer && r.basis == basis)
            .map(|r| (r.sweep_value, r.mean, r.stderr))
            .collect()
    }

    pub fn layers(&self) -> Vec<usize> {
        let mut l: Vec<usize> = self.rows.iter().map(|r| r.layer).collect();
        l.sort_unstable();
        l.dedup();
        l
    }
}

fn push_rows<T: Real>(rows: &mut Vec<SweepRow>, value: f64, basis: ReadoutBasis, stats: &[LayerStat<T>]) {
    for (layer, s) in stats.iter().enumerate() {
        rows.push(SweepRow {
            sweep_value: value,
            layer,
            basis,
            mean: s.mean.to_f64_lossy(),
            stderr: s.stderr.to_f64_lossy(),
            n: s.n,
        });
    }
}

/// Per-layer zero counts of one sample in both bases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleZeros {
    pub x: Vec<usize>,
    pub z: Vec<usize>,
}

/// Noise-only samples on the ideal toric state: every syndrome comes from the
/// sampled Pauli frame. Returns per-sample zero counts in sample order.
pub fn noise_point_samples(
    geom: &LatticeGeometry,
    schedule: &PoolingSchedule,
    model: &NoiseModel,
    seed: u64,
    samples: usize,
) -> Result<Vec<SampleZeros>> {
    let side = geom.l1();
    if geom.l2() != side || schedule.side(0) != side {
        return Err(Error::SizeMismatch { expected: schedule.side(0), actual: side });
    }
    let batches: Vec<Vec<SampleZeros>> = (0..samples.div_ceil(64))
        .into_par_iter()
        .map(|b| -> Result<Vec<SampleZeros>> {
            let lanes = (samples - 64 * b).min(64);
            let mut xg = BatchGrid::zeros(side);
            let mut zg = BatchGrid::zeros(side);
            for lane in 0..lanes {
                let i = (64 * b + lane) as u64;
                let mut rng = sample_rng(seed, TAG_NOISE, model.p_x(), model.p_z(), i);
                let frame = sample_noise(model, geom.n_qubits(), &mut rng);
                // Z errors flip plaquettes, X errors flip vertices.
                for q in frame.z_mask().iter_ones() {
                    for c in geom.plaquettes_of(q) {
                        xg.toggle(c, lane);
                    }
                }
                for q in frame.x_mask().iter_ones() {
                    for c in geom.vertices_of(q) {
                        zg.toggle(c, lane);
                    }
                }
            }
            let xz = xg.pool_all(schedule)?;
            let zz = zg.pool_all(schedule)?;
            Ok((0..lanes)
                .map(|lane| SampleZeros {
                    x: xz.iter().map(|l| l[lane] as usize).collect(),
                    z: zz.iter().map(|l| l[lane] as usize).collect(),
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(batches.into_iter().flatten().collect())
}

fn accumulate(schedule: &PoolingSchedule, samples: &[SampleZeros]) -> (ReadoutAccumulator, ReadoutAccumulator) {
    let mut ax = ReadoutAccumulator::new(schedule);
    let mut az = ReadoutAccumulator::new(schedule);
    for s in samples {
        ax.push(&s.x);
        az.push(&s.z);
    }
    (ax, az)
}

fn noise_params(cfg: &ExperimentConfig, v: f64) -> Result<NoiseModel> {
    match cfg.sweep {
        SweepParam::Pz => NoiseModel::new(cfg.p_x, v),
        SweepParam::Px => NoiseModel::new(v, cfg.p_z),
        SweepParam::P => NoiseModel::new(v, v),
        other => Err(Error::InvalidParameter(format!("{other:?} is not a noise parameter"))),
    }
}

/// Noise sweep on the `3^depth` torus.
pub fn run_noise_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let n = layer_qubit_count(cfg.depth, 0)?;
    if n > cfg.max_qubits {
        return Err(Error::ResourceLimit { n_qubits: n, cap: cfg.max_qubits });
    }
    let side = 3usize.pow(cfg.depth as u32);
    let geom = LatticeGeometry::build_torus(side, side)?;
    let schedule = PoolingSchedule::new(cfg.depth)?;
    let mut rows = Vec::new();
    for v in cfg.grid.values() {
        let model = noise_params(cfg, v)?;
        let samples = noise_point_samples(&geom, &schedule, &model, cfg.seed, cfg.samples)?;
        let (ax, az) = accumulate(&schedule, &samples);
        let out = LayerOutputs::<f64>::from_accumulators(&ax, &az);
        push_rows(&mut rows, v, ReadoutBasis::X, &out.x);
        push_rows(&mut rows, v, ReadoutBasis::Z, &out.z);
        log::info!("noise point {v}: final X {:.4} Z {:.4}", out.x[cfg.depth].mean, out.z[cfg.depth].mean);
    }
    Ok(SweepResult { metadata: SweepMetadata::new(cfg), rows })
}

/// Snapshots of a solved ground state pooled in both bases, optionally with
/// Pauli noise layered onto the syndrome grids.
pub fn ground_state_point_samples<T: Real>(
    geom: &LatticeGeometry,
    schedule: &PoolingSchedule,
    gs: &GroundState<T>,
    noise: Option<&NoiseModel>,
    seed: u64,
    samples: usize,
) -> Result<Vec<SampleZeros>> {
    let samplers = [SnapshotSampler::new(&gs.state, Basis::X), SnapshotSampler::new(&gs.state, Basis::Z)];
    let (a, b) = (gs.params.h_x, gs.params.h_z);
    (0..samples as u64)
        .into_par_iter()
        .map(|i| -> Result<SampleZeros> {
            let mut grids = Vec::with_capacity(2);
            for (basis, tag, sampler) in
                [(Basis::X, TAG_SNAPSHOT_X, &samplers[0]), (Basis::Z, TAG_SNAPSHOT_Z, &samplers[1])]
            {
                let bits = sampler.sample(&mut sample_rng(seed, tag, a, b, i));
                grids.push(snapshot_to_grid(&bits, basis, geom)?);
            }
            if let Some(model) = noise {
                let mut rng = sample_rng(seed, TAG_SNAPSHOT_NOISE, a, b, i);
                let frame = sample_noise(model, geom.n_qubits(), &mut rng);
                let (px, pz) = frame.syndromes_direct(geom)?;
                for (g, e) in grids.iter_mut().zip([px, pz]) {
                    for (cell, &flip) in e.bits().iter().enumerate() {
                        if flip {
                            g.toggle(cell);
                        }
                    }
                }
            }
            Ok(SampleZeros { x: pool_all(&grids[0], schedule)?.zeros, z: pool_all(&grids[1], schedule)?.zeros })
        })
        .collect()
}

fn field_params(cfg: &ExperimentConfig, v: f64) -> Result<FieldParams> {
    let (h_x, h_z) = match cfg.sweep {
        SweepParam::Hz => (cfg.h_x, v),
        SweepParam::Hx => (v, cfg.h_z),
        SweepParam::H => (v, v),
        other => return Err(Error::InvalidParameter(format!("{other:?} is not a field parameter"))),
    };
    FieldParams::new(h_x, h_z, cfg.penalty)
}

fn solver_options<T: Real>(cfg: &ExperimentConfig) -> LanczosOptions {
    // Single precision cannot reach double-precision residuals.
    let floor = 5e3 * T::epsilon().to_f64_lossy();
    LanczosOptions { tol: cfg.tol.max(floor), ..LanczosOptions::default() }
}

fn run_field_points<T: Real>(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let side = 3usize.pow(cfg.depth as u32);
    let geom = LatticeGeometry::build_torus(side, side)?;
    let schedule = PoolingSchedule::new(cfg.depth)?;
    let opts = solver_options::<T>(cfg);
    let noise = if cfg.noisy { Some(NoiseModel::new(cfg.p_x, cfg.p_z)?) } else { None };
    let mut meta = SweepMetadata::new(cfg);
    let mut rows = Vec::new();
    for v in cfg.grid.values() {
        let solved = match cfg.mode {
            Mode::Multicritical => solve_multicritical::<T>(&geom, v, cfg.delta, cfg.penalty, cfg.qubit_cap, &opts),
            _ => field_params(cfg, v).and_then(|p| solve_two_step::<T>(&geom, p, None, cfg.qubit_cap, &opts)),
        };
        let gs = match solved {
            Ok(gs) => gs,
            Err(e @ (Error::ResourceLimit { .. } | Error::InvalidParameter(_))) => return Err(e),
            Err(e) => {
                log::warn!("point {v} skipped: {e}");
                meta.failures.push(PointFailure { sweep_value: v, error: e.to_string() });
                continue;
            }
        };
        let samples = ground_state_point_samples(&geom, &schedule, &gs, noise.as_ref(), cfg.seed, cfg.samples)?;
        let (ax, az) = accumulate(&schedule, &samples);
        let out = LayerOutputs::<T>::from_accumulators(&ax, &az);
        push_rows(&mut rows, v, ReadoutBasis::X, &out.x);
        push_rows(&mut rows, v, ReadoutBasis::Z, &out.z);
        if cfg.mode == Mode::Multicritical || cfg.noisy {
            push_rows(&mut rows, v, ReadoutBasis::XZ, &out.combined());
        }
        log::info!("field point {v}: E = {:.10}, residual {:.2e}", gs.energy, gs.residual);
    }
    Ok(SweepResult { metadata: meta, rows })
}

/// Field sweep (or multicritical line) on the `3^depth` torus with exact ground states.
pub fn run_field_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    if !matches!(cfg.mode, Mode::FieldSweep | Mode::Multicritical) {
        return Err(Error::InvalidParameter(format!("run_field_sweep called in {} mode", cfg.mode)));
    }
    match cfg.precision {
        Precision::F64 => run_field_points::<f64>(cfg),
        Precision::F32 => run_field_points::<f32>(cfg),
    }
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;

    #[test]
    fn sample_streams_differ() {
        let a: u64 = sample_rng(1, 1, 0.1, 0.2, 0).random();
        let b: u64 = sample_rng(1, 1, 0.1, 0.2, 1).random();
        let c: u64 = sample_rng(1, 1, 0.1, 0.3, 0).random();
        let d: u64 = sample_rng(1, 1, 0.1, 0.2, 0).random();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, d);
    }

    #[test]
    fn batched_noise_matches_per_sample_pipeline() {
        let geom = LatticeGeometry::build_torus(9, 9).unwrap();
        let schedule = PoolingSchedule::new(2).unwrap();
        let model = NoiseModel::new(0.05, 0.08).unwrap();
        let batched = noise_point_samples(&geom, &schedule, &model, 11, 70).unwrap();
        for (i, s) in batched.iter().enumerate() {
            let mut rng = sample_rng(11, TAG_NOISE, 0.05, 0.08, i as u64);
            let frame = sample_noise(&model, geom.n_qubits(), &mut rng);
            let (px, pz) = frame.syndromes_direct(&geom).unwrap();
            assert_eq!(s.x, pool_all(&px, &schedule).unwrap().zeros);
            assert_eq!(s.z, pool_all(&pz, &schedule).unwrap().zeros);
        }
    }

    #[test]
    fn zero_noise_sweep_is_exactly_one() {
        let mut cfg = ExperimentConfig::defaults(Mode::NoiseSweep);
        cfg.depth = 2;
        cfg.samples = 10;
        cfg.grid = "0:0.01:0.01".parse().unwrap();
        let res = run_noise_sweep(&cfg).unwrap();
        assert_eq!(res.rows.len(), 2 * 2 * 3);
        for r in res.rows.iter().filter(|r| r.sweep_value == 0.0) {
            assert_eq!((r.mean, r.stderr, r.n), (1.0, 0.0, 10));
        }
    }
}
