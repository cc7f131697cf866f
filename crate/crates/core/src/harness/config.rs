//! Experiment configuration: defaults per mode, an optional TOML file, and
//! command-line overrides, resolved in that order.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groundstate::{DEFAULT_DELTA, DEFAULT_PENALTY, DEFAULT_QUBIT_CAP};
use crate::lattice::layer_qubit_count;

pub const DEFAULT_SAMPLES: usize = 2000;

/// Sample count used at depth >= 6 when none is given explicitly.
pub const DEEP_SAMPLES: usize = 200;

pub const DEFAULT_SEED: u64 = 7919;

/// Default memory guard for noise sweeps: the depth-7 lattice (about 9.6 million qubits).
pub const DEFAULT_MAX_QUBITS: u64 = 2 * 3u64.pow(14);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Verify,
    NoiseSweep,
    FieldSweep,
    Multicritical,
    Threshold,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Verify => "verify",
            Mode::NoiseSweep => "noise-sweep",
            Mode::FieldSweep => "field-sweep",
            Mode::Multicritical => "multicritical",
            Mode::Threshold => "threshold",
        })
    }
}

/// Which parameter the grid values are assigned to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    /// Z flip probability.
    Pz,
    /// X flip probability.
    Px,
    /// Both flip probabilities.
    P,
    /// Z field.
    Hz,
    /// X field.
    Hx,
    /// Both fields.
    H,
}

impl SweepParam {
    fn is_noise(self) -> bool {
        matches!(self, SweepParam::Pz | SweepParam::Px | SweepParam::P)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Floating point type of the state vector in field sweeps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

/// Inclusive arithmetic grid `start:stop:step`; a single number is a one-point grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        let g = Self { start, stop, step };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid {self} is not finite")));
        }
        if self.stop < self.start {
            return Err(Error::InvalidParameter(format!("grid {self} is not increasing")));
        }
        if !(self.step > 0.0) && self.stop > self.start {
            return Err(Error::InvalidParameter(format!("grid {self} needs a positive step")));
        }
        Ok(())
    }

    /// Grid points, computed as `start + i * step` and rounded to 12 decimals so
    /// that `0.1` steps print cleanly.
    pub fn values(&self) -> Vec<f64> {
        if self.stop == self.start {
            return vec![self.start];
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| ((self.start + i as f64 * self.step) * 1e12).round() / 1e12).collect()
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |t: &str| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad grid value {t:?} in {s:?}")));
        match parts.as_slice() {
            [v] => Grid::new(num(v)?, num(v)?, 1.0),
            [a, b, c] => Grid::new(num(a)?, num(b)?, num(c)?),
            _ => Err(Error::Parse(format!("grid must be start:stop:step or a single value, got {s:?}"))),
        }
    }
}

/// Fully resolved experiment configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub depth: usize,
    pub grid: Grid,
    pub sweep: SweepParam,
    pub samples: usize,
    pub p_x: f64,
    pub p_z: f64,
    pub h_x: f64,
    pub h_z: f64,
    pub penalty: f64,
    pub delta: f64,
    pub seed: u64,
    /// Layer noise onto ground-state snapshots (field sweeps only).
    pub noisy: bool,
    pub format: OutputFormat,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Qubit cap of the exact solver.
    pub qubit_cap: usize,
    /// Qubit cap of noise sweeps.
    pub max_qubits: u64,
    /// Eigensolver residual tolerance.
    pub tol: f64,
    pub precision: Precision,
    /// Depths whose final-layer curves enter the threshold estimate; empty means
    /// the three depths ending at `depth`.
    #[serde(default)]
    pub depths: Vec<usize>,
    /// Whether `samples` was given by the user; exempts it from the deep-run cap.
    #[serde(skip)]
    pub samples_explicit: bool,
}

impl ExperimentConfig {
    /// Defaults for `mode`.
    pub fn defaults(mode: Mode) -> Self {
        let (depth, grid, sweep) = match mode {
            Mode::FieldSweep => (1, Grid { start: 0.0, stop: 1.0, step: 0.1 }, SweepParam::Hz),
            Mode::Multicritical => (1, Grid { start: 0.0, stop: 0.6, step: 0.05 }, SweepParam::H),
            Mode::Threshold => (5, Grid { start: 0.015, stop: 0.03, step: 0.0015 }, SweepParam::Pz),
            Mode::NoiseSweep | Mode::Verify => (3, Grid { start: 0.015, stop: 0.03, step: 0.0015 }, SweepParam::Pz),
        };
        Self {
            mode,
            depth,
            grid,
            sweep,
            samples: DEFAULT_SAMPLES,
            p_x: 0.0,
            p_z: 0.0,
            h_x: 0.0,
            h_z: 0.0,
            penalty: DEFAULT_PENALTY,
            delta: DEFAULT_DELTA,
            seed: DEFAULT_SEED,
            noisy: false,
            format: OutputFormat::Csv,
            out: None,
            qubit_cap: DEFAULT_QUBIT_CAP,
            max_qubits: DEFAULT_MAX_QUBITS,
            tol: 1e-9,
            precision: Precision::F64,
            depths: Vec::new(),
            samples_explicit: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.depth == 0 {
            return bad("depth must be >= 1".into());
        }
        if self.samples == 0 {
            return bad("samples must be >= 1".into());
        }
        self.grid.validate()?;
        for (name, p) in [("p_x", self.p_x), ("p_z", self.p_z)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbability { name, value: p });
            }
        }
        let noise_mode = matches!(self.mode, Mode::NoiseSweep | Mode::Threshold);
        let field_mode = matches!(self.mode, Mode::FieldSweep | Mode::Multicritical);
        if noise_mode && !self.sweep.is_noise() {
            return bad(format!("{} sweeps a noise probability, not {:?}", self.mode, self.sweep));
        }
        if field_mode && self.sweep.is_noise() {
            return bad(format!("{} sweeps a field, not {:?}", self.mode, self.sweep));
        }
        if noise_mode && (self.grid.start < 0.0 || self.grid.stop > 1.0) {
            return bad(format!("noise grid {} leaves [0, 1]", self.grid));
        }
        if self.mode == Mode::Multicritical && (self.delta == 0.0 || self.grid.start < 0.0) {
            return bad("multicritical needs delta != 0 and h >= 0".into());
        }
        if !(self.penalty >= 0.0 && self.penalty.is_finite()) {
            return bad(format!("penalty must be >= 0, got {}", self.penalty));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tolerance must be positive, got {}", self.tol));
        }
        if self.depths.contains(&0) {
            return bad("depths must be >= 1".into());
        }
        if noise_mode {
            let deepest = self.depths.iter().copied().chain([self.depth]).max().unwrap_or(self.depth);
            let n = layer_qubit_count(deepest, 0)?;
            if n > self.max_qubits {
                return Err(Error::ResourceLimit { n_qubits: n, cap: self.max_qubits });
            }
        }
        Ok(())
    }

    /// Lowers the sample count at large depth when it was not set explicitly.
    /// Threshold runs apply the cap per depth instead, see [`Self::samples_at`].
    pub fn apply_depth_sample_policy(&mut self, samples_explicit: bool) {
        self.samples_explicit = samples_explicit;
        if self.mode != Mode::Threshold {
            self.samples = self.samples_at(self.depth);
        }
    }

    /// Samples per point for a run of the given depth.
    pub fn samples_at(&self, depth: usize) -> usize {
        if depth >= 6 && !self.samples_explicit && self.samples > DEEP_SAMPLES {
            log::warn!("depth {depth} is expensive; using {DEEP_SAMPLES} samples per point");
            return DEEP_SAMPLES;
        }
        self.samples
    }

    /// Depths entering a threshold estimate.
    pub fn threshold_depths(&self) -> Vec<usize> {
        if self.depths.is_empty() {
            (self.depth.saturating_sub(2).max(1)..=self.depth).collect()
        } else {
            self.depths.clone()
        }
    }
}

/// Optional values, as read from a config file or the command line.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigOverrides {
    pub depth: Option<usize>,
    pub grid: Option<String>,
    pub sweep: Option<SweepParam>,
    pub samples: Option<usize>,
    pub px: Option<f64>,
    pub pz: Option<f64>,
    pub hx: Option<f64>,
    pub hz: Option<f64>,
    pub penalty: Option<f64>,
    pub delta: Option<f64>,
    pub seed: Option<u64>,
    pub noisy: Option<bool>,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
    pub qubit_cap: Option<usize>,
    pub max_qubits: Option<u64>,
    pub tol: Option<f64>,
    pub precision: Option<Precision>,
    pub depths: Option<Vec<usize>>,
}

impl ConfigOverrides {
    /// Writes every present value into `cfg`. Grid strings are checked by
    /// [`ConfigOverrides::parsed_grid`].
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        macro_rules! set {
            ($src:ident => $dst:ident) => {
                if let Some(v) = self.$src.clone() {
                    cfg.$dst = v;
                }
            };
        }
        set!(depth => depth);
        set!(sweep => sweep);
        set!(samples => samples);
        set!(px => p_x);
        set!(pz => p_z);
        set!(hx => h_x);
        set!(hz => h_z);
        set!(penalty => penalty);
        set!(delta => delta);
        set!(seed => seed);
        set!(noisy => noisy);
        set!(format => format);
        set!(qubit_cap => qubit_cap);
        set!(max_qubits => max_qubits);
        set!(tol => tol);
        set!(precision => precision);
        set!(depths => depths);
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        if let Some(Ok(g)) = self.grid.as_deref().map(Grid::from_str) {
            cfg.grid = g;
        }
    }

    pub fn parsed_grid(&self) -> Result<Option<Grid>> {
        self.grid.as_deref().map(Grid::from_str).transpose()
    }
}

/// Resolves defaults, then the optional file, then `cli` (flags win).
pub fn resolve(mode: Mode, file: Option<&Path>, cli: &ConfigOverrides) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::defaults(mode);
    let mut file_samples = false;
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        let over: ConfigOverrides =
            toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        over.parsed_grid()?;
        file_samples = over.samples.is_some();
        over.apply(&mut cfg);
    }
    cli.parsed_grid()?;
    cli.apply(&mut cfg);
    cfg.apply_depth_sample_policy(file_samples || cli.samples.is_some());
    cfg.validate()?;
    Ok(cfg)
}
