//! Threshold read-off from crossings of output curves: the final layers of runs
//! at successive depths, or successive layers of a single run.

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::sweeps::{run_noise_sweep, ReadoutBasis, SweepResult};
use crate::error::{Error, Result};

/// `(x, mean, stderr)` points of one output curve.
type Curve = Vec<(f64, f64, f64)>;

/// Crossing of two curves, labelled by depth or layer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub lower: usize,
    pub upper: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub crossings: Vec<Crossing>,
    pub mean: f64,
    /// Half the range of the individual crossings.
    pub spread: f64,
    /// Grid spacing around the crossings.
    pub resolution: f64,
}

/// First point where `a - b` changes sign, by linear interpolation between grid
/// points. Points where the curves coincide exactly are skipped.
pub fn find_crossing(xs: &[f64], a: &[f64], b: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        xs.iter().zip(a.iter().zip(b)).map(|(&x, (&u, &v))| (x, u - v)).filter(|&(_, d)| d != 0.0).collect();
    pts.windows(2).find(|w| w[0].1.signum() != w[1].1.signum()).map(|w| {
        let ((x0, d0), (x1, d1)) = (w[0], w[1]);
        x0 + (x1 - x0) * d0 / (d0 - d1)
    })
}

/// Pairwise crossings of successive labelled curves `(x, mean, stderr)`.
fn crossings_of(kind: &str, curves: &[(usize, Curve)]) -> Result<ThresholdEstimate> {
    if curves.len() < 2 {
        return Err(Error::InvalidParameter(format!("need at least two curves, got {}", curves.len())));
    }
    let xs: Vec<f64> = curves[0].1.iter().map(|p| p.0).collect();
    for (label, c) in curves {
        if c.is_empty() || c.iter().map(|p| p.0).ne(xs.iter().copied()) {
            return Err(Error::InvalidParameter(format!("{kind} {label} is missing or not on the common grid")));
        }
    }
    let mut crossings = Vec::new();
    for w in curves.windows(2) {
        let ((lower, lo), (upper, hi)) = (&w[0], &w[1]);
        let a: Vec<f64> = hi.iter().map(|p| p.1).collect();
        let b: Vec<f64> = lo.iter().map(|p| p.1).collect();
        let value = find_crossing(&xs, &a, &b).ok_or_else(|| {
            Error::NoCrossing(format!("{kind}s {lower} and {upper} do not cross on [{}, {}]", xs[0], xs[xs.len() - 1]))
        })?;
        crossings.push(Crossing { lower: *lower, upper: *upper, value });
    }
    let mean = crossings.iter().map(|c| c.value).sum::<f64>() / crossings.len() as f64;
    let (lo, hi) = crossings.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| (lo.min(c.value), hi.max(c.value)));
    let resolution = xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    Ok(ThresholdEstimate { crossings, mean, spread: (hi - lo) / 2.0, resolution })
}

/// Crossings of the final-layer curves of runs at different depths, taken in
/// order of increasing depth.
pub fn estimate_threshold(results: &[SweepResult], basis: ReadoutBasis) -> Result<ThresholdEstimate> {
    let mut curves: Vec<(usize, Curve)> = results
        .iter()
        .map(|r| {
            let d = r.metadata.config.depth;
            (d, r.curve(d, basis))
        })
        .collect();
    curves.sort_by_key(|c| c.0);
    if curves.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::InvalidParameter("two runs share a depth".into()));
    }
    crossings_of("depth", &curves)
}

/// Crossings of successive `layers` of a single run.
pub fn estimate_threshold_layers(result: &SweepResult, basis: ReadoutBasis, layers: &[usize]) -> Result<ThresholdEstimate> {
    let curves: Vec<_> = layers.iter().map(|&l| (l, result.curve(l, basis))).collect();
    crossings_of("layer", &curves)
}

/// Readout basis sensitive to the swept noise: Z errors show up in X-basis pooling.
pub fn threshold_basis(cfg: &ExperimentConfig) -> ReadoutBasis {
    match cfg.sweep {
        super::config::SweepParam::Px => ReadoutBasis::Z,
        _ => ReadoutBasis::X,
    }
}

/// Runs one noise sweep per threshold depth.
pub fn run_threshold_sweeps(cfg: &ExperimentConfig) -> Result<Vec<SweepResult>> {
    cfg.threshold_depths()
        .into_iter()
        .map(|d| {
            let mut c = cfg.clone();
            c.depth = d;
            c.samples = cfg.samples_at(d);
            c.depths.clear();
            log::info!("threshold sweep at depth {d}, {} samples per point", c.samples);
            run_noise_sweep(&c)
        })
        .collect()
}
