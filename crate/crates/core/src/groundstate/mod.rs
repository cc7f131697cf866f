//! Exact ground states of the toric code in a magnetic field on small tori.
//!
//! `H = -sum A - sum B - h_z sum Z - h_x sum X - penalty (W_Z + W_X)` with
//! `W_Z` the Z loop on the vertical edges of row 0 and `W_X` the X loop on the
//! horizontal edges of row 0. The two loops commute, so a positive penalty picks
//! one state out of the four-fold degenerate zero-field ground space.

pub mod hamiltonian;
pub mod lanczos;
pub mod sampling;

pub use hamiltonian::{build_hamiltonian, FieldParams, SparseHamiltonian, DEFAULT_QUBIT_CAP};
pub use lanczos::{lowest_eigenpair, lowest_eigenpairs, EigenPair, LanczosOptions};
pub use sampling::{index_to_bits, sample_snapshots, SnapshotSampler, StateVector};

use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::scalar::Real;

/// Penalty weight used when none is given.
pub const DEFAULT_PENALTY: f64 = 1.0;

/// Shift applied to the fields in the first multicritical stage.
pub const DEFAULT_DELTA: f64 = 0.05;

/// A solved ground state together with its diagnostics.
#[derive(Clone, Debug)]
pub struct GroundState<T> {
    pub state: StateVector<T>,
    pub energy: f64,
    pub residual: f64,
    /// Parameters of the final (unpenalised) solve.
    pub params: FieldParams,
}

/// Lowest eigenvector of `h`, checked against `opts.tol`.
pub fn ground_state<T: Real>(
    h: &SparseHamiltonian<T>,
    start: Option<&[T]>,
    opts: &LanczosOptions,
) -> Result<GroundState<T>> {
    let pair = lowest_eigenpair(h, start, opts)?;
    if !(pair.residual < opts.tol) {
        return Err(Error::NotConverged { iterations: opts.max_matvecs, residual: pair.residual });
    }
    let state = StateVector::new(pair.vector)?;
    Ok(GroundState { energy: pair.value.to_f64_lossy(), residual: pair.residual, state, params: h.params() })
}

/// Two-step solve: with the penalty in `params`, then at zero penalty warm-started
/// from the penalised state. A zero penalty gives a single solve.
pub fn solve_two_step<T: Real>(
    geom: &LatticeGeometry,
    params: FieldParams,
    start: Option<&[T]>,
    qubit_cap: usize,
    opts: &LanczosOptions,
) -> Result<GroundState<T>> {
    let h = build_hamiltonian::<T>(geom, params, qubit_cap)?;
    let first = ground_state(&h, start, opts)?;
    if params.penalty == 0.0 {
        return Ok(first);
    }
    let h0 = h.with_params(params.without_penalty())?;
    ground_state(&h0, Some(first.state.amplitudes()), opts)
}

/// Stage parameters for a point on the `h_x = h_z = h` line: first
/// `(h - delta, h + delta)` with the penalty, then `(h, h)` without it.
pub fn multicritical_init(h: f64, delta: f64, penalty: f64) -> Result<(FieldParams, FieldParams)> {
    if !(h.is_finite() && h >= 0.0) {
        return Err(Error::InvalidParameter(format!("multicritical field must be finite and >= 0, got {h}")));
    }
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "delta must be finite and nonzero (got {delta}); at delta = 0 the selected state is undefined"
        )));
    }
    Ok((FieldParams::new(h - delta, h + delta, penalty)?, FieldParams::new(h, h, 0.0)?))
}

/// Runs both multicritical stages. The second stage is warm-started from the first.
pub fn solve_multicritical<T: Real>(
    geom: &LatticeGeometry,
    h: f64,
    delta: f64,
    penalty: f64,
    qubit_cap: usize,
    opts: &LanczosOptions,
) -> Result<GroundState<T>> {
    let (stage1, stage2) = multicritical_init(h, delta, penalty)?;
    let first = solve_two_step::<T>(geom, stage1, None, qubit_cap, opts)?;
    let h2 = build_hamiltonian::<T>(geom, stage2, qubit_cap)?;
    ground_state(&h2, Some(first.state.amplitudes()), opts)
}
