use std::f64::consts::TAU;

use super::angles::AngleSet;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::spin::{pos_operator, PosObservable, SpinSystem};
use crate::state::QuditState;

fn rotated_pos(system: &SpinSystem, pos: &PosObservable, state: &QuditState, phi: f64) -> Result<f64> {
    state.evolve(&system.rz(-phi)).expectation(pos.matrix())
}

/// `⟨Pos(I_x)⟩` of the state after precessing by `φ`, i.e. on `e^{iφI_z}|ψ⟩`.
pub fn pos_at(state: &QuditState, phi: f64) -> Result<f64> {
    let system = SpinSystem::new(state.spin());
    let pos = pos_operator(&system)?;
    rotated_pos(&system, &pos, state, phi)
}

/// `⟨Pos⟩` at `n_points` uniform precession angles in `[0, 2π)`.
pub fn pos_sweep(state: &QuditState, n_points: usize, exec: Execution) -> Result<Vec<(f64, f64)>> {
    if n_points < 2 {
        return Err(Error::invalid("a sweep needs at least 2 points"));
    }
    let system = SpinSystem::new(state.spin());
    let pos = pos_operator(&system)?;
    exec.map_indexed(n_points, |i| {
        let phi = TAU * i as f64 / n_points as f64;
        rotated_pos(&system, &pos, state, phi).map(|p| (phi, p))
    })
    .into_iter()
    .collect()
}

/// Score of `state` on the uniform set with offset `φ0`.
pub fn uniform_score(state: &QuditState, k: usize, phi0: f64) -> Result<f64> {
    super::score::quantum_score(state, &AngleSet::uniform(k, phi0)?).map(|r| r.score)
}

/// Offset in `[0, 2π/K)` maximizing the uniform score of `state`, found by a dense grid
/// followed by golden-section refinement. Returns `(φ0, score)`.
pub fn best_uniform_offset(state: &QuditState, k: usize) -> Result<(f64, f64)> {
    let period = TAU / k as f64;
    let grid = 720;
    let mut best = (0.0, f64::NEG_INFINITY);
    for g in 0..grid {
        let phi0 = period * g as f64 / grid as f64;
        let s = uniform_score(state, k, phi0)?;
        if s > best.1 {
            best = (phi0, s);
        }
    }
    let h = period / grid as f64;
    let (mut lo, mut hi) = (best.0 - h, best.0 + h);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let x1 = hi - ratio * (hi - lo);
        let x2 = lo + ratio * (hi - lo);
        if uniform_score(state, k, x1)? >= uniform_score(state, k, x2)? {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let mid = 0.5 * (lo + hi);
    let s = uniform_score(state, k, mid)?;
    if s > best.1 {
        best = (mid.rem_euclid(period), s);
    }
    Ok(best)
}

/// Number of strict local maxima of a periodic sequence whose prominence over the
/// neighbouring minima exceeds `tol`.
pub fn count_periodic_maxima(values: &[f64], tol: f64) -> usize {
    let n = values.len();
    if n < 3 {
        return 0;
    }
    // Walk once around the cycle starting from a global minimum, tracking alternation.
    let start = (0..n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    let mut count = 0;
    let mut low = values[start];
    let mut high = f64::NEG_INFINITY;
    let mut rising = true;
    for step in 1..=n {
        let v = values[(start + step) % n];
        if rising {
            if v > high {
                high = v;
            }
            if high - v > tol && high - low > tol {
                count += 1;
                rising = false;
                low = v;
            }
        } else {
            if v < low {
                low = v;
            }
            if v - low > tol {
                rising = true;
                high = v;
            }
        }
    }
    count
}
