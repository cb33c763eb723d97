use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use super::angles::{check_k, AngleSet};
use super::closed_form::central_factor;
use crate::error::{Error, Result};
use crate::linalg::{self, real, CMatrix, CVector};
use crate::spin::{pos_operator, SpinSystem};
use crate::state::{QuditState, StateFile};

/// Eigenvalues closer than this to the top one count as degenerate.
pub(crate) const DEGENERACY_TOL: f64 = 1e-10;

/// `(1 + 1/K)/2`.
pub fn classical_bound(k: usize) -> Result<f64> {
    check_k(k)?;
    Ok((1.0 + 1.0 / k as f64) / 2.0)
}

/// Number of probing angles at which a gyroscope starting at `φ0` has `L_x ≥ 0`.
pub fn classical_positive_count(phi0: f64, angles: &AngleSet) -> usize {
    angles.angles().iter().filter(|&&a| (phi0 + a).cos() >= 0.0).count()
}

pub fn classical_score(phi0: f64, angles: &AngleSet) -> f64 {
    classical_positive_count(phi0, angles) as f64 / angles.k() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QMethod {
    /// Averages the frame-rotated positivity operator directly.
    BruteForce,
    /// Evaluates the binomial closed form of each matrix element.
    ClosedForm,
}

pub fn q_matrix(system: &SpinSystem, angles: &AngleSet, method: QMethod) -> Result<CMatrix> {
    let d = system.dim();
    if !d.is_multiple_of(2) {
        return Err(Error::UnsupportedDimension(d));
    }
    Ok(match method {
        QMethod::BruteForce => brute_force_q(system, angles)?,
        QMethod::ClosedForm => closed_form_q(system, angles),
    })
}

fn brute_force_q(system: &SpinSystem, angles: &AngleSet) -> Result<CMatrix> {
    let pos = pos_operator(system)?;
    let d = system.dim();
    let mut q = CMatrix::zeros(d, d);
    for &phi in angles.angles() {
        let u = system.rz(phi);
        q += &u * pos.matrix() * u.adjoint();
    }
    q /= real(angles.k() as f64);
    Ok((&q + q.adjoint()) * real(0.5))
}

/// `(1/K) Σ_k e^{−iφ_k Δ}`.
fn phase_average(angles: &AngleSet, delta: f64) -> Complex64 {
    let sum: Complex64 = angles.angles().iter().map(|&a| Complex64::from_polar(1.0, -a * delta)).sum();
    sum / angles.k() as f64
}

fn closed_form_q(system: &SpinSystem, angles: &AngleSet) -> CMatrix {
    let spin = system.spin();
    let d = spin.dim();
    let two_j = spin.twice() as i64;
    let prefactor = 2f64.powi(-(two_j as i32 - 1));
    CMatrix::from_fn(d, d, |a, b| {
        if a == b {
            return real(0.5);
        }
        // Index differences equal m' − m; only odd ones survive.
        let diff = b as i64 - a as i64;
        if diff.rem_euclid(2) == 0 {
            return real(0.0);
        }
        let sign = if ((diff - 1) / 2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        // J ± m for index a is a and 2J − a.
        let radicand = central_factor(a as u64)
            * central_factor((two_j - a as i64) as u64)
            * central_factor(b as u64)
            * central_factor((two_j - b as i64) as u64);
        let magnitude = 0.5 * sign * prefactor / diff as f64 * radicand.sqrt();
        phase_average(angles, spin.m(a) - spin.m(b)) * magnitude
    })
}

/// Top eigenvalue of `Q` and the states attaining it.
#[derive(Clone, Debug)]
pub struct Maximum {
    pub value: f64,
    /// One maximizing state; arbitrary within the eigenspace when `degenerate`.
    pub state: QuditState,
    pub degenerate: bool,
    /// Orthonormal basis of the maximizing eigenspace (columns).
    pub eigenspace: CMatrix,
}

impl Maximum {
    pub fn multiplicity(&self) -> usize {
        self.eigenspace.ncols()
    }

    /// Largest fidelity between `target` and any state in the maximizing eigenspace.
    pub fn eigenspace_fidelity(&self, target: &QuditState) -> f64 {
        let p = &self.eigenspace * self.eigenspace.adjoint();
        target.expectation(&p).unwrap_or(0.0).clamp(0.0, 1.0)
    }
}

pub fn max_quantum_score(system: &SpinSystem, angles: &AngleSet) -> Result<Maximum> {
    let q = q_matrix(system, angles, QMethod::ClosedForm)?;
    let top = linalg::top_eigenspace(&q, DEGENERACY_TOL);
    let state = QuditState::pure_normalized(system.spin(), top.vector())?;
    Ok(Maximum {
        value: top.value,
        state,
        degenerate: top.is_degenerate(),
        eigenspace: top.basis,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScoreReport {
    pub score: f64,
    pub classical_bound: f64,
    pub quantum_max: Option<f64>,
    pub violation: bool,
    pub state: Option<StateFile>,
}

pub fn quantum_score(state: &QuditState, angles: &AngleSet) -> Result<ScoreReport> {
    let system = SpinSystem::new(state.spin());
    let q = q_matrix(&system, angles, QMethod::ClosedForm)?;
    let score = state.expectation(&q)?;
    let bound = classical_bound(angles.k())?;
    let top = linalg::top_eigenspace(&q, DEGENERACY_TOL);
    Ok(ScoreReport {
        score,
        classical_bound: bound,
        quantum_max: Some(top.value),
        violation: score > bound,
        state: state.to_file().ok(),
    })
}

/// The same score as [`quantum_score`], averaging `⟨Pos⟩` over explicitly rotated states.
pub fn score_by_rotation(state: &QuditState, angles: &AngleSet) -> Result<f64> {
    let system = SpinSystem::new(state.spin());
    let pos = pos_operator(&system)?;
    let mut total = 0.0;
    for &phi in angles.angles() {
        let rotated = state.evolve(&system.rz(-phi));
        total += rotated.expectation(pos.matrix())?;
    }
    Ok(total / angles.k() as f64)
}

/// Fidelity of `target` with the nearest element of `candidates` modulo the protocol's
/// symmetries: a common `R_z(δ)` frame rotation and complex conjugation (mirrored angles).
///
/// `candidates` is an orthonormal basis (columns) of a state space, e.g. a degenerate
/// maximizing eigenspace.
pub fn symmetry_aligned_fidelity(target: &CVector, candidates: &CMatrix) -> f64 {
    let d = target.len();
    let j = (d as f64 - 1.0) / 2.0;
    let fid = |v: &CVector, delta: f64| {
        let rotated = CVector::from_iterator(
            d,
            v.iter().enumerate().map(|(i, a)| a * Complex64::from_polar(1.0, -(i as f64 - j) * delta)),
        );
        (candidates.adjoint() * rotated).norm_squared()
    };
    let mut best: f64 = 0.0;
    for v in [target.clone(), target.map(|a| a.conj())] {
        let grid = 4096;
        let (mut arg, mut val) = (0.0, f64::NEG_INFINITY);
        for g in 0..grid {
            let delta = TAU * g as f64 / grid as f64;
            let f = fid(&v, delta);
            if f > val {
                val = f;
                arg = delta;
            }
        }
        // Golden-section refinement around the best grid point.
        let h = TAU / grid as f64;
        let (mut lo, mut hi) = (arg - h, arg + h);
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..80 {
            let x1 = hi - ratio * (hi - lo);
            let x2 = lo + ratio * (hi - lo);
            if fid(&v, x1) >= fid(&v, x2) {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        best = best.max(val).max(fid(&v, 0.5 * (lo + hi)));
    }
    best.min(1.0)
}
