//! Spherical spin-Wigner function `W(θ, φ) = √(2/π) Σ_kq ρ_kq Y_kq(θ, φ)` with
//! `ρ_kq = Tr(T_kq† ρ)`.

mod clebsch;
mod harmonics;

pub use clebsch::{clebsch_gordan, TensorBasis};
pub use harmonics::spherical_harmonics;

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::CMatrix;
use crate::protocol::count_periodic_maxima;
use crate::spin::{LevelRange, Spin};
use crate::state::QuditState;

/// Imaginary parts above this make [`wigner_value`] fail.
const IMAG_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct MultipoleDecomposition {
    spin: Spin,
    /// `coeffs[k][q + k]`.
    coeffs: Vec<Vec<Complex64>>,
}

impl MultipoleDecomposition {
    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn max_rank(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn get(&self, k: usize, q: i64) -> Complex64 {
        self.coeffs[k][(q + k as i64) as usize]
    }

    pub fn coefficients(&self) -> &[Vec<Complex64>] {
        &self.coeffs
    }

    /// `Σ ρ_kq T_kq`.
    pub fn reconstruct(&self, basis: &TensorBasis) -> CMatrix {
        let d = self.spin.dim();
        let mut rho = CMatrix::zeros(d, d);
        for (k, row) in self.coeffs.iter().enumerate() {
            for (qi, c) in row.iter().enumerate() {
                rho += basis.get(k, qi as i64 - k as i64) * *c;
            }
        }
        rho
    }

    /// Largest violation of `ρ_{k,−q} = (−1)^q ρ_kq*`.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, row) in self.coeffs.iter().enumerate() {
            let k = k as i64;
            for q in 0..=k {
                let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                let diff = row[(k - q) as usize] - row[(k + q) as usize].conj() * sign;
                worst = worst.max(diff.norm());
            }
        }
        worst
    }

    /// `W(θ, φ)` with its imaginary residue.
    pub fn evaluate(&self, theta: f64, phi: f64) -> Complex64 {
        let y = spherical_harmonics(self.max_rank(), theta, phi);
        let sum: Complex64 = self
            .coeffs
            .iter()
            .zip(&y)
            .flat_map(|(c, yk)| c.iter().zip(yk).map(|(a, b)| a * b))
            .sum();
        sum * (2.0 / PI).sqrt()
    }
}

pub fn multipole_decompose(state: &QuditState) -> Result<MultipoleDecomposition> {
    let basis = TensorBasis::new(state.spin())?;
    Ok(decompose_with(&basis, state))
}

pub fn decompose_with(basis: &TensorBasis, state: &QuditState) -> MultipoleDecomposition {
    let rho = state.to_density();
    let coeffs = (0..=basis.max_rank())
        .map(|k| {
            (-(k as i64)..=k as i64)
                .map(|q| basis.get(k, q).iter().zip(rho.iter()).map(|(t, r)| t.conj() * r).sum())
                .collect()
        })
        .collect();
    MultipoleDecomposition { spin: state.spin(), coeffs }
}

fn checked_real(w: Complex64) -> Result<f64> {
    if w.im.abs() > IMAG_TOL {
        return Err(Error::NumericalInconsistency(format!("Wigner value has imaginary part {}", w.im)));
    }
    Ok(w.re)
}

pub fn wigner_value(state: &QuditState, theta: f64, phi: f64) -> Result<f64> {
    checked_real(multipole_decompose(state)?.evaluate(theta, phi))
}

/// `W` sampled at `θ_i = πi/(n_θ−1)` (poles included) and `φ_j = 2πj/n_φ`.
#[derive(Clone, Debug, Serialize)]
pub struct WignerGrid {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// `values[i][j]` at `(theta[i], phi[j])`.
    pub values: Vec<Vec<f64>>,
}

impl WignerGrid {
    pub fn argmax(&self) -> (f64, f64, f64) {
        let mut best = (0.0, 0.0, f64::NEG_INFINITY);
        for (i, row) in self.values.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                if w > best.2 {
                    best = (self.theta[i], self.phi[j], w);
                }
            }
        }
        best
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,phi,w\n");
        for (i, row) in self.values.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                let _ = writeln!(out, "{:.12e},{:.12e},{:.12e}", self.theta[i], self.phi[j], w);
            }
        }
        out
    }
}

pub fn wigner_grid(state: &QuditState, n_theta: usize, n_phi: usize, exec: Execution) -> Result<WignerGrid> {
    if n_theta < 2 || n_phi < 1 {
        return Err(Error::invalid("Wigner grid needs n_theta ≥ 2 and n_phi ≥ 1"));
    }
    let dec = multipole_decompose(state)?;
    let theta: Vec<f64> = (0..n_theta).map(|i| PI * i as f64 / (n_theta - 1) as f64).collect();
    let phi: Vec<f64> = (0..n_phi).map(|j| TAU * j as f64 / n_phi as f64).collect();
    let values = exec
        .map_indexed(n_theta, |i| phi.iter().map(|&p| checked_real(dec.evaluate(theta[i], p))).collect())
        .into_iter()
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(WignerGrid { theta, phi, values })
}

/// Number of maxima of `W(π/2, φ)` over a full turn, sampled at `n_points`.
pub fn equatorial_fringes(state: &QuditState, n_points: usize) -> Result<usize> {
    let dec = multipole_decompose(state)?;
    let profile = (0..n_points)
        .map(|j| checked_real(dec.evaluate(PI / 2.0, TAU * j as f64 / n_points as f64)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(count_periodic_maxima(&profile, 1e-9))
}

/// Block of the density matrix on `subspace`, renormalized to unit trace. Intended for
/// visualization only: it discards coherences with the rest of the space.
pub fn truncate_density(state: &QuditState, subspace: LevelRange) -> Result<QuditState> {
    subspace.check_within(state.dim())?;
    let rho = state.to_density();
    let n = subspace.size();
    let block = rho.view((subspace.lo, subspace.lo), (n, n)).into_owned();
    let weight = block.trace().re;
    if weight <= 1e-12 {
        return Err(Error::DegenerateTruncation { weight });
    }
    QuditState::density(subspace.spin(), block / Complex64::new(weight, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, CVector};
    use crate::spin::SpinSystem;
    use crate::state::{cat_state, fidelity, spin_coherent_state};
    use proptest::prelude::*;

    fn j72() -> Spin {
        Spin::from_dim(8).unwrap()
    }

    fn random_density(spin: Spin, re: &[f64], im: &[f64]) -> QuditState {
        let d = spin.dim();
        let a = CMatrix::from_fn(d, d, |r, c| Complex64::new(re[r * d + c], im[r * d + c]));
        let rho = &a * a.adjoint();
        let tr = rho.trace();
        QuditState::density(spin, rho / tr).unwrap()
    }

    #[test]
    fn mixed_state_has_only_monopole() {
        let st = QuditState::maximally_mixed(j72());
        let dec = multipole_decompose(&st).unwrap();
        assert!((dec.get(0, 0).re - 1.0 / 8f64.sqrt()).abs() < 1e-12);
        for k in 1..=7 {
            for q in -(k as i64)..=k as i64 {
                assert!(dec.get(k, q).norm() < 1e-12);
            }
        }
        let expected = (2.0 / PI).sqrt() / (4.0 * PI).sqrt() / 8f64.sqrt();
        for (t, p) in [(0.1, 0.2), (1.5, 4.0), (3.0, 6.0)] {
            assert!((wigner_value(&st, t, p).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn cat_carries_top_rank_coherence() {
        let s = SpinSystem::new(j72());
        let cat = cat_state(&s, j72(), PI).unwrap();
        let dec = multipole_decompose(&cat).unwrap();
        assert!(dec.get(7, 7).norm() > 0.1);
        assert!(dec.get(7, -7).norm() > 0.1);
        for k in 0..7 {
            for q in -(k as i64)..=k as i64 {
                if q != 0 {
                    assert!(dec.get(k, q).norm() < 1e-12);
                }
            }
        }
        assert_eq!(equatorial_fringes(&cat, 720).unwrap(), 7);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]
        #[test]
        fn decomposition_invariants(re in prop::collection::vec(-1.0..1.0f64, 64), im in prop::collection::vec(-1.0..1.0f64, 64), t in 0.0..PI, p in 0.0..TAU) {
            let st = random_density(j72(), &re, &im);
            let basis = TensorBasis::new(j72()).unwrap();
            let dec = decompose_with(&basis, &st);
            prop_assert!(dec.hermiticity_residual() < 1e-10);
            prop_assert!(max_abs_diff(&dec.reconstruct(&basis), &st.to_density()) < 1e-10);
            prop_assert!(dec.evaluate(t, p).im.abs() < 1e-10);
        }

        #[test]
        fn wigner_is_linear(re in prop::collection::vec(-1.0..1.0f64, 32), w in 0.0..1.0f64, t in 0.0..PI, p in 0.0..TAU) {
            let spin = Spin::from_dim(4).unwrap();
            let a = random_density(spin, &re[..16], &re[16..]);
            let b = random_density(spin, &re[16..], &re[..16]);
            let mix = QuditState::density(spin, a.to_density() * Complex64::new(w, 0.0) + b.to_density() * Complex64::new(1.0 - w, 0.0)).unwrap();
            let lhs = wigner_value(&mix, t, p).unwrap();
            let rhs = w * wigner_value(&a, t, p).unwrap() + (1.0 - w) * wigner_value(&b, t, p).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn coherent_state_peaks_at_its_direction() {
        let s = SpinSystem::new(j72());
        for (t, p) in [(PI / 3.0, 2.0 * PI / 5.0), (PI / 2.0, PI / 2.0), (0.0, 0.0)] {
            let st = spin_coherent_state(&s, t, p);
            let grid = wigner_grid(&st, 100, 200, Execution::default()).unwrap();
            let (gt, gp, _) = grid.argmax();
            let cos_angle = gt.sin() * t.sin() * (gp - p).cos() + gt.cos() * t.cos();
            assert!(cos_angle > (2.0 * PI / 100.0).cos(), "peak at ({gt}, {gp}) for ({t}, {p})");
        }
    }

    #[test]
    fn rotational_covariance() {
        let s = SpinSystem::new(j72());
        let v = CVector::from_iterator(8, (0..8).map(|i| Complex64::new((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos())));
        let st = QuditState::pure_normalized(j72(), v).unwrap();
        // Rotation about y by β maps (θ, φ=0) to (θ+β, 0) for small angles.
        let beta = 0.4;
        let rotated = st.evolve(&s.rotation([0.0, 1.0, 0.0], beta).unwrap());
        for t in [0.5, 1.0, 2.0] {
            let a = wigner_value(&rotated, t + beta, 0.0).unwrap();
            let b = wigner_value(&st, t, 0.0).unwrap();
            assert!((a - b).abs() < 1e-9);
        }
        let rz = st.evolve(&s.rz(0.9));
        for (t, p) in [(0.5, 0.1), (1.7, 2.5)] {
            assert!((wigner_value(&rz, t, p + 0.9).unwrap() - wigner_value(&st, t, p).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn truncation() {
        let s = SpinSystem::new(j72());
        let st = spin_coherent_state(&s, 1.0, 0.3);
        let full = truncate_density(&st, LevelRange::full(8)).unwrap();
        assert!(max_abs_diff(&full.to_density(), &st.to_density()) < 1e-14);

        let sub = Spin::from_dim(6).unwrap();
        let cat6 = cat_state(&SpinSystem::new(sub), sub, 0.0).unwrap();
        let r = LevelRange::new(1, 6).unwrap();
        let t = truncate_density(&cat6.embed(j72(), r).unwrap(), r).unwrap();
        assert!((t.to_density().trace().re - 1.0).abs() < 1e-14);
        assert!(fidelity(&t, &cat6).unwrap() > 1.0 - 1e-12);

        let ground = QuditState::basis(j72(), 0).unwrap();
        assert!(matches!(
            truncate_density(&ground, LevelRange::new(2, 5).unwrap()),
            Err(Error::DegenerateTruncation { .. })
        ));
    }

    #[test]
    fn grid_csv_shape() {
        let st = QuditState::basis(Spin::from_dim(2).unwrap(), 1).unwrap();
        let g = wigner_grid(&st, 3, 4, Execution::Sequential).unwrap();
        let csv = g.to_csv();
        assert_eq!(csv.lines().count(), 1 + 12);
        assert!(csv.starts_with("theta,phi,w\n"));
        assert!(wigner_grid(&st, 1, 4, Execution::Sequential).is_err());
    }
}
