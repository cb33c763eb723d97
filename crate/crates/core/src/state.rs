//! Pure and mixed qudit states, and the JSON state-file format.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, real, CMatrix, CVector};
use crate::spin::{LevelRange, Spin, SpinSystem};

const NORM_TOL: f64 = 1e-12;
const FILE_NORM_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub enum QuditState {
    Pure { spin: Spin, amplitudes: CVector },
    Density { spin: Spin, matrix: CMatrix },
}

impl QuditState {
    pub fn pure(spin: Spin, amplitudes: CVector) -> Result<Self> {
        check_len(spin, amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!("state norm {norm} differs from 1")));
        }
        Ok(QuditState::Pure { spin, amplitudes })
    }

    /// Normalizes `amplitudes` first (vectors already unit to 1e-14 are kept bit-exact);
    /// fails only for a zero vector.
    pub fn pure_normalized(spin: Spin, amplitudes: CVector) -> Result<Self> {
        check_len(spin, amplitudes.len())?;
        let norm = amplitudes.norm();
        if norm < 1e-300 {
            return Err(Error::invalid("zero state vector"));
        }
        if (norm - 1.0).abs() <= 1e-14 {
            return Ok(QuditState::Pure { spin, amplitudes });
        }
        Ok(QuditState::Pure { spin, amplitudes: amplitudes / real(norm) })
    }

    /// Convenience for real coefficients listed in ascending-`m` order (normalized here).
    pub fn from_real(spin: Spin, coefficients: &[f64]) -> Result<Self> {
        Self::pure_normalized(spin, CVector::from_iterator(coefficients.len(), coefficients.iter().map(|&x| real(x))))
    }

    pub fn density(spin: Spin, matrix: CMatrix) -> Result<Self> {
        check_len(spin, matrix.nrows())?;
        if !linalg::is_hermitian(&matrix, NORM_TOL) {
            return Err(Error::invalid("density matrix is not Hermitian"));
        }
        let tr = matrix.trace();
        if (tr - real(1.0)).norm() > NORM_TOL {
            return Err(Error::invalid(format!("density matrix trace {tr} differs from 1")));
        }
        let eig = linalg::hermitian_eigen(&matrix);
        if eig.values[0] < -1e-10 {
            return Err(Error::invalid(format!("density matrix has eigenvalue {}", eig.values[0])));
        }
        Ok(QuditState::Density { spin, matrix })
    }

    /// `|m⟩` for basis index `index`.
    pub fn basis(spin: Spin, index: usize) -> Result<Self> {
        check_index(spin, index)?;
        let mut v = CVector::zeros(spin.dim());
        v[index] = real(1.0);
        Ok(QuditState::Pure { spin, amplitudes: v })
    }

    pub fn maximally_mixed(spin: Spin) -> Self {
        let d = spin.dim();
        QuditState::Density { spin, matrix: CMatrix::identity(d, d) * real(1.0 / d as f64) }
    }

    pub fn spin(&self) -> Spin {
        match self {
            QuditState::Pure { spin, .. } | QuditState::Density { spin, .. } => *spin,
        }
    }

    pub fn dim(&self) -> usize {
        self.spin().dim()
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, QuditState::Pure { .. })
    }

    pub fn amplitudes(&self) -> Option<&CVector> {
        match self {
            QuditState::Pure { amplitudes, .. } => Some(amplitudes),
            QuditState::Density { .. } => None,
        }
    }

    pub fn to_density(&self) -> CMatrix {
        match self {
            QuditState::Pure { amplitudes, .. } => amplitudes * amplitudes.adjoint(),
            QuditState::Density { matrix, .. } => matrix.clone(),
        }
    }

    pub fn into_density(self) -> Self {
        let spin = self.spin();
        let matrix = self.to_density();
        QuditState::Density { spin, matrix }
    }

    /// `U|ψ⟩` or `UρU†`.
    pub fn evolve(&self, u: &CMatrix) -> Self {
        match self {
            QuditState::Pure { spin, amplitudes } => {
                QuditState::Pure { spin: *spin, amplitudes: u * amplitudes }
            }
            QuditState::Density { spin, matrix } => {
                QuditState::Density { spin: *spin, matrix: u * matrix * u.adjoint() }
            }
        }
    }

    /// z-basis populations.
    pub fn populations(&self) -> Vec<f64> {
        match self {
            QuditState::Pure { amplitudes, .. } => amplitudes.iter().map(|a| a.norm_sqr()).collect(),
            QuditState::Density { matrix, .. } => (0..matrix.nrows()).map(|i| matrix[(i, i)].re).collect(),
        }
    }

    /// Places this state on the levels `range` of a larger `host` spin.
    pub fn embed(&self, host: Spin, range: LevelRange) -> Result<Self> {
        range.check_within(host.dim())?;
        if range.size() != self.dim() {
            return Err(Error::invalid(format!(
                "cannot embed a {}-level state into {} levels",
                self.dim(),
                range.size()
            )));
        }
        let d = host.dim();
        Ok(match self {
            QuditState::Pure { amplitudes, .. } => {
                let mut v = CVector::zeros(d);
                for (k, a) in amplitudes.iter().enumerate() {
                    v[range.lo + k] = *a;
                }
                QuditState::Pure { spin: host, amplitudes: v }
            }
            QuditState::Density { matrix, .. } => {
                let mut m = CMatrix::zeros(d, d);
                m.view_mut((range.lo, range.lo), (range.size(), range.size())).copy_from(matrix);
                QuditState::Density { spin: host, matrix: m }
            }
        })
    }

    /// Expectation value of a Hermitian observable.
    pub fn expectation(&self, observable: &CMatrix) -> Result<f64> {
        if observable.nrows() != self.dim() || observable.ncols() != self.dim() {
            return Err(Error::invalid(format!(
                "observable is {}x{}, state dimension {}",
                observable.nrows(),
                observable.ncols(),
                self.dim()
            )));
        }
        let value = match self {
            QuditState::Pure { amplitudes, .. } => linalg::quadratic_form(amplitudes, observable),
            QuditState::Density { matrix, .. } => (matrix * observable).trace(),
        };
        checked_real(value)
    }

    /// `(⟨I_x⟩, ⟨I_y⟩, ⟨I_z⟩)`.
    pub fn spin_vector(&self, system: &SpinSystem) -> Result<[f64; 3]> {
        Ok([
            self.expectation(system.ix())?,
            self.expectation(system.iy())?,
            self.expectation(system.iz())?,
        ])
    }

    pub fn to_file(&self) -> Result<StateFile> {
        let amps = self
            .amplitudes()
            .ok_or_else(|| Error::invalid("only pure states can be written to a state file"))?;
        Ok(StateFile {
            j: self.spin().j(),
            amplitudes: amps.iter().map(|a| [a.re, a.im]).collect(),
        })
    }
}

fn check_len(spin: Spin, len: usize) -> Result<()> {
    if len != spin.dim() {
        return Err(Error::invalid(format!("expected {} amplitudes for J = {spin}, got {len}", spin.dim())));
    }
    Ok(())
}

fn check_index(spin: Spin, index: usize) -> Result<()> {
    if index >= spin.dim() {
        return Err(Error::invalid(format!("level {index} outside dimension {}", spin.dim())));
    }
    Ok(())
}

/// Accepts an imaginary residue below 1e-8 and discards it.
pub(crate) fn checked_real(value: Complex64) -> Result<f64> {
    if value.im.abs() > 1e-8 {
        return Err(Error::NumericalInconsistency(format!(
            "expectation has imaginary part {:e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// `|⟨a|b⟩|²` for pure pairs, `⟨a|ρ|a⟩` for mixed/pure, Uhlmann fidelity otherwise.
pub fn fidelity(a: &QuditState, b: &QuditState) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::invalid(format!("dimensions {} and {} differ", a.dim(), b.dim())));
    }
    let f = match (a, b) {
        (QuditState::Pure { amplitudes: x, .. }, QuditState::Pure { amplitudes: y, .. }) => {
            x.dotc(y).norm_sqr()
        }
        (QuditState::Pure { amplitudes: x, .. }, QuditState::Density { matrix, .. })
        | (QuditState::Density { matrix, .. }, QuditState::Pure { amplitudes: x, .. }) => {
            linalg::quadratic_form(x, matrix).re
        }
        (QuditState::Density { matrix: r, .. }, QuditState::Density { matrix: s, .. }) => {
            let sr = linalg::sqrt_psd(r);
            let inner = linalg::sqrt_psd(&(&sr * s * &sr));
            inner.trace().re.powi(2)
        }
    };
    Ok(f.clamp(0.0, 1.0))
}

/// `R_z(φ) R_y(θ) |J, J⟩`, the coherent state pointing along `(θ, φ)`.
pub fn spin_coherent_state(system: &SpinSystem, theta: f64, phi: f64) -> QuditState {
    let spin = system.spin();
    let mut top = CVector::zeros(spin.dim());
    top[spin.dim() - 1] = real(1.0);
    if theta == 0.0 {
        return QuditState::Pure { spin, amplitudes: top };
    }
    let ry = linalg::expm_hermitian(system.iy(), theta);
    let amplitudes = system.rz(phi) * (ry * top);
    QuditState::Pure { spin, amplitudes }
}

/// `(|−s⟩ + e^{iφ}|+s⟩)/√2` with `s = subspace` embedded in `system`.
pub fn cat_state(system: &SpinSystem, subspace: Spin, relative_phase: f64) -> Result<QuditState> {
    let spin = system.spin();
    if subspace > spin || !(spin.twice() - subspace.twice()).is_multiple_of(2) {
        return Err(Error::invalid(format!("cat of spin {subspace} does not fit in spin {spin}")));
    }
    let lo = spin.index_of(-subspace.j()).expect("checked above");
    let hi = spin.index_of(subspace.j()).expect("checked above");
    let mut v = CVector::zeros(spin.dim());
    let s = std::f64::consts::FRAC_1_SQRT_2;
    v[lo] = real(s);
    v[hi] = Complex64::from_polar(s, relative_phase);
    Ok(QuditState::Pure { spin, amplitudes: v })
}

/// On-disk pure state: `{ "J": 3.5, "amplitudes": [[re, im], ...] }`, ascending `m`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StateFile {
    #[serde(rename = "J")]
    pub j: f64,
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateFile {
    /// Rejects vectors whose norm is off by more than 1e-6 unless `renormalize`.
    pub fn into_state(self, renormalize: bool) -> Result<QuditState> {
        let spin = Spin::from_j(self.j)?;
        let v = CVector::from_iterator(
            self.amplitudes.len(),
            self.amplitudes.iter().map(|[re, im]| Complex64::new(*re, *im)),
        );
        check_len(spin, v.len())?;
        let norm = v.norm();
        if !renormalize && (norm - 1.0).abs() > FILE_NORM_TOL {
            return Err(Error::invalid(format!(
                "state norm {norm} is not 1 (pass renormalize to accept)"
            )));
        }
        QuditState::pure_normalized(spin, v)
    }
}

pub fn parse_state(json: &str, renormalize: bool) -> Result<QuditState> {
    let file: StateFile = serde_json::from_str(json)?;
    file.into_state(renormalize)
}

pub fn read_state(path: impl AsRef<Path>, renormalize: bool) -> Result<QuditState> {
    parse_state(&std::fs::read_to_string(path)?, renormalize)
}

pub fn state_to_json(state: &QuditState) -> Result<String> {
    Ok(serde_json::to_string_pretty(&state.to_file()?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::pos_operator;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn sys72() -> SpinSystem {
        SpinSystem::from_j(3.5).unwrap()
    }

    #[test]
    fn coherent_state_at_pole_is_stretched_state() {
        let s = sys72();
        let st = spin_coherent_state(&s, 0.0, 1.3);
        assert_eq!(st.populations()[7], 1.0);
    }

    #[test]
    fn coherent_state_along_y() {
        let s = sys72();
        let st = spin_coherent_state(&s, FRAC_PI_2, FRAC_PI_2);
        let v = st.spin_vector(&s).unwrap();
        assert!((v[1] - 3.5).abs() < 1e-10);
        assert!(v[0].abs() < 1e-10 && v[2].abs() < 1e-10);
    }

    #[test]
    fn cat_state_layout_and_moments() {
        let s = sys72();
        let cat = cat_state(&s, s.spin(), PI).unwrap();
        let a = cat.amplitudes().unwrap();
        assert!((a[0] - real(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((a[7] + real(FRAC_1_SQRT_2)).norm() < 1e-15);
        for k in 1..7 {
            assert_eq!(a[k], real(0.0));
        }
        assert!((a.norm() - 1.0).abs() < 1e-15);
        for sub in [0.5, 1.5, 2.5, 3.5] {
            let c = cat_state(&s, Spin::from_j(sub).unwrap(), 0.4).unwrap();
            let v = c.spin_vector(&s).unwrap();
            if sub > 0.5 {
                assert!(v.iter().all(|x| x.abs() < 1e-12), "{sub}: {v:?}");
            }
        }
        assert!(cat_state(&s, Spin::from_j(3.0).unwrap(), 0.0).is_err());
        assert!(cat_state(&s, Spin::from_j(4.5).unwrap(), 0.0).is_err());
    }

    #[test]
    fn expectation_examples() {
        let s = sys72();
        let pos = pos_operator(&s).unwrap();
        let mixed = QuditState::maximally_mixed(s.spin());
        assert!((mixed.expectation(pos.matrix()).unwrap() - 0.5).abs() < 1e-14);
        let top = QuditState::basis(s.spin(), 7).unwrap();
        assert!((top.expectation(s.iz()).unwrap() - 3.5).abs() < 1e-14);
        let cat = cat_state(&s, s.spin(), PI).unwrap();
        assert!(cat.expectation(s.ix()).unwrap().abs() < 1e-14);
        assert!(cat.expectation(&CMatrix::identity(4, 4)).is_err());
    }

    #[test]
    fn non_hermitian_expectation_is_flagged() {
        let s = SpinSystem::from_j(0.5).unwrap();
        let st = QuditState::basis(s.spin(), 0).unwrap();
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = Complex64::new(0.0, 1.0);
        assert!(matches!(st.expectation(&m), Err(Error::NumericalInconsistency(_))));
    }

    #[test]
    fn fidelity_examples() {
        let s = sys72();
        let a = cat_state(&s, s.spin(), 0.0).unwrap();
        let b = cat_state(&s, s.spin(), PI).unwrap();
        assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-14);
        assert!(fidelity(&a, &b).unwrap() < 1e-14);
        let z0 = QuditState::basis(s.spin(), 0).unwrap();
        let z1 = QuditState::basis(s.spin(), 1).unwrap();
        assert_eq!(fidelity(&z0, &z1).unwrap(), 0.0);
        // Global phase does not matter.
        let phased = QuditState::Pure {
            spin: s.spin(),
            amplitudes: a.amplitudes().unwrap() * Complex64::from_polar(1.0, 0.77),
        };
        assert!((fidelity(&a, &phased).unwrap() - 1.0).abs() < 1e-14);
        // Mixed routes agree with the pure formula.
        let ad = a.clone().into_density();
        let pd = phased.into_density();
        assert!((fidelity(&ad, &pd).unwrap() - 1.0).abs() < 1e-7);
        assert!((fidelity(&ad, &b).unwrap()).abs() < 1e-12);
        let mixed = QuditState::maximally_mixed(s.spin());
        assert!((fidelity(&a, &mixed).unwrap() - 0.125).abs() < 1e-12);
    }

    #[test]
    fn density_validation() {
        let spin = Spin::from_j(0.5).unwrap();
        let bad_trace = CMatrix::identity(2, 2);
        assert!(QuditState::density(spin, bad_trace).is_err());
        let mut negative = CMatrix::zeros(2, 2);
        negative[(0, 0)] = real(1.5);
        negative[(1, 1)] = real(-0.5);
        assert!(QuditState::density(spin, negative).is_err());
        assert!(QuditState::density(spin, CMatrix::identity(2, 2) * real(0.5)).is_ok());
    }

    #[test]
    fn state_file_roundtrip_and_norm_check() {
        let s = sys72();
        let cat = cat_state(&s, s.spin(), PI).unwrap();
        let json = state_to_json(&cat).unwrap();
        let back = parse_state(&json, false).unwrap();
        assert!((fidelity(&cat, &back).unwrap() - 1.0).abs() < 1e-15);
        let unnormalized = r#"{"J": 0.5, "amplitudes": [[1, 0], [1, 0]]}"#;
        assert!(parse_state(unnormalized, false).is_err());
        let st = parse_state(unnormalized, true).unwrap();
        assert!((st.amplitudes().unwrap().norm() - 1.0).abs() < 1e-15);
        let wrong_len = r#"{"J": 1.5, "amplitudes": [[1, 0], [0, 0]]}"#;
        assert!(parse_state(wrong_len, true).is_err());
    }

    #[test]
    fn embedding_places_block() {
        let sub = cat_state(&SpinSystem::from_j(2.5).unwrap(), Spin::from_j(2.5).unwrap(), PI).unwrap();
        let host = Spin::from_j(3.5).unwrap();
        let e = sub.embed(host, LevelRange::new(1, 6).unwrap()).unwrap();
        let p = e.populations();
        assert!((p[1] - 0.5).abs() < 1e-15 && (p[6] - 0.5).abs() < 1e-15);
        let s = sys72();
        let direct = cat_state(&s, Spin::from_j(2.5).unwrap(), PI).unwrap();
        assert!((fidelity(&e, &direct).unwrap() - 1.0).abs() < 1e-14);
    }
}
