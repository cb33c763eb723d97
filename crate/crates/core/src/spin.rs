//! Spin-J operators in the `I_z` eigenbasis, rotations and the positivity observable.
//!
//! Basis vectors are ordered by ascending magnetic quantum number,
//! index `i` ↔ `m = i − J`.

use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, real, CMatrix};

/// A spin quantum number, stored as `2J` so half-integers are exact. Serialized as `J`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Spin(u32);

impl TryFrom<f64> for Spin {
    type Error = Error;

    fn try_from(j: f64) -> Result<Self> {
        Spin::from_j(j)
    }
}

impl From<Spin> for f64 {
    fn from(s: Spin) -> f64 {
        s.j()
    }
}

impl Spin {
    pub fn from_twice(twice_j: u32) -> Result<Self> {
        if twice_j == 0 {
            return Err(Error::invalid("spin must be positive"));
        }
        Ok(Spin(twice_j))
    }

    pub fn from_j(j: f64) -> Result<Self> {
        let twice = 2.0 * j;
        if !twice.is_finite() || twice <= 0.0 || (twice - twice.round()).abs() > 1e-9 {
            return Err(Error::invalid(format!("J = {j} is not a positive half-integer")));
        }
        Self::from_twice(twice.round() as u32)
    }

    pub fn from_dim(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::invalid(format!("dimension {d} must be at least 2")));
        }
        Self::from_twice((d - 1) as u32)
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn j(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }

    /// Magnetic quantum number of basis index `i`.
    pub fn m(self, i: usize) -> f64 {
        i as f64 - self.j()
    }

    /// Basis index of magnetic quantum number `m`, if it is a level of this spin.
    pub fn index_of(self, m: f64) -> Option<usize> {
        let i = m + self.j();
        if (i - i.round()).abs() > 1e-9 || i.round() < 0.0 || i.round() as usize >= self.dim() {
            None
        } else {
            Some(i.round() as usize)
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// A contiguous block of levels `lo..=hi` (basis indices).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRange {
    pub lo: usize,
    pub hi: usize,
}

impl LevelRange {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if hi <= lo {
            return Err(Error::invalid(format!("level range {lo}..{hi} must contain at least two levels")));
        }
        Ok(LevelRange { lo, hi })
    }

    pub fn full(dim: usize) -> Self {
        LevelRange { lo: 0, hi: dim - 1 }
    }

    /// The `size` central levels of a `dim`-level system, e.g. `|±5/2⟩` inside spin 7/2.
    pub fn centered(dim: usize, size: usize) -> Result<Self> {
        if size < 2 || size > dim || !(dim - size).is_multiple_of(2) {
            return Err(Error::invalid(format!("cannot center {size} levels in dimension {dim}")));
        }
        let lo = (dim - size) / 2;
        Self::new(lo, lo + size - 1)
    }

    /// Builds a range from an explicit level list, which must be contiguous.
    pub fn from_levels(levels: &[usize]) -> Result<Self> {
        let mut sorted = levels.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() < 2 {
            return Err(Error::invalid("a subspace needs at least two levels"));
        }
        if sorted.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(Error::invalid(format!("levels {sorted:?} are not contiguous")));
        }
        Self::new(sorted[0], *sorted.last().unwrap())
    }

    pub fn size(self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn levels(self) -> RangeInclusive<usize> {
        self.lo..=self.hi
    }

    pub fn contains(self, i: usize) -> bool {
        (self.lo..=self.hi).contains(&i)
    }

    /// Spin of the standalone system this block emulates.
    pub fn spin(self) -> Spin {
        Spin((self.size() - 1) as u32)
    }

    /// Levels whose emulated `m` is positive.
    pub fn upper_half(self) -> RangeInclusive<usize> {
        (self.lo + self.size() / 2)..=self.hi
    }

    pub fn check_within(self, dim: usize) -> Result<()> {
        if self.hi >= dim {
            return Err(Error::invalid(format!(
                "level range {}..{} exceeds dimension {dim}",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    pub fn require_even(self) -> Result<()> {
        if !self.size().is_multiple_of(2) {
            return Err(Error::invalid(format!("subspace size {} must be even", self.size())));
        }
        Ok(())
    }
}

impl fmt::Display for LevelRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

impl std::str::FromStr for LevelRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = s
            .split_once("..")
            .ok_or_else(|| Error::invalid(format!("expected LO..HI, got '{s}'")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::invalid(format!("bad level index '{t}'")))
        };
        LevelRange::new(parse(lo)?, parse(hi)?)
    }
}

/// Spin operators `I_x`, `I_y`, `I_z` for one spin quantum number.
#[derive(Clone, Debug)]
pub struct SpinSystem {
    spin: Spin,
    ix: CMatrix,
    iy: CMatrix,
    iz: CMatrix,
}

impl SpinSystem {
    pub fn new(spin: Spin) -> Self {
        let d = spin.dim();
        let j = spin.j();
        let mut raise = CMatrix::zeros(d, d);
        for i in 0..d - 1 {
            raise[(i + 1, i)] = real(ladder_coefficient(j, spin.m(i)));
        }
        let lower = raise.adjoint();
        let ix = (&raise + &lower) * real(0.5);
        let iy = (&raise - &lower) * c(0.0, -0.5);
        let iz = linalg::diag((0..d).map(|i| real(spin.m(i))));
        SpinSystem { spin, ix, iy, iz }
    }

    pub fn from_j(j: f64) -> Result<Self> {
        Ok(Self::new(Spin::from_j(j)?))
    }

    pub fn from_dim(d: usize) -> Result<Self> {
        Ok(Self::new(Spin::from_dim(d)?))
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn j(&self) -> f64 {
        self.spin.j()
    }

    pub fn dim(&self) -> usize {
        self.spin.dim()
    }

    pub fn ix(&self) -> &CMatrix {
        &self.ix
    }

    pub fn iy(&self) -> &CMatrix {
        &self.iy
    }

    pub fn iz(&self) -> &CMatrix {
        &self.iz
    }

    /// `n·I` for a (not necessarily normalized) direction.
    pub fn component(&self, n: [f64; 3]) -> CMatrix {
        &self.ix * real(n[0]) + &self.iy * real(n[1]) + &self.iz * real(n[2])
    }

    /// Active rotation `exp(−iθ n·I)` about the unit axis `n`.
    pub fn rotation(&self, axis: [f64; 3], angle: f64) -> Result<CMatrix> {
        let norm = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("rotation axis has norm {norm}, expected 1")));
        }
        if axis[0] == 0.0 && axis[1] == 0.0 {
            return Ok(self.rz(axis[2] * angle));
        }
        Ok(linalg::expm_hermitian(&self.component(axis), angle))
    }

    /// `R_z(φ) = exp(−iφ I_z)`, diagonal with entries `e^{−imφ}`.
    pub fn rz(&self, phi: f64) -> CMatrix {
        let s = self.spin;
        linalg::diag((0..s.dim()).map(|i| num_complex::Complex64::from_polar(1.0, -s.m(i) * phi)))
    }

    /// The measurement-basis change `B` with `B I_x B† = I_z`.
    ///
    /// This is `exp(+i(π/2) I_y)`, a π/2 rotation about −y.
    pub fn basis_rotation(&self) -> CMatrix {
        linalg::expm_hermitian(&self.iy, -std::f64::consts::FRAC_PI_2)
    }

    /// Projector onto the positive-`m` levels.
    pub fn positive_z_projector(&self) -> CMatrix {
        let s = self.spin;
        linalg::diag((0..s.dim()).map(|i| real(if s.m(i) > 0.0 { 1.0 } else { 0.0 })))
    }
}

/// `⟨m+1|I_+|m⟩ = √(J(J+1) − m(m+1))`.
pub fn ladder_coefficient(j: f64, m: f64) -> f64 {
    (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
}

/// `Pos(I_x) = ½[𝕀 + sgn(I_x)]`, the projector onto positive `I_x` eigenvalues.
#[derive(Clone, Debug)]
pub struct PosObservable {
    matrix: CMatrix,
}

impl PosObservable {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `sgn(I_x) = 2 Pos − 𝕀`.
    pub fn sign(&self) -> CMatrix {
        let n = self.matrix.nrows();
        &self.matrix * real(2.0) - CMatrix::identity(n, n)
    }
}

/// Builds `Pos(I_x)` by carrying the positive-`m` projector through the basis rotation:
/// `Pos(I_x) = B† Π₊ B` because `B† I_z B = I_x`.
pub fn pos_operator(system: &SpinSystem) -> Result<PosObservable> {
    let d = system.dim();
    if !d.is_multiple_of(2) {
        return Err(Error::UnsupportedDimension(d));
    }
    let b = system.basis_rotation();
    let mut matrix = b.adjoint() * system.positive_z_projector() * &b;
    matrix = (&matrix + matrix.adjoint()) * real(0.5);
    Ok(PosObservable { matrix })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, hermitian_eigen, max_abs_diff, I};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn spins() -> impl Iterator<Item = SpinSystem> {
        (1..=9).map(|t| SpinSystem::new(Spin::from_twice(t).unwrap()))
    }

    #[test]
    fn commutation_relations() {
        for s in spins() {
            let (x, y, z) = (s.ix(), s.iy(), s.iz());
            assert!(max_abs_diff(&commutator(x, y), &(z * I)) < 1e-12);
            assert!(max_abs_diff(&commutator(y, z), &(x * I)) < 1e-12);
            assert!(max_abs_diff(&commutator(z, x), &(y * I)) < 1e-12);
        }
    }

    #[test]
    fn iz_trace_of_square() {
        for s in spins() {
            let j = s.j();
            let tr = (s.iz() * s.iz()).trace().re;
            assert!((tr - j * (j + 1.0) * (2.0 * j + 1.0) / 3.0).abs() < 1e-12);
        }
        let s = SpinSystem::from_j(3.5).unwrap();
        assert!(((s.iz() * s.iz()).trace().re - 42.0).abs() < 1e-12);
    }

    #[test]
    fn spin_half_is_pauli_over_two() {
        let s = SpinSystem::from_j(0.5).unwrap();
        assert_eq!(s.iz()[(0, 0)].re, -0.5);
        assert_eq!(s.iz()[(1, 1)].re, 0.5);
        assert!((s.ix()[(0, 1)].re - 0.5).abs() < 1e-15);
        assert!((s.ix()[(1, 0)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ladder_element_spin_seven_halves() {
        let s = SpinSystem::from_j(3.5).unwrap();
        // ⟨−5/2|I_x|−7/2⟩ = ½√(J(J+1) − m(m+1)) with m = −7/2
        let expected = 0.5 * (3.5f64 * 4.5 - (-3.5) * (-2.5)).sqrt();
        assert!((s.ix()[(1, 0)].re - expected).abs() < 1e-12);
        assert!((expected - 7f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((s.ix()[(1, 0)].re - 1.32288).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_spins() {
        assert!(Spin::from_j(0.0).is_err());
        assert!(Spin::from_j(1.3).is_err());
        assert!(Spin::from_j(-0.5).is_err());
        assert!(Spin::from_j(2.5).is_ok());
    }

    #[test]
    fn basis_rotation_maps_ix_to_iz() {
        for s in spins() {
            let b = s.basis_rotation();
            let mapped = &b * s.ix() * b.adjoint();
            assert!(max_abs_diff(&mapped, s.iz()) < 1e-10, "J = {}", s.j());
        }
    }

    #[test]
    fn basis_rotation_is_minus_y_pi_over_two_in_hardware_labels() {
        let s = SpinSystem::from_j(3.5).unwrap();
        let b = s.rotation([0.0, -1.0, 0.0], FRAC_PI_2).unwrap();
        assert!(max_abs_diff(&b, &s.basis_rotation()) < 1e-12);
        let other = s.rotation([0.0, 1.0, 0.0], FRAC_PI_2).unwrap();
        let mapped = &other * s.ix() * other.adjoint();
        assert!(max_abs_diff(&mapped, &(s.iz() * real(-1.0))) < 1e-10);
    }

    #[test]
    fn rz_full_turn_is_minus_identity_for_half_integer() {
        let s = SpinSystem::from_j(3.5).unwrap();
        let r = s.rz(2.0 * PI);
        assert!(max_abs_diff(&r, &(CMatrix::identity(8, 8) * real(-1.0))) < 1e-12);
        assert!(max_abs_diff(&s.rz(0.0), &CMatrix::identity(8, 8)) < 1e-15);
        let general = s.rotation([0.0, 0.0, 1.0], 0.7).unwrap();
        assert!(max_abs_diff(&general, &s.rz(0.7)) < 1e-15);
    }

    #[test]
    fn ry_pi_reverses_populations() {
        let s = SpinSystem::from_j(3.5).unwrap();
        let r = s.rotation([0.0, 1.0, 0.0], PI).unwrap();
        for i in 0..8 {
            for k in 0..8 {
                let expected = if k == 7 - i { 1.0 } else { 0.0 };
                assert!((r[(k, i)].norm() - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rotations_are_unitary() {
        let s = SpinSystem::from_j(2.5).unwrap();
        let n = [0.48, -0.6, 0.64];
        let r = s.rotation(n, 1.234).unwrap();
        assert!(max_abs_diff(&(&r * r.adjoint()), &CMatrix::identity(6, 6)) < 1e-12);
        assert!(s.rotation([1.0, 1.0, 0.0], 0.1).is_err());
    }

    #[test]
    fn pos_spin_half() {
        let s = SpinSystem::from_j(0.5).unwrap();
        let p = pos_operator(&s).unwrap();
        for v in p.matrix().iter() {
            assert!((v - real(0.5)).norm() < 1e-12);
        }
    }

    /// Independent route: project onto the positive eigenvectors of `I_x` directly.
    fn spectral_pos(s: &SpinSystem) -> CMatrix {
        let eig = hermitian_eigen(s.ix());
        let d = s.dim();
        let mut p = CMatrix::zeros(d, d);
        for (k, &l) in eig.values.iter().enumerate() {
            if l > 0.0 {
                let v = eig.vectors.column(k);
                p += v * v.adjoint();
            }
        }
        p
    }

    #[test]
    fn pos_matches_spectral_construction() {
        for s in spins().filter(|s| s.dim() % 2 == 0) {
            let p = pos_operator(&s).unwrap();
            assert!(max_abs_diff(p.matrix(), &spectral_pos(&s)) < 1e-12, "d = {}", s.dim());
            assert!(max_abs_diff(&(p.matrix() * p.matrix()), p.matrix()) < 1e-12);
            assert!((p.matrix().trace().re - s.dim() as f64 / 2.0).abs() < 1e-12);
            let eig = hermitian_eigen(p.matrix());
            assert!(eig.values.iter().all(|&l| l.abs() < 1e-12 || (l - 1.0).abs() < 1e-12));
            let sgn = p.sign();
            assert!(max_abs_diff(&(&sgn * &sgn), &CMatrix::identity(s.dim(), s.dim())) < 1e-12);
        }
    }

    #[test]
    fn pos_rejects_odd_dimension() {
        let s = SpinSystem::from_j(1.0).unwrap();
        assert!(matches!(pos_operator(&s), Err(Error::UnsupportedDimension(3))));
    }

    #[test]
    fn level_ranges() {
        let r = LevelRange::centered(8, 4).unwrap();
        assert_eq!((r.lo, r.hi), (2, 5));
        assert_eq!(r.upper_half(), 4..=5);
        assert_eq!(r.spin().j(), 1.5);
        assert!(LevelRange::from_levels(&[1, 2, 4]).is_err());
        assert_eq!(LevelRange::from_levels(&[3, 2, 4, 5]).unwrap(), r);
        assert_eq!("2..5".parse::<LevelRange>().unwrap(), r);
        assert!("5..2".parse::<LevelRange>().is_err());
    }
}
