//! Small dense complex linear algebra on top of nalgebra.
//!
//! Dimensions here never exceed a few dozen, so everything is computed
//! exactly by Hermitian eigendecomposition rather than series expansions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn hermitian_eigen(h: &CMatrix) -> HermitianEigen {
    let n = h.nrows();
    // Symmetrize first so round-off in the input never leaks into the solver.
    let sym = (h + h.adjoint()) * real(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    HermitianEigen { values, vectors }
}

/// `exp(-i t H)` for Hermitian `H`.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let eig = hermitian_eigen(h);
    let phases = CVector::from_iterator(
        eig.values.len(),
        eig.values.iter().map(|&l| Complex64::from_polar(1.0, -t * l)),
    );
    let scaled = CMatrix::from_fn(h.nrows(), h.ncols(), |r, col| {
        eig.vectors[(r, col)] * phases[col]
    });
    &scaled * eig.vectors.adjoint()
}

/// Principal square root of a positive semidefinite Hermitian matrix.
pub fn sqrt_psd(h: &CMatrix) -> CMatrix {
    let eig = hermitian_eigen(h);
    let n = h.nrows();
    let scaled = CMatrix::from_fn(n, n, |r, col| {
        eig.vectors[(r, col)] * eig.values[col].max(0.0).sqrt()
    });
    &scaled * eig.vectors.adjoint()
}

/// The eigenspace of the largest eigenvalue, with everything within `tol` of it included.
#[derive(Clone, Debug)]
pub struct TopEigenspace {
    pub value: f64,
    /// Gap to the first eigenvalue outside the space (infinite for a multiple of the identity).
    pub gap: f64,
    /// Orthonormal basis, one column per degenerate eigenvector.
    pub basis: CMatrix,
}

impl TopEigenspace {
    pub fn multiplicity(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_degenerate(&self) -> bool {
        self.multiplicity() > 1
    }

    pub fn vector(&self) -> CVector {
        self.basis.column(0).into_owned()
    }

    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }
}

pub fn top_eigenspace(h: &CMatrix, tol: f64) -> TopEigenspace {
    let eig = hermitian_eigen(h);
    let n = eig.values.len();
    let value = eig.values[n - 1];
    let mult = eig.values.iter().rev().take_while(|&&v| value - v <= tol).count();
    let gap = if mult < n {
        value - eig.values[n - 1 - mult]
    } else {
        f64::INFINITY
    };
    let basis = eig.vectors.columns(n - mult, mult).into_owned();
    TopEigenspace { value, gap, basis }
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn is_hermitian(a: &CMatrix, tol: f64) -> bool {
    a.is_square() && max_abs_diff(a, &a.adjoint()) <= tol
}

/// `⟨v|A|v⟩`, complex.
pub fn quadratic_form(v: &CVector, a: &CMatrix) -> Complex64 {
    v.dotc(&(a * v))
}

pub fn diag(entries: impl ExactSizeIterator<Item = Complex64>) -> CMatrix {
    let v = CVector::from_iterator(entries.len(), entries);
    CMatrix::from_diagonal(&v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_of_pauli_y() {
        // exp(-i t σ_y) = cos t − i sin t σ_y
        let sy = CMatrix::from_row_slice(2, 2, &[real(0.0), c(0.0, -1.0), c(0.0, 1.0), real(0.0)]);
        let t = 0.37;
        let u = expm_hermitian(&sy, t);
        let expected = CMatrix::from_row_slice(
            2,
            2,
            &[real(t.cos()), real(-t.sin()), real(t.sin()), real(t.cos())],
        );
        assert!(max_abs_diff(&u, &expected) < 1e-14);
    }

    #[test]
    fn top_eigenspace_detects_degeneracy() {
        let h = diag([1.0, 3.0, 3.0, 2.0].into_iter().map(real));
        let top = top_eigenspace(&h, 1e-10);
        assert_eq!(top.multiplicity(), 2);
        assert!((top.value - 3.0).abs() < 1e-14);
        assert!((top.gap - 1.0).abs() < 1e-14);
        let p = top.projector();
        assert!((p[(1, 1)].re - 1.0).abs() < 1e-14 && (p[(2, 2)].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_has_infinite_gap() {
        let top = top_eigenspace(&CMatrix::identity(3, 3), 1e-10);
        assert_eq!(top.multiplicity(), 3);
        assert!(top.gap.is_infinite());
    }
}
