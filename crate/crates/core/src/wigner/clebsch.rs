//! Clebsch–Gordan coefficients and orthonormal spherical tensor operators.
//!
//! Angular momenta are passed doubled (`2j`, `2m`) so half-integers stay exact.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{real, CMatrix};
use crate::spin::Spin;

fn factorial(n: i64) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// `⟨j1 m1; j2 m2 | j m⟩` in the Condon–Shortley convention via the Racah formula.
/// Every argument is twice the physical value.
pub fn clebsch_gordan(tj1: i64, tm1: i64, tj2: i64, tm2: i64, tj: i64, tm: i64) -> f64 {
    if tm1 + tm2 != tm || tj < (tj1 - tj2).abs() || tj > tj1 + tj2 {
        return 0.0;
    }
    if tm1.abs() > tj1 || tm2.abs() > tj2 || tm.abs() > tj {
        return 0.0;
    }
    if (tj1 + tm1) % 2 != 0 || (tj2 + tm2) % 2 != 0 || (tj + tm) % 2 != 0 || (tj1 + tj2 + tj) % 2 != 0 {
        return 0.0;
    }
    let h = |x: i64| x / 2;
    let (a, b, c) = (h(tj1 + tj2 - tj), h(tj1 - tj2 + tj), h(-tj1 + tj2 + tj));
    let delta = (factorial(a) * factorial(b) * factorial(c) / factorial(h(tj1 + tj2 + tj) + 1)).sqrt();
    let pre = ((tj + 1) as f64
        * factorial(h(tj1 + tm1))
        * factorial(h(tj1 - tm1))
        * factorial(h(tj2 + tm2))
        * factorial(h(tj2 - tm2))
        * factorial(h(tj + tm))
        * factorial(h(tj - tm)))
    .sqrt();
    let kmin = 0.max(h(tj2 - tj - tm1)).max(h(tj1 - tj + tm2));
    let kmax = a.min(h(tj1 - tm1)).min(h(tj2 + tm2));
    // Positive and negative terms are summed separately to limit cancellation.
    let (mut pos, mut neg) = (0.0, 0.0);
    for k in kmin..=kmax {
        let term = 1.0
            / (factorial(k)
                * factorial(a - k)
                * factorial(h(tj1 - tm1) - k)
                * factorial(h(tj2 + tm2) - k)
                * factorial(h(tj - tj2 + tm1) + k)
                * factorial(h(tj - tj1 - tm2) + k));
        if k % 2 == 0 {
            pos += term;
        } else {
            neg += term;
        }
    }
    delta * pre * (pos - neg)
}

/// Orthonormal spherical tensor operators `T_kq`, `k = 0…2J`, `q = −k…k`:
/// `T_kq = Σ_{m,m'} (−1)^{J−m'} ⟨J m; J −m'|k q⟩ |m⟩⟨m'|`.
#[derive(Clone, Debug)]
pub struct TensorBasis {
    spin: Spin,
    /// `ops[k][q + k]`.
    ops: Vec<Vec<CMatrix>>,
}

impl TensorBasis {
    /// Builds the basis and checks `Tr(T_kq† T_k'q') = δ_kk' δ_qq'`.
    pub fn new(spin: Spin) -> Result<Self> {
        let d = spin.dim();
        let tj = spin.twice() as i64;
        let ops: Vec<Vec<CMatrix>> = (0..=tj)
            .map(|k| {
                (-k..=k)
                    .map(|q| {
                        CMatrix::from_fn(d, d, |a, b| {
                            let (tm, tmp) = (2 * a as i64 - tj, 2 * b as i64 - tj);
                            let sign = if ((tj - tmp) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                            real(sign * clebsch_gordan(tj, tm, tj, -tmp, 2 * k, 2 * q))
                        })
                    })
                    .collect()
            })
            .collect();
        let basis = TensorBasis { spin, ops };
        basis.check_orthonormal()?;
        Ok(basis)
    }

    fn check_orthonormal(&self) -> Result<()> {
        let flat: Vec<&CMatrix> = self.ops.iter().flatten().collect();
        for (i, a) in flat.iter().enumerate() {
            for (j, b) in flat.iter().enumerate().skip(i) {
                let ip: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                if (ip - expected).norm() > 1e-10 {
                    return Err(Error::NumericalInconsistency(format!(
                        "tensor operators {i} and {j} have overlap {ip}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn max_rank(&self) -> usize {
        self.ops.len() - 1
    }

    pub fn get(&self, k: usize, q: i64) -> &CMatrix {
        &self.ops[k][(q + k as i64) as usize]
    }
}
