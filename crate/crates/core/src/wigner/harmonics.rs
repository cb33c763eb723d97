use std::f64::consts::PI;

use num_complex::Complex64;

/// Condon–Shortley associated Legendre values `P_l^m(x)` for `m ≤ l ≤ lmax`, fixed `m ≥ 0`,
/// by upward recursion in `l`.
fn legendre_column(lmax: usize, m: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; lmax + 1];
    if m > lmax {
        return out;
    }
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0;
    for i in 0..m {
        pmm *= -((2 * i + 1) as f64) * s;
    }
    out[m] = pmm;
    if m < lmax {
        out[m + 1] = x * (2 * m + 1) as f64 * pmm;
    }
    for l in m + 2..=lmax {
        out[l] = ((2 * l - 1) as f64 * x * out[l - 1] - (l + m - 1) as f64 * out[l - 2]) / (l - m) as f64;
    }
    out
}

/// All `Y_lm(θ, φ)` for `l ≤ lmax`, indexed `[l][m + l]`.
pub fn spherical_harmonics(lmax: usize, theta: f64, phi: f64) -> Vec<Vec<Complex64>> {
    let x = theta.cos();
    let mut y: Vec<Vec<Complex64>> = (0..=lmax).map(|l| vec![Complex64::new(0.0, 0.0); 2 * l + 1]).collect();
    for m in 0..=lmax {
        let p = legendre_column(lmax, m, x);
        let e = Complex64::from_polar(1.0, m as f64 * phi);
        for l in m..=lmax {
            // (l−m)!/(l+m)! as a running product.
            let ratio: f64 = ((l - m + 1)..=(l + m)).fold(1.0, |acc, i| acc / i as f64);
            let norm = ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt();
            let v = e * (norm * p[l]);
            y[l][l + m] = v;
            if m > 0 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                y[l][l - m] = v.conj() * sign;
            }
        }
    }
    y
}
