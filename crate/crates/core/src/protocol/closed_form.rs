use serde::Serialize;

use super::angles::check_k;
use crate::error::{Error, Result};
use crate::linalg::{real, CVector};
use crate::spin::{Spin, SpinSystem};
use crate::state::QuditState;

/// Binomial coefficient as a float; exact for the small arguments used here.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `binom(2⌊n/2⌋, ⌊n/2⌋) · n^{n mod 2}`, the per-level factor in the closed-form `Q` elements.
pub(crate) fn central_factor(n: u64) -> f64 {
    let h = n / 2;
    let c = binomial(2 * h, h);
    if n % 2 == 1 {
        c * n as f64
    } else {
        c
    }
}

/// Off-diagonal cat coherence of `Q` for `d = K + 1`: `2^{−K} binom(K−1, (K−1)/2)`.
pub fn cat_q_coefficient(k: usize) -> Result<f64> {
    check_k(k)?;
    let k = k as u64;
    Ok(2f64.powi(-(k as i32)) * binomial(k - 1, (k - 1) / 2))
}

/// `½ + 2^{−K} binom(K−1, (K−1)/2)`, the maximum for `d = K + 1` on uniform angles.
pub fn cat_max_score(k: usize) -> Result<f64> {
    Ok(0.5 + cat_q_coefficient(k)?)
}

/// Which expression to use for the mixing angle `λ` when `2K < d ≤ 3K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MixingForm {
    /// `tan²λ = [J − (d mod 2)K] c / ([J − K] c binom(2K, K))` with `c = binom(2⌊J−K⌋, ⌊J−K⌋)`.
    Printed,
    /// `tan²λ = binom(2K, K) c (J − K) / (binom(2⌊J⌋, ⌊J⌋) J)`, the ratio of the two
    /// `|−J+K⟩` couplings in `Q`; agrees with the eigensolver.
    Consistent,
}

/// Mixing angle `λ` of the closed-form maximizer; zero when `K < d ≤ 2K`.
pub fn mixing_angle(spin: Spin, k: usize, form: MixingForm) -> Result<f64> {
    check_regime(spin, k)?;
    let d = spin.dim();
    if d <= 2 * k {
        return Ok(0.0);
    }
    let j = spin.j();
    let kf = k as f64;
    let jk = (j - kf).floor() as u64;
    let c = binomial(2 * jk, jk);
    let tan2 = match form {
        MixingForm::Printed => {
            let parity = (d % 2) as f64;
            (j - parity * kf) * c / ((j - kf) * c * binomial(2 * k as u64, k as u64))
        }
        MixingForm::Consistent => {
            let jf = j.floor() as u64;
            binomial(2 * k as u64, k as u64) * c * (j - kf) / (binomial(2 * jf, jf) * j)
        }
    };
    Ok(tan2.sqrt().atan())
}

fn check_regime(spin: Spin, k: usize) -> Result<()> {
    check_k(k)?;
    let d = spin.dim();
    if !d.is_multiple_of(2) {
        return Err(Error::UnsupportedDimension(d));
    }
    if d <= k || d > 3 * k {
        return Err(Error::UnsupportedRegime(format!(
            "closed form needs K < d <= 3K, got d={d}, K={k}"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct ClosedFormMax {
    pub value: f64,
    pub state: QuditState,
    pub lambda: f64,
}

/// Closed-form maximal score and state on uniform angles with `φ0 = 0`, using the
/// printed mixing angle.
pub fn closed_form_max(system: &SpinSystem, k: usize) -> Result<ClosedFormMax> {
    closed_form_max_with(system, k, MixingForm::Printed)
}

pub fn closed_form_max_with(system: &SpinSystem, k: usize, form: MixingForm) -> Result<ClosedFormMax> {
    let spin = system.spin();
    let lambda = mixing_angle(spin, k, form)?;
    let j = spin.j();
    let kf = k as f64;
    let ku = k as u64;
    let jf = j.floor() as u64;
    let jh = (j - kf / 2.0).floor() as u64;
    let parity = (spin.dim() % 2) as f64;
    let radicand = binomial(ku - 1, (ku - 1) / 2)
        * (2.0 * j / kf - parity)
        * binomial(2 * jf, jf)
        * binomial(2 * jh, jh);
    let value = 0.5 * (1.0 + 2f64.powi(-(spin.twice() as i32 - 1)) / lambda.cos() * radicand.sqrt());

    let sign = if ((k - 1) / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = CVector::zeros(spin.dim());
    v[k] = real(s);
    v[0] += real(sign * s * lambda.cos());
    if 2 * k < spin.dim() {
        v[2 * k] += real(sign * s * lambda.sin());
    }
    let state = QuditState::pure_normalized(spin, v)?;
    Ok(ClosedFormMax { value, state, lambda })
}
