use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SPAN_TOL: f64 = 1e-12;

/// Ordered probing angles for the precession protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleSet {
    angles: Vec<f64>,
    /// `Some(φ0)` when `angles[k] = φ0 + 2πk/K`.
    uniform_offset: Option<f64>,
}

pub(crate) fn check_k(k: usize) -> Result<()> {
    if k < 3 || k.is_multiple_of(2) {
        return Err(Error::invalid(format!("K = {k} must be odd and at least 3")));
    }
    Ok(())
}

impl AngleSet {
    pub fn uniform(k: usize, offset: f64) -> Result<Self> {
        check_k(k)?;
        let angles = (0..k).map(|i| offset + TAU * i as f64 / k as f64).collect();
        Ok(AngleSet { angles, uniform_offset: Some(offset) })
    }

    /// Validates an explicit, ascending list of angles spanning at most 2π.
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        check_k(angles.len())?;
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("angles must be finite"));
        }
        if angles.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("angles must be sorted ascending"));
        }
        let span = angles[angles.len() - 1] - angles[0];
        if span > TAU + SPAN_TOL {
            return Err(Error::invalid(format!("angle span {span} exceeds 2π")));
        }
        Ok(AngleSet { angles, uniform_offset: None })
    }

    /// Wraps every angle into `[a₀, a₀ + 2π)` relative to the first one and sorts.
    pub fn from_unsorted(mut angles: Vec<f64>) -> Result<Self> {
        check_k(angles.len())?;
        let base = angles[0];
        for a in angles.iter_mut() {
            *a = base + (*a - base).rem_euclid(TAU);
        }
        angles.sort_by(f64::total_cmp);
        Self::new(angles)
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn k(&self) -> usize {
        self.angles.len()
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform_offset.is_some()
    }

    pub fn offset(&self) -> Option<f64> {
        self.uniform_offset
    }

    /// Every angle moved by a common `delta`.
    pub fn shifted(&self, delta: f64) -> Self {
        AngleSet {
            angles: self.angles.iter().map(|a| a + delta).collect(),
            uniform_offset: self.uniform_offset.map(|o| o + delta),
        }
    }

    fn wrapped_about(&self, reference: f64) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .angles
            .iter()
            .map(|a| {
                let w = (a - reference).rem_euclid(TAU);
                if w > PI { w - TAU } else { w }
            })
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }

    /// The angle that [`centered`](Self::centered) moves to zero: the one about which the
    /// set is most nearly mirror-symmetric (lowest index on ties).
    pub fn median(&self) -> f64 {
        let asymmetry = |r: f64| {
            let w = self.wrapped_about(r);
            (0..w.len()).map(|i| (w[i] + w[w.len() - 1 - i]).abs()).fold(0.0, f64::max)
        };
        let mut best = (self.angles[0], asymmetry(self.angles[0]));
        for &a in &self.angles[1..] {
            let s = asymmetry(a);
            if s < best.1 - 1e-12 {
                best = (a, s);
            }
        }
        best.0
    }

    /// Angles shifted so the [`median`](Self::median) sits at zero, wrapped into `(−π, π]`
    /// and sorted. The zero angle is then also the median of the returned list.
    pub fn centered(&self) -> Vec<f64> {
        self.wrapped_about(self.median())
    }
}

/// `∀k: (φ_{k+(K−1)/2 mod K} − φ_k) mod 2π ≤ π`, which guarantees the classical
/// bound `(1 + 1/K)/2` for this angle set.
pub fn check_angle_condition(angles: &AngleSet) -> bool {
    let a = angles.angles();
    let k = a.len();
    let half = (k - 1) / 2;
    (0..k).all(|i| {
        let j = (i + half) % k;
        (a[j] - a[i]).rem_euclid(TAU) <= PI + SPAN_TOL
    })
}

/// Smallest achievable max-deviation between two angle sets on the circle,
/// allowing a common shift and a cyclic relabelling.
pub fn circular_set_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "angle sets must have equal size");
    let n = a.len();
    let wrap = |x: f64| (x + PI).rem_euclid(TAU) - PI;
    let mut sa: Vec<f64> = a.iter().map(|x| x.rem_euclid(TAU)).collect();
    let mut sb: Vec<f64> = b.iter().map(|x| x.rem_euclid(TAU)).collect();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    (0..n)
        .map(|offset| {
            let r0 = wrap(sb[offset] - sa[0]);
            let (lo, hi) = (0..n).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
                let r = r0 + wrap(sb[(i + offset) % n] - sa[i] - r0);
                (lo.min(r), hi.max(r))
            });
            (hi - lo) / 2.0
        })
        .fold(f64::INFINITY, f64::min)
}
