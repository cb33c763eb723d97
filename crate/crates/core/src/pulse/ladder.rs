use super::{Axis, PulseSequence, PulseStep};
use crate::error::{Error, Result};
use crate::state::QuditState;

const ZERO: f64 = 1e-12;

/// Givens ladder preparing `target` from `|−J⟩`.
///
/// Pulse `m` leaves `|c_m|` on level `m` with `θ_m = arccos(|c_m| / √(Σ_{i≥m} c_i²))` and
/// area `2θ_m`; its axis sets the sign carried up to the next nonzero coefficient. Targets
/// that are real up to a global phase need nothing else; other relative phases are set by a
/// closing virtual SNAP gate (a frame shift).
pub fn ladder_compile(target: &QuditState) -> Result<PulseSequence> {
    let amps = target
        .amplitudes()
        .ok_or_else(|| Error::UnsupportedState("ladder preparation needs a pure state".into()))?;
    let first = amps
        .iter()
        .find(|a| a.norm() > ZERO)
        .ok_or_else(|| Error::UnsupportedState("zero state".into()))?;
    let phase = first / first.norm();
    let rel: Vec<_> = amps.iter().map(|a| a / phase).collect();
    let real = rel.iter().all(|r| r.im.abs() <= 1e-9);
    let c: Vec<f64> = rel
        .iter()
        .map(|r| {
            let x = if real { r.re } else { r.norm() };
            if x.abs() > ZERO { x } else { 0.0 }
        })
        .collect();

    let spin = target.spin();
    let d = c.len();
    let mut seq = PulseSequence::new(spin);
    // Sign of the amplitude currently sitting on level m.
    let mut carried = 1.0;
    for m in 0..d - 1 {
        let remaining = c[m..].iter().map(|x| x * x).sum::<f64>().sqrt();
        let theta = if remaining > ZERO { (c[m].abs() / remaining).min(1.0).acos() } else { 0.0 };
        let next_sign = c[m + 1..].iter().find(|x| x.abs() > 0.0).map_or(1.0, |x| x.signum());
        let axis = if carried * next_sign > 0.0 { Axis::PlusY } else { Axis::MinusY };
        carried = next_sign;
        seq.push(PulseStep::Givens { transition: m, area: 2.0 * theta, axis })?;
    }
    if !real {
        // Level phases ξ_m = arg c_m need clock increments Δφ_t = ξ_t − ξ_{t+1}.
        let mut xi = Vec::with_capacity(d);
        let mut last = 0.0;
        for r in &rel {
            if r.norm() > ZERO {
                last = r.arg();
            }
            xi.push(last);
        }
        let clock_phases = xi.windows(2).map(|w| w[0] - w[1]).collect();
        seq.push(PulseStep::FrameShift { clock_phases })?;
    }
    Ok(seq)
}
