use std::f64::consts::{FRAC_PI_2, TAU};

use serde::Serialize;

use super::{apply_sequence, ladder_compile, su2_pulse, virtual_rz, Axis, PulseSequence};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::protocol::AngleSet;
use crate::spin::LevelRange;
use crate::state::QuditState;

/// Outcome of the four-step protocol at one precession angle.
#[derive(Clone, Debug, Serialize)]
pub struct ProtocolPoint {
    pub phi: f64,
    /// z-basis outcome probabilities after the basis rotation, over the full space.
    pub probabilities: Vec<f64>,
    /// Probability of the positive half of the subspace.
    pub pos: f64,
}

/// Ladder preparation, precession `e^{iφI_z}` as a virtual frame shift of `−φ`,
/// `R_{−y}(π/2)` basis change and ideal z readout, for each angle.
///
/// `target` lives in the full space; `subspace` selects the block the protocol runs in.
pub fn run_protocol(
    target: &QuditState,
    angles: &AngleSet,
    subspace: LevelRange,
    exec: Execution,
) -> Result<Vec<ProtocolPoint>> {
    run_at_angles(target, angles.angles(), subspace, exec)
}

/// [`run_protocol`] at `n_points` uniform angles in `[0, 2π)`.
pub fn protocol_sweep(
    target: &QuditState,
    n_points: usize,
    subspace: LevelRange,
    exec: Execution,
) -> Result<Vec<ProtocolPoint>> {
    if n_points < 2 {
        return Err(Error::invalid("a sweep needs at least 2 points"));
    }
    let phis: Vec<f64> = (0..n_points).map(|i| TAU * i as f64 / n_points as f64).collect();
    run_at_angles(target, &phis, subspace, exec)
}

/// [`run_protocol`] at an arbitrary list of precession angles.
pub fn run_at_angles(
    target: &QuditState,
    phis: &[f64],
    subspace: LevelRange,
    exec: Execution,
) -> Result<Vec<ProtocolPoint>> {
    let spin = target.spin();
    subspace.check_within(spin.dim())?;
    subspace.require_even()?;
    let outside: f64 = target
        .populations()
        .iter()
        .enumerate()
        .filter(|(i, _)| !subspace.contains(*i))
        .map(|(_, p)| p)
        .sum();
    if outside > 1e-9 {
        return Err(Error::invalid(format!("target has weight {outside:.3e} outside subspace {subspace}")));
    }
    let prep = ladder_compile(target)?;
    let ground = QuditState::basis(spin, 0)?;
    let prepared = apply_sequence(&ground, &prep)?;
    exec.map_indexed(phis.len(), |k| {
        let phi = phis[k];
        let mut seq = PulseSequence::new(spin);
        seq.push(virtual_rz(spin, -phi, subspace)?)?;
        seq.push(su2_pulse(spin, Axis::MinusY, FRAC_PI_2, subspace)?)?;
        let probabilities = apply_sequence(&prepared, &seq)?.populations();
        let pos = subspace.upper_half().map(|i| probabilities[i]).sum();
        Ok(ProtocolPoint { phi, probabilities, pos })
    })
    .into_iter()
    .collect()
}

pub fn protocol_score(points: &[ProtocolPoint]) -> f64 {
    points.iter().map(|p| p.pos).sum::<f64>() / points.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{pos_at, quantum_score};
    use crate::spin::{Spin, SpinSystem};
    use crate::state::{cat_state, spin_coherent_state};
    use std::f64::consts::PI;

    fn j72() -> Spin {
        Spin::from_dim(8).unwrap()
    }

    #[test]
    fn cat_protocol_reaches_ideal_score() {
        let s = SpinSystem::new(j72());
        let cat = cat_state(&s, j72(), PI).unwrap();
        let pts = run_protocol(&cat, &AngleSet::uniform(7, 0.0).unwrap(), LevelRange::full(8), Execution::default()).unwrap();
        assert!((protocol_score(&pts) - 0.65625).abs() < 1e-9);
        for p in &pts {
            assert!((p.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!((p.pos - pos_at(&cat, p.phi).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn pipeline_matches_analytic_curve() {
        let s = SpinSystem::new(j72());
        let st = QuditState::from_real(j72(), &[0.3, -0.2, 0.5, 0.1, 0.0, -0.6, 0.4, 0.3]).unwrap();
        let angles = AngleSet::new((0..7).map(|i| -3.0 + 0.9 * i as f64).collect()).unwrap();
        for p in run_protocol(&st, &angles, LevelRange::full(8), Execution::Sequential).unwrap() {
            assert!((p.pos - pos_at(&st, p.phi).unwrap()).abs() < 1e-9);
        }
        let coherent = spin_coherent_state(&s, PI / 3.0, PI / 5.0);
        for p in run_protocol(&coherent, &angles, LevelRange::full(8), Execution::Sequential).unwrap() {
            assert!((p.pos - pos_at(&coherent, p.phi).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn subspace_protocol_matches_standalone_system() {
        for size in [2usize, 4, 6] {
            let sub = Spin::from_dim(size).unwrap();
            let standalone = cat_state(&SpinSystem::new(sub), sub, if (size / 2) % 2 == 0 { 0.0 } else { PI }).unwrap();
            let range = LevelRange::centered(8, size).unwrap();
            let embedded = standalone.embed(j72(), range).unwrap();
            let k = if size == 6 { 5 } else { 3 };
            for phi0 in [0.0, 0.37] {
                let angles = AngleSet::uniform(k, phi0).unwrap();
                let pts = run_protocol(&embedded, &angles, range, Execution::default()).unwrap();
                let direct = quantum_score(&standalone, &angles).unwrap().score;
                assert!((protocol_score(&pts) - direct).abs() < 1e-9, "size {size}");
            }
        }
        let d2 = cat_state(&SpinSystem::new(Spin::from_dim(2).unwrap()), Spin::from_dim(2).unwrap(), 0.0).unwrap();
        let pts = run_protocol(&d2.embed(j72(), LevelRange::new(3, 4).unwrap()).unwrap(), &AngleSet::uniform(3, 0.0).unwrap(), LevelRange::new(3, 4).unwrap(), Execution::default()).unwrap();
        assert!((protocol_score(&pts) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn rejects_weight_outside_subspace() {
        let st = QuditState::basis(j72(), 0).unwrap();
        let r = run_protocol(&st, &AngleSet::uniform(3, 0.0).unwrap(), LevelRange::new(2, 5).unwrap(), Execution::default());
        assert!(r.is_err());
    }
}
