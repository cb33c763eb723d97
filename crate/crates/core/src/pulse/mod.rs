//! Ideal pulse-level simulation: Givens ladders, virtual-SNAP frame shifts and
//! SU(2)-covariant rotations, plus an optional time-domain drive model.

mod device;
mod ladder;
mod run;

pub use device::{givens_drive, grf_hamiltonian, su2_drive, time_evolve, DeviceParams, DriveSegment, Tone};
pub use ladder::ladder_compile;
pub use run::{protocol_score, protocol_sweep, run_at_angles, run_protocol, ProtocolPoint};

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, diag, real, CMatrix};
use crate::spin::{LevelRange, Spin, SpinSystem};
use crate::state::QuditState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "+y")]
    PlusY,
    #[serde(rename = "-y")]
    MinusY,
}

impl Axis {
    fn sign(self) -> f64 {
        match self {
            Axis::PlusY => 1.0,
            Axis::MinusY => -1.0,
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+y" | "y" => Ok(Axis::PlusY),
            "-y" => Ok(Axis::MinusY),
            _ => Err(Error::invalid(format!("unknown axis '{s}', expected +y or -y"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PulseStep {
    /// Two-level rotation on transition `i` (levels `i`, `i+1`) with pulse area `area`.
    /// `+y` maps `|i⟩ → cos(area/2)|i⟩ + sin(area/2)|i+1⟩`, `−y` flips the sign of the
    /// transferred amplitude.
    Givens { transition: usize, area: f64, axis: Axis },
    /// Reference-clock phase increments `Δφ_i`, one per transition.
    FrameShift { clock_phases: Vec<f64> },
    /// `exp(∓iθ I_y)` of the spin emulated by `subspace`, identity elsewhere.
    Su2 { axis: Axis, angle: f64, subspace: LevelRange },
}

impl PulseStep {
    pub fn validate(&self, spin: Spin) -> Result<()> {
        let d = spin.dim();
        match self {
            PulseStep::Givens { transition, area, .. } => {
                if *transition + 1 >= d {
                    return Err(Error::invalid(format!("transition {transition} out of range for d = {d}")));
                }
                if !(0.0..TAU).contains(area) {
                    return Err(Error::invalid(format!("pulse area {area} outside [0, 2π)")));
                }
            }
            PulseStep::FrameShift { clock_phases } => {
                if clock_phases.len() != d - 1 {
                    return Err(Error::invalid(format!(
                        "frame shift needs {} clock phases, got {}",
                        d - 1,
                        clock_phases.len()
                    )));
                }
                if clock_phases.iter().any(|p| !p.is_finite()) {
                    return Err(Error::invalid("clock phases must be finite"));
                }
            }
            PulseStep::Su2 { angle, subspace, .. } => {
                subspace.check_within(d)?;
                if !angle.is_finite() {
                    return Err(Error::invalid("rotation angle must be finite"));
                }
            }
        }
        Ok(())
    }

    pub fn unitary(&self, spin: Spin) -> Result<CMatrix> {
        self.validate(spin)?;
        let d = spin.dim();
        Ok(match self {
            PulseStep::Givens { transition, area, axis } => {
                let (c, s) = ((area / 2.0).cos(), axis.sign() * (area / 2.0).sin());
                let mut u = CMatrix::identity(d, d);
                let i = *transition;
                u[(i, i)] = real(c);
                u[(i + 1, i)] = real(s);
                u[(i, i + 1)] = real(-s);
                u[(i + 1, i + 1)] = real(c);
                u
            }
            PulseStep::FrameShift { clock_phases } => PhaseFrame::new(clock_phases.clone()).snap_unitary(),
            PulseStep::Su2 { axis, angle, subspace } => {
                let sub = SpinSystem::new(subspace.spin());
                let block = linalg::expm_hermitian(sub.iy(), axis.sign() * angle);
                let mut u = CMatrix::identity(d, d);
                u.view_mut((subspace.lo, subspace.lo), (subspace.size(), subspace.size())).copy_from(&block);
                u
            }
        })
    }
}

/// Accumulated clock phases `φ_i` of the `2J` transition reference clocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseFrame {
    pub clock_phases: Vec<f64>,
}

impl PhaseFrame {
    pub fn new(clock_phases: Vec<f64>) -> Self {
        PhaseFrame { clock_phases }
    }

    pub fn zero(spin: Spin) -> Self {
        PhaseFrame { clock_phases: vec![0.0; spin.dim() - 1] }
    }

    pub fn shift(&mut self, increments: &[f64]) {
        for (p, d) in self.clock_phases.iter_mut().zip(increments) {
            *p += d;
        }
    }

    /// Level phases `ξ_m = −Σ_{i<m} φ_i`, so `ξ_0 = 0`.
    pub fn snap_phases(&self) -> Vec<f64> {
        let mut xi = Vec::with_capacity(self.clock_phases.len() + 1);
        let mut acc = 0.0;
        xi.push(0.0);
        for p in &self.clock_phases {
            acc -= p;
            xi.push(acc);
        }
        xi
    }

    /// `Σ_m e^{iξ_m}|m⟩⟨m|`.
    pub fn snap_unitary(&self) -> CMatrix {
        diag(self.snap_phases().into_iter().map(|x| Complex64::from_polar(1.0, x)))
    }
}

/// Frame shift realizing `R_z(φ)` on `subspace` (up to a global phase there) by moving only
/// the clocks of transitions inside it.
pub fn virtual_rz(spin: Spin, phi: f64, subspace: LevelRange) -> Result<PulseStep> {
    subspace.check_within(spin.dim())?;
    subspace.require_even()?;
    let clock_phases = (0..spin.dim() - 1)
        .map(|t| if t >= subspace.lo && t < subspace.hi { phi } else { 0.0 })
        .collect();
    Ok(PulseStep::FrameShift { clock_phases })
}

pub fn su2_pulse(spin: Spin, axis: Axis, angle: f64, subspace: LevelRange) -> Result<PulseStep> {
    subspace.check_within(spin.dim())?;
    subspace.require_even()?;
    Ok(PulseStep::Su2 { axis, angle, subspace })
}

/// Ordered steps acting on one spin. Serialized as `{ "J": 3.5, "steps": [...] }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SequenceFile", into = "SequenceFile")]
pub struct PulseSequence {
    spin: Spin,
    steps: Vec<PulseStep>,
}

#[derive(Serialize, Deserialize)]
struct SequenceFile {
    #[serde(rename = "J")]
    j: f64,
    steps: Vec<PulseStep>,
}

impl TryFrom<SequenceFile> for PulseSequence {
    type Error = Error;

    fn try_from(f: SequenceFile) -> Result<Self> {
        let mut seq = PulseSequence::new(Spin::from_j(f.j)?);
        for step in f.steps {
            seq.push(step)?;
        }
        Ok(seq)
    }
}

impl From<PulseSequence> for SequenceFile {
    fn from(s: PulseSequence) -> Self {
        SequenceFile { j: s.spin.j(), steps: s.steps }
    }
}

impl PulseSequence {
    pub fn new(spin: Spin) -> Self {
        PulseSequence { spin, steps: Vec::new() }
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn steps(&self) -> &[PulseStep] {
        &self.steps
    }

    pub fn push(&mut self, step: PulseStep) -> Result<()> {
        step.validate(self.spin)?;
        self.steps.push(step);
        Ok(())
    }

    pub fn extend(&mut self, other: &PulseSequence) -> Result<()> {
        if other.spin != self.spin {
            return Err(Error::invalid("cannot join sequences for different spins"));
        }
        self.steps.extend(other.steps.iter().cloned());
        Ok(())
    }

    /// Pulse areas of the Givens steps, in order.
    pub fn givens_areas(&self) -> Vec<f64> {
        self.steps
            .iter()
            .filter_map(|s| match s {
                PulseStep::Givens { area, .. } => Some(*area),
                _ => None,
            })
            .collect()
    }

    /// Product of all step unitaries, first step rightmost.
    pub fn unitary(&self) -> Result<CMatrix> {
        let d = self.spin.dim();
        self.steps
            .iter()
            .try_fold(CMatrix::identity(d, d), |acc, s| Ok(s.unitary(self.spin)? * acc))
    }
}

pub fn apply_sequence(start: &QuditState, seq: &PulseSequence) -> Result<QuditState> {
    if start.spin() != seq.spin() {
        return Err(Error::invalid(format!(
            "state has spin {} but the sequence targets spin {}",
            start.spin(),
            seq.spin()
        )));
    }
    let mut state = start.clone();
    for step in seq.steps() {
        state = state.evolve(&step.unitary(seq.spin())?);
    }
    Ok(state)
}
