use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Axis;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::spin::{ladder_coefficient, LevelRange, Spin};
use crate::state::QuditState;

/// Device characterization used by the time-domain mode. Defaults describe a spin-7/2
/// donor nucleus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeviceParams {
    pub f_nmr_mhz: Vec<f64>,
    pub pi_time_ms: Vec<f64>,
    pub t2_star_ms: Vec<f64>,
    pub b0_tesla: f64,
    pub gamma_mhz_per_tesla: f64,
    pub quadrupole_khz: f64,
    /// π-time of the equal-amplitude SU(2) drive over the full space.
    pub su2_pi_time_ms: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        DeviceParams {
            f_nmr_mhz: vec![7.5963, 7.6246, 7.6529, 7.6812, 7.7095, 7.7739, 7.7664],
            pi_time_ms: vec![0.328, 0.254, 0.227, 0.220, 0.223, 0.251, 0.329],
            t2_star_ms: vec![27.77, 37.79, 80.18, 167.17, 85.43, 51.09, 28.37],
            b0_tesla: 1.384,
            gamma_mhz_per_tesla: 5.55,
            quadrupole_khz: 28.3,
            su2_pi_time_ms: 3.0,
        }
    }
}

impl DeviceParams {
    pub fn transitions(&self) -> usize {
        self.f_nmr_mhz.len()
    }

    pub fn spin(&self) -> Result<Spin> {
        Spin::from_twice(self.transitions() as u32)
    }

    pub fn gamma_hz_per_tesla(&self) -> f64 {
        self.gamma_mhz_per_tesla * 1e6
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.transitions();
        if n == 0 {
            return Err(Error::invalid("device needs at least one transition"));
        }
        if self.pi_time_ms.len() != n || self.t2_star_ms.len() != n {
            return Err(Error::invalid(format!(
                "expected {n} entries in pi_time_ms and t2_star_ms, got {} and {}",
                self.pi_time_ms.len(),
                self.t2_star_ms.len()
            )));
        }
        let positive = |v: &[f64]| v.iter().all(|x| x.is_finite() && *x > 0.0);
        if !positive(&self.f_nmr_mhz) || !positive(&self.pi_time_ms) || !positive(&self.t2_star_ms) {
            return Err(Error::invalid("frequencies and times must be positive"));
        }
        for (i, a) in self.f_nmr_mhz.iter().enumerate() {
            if self.f_nmr_mhz[i + 1..].contains(a) {
                return Err(Error::invalid(format!("NMR frequency {a} MHz appears twice")));
            }
        }
        for x in [self.b0_tesla, self.gamma_mhz_per_tesla, self.su2_pi_time_ms] {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::invalid("B0, gamma and the SU(2) π-time must be positive"));
            }
        }
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let p: DeviceParams = toml::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let p: DeviceParams = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    /// Reads TOML or JSON, chosen by file extension.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json_str(&text),
            _ => Self::from_toml_str(&text),
        }
    }

    /// Drive amplitude (tesla) giving a π rotation on `transition` alone in its π-time.
    pub fn single_tone_b1(&self, transition: usize) -> Result<f64> {
        let spin = self.spin()?;
        let t = self
            .pi_time_ms
            .get(transition)
            .ok_or_else(|| Error::invalid(format!("no transition {transition}")))?
            * 1e-3;
        let c = ladder_coefficient(spin.j(), spin.m(transition));
        // |g| = (γ/4) B1 c/2 and t_π = 1/(4|g|).
        Ok(2.0 / (self.gamma_hz_per_tesla() * c * t))
    }
}

/// One resonant tone on a transition: amplitude `b1_tesla` and clock phase `phase`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub transition: usize,
    pub b1_tesla: f64,
    pub phase: f64,
}

/// Tones held constant for `duration_s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveSegment {
    pub duration_s: f64,
    pub tones: Vec<Tone>,
}

/// Rotating-frame Hamiltonian in Hz: tridiagonal with `H[i, i+1] = g_i e^{iφ_i}` and
/// `g_i = −(γ/4) B_{1,i} ⟨i|I_x|i+1⟩`.
pub fn grf_hamiltonian(spin: Spin, tones: &[Tone], params: &DeviceParams) -> Result<CMatrix> {
    let d = spin.dim();
    let mut h = CMatrix::zeros(d, d);
    for tone in tones {
        let i = tone.transition;
        if i + 1 >= d {
            return Err(Error::invalid(format!("tone on transition {i} out of range for d = {d}")));
        }
        let ix = ladder_coefficient(spin.j(), spin.m(i)) / 2.0;
        let g = -params.gamma_hz_per_tesla() / 4.0 * tone.b1_tesla * ix;
        let coupling = Complex64::from_polar(1.0, tone.phase) * g;
        h[(i, i + 1)] += coupling;
        h[(i + 1, i)] += coupling.conj();
    }
    Ok(h)
}

/// Piecewise-constant evolution `exp(−i2πH t)`, each segment split into substeps of at
/// most `max_substep_s`.
pub fn time_evolve(
    start: &QuditState,
    segments: &[DriveSegment],
    params: &DeviceParams,
    max_substep_s: f64,
) -> Result<QuditState> {
    if max_substep_s.is_nan() || max_substep_s <= 0.0 {
        return Err(Error::invalid("substep must be positive"));
    }
    let spin = start.spin();
    let mut state = start.clone();
    for seg in segments {
        if seg.duration_s.is_nan() || seg.duration_s < 0.0 {
            return Err(Error::invalid("segment durations must be non-negative"));
        }
        let h = grf_hamiltonian(spin, &seg.tones, params)?;
        let n = (seg.duration_s / max_substep_s).ceil().max(1.0) as usize;
        let dt = seg.duration_s / n as f64;
        let step = linalg::expm_hermitian(&h, TAU * dt);
        let mut u = CMatrix::identity(spin.dim(), spin.dim());
        for _ in 0..n {
            u = &step * u;
        }
        state = state.evolve(&u);
    }
    Ok(state)
}

/// Single-tone drive for a Givens step of `area` on `transition` at the calibrated π-pulse
/// amplitude. `+y` maps `|i⟩ → cos(β/2)|i⟩ + sin(β/2)|i+1⟩`.
pub fn givens_drive(transition: usize, area: f64, axis: Axis, params: &DeviceParams) -> Result<DriveSegment> {
    if !area.is_finite() {
        return Err(Error::invalid("pulse area must be finite"));
    }
    let b1 = params.single_tone_b1(transition)?;
    let t_pi = params.pi_time_ms[transition] * 1e-3;
    // g < 0, so the +y generator −iY/2 needs clock phase +π/2.
    let sign = match axis {
        Axis::PlusY => 1.0,
        Axis::MinusY => -1.0,
    } * area.signum();
    Ok(DriveSegment {
        duration_s: area.abs() / PI * t_pi,
        tones: vec![Tone { transition, b1_tesla: b1, phase: sign * FRAC_PI_2 }],
    })
}

/// Equal-Rabi-rate multi-tone drive realizing `exp(∓iθ I_y)` on `subspace` in `duration_s`.
/// Amplitudes are rescaled per transition so the coupling follows the emulated spin.
pub fn su2_drive(
    spin: Spin,
    axis: Axis,
    angle: f64,
    subspace: LevelRange,
    duration_s: f64,
    params: &DeviceParams,
) -> Result<DriveSegment> {
    subspace.check_within(spin.dim())?;
    if duration_s.is_nan() || duration_s <= 0.0 {
        return Err(Error::invalid("drive duration must be positive"));
    }
    let sub = subspace.spin();
    // H = (θ / 2πt) (±I_y) needs g_i e^{iφ} = ±(θ/2πt) ⟨i|I_y|i+1⟩ = ±(θ/2πt)(i c_i/2).
    let phase = match axis {
        Axis::PlusY => -FRAC_PI_2,
        Axis::MinusY => FRAC_PI_2,
    };
    let rate = angle / (TAU * duration_s);
    let tones = (0..subspace.size() - 1)
        .map(|k| {
            let i = subspace.lo + k;
            let c_sub = ladder_coefficient(sub.j(), sub.m(k));
            let c_full = ladder_coefficient(spin.j(), spin.m(i));
            // (γ/4) B1 c_full/2 = rate c_sub/2.
            let b1 = 4.0 * rate * c_sub / (params.gamma_hz_per_tesla() * c_full);
            Tone { transition: i, b1_tesla: b1, phase }
        })
        .collect();
    Ok(DriveSegment { duration_s, tones })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{apply_sequence, su2_pulse, PulseSequence};
    use crate::state::{fidelity, spin_coherent_state};
    use crate::spin::SpinSystem;
    use std::f64::consts::PI;

    const SUBSTEP: f64 = 1e-6;

    fn j72() -> Spin {
        Spin::from_dim(8).unwrap()
    }

    #[test]
    fn defaults_validate_and_parse() {
        let p = DeviceParams::default();
        p.validate().unwrap();
        assert_eq!(p.spin().unwrap(), j72());
        let toml_text = "f_nmr_mhz = [7.1, 7.2, 7.3]\npi_time_ms = [0.3, 0.3, 0.3]\nt2_star_ms = [20.0, 30.0, 20.0]\n";
        let q = DeviceParams::from_toml_str(toml_text).unwrap();
        assert_eq!(q.transitions(), 3);
        assert_eq!(q.b0_tesla, 1.384);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(DeviceParams::from_json_str(&json).unwrap(), p);
        assert!(DeviceParams::from_toml_str("f_nmr_mhz = [7.1, 7.1]\npi_time_ms=[1.0,1.0]\nt2_star_ms=[1.0,1.0]").is_err());
        assert!(DeviceParams::from_toml_str("f_nmr_mhz = [7.1]\npi_time_ms=[1.0,1.0]\nt2_star_ms=[1.0]").is_err());
        assert!(DeviceParams::from_toml_str("f_nmr_mhz = [7.1]\npi_time_ms=[-1.0]\nt2_star_ms=[1.0]").is_err());
    }

    #[test]
    fn resonant_pi_pulse_transfers_population() {
        let p = DeviceParams::default();
        let b1 = p.single_tone_b1(0).unwrap();
        let seg = DriveSegment {
            duration_s: p.pi_time_ms[0] * 1e-3,
            tones: vec![Tone { transition: 0, b1_tesla: b1, phase: 0.0 }],
        };
        let out = time_evolve(&QuditState::basis(j72(), 0).unwrap(), &[seg], &p, SUBSTEP).unwrap();
        let pops = out.populations();
        assert!((pops[1] - 1.0).abs() < 1e-10);
        let norm: f64 = pops.iter().sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_amplitude_is_identity() {
        let p = DeviceParams::default();
        let st = spin_coherent_state(&SpinSystem::new(j72()), 0.7, 0.2);
        let seg = DriveSegment {
            duration_s: 1e-4,
            tones: (0..7).map(|i| Tone { transition: i, b1_tesla: 0.0, phase: 0.3 }).collect(),
        };
        let out = time_evolve(&st, &[seg], &p, SUBSTEP).unwrap();
        assert!(fidelity(&out, &st).unwrap() > 1.0 - 1e-14);
    }

    #[test]
    fn equal_amplitude_drive_matches_su2_pulse() {
        let p = DeviceParams::default();
        let full = LevelRange::full(8);
        let seg = su2_drive(j72(), Axis::MinusY, PI, full, p.su2_pi_time_ms * 1e-3, &p).unwrap();
        let b1 = seg.tones[0].b1_tesla;
        assert!(seg.tones.iter().all(|t| (t.b1_tesla - b1).abs() < 1e-15), "full-space drive is equal amplitude");
        assert!((b1 - 2.0 / (p.gamma_hz_per_tesla() * 3e-3)).abs() < 1e-12);
        let st = spin_coherent_state(&SpinSystem::new(j72()), 1.1, 0.4);
        let out = time_evolve(&st, &[seg], &p, SUBSTEP).unwrap();
        let mut seq = PulseSequence::new(j72());
        seq.push(su2_pulse(j72(), Axis::MinusY, PI, full).unwrap()).unwrap();
        let ideal = apply_sequence(&st, &seq).unwrap();
        assert!(fidelity(&out, &ideal).unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn subspace_drive_matches_subspace_pulse() {
        let p = DeviceParams::default();
        let r = LevelRange::new(2, 5).unwrap();
        let st = QuditState::from_real(j72(), &[0.0, 0.0, 0.5, -0.5, 0.5, 0.5, 0.0, 0.0]).unwrap();
        for axis in [Axis::PlusY, Axis::MinusY] {
            let seg = su2_drive(j72(), axis, PI / 2.0, r, 1e-3, &p).unwrap();
            let out = time_evolve(&st, &[seg], &p, SUBSTEP).unwrap();
            let mut seq = PulseSequence::new(j72());
            seq.push(su2_pulse(j72(), axis, PI / 2.0, r).unwrap()).unwrap();
            let ideal = apply_sequence(&st, &seq).unwrap();
            assert!(fidelity(&out, &ideal).unwrap() > 1.0 - 1e-9);
        }
    }

    #[test]
    fn bad_inputs() {
        let p = DeviceParams::default();
        let st = QuditState::basis(j72(), 0).unwrap();
        let seg = DriveSegment { duration_s: 1e-6, tones: vec![Tone { transition: 7, b1_tesla: 1e-4, phase: 0.0 }] };
        assert!(time_evolve(&st, &[seg], &p, SUBSTEP).is_err());
        assert!(time_evolve(&st, &[], &p, 0.0).is_err());
        assert!(p.single_tone_b1(9).is_err());
    }
}
