//! Projected gradient ascent of the maximal quantum score over unevenly spaced angles.
//!
//! Angle `k` is confined to `|φ_k − 2πk/K| ≤ π/(2K)`, which keeps every iterate inside
//! the region where the classical bound still holds.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{self, CMatrix};
use crate::protocol::{check_angle_condition, check_k, q_matrix, AngleSet, QMethod};
use crate::spin::{pos_operator, SpinSystem};
use crate::state::{QuditState, StateFile};

/// Top-eigenvalue gaps below this count as degenerate.
pub const GAP_THRESHOLD: f64 = 1e-8;

/// `[Pos(I_x), I_z]`; the derivative of the `k`-th frame-rotated term is
/// `(i/K) e^{−iφ_k I_z} [Pos, I_z] e^{iφ_k I_z}`.
pub fn pos_commutator(system: &SpinSystem) -> Result<CMatrix> {
    let pos = pos_operator(system)?;
    Ok(linalg::commutator(pos.matrix(), system.iz()))
}

fn rotated(system: &SpinSystem, c: &CMatrix, phi: f64) -> CMatrix {
    let s = system.spin();
    CMatrix::from_fn(c.nrows(), c.ncols(), |a, b| {
        c[(a, b)] * Complex64::from_polar(1.0, -phi * (s.m(a) - s.m(b)))
    })
}

/// `∂λ_max/∂φ_k` for each probing angle.
///
/// With a degenerate top eigenvalue the derivative exists only if every `∂Q/∂φ_k` acts
/// as a multiple of the identity on the top eigenspace, otherwise this is
/// [`Error::GradientUndefined`]. When `Q = ½𝕀` (e.g. `d ≤ K` on uniform angles) the
/// eigenspace is everything and the mean-eigenvalue derivative, zero, is returned.
pub fn score_gradient(system: &SpinSystem, angles: &AngleSet) -> Result<Vec<f64>> {
    let q = q_matrix(system, angles, QMethod::ClosedForm)?;
    let top = linalg::top_eigenspace(&q, GAP_THRESHOLD);
    let c = pos_commutator(system)?;
    let scale = Complex64::new(0.0, 1.0 / angles.k() as f64);
    let v = &top.basis;
    angles
        .angles()
        .iter()
        .map(|&phi| {
            let m = v.adjoint() * rotated(system, &c, phi) * v * scale;
            let r = m.nrows();
            if r == system.dim() {
                return Ok(m.trace().re / r as f64);
            }
            let diag = m[(0, 0)].re;
            let off = (0..r)
                .flat_map(|a| (0..r).map(move |b| (a, b)))
                .map(|(a, b)| if a == b { (m[(a, b)].re - diag).abs() } else { m[(a, b)].norm() })
                .fold(0.0, f64::max);
            if off > 1e-10 {
                Err(Error::GradientUndefined { gap: 0.0 })
            } else {
                Ok(diag)
            }
        })
        .collect()
}

fn top_value(system: &SpinSystem, angles: &AngleSet) -> Result<f64> {
    let q = q_matrix(system, angles, QMethod::ClosedForm)?;
    Ok(linalg::hermitian_eigen(&q).values.last().copied().unwrap_or(0.5))
}

#[derive(Clone, Debug)]
pub struct OptimizerConfig {
    pub n_starts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub gradient_tol: f64,
    /// Projected-gradient norm accepted as converged when the line search stalls.
    pub stall_tol: f64,
    pub initial_step: f64,
    pub shrink: f64,
    pub exec: Execution,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            n_starts: 64,
            seed: 0,
            max_iterations: 10_000,
            gradient_tol: 1e-9,
            stall_tol: 1e-6,
            initial_step: 0.05,
            shrink: 0.5,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OptimizationRun {
    pub d: usize,
    pub k: usize,
    pub start_index: usize,
    pub initial_angles: AngleSet,
    pub initial_score: f64,
    pub final_angles: AngleSet,
    pub final_score: f64,
    pub final_state: QuditState,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimizationReport {
    pub d: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub score: f64,
    pub angles_rad: Vec<f64>,
    pub state: StateFile,
    pub iterations: usize,
    pub converged: bool,
}

impl OptimizationRun {
    /// Optimal state in the frame where the median angle is zero.
    pub fn centered_state(&self) -> Result<QuditState> {
        let system = SpinSystem::from_dim(self.d)?;
        Ok(self.final_state.evolve(&system.rz(-self.final_angles.median())))
    }

    /// Serializable summary with angles shifted so the median one is zero; the state is
    /// rotated to match.
    pub fn report(&self) -> Result<OptimizationReport> {
        Ok(OptimizationReport {
            d: self.d,
            k: self.k,
            score: self.final_score,
            angles_rad: self.final_angles.centered(),
            state: self.centered_state()?.to_file()?,
            iterations: self.iterations,
            converged: self.converged,
        })
    }
}

/// The box `|φ_k − 2πk/K| ≤ π/(2K)` in which uneven angle sets live.
#[derive(Clone, Copy, Debug)]
pub struct UnevenBox {
    k: usize,
}

impl UnevenBox {
    pub fn new(k: usize) -> Result<Self> {
        check_k(k)?;
        Ok(UnevenBox { k })
    }

    pub fn half_width(&self) -> f64 {
        PI / (2 * self.k) as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        TAU * i as f64 / self.k as f64
    }

    pub fn angles(&self, deviations: &[f64]) -> Result<AngleSet> {
        AngleSet::new(deviations.iter().enumerate().map(|(i, x)| self.center(i) + x).collect())
    }

    pub fn contains(&self, angles: &AngleSet) -> bool {
        angles.k() == self.k
            && angles
                .angles()
                .iter()
                .enumerate()
                .all(|(i, a)| (a - self.center(i)).abs() <= self.half_width() + 1e-12)
    }

    fn clamp(&self, x: f64) -> f64 {
        x.clamp(-self.half_width(), self.half_width())
    }

    /// Zeroes gradient components that push against an active bound.
    fn project_gradient(&self, x: &[f64], g: &[f64]) -> Vec<f64> {
        let w = self.half_width();
        x.iter()
            .zip(g)
            .map(|(&xi, &gi)| {
                if (xi >= w - 1e-15 && gi > 0.0) || (xi <= -w + 1e-15 && gi < 0.0) {
                    0.0
                } else {
                    gi
                }
            })
            .collect()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Gradient at `x`, nudging the angles by ±1e-6 while the top eigenvalue stays degenerate.
fn gradient_at(
    system: &SpinSystem,
    bx: &UnevenBox,
    x: &mut [f64],
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, f64)> {
    for _ in 0..100 {
        let angles = bx.angles(x)?;
        match score_gradient(system, &angles) {
            Ok(g) => return Ok((g, top_value(system, &angles)?)),
            Err(Error::GradientUndefined { .. }) => {
                for xi in x.iter_mut() {
                    let nudge = if rng.random::<bool>() { 1e-6 } else { -1e-6 };
                    *xi = bx.clamp(*xi + nudge);
                }
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::NumericalInconsistency("top eigenvalue stays degenerate under perturbation".into()))
}

/// Projected gradient ascent from `initial` deviations inside the box.
pub fn ascend(
    system: &SpinSystem,
    bx: &UnevenBox,
    initial: &[f64],
    config: &OptimizerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, f64, usize, bool)> {
    let mut x: Vec<f64> = initial.iter().map(|&v| bx.clamp(v)).collect();
    let mut value = top_value(system, &bx.angles(&x)?)?;
    let mut step = config.initial_step;
    for iteration in 0..config.max_iterations {
        let (g, v) = gradient_at(system, bx, &mut x, rng)?;
        value = v;
        let pg = bx.project_gradient(&x, &g);
        let gnorm = norm(&pg);
        if gnorm < config.gradient_tol {
            return Ok((x, value, iteration, true));
        }
        // Trial displacement of length `step` along the projected gradient.
        let mut accepted = false;
        let mut trial_step = step;
        while trial_step > 1e-16 {
            let candidate: Vec<f64> =
                x.iter().zip(&pg).map(|(xi, gi)| bx.clamp(xi + trial_step * gi / gnorm)).collect();
            let cv = top_value(system, &bx.angles(&candidate)?)?;
            if cv > value {
                x = candidate;
                value = cv;
                accepted = true;
                break;
            }
            trial_step *= config.shrink;
        }
        if !accepted {
            return Ok((x, value, iteration, gnorm < config.stall_tol));
        }
        step = (2.0 * trial_step).min(config.initial_step);
    }
    let (g, _) = gradient_at(system, bx, &mut x, rng)?;
    let converged = norm(&bx.project_gradient(&x, &g)) < config.gradient_tol;
    Ok((x, value, config.max_iterations, converged))
}

fn run_start(system: &SpinSystem, bx: &UnevenBox, config: &OptimizerConfig, start: usize) -> Result<OptimizationRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(start as u64);
    let w = bx.half_width();
    let x0: Vec<f64> = (0..bx.k).map(|_| rng.random_range(-w..=w)).collect();
    let initial_angles = bx.angles(&x0)?;
    let initial_score = top_value(system, &initial_angles)?;
    let (x, _, iterations, converged) = ascend(system, bx, &x0, config, &mut rng)?;
    let final_angles = bx.angles(&x)?;
    let q = q_matrix(system, &final_angles, QMethod::ClosedForm)?;
    let top = linalg::top_eigenspace(&q, GAP_THRESHOLD);
    let final_state = QuditState::pure_normalized(system.spin(), top.vector())?;
    Ok(OptimizationRun {
        d: system.dim(),
        k: bx.k,
        start_index: start,
        initial_angles,
        initial_score,
        final_angles,
        final_score: top.value,
        final_state,
        iterations,
        converged,
    })
}

/// Best of `n_starts` seeded projected-gradient runs; ties go to the lowest start index.
pub fn optimize_angles(system: &SpinSystem, k: usize, n_starts: usize, seed: u64) -> Result<OptimizationRun> {
    optimize_angles_with(system, k, &OptimizerConfig { n_starts, seed, ..OptimizerConfig::default() })
}

pub fn optimize_angles_with(system: &SpinSystem, k: usize, config: &OptimizerConfig) -> Result<OptimizationRun> {
    let bx = UnevenBox::new(k)?;
    if !system.dim().is_multiple_of(2) {
        return Err(Error::UnsupportedDimension(system.dim()));
    }
    if config.n_starts == 0 {
        return Err(Error::invalid("need at least one start"));
    }
    let runs = config.exec.map_indexed(config.n_starts, |i| run_start(system, &bx, config, i));
    let mut best: Option<OptimizationRun> = None;
    for run in runs {
        let run = run?;
        debug_assert!(check_angle_condition(&run.final_angles));
        if best.as_ref().is_none_or(|b| run.final_score > b.final_score) {
            best = Some(run);
        }
    }
    Ok(best.expect("n_starts > 0"))
}
