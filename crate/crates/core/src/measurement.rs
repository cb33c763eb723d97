//! Finite-shot readout, bootstrap score estimates, fidelity bounds and classical Monte Carlo.
//!
//! All randomness comes from ChaCha8 streams: a stream is fixed by `(seed, stream index)`,
//! so results are identical across platforms and execution modes.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::protocol::{binomial, check_angle_condition, classical_bound, classical_positive_count, AngleSet};
use crate::pulse::ProtocolPoint;
use crate::spin::{LevelRange, Spin};

/// Stream offset separating bootstrap resamples from shot sampling under one seed.
const BOOTSTRAP_STREAM: u64 = 1 << 32;
const MC_BATCH: usize = 4096;

pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_simplex(p: &[f64]) -> Result<()> {
    if p.is_empty() || p.iter().any(|x| !x.is_finite() || *x < -1e-12) {
        return Err(Error::invalid("probabilities must be finite and non-negative"));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("probabilities sum to {total}, expected 1")));
    }
    Ok(())
}

/// Multinomial draw by sequential conditional binomials.
pub fn multinomial(rng: &mut impl Rng, p: &[f64], n: u64) -> Vec<u64> {
    let mut counts = vec![0; p.len()];
    let mut left = n;
    let mut mass = 1.0;
    for (i, &pi) in p.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i == p.len() - 1 {
            counts[i] = left;
            break;
        }
        let q = if mass > 0.0 { (pi.max(0.0) / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(left, q).expect("q in [0, 1]").sample(rng);
        counts[i] = k;
        left -= k;
        mass -= pi.max(0.0);
    }
    counts
}

pub fn sample_shots(probabilities: &[f64], n: u64, seed: u64) -> Result<Vec<u64>> {
    check_simplex(probabilities)?;
    if n == 0 {
        return Err(Error::invalid("need at least one shot"));
    }
    Ok(multinomial(&mut rng_stream(seed, 0), probabilities, n))
}

/// Outcome histograms per probing angle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub spin: Spin,
    pub subspace: LevelRange,
    pub shots_per_angle: u64,
    pub seed: u64,
    /// `counts[k][i]`: outcome level `i` at angle `k`.
    pub counts: Vec<Vec<u64>>,
}

impl ShotRecord {
    pub fn new(spin: Spin, subspace: LevelRange, seed: u64, counts: Vec<Vec<u64>>) -> Result<Self> {
        subspace.check_within(spin.dim())?;
        subspace.require_even()?;
        let shots = counts.first().map(|c| c.iter().sum()).unwrap_or(0);
        if shots == 0 {
            return Err(Error::invalid("shot record is empty"));
        }
        for c in &counts {
            if c.len() != spin.dim() || c.iter().sum::<u64>() != shots {
                return Err(Error::invalid("every histogram needs d bins summing to shots_per_angle"));
            }
        }
        Ok(ShotRecord { spin, subspace, shots_per_angle: shots, seed, counts })
    }

    pub fn angles(&self) -> usize {
        self.counts.len()
    }

    pub fn positive_fraction(&self, k: usize) -> f64 {
        let c = &self.counts[k];
        self.subspace.upper_half().map(|i| c[i]).sum::<u64>() as f64 / self.shots_per_angle as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("angle_index,outcome_m,count\n");
        for (k, c) in self.counts.iter().enumerate() {
            for (i, n) in c.iter().enumerate() {
                let _ = writeln!(out, "{k},{},{n}", self.spin.m(i));
            }
        }
        out
    }

    /// Parses the CSV written by [`ShotRecord::to_csv`]; the spin comes from the `m` values.
    pub fn from_csv(text: &str, subspace: Option<LevelRange>, seed: u64) -> Result<Self> {
        let mut rows = Vec::new();
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().unwrap_or("");
        if header.trim() != "angle_index,outcome_m,count" {
            return Err(Error::invalid(format!("unexpected CSV header '{header}'")));
        }
        for line in lines {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::invalid(format!("bad CSV row '{line}'"));
            if f.len() != 3 {
                return Err(bad());
            }
            let k: usize = f[0].parse().map_err(|_| bad())?;
            let m: f64 = f[1].parse().map_err(|_| bad())?;
            let n: u64 = f[2].parse().map_err(|_| bad())?;
            rows.push((k, m, n));
        }
        let j = rows.iter().map(|r| r.1.abs()).fold(0.0, f64::max);
        let spin = Spin::from_j(j)?;
        let n_angles = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
        let mut counts = vec![vec![0; spin.dim()]; n_angles];
        for (k, m, n) in rows {
            let i = spin.index_of(m).ok_or_else(|| Error::invalid(format!("m = {m} is not a level of spin {spin}")))?;
            counts[k][i] += n;
        }
        Self::new(spin, subspace.unwrap_or(LevelRange::full(spin.dim())), seed, counts)
    }
}

/// Samples `shots` readouts at every protocol angle, angle `k` on stream `k`.
pub fn sample_protocol(
    points: &[ProtocolPoint],
    spin: Spin,
    subspace: LevelRange,
    shots: u64,
    seed: u64,
    exec: Execution,
) -> Result<ShotRecord> {
    if shots == 0 {
        return Err(Error::invalid("need at least one shot"));
    }
    for p in points {
        check_simplex(&p.probabilities)?;
    }
    let counts = exec.map_indexed(points.len(), |k| {
        multinomial(&mut rng_stream(seed, k as u64), &points[k].probabilities, shots)
    });
    ShotRecord::new(spin, subspace, seed, counts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreEstimate {
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_bootstrap: usize,
    pub shots_per_angle: u64,
    pub seed: u64,
}

impl ScoreEstimate {
    pub fn sigma(&self) -> f64 {
        (self.ci_high - self.ci_low) / 4.0
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }
}

/// Mean positive frequency over angles, with `point ± 2σ` from `n_bootstrap` multinomial
/// resamples of every histogram.
pub fn estimate_score(record: &ShotRecord, n_bootstrap: usize, exec: Execution) -> Result<ScoreEstimate> {
    if record.angles() == 0 {
        return Err(Error::invalid("record has no angles"));
    }
    if n_bootstrap < 2 {
        return Err(Error::invalid("need at least two bootstrap resamples"));
    }
    let k = record.angles();
    let point = (0..k).map(|a| record.positive_fraction(a)).sum::<f64>() / k as f64;
    let n = record.shots_per_angle;
    let freqs: Vec<Vec<f64>> = record
        .counts
        .iter()
        .map(|c| c.iter().map(|&x| x as f64 / n as f64).collect())
        .collect();
    let upper = record.subspace.upper_half();
    let resamples = exec.map_indexed(n_bootstrap, |r| {
        let mut rng = rng_stream(record.seed, BOOTSTRAP_STREAM + r as u64);
        freqs
            .iter()
            .map(|p| {
                let c = multinomial(&mut rng, p, n);
                upper.clone().map(|i| c[i]).sum::<u64>() as f64 / n as f64
            })
            .sum::<f64>()
            / k as f64
    });
    let mean = resamples.iter().sum::<f64>() / n_bootstrap as f64;
    let var = resamples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n_bootstrap - 1) as f64;
    let sigma = var.sqrt();
    Ok(ScoreEstimate {
        point,
        ci_low: point - 2.0 * sigma,
        ci_high: point + 2.0 * sigma,
        n_bootstrap,
        shots_per_angle: n,
        seed: record.seed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FidelityBound {
    pub raw: f64,
    /// `raw` clamped to `[0, 1]` for reporting.
    pub value: f64,
}

/// Cat-state fidelity implied by a uniform score: `(2P − 1) / (2^{−(K−1)} binom(K−1, (K−1)/2))`.
pub fn fidelity_lower_bound(score: f64, k: usize) -> Result<FidelityBound> {
    classical_bound(k)?;
    let ku = k as u64;
    let denom = 2f64.powi(-(k as i32 - 1)) * binomial(ku - 1, (ku - 1) / 2);
    let raw = (2.0 * score - 1.0) / denom;
    Ok(FidelityBound { raw, value: raw.clamp(0.0, 1.0) })
}

/// Which admissible angle sets the classical Monte Carlo draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AngleFamily {
    Uniform,
    /// Inside the uneven box `|φ_k − 2πk/K| ≤ π/(2K)`.
    Uneven,
    /// Uniformly random angles kept only if they satisfy the angle condition.
    Admissible,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassicalMc {
    pub k: usize,
    pub samples: usize,
    pub seed: u64,
    pub bound: f64,
    pub max_score: f64,
    /// `histogram[n]`: samples with `n` positive angles out of `K`.
    pub histogram: Vec<u64>,
    /// Samples drawn per family, in `[Uniform, Uneven, Admissible]` order.
    pub family_counts: [u64; 3],
}

fn draw_angles(rng: &mut ChaCha8Rng, k: usize, family: AngleFamily) -> Result<AngleSet> {
    match family {
        AngleFamily::Uniform => AngleSet::uniform(k, rng.random_range(0.0..TAU)),
        AngleFamily::Uneven => {
            let w = std::f64::consts::PI / (2 * k) as f64;
            AngleSet::new((0..k).map(|i| TAU * i as f64 / k as f64 + rng.random_range(-w..=w)).collect())
        }
        AngleFamily::Admissible => {
            for _ in 0..10_000 {
                let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..TAU)).collect();
                let set = AngleSet::from_unsorted(raw)?;
                if check_angle_condition(&set) {
                    return Ok(set);
                }
            }
            AngleSet::uniform(k, rng.random_range(0.0..TAU))
        }
    }
}

/// Classical gyroscope scores over random initial phases and admissible angle sets.
/// Any sample above `(1 + 1/K)/2` is reported as an error.
pub fn classical_mc(k: usize, n_samples: usize, seed: u64, exec: Execution) -> Result<ClassicalMc> {
    let bound = classical_bound(k)?;
    if n_samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let families = [AngleFamily::Uniform, AngleFamily::Uneven, AngleFamily::Admissible];
    let batches = n_samples.div_ceil(MC_BATCH);
    let partial = exec.map_indexed(batches, |b| -> Result<(Vec<u64>, [u64; 3])> {
        let mut rng = rng_stream(seed, b as u64);
        let mut hist = vec![0u64; k + 1];
        let mut fam = [0u64; 3];
        let size = MC_BATCH.min(n_samples - b * MC_BATCH);
        for _ in 0..size {
            let f = rng.random_range(0..3);
            let set = draw_angles(&mut rng, k, families[f])?;
            let phi0 = rng.random_range(0.0..TAU);
            hist[classical_positive_count(phi0, &set)] += 1;
            fam[f] += 1;
        }
        Ok((hist, fam))
    });
    let mut histogram = vec![0u64; k + 1];
    let mut family_counts = [0u64; 3];
    for p in partial {
        let (h, f) = p?;
        histogram.iter_mut().zip(h).for_each(|(a, b)| *a += b);
        family_counts.iter_mut().zip(f).for_each(|(a, b)| *a += b);
    }
    let top = histogram.iter().rposition(|&c| c > 0).unwrap_or(0);
    let max_score = top as f64 / k as f64;
    if 2 * top > k + 1 {
        return Err(Error::NumericalInconsistency(format!(
            "classical sample scored {max_score} above the bound {bound}"
        )));
    }
    Ok(ClassicalMc { k, samples: n_samples, seed, bound, max_score, histogram, family_counts })
}
