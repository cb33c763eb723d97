use std::fmt::Write as _;

use serde::Serialize;
use serde_json::json;

use precession_core::measurement::{classical_mc, estimate_score, fidelity_lower_bound, sample_protocol};
use precession_core::optimizer::{optimize_angles_with, OptimizationReport, OptimizerConfig};
use precession_core::protocol::{
    best_uniform_offset, classical_bound, max_quantum_score, pos_at, quantum_score, AngleSet,
};
use precession_core::pulse::{
    ladder_compile, protocol_score, run_at_angles, run_protocol, su2_pulse, virtual_rz, Axis, PulseSequence,
};
use precession_core::reference::{evaluate_table1, Table1Result};
use precession_core::wigner::wigner_grid;
use precession_core::{Execution, QuditState, SpinSystem};

use crate::args::{Cli, Command, Format};
use crate::output::{emit, json};
use crate::states::{resolve, Placed};
use crate::CliError;

const DEFAULT_SHOTS: u64 = 10_000;

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let text = match cli.command {
        Command::Table1 => table1(cli)?,
        Command::Sweep => sweep(cli)?,
        Command::Score => score(cli)?,
        Command::Optimize => optimize(cli)?,
        Command::Pulse => pulse(cli)?,
        Command::Shots => shots(cli)?,
        Command::Wigner => wigner(cli)?,
        Command::McClassical => mc_classical(cli)?,
    };
    emit(&text, cli.out.as_deref())?;
    Ok(())
}

fn exec(cli: &Cli) -> Execution {
    if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn format(cli: &Cli, default: Format) -> Format {
    cli.format.unwrap_or(default)
}

fn optimizer_config(cli: &Cli) -> OptimizerConfig {
    OptimizerConfig { n_starts: cli.starts, seed: cli.seed, exec: exec(cli), ..OptimizerConfig::default() }
}

/// `--k`, defaulting to `d − 1` of the protocol block.
fn k_for(cli: &Cli, d: usize) -> Result<usize, CliError> {
    match cli.k {
        Some(k) => Ok(k),
        None if d >= 4 => Ok(d - 1),
        None => Err(CliError::Usage(format!("--k is required for d = {d}"))),
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.12}")).collect::<Vec<_>>().join(";")
}

/// Angles from `--angles`, the uneven optimizer, `--phi0` or the state's best uniform offset.
fn angles_for(cli: &Cli, state: &QuditState, k: usize) -> Result<AngleSet, CliError> {
    if let Some(a) = &cli.angles {
        return Ok(AngleSet::from_unsorted(a.clone())?);
    }
    if cli.uneven {
        let system = SpinSystem::new(state.spin());
        let run = optimize_angles_with(&system, k, &optimizer_config(cli))?;
        return Ok(AngleSet::from_unsorted(run.final_angles.centered())?);
    }
    let phi0 = match cli.phi0 {
        Some(p) => p,
        None => best_uniform_offset(state, k)?.0,
    };
    Ok(AngleSet::uniform(k, phi0)?)
}

fn table1(cli: &Cli) -> Result<String, CliError> {
    let rows: Vec<Table1Result> = evaluate_table1(&optimizer_config(cli))?;
    let text = match format(cli, Format::Json) {
        Format::Json => json(&rows)?,
        Format::Csv => {
            let mut s = String::from(
                "label,d,K,uneven,classical_bound,max_score,printed_max_score,state_fidelity,angles_rad\n",
            );
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{:.12},{:.12},{},{:.12},{}",
                    r.label,
                    r.d,
                    r.k,
                    r.uneven,
                    r.classical_bound,
                    r.max_score,
                    r.printed_max_score,
                    r.state_fidelity,
                    join(&r.angles_rad)
                );
            }
            s
        }
    };
    Ok(text)
}

#[derive(Serialize)]
struct SweepPoint {
    phi: f64,
    pos: f64,
    optimal: bool,
}

fn sweep(cli: &Cli) -> Result<String, CliError> {
    let placed = resolve(cli)?;
    let block = placed.restricted()?;
    let n = cli.points.unwrap_or(720);
    if n < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let mut phis: Vec<(f64, bool)> = (0..n).map(|i| (std::f64::consts::TAU * i as f64 / n as f64, false)).collect();
    let optimal = match cli.k {
        Some(k) => {
            let set = angles_for(cli, &block, k)?;
            phis.extend(set.angles().iter().map(|&a| (a.rem_euclid(std::f64::consts::TAU), true)));
            Some(set)
        }
        None => None,
    };
    phis.sort_by(|a, b| a.0.total_cmp(&b.0));
    let angles: Vec<f64> = phis.iter().map(|p| p.0).collect();
    let pos: Vec<f64> = match cli.shots {
        None => exec(cli)
            .map_indexed(angles.len(), |i| pos_at(&block, angles[i]))
            .into_iter()
            .collect::<Result<_, _>>()?,
        Some(shots) => sampled_pos(&placed, &angles, shots, cli)?,
    };
    let points: Vec<SweepPoint> =
        phis.iter().zip(&pos).map(|(&(phi, optimal), &pos)| SweepPoint { phi, pos, optimal }).collect();
    let opt: Vec<f64> = points.iter().filter(|p| p.optimal).map(|p| p.pos).collect();
    let score = (!opt.is_empty()).then(|| opt.iter().sum::<f64>() / opt.len() as f64);
    let text = match format(cli, Format::Csv) {
        Format::Csv => {
            let mut s = String::from("phi,pos,optimal\n");
            for p in &points {
                let _ = writeln!(s, "{:.12},{:.12},{}", p.phi, p.pos, u8::from(p.optimal));
            }
            s
        }
        Format::Json => json(&json!({
            "d": block.dim(),
            "K": cli.k,
            "angles_rad": optimal.as_ref().map(|a| a.angles().to_vec()),
            "score": score,
            "shots": cli.shots,
            "points": points,
        }))?,
    };
    Ok(text)
}

fn sampled_pos(placed: &Placed, angles: &[f64], shots: u64, cli: &Cli) -> Result<Vec<f64>, CliError> {
    let pts = run_at_angles(&placed.state, angles, placed.subspace, exec(cli))?;
    let rec = sample_protocol(&pts, placed.state.spin(), placed.subspace, shots, cli.seed, exec(cli))?;
    Ok((0..rec.angles()).map(|k| rec.positive_fraction(k)).collect())
}

fn score(cli: &Cli) -> Result<String, CliError> {
    let placed = resolve(cli)?;
    let block = placed.restricted()?;
    let k = k_for(cli, block.dim())?;
    let angles = angles_for(cli, &block, k)?;
    let bound = classical_bound(k)?;
    let value = match cli.shots {
        None => {
            let r = quantum_score(&block, &angles)?;
            json!({
                "mode": "analytic",
                "d": block.dim(),
                "K": k,
                "angles_rad": angles.angles(),
                "score": r.score,
                "classical_bound": bound,
                "quantum_max": r.quantum_max,
                "violation": r.violation,
            })
        }
        Some(shots) => {
            let pts = run_protocol(&placed.state, &angles, placed.subspace, exec(cli))?;
            let rec = sample_protocol(&pts, placed.state.spin(), placed.subspace, shots, cli.seed, exec(cli))?;
            let est = estimate_score(&rec, cli.bootstrap, exec(cli))?;
            json!({
                "mode": "sampled",
                "d": block.dim(),
                "K": k,
                "angles_rad": angles.angles(),
                "score": est.point,
                "ci_low": est.ci_low,
                "ci_high": est.ci_high,
                "sigma": est.sigma(),
                "ideal_score": protocol_score(&pts),
                "classical_bound": bound,
                "violation": est.ci_low > bound,
                "shots_per_angle": shots,
                "seed": cli.seed,
            })
        }
    };
    let text = match format(cli, Format::Json) {
        Format::Json => json(&value)?,
        Format::Csv => {
            let keys = ["mode", "d", "K", "score", "ci_low", "ci_high", "classical_bound", "quantum_max", "violation"];
            let present: Vec<&str> = keys.iter().copied().filter(|k| value.get(*k).is_some()).collect();
            let cells: Vec<String> = present.iter().map(|k| csv_cell(&value[*k])).collect();
            format!("{}\n{}\n", present.join(","), cells.join(","))
        }
    };
    Ok(text)
}

fn csv_cell(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn optimize(cli: &Cli) -> Result<String, CliError> {
    let d = cli.d.unwrap_or(8);
    let system = SpinSystem::from_dim(d)?;
    let k = k_for(cli, d)?;
    let report = if cli.uneven {
        optimize_angles_with(&system, k, &optimizer_config(cli))?.report()?
    } else {
        let angles = AngleSet::uniform(k, cli.phi0.unwrap_or(0.0))?;
        let max = max_quantum_score(&system, &angles)?;
        OptimizationReport {
            d,
            k,
            score: max.value,
            angles_rad: angles.angles().to_vec(),
            state: max.state.to_file()?,
            iterations: 0,
            converged: true,
        }
    };
    let text = match format(cli, Format::Json) {
        Format::Json => json(&report)?,
        Format::Csv => format!(
            "d,K,score,iterations,converged,angles_rad\n{},{},{:.12},{},{},{}\n",
            report.d,
            report.k,
            report.score,
            report.iterations,
            report.converged,
            join(&report.angles_rad)
        ),
    };
    Ok(text)
}

fn pulse(cli: &Cli) -> Result<String, CliError> {
    let placed = resolve(cli)?;
    let block = placed.restricted()?;
    let k = k_for(cli, block.dim())?;
    let angles = angles_for(cli, &block, k)?;
    let spin = placed.state.spin();
    let preparation = ladder_compile(&placed.state)?;
    let readout = angles
        .angles()
        .iter()
        .map(|&phi| {
            let mut seq = PulseSequence::new(spin);
            seq.push(virtual_rz(spin, -phi, placed.subspace)?)?;
            seq.push(su2_pulse(spin, Axis::MinusY, std::f64::consts::FRAC_PI_2, placed.subspace)?)?;
            Ok(seq)
        })
        .collect::<Result<Vec<_>, precession_core::Error>>()?;
    let points = run_protocol(&placed.state, &angles, placed.subspace, exec(cli))?;
    let text = match format(cli, Format::Json) {
        Format::Json => json(&json!({
            "J": spin.j(),
            "subspace": placed.subspace,
            "angles_rad": angles.angles(),
            "preparation": preparation,
            "readout": readout,
            "points": points,
            "score": protocol_score(&points),
        }))?,
        Format::Csv => {
            let mut s = String::from("phi,pos\n");
            for p in &points {
                let _ = writeln!(s, "{:.12},{:.12}", p.phi, p.pos);
            }
            s
        }
    };
    Ok(text)
}

fn shots(cli: &Cli) -> Result<String, CliError> {
    let placed = resolve(cli)?;
    let block = placed.restricted()?;
    let k = k_for(cli, block.dim())?;
    let angles = angles_for(cli, &block, k)?;
    let n = cli.shots.unwrap_or(DEFAULT_SHOTS);
    let pts = run_protocol(&placed.state, &angles, placed.subspace, exec(cli))?;
    let rec = sample_protocol(&pts, placed.state.spin(), placed.subspace, n, cli.seed, exec(cli))?;
    let text = match format(cli, Format::Csv) {
        Format::Csv => rec.to_csv(),
        Format::Json => {
            let est = estimate_score(&rec, cli.bootstrap, exec(cli))?;
            let fid = if angles.is_uniform() { Some(fidelity_lower_bound(est.point, k)?) } else { None };
            json(&json!({
                "angles_rad": angles.angles(),
                "estimate": est,
                "sigma": est.sigma(),
                "classical_bound": classical_bound(k)?,
                "cat_fidelity_bound": fid,
                "record": rec,
            }))?
        }
    };
    Ok(text)
}

fn wigner(cli: &Cli) -> Result<String, CliError> {
    let placed = resolve(cli)?;
    let block = placed.restricted()?;
    let n_phi = cli.points.unwrap_or(200);
    let n_theta = (n_phi / 2).max(2);
    let grid = wigner_grid(&block, n_theta, n_phi, exec(cli))?;
    let text = match format(cli, Format::Csv) {
        Format::Csv => grid.to_csv(),
        Format::Json => json(&grid)?,
    };
    Ok(text)
}

fn mc_classical(cli: &Cli) -> Result<String, CliError> {
    let k = cli.k.unwrap_or(7);
    let n = cli.points.unwrap_or(100_000);
    let mc = classical_mc(k, n, cli.seed, exec(cli))?;
    let text = match format(cli, Format::Json) {
        Format::Json => json(&mc)?,
        Format::Csv => {
            let mut s = String::from("positives,score,count\n");
            for (i, c) in mc.histogram.iter().enumerate() {
                let _ = writeln!(s, "{i},{:.12},{c}", i as f64 / k as f64);
            }
            s
        }
    };
    Ok(text)
}
