use std::f64::consts::{FRAC_PI_2, PI};

use precession_core::linalg::CVector;
use precession_core::reference::table1_row;
use precession_core::state::{cat_state, spin_coherent_state, StateFile};
use precession_core::wigner::truncate_density;
use precession_core::{LevelRange, QuditState, Spin, SpinSystem};

use crate::args::Cli;
use crate::CliError;

/// A state placed in the host space together with the block the protocol runs in.
pub struct Placed {
    pub state: QuditState,
    pub subspace: LevelRange,
}

impl Placed {
    /// The state restricted to its subspace: the exact block for pure states with no weight
    /// outside it, otherwise the renormalized density block.
    pub fn restricted(&self) -> Result<QuditState, CliError> {
        let full = LevelRange::full(self.state.dim());
        if self.subspace == full {
            return Ok(self.state.clone());
        }
        if let Some(v) = self.state.amplitudes() {
            let outside: f64 = v
                .iter()
                .enumerate()
                .filter(|(i, _)| !self.subspace.contains(*i))
                .map(|(_, a)| a.norm_sqr())
                .sum();
            if outside <= 1e-12 {
                let block = CVector::from_iterator(
                    self.subspace.size(),
                    self.subspace.levels().map(|i| v[i]),
                );
                return Ok(QuditState::pure_normalized(self.subspace.spin(), block)?);
            }
        }
        Ok(truncate_density(&self.state, self.subspace)?)
    }
}

pub fn parse_subspace(text: &str) -> Result<LevelRange, CliError> {
    let bad = || CliError::Usage(format!("--subspace expects LO..HI, got '{text}'"));
    let (lo, hi) = text.split_once("..").ok_or_else(bad)?;
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
    Ok(LevelRange::new(lo, hi)?)
}

fn spin_of(d: usize) -> Result<Spin, CliError> {
    Ok(Spin::from_dim(d)?)
}

fn parse_pair(text: &str, what: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Usage(format!("{what} expects two comma-separated numbers, got '{text}'"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

/// Reads a state file, or the `state` field of a JSON report written by another command.
fn read_state_file(path: &str) -> Result<QuditState, CliError> {
    let text = std::fs::read_to_string(path)?;
    let mut value: serde_json::Value = serde_json::from_str(&text)?;
    if let Some(inner) = value.get_mut("state") {
        value = inner.take();
    }
    let file: StateFile = serde_json::from_value(value)?;
    Ok(file.into_state(false)?)
}

/// Named or file state in its own dimension, or `None` for named states sized by context.
enum Source {
    Cat(f64),
    Coherent(f64, f64),
    Fixed(QuditState),
}

fn source(spec: &str) -> Result<Source, CliError> {
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (spec, None),
    };
    match (name, arg) {
        ("cat", None) => Ok(Source::Cat(PI)),
        ("cat", Some(a)) => Ok(Source::Cat(
            a.parse().map_err(|_| CliError::Usage(format!("bad cat phase '{a}'")))?,
        )),
        ("coherent", None) => Ok(Source::Coherent(FRAC_PI_2, 0.0)),
        ("coherent", Some(a)) => {
            let (t, p) = parse_pair(a, "coherent:θ,φ")?;
            Ok(Source::Coherent(t, p))
        }
        ("table1", Some(row)) => Ok(Source::Fixed(table1_row(row)?.state()?)),
        _ => Ok(Source::Fixed(read_state_file(spec)?)),
    }
}

/// Resolves `--state`, `--d` and `--subspace`. Without `--d` the host is the state's own
/// dimension (8 for cat and coherent); a smaller state sits in the centered block unless
/// `--subspace` says otherwise.
pub fn resolve(cli: &Cli) -> Result<Placed, CliError> {
    let src = source(cli.state.as_deref().unwrap_or("cat"))?;
    let explicit_sub = cli.subspace.as_deref().map(parse_subspace).transpose()?;
    let natural = match &src {
        Source::Fixed(s) => Some(s.dim()),
        _ => None,
    };
    let host = cli.d.or(natural).unwrap_or(8);
    let host_spin = spin_of(host)?;
    let subspace = match explicit_sub {
        Some(r) => r,
        None => match natural {
            Some(n) if n < host => LevelRange::centered(host, n)?,
            _ => LevelRange::full(host),
        },
    };
    subspace.check_within(host)?;
    let sub_spin = subspace.spin();
    let small = match src {
        Source::Cat(phase) => cat_state(&SpinSystem::new(sub_spin), sub_spin, phase)?,
        Source::Coherent(t, p) => spin_coherent_state(&SpinSystem::new(sub_spin), t, p),
        Source::Fixed(s) => s,
    };
    let state = if small.dim() == host {
        small
    } else if small.dim() == subspace.size() {
        small.embed(host_spin, subspace)?
    } else {
        return Err(CliError::Usage(format!(
            "state of dimension {} fits neither d = {host} nor the subspace {subspace}",
            small.dim()
        )));
    };
    Ok(Placed { state, subspace })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subspace_syntax() {
        assert_eq!(parse_subspace("2..5").unwrap(), LevelRange::new(2, 5).unwrap());
        assert_eq!(parse_subspace("2..=5").unwrap(), LevelRange::new(2, 5).unwrap());
        assert!(parse_subspace("2-5").is_err());
        assert!(parse_subspace("5..2").is_err());
    }

    #[test]
    fn named_sources() {
        assert!(matches!(source("cat").unwrap(), Source::Cat(p) if p == PI));
        assert!(matches!(source("coherent:1,2").unwrap(), Source::Coherent(t, p) if t == 1.0 && p == 2.0));
        assert!(matches!(source("table1:P4_3").unwrap(), Source::Fixed(s) if s.dim() == 4));
        assert!(source("coherent:1").is_err());
    }
}
