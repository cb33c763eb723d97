use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "precession", about = "Uniform-precession quantumness certification for spin-J qudits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Hilbert-space dimension d = 2J + 1 of the host spin.
    #[arg(long, global = true)]
    pub d: Option<usize>,

    /// Number of probing angles K (odd, at least 3).
    #[arg(long, global = true)]
    pub k: Option<usize>,

    /// Use uneven probing angles inside |φ_k − 2πk/K| ≤ π/(2K).
    #[arg(long, global = true)]
    pub uneven: bool,

    /// Offset of the uniform angle set in radians; the best offset for the state when omitted.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub phi0: Option<f64>,

    /// Explicit comma-separated angle set in radians (overrides --phi0 and --uneven).
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub angles: Option<Vec<f64>>,

    /// State file (JSON) or name: cat, coherent[:θ,φ], table1:<row>.
    #[arg(long, global = true)]
    pub state: Option<String>,

    /// Levels LO..HI (0-based, inclusive) the protocol runs in.
    #[arg(long, global = true)]
    pub subspace: Option<String>,

    /// Shots per angle; switches to sampled mode.
    #[arg(long, global = true)]
    pub shots: Option<u64>,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Sweep points, Monte Carlo samples or Wigner φ samples, depending on the command.
    #[arg(long, global = true)]
    pub points: Option<usize>,

    /// Output path (written atomically); stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Multi-start count for the uneven optimizer.
    #[arg(long, global = true, default_value_t = 64)]
    pub starts: usize,

    /// Bootstrap resamples for sampled scores.
    #[arg(long, global = true, default_value_t = 1000)]
    pub bootstrap: usize,

    /// Force sequential execution.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Reproduce every row of the summary table.
    Table1,
    /// ⟨Pos(I_x)⟩ of a state as a function of the precession angle.
    Sweep,
    /// Quantum score of a state on an angle set.
    Score,
    /// Maximal score and optimal state for (d, K), optimizing uneven angles with --uneven.
    Optimize,
    /// Compile the preparation and protocol pulse sequence of a state.
    Pulse,
    /// Sample readout shots and bootstrap the score.
    Shots,
    /// Spin-Wigner function on a (θ, φ) grid.
    Wigner,
    /// Monte Carlo of classical scores over admissible angle sets.
    McClassical,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}
