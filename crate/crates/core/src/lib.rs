//! Quantumness certification of spin-J qudits through uniform precession.

pub mod error;
pub mod exec;
pub mod linalg;
pub mod measurement;
pub mod optimizer;
pub mod protocol;
pub mod pulse;
pub mod reference;
pub mod spin;
pub mod state;
pub mod wigner;

pub use error::{Error, Result};
pub use exec::Execution;
pub use spin::{LevelRange, Spin, SpinSystem};
pub use state::QuditState;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Version of the on-disk formats: state JSON, shot CSV, Wigner CSV, pulse JSON.
pub const FORMAT_VERSION: u32 = 1;
