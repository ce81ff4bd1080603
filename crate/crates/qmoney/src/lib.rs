//! A dense state-vector laboratory for quantum money.
//!
//! The crate simulates small quantum systems exactly (up to 20 qubits) and
//! builds on that simulator in layers:
//!
//! - `sim`: pure states, density matrices, unitaries, POVMs, channels,
//!   gentle measurement, trace distance and fidelity.
//! - `f2`: bit vectors and subspaces of F_2^n with canonical reduced bases.
//! - `oracle` / `algorithms`: reversible oracles, Simon's algorithm, Grover
//!   search, amplitude amplification, state preparation, the interaction-free
//!   bomb test, and a decoding demo for branch-entangled states.
//! - `money`: the private-key schemes (Wiesner and its PRF variant) together
//!   with every counterfeiting strategy the lab measures: naive measurement,
//!   the optimal cloning channel, the adaptive substitution attack against a
//!   lenient bank, and the rotate-and-verify probe against a strict bank.
//! - `public`: the hidden-subspace public-key scheme, its polynomial
//!   obfuscation, the Grover forger, the search-to-forging reduction, and the
//!   single-copy tomography attack on noisy polynomial instances.
//! - `experiments` / `report`: seeded, reproducible experiment drivers with
//!   deterministic JSON/CSV reports, shared by the CLI and the test suite.
//!
//! Everything stochastic takes an explicit [`rng::Stream`]; identical seeds
//! give identical results, including across the report emitters.

pub mod algorithms;
pub mod error;
pub mod experiments;
pub mod f2;
pub mod linalg;
pub mod money;
pub mod oracle;
pub mod public;
pub mod report;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};

/// Library version echoed into experiment reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hard cap on simulated register width, everywhere.
pub const MAX_QUBITS: usize = 20;
