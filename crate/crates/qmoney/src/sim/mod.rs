//! Dense simulator core: state vectors, density matrices, channels, and the
//! measurement machinery everything else is built on.
//!
//! Register convention used throughout: qubit 0 is the most significant bit
//! of the basis-state index, so |q0 q1 ... q_{n-1}> maps to the integer with
//! q0 on top. Capacity is capped at 20 qubits (` crate::MAX_QUBITS`).

mod channel;
mod density;
mod distance;
mod gentle;
pub(crate) mod index;
mod pure;
mod unitary;

pub use channel::{povm_measure, Povm, Superoperator, COMPLETENESS_TOL};
pub use density::{DensityMatrix, EIG_FLOOR, HERMITICITY_TOL, TRACE_TOL};
pub use distance::{fidelity, fidelity_pure, trace_distance};
pub use gentle::{
    damage_bound_mixed, damage_bound_pure, damage_bound_sequence, sequential_gentle,
    GentleMeasurement, PROJECTOR_TOL,
};
pub use pure::{overlap_test, OverlapOutcome, PureState, NORM_TOL};
pub use unitary::{Unitary, UNITARITY_TOL};
