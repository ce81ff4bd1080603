//! Quantum subroutines shared by the money schemes and their attacks.

pub mod bomb;
pub mod grover;
pub mod hh;
pub mod prep;
pub mod simon;
