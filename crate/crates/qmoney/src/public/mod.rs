//! Public-key money: hidden-subspace notes, the oracles that verify them,
//! and the attacks that break careless variants.

pub mod full_scheme;
pub mod grover_forge;
pub mod hs;
pub mod noisy_attack;
pub mod polys;
pub mod sec_reduction;

pub use full_scheme::{full_scheme_mint, full_scheme_verify, SignedNote, Signer, StubSigner};
pub use grover_forge::{grover_forge, GroverForge};
pub use hs::{
    hs_accept_probability, hs_keygen, hs_mint, hs_verify, subspace_state, HsKey, HsOracle,
};
pub use noisy_attack::{noisy_poly_attack, NoisyAttackOutcome, CLASSIFY_ROUNDS};
pub use polys::{
    common_zero_set, polys_from_text, polys_generate, polys_to_text, NoiseTruth, Poly3F2,
    PolyInstance,
};
pub use sec_reduction::{sec_reduction_forge, NoteCloner, PerfectCloner, ReductionOutcome};
