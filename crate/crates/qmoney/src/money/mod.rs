//! Private-key quantum money: notes, the issuing bank, and the full menu of
//! counterfeiting strategies measured against it.

pub mod adaptive;
pub mod bank;
pub mod bomb_attack;
pub mod clone_opt;
pub mod counterfeit;
pub mod note;
pub mod prf;

pub use adaptive::{adaptive_attack, AdaptiveRecovery, DEFAULT_STREAK};
pub use bank::{RejectionPolicy, Verification, WiesnerBank};
pub use bomb_attack::{
    bomb_extract, interaction_rounds, per_probe_catch_probability, BombExtractionOutcome,
    BombRecovery, DEFAULT_EPSILON,
};
pub use clone_opt::{
    measure_resend_channel, optimize_clone_channel, random_cell_channel, CloneChannel,
    CloneOptimization,
};
pub use counterfeit::{
    apply_kraus_1to2, channel_counterfeit, naive_counterfeit, verify_pair, CounterfeitPair,
};
pub use note::{Banknote, Basis, BasisString, Cell};
pub use prf::{avalanche_fraction, ChaChaPrf, Prf};
