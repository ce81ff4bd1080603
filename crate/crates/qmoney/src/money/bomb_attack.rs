//! Key extraction against a strict bank, where any rejection costs the
//! note. The trick is the interaction-free probe: a slowly rotated ancilla
//! controls a candidate gate on one note qubit, and the bank's own
//! verification plays the role of the always-watching detector.
//!
//! Candidate gates pair up with cells so that the true cell is the +1
//! eigenstate of exactly one gate. Against that gate the probe turns
//! freely and finishes at |1> after a quarter turn; against the other gate
//! of the same basis it bounces back to |0> every two rounds; against a
//! wrong-basis gate the Zeno effect pins it at |0>, at the price of a
//! small per-round chance that the bank sees a flipped bit and pulls the
//! note. With an even round count every surviving outcome is
//! deterministic, so a finished run always reports the exact key and the
//! note comes back untouched.

use crate::algorithms::bomb::bomb_rounds;
use crate::error::{Error, Result};
use crate::money::bank::WiesnerBank;
use crate::money::note::{Banknote, BasisString, Cell};
use crate::sim::{DensityMatrix, PureState, Unitary};
use crate::MAX_QUBITS;

/// Default probe rotation scale; one wrong-basis candidate is caught with
/// probability about pi * eps / 2, a hair over 3%.
pub const DEFAULT_EPSILON: f64 = 0.02;

#[derive(Clone, Debug)]
pub struct BombRecovery {
    pub key: BasisString,
    /// The original note, exactly intact.
    pub note: Banknote,
    pub verifications: u64,
}

#[derive(Clone, Debug)]
pub enum BombExtractionOutcome {
    Recovered(BombRecovery),
    /// The bank saw a flipped bit mid-probe and confiscated the note.
    Caught { qubit: usize, candidate: Cell, verifications: u64 },
}

/// Rounds per candidate probe: the bomb-test count, bumped to even so the
/// same-basis bounce closes exactly.
pub fn interaction_rounds(eps: f64) -> Result<usize> {
    let r = bomb_rounds(eps)?;
    Ok(r + (r & 1))
}

/// Probability that one wrong-basis candidate probe triggers the bank.
pub fn per_probe_catch_probability(rounds: usize) -> f64 {
    let theta = std::f64::consts::FRAC_PI_2 / rounds as f64;
    1.0 - theta.cos().powi(2 * rounds as i32)
}

/// The gate whose +1 eigenstate is this cell, with the sign chosen so the
/// other cell of the same basis sits at -1. The sign is physical once the
/// gate is controlled.
fn candidate_gate(cell: Cell) -> Result<Unitary> {
    let base = match cell {
        Cell::Zero | Cell::One => Unitary::pauli_z(),
        Cell::Plus | Cell::Minus => Unitary::pauli_x(),
    };
    match cell {
        Cell::Zero | Cell::Plus => Ok(base),
        Cell::One | Cell::Minus => Unitary::new(base.mat().mapv(|v| -v)),
    }
}

/// Probe one candidate cell at `slot`. Returns the surviving note state and
/// whether the probe confirmed the candidate, or None if the bank rejected.
fn probe_candidate(
    bank: &mut WiesnerBank,
    serial: u64,
    note_state: &PureState,
    slot: usize,
    cell: Cell,
    rounds: usize,
    spent: &mut u64,
    rng: &mut crate::rng::Stream,
) -> Result<Option<(bool, PureState)>> {
    let n = note_state.n();
    let theta = std::f64::consts::FRAC_PI_2 / rounds as f64;
    let tick = Unitary::rotation(theta);
    let gate = candidate_gate(cell)?.controlled();
    let positions: Vec<usize> = (0..n).collect();
    let mut joint = note_state.tensor(&PureState::basis(1, 0)?)?;
    for _ in 0..rounds {
        joint = joint.apply_1q(&tick, n)?;
        // Control first: the probe drives the gate on the note qubit.
        joint = joint.apply(&gate, &[n, slot])?;
        let (ok, post) = bank.verify_joint(serial, joint, &positions)?;
        *spent += 1;
        if !ok {
            return Ok(None);
        }
        joint = post;
    }
    let (bits, collapsed) = joint.measure(&[n], rng)?;
    let confirmed = bits[0] == 1;
    // The probe is collapsed, so the note factor is pure and exact.
    let reduced = DensityMatrix::from_pure_keeping(&collapsed, &positions)?;
    Ok(Some((confirmed, reduced.top_eigenvector()?)))
}

/// Extract the full key of `note` from a bank of either policy without
/// ever being rejected, except with the per-probe probability above. The
/// probe schedule touches only phases of genuine cells, so on success the
/// returned note is bit-for-bit the minted state.
pub fn bomb_extract(
    bank: &mut WiesnerBank,
    note: Banknote,
    eps: f64,
    rng: &mut crate::rng::Stream,
) -> Result<BombExtractionOutcome> {
    let n = bank.n();
    if note.n() != n {
        return Err(Error::Dimension(format!(
            "note has {} qubits, bank expects {}",
            note.n(),
            n
        )));
    }
    if n + 1 > MAX_QUBITS {
        return Err(Error::Capacity { requested: n + 1, max: MAX_QUBITS });
    }
    let rounds = interaction_rounds(eps)?;
    let serial = note.serial;
    let mut state = note.state;
    let mut spent: u64 = 0;
    let mut cells = Vec::with_capacity(n);
    for slot in 0..n {
        let mut found = None;
        for cell in Cell::ALL {
            match probe_candidate(bank, serial, &state, slot, cell, rounds, &mut spent, rng)? {
                None => {
                    return Ok(BombExtractionOutcome::Caught {
                        qubit: slot,
                        candidate: cell,
                        verifications: spent,
                    })
                }
                Some((confirmed, survivor)) => {
                    state = survivor;
                    if confirmed {
                        found = Some(cell);
                        break;
                    }
                }
            }
        }
        match found {
            Some(cell) => cells.push(cell),
            None => {
                return Err(Error::InvalidState(
                    "no candidate confirmed; note does not match its serial".into(),
                ))
            }
        }
    }
    Ok(BombExtractionOutcome::Recovered(BombRecovery {
        key: BasisString::new(cells)?,
        note: Banknote { serial, state },
        verifications: spent,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::money::bank::RejectionPolicy;
    use crate::rng::Stream;

    fn strict_bank(n: usize, seed: u64) -> WiesnerBank {
        WiesnerBank::with_ledger(n, RejectionPolicy::Destroy, Stream::from_seed(seed)).unwrap()
    }

    #[test]
    fn computational_keys_extract_risk_free() {
        // Candidates are probed computational-basis first, so a key with no
        // Hadamard cells never exposes a wrong-basis gate to the bank.
        let mut bank = strict_bank(4, 41);
        let mut rng = Stream::from_seed(141);
        for _ in 0..15 {
            let key: BasisString = "0110".parse().unwrap();
            let note = bank.mint_with_key(key.clone()).unwrap();
            match bomb_extract(&mut bank, note, DEFAULT_EPSILON, &mut rng).unwrap() {
                BombExtractionOutcome::Recovered(r) => {
                    assert_eq!(r.key.to_string(), key.to_string());
                }
                BombExtractionOutcome::Caught { .. } => {
                    panic!("computational keys carry no catch risk")
                }
            }
        }
        assert_eq!(bank.failure_log(), 0);
    }

    #[test]
    fn survivors_recover_exactly_and_leave_no_damage() {
        let n = 4;
        let mut bank = strict_bank(n, 42);
        let mut rng = Stream::from_seed(142);
        let mut recovered = 0;
        for _ in 0..40 {
            let note = bank.mint().unwrap();
            let serial = note.serial;
            let original = note.state.clone();
            let truth = bank.key(serial).unwrap();
            match bomb_extract(&mut bank, note, DEFAULT_EPSILON, &mut rng).unwrap() {
                BombExtractionOutcome::Recovered(r) => {
                    recovered += 1;
                    assert_eq!(r.key.to_string(), truth.to_string());
                    let overlap = r.note.state.overlap_sq(&original).unwrap();
                    assert!((overlap - 1.0).abs() < 1e-10, "overlap {overlap}");
                    assert!(bank.verify(r.note).unwrap().accepted);
                }
                BombExtractionOutcome::Caught { .. } => {}
            }
        }
        // Expected catch rate is about 12% for n=4; most runs survive.
        assert!(recovered >= 25, "only {recovered}/40 recovered");
    }

    #[test]
    fn catch_rate_tracks_the_zeno_prediction() {
        // A single Hadamard cell meets exactly two wrong-basis candidates.
        let mut bank = strict_bank(1, 43);
        let mut rng = Stream::from_seed(143);
        let rounds = interaction_rounds(DEFAULT_EPSILON).unwrap();
        let p = per_probe_catch_probability(rounds);
        let expected = 1.0 - (1.0 - p) * (1.0 - p);
        let trials = 2000;
        let mut caught = 0;
        for _ in 0..trials {
            let key: BasisString = "+".parse().unwrap();
            let note = bank.mint_with_key(key).unwrap();
            if let BombExtractionOutcome::Caught { .. } =
                bomb_extract(&mut bank, note, DEFAULT_EPSILON, &mut rng).unwrap()
            {
                caught += 1;
            }
        }
        let rate = caught as f64 / trials as f64;
        let sigma = (expected * (1.0 - expected) / trials as f64).sqrt();
        assert!(
            (rate - expected).abs() < 4.0 * sigma,
            "rate {rate}, expected {expected} +- {sigma}"
        );
        assert_eq!(bank.failure_log(), caught as u64);
    }

    #[test]
    fn rejects_bad_epsilon() {
        let mut bank = strict_bank(2, 44);
        let mut rng = Stream::from_seed(144);
        let note = bank.mint().unwrap();
        assert!(bomb_extract(&mut bank, note, 0.0, &mut rng).is_err());
    }
}
