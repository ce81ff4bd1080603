//! Key extraction against a bank that hands rejected notes back.
//!
//! One qubit at a time, swap a candidate cell into the note and resubmit.
//! The true cell is never rejected; a wrong bit in the right basis is
//! rejected on the first try; a wrong-basis candidate survives each round
//! with probability 1/2. A run of consecutive accepts therefore pins the
//! cell down, and every rejection repairs itself: the bank's measurement
//! collapses the rest of the note back onto the genuine product state, and
//! the next swap-in replaces the one damaged qubit anyway.

use crate::error::{Error, Result};
use crate::money::bank::{RejectionPolicy, WiesnerBank};
use crate::money::note::{Banknote, BasisString, Cell};
use crate::sim::{DensityMatrix, PureState};

/// Consecutive accepts demanded before a candidate is declared correct.
/// A wrong-basis cell fakes its way through with probability 2^-STREAK.
pub const DEFAULT_STREAK: usize = 16;

#[derive(Clone, Debug)]
pub struct AdaptiveRecovery {
    /// The reconstructed minting key.
    pub key: BasisString,
    /// The note, fully genuine again after the final accept.
    pub note: Banknote,
    /// Bank calls spent.
    pub verifications: u64,
}

fn ceil_log2(m: usize) -> u32 {
    if m <= 1 {
        0
    } else {
        usize::BITS - (m - 1).leading_zeros()
    }
}

/// Replace qubit `slot` of `state` with `cell`, keeping everything else.
/// The rest of the register is in a product state whenever this attack
/// calls it (the bank's measurement guarantees that), so the top
/// eigenvector of the reduced state is exact.
fn swap_in(state: &PureState, slot: usize, cell: Cell) -> Result<PureState> {
    let n = state.n();
    let rest: Vec<usize> = (0..n).filter(|&q| q != slot).collect();
    let reduced = DensityMatrix::from_pure_keeping(state, &rest)?;
    let others = reduced.top_eigenvector()?;
    let joint = others.tensor(&cell.state())?;
    // The candidate sits at the tail; rotate it into `slot` while the rest
    // keep their relative order.
    let mut new_from_old = vec![0usize; n];
    for (tail_pos, &orig) in rest.iter().enumerate() {
        new_from_old[orig] = tail_pos;
    }
    new_from_old[slot] = n - 1;
    joint.reorder(&new_from_old)
}

/// Recover the full key of `note` using the bank itself as the oracle.
/// Needs [`RejectionPolicy::ReturnDamaged`]; a strict bank destroys the
/// note on the first probe in the wrong basis. Budget-limited to
/// 64 * n * ceil(log2(n+1)) bank calls.
pub fn adaptive_attack(
    bank: &mut WiesnerBank,
    note: Banknote,
    streak: usize,
) -> Result<AdaptiveRecovery> {
    if bank.policy() != RejectionPolicy::ReturnDamaged {
        return Err(Error::Precondition(
            "adaptive extraction needs a bank that returns damaged notes".into(),
        ));
    }
    if streak == 0 {
        return Err(Error::InvalidArgument("streak must be positive".into()));
    }
    let n = bank.n();
    if note.n() != n {
        return Err(Error::Dimension(format!(
            "note has {} qubits, bank expects {}",
            note.n(),
            n
        )));
    }
    let budget = 64 * n as u64 * u64::from(ceil_log2(n + 1));
    let serial = note.serial;
    let mut current = note.state;
    let mut spent: u64 = 0;
    let mut cells = Vec::with_capacity(n);
    for slot in 0..n {
        let mut found = None;
        'candidates: for cell in Cell::ALL {
            let mut accepts = 0usize;
            while accepts < streak {
                if spent >= budget {
                    return Err(Error::BudgetExceeded { spent, budget });
                }
                let probe = swap_in(&current, slot, cell)?;
                let verdict = bank.verify(Banknote { serial, state: probe })?;
                spent += 1;
                let returned = verdict
                    .returned
                    .ok_or_else(|| Error::InvalidState("lenient bank kept the note".into()))?;
                current = returned.state;
                if verdict.accepted {
                    accepts += 1;
                } else {
                    // Any rejection rules the candidate out: the true cell
                    // survives verification with certainty.
                    continue 'candidates;
                }
            }
            found = Some(cell);
            break;
        }
        match found {
            Some(cell) => cells.push(cell),
            None => {
                return Err(Error::InvalidState(
                    "every candidate was rejected; note does not match its serial".into(),
                ))
            }
        }
    }
    let key = BasisString::new(cells)?;
    Ok(AdaptiveRecovery {
        key,
        note: Banknote { serial, state: current },
        verifications: spent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    #[test]
    fn recovers_the_exact_key() {
        let n = 6;
        let mut bank =
            WiesnerBank::with_ledger(n, RejectionPolicy::ReturnDamaged, Stream::from_seed(21))
                .unwrap();
        let note = bank.mint().unwrap();
        let serial = note.serial;
        let truth = bank.key(serial).unwrap();
        let got = adaptive_attack(&mut bank, note, DEFAULT_STREAK).unwrap();
        assert_eq!(got.key.to_string(), truth.to_string());
        assert!(got.verifications <= 64 * n as u64 * 3);
        // The recovered note is fully genuine.
        let check = bank.verify(got.note).unwrap();
        assert!(check.accepted);
    }

    #[test]
    fn forged_notes_from_the_key_verify() {
        let n = 4;
        let mut bank =
            WiesnerBank::with_ledger(n, RejectionPolicy::ReturnDamaged, Stream::from_seed(22))
                .unwrap();
        let note = bank.mint().unwrap();
        let serial = note.serial;
        let got = adaptive_attack(&mut bank, note, DEFAULT_STREAK).unwrap();
        for _ in 0..10 {
            let forged = Banknote { serial, state: got.key.state() };
            assert!(bank.verify(forged).unwrap().accepted);
        }
    }

    #[test]
    fn strict_banks_are_out_of_scope() {
        let mut bank =
            WiesnerBank::with_ledger(3, RejectionPolicy::Destroy, Stream::from_seed(23)).unwrap();
        let note = bank.mint().unwrap();
        let err = adaptive_attack(&mut bank, note, DEFAULT_STREAK).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn swap_in_preserves_spectators() {
        let key: BasisString = "0+1-".parse().unwrap();
        let swapped = swap_in(&key.state(), 2, Cell::Minus).unwrap();
        let expect: BasisString = "0+--".parse().unwrap();
        assert!((swapped.overlap_sq(&expect.state()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn repeated_runs_stay_within_budget() {
        for seed in 30..36 {
            let n = 5;
            let mut bank = WiesnerBank::with_ledger(
                n,
                RejectionPolicy::ReturnDamaged,
                Stream::from_seed(seed),
            )
            .unwrap();
            let note = bank.mint().unwrap();
            let serial = note.serial;
            let truth = bank.key(serial).unwrap();
            let got = adaptive_attack(&mut bank, note, DEFAULT_STREAK).unwrap();
            assert_eq!(got.key.to_string(), truth.to_string());
        }
    }
}
