use std::collections::{HashMap, HashSet};

use rand::RngCore;

use crate::error::{Error, Result};
use crate::money::note::{Banknote, Basis, BasisString};
use crate::money::prf::Prf;
use crate::rng::Stream;
use crate::sim::{PureState, Unitary};

/// What the teller does with a note that fails verification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RejectionPolicy {
    /// Hand the post-measurement state back to the customer.
    ReturnDamaged,
    /// Keep the note and log the failure.
    Destroy,
}

enum KeySource {
    /// Fresh uniform key per note, remembered in a ledger.
    Ledger(HashMap<u64, BasisString>),
    /// Key recomputed from the serial on demand.
    Derived(Box<dyn Prf>),
}

/// Issuer and verifier of single-use verification-key banknotes. Every
/// qubit is minted in one of the four cell states and verified by measuring
/// it in its recorded basis.
pub struct WiesnerBank {
    n: usize,
    policy: RejectionPolicy,
    keys: KeySource,
    issued: HashSet<u64>,
    rng: Stream,
    verifications: u64,
    failures: u64,
}

#[derive(Clone, Debug)]
pub struct Verification {
    pub serial: u64,
    pub accepted: bool,
    /// The note handed back: present on acceptance, and on rejection only
    /// under [`RejectionPolicy::ReturnDamaged`].
    pub returned: Option<Banknote>,
}

impl WiesnerBank {
    /// Bank with per-note random keys held in a ledger.
    pub fn with_ledger(n: usize, policy: RejectionPolicy, rng: Stream) -> Result<Self> {
        check_note_width(n)?;
        Ok(WiesnerBank {
            n,
            policy,
            keys: KeySource::Ledger(HashMap::new()),
            issued: HashSet::new(),
            rng,
            verifications: 0,
            failures: 0,
        })
    }

    /// Bank that derives each key from the serial, so verification needs no
    /// per-note storage.
    pub fn with_derived_keys(
        n: usize,
        policy: RejectionPolicy,
        prf: Box<dyn Prf>,
        rng: Stream,
    ) -> Result<Self> {
        check_note_width(n)?;
        Ok(WiesnerBank {
            n,
            policy,
            keys: KeySource::Derived(prf),
            issued: HashSet::new(),
            rng,
            verifications: 0,
            failures: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn policy(&self) -> RejectionPolicy {
        self.policy
    }

    pub fn outstanding(&self) -> usize {
        self.issued.len()
    }

    pub fn verifications(&self) -> u64 {
        self.verifications
    }

    /// Notes destroyed under [`RejectionPolicy::Destroy`].
    pub fn failure_log(&self) -> u64 {
        self.failures
    }

    /// The recorded key. The bank's secret; exposed so experiments can score
    /// key-recovery attacks against ground truth.
    pub fn key(&self, serial: u64) -> Result<BasisString> {
        if !self.issued.contains(&serial) {
            return Err(Error::UnknownSerial(serial));
        }
        match &self.keys {
            KeySource::Ledger(map) => {
                map.get(&serial).cloned().ok_or(Error::UnknownSerial(serial))
            }
            KeySource::Derived(prf) => prf.derive(serial, self.n),
        }
    }

    pub fn mint(&mut self) -> Result<Banknote> {
        let mut serial = self.rng.next_u64();
        let mut tries = 0;
        while self.issued.contains(&serial) {
            serial = self.rng.next_u64();
            tries += 1;
            if tries > 64 {
                return Err(Error::SerialSpaceExhausted(self.n));
            }
        }
        let key = match &mut self.keys {
            KeySource::Ledger(map) => {
                let key = BasisString::random(self.n, &mut self.rng)?;
                map.insert(serial, key.clone());
                key
            }
            KeySource::Derived(prf) => prf.derive(serial, self.n)?,
        };
        self.issued.insert(serial);
        Ok(Banknote { serial, state: key.state() })
    }

    /// Mint a note whose key is chosen by the caller instead of sampled.
    /// Only ledger banks support this; it exists so experiments can pin the
    /// basis pattern. Derived-key banks refuse.
    pub fn mint_with_key(&mut self, key: BasisString) -> Result<Banknote> {
        if key.n() != self.n {
            return Err(Error::Dimension(format!(
                "bank issues {}-qubit notes, key has {}",
                self.n,
                key.n()
            )));
        }
        let map = match &mut self.keys {
            KeySource::Ledger(map) => map,
            KeySource::Derived(_) => {
                return Err(Error::Precondition(
                    "derived-key banks mint only their own keys".into(),
                ))
            }
        };
        let mut serial = self.rng.next_u64();
        let mut tries = 0;
        while self.issued.contains(&serial) {
            serial = self.rng.next_u64();
            tries += 1;
            if tries > 64 {
                return Err(Error::SerialSpaceExhausted(self.n));
            }
        }
        map.insert(serial, key.clone());
        self.issued.insert(serial);
        Ok(Banknote { serial, state: key.state() })
    }

    /// Submit a whole note. Measures every qubit in its recorded basis and
    /// accepts exactly when all bits match; acceptance collapses the note
    /// onto the genuine state, which is what the customer gets back.
    pub fn verify(&mut self, note: Banknote) -> Result<Verification> {
        if note.n() != self.n {
            return Err(Error::Dimension(format!(
                "bank issues {}-qubit notes, got {}",
                self.n,
                note.n()
            )));
        }
        let serial = note.serial;
        let positions: Vec<usize> = (0..self.n).collect();
        let (accepted, post) = self.measure_against_key(serial, note.state, &positions)?;
        let returned = match (accepted, self.policy) {
            (true, _) | (false, RejectionPolicy::ReturnDamaged) => {
                Some(Banknote { serial, state: post })
            }
            (false, RejectionPolicy::Destroy) => None,
        };
        Ok(Verification { serial, accepted, returned })
    }

    /// Verify note qubits living inside a larger register, e.g. one the
    /// customer has entangled with qubits they kept. `positions[i]` is the
    /// joint-register qubit holding note qubit i. Returns the accept flag
    /// and the full post-measurement register; under
    /// [`RejectionPolicy::Destroy`] a rejection is logged and the note
    /// qubits are confiscated (they are collapsed and unentangled at that
    /// point, so the returned register is bookkeeping for the caller).
    pub fn verify_joint(
        &mut self,
        serial: u64,
        joint: PureState,
        positions: &[usize],
    ) -> Result<(bool, PureState)> {
        if positions.len() != self.n {
            return Err(Error::Dimension(format!(
                "{} positions for {}-qubit notes",
                positions.len(),
                self.n
            )));
        }
        self.measure_against_key(serial, joint, positions)
    }

    fn measure_against_key(
        &mut self,
        serial: u64,
        state: PureState,
        positions: &[usize],
    ) -> Result<(bool, PureState)> {
        let key = self.key(serial)?;
        self.verifications += 1;
        let h = Unitary::hadamard();
        let mut rotated = state;
        for (i, &q) in positions.iter().enumerate() {
            if key.cell(i).basis() == Basis::Hadamard {
                rotated = rotated.apply_1q(&h, q)?;
            }
        }
        let (bits, collapsed) = rotated.measure(positions, &mut self.rng)?;
        let accepted = bits
            .iter()
            .enumerate()
            .all(|(i, &b)| b == key.cell(i).bit());
        let mut back = collapsed;
        for (i, &q) in positions.iter().enumerate() {
            if key.cell(i).basis() == Basis::Hadamard {
                back = back.apply_1q(&h, q)?;
            }
        }
        if !accepted && self.policy == RejectionPolicy::Destroy {
            self.failures += 1;
        }
        Ok((accepted, back))
    }
}

fn check_note_width(n: usize) -> Result<()> {
    if n == 0 || n > crate::MAX_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "note width {n} outside 1..={}",
            crate::MAX_QUBITS
        )));
    }
    Ok(())
}
