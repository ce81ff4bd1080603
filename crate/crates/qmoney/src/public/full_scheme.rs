//! The assembled scheme: a hidden-subspace note plus a classical signature
//! binding the serial. Verification spends the signature check first, so
//! invalid paper never earns a quantum measurement or an oracle query.

use crate::error::Result;
use crate::public::hs::{hs_mint, hs_verify, HsKey, HsOracle};
use crate::rng::Stream;
use crate::sim::PureState;

/// Classical signature scheme over serial numbers. Implementations must be
/// deterministic: `verify` is re-signing and comparing.
pub trait Signer {
    fn sign(&self, serial: u64) -> u64;

    fn verify(&self, serial: u64, signature: u64) -> bool {
        self.sign(serial) == signature
    }
}

/// Keyed tag drawn from the lab generator. A placeholder with no
/// cryptographic standing: it only has to separate "knows the key" from
/// "does not" inside these experiments.
#[derive(Clone, Debug)]
pub struct StubSigner {
    key: u64,
}

impl StubSigner {
    pub fn new(key: u64) -> Self {
        Self { key }
    }
}

impl Signer for StubSigner {
    fn sign(&self, serial: u64) -> u64 {
        use rand::RngCore;
        Stream::from_seed(self.key).substream(serial).next_u64()
    }
}

#[derive(Clone, Debug)]
pub struct SignedNote {
    pub serial: u64,
    pub signature: u64,
    pub state: PureState,
}

pub fn full_scheme_mint(key: &HsKey, signer: &impl Signer) -> Result<SignedNote> {
    let note = hs_mint(key)?;
    Ok(SignedNote {
        serial: note.serial,
        signature: signer.sign(note.serial),
        state: note.state,
    })
}

/// Check the signature, then the subspace. A bad tag rejects immediately:
/// the state comes back untouched and the registry sees no queries. A good
/// tag forwards to the projective subspace check, whose accepting branch
/// leaves legitimate notes exactly intact.
pub fn full_scheme_verify(
    oracle: &HsOracle,
    signer: &impl Signer,
    note: &SignedNote,
    rng: &mut Stream,
) -> Result<(bool, PureState)> {
    if !signer.verify(note.serial, note.signature) {
        return Ok((false, note.state.clone()));
    }
    hs_verify(oracle, note.serial, &note.state, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::public::hs::hs_keygen;

    fn setup(seed: u64) -> (HsKey, HsOracle, StubSigner, SignedNote) {
        let mut rng = Stream::from_seed(seed);
        let key = hs_keygen(4, &mut rng).unwrap();
        let mut oracle = HsOracle::new();
        oracle.register(&key).unwrap();
        let signer = StubSigner::new(0xFEED_5EED);
        let note = full_scheme_mint(&key, &signer).unwrap();
        (key, oracle, signer, note)
    }

    #[test]
    fn signing_is_deterministic_and_keyed() {
        let signer = StubSigner::new(11);
        assert_eq!(signer.sign(42), signer.sign(42));
        assert_ne!(signer.sign(42), signer.sign(43));
        assert_ne!(signer.sign(42), StubSigner::new(12).sign(42));
        assert!(signer.verify(42, signer.sign(42)));
        assert!(!signer.verify(42, signer.sign(42) ^ 1));
    }

    #[test]
    fn genuine_note_accepts_and_survives() {
        let (key, oracle, signer, note) = setup(601);
        let mut rng = Stream::from_seed(602);
        let (ok, state) = full_scheme_verify(&oracle, &signer, &note, &mut rng).unwrap();
        assert!(ok);
        assert!(state.overlap_sq(&note.state).unwrap() > 1.0 - 1e-9);
        assert_eq!(oracle.queries(key.serial()).unwrap(), (1, 1));
    }

    #[test]
    fn bad_signature_rejects_without_any_quantum_work() {
        let (key, oracle, signer, note) = setup(603);
        let mut rng = Stream::from_seed(604);

        let flipped = SignedNote { signature: note.signature ^ 1, ..note.clone() };
        let (ok, state) = full_scheme_verify(&oracle, &signer, &flipped, &mut rng).unwrap();
        assert!(!ok);
        assert_eq!(state.amps(), note.state.amps(), "state must come back bitwise");
        assert_eq!(oracle.queries(key.serial()).unwrap(), (0, 0));

        // A reused signature under a different serial fails the same way,
        // even though that serial was never registered.
        let moved = SignedNote { serial: note.serial.wrapping_add(1), ..note.clone() };
        let (ok, _) = full_scheme_verify(&oracle, &signer, &moved, &mut rng).unwrap();
        assert!(!ok);
        assert_eq!(oracle.queries(key.serial()).unwrap(), (0, 0));
    }

    #[test]
    fn copied_signature_with_forged_state_passes_only_at_the_subspace_rate() {
        let (key, oracle, signer, note) = setup(605);
        let mut rng = Stream::from_seed(606);
        // The counterfeiter photocopies serial and tag (both classical) but
        // must guess the state; |0000> always lies in the subspace, so the
        // check accepts it with probability exactly 2^(-n/2).
        let mut accepted = 0u64;
        let trials = 200u64;
        for _ in 0..trials {
            let forged = SignedNote {
                serial: note.serial,
                signature: note.signature,
                state: PureState::basis(4, 0).unwrap(),
            };
            let (ok, _) = full_scheme_verify(&oracle, &signer, &forged, &mut rng).unwrap();
            if ok {
                accepted += 1;
            }
        }
        // p = 1/4: four-sigma window around 50 of 200.
        assert!((25..=75).contains(&accepted), "accepted {accepted} of {trials}");
        let spent = oracle.queries(key.serial()).unwrap();
        assert_eq!(spent.0, trials, "one membership query per attempt");
    }
}
