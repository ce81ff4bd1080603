//! Hidden-subspace notes: a serial number names a secret subspace S of
//! F_2^n, the note is the uniform superposition over S, and verification is
//! a membership check in both the computational and the Hadamard frame.

use std::collections::HashMap;

use ndarray::Array1;
use rand::RngCore;

use crate::error::{Error, Result};
use crate::f2::{random_subspace, SubspaceF2, VecF2};
use crate::linalg::{C, ZERO};
use crate::money::Banknote;
use crate::oracle::BooleanOracle;
use crate::rng::Stream;
use crate::sim::{PureState, Unitary};

/// Register width cap for this scheme. Verification tensors on an ancilla,
/// and key generation tabulates two 2^n oracles, so the cap sits below the
/// simulator-wide limit.
pub const MAX_HS_QUBITS: usize = 16;

/// Uniform superposition over the members of a subspace, amplitude
/// 2^(-dim/2) on each member and zero elsewhere.
pub fn subspace_state(sub: &SubspaceF2) -> Result<PureState> {
    let n = sub.n();
    if n == 0 || n > crate::MAX_QUBITS {
        return Err(Error::Capacity { requested: n, max: crate::MAX_QUBITS });
    }
    let amp = C::new(1.0 / ((1u64 << sub.dim()) as f64).sqrt(), 0.0);
    let mut amps = Array1::from_elem(1usize << n, ZERO);
    for v in sub.enumerate() {
        amps[v.to_index() as usize] = amp;
    }
    PureState::new(n, amps)
}

/// Secret side of one note: the subspace, its dual, and the serial the
/// oracle registry files them under.
#[derive(Clone, Debug)]
pub struct HsKey {
    n: usize,
    subspace: SubspaceF2,
    dual: SubspaceF2,
    serial: u64,
}

impl HsKey {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn subspace(&self) -> &SubspaceF2 {
        &self.subspace
    }

    pub fn dual(&self) -> &SubspaceF2 {
        &self.dual
    }

    pub fn serial(&self) -> u64 {
        self.serial
    }
}

/// Draw a fresh key: a uniform dim-n/2 subspace of F_2^n plus its dual.
pub fn hs_keygen(n: usize, rng: &mut Stream) -> Result<HsKey> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "hidden-subspace keys need a positive even width, got {n}"
        )));
    }
    if n > MAX_HS_QUBITS {
        return Err(Error::Capacity { requested: n, max: MAX_HS_QUBITS });
    }
    let subspace = random_subspace(n, n / 2, rng)?;
    let dual = subspace.dual();
    let serial = rng.next_u64();
    Ok(HsKey { n, subspace, dual, serial })
}

/// The pair of membership oracles published for one serial.
pub struct HsEntry {
    n: usize,
    chi_s: BooleanOracle,
    chi_perp: BooleanOracle,
}

impl HsEntry {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Membership in S. Every use, classical or in superposition, is
    /// counted by the oracle itself.
    pub fn chi_s(&self) -> &BooleanOracle {
        &self.chi_s
    }

    /// Membership in the dual subspace.
    pub fn chi_perp(&self) -> &BooleanOracle {
        &self.chi_perp
    }
}

/// Public registry mapping serials to membership-oracle pairs. Holding the
/// registry grants query access, never the subspace itself.
#[derive(Default)]
pub struct HsOracle {
    entries: HashMap<u64, HsEntry>,
}

impl HsOracle {
    pub fn new() -> Self {
        Self::default()
    }

    /// Tabulate and file the two membership functions for a key.
    pub fn register(&mut self, key: &HsKey) -> Result<()> {
        if self.entries.contains_key(&key.serial) {
            return Err(Error::InvalidArgument(format!(
                "serial {:#018x} is already registered",
                key.serial
            )));
        }
        let n = key.n;
        let sub = key.subspace.clone();
        let dual = key.dual.clone();
        let chi_s = BooleanOracle::from_fn(n, 1, |x| {
            usize::from(sub.member(&VecF2::from_index(n, x as u64)).expect("width fixed"))
        })?;
        let chi_perp = BooleanOracle::from_fn(n, 1, |x| {
            usize::from(dual.member(&VecF2::from_index(n, x as u64)).expect("width fixed"))
        })?;
        self.entries.insert(key.serial, HsEntry { n, chi_s, chi_perp });
        Ok(())
    }

    pub fn entry(&self, serial: u64) -> Result<&HsEntry> {
        self.entries.get(&serial).ok_or(Error::UnknownSerial(serial))
    }

    /// (chi_S, chi_Sperp) query totals for one serial.
    pub fn queries(&self, serial: u64) -> Result<(u64, u64)> {
        let e = self.entry(serial)?;
        Ok((e.chi_s.queries(), e.chi_perp.queries()))
    }
}

/// A fresh note for the key: (serial, |S>).
pub fn hs_mint(key: &HsKey) -> Result<Banknote> {
    Ok(Banknote { serial: key.serial, state: subspace_state(&key.subspace)? })
}

/// Strip a measured ancilla sitting at the last position. The caller
/// guarantees the qubit is in the basis state `bit`.
fn drop_last_qubit(joint: &PureState, bit: u8) -> PureState {
    let n = joint.n() - 1;
    let mut amps = Array1::from_elem(1usize << n, ZERO);
    for (i, a) in amps.iter_mut().enumerate() {
        *a = joint.amp((i << 1) | bit as usize);
    }
    PureState::from_normalized(n, amps)
}

/// Projective membership measurement: write chi into a fresh ancilla, read
/// it, discard it. One oracle query; the system collapses to the inside or
/// outside branch.
fn membership_check(
    chi: &BooleanOracle,
    state: &PureState,
    rng: &mut Stream,
) -> Result<(bool, PureState)> {
    let n = state.n();
    let inputs: Vec<usize> = (0..n).collect();
    let joint = state.tensor(&PureState::zero(1)?)?;
    let joint = chi.apply_xor(&joint, &inputs, &[n])?;
    let (bits, joint) = joint.measure(&[n], rng)?;
    Ok((bits[0] == 1, drop_last_qubit(&joint, bits[0])))
}

/// Same circuit with the measurement left unsampled: returns the inside
/// branch's probability and the renormalized inside branch.
fn membership_branch(chi: &BooleanOracle, state: &PureState) -> Result<(f64, Option<PureState>)> {
    let n = state.n();
    let inputs: Vec<usize> = (0..n).collect();
    let joint = state.tensor(&PureState::zero(1)?)?;
    let joint = chi.apply_xor(&joint, &inputs, &[n])?;
    let p = joint.probability(&[n], &[1])?;
    if p < 1e-300 {
        return Ok((0.0, None));
    }
    let scale = C::new(p.sqrt(), 0.0);
    let mut amps = Array1::from_elem(1usize << n, ZERO);
    for (i, a) in amps.iter_mut().enumerate() {
        *a = joint.amp((i << 1) | 1) / scale;
    }
    Ok((p, Some(PureState::from_normalized(n, amps))))
}

fn hadamard_all(state: &PureState) -> Result<PureState> {
    let h = Unitary::hadamard();
    let mut cur = state.clone();
    for q in 0..state.n() {
        cur = cur.apply_1q(&h, q)?;
    }
    Ok(cur)
}

/// The published check: membership in S, Hadamard everything, membership in
/// the dual, Hadamard back. Accepts iff both checks pass; the accepting
/// branch is exactly the projector |S><S|, so a legitimate note survives
/// untouched. Costs one chi_S and one chi_Sperp query regardless of the
/// outcomes.
pub fn hs_verify(
    oracle: &HsOracle,
    serial: u64,
    state: &PureState,
    rng: &mut Stream,
) -> Result<(bool, PureState)> {
    let entry = oracle.entry(serial)?;
    if state.n() != entry.n {
        return Err(Error::Dimension(format!(
            "note has {} qubits, serial {:#018x} expects {}",
            state.n(),
            serial,
            entry.n
        )));
    }
    let (in_s, cur) = membership_check(&entry.chi_s, state, rng)?;
    let cur = hadamard_all(&cur)?;
    let (in_perp, cur) = membership_check(&entry.chi_perp, &cur, rng)?;
    let cur = hadamard_all(&cur)?;
    Ok((in_s && in_perp, cur))
}

/// Exact acceptance probability of `hs_verify` on the given input: the
/// product of the two branch probabilities along the accepting path. Equals
/// |<S|input>|^2. Short-circuits (skipping the second oracle) when the
/// first check already annihilates the state.
pub fn hs_accept_probability(oracle: &HsOracle, serial: u64, state: &PureState) -> Result<f64> {
    let entry = oracle.entry(serial)?;
    if state.n() != entry.n {
        return Err(Error::Dimension(format!(
            "note has {} qubits, serial {:#018x} expects {}",
            state.n(),
            serial,
            entry.n
        )));
    }
    let (p1, branch) = membership_branch(&entry.chi_s, state)?;
    let Some(cur) = branch else {
        return Ok(0.0);
    };
    let cur = hadamard_all(&cur)?;
    let (p2, _) = membership_branch(&entry.chi_perp, &cur)?;
    Ok(p1 * p2)
}
