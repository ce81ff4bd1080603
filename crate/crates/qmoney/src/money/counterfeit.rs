//! Turning one note into two submissions: the measure-everything baseline
//! and the per-qubit optimal cloning channel.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::C;
use crate::money::bank::WiesnerBank;
use crate::money::clone_opt::CloneChannel;
use crate::money::note::Banknote;
use crate::rng::Stream;
use crate::sim::PureState;

/// Two candidate copies sharing one serial. Copy one lives on qubits
/// 0..n-1 of `joint`, copy two on n..2n-1; the copies may be entangled.
#[derive(Clone, Debug)]
pub struct CounterfeitPair {
    pub serial: u64,
    pub joint: PureState,
}

impl CounterfeitPair {
    pub fn n(&self) -> usize {
        self.joint.n() / 2
    }
}

/// Measure every qubit in the computational basis and print two notes
/// carrying the observed bit string. Each computational cell survives both
/// verifications, each Hadamard cell survives with probability 1/4, so a
/// random note passes both checks with probability (5/8)^n.
pub fn naive_counterfeit(note: &Banknote, rng: &mut Stream) -> Result<CounterfeitPair> {
    let n = note.n();
    let positions: Vec<usize> = (0..n).collect();
    let (bits, _) = note.state.measure(&positions, rng)?;
    let mut index = 0usize;
    for &b in &bits {
        index = (index << 1) | b as usize;
    }
    let copy = PureState::basis(n, index)?;
    let joint = copy.tensor(&copy)?;
    Ok(CounterfeitPair { serial: note.serial, joint })
}

/// Apply a one-in, two-out Kraus family to qubit `q`, sampling the branch.
/// The first output qubit stays at position `q`; the second is appended at
/// the end of the register. Kraus operators are 4x2 with output index
/// 2*first + second.
pub fn apply_kraus_1to2(
    state: &PureState,
    q: usize,
    kraus: &[Array2<C>],
    rng: &mut Stream,
) -> Result<PureState> {
    let m = state.n();
    if q >= m {
        return Err(Error::Dimension(format!("qubit {q} out of range for {m}")));
    }
    if m + 1 > crate::MAX_QUBITS {
        return Err(Error::Capacity { requested: m + 1, max: crate::MAX_QUBITS });
    }
    for k in kraus {
        if k.nrows() != 4 || k.ncols() != 2 {
            return Err(Error::Dimension("expected 4x2 Kraus operators".into()));
        }
    }
    let dim = state.dim();
    let shift = m - 1 - q; // bit position of qubit q in the old index
    let mut branches: Vec<(f64, ndarray::Array1<C>)> = Vec::with_capacity(kraus.len());
    for k in kraus {
        let mut amps = ndarray::Array1::from_elem(2 * dim, crate::linalg::ZERO);
        for x in 0..dim {
            let a = state.amp(x);
            if a == crate::linalg::ZERO {
                continue;
            }
            let i = (x >> shift) & 1;
            let cleared = x & !(1usize << shift);
            for out in 0..4usize {
                let w = k[(out, i)];
                if w == crate::linalg::ZERO {
                    continue;
                }
                let first = out >> 1;
                let second = out & 1;
                // Old bits shift left one slot when the new qubit lands at
                // the least significant position.
                let y = ((cleared | (first << shift)) << 1) | second;
                amps[y] += w * a;
            }
        }
        let weight: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        branches.push((weight, amps));
    }
    let total: f64 = branches.iter().map(|(w, _)| *w).sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidState(format!(
            "Kraus family is not trace preserving on this state: total weight {total}"
        )));
    }
    let mut draw = rng.uniform() * total;
    let mut pick = branches.len() - 1;
    for (idx, (w, _)) in branches.iter().enumerate() {
        if draw < *w {
            pick = idx;
            break;
        }
        draw -= *w;
    }
    let (w, mut amps) = branches.swap_remove(pick);
    if w <= 0.0 {
        return Err(Error::InvalidState("sampled a zero-weight Kraus branch".into()));
    }
    let scale = C::new(1.0 / w.sqrt(), 0.0);
    amps.mapv_inplace(|z| z * scale);
    PureState::new(m + 1, amps)
}

/// Feed each note qubit through the cloning channel in order. Second
/// outputs land in order at the tail, so the result is laid out exactly as
/// [`CounterfeitPair`] expects.
pub fn channel_counterfeit(
    note: &Banknote,
    channel: &CloneChannel,
    rng: &mut Stream,
) -> Result<CounterfeitPair> {
    let n = note.n();
    let mut joint = note.state.clone();
    for q in 0..n {
        joint = apply_kraus_1to2(&joint, q, channel.channel().kraus(), rng)?;
    }
    Ok(CounterfeitPair { serial: note.serial, joint })
}

/// Submit both halves of a pair, first copy then second, chaining the
/// post-measurement register between the two checks.
pub fn verify_pair(bank: &mut WiesnerBank, pair: CounterfeitPair) -> Result<(bool, bool)> {
    let n = bank.n();
    if pair.joint.n() != 2 * n {
        return Err(Error::Dimension(format!(
            "pair register has {} qubits, bank expects {}",
            pair.joint.n(),
            2 * n
        )));
    }
    let first: Vec<usize> = (0..n).collect();
    let second: Vec<usize> = (n..2 * n).collect();
    let (ok1, after) = bank.verify_joint(pair.serial, pair.joint, &first)?;
    let (ok2, _) = bank.verify_joint(pair.serial, after, &second)?;
    Ok((ok1, ok2))
}
