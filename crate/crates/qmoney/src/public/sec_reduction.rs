//! Forgery by reduction: anyone holding a working note cloner can mine the
//! public polynomials for the subspace itself. Preparing the uniform
//! superposition, evaluating every p, and postselecting the all-zero reading
//! collapses onto the subspace state; the hypothesized cloner then supplies
//! enough copies to read off a basis.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::f2::{row_reduce, SubspaceF2, VecF2};
use crate::linalg::{C, ZERO};
use crate::public::hs::{subspace_state, HsKey, MAX_HS_QUBITS};
use crate::public::polys::{common_zero_set, PolyInstance};
use crate::rng::Stream;
use crate::sim::PureState;

/// The counterfeiter the reduction borrows. Implementations receive one
/// state and must hand back the requested number of independent copies.
pub trait NoteCloner {
    fn clone_note(&self, state: &PureState, copies: usize) -> Result<Vec<PureState>>;
}

/// Reduction scaffolding, not an attack: the theorem assumes some working
/// counterfeiter exists, so the laboratory plays one that knows the key it
/// was built for and reproduces that note perfectly. It refuses anything
/// else.
pub struct PerfectCloner {
    target: PureState,
}

impl PerfectCloner {
    pub fn for_key(key: &HsKey) -> Result<Self> {
        Ok(PerfectCloner { target: subspace_state(key.subspace())? })
    }
}

impl NoteCloner for PerfectCloner {
    fn clone_note(&self, state: &PureState, copies: usize) -> Result<Vec<PureState>> {
        if state.n() != self.target.n() {
            return Err(Error::Dimension(format!(
                "cloner built for {} qubits, fed {}",
                self.target.n(),
                state.n()
            )));
        }
        if state.overlap_sq(&self.target)? < 1.0 - 1e-9 {
            return Err(Error::Precondition(
                "perfect cloner only reproduces the note it was built for".into(),
            ));
        }
        Ok(vec![self.target.clone(); copies])
    }
}

#[derive(Clone, Debug)]
pub struct ReductionOutcome {
    /// One recovered basis per successful postselection.
    pub bases: Vec<SubspaceF2>,
    pub successes: u64,
    pub trials: u64,
}

impl ReductionOutcome {
    pub fn success_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.successes as f64 / self.trials as f64
        }
    }
}

fn bits_to_index(bits: &[u8]) -> u64 {
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
}

/// Run the reduction `trials` times against a noiseless instance. Each
/// trial postselects the all-zero evaluation pattern (probability
/// |Z|/2^n where Z is the common zero set, i.e. 2^(-n/2) when the instance
/// is honest); a success collapses the register onto the uniform
/// superposition over Z, calls the cloner for 2n copies, measures each copy,
/// and row-reduces the readings into a basis.
pub fn sec_reduction_forge(
    inst: &PolyInstance,
    cloner: &dyn NoteCloner,
    trials: u64,
    rng: &mut Stream,
) -> Result<ReductionOutcome> {
    let n = inst.n;
    if n == 0 || n > MAX_HS_QUBITS {
        return Err(Error::Capacity { requested: n, max: MAX_HS_QUBITS });
    }
    let zeros = common_zero_set(n, &inst.ps)?;
    if zeros.is_empty() {
        return Err(Error::InvalidState(
            "the p's share no zero; the instance cannot be noiseless".into(),
        ));
    }
    let p_post = zeros.len() as f64 / (1u64 << n) as f64;
    // The state the all-zero reading collapses onto.
    let amp = C::new(1.0 / (zeros.len() as f64).sqrt(), 0.0);
    let mut amps = Array1::from_elem(1usize << n, ZERO);
    for &x in &zeros {
        amps[x as usize] = amp;
    }
    let collapsed = PureState::new(n, amps)?;
    let copies = 2 * n;
    let all: Vec<usize> = (0..n).collect();

    let mut bases = Vec::new();
    let mut successes = 0u64;
    for _ in 0..trials {
        if !rng.chance(p_post) {
            continue;
        }
        successes += 1;
        let notes = cloner.clone_note(&collapsed, copies)?;
        let mut draws = Vec::with_capacity(copies);
        for note in &notes {
            let (bits, _) = note.measure(&all, rng)?;
            draws.push(VecF2::from_index(n, bits_to_index(&bits)));
        }
        bases.push(row_reduce(n, &draws)?);
    }
    Ok(ReductionOutcome { bases, successes, trials })
}
