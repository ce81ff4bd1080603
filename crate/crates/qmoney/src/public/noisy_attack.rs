//! Recovering the subspace from one legitimate note and a noisy instance.
//!
//! The attacker first votes: a basis index counts as a member candidate when
//! a strict majority of the p's vanish on it (dually for the q's). The vote
//! sets are supersets of the subspace and its dual, so searching them for a
//! half-dimension subspace whose dual also passed the vote recovers the
//! hidden subspace outright whenever the hit is unique; the true subspace
//! always qualifies, so a unique hit cannot be wrong. With the reflection
//! about that state in hand, every polynomial is measured on the note 25
//! times, restoring the note after each reading; a polynomial whose readings
//! are all zero is genuine, anything mixed is a decoy. The genuine p's then
//! pin down the subspace by brute force, cross-checked against the q's.

use ndarray::Array2;

use crate::algorithms::grover::measure_and_restore;
use crate::error::{Error, Result};
use crate::f2::{row_reduce, SubspaceF2, VecF2};
use crate::linalg::{C, ZERO};
use crate::money::Banknote;
use crate::public::hs::subspace_state;
use crate::public::polys::{common_zero_set, Poly3F2, PolyInstance};
use crate::rng::Stream;
use crate::sim::{PureState, Unitary};

/// Measurement repetitions per polynomial. A decoy vanishes on at most
/// three quarters of the subspace, so it survives all rounds with
/// probability at most 0.75^25, under 1e-3.
pub const CLASSIFY_ROUNDS: usize = 25;

/// Ceiling set by the dense reflection matrices the restoration rounds
/// carry; past ten qubits they outgrow any reasonable memory budget.
pub const MAX_ATTACK_QUBITS: usize = 10;

#[derive(Clone, Debug)]
pub struct NoisyAttackOutcome {
    /// Per-entry verdicts: true = classified genuine.
    pub genuine_ps: Vec<bool>,
    pub genuine_qs: Vec<bool>,
    /// Reduced basis of the recovered subspace.
    pub basis: SubspaceF2,
    /// The note handed back after all measurement rounds.
    pub state: PureState,
    /// Smallest fidelity against the original note seen after any round.
    pub min_fidelity: f64,
    /// Restoration steps spent across all rounds; zero on a noiseless
    /// instance, where every measurement commutes with the note.
    pub restore_iterations: u64,
}

/// Per-index count of polynomials vanishing there.
fn vote_counts(n: usize, polys: &[Poly3F2]) -> Vec<u32> {
    (0..1u64 << n)
        .map(|x| polys.iter().filter(|p| p.evaluate_index(x) == 0).count() as u32)
        .collect()
}

/// Strict majority: more than half the polynomials vanish.
fn majority(counts: &[u32], total: usize) -> Vec<bool> {
    counts.iter().map(|&c| 2 * c as usize > total).collect()
}

/// Scan-step ceiling for the candidate walk; generous for any vote set this
/// attack can see within MAX_ATTACK_QUBITS.
const SEARCH_BUDGET: usize = 200_000_000;

/// Depth-first walk over half-dimension subspaces lying entirely inside the
/// p vote set, keeping those whose dual lies inside the q vote set. Each
/// subspace is visited once: generators ascend and each must be the smallest
/// element of its coset, which pins the generating sequence to taking the
/// minimum remaining point.
fn candidate_walk(
    n: usize,
    p_hat: &[bool],
    q_hat: &[bool],
    span: &mut Vec<u64>,
    last_gen: u64,
    budget: &mut usize,
    found: &mut Vec<SubspaceF2>,
) -> Result<()> {
    if span.len() == 1usize << (n / 2) {
        let gens: Vec<VecF2> = span.iter().map(|&x| VecF2::from_index(n, x)).collect();
        let sub = row_reduce(n, &gens)?;
        let dual_ok = sub
            .dual()
            .enumerate()
            .iter()
            .all(|v| q_hat[v.to_index() as usize]);
        if dual_ok {
            found.push(sub);
        }
        return Ok(());
    }
    for g in (last_gen + 1)..(1u64 << n) {
        if *budget == 0 {
            return Err(Error::NonConvergence(
                "candidate subspace search exhausted its budget".into(),
            ));
        }
        *budget -= 1;
        if !p_hat[g as usize] || span.contains(&g) {
            continue;
        }
        // Closure inside the vote set, and g smallest in its new coset.
        if span.iter().any(|&s| {
            let t = s ^ g;
            t < g || !p_hat[t as usize]
        }) {
            continue;
        }
        let old = span.len();
        for i in 0..old {
            let t = span[i] ^ g;
            span.push(t);
        }
        candidate_walk(n, p_hat, q_hat, span, g, budget, found)?;
        span.truncate(old);
    }
    Ok(())
}

/// Total vote mass a candidate carries: vanishing counts summed over its
/// points on the p side and its dual's points on the q side.
fn vote_mass(sub: &SubspaceF2, p_cnt: &[u32], q_cnt: &[u32]) -> u64 {
    let side = |s: &SubspaceF2, cnt: &[u32]| -> u64 {
        s.enumerate().iter().map(|v| cnt[v.to_index() as usize] as u64).sum()
    };
    side(sub, p_cnt) + side(&sub.dual(), q_cnt)
}

/// The attacker's stand-in for S: a half-dimension subspace contained in
/// the p vote whose dual is contained in the q vote. The true subspace
/// always qualifies (a strict majority of every instance family is
/// genuine), so a unique hit is exact. Rival candidates arise when a few
/// off-subspace points sneak past the vote; the true subspace outweighs
/// them in total vote mass, since its points are vouched for by every
/// genuine polynomial while interlopers barely clear the bar. A mass tie is
/// reported as ambiguous.
fn subspace_estimate(
    n: usize,
    p_cnt: &[u32],
    q_cnt: &[u32],
    m_p: usize,
    m_q: usize,
) -> Result<SubspaceF2> {
    let p_hat = majority(p_cnt, m_p);
    let q_hat = majority(q_cnt, m_q);
    if !p_hat[0] || !q_hat[0] {
        return Err(Error::InvalidState(
            "the zero point failed the membership vote; too many decoys".into(),
        ));
    }
    let mut found = Vec::new();
    let mut budget = SEARCH_BUDGET;
    let mut span = vec![0u64];
    candidate_walk(n, &p_hat, &q_hat, &mut span, 0, &mut budget, &mut found)?;
    if found.is_empty() {
        return Err(Error::InvalidState(
            "no subspace survives the membership vote; too many decoys".into(),
        ));
    }
    let masses: Vec<u64> = found.iter().map(|s| vote_mass(s, p_cnt, q_cnt)).collect();
    let best = *masses.iter().max().expect("nonempty");
    if masses.iter().filter(|&&s| s == best).count() > 1 {
        return Err(Error::InvalidState(format!(
            "ambiguous subspace estimate: {} candidates tie on vote mass",
            found.len()
        )));
    }
    let at = masses.iter().position(|&s| s == best).expect("max exists");
    Ok(found.swap_remove(at))
}

fn hadamard_all(state: &PureState) -> Result<PureState> {
    let h = Unitary::hadamard();
    let mut cur = state.clone();
    for q in 0..state.n() {
        cur = cur.apply_1q(&h, q)?;
    }
    Ok(cur)
}

fn zero_set_projector(n: usize, poly: &Poly3F2) -> Array2<C> {
    let dim = 1usize << n;
    let mut proj = Array2::from_elem((dim, dim), ZERO);
    for x in 0..dim {
        if poly.evaluate_index(x as u64) == 0 {
            proj[(x, x)] = C::new(1.0, 0.0);
        }
    }
    proj
}

struct RoundLog {
    min_fidelity: f64,
    restore_iterations: u64,
}

/// Measure each polynomial CLASSIFY_ROUNDS times, restoring the note after
/// every reading. `dual_frame` wraps each round in Hadamards so the q's are
/// read where they vanish.
#[allow(clippy::too_many_arguments)]
fn classify_side(
    polys: &[Poly3F2],
    cur: &mut PureState,
    original: &PureState,
    reflect: &Unitary,
    dual_frame: bool,
    log: &mut RoundLog,
    rng: &mut Stream,
) -> Result<Vec<bool>> {
    let n = original.n();
    let mut verdicts = Vec::with_capacity(polys.len());
    for poly in polys {
        let proj = zero_set_projector(n, poly);
        let mut all_zero = true;
        for _ in 0..CLASSIFY_ROUNDS {
            let staged = if dual_frame { hadamard_all(cur)? } else { cur.clone() };
            let round = measure_and_restore(&staged, &proj, reflect, rng)?;
            *cur = if dual_frame { hadamard_all(&round.state)? } else { round.state };
            log.restore_iterations += round.iterations as u64;
            let fid = cur.overlap_sq(original)?;
            log.min_fidelity = log.min_fidelity.min(fid);
            if fid < 1.0 - 1e-4 {
                return Err(Error::InvalidState(format!(
                    "note fidelity fell to {fid} during classification"
                )));
            }
            if round.outcome != 0 {
                all_zero = false;
            }
        }
        verdicts.push(all_zero);
    }
    Ok(verdicts)
}

fn kept<'a>(polys: &'a [Poly3F2], verdicts: &[bool]) -> Vec<Poly3F2> {
    polys
        .iter()
        .zip(verdicts)
        .filter(|(_, &g)| g)
        .map(|(p, _)| p.clone())
        .collect()
}

/// Classify every instance entry using one legitimate note, then solve the
/// entries held genuine for the subspace. The note comes back intact: each
/// round's restoration is checked against the original to 1e-4.
pub fn noisy_poly_attack(
    inst: &PolyInstance,
    note: &Banknote,
    rng: &mut Stream,
) -> Result<NoisyAttackOutcome> {
    let n = inst.n;
    if n == 0 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "instance width {n} is not a positive even number"
        )));
    }
    if n > MAX_ATTACK_QUBITS {
        return Err(Error::Capacity { requested: n, max: MAX_ATTACK_QUBITS });
    }
    if note.state.n() != n {
        return Err(Error::Dimension(format!(
            "note has {} qubits, instance expects {n}",
            note.state.n()
        )));
    }
    if inst.ps.is_empty() || inst.qs.is_empty() {
        return Err(Error::Precondition("instance has an empty polynomial list".into()));
    }

    let p_cnt = vote_counts(n, &inst.ps);
    let q_cnt = vote_counts(n, &inst.qs);
    let est_sub = subspace_estimate(n, &p_cnt, &q_cnt, inst.ps.len(), inst.qs.len())?;
    let reflect_s = Unitary::reflection_about(subspace_state(&est_sub)?.amps())?;
    let reflect_dual = Unitary::reflection_about(subspace_state(&est_sub.dual())?.amps())?;

    let original = note.state.clone();
    let mut cur = note.state.clone();
    let mut log = RoundLog { min_fidelity: 1.0, restore_iterations: 0 };
    let genuine_ps =
        classify_side(&inst.ps, &mut cur, &original, &reflect_s, false, &mut log, rng)?;
    let genuine_qs =
        classify_side(&inst.qs, &mut cur, &original, &reflect_dual, true, &mut log, rng)?;

    let kept_ps = kept(&inst.ps, &genuine_ps);
    if kept_ps.is_empty() {
        return Err(Error::InvalidState("no p classified genuine".into()));
    }
    let zeros = common_zero_set(n, &kept_ps)?;
    let half = 1usize << (n / 2);
    if zeros.len() != half {
        return Err(Error::InvalidState(format!(
            "ambiguous classification: {} common zeros instead of {half}",
            zeros.len()
        )));
    }
    let points: Vec<VecF2> = zeros.iter().map(|&x| VecF2::from_index(n, x)).collect();
    let basis = row_reduce(n, &points)?;
    if basis.dim() != n / 2 {
        return Err(Error::InvalidState(
            "ambiguous classification: common zeros do not form a half-dimension subspace"
                .into(),
        ));
    }
    // Cross-check: the genuine q's must carve out exactly the dual.
    let kept_qs = kept(&inst.qs, &genuine_qs);
    if kept_qs.is_empty() {
        return Err(Error::InvalidState("no q classified genuine".into()));
    }
    let dual_zeros = common_zero_set(n, &kept_qs)?;
    let mut dual_members: Vec<u64> =
        basis.dual().enumerate().iter().map(|v| v.to_index()).collect();
    dual_members.sort_unstable();
    if dual_zeros != dual_members {
        return Err(Error::InvalidState(
            "ambiguous classification: p and q verdicts disagree about the subspace".into(),
        ));
    }

    Ok(NoisyAttackOutcome {
        genuine_ps,
        genuine_qs,
        basis,
        state: cur,
        min_fidelity: log.min_fidelity,
        restore_iterations: log.restore_iterations,
    })
}
