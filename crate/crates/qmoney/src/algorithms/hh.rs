//! Branch decoding: when does a party holding only an index register turn a
//! branch label into entanglement?
//!
//! The shared state couples an index x, a flag qubit, a branch qubit B, and
//! a herald register carrying f(x) on one branch and g(x) on the other:
//!
//!   sum_x |x>|0>_flag |0>_B |f(x)>  +  sum_x |x>|1>_flag |1>_B |g(x)>
//!
//! If f and g are permutations of the same range, relabeling the index on the
//! flagged branch (x -> f^{-1}(g(x))) makes the two branches identical
//! outside (flag, B); those two qubits are then left in a perfect Bell pair,
//! by an operation touching only the index register. If the ranges are
//! disjoint, the heralds keep the branches perfectly distinguishable: the
//! reduced state on (index, flag, B) is block-diagonal in B, stays so under
//! every local unitary, and the Bell projection is capped at exactly 1/2.

use crate::error::{Error, Result};
use crate::linalg::{self, C, ZERO};
use crate::rng::Stream;
use crate::sim::{DensityMatrix, PureState, Unitary};

/// Qubit layout for an index width n: index = 0..n-1, flag = n, branch
/// qubit B = n+1, herald register = n+2..2n+1.
pub fn herald_layout(n: usize) -> (Vec<usize>, usize, usize, Vec<usize>) {
    let index: Vec<usize> = (0..n).collect();
    let herald: Vec<usize> = (n + 2..2 * n + 2).collect();
    (index, n, n + 1, herald)
}

fn check_tables(n: usize, f: &[usize], g: &[usize]) -> Result<()> {
    if n == 0 || 2 * n + 2 > crate::MAX_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "index width {n} needs {} qubits, outside capacity",
            2 * n + 2
        )));
    }
    let size = 1usize << n;
    for (name, t) in [("f", f), ("g", g)] {
        if t.len() != size {
            return Err(Error::Dimension(format!("{name} must have {size} entries")));
        }
        if t.iter().any(|&y| y >= size) {
            return Err(Error::InvalidArgument(format!("{name} has out-of-range values")));
        }
    }
    Ok(())
}

/// The two-branch herald state on 2n+2 qubits.
pub fn herald_state(n: usize, f: &[usize], g: &[usize]) -> Result<PureState> {
    check_tables(n, f, g)?;
    let size = 1usize << n;
    let total = 2 * n + 2;
    let amp = C::new(1.0 / (2.0 * size as f64).sqrt(), 0.0);
    let mut amps = ndarray::Array1::from_elem(1usize << total, ZERO);
    for x in 0..size {
        // Index bits on top, then flag, then B, then the herald register.
        let branch0 = (x << (n + 2)) | f[x];
        let branch1 = (x << (n + 2)) | (1 << (n + 1)) | (1 << n) | g[x];
        amps[branch0] += amp;
        amps[branch1] += amp;
    }
    PureState::new(total, amps)
}

/// The relabeling unitary on (index, flag): fixes flag = 0 states and sends
/// |x, 1> to |f^{-1}(g(x)), 1>. Requires f and g to be permutations.
pub fn decode_permutation(n: usize, f: &[usize], g: &[usize]) -> Result<Unitary> {
    check_tables(n, f, g)?;
    let size = 1usize << n;
    let mut f_inv = vec![usize::MAX; size];
    for (x, &y) in f.iter().enumerate() {
        if f_inv[y] != usize::MAX {
            return Err(Error::InvalidArgument("f is not injective".into()));
        }
        f_inv[y] = x;
    }
    let mut perm = vec![0usize; 2 * size];
    for x in 0..size {
        perm[x << 1] = x << 1;
        let y = f_inv[g[x]];
        if y == usize::MAX {
            return Err(Error::InvalidArgument("g leaves the range of f".into()));
        }
        perm[(x << 1) | 1] = (y << 1) | 1;
    }
    Unitary::from_permutation(&perm)
}

/// <Bell| rho_(flag,B) |Bell> for the two listed qubits.
pub fn bell_projection(state: &PureState, flag_q: usize, b_q: usize) -> Result<f64> {
    let rho = DensityMatrix::from_pure_keeping(state, &[flag_q, b_q])?;
    let m = rho.mat();
    Ok(0.5 * (m[(0, 0)] + m[(0, 3)] + m[(3, 0)] + m[(3, 3)]).re)
}

/// True when the reduced state on (index, flag, B) has no coherence between
/// the two B values; that property survives any unitary on (index, flag)
/// and caps the Bell projection at 1/2.
pub fn branch_blocks_are_disjoint(state: &PureState, n: usize) -> Result<bool> {
    let keep: Vec<usize> = (0..n + 2).collect();
    let rho = DensityMatrix::from_pure_keeping(state, &keep)?;
    let m = rho.mat();
    let dim = m.nrows();
    for r in 0..dim {
        for c in 0..dim {
            // B is the least significant kept qubit.
            if (r & 1) != (c & 1) && m[(r, c)].norm() > 1e-12 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug)]
pub struct DecodeDemo {
    pub n: usize,
    /// Bell projection of the shared-range state before any decoding.
    pub shared_before: f64,
    /// Same state after the index relabeling; 1 up to rounding.
    pub shared_after: f64,
    /// Whether the block certificate (correctly) fails on the shared state.
    pub shared_certificate: bool,
    /// Best Bell projection found over random index-register unitaries on
    /// the disjoint-range state.
    pub disjoint_best: f64,
    pub disjoint_trials: usize,
    /// Whether the disjoint state passes the block certificate.
    pub disjoint_certificate: bool,
    /// The certified ceiling when the certificate holds.
    pub disjoint_cap: f64,
}

/// End-to-end comparison on index width `n`: a shared-range pair (two random
/// permutations) that decodes to a perfect Bell pair, against a
/// disjoint-range pair where `trials` random unitaries on (index, flag) all
/// stay at or below the certified cap of 1/2.
pub fn decode_demo(n: usize, trials: usize, rng: &mut Stream) -> Result<DecodeDemo> {
    let size = 1usize << n;
    let (_, flag_q, b_q, _) = herald_layout(n);
    let r_targets: Vec<usize> = (0..=n).collect();

    let f = rng.permutation(size);
    let g = rng.permutation(size);
    let shared = herald_state(n, &f, &g)?;
    let shared_before = bell_projection(&shared, flag_q, b_q)?;
    let decode = decode_permutation(n, &f, &g)?;
    let decoded = shared.apply(&decode, &r_targets)?;
    let shared_after = bell_projection(&decoded, flag_q, b_q)?;
    let shared_certificate = branch_blocks_are_disjoint(&shared, n)?;

    // Heralds in the lower half for one branch, upper half for the other.
    let f2: Vec<usize> = (0..size).map(|x| x >> 1).collect();
    let g2: Vec<usize> = (0..size).map(|x| (x >> 1) | (size >> 1)).collect();
    let disjoint = herald_state(n, &f2, &g2)?;
    let disjoint_certificate = branch_blocks_are_disjoint(&disjoint, n)?;
    let mut disjoint_best: f64 = bell_projection(&disjoint, flag_q, b_q)?;
    for _ in 0..trials {
        let u = Unitary::new(linalg::random_unitary(2 * size, rng))?;
        let tried = disjoint.apply(&u, &r_targets)?;
        disjoint_best = disjoint_best.max(bell_projection(&tried, flag_q, b_q)?);
    }
    Ok(DecodeDemo {
        n,
        shared_before,
        shared_after,
        shared_certificate,
        disjoint_best,
        disjoint_trials: trials,
        disjoint_certificate,
        disjoint_cap: 0.5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_range_decodes_to_a_perfect_bell_pair() {
        let mut rng = Stream::from_seed(501);
        let demo = decode_demo(3, 50, &mut rng).unwrap();
        assert!((demo.shared_after - 1.0).abs() < 1e-10, "after = {}", demo.shared_after);
        assert!(demo.shared_before < 0.95, "before = {}", demo.shared_before);
        assert!(!demo.shared_certificate);
    }

    #[test]
    fn disjoint_ranges_never_beat_the_cap() {
        let mut rng = Stream::from_seed(503);
        let demo = decode_demo(3, 300, &mut rng).unwrap();
        assert!(demo.disjoint_certificate);
        assert!(
            demo.disjoint_best <= 0.5 + 1e-9,
            "found {} above the cap",
            demo.disjoint_best
        );
    }

    #[test]
    fn certificate_survives_local_unitaries() {
        let mut rng = Stream::from_seed(509);
        let n = 2;
        let size = 1usize << n;
        let f: Vec<usize> = (0..size).map(|x| x >> 1).collect();
        let g: Vec<usize> = (0..size).map(|x| (x >> 1) | (size >> 1)).collect();
        let state = herald_state(n, &f, &g).unwrap();
        let targets: Vec<usize> = (0..=n).collect();
        for _ in 0..20 {
            let u = Unitary::new(linalg::random_unitary(2 * size, &mut rng)).unwrap();
            let moved = state.apply(&u, &targets).unwrap();
            assert!(branch_blocks_are_disjoint(&moved, n).unwrap());
        }
    }

    #[test]
    fn decode_requires_invertibility() {
        let n = 2;
        let f = vec![0usize, 0, 1, 2]; // not injective
        let g = vec![0usize, 1, 2, 3];
        assert!(decode_permutation(n, &f, &g).is_err());
        // Non-injective g makes the relabeling non-unitary.
        let f = vec![0usize, 1, 2, 3];
        let g = vec![0usize, 0, 0, 0];
        assert!(decode_permutation(n, &f, &g).is_err());
        // A permutation pair decodes fine.
        let g = vec![3usize, 2, 1, 0];
        assert!(decode_permutation(n, &f, &g).is_ok());
    }

    #[test]
    fn bell_projection_of_bell_state_is_one() {
        // Two-qubit Bell pair embedded as (flag, B) of a 4-qubit product.
        let bell = PureState::zero(2)
            .unwrap()
            .apply_1q(&Unitary::hadamard(), 0)
            .unwrap()
            .apply(&Unitary::cnot(), &[0, 1])
            .unwrap();
        let pad = PureState::zero(2).unwrap();
        let joint = pad.tensor(&bell).unwrap();
        assert!((bell_projection(&joint, 2, 3).unwrap() - 1.0).abs() < 1e-12);
    }
}
