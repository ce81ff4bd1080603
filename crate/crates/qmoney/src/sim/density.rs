use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::{self, C, ZERO};
use crate::sim::index::{check_targets, embedding, qubit_bit, spread};
use crate::sim::pure::{check_qubit_count, PureState};
use crate::sim::unitary::Unitary;

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const EIG_FLOOR: f64 = -1e-10;

/// Dense n-qubit density matrix. Constructors enforce Hermiticity within
/// 1e-10, eigenvalues >= -1e-10, and unit trace within 1e-10.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    n: usize,
    mat: Array2<C>,
}

impl DensityMatrix {
    pub fn new(n: usize, mat: Array2<C>) -> Result<Self> {
        check_qubit_count(n)?;
        let dim = 1usize << n;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::Dimension(format!(
                "{n}-qubit density matrix must be {dim}x{dim}, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if !linalg::is_hermitian(&mat, HERMITICITY_TOL) {
            return Err(Error::InvalidState("density matrix is not Hermitian".into()));
        }
        let tr = linalg::trace(&mat);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("density matrix trace {tr} is not 1")));
        }
        let (eigs, _) = linalg::hermitian_eig(&mat)?;
        if let Some(bad) = eigs.iter().find(|&&e| e < EIG_FLOOR) {
            return Err(Error::InvalidState(format!(
                "density matrix has negative eigenvalue {bad}"
            )));
        }
        Ok(DensityMatrix { n, mat })
    }

    /// Skips the eigenvalue scan; for matrices produced by operations that
    /// preserve positivity exactly (partial trace, unitary conjugation,
    /// convex mixing of valid states).
    pub(crate) fn from_trusted(n: usize, mat: Array2<C>) -> Self {
        debug_assert_eq!(mat.nrows(), 1 << n);
        debug_assert!(linalg::is_hermitian(&mat, 1e-8));
        DensityMatrix { n, mat }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        DensityMatrix { n: psi.n(), mat: linalg::outer(psi.amps(), psi.amps()) }
    }

    /// Reduced state of a pure state on the kept qubits (strictly
    /// increasing), formed directly from the amplitudes; avoids the full
    /// outer product that `from_pure` plus `partial_trace` would build.
    pub fn from_pure_keeping(psi: &PureState, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::InvalidArgument(
                "reduction must keep at least one qubit".into(),
            ));
        }
        if keep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "kept qubits must be strictly increasing".into(),
            ));
        }
        check_targets(psi.n(), keep)?;
        let n = psi.n();
        let kept_strides: Vec<usize> = keep.iter().map(|&q| 1usize << qubit_bit(n, q)).collect();
        let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let traced_strides: Vec<usize> =
            traced.iter().map(|&q| 1usize << qubit_bit(n, q)).collect();
        let out_dim = 1usize << keep.len();
        let mut out = Array2::from_elem((out_dim, out_dim), ZERO);
        let amps = psi.amps();
        for e in 0..1usize << traced.len() {
            let env = spread(e, &traced_strides);
            for r in 0..out_dim {
                let ar = amps[spread(r, &kept_strides) | env];
                if ar == ZERO {
                    continue;
                }
                for c in 0..out_dim {
                    let ac = amps[spread(c, &kept_strides) | env];
                    out[(r, c)] += ar * ac.conj();
                }
            }
        }
        Ok(DensityMatrix::from_trusted(keep.len(), out))
    }

    /// Maximally mixed state I / 2^n.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_qubit_count(n)?;
        let dim = 1usize << n;
        let mut mat = Array2::from_elem((dim, dim), ZERO);
        let p = C::new(1.0 / dim as f64, 0.0);
        for i in 0..dim {
            mat[(i, i)] = p;
        }
        Ok(DensityMatrix { n, mat })
    }

    /// Convex mixture; weights must be nonnegative and sum to 1 within 1e-10.
    pub fn mix(parts: &[(f64, DensityMatrix)]) -> Result<Self> {
        let n = match parts.first() {
            Some((_, rho)) => rho.n,
            None => return Err(Error::InvalidArgument("mixture of nothing".into())),
        };
        let total: f64 = parts.iter().map(|(w, _)| *w).sum();
        if (total - 1.0).abs() > 1e-10 || parts.iter().any(|(w, _)| *w < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "mixture weights must be nonnegative and sum to 1, got total {total}"
            )));
        }
        let dim = 1usize << n;
        let mut mat = Array2::from_elem((dim, dim), ZERO);
        for (w, rho) in parts {
            if rho.n != n {
                return Err(Error::Dimension("mixture parts have mismatched widths".into()));
            }
            mat.scaled_add(C::new(*w, 0.0), &rho.mat);
        }
        Ok(DensityMatrix { n, mat })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &Array2<C> {
        &self.mat
    }

    /// Trace out every qubit not listed in `keep`. `keep` must be strictly
    /// increasing and nonempty.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::InvalidArgument(
                "partial trace must keep at least one qubit".into(),
            ));
        }
        if keep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "kept qubits must be strictly increasing".into(),
            ));
        }
        check_targets(self.n, keep)?;
        let k = keep.len();
        let kept_strides: Vec<usize> =
            keep.iter().map(|&q| 1usize << qubit_bit(self.n, q)).collect();
        let traced: Vec<usize> = (0..self.n).filter(|q| !keep.contains(q)).collect();
        let traced_strides: Vec<usize> =
            traced.iter().map(|&q| 1usize << qubit_bit(self.n, q)).collect();
        let out_dim = 1usize << k;
        let mut out = Array2::from_elem((out_dim, out_dim), ZERO);
        let env_count = 1usize << traced.len();
        for r in 0..out_dim {
            let row_base = spread(r, &kept_strides);
            for c in 0..out_dim {
                let col_base = spread(c, &kept_strides);
                let mut acc = ZERO;
                for e in 0..env_count {
                    let env = spread(e, &traced_strides);
                    acc += self.mat[(row_base | env, col_base | env)];
                }
                out[(r, c)] = acc;
            }
        }
        Ok(DensityMatrix::from_trusted(k, out))
    }

    /// Conjugate by `u` on the listed qubits.
    pub fn apply_unitary(&self, u: &Unitary, targets: &[usize]) -> Result<DensityMatrix> {
        check_targets(self.n, targets)?;
        if u.dim() != 1 << targets.len() {
            return Err(Error::Dimension(format!(
                "{}-dim unitary applied to {} target qubits",
                u.dim(),
                targets.len()
            )));
        }
        let full = if targets.len() == self.n && targets.iter().enumerate().all(|(i, &t)| i == t) {
            u.mat().clone()
        } else {
            embed_unitary(self.n, u, targets)
        };
        let mat = full.dot(&self.mat).dot(&linalg::dagger(&full));
        Ok(DensityMatrix::from_trusted(self.n, mat))
    }

    /// Tr(rho * op).
    pub fn expectation(&self, op: &Array2<C>) -> Result<C> {
        if op.nrows() != self.dim() || op.ncols() != self.dim() {
            return Err(Error::Dimension("operator dimension mismatch".into()));
        }
        Ok(linalg::trace(&self.mat.dot(op)))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(linalg::hermitian_eig(&self.mat)?.0)
    }

    pub fn purity(&self) -> f64 {
        linalg::trace(&self.mat.dot(&self.mat)).re
    }

    /// Largest-eigenvalue eigenvector as a pure state; only meaningful when
    /// the state is (near) pure.
    pub fn top_eigenvector(&self) -> Result<PureState> {
        let (eigs, vecs) = linalg::hermitian_eig(&self.mat)?;
        let top = eigs.len() - 1;
        let col = vecs.column(top).to_owned();
        PureState::new(self.n, col)
    }

    /// Standard purification on 2n qubits: sum_i sqrt(p_i) |v_i>|i>, with the
    /// original system as the first (most significant) n qubits.
    pub fn purify(&self) -> Result<PureState> {
        check_qubit_count(2 * self.n)?;
        let (eigs, vecs) = linalg::hermitian_eig(&self.mat)?;
        let dim = self.dim();
        let mut amps = Array1::from_elem(dim * dim, ZERO);
        for (k, &p) in eigs.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let w = C::new(p.sqrt(), 0.0);
            for i in 0..dim {
                amps[i * dim + k] += w * vecs[(i, k)];
            }
        }
        PureState::new(2 * self.n, amps)
    }
}

/// Lift `u` acting on `targets` to the full 2^n space.
pub(crate) fn embed_unitary(n: usize, u: &Unitary, targets: &[usize]) -> Array2<C> {
    let emb = embedding(n, targets);
    let sub_dim = u.dim();
    let dim = 1usize << n;
    let offsets: Vec<usize> = (0..sub_dim).map(|s| spread(s, &emb.strides)).collect();
    let um = u.mat();
    let mut full = Array2::from_elem((dim, dim), ZERO);
    for &base in &emb.env_bases {
        for r in 0..sub_dim {
            for s in 0..sub_dim {
                full[(base | offsets[r], base | offsets[s])] = um[(r, s)];
            }
        }
    }
    full
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    fn almost(a: C, re: f64, im: f64) -> bool {
        (a.re - re).abs() < 1e-12 && (a.im - im).abs() < 1e-12
    }

    #[test]
    fn rejects_bad_matrices() {
        let mut m = Array2::from_elem((2, 2), ZERO);
        m[(0, 1)] = C::new(1.0, 0.0);
        m[(0, 0)] = C::new(1.0, 0.0);
        assert!(DensityMatrix::new(1, m).is_err()); // not Hermitian

        let mut m = Array2::from_elem((2, 2), ZERO);
        m[(0, 0)] = C::new(2.0, 0.0);
        m[(1, 1)] = C::new(-1.0, 0.0);
        assert!(DensityMatrix::new(1, m).is_err()); // negative eigenvalue
    }

    #[test]
    fn partial_trace_known_two_qubit_state() {
        // (|00> + |01> - |10>)/sqrt(3), keep qubit 0:
        // [[2/3, -1/3], [-1/3, 1/3]].
        let r = 1.0 / 3.0f64.sqrt();
        let amps = Array1::from_vec(vec![
            C::new(r, 0.0),
            C::new(r, 0.0),
            C::new(-r, 0.0),
            ZERO,
        ]);
        let psi = PureState::new(2, amps).unwrap();
        let rho = DensityMatrix::from_pure(&psi).partial_trace(&[0]).unwrap();
        let m = rho.mat();
        assert!(almost(m[(0, 0)], 2.0 / 3.0, 0.0));
        assert!(almost(m[(0, 1)], -1.0 / 3.0, 0.0));
        assert!(almost(m[(1, 0)], -1.0 / 3.0, 0.0));
        assert!(almost(m[(1, 1)], 1.0 / 3.0, 0.0));
    }

    #[test]
    fn partial_trace_ghz_keep_pair() {
        // GHZ on 3 qubits, keep qubits 1 and 2: diag(1/2, 0, 0, 1/2).
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = Array1::from_elem(8, ZERO);
        amps[0] = C::new(r, 0.0);
        amps[7] = C::new(r, 0.0);
        let psi = PureState::new(3, amps).unwrap();
        let rho = DensityMatrix::from_pure(&psi).partial_trace(&[1, 2]).unwrap();
        let m = rho.mat();
        for r_ in 0..4 {
            for c in 0..4 {
                let want = if r_ == c && (r_ == 0 || r_ == 3) { 0.5 } else { 0.0 };
                assert!(almost(m[(r_, c)], want, 0.0), "entry ({r_},{c})");
            }
        }
    }

    #[test]
    fn partial_trace_requires_sorted_nonempty_keep() {
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(rho.partial_trace(&[]).is_err());
        assert!(rho.partial_trace(&[1, 0]).is_err());
        assert!(rho.partial_trace(&[0, 0]).is_err());
    }

    #[test]
    fn unitary_conjugation_matches_pure_evolution() {
        let mut rng = Stream::from_seed(11);
        let psi = PureState::random(3, &mut rng).unwrap();
        let u = Unitary::hadamard();
        let via_pure = DensityMatrix::from_pure(&psi.apply_1q(&u, 1).unwrap());
        let via_rho = DensityMatrix::from_pure(&psi).apply_unitary(&u, &[1]).unwrap();
        let diff = &via_pure.mat - &via_rho.mat;
        assert!(linalg::max_abs(&diff) < 1e-12);
    }

    #[test]
    fn purification_traces_back() {
        let mut rng = Stream::from_seed(13);
        let psi = PureState::random(4, &mut rng).unwrap();
        let rho = DensityMatrix::from_pure(&psi).partial_trace(&[0, 2]).unwrap();
        let purified = DensityMatrix::from_pure(&rho.purify().unwrap());
        let back = purified.partial_trace(&[0, 1]).unwrap();
        let diff = &back.mat - &rho.mat;
        assert!(linalg::max_abs(&diff) < 1e-10);
    }

    #[test]
    fn keeping_matches_trace_of_outer_product() {
        let mut rng = Stream::from_seed(17);
        let psi = PureState::random(4, &mut rng).unwrap();
        for keep in [vec![0], vec![1, 3], vec![0, 2, 3]] {
            let direct = DensityMatrix::from_pure_keeping(&psi, &keep).unwrap();
            let via_outer = DensityMatrix::from_pure(&psi).partial_trace(&keep).unwrap();
            let diff = &direct.mat - &via_outer.mat;
            assert!(linalg::max_abs(&diff) < 1e-12, "keep {keep:?}");
        }
    }

    #[test]
    fn mixing_validates_weights() {
        let a = DensityMatrix::maximally_mixed(1).unwrap();
        let b = DensityMatrix::from_pure(&PureState::zero(1).unwrap());
        assert!(DensityMatrix::mix(&[(0.5, a.clone()), (0.4, b.clone())]).is_err());
        assert!(DensityMatrix::mix(&[(1.5, a.clone()), (-0.5, b.clone())]).is_err());
        let m = DensityMatrix::mix(&[(0.5, a), (0.5, b)]).unwrap();
        assert!((m.mat()[(0, 0)].re - 0.75).abs() < 1e-12);
    }

    #[test]
    fn purity_distinguishes_pure_from_mixed() {
        let pure = DensityMatrix::from_pure(&PureState::zero(2).unwrap());
        assert!((pure.purity() - 1.0).abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert!((mixed.purity() - 0.25).abs() < 1e-12);
    }
}
