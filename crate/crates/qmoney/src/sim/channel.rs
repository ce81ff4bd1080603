use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::{self, C, ZERO};
use crate::rng::Stream;
use crate::sim::density::DensityMatrix;

pub const COMPLETENESS_TOL: f64 = 1e-9;

/// Finite POVM: effects are Hermitian, PSD, and sum to the identity within
/// 1e-9.
#[derive(Clone, Debug)]
pub struct Povm {
    dim: usize,
    effects: Vec<Array2<C>>,
}

impl Povm {
    pub fn new(effects: Vec<Array2<C>>) -> Result<Self> {
        let dim = match effects.first() {
            Some(e) => e.nrows(),
            None => return Err(Error::InvalidArgument("POVM needs at least one effect".into())),
        };
        let mut sum = Array2::from_elem((dim, dim), ZERO);
        for (i, e) in effects.iter().enumerate() {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(Error::Dimension(format!("effect {i} is not {dim}x{dim}")));
            }
            if !linalg::is_hermitian(e, 1e-10) {
                return Err(Error::InvalidState(format!("effect {i} is not Hermitian")));
            }
            let (eigs, _) = linalg::hermitian_eig(e)?;
            if eigs.iter().any(|&l| l < -1e-10) {
                return Err(Error::InvalidState(format!("effect {i} is not PSD")));
            }
            sum += e;
        }
        for r in 0..dim {
            sum[(r, r)] -= C::new(1.0, 0.0);
        }
        if linalg::max_abs(&sum) > COMPLETENESS_TOL {
            return Err(Error::InvalidState(
                "POVM effects do not sum to the identity".into(),
            ));
        }
        Ok(Povm { dim, effects })
    }

    /// Two-outcome POVM {P, I - P} from a projector.
    pub fn from_projector(p: &Array2<C>) -> Result<Self> {
        let dim = p.nrows();
        let mut complement = linalg::identity(dim);
        complement -= p;
        Povm::new(vec![p.clone(), complement])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effect(&self, i: usize) -> &Array2<C> {
        &self.effects[i]
    }

    pub fn outcome_probability(&self, rho: &DensityMatrix, i: usize) -> Result<f64> {
        Ok(rho.expectation(&self.effects[i])?.re)
    }
}

/// Sample an outcome index with Born probabilities Tr(E_i rho).
pub fn povm_measure(rho: &DensityMatrix, povm: &Povm, rng: &mut Stream) -> Result<usize> {
    if povm.dim() != rho.dim() {
        return Err(Error::Dimension("POVM dimension does not match state".into()));
    }
    let probs: Vec<f64> = (0..povm.len())
        .map(|i| povm.outcome_probability(rho, i).map(|p| p.max(0.0)))
        .collect::<Result<_>>()?;
    let draw = rng.uniform();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if draw < acc {
            return Ok(i);
        }
    }
    // Rounding pushed the cumulative sum below 1; return the last outcome
    // with positive probability.
    probs
        .iter()
        .rposition(|&p| p > 0.0)
        .ok_or_else(|| Error::InvalidState("all POVM outcomes have zero probability".into()))
}

/// CPTP map in Kraus form: sum_k K_k^dag K_k = I within 1e-9.
#[derive(Clone, Debug)]
pub struct Superoperator {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<Array2<C>>,
}

impl Superoperator {
    pub fn new(kraus: Vec<Array2<C>>) -> Result<Self> {
        let (dim_out, dim_in) = match kraus.first() {
            Some(k) => (k.nrows(), k.ncols()),
            None => {
                return Err(Error::InvalidArgument("channel needs at least one Kraus term".into()))
            }
        };
        let mut sum = Array2::from_elem((dim_in, dim_in), ZERO);
        for (i, k) in kraus.iter().enumerate() {
            if k.nrows() != dim_out || k.ncols() != dim_in {
                return Err(Error::Dimension(format!(
                    "Kraus term {i} is {}x{}, expected {dim_out}x{dim_in}",
                    k.nrows(),
                    k.ncols()
                )));
            }
            sum += &linalg::dagger(k).dot(k);
        }
        for r in 0..dim_in {
            sum[(r, r)] -= C::new(1.0, 0.0);
        }
        if linalg::max_abs(&sum) > COMPLETENESS_TOL {
            return Err(Error::InvalidState(
                "Kraus terms do not satisfy the trace-preservation condition".into(),
            ));
        }
        Ok(Superoperator { dim_in, dim_out, kraus })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[Array2<C>] {
        &self.kraus
    }

    /// rho -> sum_k K_k rho K_k^dag.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim_in {
            return Err(Error::Dimension(format!(
                "channel input dim {} does not match state dim {}",
                self.dim_in,
                rho.dim()
            )));
        }
        if !self.dim_out.is_power_of_two() || self.dim_out == 1 {
            return Err(Error::Dimension(format!(
                "channel output dim {} is not a qubit register",
                self.dim_out
            )));
        }
        let n_out = self.dim_out.trailing_zeros() as usize;
        let mut out = Array2::from_elem((self.dim_out, self.dim_out), ZERO);
        for k in &self.kraus {
            out += &k.dot(rho.mat()).dot(&linalg::dagger(k));
        }
        Ok(DensityMatrix::from_trusted(n_out, out))
    }

    /// Sample one Kraus branch applied to a pure input: picks k with
    /// probability |K_k psi|^2 and returns the renormalized result. This is
    /// a pure-state unraveling of `apply`.
    pub fn apply_sampled(
        &self,
        psi: &crate::sim::pure::PureState,
        rng: &mut Stream,
    ) -> Result<crate::sim::pure::PureState> {
        if psi.dim() != self.dim_in {
            return Err(Error::Dimension("channel input dim mismatch".into()));
        }
        let n_out = self.dim_out.trailing_zeros() as usize;
        let images: Vec<ndarray::Array1<C>> =
            self.kraus.iter().map(|k| k.dot(psi.amps())).collect();
        let probs: Vec<f64> = images.iter().map(|v| linalg::norm2(v).powi(2)).collect();
        let draw = rng.uniform();
        let mut acc = 0.0;
        let mut pick = probs.iter().rposition(|&p| p > 1e-300).ok_or_else(|| {
            Error::InvalidState("channel annihilates the input state".into())
        })?;
        for (i, &p) in probs.iter().enumerate() {
            acc += p;
            if draw < acc {
                pick = i;
                break;
            }
        }
        let norm = probs[pick].sqrt();
        let amps = images[pick].mapv(|z| z / C::new(norm, 0.0));
        crate::sim::pure::PureState::new(n_out, amps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use crate::sim::pure::PureState;

    fn proj(dim: usize, idx: usize) -> Array2<C> {
        let mut p = Array2::from_elem((dim, dim), ZERO);
        p[(idx, idx)] = ONE;
        p
    }

    #[test]
    fn povm_requires_completeness() {
        assert!(Povm::new(vec![proj(2, 0)]).is_err());
        assert!(Povm::new(vec![proj(2, 0), proj(2, 1)]).is_ok());
    }

    #[test]
    fn povm_rejects_non_psd_effects() {
        let mut e0 = proj(2, 0);
        e0[(0, 0)] = C::new(2.0, 0.0);
        let mut e1 = proj(2, 1);
        e1[(0, 0)] = C::new(-1.0, 0.0);
        assert!(Povm::new(vec![e0, e1]).is_err());
    }

    #[test]
    fn povm_sampling_matches_born_rule() {
        let mut rng = Stream::from_seed(19);
        let psi = PureState::zero(1).unwrap().apply_1q(&crate::sim::unitary::Unitary::hadamard(), 0).unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        let povm = Povm::new(vec![proj(2, 0), proj(2, 1)]).unwrap();
        let trials = 20_000;
        let mut zeros = 0;
        for _ in 0..trials {
            if povm_measure(&rho, &povm, &mut rng).unwrap() == 0 {
                zeros += 1;
            }
        }
        let freq = zeros as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.02, "freq {freq}");
    }

    #[test]
    fn depolarizing_channel_contracts_to_mixed() {
        // Single-qubit depolarizing with p = 1: K = {X/2, Y/2, Z/2, I/2}... the
        // uniform Pauli twirl sends every state to I/2.
        let paulis = [
            crate::sim::unitary::Unitary::identity(2),
            crate::sim::unitary::Unitary::pauli_x(),
            crate::sim::unitary::Unitary::pauli_y(),
            crate::sim::unitary::Unitary::pauli_z(),
        ];
        let kraus: Vec<Array2<C>> =
            paulis.iter().map(|u| u.mat().mapv(|z| z * C::new(0.5, 0.0))).collect();
        let ch = Superoperator::new(kraus).unwrap();
        let rho = DensityMatrix::from_pure(&PureState::zero(1).unwrap());
        let out = ch.apply(&rho).unwrap();
        assert!((out.mat()[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!((out.mat()[(1, 1)].re - 0.5).abs() < 1e-12);
        assert!(out.mat()[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn sampled_branches_average_to_channel_output() {
        let mut rng = Stream::from_seed(23);
        // Amplitude damping with gamma = 0.3.
        let g: f64 = 0.3;
        let mut k0 = Array2::from_elem((2, 2), ZERO);
        k0[(0, 0)] = ONE;
        k0[(1, 1)] = C::new((1.0 - g).sqrt(), 0.0);
        let mut k1 = Array2::from_elem((2, 2), ZERO);
        k1[(0, 1)] = C::new(g.sqrt(), 0.0);
        let ch = Superoperator::new(vec![k0, k1]).unwrap();
        let psi = PureState::basis(1, 1).unwrap();
        let exact = ch.apply(&DensityMatrix::from_pure(&psi)).unwrap();
        let trials = 20_000;
        let mut acc = Array2::from_elem((2, 2), ZERO);
        for _ in 0..trials {
            let out = ch.apply_sampled(&psi, &mut rng).unwrap();
            acc += DensityMatrix::from_pure(&out).mat();
        }
        acc.mapv_inplace(|z| z / C::new(trials as f64, 0.0));
        let diff = &acc - exact.mat();
        assert!(linalg::max_abs(&diff) < 0.02);
    }

    #[test]
    fn channel_rejects_trace_decreasing_kraus() {
        let k = proj(2, 0); // P0 alone: sum = P0 != I
        assert!(Superoperator::new(vec![k]).is_err());
    }
}
