use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::{self, C, ZERO};
use crate::sim::density::DensityMatrix;
use crate::sim::pure::check_qubit_count;
use crate::sim::unitary::Unitary;

pub const PROJECTOR_TOL: f64 = 1e-9;

/// Damage bound for a single binary measurement that accepts a pure state
/// with probability >= 1 - eps.
pub fn damage_bound_pure(eps: f64) -> f64 {
    (eps * (1.0 - eps)).max(0.0).sqrt()
}

/// Damage bound for the mixed-state case.
pub fn damage_bound_mixed(eps: f64) -> f64 {
    eps.max(0.0).sqrt()
}

/// Union bound over k measurements, each accepting with probability
/// >= 1 - eps on the original state.
pub fn damage_bound_sequence(k: usize, eps: f64) -> f64 {
    k as f64 * damage_bound_mixed(eps)
}

/// A binary measurement realized coherently: adjoin `ancilla_qubits` fresh
/// ancillas, apply `u`, read the outcome via the projector `pi0` (outcome 0
/// = accept), then uncompute with u^dag. Recording the outcome without
/// looking at it leaves the system in the dephased state this struct's
/// `measure` returns.
#[derive(Clone, Debug)]
pub struct GentleMeasurement {
    system_qubits: usize,
    ancilla_qubits: usize,
    u: Unitary,
    pi0: Array2<C>,
}

impl GentleMeasurement {
    pub fn new(
        system_qubits: usize,
        ancilla_qubits: usize,
        u: Unitary,
        pi0: Array2<C>,
    ) -> Result<Self> {
        check_qubit_count(system_qubits)?;
        check_qubit_count(system_qubits + ancilla_qubits)?;
        let dim = 1usize << (system_qubits + ancilla_qubits);
        if u.dim() != dim {
            return Err(Error::Dimension(format!(
                "measurement unitary must act on {} qubits",
                system_qubits + ancilla_qubits
            )));
        }
        if pi0.nrows() != dim || pi0.ncols() != dim {
            return Err(Error::Dimension("projector dimension mismatch".into()));
        }
        if !linalg::is_hermitian(&pi0, PROJECTOR_TOL) {
            return Err(Error::InvalidState("pi0 is not Hermitian".into()));
        }
        let idem = pi0.dot(&pi0) - &pi0;
        if linalg::max_abs(&idem) > PROJECTOR_TOL {
            return Err(Error::InvalidState("pi0 is not idempotent".into()));
        }
        Ok(GentleMeasurement { system_qubits, ancilla_qubits, u, pi0 })
    }

    /// Accept with probability Tr(pi0 W) where W is the post-unitary joint
    /// state; measures qubit 0 of an s-qubit system into one ancilla when
    /// built from a CNOT, and generalizes from there.
    pub fn system_qubits(&self) -> usize {
        self.system_qubits
    }

    pub fn ancilla_qubits(&self) -> usize {
        self.ancilla_qubits
    }

    fn joint(&self, rho: &DensityMatrix) -> Result<Array2<C>> {
        if rho.n() != self.system_qubits {
            return Err(Error::Dimension(format!(
                "measurement expects {} system qubits, state has {}",
                self.system_qubits,
                rho.n()
            )));
        }
        // System qubits first (most significant), ancillas appended in |0..0>.
        let anc_dim = 1usize << self.ancilla_qubits;
        let mut anc = Array2::from_elem((anc_dim, anc_dim), ZERO);
        anc[(0, 0)] = C::new(1.0, 0.0);
        let joint = linalg::kron(rho.mat(), &anc);
        Ok(self.u.mat().dot(&joint).dot(&linalg::dagger(self.u.mat())))
    }

    /// Probability of the accept outcome on `rho`.
    pub fn accept_probability(&self, rho: &DensityMatrix) -> Result<f64> {
        let w = self.joint(rho)?;
        Ok(linalg::trace(&self.pi0.dot(&w)).re.clamp(0.0, 1.0))
    }

    /// Performs the measurement without revealing the outcome: returns the
    /// accept probability and the dephased post-measurement system state
    /// Tr_anc(U^dag (pi0 W pi0 + pi1 W pi1) U).
    pub fn measure(&self, rho: &DensityMatrix) -> Result<(f64, DensityMatrix)> {
        let w = self.joint(rho)?;
        let p0 = linalg::trace(&self.pi0.dot(&w)).re.clamp(0.0, 1.0);
        let branch0 = self.pi0.dot(&w).dot(&self.pi0);
        let dim = w.nrows();
        let mut pi1 = linalg::identity(dim);
        pi1 -= &self.pi0;
        let branch1 = pi1.dot(&w).dot(&pi1);
        let dephased = branch0 + branch1;
        let back =
            linalg::dagger(self.u.mat()).dot(&dephased).dot(self.u.mat());
        let total = self.system_qubits + self.ancilla_qubits;
        let keep: Vec<usize> = (0..self.system_qubits).collect();
        DensityMatrix::from_trusted(total, back)
            .partial_trace(&keep)
            .map(|post| (p0, post))
    }

    /// Post-selected accept branch, renormalized, with ancillas uncomputed
    /// and traced out. Errors if the accept probability is (numerically)
    /// zero.
    pub fn measure_postselect(&self, rho: &DensityMatrix) -> Result<(f64, DensityMatrix)> {
        let w = self.joint(rho)?;
        let p0 = linalg::trace(&self.pi0.dot(&w)).re.clamp(0.0, 1.0);
        if p0 < 1e-14 {
            return Err(Error::InvalidState(
                "cannot post-select on an outcome of probability zero".into(),
            ));
        }
        let mut branch0 = self.pi0.dot(&w).dot(&self.pi0);
        branch0.mapv_inplace(|z| z / C::new(p0, 0.0));
        let back = linalg::dagger(self.u.mat()).dot(&branch0).dot(self.u.mat());
        let total = self.system_qubits + self.ancilla_qubits;
        let keep: Vec<usize> = (0..self.system_qubits).collect();
        DensityMatrix::from_trusted(total, back)
            .partial_trace(&keep)
            .map(|post| (p0, post))
    }
}

/// Run the measurements in order, dephasing after each, and return the final
/// state together with the damage bound k*sqrt(eps). Every measurement must
/// accept the ORIGINAL state with probability >= 1 - eps; the first that
/// does not produces a Precondition error naming its index and probability.
pub fn sequential_gentle(
    rho: &DensityMatrix,
    measurements: &[GentleMeasurement],
    eps: f64,
) -> Result<(DensityMatrix, f64)> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("eps {eps} outside [0, 1]")));
    }
    for (i, m) in measurements.iter().enumerate() {
        let p = m.accept_probability(rho)?;
        if p < 1.0 - eps - 1e-12 {
            return Err(Error::Precondition(format!(
                "measurement {i} accepts the input with probability {p:.6}, below 1 - eps = {}",
                1.0 - eps
            )));
        }
    }
    let mut state = rho.clone();
    for m in measurements {
        let (_, next) = m.measure(&state)?;
        state = next;
    }
    Ok((state, damage_bound_sequence(measurements.len(), eps)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::distance::trace_distance;
    use crate::sim::pure::PureState;

    /// Computational-basis readout of system qubit `q` (of `s`) via one CNOT
    /// into a fresh ancilla.
    fn basis_readout(s: usize, q: usize) -> GentleMeasurement {
        let total = s + 1;
        // CNOT embedded on (q, ancilla) inside the (s+1)-qubit space.
        let full = crate::sim::density::embed_unitary(
            total,
            &Unitary::cnot(),
            &[q, s],
        );
        let u = Unitary::new(full).unwrap();
        // Accept = ancilla (last qubit, least significant bit) reads 0.
        let dim = 1usize << total;
        let mut pi0 = Array2::from_elem((dim, dim), ZERO);
        for i in (0..dim).step_by(2) {
            pi0[(i, i)] = C::new(1.0, 0.0);
        }
        GentleMeasurement::new(s, 1, u, pi0).unwrap()
    }

    #[test]
    fn eigenstate_passes_undamaged() {
        let m = basis_readout(1, 0);
        let rho = DensityMatrix::from_pure(&PureState::zero(1).unwrap());
        let (p0, post) = m.measure(&rho).unwrap();
        assert!((p0 - 1.0).abs() < 1e-12);
        assert!(trace_distance(&rho, &post).unwrap() < 1e-10);
    }

    #[test]
    fn plus_state_saturates_the_pure_damage_bound() {
        // Measuring |+> in the computational basis: eps = 1/2 and the damage
        // hits sqrt(eps(1-eps)) = 1/2 exactly.
        let m = basis_readout(1, 0);
        let plus = PureState::zero(1)
            .unwrap()
            .apply_1q(&Unitary::hadamard(), 0)
            .unwrap();
        let rho = DensityMatrix::from_pure(&plus);
        let (p0, post) = m.measure(&rho).unwrap();
        assert!((p0 - 0.5).abs() < 1e-12);
        let damage = trace_distance(&rho, &post).unwrap();
        assert!((damage - 0.5).abs() < 1e-10);
        assert!((damage_bound_pure(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn small_rotation_damage_stays_under_bound() {
        let m = basis_readout(1, 0);
        for &theta in &[0.05f64, 0.1, 0.2, 0.4] {
            let psi = PureState::zero(1)
                .unwrap()
                .apply_1q(&Unitary::rotation(theta), 0)
                .unwrap();
            let rho = DensityMatrix::from_pure(&psi);
            let (p0, post) = m.measure(&rho).unwrap();
            let eps = 1.0 - p0;
            let damage = trace_distance(&rho, &post).unwrap();
            assert!(
                damage <= damage_bound_pure(eps) + 1e-10,
                "theta {theta}: damage {damage} > bound {}",
                damage_bound_pure(eps)
            );
        }
    }

    #[test]
    fn postselection_projects_onto_accept_branch() {
        let m = basis_readout(1, 0);
        let psi = PureState::zero(1)
            .unwrap()
            .apply_1q(&Unitary::rotation(0.7), 0)
            .unwrap();
        let (p0, post) = m.measure_postselect(&DensityMatrix::from_pure(&psi)).unwrap();
        assert!((p0 - 0.7f64.cos().powi(2)).abs() < 1e-12);
        let zero = DensityMatrix::from_pure(&PureState::zero(1).unwrap());
        assert!(trace_distance(&zero, &post).unwrap() < 1e-10);
    }

    #[test]
    fn sequence_rejects_states_that_fail_the_precondition() {
        let ms = vec![basis_readout(1, 0)];
        let plus = DensityMatrix::from_pure(
            &PureState::zero(1).unwrap().apply_1q(&Unitary::hadamard(), 0).unwrap(),
        );
        let err = sequential_gentle(&plus, &ms, 0.1).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("measurement 0"), "unexpected error: {msg}");
    }

    #[test]
    fn sequence_of_compatible_measurements_is_harmless() {
        // Reading each qubit of |01> in the computational basis never
        // disturbs it.
        let ms: Vec<GentleMeasurement> = (0..2)
            .map(|q| {
                let m = basis_readout(2, q);
                // Accept on either ancilla value so both qubits pass.
                let dim = 1usize << 3;
                let pi0 = linalg::identity(dim);
                GentleMeasurement::new(2, 1, Unitary::new(m.u.mat().clone()).unwrap(), pi0)
                    .unwrap()
            })
            .collect();
        let rho = DensityMatrix::from_pure(&PureState::basis(2, 1).unwrap());
        let (post, bound) = sequential_gentle(&rho, &ms, 0.0).unwrap();
        assert!(trace_distance(&rho, &post).unwrap() < 1e-10);
        assert!(bound.abs() < 1e-15);
    }

    #[test]
    fn projector_validation() {
        let dim = 4;
        let mut not_proj = Array2::from_elem((dim, dim), ZERO);
        not_proj[(0, 0)] = C::new(2.0, 0.0);
        assert!(GentleMeasurement::new(
            1,
            1,
            Unitary::identity(4),
            not_proj
        )
        .is_err());
    }
}
