//! State preparation as an explicit gate sequence.
//!
//! The circuit builder walks the prefix tree of the target amplitudes: at
//! level k it rotates qubit k, conditioned on the first k qubits spelling a
//! prefix, so the branch masses match the target's. A final diagonal pass
//! installs the per-basis-state phases. Zero-mass branches produce no gate
//! at all, so classical targets compile to a handful of steps.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::linalg::{self, C, ONE, ZERO};
use crate::sim::{PureState, Unitary};

/// Mass below which a branch is treated as absent.
const BRANCH_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub enum PrepStep {
    /// A 2x2 gate on `target`, applied only where every `(qubit, bit)`
    /// control matches.
    Gate1 { target: usize, controls: Vec<(usize, u8)>, gate: Unitary },
    /// Multiply each basis amplitude by a unit phase.
    Diagonal { phases: Vec<C> },
}

#[derive(Clone, Debug)]
pub struct PrepCircuit {
    n: usize,
    steps: Vec<PrepStep>,
}

fn controls_match(idx: usize, n: usize, controls: &[(usize, u8)]) -> bool {
    controls.iter().all(|&(q, b)| ((idx >> (n - 1 - q)) & 1) as u8 == b)
}

impl PrepCircuit {
    pub fn new(n: usize, steps: Vec<PrepStep>) -> Result<Self> {
        if n == 0 || n > crate::MAX_QUBITS {
            return Err(Error::Capacity { requested: n, max: crate::MAX_QUBITS });
        }
        let dim = 1usize << n;
        for step in &steps {
            match step {
                PrepStep::Gate1 { target, controls, gate } => {
                    if *target >= n || controls.iter().any(|&(q, _)| q >= n) {
                        return Err(Error::Dimension("gate touches a qubit out of range".into()));
                    }
                    if controls.iter().any(|&(q, _)| q == *target) {
                        return Err(Error::InvalidArgument(
                            "gate target listed among its controls".into(),
                        ));
                    }
                    if gate.dim() != 2 {
                        return Err(Error::Dimension("prep gates act on one qubit".into()));
                    }
                }
                PrepStep::Diagonal { phases } => {
                    if phases.len() != dim {
                        return Err(Error::Dimension("diagonal length != register size".into()));
                    }
                    if phases.iter().any(|p| (p.norm() - 1.0).abs() > 1e-9) {
                        return Err(Error::InvalidState("diagonal entry is not a phase".into()));
                    }
                }
            }
        }
        Ok(PrepCircuit { n, steps })
    }

    /// The recursive construction. Level k fixes the branch masses of the
    /// first k+1 qubits using rotations by the mass-ratio angles; the last
    /// step restores each amplitude's phase.
    pub fn for_state(target: &PureState) -> Result<Self> {
        let n = target.n();
        let dim = target.dim();
        let mut steps = Vec::new();
        for k in 0..n {
            let suffix = n - k - 1; // qubits after the one being rotated
            for prefix in 0..(1usize << k) {
                let mut m0 = 0.0f64; // mass of prefix extended by 0
                let mut m1 = 0.0f64;
                let base = prefix << (suffix + 1);
                for tail in 0..(1usize << suffix) {
                    m0 += target.amp(base | tail).norm_sqr();
                    m1 += target.amp(base | (1 << suffix) | tail).norm_sqr();
                }
                let b0 = m0.sqrt();
                let b1 = m1.sqrt();
                if b0 + b1 <= BRANCH_TOL {
                    continue; // dead branch, nothing to steer
                }
                let theta = b1.atan2(b0);
                if theta.abs() <= 1e-15 {
                    continue; // branch already points at |0>
                }
                let controls: Vec<(usize, u8)> =
                    (0..k).map(|q| (q, ((prefix >> (k - 1 - q)) & 1) as u8)).collect();
                steps.push(PrepStep::Gate1 {
                    target: k,
                    controls,
                    gate: Unitary::rotation(theta),
                });
            }
        }
        let mut phases = vec![ONE; dim];
        let mut any = false;
        for x in 0..dim {
            let a = target.amp(x);
            let r = a.norm();
            if r > BRANCH_TOL {
                let g = a / C::new(r, 0.0);
                if (g - ONE).norm() > 1e-12 {
                    any = true;
                }
                phases[x] = g;
            }
        }
        if any {
            steps.push(PrepStep::Diagonal { phases });
        }
        PrepCircuit::new(n, steps)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn steps(&self) -> &[PrepStep] {
        &self.steps
    }

    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        if state.n() != self.n {
            return Err(Error::Dimension(format!(
                "circuit on {} qubits applied to {}",
                self.n,
                state.n()
            )));
        }
        let dim = state.dim();
        let mut amps: Array1<C> = state.amps().clone();
        for step in &self.steps {
            match step {
                PrepStep::Gate1 { target, controls, gate } => {
                    let tbit = self.n - 1 - target;
                    let g = gate.mat();
                    for idx in 0..dim {
                        if (idx >> tbit) & 1 == 1 || !controls_match(idx, self.n, controls) {
                            continue;
                        }
                        let hi = idx | (1 << tbit);
                        let a = amps[idx];
                        let b = amps[hi];
                        amps[idx] = g[(0, 0)] * a + g[(0, 1)] * b;
                        amps[hi] = g[(1, 0)] * a + g[(1, 1)] * b;
                    }
                }
                PrepStep::Diagonal { phases } => {
                    for idx in 0..dim {
                        amps[idx] *= phases[idx];
                    }
                }
            }
        }
        PureState::new(self.n, amps)
    }

    /// Run the circuit backwards (adjoint of every step, reversed order).
    pub fn apply_inverse(&self, state: &PureState) -> Result<PureState> {
        self.inverted().apply(state)
    }

    pub fn inverted(&self) -> PrepCircuit {
        let steps = self
            .steps
            .iter()
            .rev()
            .map(|step| match step {
                PrepStep::Gate1 { target, controls, gate } => PrepStep::Gate1 {
                    target: *target,
                    controls: controls.clone(),
                    gate: gate.adjoint(),
                },
                PrepStep::Diagonal { phases } => {
                    PrepStep::Diagonal { phases: phases.iter().map(|p| p.conj()).collect() }
                }
            })
            .collect();
        PrepCircuit { n: self.n, steps }
    }

    /// Runs the preparation from |0...0>.
    pub fn prepare(&self) -> Result<PureState> {
        self.apply(&PureState::zero(self.n)?)
    }

    /// Sends the prepared state back to |0...0>.
    pub fn unprepare(&self, state: &PureState) -> Result<PureState> {
        self.apply_inverse(state)
    }

    /// Re-house the circuit on n+1 qubits with a fresh ancilla in front.
    /// `control`: None applies the circuit regardless of the ancilla;
    /// Some(b) gates every step on the ancilla reading b.
    fn embed_behind_ancilla(&self, control: Option<u8>) -> PrepCircuit {
        let n = self.n + 1;
        let dim = 1usize << n;
        let mask = (1usize << self.n) - 1;
        let steps = self
            .steps
            .iter()
            .map(|step| match step {
                PrepStep::Gate1 { target, controls, gate } => {
                    let mut controls: Vec<(usize, u8)> =
                        controls.iter().map(|&(q, b)| (q + 1, b)).collect();
                    if let Some(b) = control {
                        controls.push((0, b));
                    }
                    PrepStep::Gate1 { target: target + 1, controls, gate: gate.clone() }
                }
                PrepStep::Diagonal { phases } => {
                    let phases = (0..dim)
                        .map(|idx| {
                            let anc = (idx >> self.n) as u8;
                            match control {
                                Some(b) if anc != b => ONE,
                                _ => phases[idx & mask],
                            }
                        })
                        .collect();
                    PrepStep::Diagonal { phases }
                }
            })
            .collect();
        PrepCircuit { n, steps }
    }
}

/// Circuit preparing |0> (x) (alpha |psi> + beta |phi>) on n+1 qubits from
/// the circuits preparing the two orthogonal inputs: split the ancilla,
/// build each branch under its ancilla value, then uncompute psi's circuit,
/// fold the ancilla down (the psi branch now reads all-zero, the phi branch
/// cannot), and recompute.
pub fn superpose_orthogonal(
    c_psi: &PrepCircuit,
    c_phi: &PrepCircuit,
    alpha: C,
    beta: C,
) -> Result<PrepCircuit> {
    let n = c_psi.n();
    if c_phi.n() != n {
        return Err(Error::Dimension("input circuits act on different widths".into()));
    }
    if (alpha.norm_sqr() + beta.norm_sqr() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument("|alpha|^2 + |beta|^2 must be 1".into()));
    }
    let psi = c_psi.prepare()?;
    let phi = c_phi.prepare()?;
    let ov = psi.inner(&phi)?.norm();
    if ov > 1e-9 {
        return Err(Error::Precondition(format!(
            "states are not orthogonal: |<psi|phi>| = {ov:.3e}"
        )));
    }
    let split = {
        let e0 = Array1::from_vec(vec![ONE, ZERO]);
        let col = Array1::from_vec(vec![alpha, beta]);
        Unitary::new(linalg::unitary_mapping(&e0, &col)?)?
    };
    let mut steps = vec![PrepStep::Gate1 { target: 0, controls: Vec::new(), gate: split }];
    steps.extend(c_psi.embed_behind_ancilla(Some(0)).steps);
    steps.extend(c_phi.embed_behind_ancilla(Some(1)).steps);
    steps.extend(c_psi.embed_behind_ancilla(None).inverted().steps);
    // Flip the ancilla exactly where some system qubit is set: an
    // unconditional flip, undone again on the all-zero branch.
    steps.push(PrepStep::Gate1 { target: 0, controls: Vec::new(), gate: Unitary::pauli_x() });
    steps.push(PrepStep::Gate1 {
        target: 0,
        controls: (1..=n).map(|q| (q, 0u8)).collect(),
        gate: Unitary::pauli_x(),
    });
    steps.extend(c_psi.embed_behind_ancilla(None).steps);
    PrepCircuit::new(n + 1, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    #[test]
    fn classical_target_compiles_to_one_step() {
        let target = PureState::basis(1, 1).unwrap();
        let prep = PrepCircuit::for_state(&target).unwrap();
        assert_eq!(prep.steps().len(), 1);
        let made = prep.prepare().unwrap();
        assert!((made.overlap_sq(&target).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_target_matches_hadamard_layer() {
        let target = PureState::uniform(3).unwrap();
        let prep = PrepCircuit::for_state(&target).unwrap();
        let made = prep.prepare().unwrap();
        let mut expect = PureState::zero(3).unwrap();
        for q in 0..3 {
            expect = expect.apply_1q(&Unitary::hadamard(), q).unwrap();
        }
        assert!((made.overlap_sq(&expect).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn random_targets_reproduced() {
        let mut rng = Stream::from_seed(301);
        for _ in 0..100 {
            let target = PureState::random(3, &mut rng).unwrap();
            let prep = PrepCircuit::for_state(&target).unwrap();
            let made = prep.prepare().unwrap();
            assert!((made.overlap_sq(&target).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn sparse_targets_skip_dead_branches() {
        // Support on two of sixteen indices: the tree has exactly one live
        // split per level plus the rotations steering dead suffixes, all of
        // which are skipped.
        let mut amps = Array1::from_elem(16, ZERO);
        amps[3] = C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[12] = C::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
        let target = PureState::new(4, amps).unwrap();
        let prep = PrepCircuit::for_state(&target).unwrap();
        // One split at level 0, then one forced rotation per branch per
        // level, plus the phase pass.
        assert!(prep.steps().len() <= 8, "{} steps", prep.steps().len());
        let made = prep.prepare().unwrap();
        assert!((made.overlap_sq(&target).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn unprepare_inverts_prepare() {
        let mut rng = Stream::from_seed(307);
        let target = PureState::random(4, &mut rng).unwrap();
        let prep = PrepCircuit::for_state(&target).unwrap();
        let back = prep.unprepare(&target).unwrap();
        assert!((back.amp(0).norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn superposition_is_trivial_for_unit_alpha() {
        let mut rng = Stream::from_seed(311);
        let psi = PureState::random(2, &mut rng).unwrap();
        let mut phi = PureState::random(2, &mut rng).unwrap();
        // Orthogonalize phi against psi.
        let ov = psi.inner(&phi).unwrap();
        let amps = phi.amps() - &psi.amps().mapv(|z| z * ov);
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        phi = PureState::new(2, amps.mapv(|z| z / C::new(norm, 0.0))).unwrap();

        let cp = PrepCircuit::for_state(&psi).unwrap();
        let cq = PrepCircuit::for_state(&phi).unwrap();
        let combined = superpose_orthogonal(&cp, &cq, ONE, ZERO).unwrap();
        let out = combined.prepare().unwrap();
        let expect = PureState::basis(1, 0).unwrap().tensor(&psi).unwrap();
        assert!((out.overlap_sq(&expect).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bell_pair_from_computational_circuits() {
        let c00 = PrepCircuit::for_state(&PureState::basis(2, 0).unwrap()).unwrap();
        let c11 = PrepCircuit::for_state(&PureState::basis(2, 3).unwrap()).unwrap();
        let w = C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let combined = superpose_orthogonal(&c00, &c11, w, w).unwrap();
        let out = combined.prepare().unwrap();
        assert!((out.amp(0).re - w.re).abs() < 1e-9);
        assert!((out.amp(3).re - w.re).abs() < 1e-9);
        assert!(out.amp(1).norm() < 1e-9 && out.amp(2).norm() < 1e-9);
    }

    #[test]
    fn random_orthogonal_pairs_with_random_weights() {
        let mut rng = Stream::from_seed(313);
        for _ in 0..100 {
            let psi = PureState::random(3, &mut rng).unwrap();
            let raw = PureState::random(3, &mut rng).unwrap();
            let ov = psi.inner(&raw).unwrap();
            let amps = raw.amps() - &psi.amps().mapv(|z| z * ov);
            let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let phi = PureState::new(3, amps.mapv(|z| z / C::new(norm, 0.0))).unwrap();

            let t = rng.uniform() * std::f64::consts::FRAC_PI_2;
            let ph = rng.uniform() * std::f64::consts::TAU;
            let alpha = C::new(t.cos(), 0.0);
            let beta = C::from_polar(t.sin(), ph);

            let combined = superpose_orthogonal(
                &PrepCircuit::for_state(&psi).unwrap(),
                &PrepCircuit::for_state(&phi).unwrap(),
                alpha,
                beta,
            )
            .unwrap();
            let out = combined.prepare().unwrap();
            let mut expect_amps = Array1::from_elem(8, ZERO);
            for i in 0..8 {
                expect_amps[i] = alpha * psi.amp(i) + beta * phi.amp(i);
            }
            let expect =
                PureState::basis(1, 0).unwrap().tensor(&PureState::new(3, expect_amps).unwrap()).unwrap();
            assert!((out.overlap_sq(&expect).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_overlapping_inputs() {
        let a = PrepCircuit::for_state(&PureState::zero(1).unwrap()).unwrap();
        let b = PrepCircuit::for_state(
            &PureState::zero(1).unwrap().apply_1q(&Unitary::hadamard(), 0).unwrap(),
        )
        .unwrap();
        let w = C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        assert!(superpose_orthogonal(&a, &b, w, w).is_err());
    }

    #[test]
    fn rejects_unnormalized_weights() {
        let a = PrepCircuit::for_state(&PureState::basis(1, 0).unwrap()).unwrap();
        let b = PrepCircuit::for_state(&PureState::basis(1, 1).unwrap()).unwrap();
        assert!(superpose_orthogonal(&a, &b, ONE, ONE).is_err());
    }
}
