use ndarray::Array1;

use crate::error::{Error, Result};
use crate::linalg::{self, C, ONE, ZERO};
use crate::rng::Stream;
use crate::sim::index::{check_targets, collect, embedding, qubit_bit, spread};
use crate::sim::unitary::Unitary;
use crate::MAX_QUBITS;

pub const NORM_TOL: f64 = 1e-10;

/// Dense n-qubit state vector, 1 <= n <= 20, unit norm within 1e-10.
/// Basis index convention: qubit 0 is the most significant index bit.
#[derive(Clone, Debug)]
pub struct PureState {
    n: usize,
    amps: Array1<C>,
}

impl PureState {
    pub fn new(n: usize, amps: Array1<C>) -> Result<Self> {
        check_qubit_count(n)?;
        if amps.len() != 1 << n {
            return Err(Error::Dimension(format!(
                "{n}-qubit state needs {} amplitudes, got {}",
                1 << n,
                amps.len()
            )));
        }
        let norm = linalg::norm2(&amps);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "state norm {norm} is outside 1 +/- 1e-10"
            )));
        }
        Ok(PureState { n, amps })
    }

    /// |index> in the computational basis.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_qubit_count(n)?;
        if index >= 1 << n {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        let mut amps = Array1::from_elem(1 << n, ZERO);
        amps[index] = ONE;
        Ok(PureState { n, amps })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    /// Uniform superposition over all basis states.
    pub fn uniform(n: usize) -> Result<Self> {
        check_qubit_count(n)?;
        let dim = 1usize << n;
        let a = C::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(PureState { n, amps: Array1::from_elem(dim, a) })
    }

    /// Haar-random pure state.
    pub fn random(n: usize, rng: &mut Stream) -> Result<Self> {
        check_qubit_count(n)?;
        let mut amps =
            Array1::from_iter((0..1usize << n).map(|_| C::new(rng.gaussian(), rng.gaussian())));
        let norm = linalg::norm2(&amps);
        amps.mapv_inplace(|z| z / C::from_polar(norm, 0.0));
        Ok(PureState { n, amps })
    }

    pub(crate) fn from_normalized(n: usize, amps: Array1<C>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n);
        debug_assert!((linalg::norm2(&amps) - 1.0).abs() < 1e-8);
        PureState { n, amps }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &Array1<C> {
        &self.amps
    }

    pub fn amp(&self, index: usize) -> C {
        self.amps[index]
    }

    /// Joint register with `self`'s qubits first (most significant).
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let n = self.n + other.n;
        check_qubit_count(n)?;
        let mut amps = Array1::from_elem(1 << n, ZERO);
        for (i, a) in self.amps.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            for (j, b) in other.amps.iter().enumerate() {
                amps[(i << other.n) | j] = a * b;
            }
        }
        Ok(PureState { n, amps })
    }

    /// <self|other>, conjugate-linear in `self`.
    pub fn inner(&self, other: &PureState) -> Result<C> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "inner product of {}-qubit and {}-qubit states",
                self.n, other.n
            )));
        }
        Ok(linalg::cdot(&self.amps, &other.amps))
    }

    /// |<self|other>|^2.
    pub fn overlap_sq(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Apply `u` to the listed qubits; targets[0] is the most significant
    /// bit of u's input space. Norm is re-checked after the pass.
    pub fn apply(&self, u: &Unitary, targets: &[usize]) -> Result<PureState> {
        check_targets(self.n, targets)?;
        if u.dim() != 1 << targets.len() {
            return Err(Error::Dimension(format!(
                "{}-dim unitary applied to {} target qubits",
                u.dim(),
                targets.len()
            )));
        }
        let emb = embedding(self.n, targets);
        let sub_dim = u.dim();
        let mut amps = self.amps.clone();
        let mut gathered = vec![ZERO; sub_dim];
        let mut image = vec![ZERO; sub_dim];
        let offsets: Vec<usize> = (0..sub_dim).map(|s| spread(s, &emb.strides)).collect();
        let um = u.mat();
        for &base in &emb.env_bases {
            for s in 0..sub_dim {
                gathered[s] = amps[base | offsets[s]];
            }
            for (r, img) in image.iter_mut().enumerate() {
                let mut acc = ZERO;
                for (s, g) in gathered.iter().enumerate() {
                    acc += um[(r, s)] * g;
                }
                *img = acc;
            }
            for (s, img) in image.iter().enumerate() {
                amps[base | offsets[s]] = *img;
            }
        }
        let norm = linalg::norm2(&amps);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "unitary application drifted norm to {norm}"
            )));
        }
        Ok(PureState { n: self.n, amps })
    }

    /// Single-qubit gate shorthand.
    pub fn apply_1q(&self, u: &Unitary, qubit: usize) -> Result<PureState> {
        self.apply(u, &[qubit])
    }

    /// Probability of reading `outcome` (bits aligned with `targets`) in the
    /// computational basis.
    pub fn probability(&self, targets: &[usize], outcome: &[u8]) -> Result<f64> {
        check_targets(self.n, targets)?;
        if outcome.len() != targets.len() {
            return Err(Error::Dimension("outcome length != target count".into()));
        }
        let strides: Vec<usize> =
            targets.iter().map(|&t| 1usize << qubit_bit(self.n, t)).collect();
        let want: usize = outcome
            .iter()
            .enumerate()
            .map(|(j, &b)| ((b & 1) as usize) << (targets.len() - 1 - j))
            .sum();
        let mut p = 0.0;
        for (idx, a) in self.amps.iter().enumerate() {
            if collect(idx, &strides) == want {
                p += a.norm_sqr();
            }
        }
        Ok(p)
    }

    /// Projective measurement of the listed qubits in the computational
    /// basis. Returns outcome bits aligned with `targets` and the collapsed
    /// state.
    pub fn measure(&self, targets: &[usize], rng: &mut Stream) -> Result<(Vec<u8>, PureState)> {
        check_targets(self.n, targets)?;
        let t = targets.len();
        let strides: Vec<usize> =
            targets.iter().map(|&q| 1usize << qubit_bit(self.n, q)).collect();
        let mut probs = vec![0.0f64; 1 << t];
        for (idx, a) in self.amps.iter().enumerate() {
            probs[collect(idx, &strides)] += a.norm_sqr();
        }
        let draw = rng.uniform();
        let mut acc = 0.0;
        let mut outcome = (1usize << t) - 1;
        for (o, &p) in probs.iter().enumerate() {
            acc += p;
            if draw < acc {
                outcome = o;
                break;
            }
        }
        // Guard against landing on a zero-probability tail through rounding.
        while probs[outcome] <= 0.0 {
            outcome = outcome.checked_sub(1).expect("some outcome has positive probability");
        }
        let scale = C::new(1.0 / probs[outcome].sqrt(), 0.0);
        let mut amps = self.amps.clone();
        for (idx, a) in amps.iter_mut().enumerate() {
            if collect(idx, &strides) == outcome {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        }
        let bits: Vec<u8> =
            (0..t).map(|j| ((outcome >> (t - 1 - j)) & 1) as u8).collect();
        Ok((bits, PureState { n: self.n, amps }))
    }

    /// Reorder qubits: new qubit q is old qubit `new_from_old[q]`.
    pub fn reorder(&self, new_from_old: &[usize]) -> Result<PureState> {
        if new_from_old.len() != self.n {
            return Err(Error::Dimension("permutation length != qubit count".into()));
        }
        check_targets(self.n, new_from_old)?;
        let mut amps = Array1::from_elem(self.amps.len(), ZERO);
        for (idx, a) in self.amps.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            let mut new_idx = 0usize;
            for (new_q, &old_q) in new_from_old.iter().enumerate() {
                let bit = (idx >> qubit_bit(self.n, old_q)) & 1;
                new_idx |= bit << qubit_bit(self.n, new_q);
            }
            amps[new_idx] = *a;
        }
        Ok(PureState { n: self.n, amps })
    }
}

pub(crate) fn check_qubit_count(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("register needs at least one qubit".into()));
    }
    if n > MAX_QUBITS {
        return Err(Error::Capacity { requested: n, max: MAX_QUBITS });
    }
    Ok(())
}

/// Outcome of the controlled-swap style overlap test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OverlapOutcome {
    Plus,
    Minus,
}

/// Interference test between two states of equal width: prepares
/// (|0>|a> + |1>|b>)/sqrt(2), Hadamards the control, measures it.
/// Pr[Plus] = (1 + Re<a|b>)/2.
pub fn overlap_test(a: &PureState, b: &PureState, rng: &mut Stream) -> Result<OverlapOutcome> {
    if a.n() != b.n() {
        return Err(Error::Dimension("overlap test needs equal widths".into()));
    }
    check_qubit_count(a.n() + 1)?;
    let half = 1usize << a.n();
    let mut amps = Array1::from_elem(2 * half, ZERO);
    let w = C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    for i in 0..half {
        amps[i] = w * a.amp(i);
        amps[half + i] = w * b.amp(i);
    }
    let joint = PureState::new(a.n() + 1, amps)?;
    let rotated = joint.apply_1q(&Unitary::hadamard(), 0)?;
    let (bits, _) = rotated.measure(&[0], rng)?;
    Ok(if bits[0] == 0 { OverlapOutcome::Plus } else { OverlapOutcome::Minus })
}
