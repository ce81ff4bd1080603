//! Optimizing a one-qubit-in, two-qubits-out channel against the note
//! verifier: maximize the average probability that BOTH output copies pass
//! when the input is a uniformly random cell state.
//!
//! The channel is represented by its Choi matrix J (8x8, input factor on
//! top), over which the objective is linear: Tr[J G] with a fixed gradient
//! G. Ascent projects each step back onto the completely positive trace
//! preserving set by alternating a PSD eigenvalue clip with the orthogonal
//! correction onto the trace-preservation plane.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::{self, C, ZERO};
use crate::money::note::Cell;
use crate::sim::Superoperator;

const DIM_IN: usize = 2;
const DIM_OUT: usize = 4;
const DIM_CHOI: usize = DIM_IN * DIM_OUT;

/// J = sum_ij |i><j| (x) Lambda(|i><j|), built from Kraus terms.
pub fn choi_from_kraus(kraus: &[Array2<C>]) -> Array2<C> {
    let mut j = Array2::from_elem((DIM_CHOI, DIM_CHOI), ZERO);
    for k in kraus {
        for i in 0..DIM_IN {
            for jj in 0..DIM_IN {
                for a in 0..DIM_OUT {
                    for b in 0..DIM_OUT {
                        j[(i * DIM_OUT + a, jj * DIM_OUT + b)] += k[(a, i)] * k[(b, jj)].conj();
                    }
                }
            }
        }
    }
    j
}

/// Trace over the output factor; trace preservation says this equals I_2.
pub fn trace_out_output(j: &Array2<C>) -> Array2<C> {
    let mut t = Array2::from_elem((DIM_IN, DIM_IN), ZERO);
    for i in 0..DIM_IN {
        for jj in 0..DIM_IN {
            for a in 0..DIM_OUT {
                t[(i, jj)] += j[(i * DIM_OUT + a, jj * DIM_OUT + a)];
            }
        }
    }
    t
}

/// Lambda(rho) = Tr_in[(rho^T (x) I) J].
pub fn apply_choi(j: &Array2<C>, rho: &Array2<C>) -> Array2<C> {
    let mut out = Array2::from_elem((DIM_OUT, DIM_OUT), ZERO);
    for a in 0..DIM_OUT {
        for b in 0..DIM_OUT {
            let mut acc = ZERO;
            for i in 0..DIM_IN {
                for jj in 0..DIM_IN {
                    acc += rho[(jj, i)] * j[(i * DIM_OUT + a, jj * DIM_OUT + b)];
                }
            }
            out[(a, b)] = acc;
        }
    }
    out
}

/// (|c><c|)^T (x) |cc><cc| for one cell: the operator whose overlap with J
/// is the both-copies-pass probability on that cell.
pub fn pass_operator(cell: Cell) -> Array2<C> {
    let theta = cell.state();
    let single = linalg::outer(theta.amps(), theta.amps());
    let double_state = theta.tensor(&theta).expect("two qubits fit");
    let double = linalg::outer(double_state.amps(), double_state.amps());
    linalg::kron(&single.t().to_owned(), &double)
}

/// The objective gradient: average of the four pass operators.
pub fn objective_gradient() -> Array2<C> {
    let mut g = Array2::from_elem((DIM_CHOI, DIM_CHOI), ZERO);
    for cell in Cell::ALL {
        g += &pass_operator(cell);
    }
    g.mapv_inplace(|z| z * C::new(0.25, 0.0));
    g
}

fn objective_of(j: &Array2<C>) -> f64 {
    linalg::trace(&j.dot(&objective_gradient())).re
}

fn per_cell_of(j: &Array2<C>) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (slot, cell) in Cell::ALL.iter().enumerate() {
        out[slot] = linalg::trace(&j.dot(&pass_operator(*cell))).re;
    }
    out
}

/// Alternate the PSD clip and the trace-preservation correction until both
/// residuals are at or below `tol`.
fn project_cptp(j: &Array2<C>, tol: f64, cap: usize) -> Result<Array2<C>> {
    let mut cur = j.mapv(|z| z * C::new(0.5, 0.0)) + linalg::dagger(j).mapv(|z| z * C::new(0.5, 0.0));
    let eye_in = linalg::identity(DIM_IN);
    let quarter_eye_out = {
        let mut m = linalg::identity(DIM_OUT);
        m.mapv_inplace(|z| z * C::new(0.25, 0.0));
        m
    };
    for _ in 0..cap {
        let (eigs, vecs) = linalg::hermitian_eig(&cur)?;
        let psd_residual = -eigs.first().copied().unwrap_or(0.0).min(0.0);
        if psd_residual > 0.0 {
            let mut rebuilt = Array2::from_elem((DIM_CHOI, DIM_CHOI), ZERO);
            for (k, &l) in eigs.iter().enumerate() {
                if l <= 0.0 {
                    continue;
                }
                let v = vecs.column(k);
                for r in 0..DIM_CHOI {
                    for c in 0..DIM_CHOI {
                        rebuilt[(r, c)] += C::new(l, 0.0) * v[r] * v[c].conj();
                    }
                }
            }
            cur = rebuilt;
        }
        let mut defect = eye_in.clone();
        defect -= &trace_out_output(&cur);
        let tp_residual = linalg::max_abs(&defect);
        if tp_residual > 0.0 {
            cur += &linalg::kron(&defect, &quarter_eye_out);
        }
        if psd_residual <= tol && tp_residual <= tol {
            return Ok(cur);
        }
    }
    Err(Error::NonConvergence(format!(
        "channel projection failed to reach tolerance {tol:e} in {cap} rounds"
    )))
}

/// A concrete cloning channel with its scorecard.
#[derive(Clone, Debug)]
pub struct CloneChannel {
    choi: Array2<C>,
    channel: Superoperator,
    objective: f64,
    per_cell: [f64; 4],
    iterations: usize,
}

impl CloneChannel {
    /// Validate a Choi matrix and package it with Kraus form and scores.
    /// `iterations` is bookkeeping for optimizer outputs; hand-built
    /// channels pass 0.
    pub fn from_choi(choi: Array2<C>, iterations: usize) -> Result<Self> {
        if choi.nrows() != DIM_CHOI || choi.ncols() != DIM_CHOI {
            return Err(Error::Dimension("cloner Choi matrix must be 8x8".into()));
        }
        if !linalg::is_hermitian(&choi, 1e-9) {
            return Err(Error::InvalidState("Choi matrix is not Hermitian".into()));
        }
        let (eigs, vecs) = linalg::hermitian_eig(&choi)?;
        if let Some(&bad) = eigs.iter().find(|&&l| l < -1e-9) {
            return Err(Error::InvalidState(format!(
                "Choi matrix has negative eigenvalue {bad:e}"
            )));
        }
        let mut defect = linalg::identity(DIM_IN);
        defect -= &trace_out_output(&choi);
        if linalg::max_abs(&defect) > 1e-7 {
            return Err(Error::InvalidState(
                "Choi matrix is not trace preserving".into(),
            ));
        }
        // Kraus terms from the eigendecomposition.
        let mut kraus: Vec<Array2<C>> = Vec::new();
        for (k, &l) in eigs.iter().enumerate() {
            if l <= 1e-12 {
                continue;
            }
            let mut term = Array2::from_elem((DIM_OUT, DIM_IN), ZERO);
            let v = vecs.column(k);
            for i in 0..DIM_IN {
                for a in 0..DIM_OUT {
                    term[(a, i)] = C::new(l.sqrt(), 0.0) * v[i * DIM_OUT + a];
                }
            }
            kraus.push(term);
        }
        // Square away residual trace-preservation drift so the channel
        // passes strict validation: K_k <- K_k M^{-1/2}, M = sum K^dag K.
        let mut m = Array2::from_elem((DIM_IN, DIM_IN), ZERO);
        for k in &kraus {
            m += &linalg::dagger(k).dot(k);
        }
        let (m_eigs, m_vecs) = linalg::hermitian_eig(&m)?;
        if m_eigs.iter().any(|&l| l < 1e-6) {
            return Err(Error::InvalidState("Choi matrix is rank deficient on input".into()));
        }
        let mut m_inv_sqrt = Array2::from_elem((DIM_IN, DIM_IN), ZERO);
        for (k, &l) in m_eigs.iter().enumerate() {
            let w = C::new(1.0 / l.sqrt(), 0.0);
            let v = m_vecs.column(k);
            for r in 0..DIM_IN {
                for c in 0..DIM_IN {
                    m_inv_sqrt[(r, c)] += w * v[r] * v[c].conj();
                }
            }
        }
        for k in kraus.iter_mut() {
            *k = k.dot(&m_inv_sqrt);
        }
        let channel = Superoperator::new(kraus.clone())?;
        let exact_choi = choi_from_kraus(&kraus);
        let objective = objective_of(&exact_choi);
        let per_cell = per_cell_of(&exact_choi);
        Ok(CloneChannel { choi: exact_choi, channel, objective, per_cell, iterations })
    }

    pub fn choi(&self) -> &Array2<C> {
        &self.choi
    }

    pub fn channel(&self) -> &Superoperator {
        &self.channel
    }

    /// Mean both-copies-pass probability over the four cells.
    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn per_cell(&self) -> [f64; 4] {
        self.per_cell
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

/// Copy-through-measurement: read the input in the computational basis and
/// emit two copies of what was seen. Scores 1 on computational cells and
/// 1/4 on Hadamard cells: 5/8 on average.
pub fn measure_resend_channel() -> Result<CloneChannel> {
    let mut k0 = Array2::from_elem((DIM_OUT, DIM_IN), ZERO);
    k0[(0, 0)] = C::new(1.0, 0.0); // |0> -> |00>
    let mut k1 = Array2::from_elem((DIM_OUT, DIM_IN), ZERO);
    k1[(3, 1)] = C::new(1.0, 0.0); // |1> -> |11>
    CloneChannel::from_choi(choi_from_kraus(&[k0, k1]), 0)
}

/// Ignore the input entirely and emit two copies of a uniformly random cell.
/// Every cell scores 3/8.
pub fn random_cell_channel() -> Result<CloneChannel> {
    let mut kraus = Vec::new();
    for cell in Cell::ALL {
        let cc = cell.state().tensor(&cell.state()).expect("two qubits fit");
        // One Kraus pair per cell: |cc><0| and |cc><1|, weighted 1/2.
        for basis in 0..DIM_IN {
            let mut k = Array2::from_elem((DIM_OUT, DIM_IN), ZERO);
            for a in 0..DIM_OUT {
                k[(a, basis)] = C::new(0.5, 0.0) * cc.amp(a);
            }
            kraus.push(k);
        }
    }
    CloneChannel::from_choi(choi_from_kraus(&kraus), 0)
}

#[derive(Clone, Debug)]
pub struct CloneOptimization {
    pub channel: CloneChannel,
    /// Objective after each accepted ascent step.
    pub history: Vec<f64>,
}

/// Projected gradient ascent from the fully depolarizing starting point.
/// The objective is linear, so accepted steps increase monotonically toward
/// the optimum; the step size grows gently on success and halves on failure
/// until it collapses.
pub fn optimize_clone_channel(max_iters: usize) -> Result<CloneOptimization> {
    let gradient = objective_gradient();
    let mut j = {
        let mut m = linalg::identity(DIM_CHOI);
        m.mapv_inplace(|z| z * C::new(0.25, 0.0));
        m
    };
    let mut objective = objective_of(&j);
    let mut history = vec![objective];
    let mut eta = 0.5f64;
    let mut iterations = 0usize;
    for _ in 0..max_iters {
        iterations += 1;
        let stepped = &j + &gradient.mapv(|z| z * C::new(eta, 0.0));
        let candidate = project_cptp(&stepped, 1e-9, 4000)?;
        let cand_obj = objective_of(&candidate);
        if cand_obj > objective + 1e-13 {
            j = candidate;
            objective = cand_obj;
            history.push(objective);
            eta = (eta * 1.5).min(4.0);
        } else {
            eta *= 0.5;
            if eta < 1e-8 {
                break;
            }
        }
    }
    let polished = project_cptp(&j, 1e-11, 20_000)?;
    let channel = CloneChannel::from_choi(polished, iterations)?;
    Ok(CloneOptimization { channel, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;
    use crate::sim::{DensityMatrix, PureState};

    #[test]
    fn random_cell_channel_scores_three_eighths() {
        let ch = random_cell_channel().unwrap();
        assert!((ch.objective() - 0.375).abs() < 1e-12, "objective {}", ch.objective());
        for &p in &ch.per_cell() {
            assert!((p - 0.375).abs() < 1e-12);
        }
    }

    #[test]
    fn measure_resend_scores_five_eighths() {
        let ch = measure_resend_channel().unwrap();
        assert!((ch.objective() - 0.625).abs() < 1e-12);
        let per = ch.per_cell();
        assert!((per[0] - 1.0).abs() < 1e-12);
        assert!((per[1] - 1.0).abs() < 1e-12);
        assert!((per[2] - 0.25).abs() < 1e-12);
        assert!((per[3] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn choi_application_matches_kraus_application() {
        let ch = measure_resend_channel().unwrap();
        let mut rng = Stream::from_seed(901);
        for _ in 0..5 {
            let psi = PureState::random(1, &mut rng).unwrap();
            let rho = DensityMatrix::from_pure(&psi);
            let via_choi = apply_choi(ch.choi(), rho.mat());
            let via_kraus = ch.channel().apply(&rho).unwrap();
            let diff = &via_choi - via_kraus.mat();
            assert!(linalg::max_abs(&diff) < 1e-10);
        }
    }

    #[test]
    fn projection_fixes_broken_matrices() {
        // Start from something neither PSD nor trace preserving.
        let mut bad = linalg::identity(DIM_CHOI);
        bad[(0, 0)] = C::new(-0.5, 0.0);
        bad[(7, 7)] = C::new(3.0, 0.0);
        let fixed = project_cptp(&bad, 1e-10, 5000).unwrap();
        let (eigs, _) = linalg::hermitian_eig(&fixed).unwrap();
        assert!(eigs.iter().all(|&l| l >= -1e-10));
        let mut defect = linalg::identity(DIM_IN);
        defect -= &trace_out_output(&fixed);
        assert!(linalg::max_abs(&defect) < 1e-9);
    }

    #[test]
    fn optimizer_reaches_the_known_ceiling() {
        let opt = optimize_clone_channel(300).unwrap();
        let ch = &opt.channel;
        assert!(
            (ch.objective() - 0.75).abs() < 1e-6,
            "objective {} (history tail {:?})",
            ch.objective(),
            &opt.history[opt.history.len().saturating_sub(3)..]
        );
        for &p in &ch.per_cell() {
            assert!((p - 0.75).abs() < 1e-5, "per-cell {p}");
        }
        assert!(opt.history.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }
}
