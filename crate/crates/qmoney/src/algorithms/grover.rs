//! Unstructured search and the amplitude-rotation toolkit built on it.

use std::f64::consts::FRAC_PI_2;

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::linalg::C;
use crate::oracle::BooleanOracle;
use crate::rng::Stream;
use crate::sim::{PureState, Unitary};

/// Iteration count floor((pi/4) sqrt(N/M)).
pub fn grover_iterations(n_items: usize, marked: usize) -> usize {
    debug_assert!(marked >= 1 && marked <= n_items);
    (std::f64::consts::FRAC_PI_4 * (n_items as f64 / marked as f64).sqrt()).floor() as usize
}

/// sin^2((2k+1) theta) with theta = arcsin sqrt(M/N).
pub fn grover_success_probability(n_items: usize, marked: usize, iterations: usize) -> f64 {
    let theta = (marked as f64 / n_items as f64).sqrt().min(1.0).asin();
    ((2 * iterations + 1) as f64 * theta).sin().powi(2)
}

#[derive(Clone, Copy, Debug)]
pub struct GroverOutcome {
    pub measured: usize,
    /// Confirmed marked by one classical query after the quantum pass.
    pub hit: bool,
    pub iterations: usize,
}

/// One full search pass over a single-output oracle: prepare the uniform
/// state, run floor((pi/4) sqrt(N/M)) phase-flip plus diffusion rounds,
/// measure, and classically confirm. Spends `iterations + 1` oracle queries.
///
/// `marked` is the number of inputs mapping to 1; in this laboratory the
/// caller always knows it (it fixes the iteration count, nothing else).
pub fn grover_search(
    oracle: &BooleanOracle,
    marked: usize,
    rng: &mut Stream,
) -> Result<GroverOutcome> {
    if oracle.out_bits() != 1 {
        return Err(Error::InvalidArgument("search needs a single-bit oracle".into()));
    }
    let n = oracle.in_bits();
    let n_items = 1usize << n;
    if marked == 0 || marked > n_items {
        return Err(Error::NoMarkedItem { iterations: 0 });
    }
    let iterations = grover_iterations(n_items, marked);
    let targets: Vec<usize> = (0..n).collect();
    let uniform = PureState::uniform(n)?;
    let diffusion = Unitary::reflection_about(uniform.amps())?;
    let mut state = uniform;
    for _ in 0..iterations {
        state = oracle.apply_phase(&state, &targets)?;
        // reflection_about is I - 2|s><s| = -D; the sign is a global phase.
        state = state.apply(&diffusion, &targets)?;
    }
    let (bits, _) = state.measure(&targets, rng)?;
    let measured = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
    let hit = oracle.classical(measured)? == 1;
    Ok(GroverOutcome { measured, hit, iterations })
}

/// `rounds` iterations of the two-reflection rotation: reflect about the
/// target, reflect about the entry state, negate. Each round turns the state
/// by 2 arcsin |<target|entry>| toward the target inside their span.
pub fn amplitude_amplify(
    state: &PureState,
    target: &PureState,
    entry: &PureState,
    rounds: usize,
) -> Result<PureState> {
    if state.n() != target.n() || state.n() != entry.n() {
        return Err(Error::Dimension("amplification registers must match".into()));
    }
    let r_target = Unitary::reflection_about(target.amps())?;
    let r_entry = Unitary::reflection_about(entry.amps())?;
    let all: Vec<usize> = (0..state.n()).collect();
    let mut cur = state.clone();
    for _ in 0..rounds {
        cur = cur.apply(&r_target, &all)?;
        cur = cur.apply(&r_entry, &all)?;
        let negated = cur.amps().mapv(|z| -z);
        cur = PureState::new(state.n(), negated)?;
    }
    Ok(cur)
}

/// Rounds that bring (2k+1) theta closest to pi/2.
pub fn restoration_rounds(overlap: f64) -> usize {
    let theta = overlap.clamp(0.0, 1.0).asin();
    if theta <= 0.0 {
        return 0;
    }
    (((FRAC_PI_2 - theta) / (2.0 * theta)).round() as i64).max(0) as usize
}

fn project_out(state: &PureState, axis: &PureState) -> Result<Option<PureState>> {
    let c = axis.inner(state)?;
    let mut amps: Array1<C> = state.amps().clone();
    for (a, t) in amps.iter_mut().zip(axis.amps().iter()) {
        *a -= c * t;
    }
    let norm = crate::linalg::norm2(&amps);
    if norm < 1e-9 {
        return Ok(None);
    }
    amps.mapv_inplace(|z| z / C::new(norm, 0.0));
    Ok(Some(PureState::from_normalized(state.n(), amps)))
}

/// Drive `damaged` back onto `target` with the attacker's own reflections.
///
/// Plan: rotate by the best whole number of amplification rounds, then check
/// with the projective measurement {|t><t|, rest}. A hit collapses exactly
/// onto the target. A miss leaves the state orthogonal to the target, where
/// rotation is useless; from there we bounce between the projectors onto the
/// round's entry state and the target until a hit. The bounce is what saves
/// the half-overlap case, where every odd multiple of theta = pi/4 is as far
/// from pi/2 as the last and plain rotation never converges.
///
/// Returns the restored state (exactly `target`) and the number of
/// elementary steps (rotations and projective checks) spent.
pub fn restore_to(
    damaged: &PureState,
    target: &PureState,
    rng: &mut Stream,
) -> Result<(PureState, usize)> {
    if damaged.n() != target.n() {
        return Err(Error::Dimension("restoration registers must match".into()));
    }
    let ov0 = target.inner(damaged)?.norm().clamp(0.0, 1.0);
    let theta0 = ov0.asin();
    let budget = 64usize.max((10.0 / theta0.max(1e-3)).ceil() as usize);
    let mut spent = 0usize;
    let mut state = damaged.clone();
    while spent < budget {
        let anchor = state.clone();
        let ov = target.inner(&state)?.norm().clamp(0.0, 1.0);
        if ov > 1e-9 {
            let k = restoration_rounds(ov).min(budget - spent);
            if k > 0 {
                state = amplitude_amplify(&state, target, &anchor, k)?;
                spent += k;
            }
        }
        // Projective check against the target.
        spent += 1;
        let p_hit = target.inner(&state)?.norm_sqr().clamp(0.0, 1.0);
        if rng.chance(p_hit) {
            return Ok((target.clone(), spent));
        }
        state = match project_out(&state, target)? {
            Some(s) => s,
            None => return Ok((target.clone(), spent)),
        };
        // Bounce off the anchor to re-establish overlap with the target.
        spent += 1;
        let p_back = anchor.inner(&state)?.norm_sqr().clamp(0.0, 1.0);
        if rng.chance(p_back) {
            state = anchor;
        } else if let Some(s) = project_out(&state, &anchor)? {
            state = s;
        }
    }
    Err(Error::RestorationStalled { iterations: spent })
}

#[derive(Clone, Debug)]
pub struct MeasureRestore {
    /// 0 if the state collapsed inside the projector, 1 for the complement.
    pub outcome: u8,
    /// The state after restoration.
    pub state: PureState,
    /// Elementary restoration steps spent; 0 when the measurement already
    /// commuted with the state.
    pub iterations: usize,
}

/// Measure {P, I-P} on `state`, then pull the collapsed state back to the
/// original using only the supplied reflection (the attacker's whole
/// toolkit). The reflection must be about the state's dominant component;
/// the restored state is checked against the original to 1e-6.
pub fn measure_and_restore(
    state: &PureState,
    projector: &ndarray::Array2<C>,
    reflect_target: &Unitary,
    rng: &mut Stream,
) -> Result<MeasureRestore> {
    let dim = state.dim();
    if projector.nrows() != dim || projector.ncols() != dim {
        return Err(Error::Dimension("projector does not fit the register".into()));
    }
    if !crate::linalg::is_hermitian(projector, 1e-9) {
        return Err(Error::InvalidState("measurement operator is not Hermitian".into()));
    }
    // Idempotence check that exploits sparsity: P^2 accumulated column by
    // column over the nonzero entries, so a diagonal projector costs
    // O(dim^2) instead of a dense dim^3 multiply.
    let mut idem_ok = true;
    'cols: for j in 0..dim {
        let mut col = vec![C::new(0.0, 0.0); dim];
        for k in 0..dim {
            let w = projector[(k, j)];
            if w != C::new(0.0, 0.0) {
                for (i, c) in col.iter_mut().enumerate() {
                    *c += projector[(i, k)] * w;
                }
            }
        }
        for i in 0..dim {
            if (col[i] - projector[(i, j)]).norm() > 1e-9 {
                idem_ok = false;
                break 'cols;
            }
        }
    }
    if !idem_ok {
        return Err(Error::InvalidState("measurement operator is not a projector".into()));
    }
    // Recover the reflection's axis: (I - R)/2 must be a rank-one projector.
    if reflect_target.dim() != dim {
        return Err(Error::Dimension("reflection does not fit the register".into()));
    }
    let mut axis_op = crate::linalg::identity(dim);
    axis_op -= reflect_target.mat();
    axis_op.mapv_inplace(|z| z * C::new(0.5, 0.0));
    // (I - R)/2 must be |t><t|. Column j of that projector is t scaled by
    // conj(t_j), so the heaviest column, renormalized, recovers the axis in
    // O(dim^2); the outer-product comparison then certifies rank one.
    let col_norms: Vec<f64> = (0..dim)
        .map(|j| axis_op.column(j).iter().map(|z| z.norm_sqr()).sum())
        .collect();
    let heaviest = col_norms
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(j, _)| j)
        .expect("dim > 0");
    if col_norms[heaviest] < 1e-12 {
        return Err(Error::Precondition(
            "reflection is not about a single pure state".into(),
        ));
    }
    let scale = C::new(col_norms[heaviest].sqrt(), 0.0);
    let axis: Array1<C> = axis_op.column(heaviest).mapv(|z| z / scale);
    let residual = &axis_op - &crate::linalg::outer(&axis, &axis);
    if crate::linalg::max_abs(&residual) > 1e-9 {
        return Err(Error::Precondition(
            "reflection is not about a single pure state".into(),
        ));
    }
    let target = PureState::from_normalized(state.n(), axis);

    let inside = projector.dot(state.amps());
    let p0: f64 = inside.iter().map(|z| z.norm_sqr()).sum::<f64>().clamp(0.0, 1.0);
    let (outcome, collapsed) = if rng.chance(p0) {
        let norm = C::new(p0.sqrt(), 0.0);
        (0u8, PureState::from_normalized(state.n(), inside.mapv(|z| z / norm)))
    } else {
        let mut outside: Array1<C> = state.amps().clone();
        outside -= &inside;
        let norm = C::new((1.0 - p0).max(f64::MIN_POSITIVE).sqrt(), 0.0);
        (1u8, PureState::from_normalized(state.n(), outside.mapv(|z| z / norm)))
    };

    if collapsed.overlap_sq(state)? >= 1.0 - 1e-6 {
        return Ok(MeasureRestore { outcome, state: collapsed, iterations: 0 });
    }
    let (restored, iterations) = restore_to(&collapsed, &target, rng)?;
    if restored.overlap_sq(state)? < 1.0 - 1e-6 {
        return Err(Error::Precondition(
            "reflection target is misaligned with the measured state".into(),
        ));
    }
    Ok(MeasureRestore { outcome, state: restored, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iteration_count_and_success_formula() {
        assert_eq!(grover_iterations(1024, 1), 25);
        let p = grover_success_probability(1024, 1, 25);
        assert!(p > 0.999, "p = {p}");
        // One marked item out of four: a single iteration is exact.
        assert_eq!(grover_iterations(4, 1), 1);
        assert!((grover_success_probability(4, 1, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn search_finds_the_unique_marked_item() {
        let mut rng = Stream::from_seed(101);
        let winner = 0xB7usize;
        let oracle = BooleanOracle::from_fn(8, 1, |x| usize::from(x == winner)).unwrap();
        let mut hits = 0;
        for _ in 0..20 {
            let out = grover_search(&oracle, 1, &mut rng).unwrap();
            if out.hit {
                assert_eq!(out.measured, winner);
                hits += 1;
            }
        }
        assert!(hits >= 19, "only {hits}/20 searches succeeded");
    }

    #[test]
    fn search_query_accounting() {
        let mut rng = Stream::from_seed(103);
        let oracle = BooleanOracle::from_fn(6, 1, |x| usize::from(x == 5)).unwrap();
        let out = grover_search(&oracle, 1, &mut rng).unwrap();
        assert_eq!(oracle.queries(), out.iterations as u64 + 1);
    }

    #[test]
    fn four_items_single_iteration_is_deterministic() {
        let mut rng = Stream::from_seed(107);
        let oracle = BooleanOracle::from_fn(2, 1, |x| usize::from(x == 2)).unwrap();
        for _ in 0..25 {
            let out = grover_search(&oracle, 1, &mut rng).unwrap();
            assert!(out.hit);
            assert_eq!(out.measured, 2);
        }
    }

    #[test]
    fn no_marked_items_is_an_error() {
        let mut rng = Stream::from_seed(109);
        let oracle = BooleanOracle::from_fn(3, 1, |_| 0).unwrap();
        assert!(matches!(
            grover_search(&oracle, 0, &mut rng),
            Err(Error::NoMarkedItem { .. })
        ));
    }

    #[test]
    fn amplification_matches_the_rotation_formula() {
        let n = 4;
        let entry = PureState::uniform(n).unwrap();
        let target = PureState::basis(n, 3).unwrap();
        let theta = (1.0f64 / 4.0).asin();
        for k in 0..5usize {
            let out = amplitude_amplify(&entry, &target, &entry, k).unwrap();
            let got = out.overlap_sq(&target).unwrap();
            let want = ((2 * k + 1) as f64 * theta).sin().powi(2);
            assert!((got - want).abs() < 1e-10, "k={k}: {got} vs {want}");
        }
    }

    #[test]
    fn restoration_after_partial_measurement() {
        let mut rng = Stream::from_seed(113);
        for trial in 0..30 {
            let psi = PureState::random(4, &mut rng).unwrap();
            let (_, collapsed) = psi.measure(&[1], &mut rng).unwrap();
            let (restored, steps) = restore_to(&collapsed, &psi, &mut rng).unwrap();
            assert!(
                (restored.overlap_sq(&psi).unwrap() - 1.0).abs() < 1e-12,
                "trial {trial} restored imperfectly"
            );
            assert!(steps <= 64, "trial {trial} took {steps} steps");
        }
    }

    #[test]
    fn restoration_survives_the_half_overlap_grid() {
        // |<0|+>|^2 = 1/2: rotation alone oscillates forever, the projector
        // bounce must finish the job.
        let mut rng = Stream::from_seed(127);
        let plus = PureState::zero(1).unwrap().apply_1q(&Unitary::hadamard(), 0).unwrap();
        let zero = PureState::zero(1).unwrap();
        for _ in 0..100 {
            let (restored, _) = restore_to(&zero, &plus, &mut rng).unwrap();
            assert!((restored.overlap_sq(&plus).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn restoration_from_orthogonal_stalls() {
        let mut rng = Stream::from_seed(131);
        let zero = PureState::zero(1).unwrap();
        let one = PureState::basis(1, 1).unwrap();
        assert!(matches!(
            restore_to(&one, &zero, &mut rng),
            Err(Error::RestorationStalled { .. })
        ));
    }

    fn diagonal_projector(n: usize, keep: impl Fn(usize) -> bool) -> ndarray::Array2<C> {
        let dim = 1usize << n;
        let mut p = ndarray::Array2::from_elem((dim, dim), C::new(0.0, 0.0));
        for x in 0..dim {
            if keep(x) {
                p[(x, x)] = C::new(1.0, 0.0);
            }
        }
        p
    }

    #[test]
    fn commuting_measurement_needs_no_restoration() {
        let mut rng = Stream::from_seed(137);
        let state = PureState::basis(3, 5).unwrap();
        let proj = diagonal_projector(3, |x| x & 1 == 1);
        let refl = Unitary::reflection_about(state.amps()).unwrap();
        for _ in 0..10 {
            let out = measure_and_restore(&state, &proj, &refl, &mut rng).unwrap();
            assert_eq!(out.outcome, 0);
            assert_eq!(out.iterations, 0);
            assert!((out.state.overlap_sq(&state).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn disturbing_measurement_is_undone() {
        let mut rng = Stream::from_seed(139);
        let state = PureState::uniform(3).unwrap();
        // Keeps half the support: either outcome damages the state.
        let proj = diagonal_projector(3, |x| x < 4);
        let refl = Unitary::reflection_about(state.amps()).unwrap();
        for _ in 0..50 {
            let out = measure_and_restore(&state, &proj, &refl, &mut rng).unwrap();
            assert!(out.iterations > 0);
            assert!(out.state.overlap_sq(&state).unwrap() >= 1.0 - 1e-6);
        }
    }

    #[test]
    fn rejects_non_projector_measurements() {
        let mut rng = Stream::from_seed(149);
        let state = PureState::uniform(2).unwrap();
        let mut bad = diagonal_projector(2, |x| x == 0);
        bad[(0, 0)] = C::new(0.5, 0.0);
        let refl = Unitary::reflection_about(state.amps()).unwrap();
        assert!(measure_and_restore(&state, &bad, &refl, &mut rng).is_err());
    }

    #[test]
    fn rejects_reflections_about_mixed_subspaces() {
        let mut rng = Stream::from_seed(151);
        let state = PureState::uniform(2).unwrap();
        let proj = diagonal_projector(2, |x| x < 2);
        // Reflection about a two-dimensional subspace, not a state.
        let mut refl = crate::linalg::identity(4);
        refl[(2, 2)] = C::new(-1.0, 0.0);
        refl[(3, 3)] = C::new(-1.0, 0.0);
        let refl = Unitary::new(refl).unwrap();
        assert!(matches!(
            measure_and_restore(&state, &proj, &refl, &mut rng),
            Err(Error::Precondition(_))
        ));
    }
}
