use crate::error::{Error, Result};
use crate::linalg::{self};
use crate::sim::density::DensityMatrix;
use crate::sim::pure::PureState;

/// Trace distance (1/2) * sum |eigenvalues(a - b)|. Ranges over [0, 1].
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension("trace distance needs equal dimensions".into()));
    }
    let diff = a.mat() - b.mat();
    let (eigs, _) = linalg::hermitian_eig(&diff)?;
    Ok(0.5 * eigs.iter().map(|e| e.abs()).sum::<f64>())
}

/// Square-root fidelity Tr sqrt(sqrt(a) b sqrt(a)). Equals |<x|y>| on pure
/// states and 1 iff a == b.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension("fidelity needs equal dimensions".into()));
    }
    let sa = linalg::sqrt_psd(a.mat(), 1e-9)?;
    let inner = sa.dot(b.mat()).dot(&sa);
    let (eigs, _) = linalg::hermitian_eig(&inner)?;
    Ok(eigs.iter().map(|&l| l.max(0.0).sqrt()).sum::<f64>().min(1.0))
}

/// |<a|b>| for pure states; agrees with `fidelity` on their projectors.
pub fn fidelity_pure(a: &PureState, b: &PureState) -> Result<f64> {
    Ok(a.inner(b)?.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{C, ZERO};
    use crate::rng::Stream;
    use ndarray::Array1;

    #[test]
    fn identical_states_are_at_distance_zero() {
        let mut rng = Stream::from_seed(31);
        let psi = PureState::random(3, &mut rng).unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        assert!(trace_distance(&rho, &rho).unwrap() < 1e-12);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn orthogonal_pure_states_are_maximally_far() {
        let a = DensityMatrix::from_pure(&PureState::zero(1).unwrap());
        let b = DensityMatrix::from_pure(&PureState::basis(1, 1).unwrap());
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&a, &b).unwrap() < 1e-7);
    }

    #[test]
    fn half_amplitude_overlap_gives_root_three_over_two() {
        // <a|b> = 1/2 on pure states: d = sqrt(1 - 1/4) = sqrt(3)/2, F = 1/2.
        let a = PureState::zero(1).unwrap();
        let amps = Array1::from_vec(vec![C::new(0.5, 0.0), C::new(0.75f64.sqrt(), 0.0)]);
        let b = PureState::new(1, amps).unwrap();
        assert!((fidelity_pure(&a, &b).unwrap() - 0.5).abs() < 1e-12);
        let d = trace_distance(&DensityMatrix::from_pure(&a), &DensityMatrix::from_pure(&b))
            .unwrap();
        assert!((d - 3.0f64.sqrt() / 2.0).abs() < 1e-10);
    }

    #[test]
    fn diagonal_states_reduce_to_half_l1() {
        let mut ma = ndarray::Array2::from_elem((2, 2), ZERO);
        ma[(0, 0)] = C::new(0.9, 0.0);
        ma[(1, 1)] = C::new(0.1, 0.0);
        let mut mb = ndarray::Array2::from_elem((2, 2), ZERO);
        mb[(0, 0)] = C::new(0.4, 0.0);
        mb[(1, 1)] = C::new(0.6, 0.0);
        let a = DensityMatrix::new(1, ma).unwrap();
        let b = DensityMatrix::new(1, mb).unwrap();
        assert!((trace_distance(&a, &b).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fidelity_and_distance_sandwich_each_other() {
        // 1 - F <= d <= sqrt(1 - F^2) on arbitrary pairs.
        let mut rng = Stream::from_seed(37);
        for _ in 0..10 {
            let a = DensityMatrix::from_pure(&PureState::random(3, &mut rng).unwrap())
                .partial_trace(&[0, 1])
                .unwrap();
            let b = DensityMatrix::from_pure(&PureState::random(3, &mut rng).unwrap())
                .partial_trace(&[0, 1])
                .unwrap();
            let d = trace_distance(&a, &b).unwrap();
            let f = fidelity(&a, &b).unwrap();
            assert!(1.0 - f <= d + 1e-9, "lower bound violated: d={d} f={f}");
            assert!(d <= (1.0 - f * f).sqrt() + 1e-9, "upper bound violated: d={d} f={f}");
        }
    }

    #[test]
    fn pure_state_distance_closed_form() {
        // For pure states d = sqrt(1 - |<a|b>|^2) exactly.
        let mut rng = Stream::from_seed(41);
        for _ in 0..10 {
            let a = PureState::random(2, &mut rng).unwrap();
            let b = PureState::random(2, &mut rng).unwrap();
            let ov = a.overlap_sq(&b).unwrap();
            let d = trace_distance(&DensityMatrix::from_pure(&a), &DensityMatrix::from_pure(&b))
                .unwrap();
            assert!((d - (1.0 - ov).sqrt()).abs() < 1e-9);
        }
    }
}
