use ndarray::{array, Array2};

use crate::error::{Error, Result};
use crate::linalg::{self, C, ONE, ZERO};

/// Validated unitary matrix. The check is `max |U†U - I| <= 1e-9` at
/// construction; composition helpers re-validate cheaply only in debug
/// builds since products of validated unitaries stay unitary to working
/// precision.
#[derive(Clone, Debug)]
pub struct Unitary {
    dim: usize,
    mat: Array2<C>,
}

pub const UNITARITY_TOL: f64 = 1e-9;

impl Unitary {
    pub fn new(mat: Array2<C>) -> Result<Self> {
        let dim = mat.nrows();
        if dim == 0 || mat.ncols() != dim {
            return Err(Error::Dimension(format!(
                "unitary must be square and nonempty, got {}x{}",
                dim,
                mat.ncols()
            )));
        }
        if !linalg::is_unitary(&mat, UNITARITY_TOL) {
            return Err(Error::InvalidState("matrix is not unitary within 1e-9".into()));
        }
        Ok(Unitary { dim, mat })
    }

    pub(crate) fn from_trusted(mat: Array2<C>) -> Self {
        debug_assert!(linalg::is_unitary(&mat, 1e-8));
        let dim = mat.nrows();
        Unitary { dim, mat }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of qubits this unitary acts on; errors when the dimension is
    /// not a power of two.
    pub fn qubits(&self) -> Result<usize> {
        if !self.dim.is_power_of_two() {
            return Err(Error::Dimension(format!("dimension {} is not a power of two", self.dim)));
        }
        Ok(self.dim.trailing_zeros() as usize)
    }

    pub fn mat(&self) -> &Array2<C> {
        &self.mat
    }

    pub fn identity(dim: usize) -> Self {
        Unitary { dim, mat: linalg::identity(dim) }
    }

    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Unitary::from_trusted(array![
            [C::new(h, 0.0), C::new(h, 0.0)],
            [C::new(h, 0.0), C::new(-h, 0.0)]
        ])
    }

    pub fn pauli_x() -> Self {
        Unitary::from_trusted(array![[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn pauli_y() -> Self {
        Unitary::from_trusted(array![
            [ZERO, C::new(0.0, -1.0)],
            [C::new(0.0, 1.0), ZERO]
        ])
    }

    pub fn pauli_z() -> Self {
        Unitary::from_trusted(array![[ONE, ZERO], [ZERO, C::new(-1.0, 0.0)]])
    }

    /// diag(1, e^{i phi}).
    pub fn phase(phi: f64) -> Self {
        Unitary::from_trusted(array![[ONE, ZERO], [ZERO, C::from_polar(1.0, phi)]])
    }

    /// Real rotation [[cos, -sin], [sin, cos]].
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Unitary::from_trusted(array![
            [C::new(c, 0.0), C::new(-s, 0.0)],
            [C::new(s, 0.0), C::new(c, 0.0)]
        ])
    }

    /// Two-qubit CNOT; the first (most significant) qubit controls.
    pub fn cnot() -> Self {
        Unitary::pauli_x().controlled()
    }

    /// Control qubit prepended: block diag(I, self).
    pub fn controlled(&self) -> Self {
        let d = self.dim;
        let mut m = linalg::identity(2 * d);
        for i in 0..d {
            for j in 0..d {
                m[(d + i, d + j)] = self.mat[(i, j)];
            }
        }
        Unitary::from_trusted(m)
    }

    /// Permutation unitary: basis state i maps to basis state perm[i].
    pub fn from_permutation(perm: &[usize]) -> Result<Self> {
        let d = perm.len();
        let mut seen = vec![false; d];
        for &p in perm {
            if p >= d || seen[p] {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
            seen[p] = true;
        }
        let mut m = Array2::from_elem((d, d), ZERO);
        for (src, &dst) in perm.iter().enumerate() {
            m[(dst, src)] = ONE;
        }
        Ok(Unitary { dim: d, mat: m })
    }

    /// I - 2|v><v| for a unit vector.
    pub fn reflection_about(amps: &ndarray::Array1<C>) -> Result<Self> {
        if (linalg::norm2(amps) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState("reflection target is not unit norm".into()));
        }
        let mut m = linalg::identity(amps.len());
        let proj = linalg::outer(amps, amps);
        m = &m - &proj.mapv(|z| z * C::new(2.0, 0.0));
        Ok(Unitary { dim: amps.len(), mat: m })
    }

    /// H tensored n times; guarded because it is dense.
    pub fn hadamard_n(n: usize) -> Result<Self> {
        if n == 0 || n > 10 {
            return Err(Error::InvalidArgument(format!(
                "dense n-fold Hadamard limited to 1..=10 qubits, got {n}"
            )));
        }
        let h = Unitary::hadamard();
        let mut m = h.mat.clone();
        for _ in 1..n {
            m = linalg::kron(&m, &h.mat);
        }
        Ok(Unitary { dim: 1 << n, mat: m })
    }

    pub fn kron(&self, other: &Unitary) -> Unitary {
        Unitary { dim: self.dim * other.dim, mat: linalg::kron(&self.mat, &other.mat) }
    }

    pub fn adjoint(&self) -> Unitary {
        Unitary { dim: self.dim, mat: linalg::dagger(&self.mat) }
    }

    /// self then... no: matrix product self * other, i.e. `other` acts first.
    pub fn compose(&self, other: &Unitary) -> Result<Unitary> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!(
                "composition of {}-dim and {}-dim unitaries",
                self.dim, other.dim
            )));
        }
        Ok(Unitary::from_trusted(self.mat.dot(&other.mat)))
    }
}
