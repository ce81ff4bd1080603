//! Complex matrix helpers shared by the simulator.
//!
//! Storage and arithmetic are ndarray; the one spectral primitive used
//! everywhere (trace distance, fidelity, PSD checks, purification, channel
//! decomposition) is the cyclic Jacobi eigensolver below, so every caller
//! inherits identical tolerance semantics.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rng::Stream;

pub type C = Complex64;

pub const ZERO: C = C::new(0.0, 0.0);
pub const ONE: C = C::new(1.0, 0.0);

pub fn identity(dim: usize) -> Array2<C> {
    Array2::from_diag_elem(dim, ONE)
}

pub fn dagger(a: &Array2<C>) -> Array2<C> {
    a.t().mapv(|z| z.conj())
}

pub fn trace(a: &Array2<C>) -> C {
    a.diag().sum()
}

pub fn frobenius(a: &Array2<C>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &Array2<C>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Kronecker product, `a`'s indices most significant.
pub fn kron(a: &Array2<C>, b: &Array2<C>) -> Array2<C> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::from_elem((ar * br, ac * bc), ZERO);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Conjugate-linear in the first argument.
pub fn cdot(a: &Array1<C>, b: &Array1<C>) -> C {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm2(a: &Array1<C>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// |a><b| as a matrix.
pub fn outer(a: &Array1<C>, b: &Array1<C>) -> Array2<C> {
    let mut out = Array2::from_elem((a.len(), b.len()), ZERO);
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[(i, j)] = a[i] * b[j].conj();
        }
    }
    out
}

pub fn is_hermitian(a: &Array2<C>, tol: f64) -> bool {
    if a.nrows() != a.ncols() {
        return false;
    }
    for i in 0..a.nrows() {
        for j in i..a.ncols() {
            if (a[(i, j)] - a[(j, i)].conj()).norm() > tol {
                return false;
            }
        }
    }
    true
}

pub fn is_unitary(a: &Array2<C>, tol: f64) -> bool {
    if a.nrows() != a.ncols() {
        return false;
    }
    let gram = dagger(a).dot(a);
    max_abs(&(&gram - &identity(a.nrows()))) <= tol
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Returns eigenvalues ascending with matching orthonormal
/// eigenvector columns; each column's largest entry is made real positive so
/// repeated runs agree bit for bit.
///
/// The input is symmetrized first, so callers may pass matrices carrying
/// Hermiticity drift up to their own validated tolerance.
pub fn hermitian_eig(a: &Array2<C>) -> Result<(Vec<f64>, Array2<C>)> {
    let d = a.nrows();
    if a.ncols() != d {
        return Err(Error::Dimension(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            d,
            a.ncols()
        )));
    }
    if d == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }

    let mut m = a.clone();
    for i in 0..d {
        for j in 0..d {
            let h = 0.5 * (a[(i, j)] + a[(j, i)].conj());
            m[(i, j)] = h;
        }
    }
    let mut q = identity(d);

    let scale = frobenius(&m).max(1.0);
    let tol = 1e-13 * scale;
    let skip = tol / (2.0 * d as f64);

    let mut converged = false;
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..d {
            for r in (p + 1)..d {
                off += m[(p, r)].norm_sqr();
            }
        }
        if (2.0 * off).sqrt() <= tol {
            converged = true;
            break;
        }
        let mut rotated = false;
        for p in 0..d.saturating_sub(1) {
            for r in (p + 1)..d {
                let apr = m[(p, r)];
                let mag = apr.norm();
                if mag <= skip {
                    continue;
                }
                rotated = true;
                let phi = apr.arg();
                let app = m[(p, p)].re;
                let arr = m[(r, r)].re;
                let theta = 0.5 * (2.0 * mag).atan2(app - arr);
                let (s, c) = theta.sin_cos();
                let eip = C::from_polar(1.0, phi);
                let eim = eip.conj();

                // Columns: new_p = c*col_p + s*e^{-i phi}*col_r,
                //          new_r = -s*e^{i phi}*col_p + c*col_r.
                for k in 0..d {
                    let mkp = m[(k, p)];
                    let mkr = m[(k, r)];
                    m[(k, p)] = c * mkp + s * eim * mkr;
                    m[(k, r)] = -s * eip * mkp + c * mkr;
                }
                // Rows: conjugate transform.
                for k in 0..d {
                    let mpk = m[(p, k)];
                    let mrk = m[(r, k)];
                    m[(p, k)] = c * mpk + s * eip * mrk;
                    m[(r, k)] = -s * eim * mpk + c * mrk;
                }
                for k in 0..d {
                    let qkp = q[(k, p)];
                    let qkr = q[(k, r)];
                    q[(k, p)] = c * qkp + s * eim * qkr;
                    q[(k, r)] = -s * eip * qkp + c * qkr;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Eigen(format!("Jacobi sweeps exhausted at dim {d}")));
    }

    let mut order: Vec<usize> = (0..d).collect();
    let evals: Vec<f64> = (0..d).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| evals[i].partial_cmp(&evals[j]).unwrap());

    let mut values = Vec::with_capacity(d);
    let mut vectors = Array2::from_elem((d, d), ZERO);
    for (slot, &src) in order.iter().enumerate() {
        values.push(evals[src]);
        let mut best = 0usize;
        let mut best_mag = -1.0;
        for k in 0..d {
            let mag = q[(k, src)].norm();
            if mag > best_mag {
                best_mag = mag;
                best = k;
            }
        }
        let phase = if best_mag > 0.0 { q[(best, src)] / C::from_polar(best_mag, 0.0) } else { ONE };
        let fix = phase.conj() / phase.norm().max(1e-300);
        for k in 0..d {
            vectors[(k, slot)] = q[(k, src)] * fix;
        }
    }
    Ok((values, vectors))
}

/// Hermitian square root with the shared clip rule: eigenvalues in
/// [-neg_tol, 0) are treated as zero, anything below -neg_tol is an error.
pub fn sqrt_psd(a: &Array2<C>, neg_tol: f64) -> Result<Array2<C>> {
    let (vals, vecs) = hermitian_eig(a)?;
    let mut out = Array2::from_elem(a.dim(), ZERO);
    for (i, &v) in vals.iter().enumerate() {
        if v < -neg_tol {
            return Err(Error::InvalidState(format!(
                "matrix is not positive semidefinite: eigenvalue {v:e}"
            )));
        }
        let root = v.max(0.0).sqrt();
        if root == 0.0 {
            continue;
        }
        let col = vecs.column(i);
        for r in 0..a.nrows() {
            for c in 0..a.ncols() {
                out[(r, c)] += C::from_polar(root, 0.0) * col[r] * col[c].conj();
            }
        }
    }
    Ok(out)
}

/// Haar-random unitary: Ginibre sample followed by Gram-Schmidt with the
/// standard phase fix.
pub fn random_unitary(dim: usize, rng: &mut Stream) -> Array2<C> {
    let mut cols: Vec<Array1<C>> = Vec::with_capacity(dim);
    for _ in 0..dim {
        let raw = Array1::from_iter((0..dim).map(|_| C::new(rng.gaussian(), rng.gaussian())));
        cols.push(raw);
    }
    let mut q: Vec<Array1<C>> = Vec::with_capacity(dim);
    for (j, mut v) in cols.into_iter().enumerate() {
        // Two orthogonalization passes keep loss of orthogonality near eps.
        for _ in 0..2 {
            for u in &q {
                let coef = cdot(u, &v);
                v = &v - &u.mapv(|z| z * coef);
            }
        }
        let n = norm2(&v);
        debug_assert!(n > 1e-12, "Ginibre column {j} degenerate");
        q.push(v.mapv(|z| z / C::from_polar(n, 0.0)));
    }
    let mut out = Array2::from_elem((dim, dim), ZERO);
    for (j, col) in q.iter().enumerate() {
        for i in 0..dim {
            out[(i, j)] = col[i];
        }
    }
    out
}

/// Deterministic unitary with `U from = to` for unit vectors.
/// Completes each vector to an orthonormal basis over the standard basis and
/// maps basis to basis.
pub fn unitary_mapping(from: &Array1<C>, to: &Array1<C>) -> Result<Array2<C>> {
    let d = from.len();
    if to.len() != d {
        return Err(Error::Dimension("unitary_mapping: vector lengths differ".into()));
    }
    for (name, v) in [("from", from), ("to", to)] {
        if (norm2(v) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("unitary_mapping: {name} is not unit norm")));
        }
    }
    let basis_a = complete_basis(from);
    let basis_b = complete_basis(to);
    let mut u = Array2::from_elem((d, d), ZERO);
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                u[(i, j)] += basis_b[(i, k)] * basis_a[(j, k)].conj();
            }
        }
    }
    Ok(u)
}

/// Orthonormal columns, first column equal to `first`.
fn complete_basis(first: &Array1<C>) -> Array2<C> {
    let d = first.len();
    let mut cols: Vec<Array1<C>> = vec![first.clone()];
    let mut e = 0usize;
    while cols.len() < d {
        let mut v = Array1::from_elem(d, ZERO);
        v[e] = ONE;
        e += 1;
        for _ in 0..2 {
            for u in &cols {
                let coef = cdot(u, &v);
                v = &v - &u.mapv(|z| z * coef);
            }
        }
        let n = norm2(&v);
        if n > 1e-8 {
            cols.push(v.mapv(|z| z / C::from_polar(n, 0.0)));
        }
        debug_assert!(e <= d, "basis completion ran out of candidates");
    }
    let mut out = Array2::from_elem((d, d), ZERO);
    for (j, col) in cols.iter().enumerate() {
        for i in 0..d {
            out[(i, j)] = col[i];
        }
    }
    out
}
