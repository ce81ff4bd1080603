//! Vectors and subspaces over F_2.
//!
//! Text form is little-endian: component 0 is the first character, so
//! "110" is the vector with components (1, 1, 0). Subspace bases are kept in
//! reduced row echelon form with strictly increasing pivot positions, which
//! makes basis equality a plain bitwise comparison.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Packed bit vector in F_2^n.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VecF2 {
    n: usize,
    limbs: Vec<u64>,
}

impl VecF2 {
    pub fn zero(n: usize) -> Self {
        VecF2 { n, limbs: vec![0; n.div_ceil(64).max(1)] }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = VecF2::zero(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            debug_assert!(b <= 1);
            v.set(i, b);
        }
        v
    }

    /// Component j of the result is index bit (n-1-j), matching the
    /// simulator's convention that qubit 0 carries the most significant
    /// basis-index bit.
    pub fn from_index(n: usize, index: u64) -> Self {
        debug_assert!(n <= 64);
        let mut v = VecF2::zero(n);
        for j in 0..n {
            v.set(j, ((index >> (n - 1 - j)) & 1) as u8);
        }
        v
    }

    /// Inverse of [`VecF2::from_index`].
    pub fn to_index(&self) -> u64 {
        debug_assert!(self.n <= 64);
        let mut idx = 0u64;
        for j in 0..self.n {
            idx |= (self.get(j) as u64) << (self.n - 1 - j);
        }
        idx
    }

    pub fn random(n: usize, rng: &mut Stream) -> Self {
        let mut v = VecF2::zero(n);
        for limb in v.limbs.iter_mut() {
            *limb = rng.next_u64();
        }
        v.mask_tail();
        v
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize) -> u8 {
        debug_assert!(i < self.n);
        ((self.limbs[i / 64] >> (i % 64)) & 1) as u8
    }

    pub fn set(&mut self, i: usize, bit: u8) {
        debug_assert!(i < self.n);
        let limb = &mut self.limbs[i / 64];
        if bit & 1 == 1 {
            *limb |= 1u64 << (i % 64);
        } else {
            *limb &= !(1u64 << (i % 64));
        }
    }

    pub fn xor_assign(&mut self, other: &VecF2) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.limbs.iter_mut().zip(other.limbs.iter()) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &VecF2) -> VecF2 {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn dot(&self, other: &VecF2) -> u8 {
        debug_assert_eq!(self.n, other.n);
        let mut acc = 0u32;
        for (a, b) in self.limbs.iter().zip(other.limbs.iter()) {
            acc ^= (a & b).count_ones() & 1;
        }
        (acc & 1) as u8
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }

    /// Lowest set component, if any.
    pub fn leading_one(&self) -> Option<usize> {
        for (k, &limb) in self.limbs.iter().enumerate() {
            if limb != 0 {
                return Some(k * 64 + limb.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn weight(&self) -> usize {
        self.limbs.iter().map(|l| l.count_ones() as usize).sum()
    }

    fn mask_tail(&mut self) {
        let used = self.n % 64;
        if used != 0 {
            if let Some(last) = self.limbs.last_mut() {
                *last &= (1u64 << used) - 1;
            }
        }
        if self.n == 0 {
            for l in self.limbs.iter_mut() {
                *l = 0;
            }
        }
    }
}

impl fmt::Display for VecF2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            write!(f, "{}", self.get(i))?;
        }
        Ok(())
    }
}

impl fmt::Debug for VecF2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VecF2({self})")
    }
}

impl FromStr for VecF2 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut v = VecF2::zero(s.len());
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => v.set(i, 1),
                other => return Err(Error::Parse(format!("bad F2 digit {other:?}"))),
            }
        }
        Ok(v)
    }
}

/// Subspace of F_2^n held as a canonical RREF basis.
#[derive(Clone, PartialEq, Eq)]
pub struct SubspaceF2 {
    n: usize,
    rows: Vec<VecF2>,
}

impl SubspaceF2 {
    pub fn trivial(n: usize) -> Self {
        SubspaceF2 { n, rows: Vec::new() }
    }

    pub fn full(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                let mut v = VecF2::zero(n);
                v.set(i, 1);
                v
            })
            .collect();
        SubspaceF2 { n, rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Canonical basis rows, pivots strictly increasing.
    pub fn basis(&self) -> &[VecF2] {
        &self.rows
    }

    /// Membership by reduction against the canonical basis.
    pub fn member(&self, v: &VecF2) -> Result<bool> {
        if v.n() != self.n {
            return Err(Error::Dimension(format!(
                "membership test: vector lives in F_2^{}, subspace in F_2^{}",
                v.n(),
                self.n
            )));
        }
        let mut w = v.clone();
        for row in &self.rows {
            let p = row.leading_one().expect("canonical rows are nonzero");
            if w.get(p) == 1 {
                w.xor_assign(row);
            }
        }
        Ok(w.is_zero())
    }

    /// Orthogonal complement. An involution: `s.dual().dual() == s`.
    pub fn dual(&self) -> SubspaceF2 {
        solve_orthogonal(self.n, &self.rows)
    }

    /// All 2^dim elements, ordered by combination index over the canonical
    /// basis. Callers keep dim small; guarded at 24.
    pub fn enumerate(&self) -> Vec<VecF2> {
        assert!(self.dim() <= 24, "refusing to enumerate 2^{} elements", self.dim());
        let mut out = Vec::with_capacity(1usize << self.dim());
        for combo in 0..(1u32 << self.dim()) {
            let mut v = VecF2::zero(self.n);
            for (j, row) in self.rows.iter().enumerate() {
                if (combo >> j) & 1 == 1 {
                    v.xor_assign(row);
                }
            }
            out.push(v);
        }
        out
    }

    /// Uniform random element.
    pub fn sample(&self, rng: &mut Stream) -> VecF2 {
        let mut v = VecF2::zero(self.n);
        for row in &self.rows {
            if rng.bit() == 1 {
                v.xor_assign(row);
            }
        }
        v
    }

    /// Basis of the full space whose first `dim` vectors are this subspace's
    /// canonical rows, completed with unit vectors at the non-pivot
    /// positions.
    pub fn complete_to_full_basis(&self) -> Vec<VecF2> {
        let pivots: Vec<usize> =
            self.rows.iter().map(|r| r.leading_one().expect("nonzero")).collect();
        let mut out = self.rows.clone();
        for i in 0..self.n {
            if !pivots.contains(&i) {
                let mut v = VecF2::zero(self.n);
                v.set(i, 1);
                out.push(v);
            }
        }
        debug_assert_eq!(out.len(), self.n);
        out
    }
}

impl fmt::Debug for SubspaceF2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SubspaceF2(n={}, dim={}, rows=[", self.n, self.dim())?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, "])")
    }
}

/// Gaussian elimination to the canonical RREF basis.
pub fn row_reduce(n: usize, vectors: &[VecF2]) -> Result<SubspaceF2> {
    for v in vectors {
        if v.n() != n {
            return Err(Error::Dimension(format!(
                "row_reduce: vector lives in F_2^{}, ambient is F_2^{n}",
                v.n()
            )));
        }
    }
    let mut rows: Vec<VecF2> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for row in &rows {
            let p = row.leading_one().unwrap();
            if w.get(p) == 1 {
                w.xor_assign(row);
            }
        }
        if !w.is_zero() {
            rows.push(w);
        }
    }
    rows.sort_by_key(|r| r.leading_one().unwrap());
    // Back-substitute so each pivot column is zero in every other row.
    for i in (0..rows.len()).rev() {
        let lower = rows[i].clone();
        let p = lower.leading_one().unwrap();
        for row in rows.iter_mut().take(i) {
            if row.get(p) == 1 {
                row.xor_assign(&lower);
            }
        }
    }
    Ok(SubspaceF2 { n, rows })
}

/// Null space of the sample matrix: all v with `s . v = 0` for every sample.
pub fn solve_orthogonal(n: usize, samples: &[VecF2]) -> SubspaceF2 {
    let reduced = row_reduce(n, samples).expect("samples validated by caller");
    let pivots: Vec<usize> =
        reduced.rows.iter().map(|r| r.leading_one().expect("nonzero")).collect();
    let mut rows = Vec::new();
    for free in 0..n {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = VecF2::zero(n);
        v.set(free, 1);
        for (row, &p) in reduced.rows.iter().zip(pivots.iter()) {
            if row.get(free) == 1 {
                v.set(p, 1);
            }
        }
        rows.push(v);
    }
    row_reduce(n, &rows).expect("dimensions consistent")
}

/// Uniform random subspace of the given dimension, by rejection: sample
/// `dim` vectors until they are independent.
pub fn random_subspace(n: usize, dim: usize, rng: &mut Stream) -> Result<SubspaceF2> {
    if dim > n {
        return Err(Error::InvalidArgument(format!(
            "random_subspace: dim {dim} exceeds ambient {n}"
        )));
    }
    loop {
        let draws: Vec<VecF2> = (0..dim).map(|_| VecF2::random(n, rng)).collect();
        let sub = row_reduce(n, &draws)?;
        if sub.dim() == dim {
            return Ok(sub);
        }
    }
}

/// Columns of the inverse of the linear map given by `cols` (map sends unit
/// vector e_k to cols[k]). None when the map is singular.
pub fn invert_linear_map(cols: &[VecF2]) -> Option<Vec<VecF2>> {
    let n = cols.len();
    if n == 0 || cols.iter().any(|c| c.n() != n) {
        return None;
    }
    // Augmented elimination on rows of [M^T | I]; row ops on M^T mirror the
    // column structure of M.
    let mut left: Vec<VecF2> = cols.to_vec();
    let mut right: Vec<VecF2> = (0..n)
        .map(|i| {
            let mut v = VecF2::zero(n);
            v.set(i, 1);
            v
        })
        .collect();
    let mut rank = 0usize;
    for col in 0..n {
        let pivot = (rank..n).find(|&r| left[r].get(col) == 1)?;
        left.swap(rank, pivot);
        right.swap(rank, pivot);
        for r in 0..n {
            if r != rank && left[r].get(col) == 1 {
                let (l, rr) = (left[rank].clone(), right[rank].clone());
                left[r].xor_assign(&l);
                right[r].xor_assign(&rr);
            }
        }
        rank += 1;
    }
    // left is now the identity and right holds (M^T)^{-1} = (M^{-1})^T as
    // rows; row i of that transpose is column i of the inverse.
    Some(right)
}

/// Apply the linear map given by columns to v.
pub fn apply_linear_map(cols: &[VecF2], v: &VecF2) -> VecF2 {
    let n = cols.len();
    debug_assert_eq!(v.n(), n);
    let mut out = VecF2::zero(n);
    for (k, col) in cols.iter().enumerate() {
        if v.get(k) == 1 {
            out.xor_assign(col);
        }
    }
    out
}
