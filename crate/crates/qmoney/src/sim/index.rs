//! Basis-index bookkeeping.
//!
//! Qubit 0 carries the most significant bit of a basis index: for an n-qubit
//! register, qubit q owns index bit (n-1-q). Sub-register values follow the
//! same rule over their target list, so targets[0] is the most significant
//! bit of a gathered sub-index.

use crate::error::{Error, Result};

pub(crate) fn qubit_bit(n: usize, qubit: usize) -> usize {
    debug_assert!(qubit < n);
    n - 1 - qubit
}

/// Targets must be distinct and in range; order is meaningful.
pub(crate) fn check_targets(n: usize, targets: &[usize]) -> Result<()> {
    if targets.is_empty() {
        return Err(Error::InvalidArgument("empty target list".into()));
    }
    for (i, &t) in targets.iter().enumerate() {
        if t >= n {
            return Err(Error::InvalidArgument(format!(
                "target qubit {t} out of range for {n}-qubit register"
            )));
        }
        if targets[i + 1..].contains(&t) {
            return Err(Error::InvalidArgument(format!("duplicate target qubit {t}")));
        }
    }
    Ok(())
}

/// Index masks for one embedded-operator pass: `strides[j]` is the index
/// weight of targets[j], `env_bases` enumerates every assignment of the
/// non-target qubits (already positioned in the full index).
pub(crate) struct Embedding {
    pub strides: Vec<usize>,
    pub env_bases: Vec<usize>,
}

pub(crate) fn embedding(n: usize, targets: &[usize]) -> Embedding {
    let strides: Vec<usize> = targets.iter().map(|&t| 1usize << qubit_bit(n, t)).collect();
    let others: Vec<usize> =
        (0..n).filter(|q| !targets.contains(q)).map(|q| 1usize << qubit_bit(n, q)).collect();
    let mut env_bases = Vec::with_capacity(1usize << others.len());
    for mask in 0..(1usize << others.len()) {
        let mut base = 0usize;
        for (k, stride) in others.iter().enumerate() {
            if (mask >> k) & 1 == 1 {
                base |= stride;
            }
        }
        env_bases.push(base);
    }
    env_bases.sort_unstable();
    Embedding { strides, env_bases }
}

/// Full index for a sub-register value at the given targets (env bits zero).
pub(crate) fn spread(sub: usize, strides: &[usize]) -> usize {
    let t = strides.len();
    let mut idx = 0usize;
    for (j, stride) in strides.iter().enumerate() {
        if (sub >> (t - 1 - j)) & 1 == 1 {
            idx |= stride;
        }
    }
    idx
}

/// Sub-register value read out of a full index.
pub(crate) fn collect(index: usize, strides: &[usize]) -> usize {
    let t = strides.len();
    let mut sub = 0usize;
    for (j, stride) in strides.iter().enumerate() {
        if index & stride != 0 {
            sub |= 1usize << (t - 1 - j);
        }
    }
    sub
}
