//! Reversible black-box functions with query accounting.

use std::cell::Cell;
use std::fmt::Write as _;

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::linalg::ZERO;
use crate::sim::index::{check_targets, qubit_bit};
use crate::sim::PureState;

/// Truth table for f: {0,1}^in_bits -> {0,1}^out_bits, applied reversibly.
/// Every application, classical or quantum, bumps the query counter.
#[derive(Clone, Debug)]
pub struct BooleanOracle {
    in_bits: usize,
    out_bits: usize,
    table: Vec<usize>,
    queries: Cell<u64>,
}

impl BooleanOracle {
    pub fn new(in_bits: usize, out_bits: usize, table: Vec<usize>) -> Result<Self> {
        if in_bits == 0 || in_bits > crate::MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "oracle input width {in_bits} outside 1..={}",
                crate::MAX_QUBITS
            )));
        }
        if out_bits == 0 || out_bits > crate::MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "oracle output width {out_bits} outside 1..={}",
                crate::MAX_QUBITS
            )));
        }
        if table.len() != 1 << in_bits {
            return Err(Error::Dimension(format!(
                "truth table needs {} entries, got {}",
                1usize << in_bits,
                table.len()
            )));
        }
        if let Some(bad) = table.iter().find(|&&y| y >= 1 << out_bits) {
            return Err(Error::InvalidArgument(format!(
                "table value {bad} does not fit in {out_bits} output bits"
            )));
        }
        Ok(BooleanOracle { in_bits, out_bits, table, queries: Cell::new(0) })
    }

    pub fn from_fn(
        in_bits: usize,
        out_bits: usize,
        f: impl Fn(usize) -> usize,
    ) -> Result<Self> {
        let table = (0..1usize << in_bits).map(f).collect();
        Self::new(in_bits, out_bits, table)
    }

    pub fn in_bits(&self) -> usize {
        self.in_bits
    }

    pub fn out_bits(&self) -> usize {
        self.out_bits
    }

    pub fn queries(&self) -> u64 {
        self.queries.get()
    }

    pub fn reset_queries(&self) {
        self.queries.set(0);
    }

    fn bump(&self) {
        self.queries.set(self.queries.get() + 1);
    }

    /// One classical evaluation.
    pub fn classical(&self, x: usize) -> Result<usize> {
        if x >= 1 << self.in_bits {
            return Err(Error::InvalidArgument(format!("input {x} out of range")));
        }
        self.bump();
        Ok(self.table[x])
    }

    /// |x>|y> -> |x>|y XOR f(x)> on the given input/output qubit lists
    /// (each list most-significant-first). One query.
    pub fn apply_xor(
        &self,
        psi: &PureState,
        inputs: &[usize],
        outputs: &[usize],
    ) -> Result<PureState> {
        if inputs.len() != self.in_bits || outputs.len() != self.out_bits {
            return Err(Error::Dimension(format!(
                "oracle is {}->{} bits, wired to {} inputs and {} outputs",
                self.in_bits,
                self.out_bits,
                inputs.len(),
                outputs.len()
            )));
        }
        let mut all = inputs.to_vec();
        all.extend_from_slice(outputs);
        check_targets(psi.n(), &all)?;
        let n = psi.n();
        let in_strides: Vec<usize> = inputs.iter().map(|&q| 1usize << qubit_bit(n, q)).collect();
        let out_strides: Vec<usize> =
            outputs.iter().map(|&q| 1usize << qubit_bit(n, q)).collect();
        let mut amps = Array1::from_elem(psi.dim(), ZERO);
        for (idx, a) in psi.amps().iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            let mut x = 0usize;
            for (j, &s) in in_strides.iter().enumerate() {
                if idx & s != 0 {
                    x |= 1 << (self.in_bits - 1 - j);
                }
            }
            let y = self.table[x];
            let mut idx2 = idx;
            for (j, &s) in out_strides.iter().enumerate() {
                if (y >> (self.out_bits - 1 - j)) & 1 == 1 {
                    idx2 ^= s;
                }
            }
            amps[idx2] = *a;
        }
        self.bump();
        Ok(PureState::from_normalized(n, amps))
    }

    /// |x> -> (-1)^{f(x)} |x> for single-output oracles. One query.
    pub fn apply_phase(&self, psi: &PureState, inputs: &[usize]) -> Result<PureState> {
        if self.out_bits != 1 {
            return Err(Error::InvalidArgument(
                "phase application needs a single-bit oracle".into(),
            ));
        }
        if inputs.len() != self.in_bits {
            return Err(Error::Dimension("input wiring width mismatch".into()));
        }
        check_targets(psi.n(), inputs)?;
        let n = psi.n();
        let in_strides: Vec<usize> = inputs.iter().map(|&q| 1usize << qubit_bit(n, q)).collect();
        let mut amps = psi.amps().clone();
        for (idx, a) in amps.iter_mut().enumerate() {
            let mut x = 0usize;
            for (j, &s) in in_strides.iter().enumerate() {
                if idx & s != 0 {
                    x |= 1 << (self.in_bits - 1 - j);
                }
            }
            if self.table[x] == 1 {
                *a = -*a;
            }
        }
        self.bump();
        Ok(PureState::from_normalized(n, amps))
    }

    /// Text form: header line `oracle <in> <out>`, then one `input output`
    /// pair per line in binary, inputs in ascending order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "oracle {} {}", self.in_bits, self.out_bits);
        for (x, &y) in self.table.iter().enumerate() {
            let _ = writeln!(
                s,
                "{:0in$b} {:0out$b}",
                x,
                y,
                in = self.in_bits,
                out = self.out_bits
            );
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty oracle text".into()))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("oracle") {
            return Err(Error::Parse("oracle text must start with 'oracle <in> <out>'".into()));
        }
        let in_bits: usize = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse("bad input width in oracle header".into()))?;
        let out_bits: usize = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse("bad output width in oracle header".into()))?;
        if in_bits == 0 || in_bits > crate::MAX_QUBITS {
            return Err(Error::Parse(format!("oracle input width {in_bits} out of range")));
        }
        let mut table = vec![None; 1 << in_bits];
        for line in lines {
            let mut cols = line.split_whitespace();
            let (Some(xs), Some(ys)) = (cols.next(), cols.next()) else {
                return Err(Error::Parse(format!("malformed table row: {line:?}")));
            };
            let x = usize::from_str_radix(xs, 2)
                .map_err(|_| Error::Parse(format!("bad input bits {xs:?}")))?;
            let y = usize::from_str_radix(ys, 2)
                .map_err(|_| Error::Parse(format!("bad output bits {ys:?}")))?;
            if x >= table.len() {
                return Err(Error::Parse(format!("input {xs} out of range")));
            }
            if table[x].is_some() {
                return Err(Error::Parse(format!("duplicate row for input {xs}")));
            }
            table[x] = Some(y);
        }
        let table: Option<Vec<usize>> = table.into_iter().collect();
        let table = table.ok_or_else(|| Error::Parse("truth table has missing rows".into()))?;
        Self::new(in_bits, out_bits, table)
    }
}
