//! Seedable, splittable randomness.
//!
//! Every stochastic operation in the crate takes an explicit [`Stream`].
//! Streams are ChaCha12 generators; children derived with [`Stream::split`]
//! or [`Stream::substream`] are statistically independent of the parent and
//! of each other, so trial loops can fan out across threads while keeping
//! results identical to the sequential run.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// Environment variable consulted for the default seed.
pub const SEED_ENV_VAR: &str = "QMONEY_SEED";

/// Seed used when `QMONEY_SEED` is unset.
pub const DEFAULT_SEED: u64 = 0x5eed;

const SPLIT_STREAM_TAG: u64 = 0x9d8b_36f1;

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One independent randomness stream.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha12Rng,
    base: u64,
    children: u64,
}

impl Stream {
    pub fn from_seed(seed: u64) -> Self {
        Stream { rng: ChaCha12Rng::seed_from_u64(seed), base: seed, children: 0 }
    }

    /// Stream seeded from `QMONEY_SEED`, or [`DEFAULT_SEED`] when unset.
    /// The value may be decimal or 0x-prefixed hex.
    pub fn from_env() -> Result<Self> {
        Ok(Self::from_seed(seed_from_env()?))
    }

    /// Sequential child stream; the parent advances so successive splits
    /// differ.
    pub fn split(&mut self) -> Stream {
        self.children += 1;
        self.substream(SPLIT_STREAM_TAG.wrapping_add(self.children))
    }

    /// Deterministic child stream as a pure function of (parent seed, index).
    /// Safe to hand to per-trial workers in any order.
    pub fn substream(&self, index: u64) -> Stream {
        let child = splitmix64(self.base ^ splitmix64(index));
        Stream::from_seed(child)
    }

    /// Uniform f64 in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        // 53 random mantissa bits.
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, bound). `bound` must be nonzero.
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        // Rejection sampling on the top range to avoid modulo bias.
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let raw = self.next_u64();
            if raw < zone {
                return raw % bound;
            }
        }
    }

    /// Fair coin.
    pub fn bit(&mut self) -> u8 {
        (self.next_u64() >> 63) as u8
    }

    /// Standard normal via Box-Muller.
    pub fn gaussian(&mut self) -> f64 {
        let u = loop {
            let u = self.uniform();
            if u > 0.0 {
                break u;
            }
        };
        let v = self.uniform();
        (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
    }

    /// Bernoulli(p) draw.
    pub fn chance(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Uniform random permutation of 0..len.
    pub fn permutation(&mut self, len: usize) -> Vec<usize> {
        let mut v: Vec<usize> = (0..len).collect();
        for i in 0..len.saturating_sub(1) {
            let j = i + self.below((len - i) as u64) as usize;
            v.swap(i, j);
        }
        v
    }
}

impl RngCore for Stream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}

/// The seed `QMONEY_SEED` names, or [`DEFAULT_SEED`] when unset. Callers
/// that echo the seed (the CLI) need the value, not just a stream.
pub fn seed_from_env() -> Result<u64> {
    match std::env::var(SEED_ENV_VAR) {
        Ok(text) => parse_seed(&text),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_SEED),
        Err(e) => Err(Error::Parse(format!("{SEED_ENV_VAR}: {e}"))),
    }
}

fn parse_seed(text: &str) -> Result<u64> {
    let t = text.trim();
    let parsed = if let Some(hex) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16)
    } else {
        t.parse::<u64>()
    };
    parsed.map_err(|_| Error::Parse(format!("seed {t:?} is not a u64")))
}
