use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::Result;
use crate::money::note::{BasisString, Cell};
use crate::rng::{splitmix64, Stream};

/// Deterministic keyed map from serials to note keys. Banks that derive keys
/// this way verify statelessly: nothing per note has to be remembered.
pub trait Prf {
    fn derive(&self, serial: u64, n: usize) -> Result<BasisString>;
}

/// Keyed stream-cipher construction standing in for a cryptographic PRF: the
/// 256-bit secret is mixed with the serial and the result keys a ChaCha12
/// stream whose first 2n bits become the cells.
#[derive(Clone)]
pub struct ChaChaPrf {
    key: [u8; 32],
}

impl ChaChaPrf {
    pub fn from_key(key: [u8; 32]) -> Self {
        ChaChaPrf { key }
    }

    pub fn random(rng: &mut Stream) -> Self {
        let mut key = [0u8; 32];
        rng.fill_bytes(&mut key);
        ChaChaPrf { key }
    }

    fn seed_for(&self, serial: u64) -> [u8; 32] {
        // Diffuse the serial through four words and fold them into the key.
        let mut seed = self.key;
        let mut z = serial;
        for chunk in seed.chunks_exact_mut(8) {
            z = splitmix64(z ^ 0xA5A5_5A5A_C3C3_3C3C);
            for (b, k) in z.to_le_bytes().iter().zip(chunk.iter_mut()) {
                *k ^= b;
            }
        }
        seed
    }
}

impl Prf for ChaChaPrf {
    fn derive(&self, serial: u64, n: usize) -> Result<BasisString> {
        let mut stream = ChaCha12Rng::from_seed(self.seed_for(serial));
        let mut cells = Vec::with_capacity(n);
        let mut bits = 0u64;
        let mut level = 0u32;
        for _ in 0..n {
            if level < 2 {
                bits = stream.next_u64();
                level = 64;
            }
            cells.push(Cell::ALL[(bits & 3) as usize]);
            bits >>= 2;
            level -= 2;
        }
        BasisString::new(cells)
    }
}

/// Average fraction of cells that change when one serial bit flips, taken
/// over `serials` random serials and all 64 bit positions. A well-mixed
/// construction sits near 3/4 (independent uniform cells collide with
/// probability 1/4).
pub fn avalanche_fraction(prf: &dyn Prf, n: usize, serials: usize, rng: &mut Stream) -> Result<f64> {
    let mut changed = 0u64;
    let mut total = 0u64;
    for _ in 0..serials {
        let s = rng.next_u64();
        let base = prf.derive(s, n)?;
        for bit in 0..64 {
            let other = prf.derive(s ^ (1u64 << bit), n)?;
            for i in 0..n {
                total += 1;
                if base.cell(i) != other.cell(i) {
                    changed += 1;
                }
            }
        }
    }
    Ok(changed as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivation_is_deterministic() {
        let prf = ChaChaPrf::from_key([7u8; 32]);
        let a = prf.derive(12345, 8).unwrap();
        let b = prf.derive(12345, 8).unwrap();
        assert_eq!(a, b);
        let c = prf.derive(12346, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn different_keys_give_different_streams() {
        let a = ChaChaPrf::from_key([1u8; 32]).derive(1, 16).unwrap();
        let b = ChaChaPrf::from_key([2u8; 32]).derive(1, 16).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn cells_look_uniform() {
        let prf = ChaChaPrf::from_key([9u8; 32]);
        let mut counts = [0u32; 4];
        for serial in 0..500u64 {
            let key = prf.derive(serial, 8).unwrap();
            for i in 0..8 {
                counts[Cell::ALL.iter().position(|&c| c == key.cell(i)).unwrap()] += 1;
            }
        }
        let total: u32 = counts.iter().sum();
        for &c in &counts {
            let freq = c as f64 / total as f64;
            assert!((freq - 0.25).abs() < 0.03, "cell frequency {freq}");
        }
    }

    #[test]
    fn serial_avalanche_is_strong() {
        let mut rng = Stream::from_seed(801);
        let prf = ChaChaPrf::random(&mut rng);
        let frac = avalanche_fraction(&prf, 8, 10, &mut rng).unwrap();
        assert!((frac - 0.75).abs() < 0.02, "avalanche fraction {frac}");
    }
}
