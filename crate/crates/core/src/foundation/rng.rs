//! xoshiro256++ seeded through splitmix64.
//!
//! Floats are `(next_u64 >> 11) * 2^-53`, so a seed fixes every draw on every
//! platform. Independent streams for sub-tasks (dropout, shuffling, per-sample
//! sampling) come from [`Rng::split`] rather than sharing one generator.

use crate::foundation::Tensor;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rng {
    s: [u64; 4],
}

impl Rng {
    pub fn seed_from_u64(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Self { s }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[0].wrapping_add(s[3]).rotate_left(23).wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// `n` uniform draws in `[0, 1)`; advances the state by exactly `n` draws.
    pub fn uniform(&mut self, n: usize) -> Tensor {
        let data = (0..n).map(|_| self.next_f64()).collect();
        Tensor::from_parts_unchecked(vec![n], data)
    }

    /// Uniform in `[lo, hi)`.
    pub fn range_f64(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Unbiased integer in `[0, n)` by rejection. Panics if `n == 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "Rng::below called with n = 0");
        let zone = u64::MAX - (u64::MAX - n + 1) % n;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % n;
            }
        }
    }

    /// True with probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// Derives a child stream from the current state and `label` without
    /// advancing `self`.
    pub fn split(&self, label: &str) -> Rng {
        self.derive(fnv1a(label.as_bytes()))
    }

    /// Like [`Rng::split`] but keyed by an integer, e.g. a sample index.
    pub fn split_u64(&self, label: u64) -> Rng {
        self.derive(fnv1a(&label.to_le_bytes()) ^ 0x5bd1_e995_0000_0000)
    }

    fn derive(&self, key: u64) -> Rng {
        let mut acc = key;
        for (i, &w) in self.s.iter().enumerate() {
            acc = acc.rotate_left(17) ^ w.wrapping_mul(GOLDEN ^ i as u64);
            let mut sm = acc;
            acc = splitmix64(&mut sm);
        }
        Rng::seed_from_u64(acc)
    }
}
