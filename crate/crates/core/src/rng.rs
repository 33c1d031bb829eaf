//! Counter-based keyed random source.
//!
//! Every word is a pure function of `(master_seed, stream_label, index,
//! counter)`, so samplers can address randomness by position instead of by
//! consumption order. That is what makes window samples consistent across
//! overlapping windows and lets replicates run in any order.
//!
//! A word is produced by two rounds of 64-bit finalizer mixing: the first
//! round walks a Weyl sequence keyed by `key`, the second is salted by an
//! independent key so that two sources whose Weyl sequences happen to be
//! shifts of each other still produce unrelated outputs.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const SALT_TAG: u64 = 0xD1B5_4A32_D192_ED03;

#[inline]
fn mix_a(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn mix_b(mut z: u64) -> u64 {
    z = (z ^ (z >> 33)).wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    z = (z ^ (z >> 33)).wrapping_mul(0xC4CE_B9FE_1A85_EC53);
    z ^ (z >> 33)
}

fn label_hash(label: &str) -> u64 {
    // FNV-1a
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// A keyed, stateless source of uniform 64-bit words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomSource {
    key: u64,
    salt: u64,
}

impl RandomSource {
    pub fn new(master_seed: u64, stream_label: &str, index: u64) -> Self {
        let k0 = mix_b(mix_a(master_seed.wrapping_add(GAMMA)) ^ label_hash(stream_label));
        Self::from_parent(k0, k0 ^ SALT_TAG, index)
    }

    fn from_parent(key: u64, salt: u64, index: u64) -> Self {
        let key = mix_a(mix_b(key ^ index.wrapping_mul(GAMMA)) ^ salt);
        let salt = mix_b(key ^ SALT_TAG);
        Self { key, salt }
    }

    /// An independent source addressed by `index` below this one.
    pub fn child(&self, index: u64) -> Self {
        Self::from_parent(self.key, self.salt, index.wrapping_add(1))
    }

    #[inline]
    pub fn word(&self, counter: u64) -> u64 {
        mix_b(mix_a(self.key.wrapping_add(counter.wrapping_mul(GAMMA))) ^ self.salt)
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn unit(&self, counter: u64) -> f64 {
        (self.word(counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `{0, .., n - 1}` via the multiply-high reduction.
    #[inline]
    pub fn below(&self, counter: u64, n: u64) -> u64 {
        ((u128::from(self.word(counter)) * u128::from(n)) >> 64) as u64
    }

    pub fn stream(&self) -> Stream {
        Stream {
            source: *self,
            counter: 0,
        }
    }
}

/// Sequential view of a [`RandomSource`].
#[derive(Debug, Clone)]
pub struct Stream {
    source: RandomSource,
    counter: u64,
}

impl Stream {
    pub fn next_u64(&mut self) -> u64 {
        let w = self.source.word(self.counter);
        self.counter += 1;
        w
    }

    pub fn next_unit(&mut self) -> f64 {
        let u = self.source.unit(self.counter);
        self.counter += 1;
        u
    }

    pub fn next_below(&mut self, n: u64) -> u64 {
        let v = self.source.below(self.counter, n);
        self.counter += 1;
        v
    }

    /// Uniform on `[lo, hi)`.
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_unit()
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
