//! The sign space of `{-1, +1}^L` vectors with product `-1`, and its uniform
//! law. Any `L - 1` coordinates of a uniform draw are independent fair signs;
//! the full product is always `-1`.

use crate::config::Config;
use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// Largest piece count for which the sign space is enumerated.
pub const MAX_ENUMERATION_PIECES: usize = 16;

/// An element of the sign space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(entries: Vec<i8>) -> Result<Self> {
        if entries.is_empty() || entries.iter().any(|&e| e != 1 && e != -1) {
            return Err(Error::InvalidSignVector);
        }
        let negatives = entries.iter().filter(|&&e| e == -1).count();
        if negatives % 2 == 0 {
            return Err(Error::InvalidSignVector);
        }
        Ok(Self(entries))
    }

    /// Builds the vector whose entry `i` is `-1` exactly when bit `i` of
    /// `mask` is set.
    fn from_mask(mask: u64, len: usize) -> Self {
        Self(
            (0..len)
                .map(|i| if mask >> i & 1 == 1 { -1 } else { 1 })
                .collect(),
        )
    }

    pub fn entries(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        f64::from(self.0[i])
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|&e| -e).collect())
    }

    /// Entry `i` of the result is entry `sigma[i]` of `self`.
    pub fn permuted(&self, sigma: &[usize]) -> Self {
        Self(sigma.iter().map(|&s| self.0[s]).collect())
    }

    /// Bitmask with bit `i` set when entry `i` is `-1`.
    pub fn mask(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e == -1)
            .fold(0, |m, (i, _)| m | 1 << i)
    }
}

/// A set of coordinate positions indexing a product character.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterIndex(Vec<usize>);

impl CharacterIndex {
    pub fn new(cfg: &Config, mut indices: Vec<usize>) -> Result<Self> {
        if let Some(&index) = indices.iter().find(|&&i| i >= cfg.pieces()) {
            return Err(Error::InvalidSubset {
                index,
                pieces: cfg.pieces(),
            });
        }
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::DuplicateIndex);
        }
        Ok(Self(indices))
    }

    pub fn from_mask(mask: u64, pieces: usize) -> Self {
        Self((0..pieces).filter(|&i| mask >> i & 1 == 1).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_enumerable(cfg: &Config) -> Result<()> {
    if cfg.pieces() > MAX_ENUMERATION_PIECES {
        return Err(Error::PieceCountTooLarge {
            pieces: cfg.pieces(),
            limit: MAX_ENUMERATION_PIECES,
            what: "sign space enumeration",
        });
    }
    Ok(())
}

/// All `2^(L-1)` sign vectors with product `-1`, in increasing mask order.
pub fn enumerate_upsilon(cfg: &Config) -> Result<Vec<SignVector>> {
    check_enumerable(cfg)?;
    let l = cfg.pieces();
    Ok((0u64..1 << l)
        .filter(|m| m.count_ones() % 2 == 1)
        .map(|m| SignVector::from_mask(m, l))
        .collect())
}

/// Sign mask of a uniform draw from the sign space: bits `0..L-1` are taken
/// from `word`, and bit `L-1` is set so that the number of `-1` entries is
/// odd.
#[inline]
pub fn nu_mask_from_word(pieces: usize, word: u64) -> u64 {
    let free = word & ((1u64 << (pieces - 1)) - 1);
    let last = u64::from(free.count_ones().is_multiple_of(2));
    free | last << (pieces - 1)
}

/// One draw from the uniform law on the sign space. The first `L - 1` signs
/// are independent fair coins and the last is minus their product.
pub fn sample_nu(cfg: &Config, source: &RandomSource) -> SignVector {
    SignVector::from_mask(
        nu_mask_from_word(cfg.pieces(), source.word(0)),
        cfg.pieces(),
    )
}

/// Exact `E prod_{i in S} V_i` under the uniform law, by enumeration.
pub fn char_moment(cfg: &Config, subset: &CharacterIndex) -> Result<f64> {
    let atoms = enumerate_upsilon(cfg)?;
    let total: i64 = atoms
        .iter()
        .map(|v| {
            subset
                .indices()
                .iter()
                .map(|&i| i64::from(v.entries()[i]))
                .product::<i64>()
        })
        .sum();
    Ok(total as f64 / atoms.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn six() -> Config {
        Config::new(6).unwrap()
    }

    #[test]
    fn enumeration_counts() {
        for l in [6, 8, 10] {
            let cfg = Config::new(l).unwrap();
            let atoms = enumerate_upsilon(&cfg).unwrap();
            assert_eq!(atoms.len(), 1 << (l - 1));
            let unique: HashSet<_> = atoms.iter().collect();
            assert_eq!(unique.len(), atoms.len());
            for v in &atoms {
                assert_eq!(
                    v.entries().iter().map(|&e| i32::from(e)).product::<i32>(),
                    -1
                );
            }
        }
        assert!(enumerate_upsilon(&Config::new(18).unwrap()).is_err());
    }

    #[test]
    fn single_flip_is_member() {
        let atoms = enumerate_upsilon(&six()).unwrap();
        let v = SignVector::new(vec![-1, 1, 1, 1, 1, 1]).unwrap();
        assert!(atoms.contains(&v));
    }

    #[test]
    fn sign_vector_validation() {
        assert!(SignVector::new(vec![1, 1, 1, 1, 1, 1]).is_err());
        assert!(SignVector::new(vec![1, 0, -1]).is_err());
        assert!(SignVector::new(vec![-1, -1, -1, 1, 1, 1]).is_ok());
    }

    #[test]
    fn character_examples() {
        let cfg = six();
        let m = |s: Vec<usize>| char_moment(&cfg, &CharacterIndex::new(&cfg, s).unwrap()).unwrap();
        assert_eq!(m(vec![]), 1.0);
        assert_eq!(m(vec![0, 3]), 0.0);
        assert_eq!(m(vec![0, 1, 2, 3, 4, 5]), -1.0);
        assert!(matches!(
            CharacterIndex::new(&cfg, vec![0, 6]),
            Err(Error::InvalidSubset { index: 6, .. })
        ));
        assert_eq!(
            CharacterIndex::new(&cfg, vec![1, 1]),
            Err(Error::DuplicateIndex)
        );
    }

    #[test]
    fn negation_and_permutation_preserve_space() {
        let cfg = six();
        let atoms: HashSet<_> = enumerate_upsilon(&cfg).unwrap().into_iter().collect();
        let negated: HashSet<_> = atoms.iter().map(SignVector::negated).collect();
        assert_eq!(atoms, negated);
        let sigma = [3, 5, 0, 1, 4, 2];
        let permuted: HashSet<_> = atoms.iter().map(|v| v.permuted(&sigma)).collect();
        assert_eq!(atoms, permuted);
    }

    #[test]
    fn sampled_vectors_are_members() {
        let cfg = six();
        for i in 0..1000 {
            let v = sample_nu(&cfg, &RandomSource::new(5, "nu", i));
            assert_eq!(v.len(), 6);
            assert_eq!(v.mask().count_ones() % 2, 1);
        }
    }
}
