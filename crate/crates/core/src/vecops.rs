//! Deterministic vector transforms used by the block constructions.
//!
//! All comparisons against zero are exact. A zero coordinate sum sends
//! [`phi`] to the zero vector, and a zero piece sum makes the product of
//! piece sums zero so [`psi`] leaves its input alone.

use std::ops::Deref;

use crate::config::Config;
use crate::error::{Error, Result};

/// A nonempty vector of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct RealVector(Vec<f64>);

impl RealVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(i) = coords.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self(coords))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for RealVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for RealVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

/// Exactly `pieces` vectors of a common length `n`, the operands of a splice.
#[derive(Debug, Clone, PartialEq)]
pub struct PieceDecomposition {
    base_len: usize,
    pieces: Vec<Vec<f64>>,
}

impl PieceDecomposition {
    pub fn new(cfg: &Config, pieces: Vec<Vec<f64>>) -> Result<Self> {
        if pieces.len() != cfg.pieces() {
            return Err(Error::LengthMismatch {
                expected: cfg.pieces(),
                found: pieces.len(),
            });
        }
        let base_len = pieces[0].len();
        if base_len == 0 {
            return Err(Error::EmptyVector);
        }
        if let Some(bad) = pieces.iter().find(|p| p.len() != base_len) {
            return Err(Error::LengthMismatch {
                expected: base_len,
                found: bad.len(),
            });
        }
        Ok(Self { base_len, pieces })
    }

    /// Cuts `y` into `cfg.pieces()` consecutive pieces of length `n`.
    pub fn split(cfg: &Config, y: &[f64], n: usize) -> Result<Self> {
        check_piece_len(cfg, y.len(), n)?;
        let pieces = y.chunks(n).map(<[f64]>::to_vec).collect();
        Ok(Self {
            base_len: n,
            pieces,
        })
    }

    pub fn base_len(&self) -> usize {
        self.base_len
    }

    pub fn pieces(&self) -> &[Vec<f64>] {
        &self.pieces
    }
}

fn check_piece_len(cfg: &Config, len: usize, n: usize) -> Result<()> {
    let expected = n.checked_mul(cfg.pieces()).ok_or(Error::LengthMismatch {
        expected: usize::MAX,
        found: len,
    })?;
    if n == 0 || len != expected {
        return Err(Error::LengthMismatch {
            expected,
            found: len,
        });
    }
    Ok(())
}

/// Left-to-right sum of the coordinates.
pub fn sum_vec(x: &[f64]) -> f64 {
    x.iter().sum()
}

pub fn prod_vec(x: &[f64]) -> f64 {
    x.iter().product()
}

/// Sign normalization: `x` if its sum is positive, `-x` if negative, the
/// zero vector if the sum is exactly zero.
pub fn phi(x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    phi_in_place(&mut y);
    y
}

pub fn phi_in_place(x: &mut [f64]) {
    let s = sum_vec(x);
    if s < 0.0 {
        negate(x);
    } else if s == 0.0 {
        x.fill(0.0);
    }
}

#[inline]
pub fn negate(x: &mut [f64]) {
    for v in x {
        *v = -*v;
    }
}

/// Concatenates the pieces in order.
pub fn splice(pieces: &PieceDecomposition) -> Vec<f64> {
    pieces.pieces.concat()
}

/// Whether the exact product of `sums` is strictly positive: no zero factor
/// and an even number of negative factors. Decided by sign counting so the
/// answer cannot be spoiled by underflow of the floating-point product.
#[inline]
pub fn product_is_positive(sums: &[f64]) -> bool {
    let mut negative = false;
    for &s in sums {
        if s == 0.0 {
            return false;
        }
        if s < 0.0 {
            negative = !negative;
        }
    }
    !negative
}

/// Conditional piece flip: cut `y` into `cfg.pieces()` pieces of length `n`;
/// if the product of the piece sums is positive, negate piece `j`.
pub fn psi(cfg: &Config, y: &[f64], n: usize, j: usize) -> Result<Vec<f64>> {
    let mut out = y.to_vec();
    psi_in_place(cfg, &mut out, n, j)?;
    Ok(out)
}

/// In-place [`psi`]; returns whether piece `j` was negated.
pub fn psi_in_place(cfg: &Config, y: &mut [f64], n: usize, j: usize) -> Result<bool> {
    check_piece_len(cfg, y.len(), n)?;
    if j >= cfg.pieces() {
        return Err(Error::PieceIndexOutOfRange {
            index: j,
            pieces: cfg.pieces(),
        });
    }
    let sums: Vec<f64> = y.chunks(n).map(sum_vec).collect();
    let flip = product_is_positive(&sums);
    if flip {
        negate(&mut y[j * n..(j + 1) * n]);
    }
    Ok(flip)
}

/// Coordinate permutation: output `i` is input `sigma[i]`.
pub fn permute(x: &[f64], sigma: &[usize]) -> Result<Vec<f64>> {
    if sigma.len() != x.len() {
        return Err(Error::InvalidPermutation(x.len()));
    }
    let mut seen = vec![false; x.len()];
    for &s in sigma {
        if s >= x.len() || seen[s] {
            return Err(Error::InvalidPermutation(x.len()));
        }
        seen[s] = true;
    }
    Ok(sigma.iter().map(|&s| x[s]).collect())
}

pub fn invert_permutation(sigma: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; sigma.len()];
    for (i, &s) in sigma.iter().enumerate() {
        inv[s] = i;
    }
    inv
}
