//! Samplers for the recursive block measures.
//!
//! Level 0 is the uniform law on `[-sqrt 3, sqrt 3]`. A level-`n` draw is
//! built from `L` independent level-`(n-1)` draws: each is sign-normalized
//! with [`phi`](crate::vecops::phi), multiplied by one coordinate of an
//! independent uniform sign vector, and the results are spliced.
//!
//! Randomness is addressed as a tree: a node at any level draws its sign
//! vector from word 0 of its own source and hands `source.child(l)` to
//! sub-block `l`.

pub use crate::rng::RandomSource;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::signs::nu_mask_from_word;
use crate::vecops::{negate, phi_in_place, psi_in_place};
use crate::SQRT3;

/// Recursion depth of a block measure; samples have `pieces^depth` entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasureLevel {
    depth: u32,
    len: usize,
}

impl MeasureLevel {
    pub fn new(cfg: &Config, depth: u32) -> Result<Self> {
        if depth > cfg.max_depth() {
            return Err(Error::DepthCap {
                depth,
                cap: cfg.max_depth(),
            });
        }
        let len = cfg.block_len(depth).ok_or(Error::DepthCap {
            depth,
            cap: cfg.max_depth(),
        })?;
        Ok(Self { depth, len })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Maps `u` in `[0, 1)` to `[-sqrt 3, sqrt 3)`.
#[inline]
pub fn unit_to_base(u: f64) -> f64 {
    (2.0 * u - 1.0) * SQRT3
}

/// One draw from the uniform law on `[-sqrt 3, sqrt 3]`.
#[inline]
pub fn sample_base(source: &RandomSource) -> f64 {
    unit_to_base(source.unit(0))
}

/// One draw from the level-`n` block measure.
pub fn sample_mu(cfg: &Config, n: u32, source: &RandomSource) -> Result<Vec<f64>> {
    let level = MeasureLevel::new(cfg, n)?;
    let mut out = vec![0.0; level.len()];
    fill_mu(cfg.pieces(), n, source, &mut out);
    Ok(out)
}

fn fill_mu(pieces: usize, n: u32, source: &RandomSource, out: &mut [f64]) {
    if n == 0 {
        out[0] = sample_base(source);
        return;
    }
    let signs = nu_mask_from_word(pieces, source.word(0));
    let piece_len = out.len() / pieces;
    for (l, chunk) in out.chunks_mut(piece_len).enumerate() {
        fill_mu(pieces, n - 1, &source.child(l as u64), chunk);
        phi_in_place(chunk);
        if signs >> l & 1 == 1 {
            negate(chunk);
        }
    }
}

/// `num_blocks` independent level-`h` draws, concatenated: a window of the
/// block-i.i.d. process aligned at a block boundary.
pub fn sample_block_sequence(
    cfg: &Config,
    h: u32,
    num_blocks: usize,
    source: &RandomSource,
) -> Result<Vec<f64>> {
    let level = MeasureLevel::new(cfg, h)?;
    let mut out = vec![0.0; level.len() * num_blocks];
    for (b, chunk) in out.chunks_mut(level.len()).enumerate() {
        fill_mu(cfg.pieces(), h, &source.child(b as u64), chunk);
    }
    Ok(out)
}

/// Alternate route to the level-`n` measure: splice `L` independent
/// level-`(n-1)` draws and apply the conditional flip of piece `j`.
pub fn theta_via_psi(cfg: &Config, n: u32, j: usize, source: &RandomSource) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("theta_via_psi needs n >= 1".into()));
    }
    let level = MeasureLevel::new(cfg, n)?;
    let piece_len = level.len() / cfg.pieces();
    let mut out = vec![0.0; level.len()];
    for (l, chunk) in out.chunks_mut(piece_len).enumerate() {
        fill_mu(cfg.pieces(), n - 1, &source.child(l as u64), chunk);
    }
    psi_in_place(cfg, &mut out, piece_len, j)?;
    Ok(out)
}
