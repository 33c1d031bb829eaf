//! The strictly stationary limit sequence, sampled on finite windows.
//!
//! Level-`n` blocks partition the integers into runs of length `L^n`
//! starting at `-J(n) + K L^n`, where `J(n) = sum_{u<=n} L^(u-1) kappa_u`
//! for i.i.d. uniform digits `kappa_u`. The level-`n` sequence is obtained
//! from the level-`(n-1)` one by applying the conditional piece flip to every
//! level-`n` block: piece 1 for the block `K = 0` when `kappa_n = 0`, piece 0
//! otherwise. Coordinates inside `[-J(m), -J(m) + L^m - 1]` never change
//! after level `m`, so a window contained in that interval is exactly the
//! limit sequence there.

use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::measures::unit_to_base;
use crate::rng::RandomSource;
use crate::vecops::{negate, product_is_positive, psi_in_place};
use crate::SQRT3;

/// Lazily realized digits `kappa_1, kappa_2, ..` and the offsets `J(n)`.
///
/// Digits come from an explicit prefix first, then from `source`.
#[derive(Debug, Clone)]
pub struct OffsetProcess {
    pieces: usize,
    prefix: Vec<usize>,
    source: Option<RandomSource>,
}

/// Digit `u >= 1` of the offset process: uniform on `{0, .., L - 1}` and a
/// pure function of `(source, u)`.
pub fn sample_kappa(cfg: &Config, source: &RandomSource, u: u64) -> usize {
    source.below(u, cfg.pieces() as u64) as usize
}

impl OffsetProcess {
    pub fn new(cfg: &Config, source: RandomSource) -> Self {
        Self {
            pieces: cfg.pieces(),
            prefix: Vec::new(),
            source: Some(source),
        }
    }

    /// Digits `kappa_1..` start with `prefix`; later digits come from
    /// `source`, and are an error to request when it is `None`.
    pub fn with_prefix(
        cfg: &Config,
        prefix: Vec<usize>,
        source: Option<RandomSource>,
    ) -> Result<Self> {
        if let Some(&d) = prefix.iter().find(|&&d| d >= cfg.pieces()) {
            return Err(Error::InvalidArgument(format!(
                "digit {d} out of range 0..{}",
                cfg.pieces()
            )));
        }
        Ok(Self {
            pieces: cfg.pieces(),
            prefix,
            source,
        })
    }

    pub fn pieces(&self) -> usize {
        self.pieces
    }

    pub fn kappa(&self, u: u32) -> Result<usize> {
        if u == 0 {
            return Err(Error::InvalidArgument("digits are indexed from 1".into()));
        }
        if let Some(&d) = self.prefix.get(u as usize - 1) {
            return Ok(d);
        }
        match &self.source {
            Some(src) => Ok(src.below(u64::from(u), self.pieces as u64) as usize),
            None => Err(Error::InvalidArgument(format!(
                "digit {u} requested beyond the fixed prefix"
            ))),
        }
    }

    /// `kappa_1 ..= kappa_n`.
    pub fn digits(&self, n: u32) -> Result<Vec<usize>> {
        (1..=n).map(|u| self.kappa(u)).collect()
    }
}

/// `J(n)`; `J(0) = 0`. Fails with [`Error::StabilizationCap`] if `L^n`
/// overflows 128 bits.
pub fn compute_j(proc: &OffsetProcess, n: u32) -> Result<i128> {
    let mut j = 0i128;
    let mut scale = 1i128;
    for u in 1..=n {
        j += scale * proc.kappa(u)? as i128;
        if u < n {
            scale = scale
                .checked_mul(proc.pieces as i128)
                .ok_or(Error::StabilizationCap(u))?;
        }
    }
    Ok(j)
}

/// Smallest `m` with `[lo, hi]` inside `[-J(m), -J(m) + L^m - 1]`.
pub fn stabilization_level(proc: &OffsetProcess, lo: i64, hi: i64, cap: u32) -> Result<u32> {
    if lo > hi {
        return Err(Error::InvalidWindow { lo, hi });
    }
    let (lo, hi) = (i128::from(lo), i128::from(hi));
    let pieces = proc.pieces as i128;
    let mut m = 0u32;
    let mut j = 0i128;
    let mut len = 1i128;
    loop {
        if -j <= lo && hi < -j + len {
            return Ok(m);
        }
        if m >= cap {
            return Err(Error::StabilizationCap(cap));
        }
        m += 1;
        j += len * proc.kappa(m)? as i128;
        len = len.checked_mul(pieces).ok_or(Error::StabilizationCap(m))?;
    }
}

/// Address of a level-`n` block: coordinates
/// `[-J(n) + K L^n, -J(n) + K L^n + L^n - 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockSpec {
    pub level: u32,
    pub index: i128,
}

impl BlockSpec {
    pub fn start(&self, proc: &OffsetProcess) -> Result<i128> {
        let len = (proc.pieces as i128)
            .checked_pow(self.level)
            .ok_or(Error::StabilizationCap(self.level))?;
        Ok(-compute_j(proc, self.level)? + self.index * len)
    }

    /// Index of sub-block `i` at level `n - 1`: `K L + i - kappa_n`.
    pub fn child(&self, i: usize, kappa: usize, pieces: usize) -> BlockSpec {
        BlockSpec {
            level: self.level - 1,
            index: self.index * pieces as i128 + i as i128 - kappa as i128,
        }
    }
}

/// Which piece the level-`n` flip acts on for block `index`.
#[inline]
fn flip_piece(index: i128, kappa: usize) -> usize {
    usize::from(index == 0 && kappa == 0)
}

/// Materializes the level-`level` block `index` of the level-`level`
/// sequence, reading level-0 values from `base`.
pub fn build_block<F>(
    cfg: &Config,
    level: u32,
    index: i128,
    proc: &OffsetProcess,
    base: F,
) -> Result<Vec<f64>>
where
    F: Fn(i64) -> f64,
{
    if level > cfg.max_depth() {
        return Err(Error::DepthCap {
            depth: level,
            cap: cfg.max_depth(),
        });
    }
    let kappas = proc.digits(level)?;
    let mut out = Vec::with_capacity(cfg.pieces().pow(level));
    build_into(cfg, &kappas, BlockSpec { level, index }, &base, &mut out)?;
    Ok(out)
}

fn build_into<F>(
    cfg: &Config,
    kappas: &[usize],
    spec: BlockSpec,
    base: &F,
    out: &mut Vec<f64>,
) -> Result<()>
where
    F: Fn(i64) -> f64,
{
    if spec.level == 0 {
        out.push(base(position(spec.index)?));
        return Ok(());
    }
    let kappa = kappas[spec.level as usize - 1];
    let start = out.len();
    for i in 0..cfg.pieces() {
        build_into(cfg, kappas, spec.child(i, kappa, cfg.pieces()), base, out)?;
    }
    let piece_len = (out.len() - start) / cfg.pieces();
    psi_in_place(
        cfg,
        &mut out[start..],
        piece_len,
        flip_piece(spec.index, kappa),
    )?;
    Ok(())
}

fn position(k: i128) -> Result<i64> {
    i64::try_from(k).map_err(|_| Error::InvalidArgument(format!("position {k} outside i64")))
}

/// Window evaluator. Only sub-blocks meeting the window are written out;
/// every other sub-block contributes its sum alone, so memory stays
/// proportional to the window plus the recursion depth. Piece sums are
/// accumulated up the block tree.
struct WindowEvaluator<'a, F> {
    pieces: usize,
    kappas: &'a [usize],
    lens: Vec<i128>,
    base: F,
}

impl<F: Fn(i64) -> f64> WindowEvaluator<'_, F> {
    fn block_sum(&self, level: u32, index: i128) -> f64 {
        if level == 0 {
            return (self.base)(index as i64);
        }
        let kappa = self.kappas[level as usize - 1];
        let mut sums = [0.0f64; 64];
        let sums = &mut sums[..self.pieces];
        let first = index * self.pieces as i128 - kappa as i128;
        for (i, s) in sums.iter_mut().enumerate() {
            *s = self.block_sum(level - 1, first + i as i128);
        }
        if product_is_positive(sums) {
            let j = flip_piece(index, kappa);
            sums[j] = -sums[j];
        }
        sums.iter().sum()
    }

    /// Writes the part of block `(level, index)` inside `[lo, hi]` to `out`
    /// (slot `k - lo` for coordinate `k`) and returns the block sum.
    fn fill(
        &self,
        level: u32,
        index: i128,
        start: i128,
        lo: i128,
        hi: i128,
        out: &mut [f64],
    ) -> f64 {
        if level == 0 {
            let v = (self.base)(index as i64);
            if lo <= index && index <= hi {
                out[(index - lo) as usize] = v;
            }
            return v;
        }
        let kappa = self.kappas[level as usize - 1];
        let child_len = self.lens[level as usize - 1];
        let mut sums = [0.0f64; 64];
        let sums = &mut sums[..self.pieces];
        let first = index * self.pieces as i128 - kappa as i128;
        for (i, s) in sums.iter_mut().enumerate() {
            let child_start = start + i as i128 * child_len;
            let child_end = child_start + child_len - 1;
            *s = if child_end < lo || child_start > hi {
                self.block_sum(level - 1, first + i as i128)
            } else {
                self.fill(level - 1, first + i as i128, child_start, lo, hi, out)
            };
        }
        if product_is_positive(sums) {
            let j = flip_piece(index, kappa);
            sums[j] = -sums[j];
            let a = (start + j as i128 * child_len).max(lo);
            let b = (start + (j as i128 + 1) * child_len - 1).min(hi);
            if a <= b {
                negate(&mut out[(a - lo) as usize..=(b - lo) as usize]);
            }
        }
        sums.iter().sum()
    }
}

/// One realized replicate of the limit sequence on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowSample {
    pub lo: i64,
    pub hi: i64,
    pub values: Vec<f64>,
    pub stabilization_level: u32,
    /// `J(m)` at the stabilization level.
    pub offset: i128,
    pub seed: u64,
}

impl WindowSample {
    pub fn get(&self, k: i64) -> Option<f64> {
        if k < self.lo || k > self.hi {
            return None;
        }
        Some(self.values[(k - self.lo) as usize])
    }
}

/// One replicate of the stationary construction: digits and level-0 values
/// are keyed draws from `seed`.
#[derive(Debug, Clone)]
pub struct StationaryProcess {
    cfg: Config,
    seed: u64,
    offsets: OffsetProcess,
    base: RandomSource,
}

fn zigzag(k: i64) -> u64 {
    ((k << 1) ^ (k >> 63)) as u64
}

impl StationaryProcess {
    pub fn new(cfg: &Config, seed: u64) -> Self {
        Self {
            cfg: *cfg,
            seed,
            offsets: OffsetProcess::new(cfg, RandomSource::new(seed, "kappa", 0)),
            base: RandomSource::new(seed, "base", 0),
        }
    }

    pub fn offsets(&self) -> &OffsetProcess {
        &self.offsets
    }

    /// Level-0 value at position `k`.
    #[inline]
    pub fn base_value(&self, k: i64) -> f64 {
        unit_to_base(self.base.unit(zigzag(k)))
    }

    pub fn build_block(&self, level: u32, index: i128) -> Result<Vec<f64>> {
        build_block(&self.cfg, level, index, &self.offsets, |k| {
            self.base_value(k)
        })
    }

    pub fn window(&self, lo: i64, hi: i64) -> Result<WindowSample> {
        if lo > hi {
            return Err(Error::InvalidWindow { lo, hi });
        }
        let m = stabilization_level(&self.offsets, lo, hi, self.cfg.max_level())?;
        let kappas = self.offsets.digits(m)?;
        let pieces = self.cfg.pieces() as i128;
        let lens: Vec<i128> = (0..=m).map(|n| pieces.pow(n)).collect();
        let offset = compute_j(&self.offsets, m)?;
        let eval = WindowEvaluator {
            pieces: self.cfg.pieces(),
            kappas: &kappas,
            lens,
            base: |k: i64| self.base_value(k),
        };
        let mut values = vec![0.0; (hi - lo) as usize + 1];
        eval.fill(m, 0, -offset, i128::from(lo), i128::from(hi), &mut values);
        debug_assert!(values.iter().all(|v| v.abs() <= SQRT3));
        Ok(WindowSample {
            lo,
            hi,
            values,
            stabilization_level: m,
            offset,
            seed: self.seed,
        })
    }
}

/// Realizes the limit sequence of replicate `seed` on `[lo, hi]`.
pub fn sample_window(cfg: &Config, lo: i64, hi: i64, seed: u64) -> Result<WindowSample> {
    StationaryProcess::new(cfg, seed).window(lo, hi)
}
