use crate::error::{Error, Result};

/// Largest block length the measure samplers will materialize by default
/// (6^8 coordinates).
pub const DEFAULT_MAX_BLOCK_LEN: usize = 1_679_616;

/// Default hard cap on the stabilization level of the window sampler.
pub const DEFAULT_MAX_LEVEL: u32 = 64;

/// Shared construction parameters, validated once.
///
/// `pieces` is the even integer L >= 6: every block at level n >= 1 is split
/// into `pieces` sub-blocks, sign vectors have `pieces` entries, and the
/// resulting sequence is `(pieces - 1)`-tuplewise independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Config {
    pieces: usize,
    max_depth: u32,
    max_level: u32,
}

impl Config {
    pub fn new(pieces: usize) -> Result<Self> {
        if pieces < 6 || !pieces.is_multiple_of(2) {
            return Err(Error::InvalidPieceCount(pieces));
        }
        if pieces > 64 {
            return Err(Error::PieceCountTooLarge {
                pieces,
                limit: 64,
                what: "sign sampling",
            });
        }
        let mut max_depth = 0u32;
        let mut len = pieces;
        while len <= DEFAULT_MAX_BLOCK_LEN {
            max_depth += 1;
            len = len.saturating_mul(pieces);
        }
        Ok(Self {
            pieces,
            max_depth,
            max_level: DEFAULT_MAX_LEVEL,
        })
    }

    /// Smallest admissible piece count giving N-tuplewise independence:
    /// the least even integer >= max(6, N + 1).
    pub fn for_independence_order(order: usize) -> Result<Self> {
        Self::new(pieces_for_order(order)?)
    }

    pub fn pieces(&self) -> usize {
        self.pieces
    }

    /// Largest recursion depth accepted by the measure samplers.
    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    /// Hard cap on the stabilization level of the window sampler.
    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn with_max_depth(mut self, depth: u32) -> Self {
        self.max_depth = depth;
        self
    }

    pub fn with_max_level(mut self, level: u32) -> Self {
        self.max_level = level;
        self
    }

    /// `pieces^n`, or `None` on overflow.
    pub fn block_len(&self, n: u32) -> Option<usize> {
        self.pieces.checked_pow(n)
    }
}

pub fn pieces_for_order(order: usize) -> Result<usize> {
    if order < 2 {
        return Err(Error::InvalidIndependenceOrder(order));
    }
    let min = (order + 1).max(6);
    Ok(min + min % 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_and_small() {
        assert_eq!(Config::new(5), Err(Error::InvalidPieceCount(5)));
        assert_eq!(Config::new(7), Err(Error::InvalidPieceCount(7)));
        assert_eq!(Config::new(4), Err(Error::InvalidPieceCount(4)));
        assert!(Config::new(6).is_ok());
        assert!(Config::new(66).is_err());
    }

    #[test]
    fn order_to_pieces() {
        assert_eq!(pieces_for_order(2).unwrap(), 6);
        assert_eq!(pieces_for_order(5).unwrap(), 6);
        assert_eq!(pieces_for_order(6).unwrap(), 8);
        assert_eq!(pieces_for_order(7).unwrap(), 8);
        assert_eq!(pieces_for_order(8).unwrap(), 10);
        assert!(pieces_for_order(1).is_err());
    }

    #[test]
    fn depth_cap_for_six_is_eight() {
        let cfg = Config::new(6).unwrap();
        assert_eq!(cfg.max_depth(), 8);
        assert_eq!(cfg.block_len(8), Some(DEFAULT_MAX_BLOCK_LEN));
    }
}
