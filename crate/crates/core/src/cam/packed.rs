//! Bit-sliced row comparison.
//!
//! A sequence is stored as four bit planes, one per base, with bit `i` of
//! plane `b` set when position `i` holds `b`. A whole row of cells is then
//! compared with a handful of word operations: cell `i` matches in ED* mode
//! when its stored base appears in the read at `i - 1`, `i` or `i + 1`.
//! Shifting the read planes by one position (without wraparound) gives the
//! neighbor views, so edge cells see only the neighbors that exist.

use super::MatchMode;
use crate::error::{Error, Result};
use crate::genome::Base;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackedSeq {
    len: usize,
    planes: [Vec<u64>; 4],
}

impl PackedSeq {
    pub fn new(bases: &[Base]) -> Self {
        let words = bases.len().div_ceil(64);
        let mut planes: [Vec<u64>; 4] = std::array::from_fn(|_| vec![0u64; words]);
        for (i, b) in bases.iter().enumerate() {
            planes[b.code()][i / 64] |= 1u64 << (i % 64);
        }
        PackedSeq { len: bases.len(), planes }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn words(&self) -> usize {
        self.planes[0].len()
    }
}

/// Set bits mark mismatched cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MismatchMask {
    pub len: usize,
    pub words: Vec<u64>,
}

impl MismatchMask {
    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let t = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(w * 64 + t)
                }
            })
        })
    }
}

#[inline]
fn tail_mask(len: usize, w: usize, words: usize) -> u64 {
    let rem = len % 64;
    if w + 1 == words && rem != 0 {
        (1u64 << rem) - 1
    } else {
        u64::MAX
    }
}

pub fn mismatch_mask(row: &PackedSeq, read: &PackedSeq, mode: MatchMode) -> Result<MismatchMask> {
    if row.len != read.len {
        return Err(Error::LengthMismatch { left: row.len, right: read.len });
    }
    let n = row.words();
    let mut words = vec![0u64; n];
    for (w, out) in words.iter_mut().enumerate() {
        let mut matched = 0u64;
        for b in 0..4 {
            let r = &read.planes[b];
            let mut hit = r[w];
            if mode == MatchMode::EdStar {
                // r[i-1] seen at i, and r[i+1] seen at i
                let from_left = (r[w] << 1) | if w > 0 { r[w - 1] >> 63 } else { 0 };
                let from_right = (r[w] >> 1) | if w + 1 < n { r[w + 1] << 63 } else { 0 };
                hit |= from_left | from_right;
            }
            matched |= row.planes[b][w] & hit;
        }
        *out = !matched & tail_mask(row.len, w, n);
    }
    Ok(MismatchMask { len: row.len, words })
}

pub fn mismatch_count(row: &PackedSeq, read: &PackedSeq, mode: MatchMode) -> Result<usize> {
    mismatch_mask(row, read, mode).map(|m| m.count())
}
