//! Sequences, reference storage, read extraction and edit injection.

mod dataset;
mod edits;
mod fasta;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::rng::SimRng;

pub use dataset::{generate_reads, read_reads_file, write_reads_file, Condition, ReadSet, ReadSetMeta};
pub use edits::{apply_edits, draw_edit_plan, inject_edits, inject_edits_with, Edit, EditKind, ErrorProfile, PlannedEdit, ReadRecord};
pub use fasta::{load_fasta, parse_fasta, write_fasta, FastaLoad};

/// One nucleotide. The discriminant is the 2-bit code a CAM cell stores.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum Base {
    A = 0,
    C = 1,
    G = 2,
    T = 3,
}

impl Base {
    pub const ALL: [Base; 4] = [Base::A, Base::C, Base::G, Base::T];

    pub fn from_char(c: char) -> Option<Base> {
        match c {
            'A' | 'a' => Some(Base::A),
            'C' | 'c' => Some(Base::C),
            'G' | 'g' => Some(Base::G),
            'T' | 't' => Some(Base::T),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Base::A => 'A',
            Base::C => 'C',
            Base::G => 'G',
            Base::T => 'T',
        }
    }

    #[inline]
    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Base {
        Base::ALL[code & 3]
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Base {
        Base::from_code(rng.random_range(0..4))
    }

    /// Uniform over the three bases different from `self`.
    pub fn random_other<R: Rng + ?Sized>(self, rng: &mut R) -> Base {
        let k = rng.random_range(1..4);
        Base::from_code(self.code() + k)
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// A DNA string over {A, C, G, T}.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Sequence(Vec<Base>);

impl Sequence {
    pub fn new(bases: Vec<Base>) -> Self {
        Sequence(bases)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bases(&self) -> &[Base] {
        &self.0
    }

    pub fn into_bases(self) -> Vec<Base> {
        self.0
    }

    pub fn slice(&self, range: Range<usize>) -> Sequence {
        Sequence(self.0[range].to_vec())
    }

    /// Circular rotation: base at `i + k` moves to `i`.
    pub fn rotated_left(&self, k: usize) -> Sequence {
        let mut v = self.0.clone();
        if !v.is_empty() {
            let k = k % v.len();
            v.rotate_left(k);
        }
        Sequence(v)
    }

    /// Circular rotation: base at `i` moves to `i + k`.
    pub fn rotated_right(&self, k: usize) -> Sequence {
        let mut v = self.0.clone();
        if !v.is_empty() {
            let k = k % v.len();
            v.rotate_right(k);
        }
        Sequence(v)
    }
}

impl FromStr for Sequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| Base::from_char(c).ok_or(Error::InvalidBase(c)))
            .collect::<Result<Vec<_>>>()
            .map(Sequence)
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.0.iter().map(|b| b.to_char()).collect();
        f.write_str(&s)
    }
}

impl From<Vec<Base>> for Sequence {
    fn from(v: Vec<Base>) -> Self {
        Sequence(v)
    }
}

impl AsRef<[Base]> for Sequence {
    fn as_ref(&self) -> &[Base] {
        &self.0
    }
}

/// Uniform i.i.d. bases, a pure function of `(length, seed)`.
pub fn synthesize_genome(length: usize, seed: u64) -> Result<Sequence> {
    if length == 0 {
        return Err(Error::param("genome length must be positive"));
    }
    let mut rng = SimRng::seed_from_u64(seed);
    Ok(Sequence((0..length).map(|_| Base::random(&mut rng)).collect()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub row: usize,
    pub offset: usize,
    pub bases: Sequence,
}

/// A reference cut into consecutive fixed-width rows. The trailing remainder
/// shorter than one row is kept in `reference` but not stored as a row.
#[derive(Clone, Debug)]
pub struct GenomeStore {
    reference: Sequence,
    segment_length: usize,
    segments: Vec<Segment>,
}

impl GenomeStore {
    pub fn reference(&self) -> &Sequence {
        &self.reference
    }

    pub fn segment_length(&self) -> usize {
        self.segment_length
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = &Sequence> {
        self.segments.iter().map(|s| &s.bases)
    }

    /// `len` reference bases starting at `start`, wrapping to the start of
    /// the reference when the end is reached.
    pub fn cyclic_window(&self, start: usize, len: usize) -> Vec<Base> {
        let r = self.reference.bases();
        (0..len).map(|i| r[(start + i) % r.len()]).collect()
    }
}

pub fn segment_reference(reference: Sequence, segment_length: usize) -> Result<GenomeStore> {
    if segment_length == 0 {
        return Err(Error::param("segment length must be positive"));
    }
    if segment_length > reference.len() {
        return Err(Error::param(format!(
            "segment length {segment_length} exceeds reference length {}",
            reference.len()
        )));
    }
    let segments = reference
        .bases()
        .chunks_exact(segment_length)
        .enumerate()
        .map(|(row, chunk)| Segment {
            row,
            offset: row * segment_length,
            bases: Sequence(chunk.to_vec()),
        })
        .collect();
    Ok(GenomeStore {
        reference,
        segment_length,
        segments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> Sequence {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(seq("acgT").to_string(), "ACGT");
        assert!(matches!("ACNT".parse::<Sequence>(), Err(Error::InvalidBase('N'))));
    }

    #[test]
    fn random_other_never_returns_self() {
        let mut rng = SimRng::seed_from_u64(3);
        for b in Base::ALL {
            let mut seen = [0usize; 4];
            for _ in 0..3000 {
                let o = b.random_other(&mut rng);
                assert_ne!(o, b);
                seen[o.code()] += 1;
            }
            for (code, &n) in seen.iter().enumerate() {
                if code != b.code() {
                    assert!((850..1150).contains(&n), "{b} -> {code}: {n}");
                }
            }
        }
    }

    #[test]
    fn synth_is_deterministic() {
        assert_eq!(synthesize_genome(8, 42).unwrap(), synthesize_genome(8, 42).unwrap());
        assert_ne!(synthesize_genome(64, 42).unwrap(), synthesize_genome(64, 43).unwrap());
        assert_eq!(synthesize_genome(1, 5).unwrap().len(), 1);
        assert!(synthesize_genome(0, 1).is_err());
    }

    #[test]
    fn synth_base_frequencies_are_uniform() {
        let g = synthesize_genome(1_000_000, 1).unwrap();
        let mut counts = [0usize; 4];
        for b in g.bases() {
            counts[b.code()] += 1;
        }
        for c in counts {
            let f = c as f64 / 1e6;
            assert!((f - 0.25).abs() < 0.01, "frequency {f}");
        }
        // chi-square with 3 dof, p = 0.001 critical value 16.27
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - 250_000.0).powi(2) / 250_000.0).sum();
        assert!(chi2 < 16.27, "chi2 {chi2}");
    }

    #[test]
    fn segmentation() {
        let store = segment_reference(seq("ACGTACGT"), 4).unwrap();
        assert_eq!(store.len(), 2);
        assert_eq!(store.segments()[0].bases, seq("ACGT"));
        assert_eq!(store.segments()[1].offset, 4);

        let store = segment_reference(seq("ACGTACGTA"), 4).unwrap();
        assert_eq!(store.len(), 2);
        assert_eq!(store.reference().len(), 9);

        let g = synthesize_genome(65536, 3).unwrap();
        let store = segment_reference(g.clone(), 256).unwrap();
        assert_eq!(store.len(), 256);
        for (k, s) in store.segments().iter().enumerate() {
            assert_eq!(s.offset, k * 256);
            assert_eq!(s.row, k);
            assert_eq!(s.bases.bases(), &g.bases()[k * 256..(k + 1) * 256]);
        }

        assert!(segment_reference(seq("ACG"), 0).is_err());
        assert!(segment_reference(seq("ACG"), 4).is_err());
    }

    #[test]
    fn rotations_invert() {
        let s = seq("ACGTTGCA");
        assert_eq!(s.rotated_left(1), seq("CGTTGCAA"));
        assert_eq!(s.rotated_right(1), seq("AACGTTGC"));
        for k in 0..20 {
            assert_eq!(s.rotated_left(k).rotated_right(k), s);
        }
    }

    #[test]
    fn cyclic_window_wraps() {
        let store = segment_reference(seq("ACGTAC"), 2).unwrap();
        let w: String = store.cyclic_window(4, 4).iter().map(|b| b.to_char()).collect();
        assert_eq!(w, "ACAC");
    }
}
