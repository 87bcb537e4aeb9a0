//! Exact distances used as ground truth.

use crate::error::{Error, Result};
use crate::genome::{Base, GenomeStore, Sequence};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceKind {
    Hamming,
    Edit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DistanceResult {
    pub value: usize,
    pub kind: DistanceKind,
}

pub fn hamming<T: PartialEq>(a: &[T], b: &[T]) -> Result<DistanceResult> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    let value = a.iter().zip(b).filter(|(x, y)| x != y).count();
    Ok(DistanceResult { value, kind: DistanceKind::Hamming })
}

pub fn edit<T: PartialEq>(a: &[T], b: &[T]) -> DistanceResult {
    DistanceResult { value: edit_distance(a, b), kind: DistanceKind::Edit }
}

/// Unit-cost Levenshtein distance, full table, one row of storage.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `Some(edit_distance(a, b))` when it is at most `k`, else `None`.
///
/// Only the diagonal band `|i - j| <= k` is filled, and the scan stops as
/// soon as every cell of a row exceeds `k`.
pub fn edit_distance_within<T: PartialEq>(a: &[T], b: &[T], k: usize) -> Option<usize> {
    const INF: usize = usize::MAX / 2;
    let (la, lb) = (a.len(), b.len());
    if la.abs_diff(lb) > k {
        return None;
    }
    let mut prev = vec![INF; lb + 1];
    let mut cur = vec![INF; lb + 1];
    for (j, p) in prev.iter_mut().enumerate().take(k.min(lb) + 1) {
        *p = j;
    }
    for i in 1..=la {
        let lo = i.saturating_sub(k);
        let hi = (i + k).min(lb);
        if lo > 0 {
            cur[lo - 1] = INF;
        }
        let mut row_min = INF;
        for j in lo..=hi {
            let v = if j == 0 {
                i
            } else {
                let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
                sub.min(prev[j] + 1).min(cur[j - 1] + 1)
            };
            cur[j] = v;
            row_min = row_min.min(v);
        }
        if row_min > k {
            return None;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let d = prev[lb];
    (d <= k).then_some(d)
}

/// `min(edit_distance(a, b), cap)`, cheap when the distance is large.
pub fn edit_distance_capped<T: PartialEq>(a: &[T], b: &[T], cap: usize) -> usize {
    match cap.checked_sub(1) {
        None => 0,
        Some(k) => edit_distance_within(a, b, k).unwrap_or(cap),
    }
}

/// Row `k` is positive iff `edit_distance(row_k, read) <= t`.
pub fn label_rows<'a>(rows: impl IntoIterator<Item = &'a Sequence>, read: &[Base], t: usize) -> Result<Vec<bool>> {
    rows.into_iter()
        .map(|row| {
            if row.len() != read.len() {
                return Err(Error::LengthMismatch { left: row.len(), right: read.len() });
            }
            Ok(edit_distance_within(row.bases(), read, t).is_some())
        })
        .collect()
}

pub fn label_ground_truth(store: &GenomeStore, read: &Sequence, t: usize) -> Result<Vec<bool>> {
    if read.len() != store.segment_length() {
        return Err(Error::LengthMismatch { left: store.segment_length(), right: read.len() });
    }
    label_rows(store.rows(), read.bases(), t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::{apply_edits, segment_reference, synthesize_genome, PlannedEdit};
    use proptest::prelude::*;

    fn s(x: &str) -> Vec<Base> {
        x.parse::<Sequence>().unwrap().into_bases()
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming(&s("ACGT"), &s("ACGT")).unwrap().value, 0);
        assert_eq!(hamming(&s("AAAA"), &s("AGAA")).unwrap().value, 1);
        assert_eq!(hamming(&s("ACGTACGT"), &s("AACGTACG")).unwrap().value, 7);
        assert!(hamming(&s("ACG"), &s("ACGT")).is_err());
    }

    #[test]
    fn edit_examples() {
        assert_eq!(edit_distance(b"kitten", b"sitting"), 3);
        assert_eq!(edit_distance(&s("ACGTACGT"), &s("AACGTACG")), 2);
        assert_eq!(edit_distance(&s("AAAA"), &s("AGAA")), 1);
        assert_eq!(edit_distance(&s(""), &s("ACG")), 3);
        assert_eq!(edit(&s("ACGT"), &s("ACGT")).value, 0);
        assert_eq!(edit(&s("ACGT"), &s("ACGT")).kind, DistanceKind::Edit);
    }

    #[test]
    fn banded_examples() {
        assert_eq!(edit_distance_within(b"kitten", b"sitting", 3), Some(3));
        assert_eq!(edit_distance_within(b"kitten", b"sitting", 2), None);
        assert_eq!(edit_distance_within(b"abc", b"abcdef", 2), None);
        assert_eq!(edit_distance_within(b"", b"", 0), Some(0));
        assert_eq!(edit_distance_capped(b"kitten", b"sitting", 2), 2);
        assert_eq!(edit_distance_capped(b"kitten", b"sitting", 10), 3);
        assert_eq!(edit_distance_capped(b"kitten", b"sitting", 0), 0);
    }

    #[test]
    fn ground_truth_labels() {
        let store = segment_reference(synthesize_genome(16 * 32, 4).unwrap(), 32).unwrap();
        let origin = store.segments()[3].bases.clone();
        let labels = label_ground_truth(&store, &origin, 0).unwrap();
        assert_eq!(labels.iter().filter(|&&x| x).count(), 1);
        assert!(labels[3]);

        let o = origin.bases();
        let plan: Vec<_> = [4usize, 13, 27]
            .iter()
            .map(|&pos| PlannedEdit::Sub { pos, new: Base::from_code(o[pos].code() + 1) })
            .collect();
        let (read, _) = apply_edits(o, &[], 32, &plan).unwrap();
        assert_eq!(edit_distance(o, read.bases()), 3);
        assert!(!label_ground_truth(&store, &read, 2).unwrap()[3]);
        assert!(label_ground_truth(&store, &read, 3).unwrap()[3]);

        assert!(label_ground_truth(&store, &read, 32).unwrap().iter().all(|&x| x));
        assert!(label_ground_truth(&store, &"ACGT".parse().unwrap(), 1).is_err());
    }

    fn dna(max: usize) -> impl Strategy<Value = Vec<u8>> {
        prop::collection::vec(0u8..4, 0..max)
    }

    proptest! {
        #[test]
        fn metric_axioms(a in dna(24), b in dna(24), c in dna(24)) {
            let ab = edit_distance(&a, &b);
            prop_assert_eq!(ab, edit_distance(&b, &a));
            prop_assert_eq!(ab == 0, a == b);
            prop_assert!(edit_distance(&a, &c) <= ab + edit_distance(&b, &c));
            prop_assert!(ab >= a.len().abs_diff(b.len()));
            prop_assert!(ab <= a.len().max(b.len()));
        }

        #[test]
        fn edit_at_most_hamming(pair in (1usize..64).prop_flat_map(|n| (prop::collection::vec(0u8..4, n), prop::collection::vec(0u8..4, n)))) {
            let (a, b) = pair;
            prop_assert!(edit_distance(&a, &b) <= hamming(&a, &b).unwrap().value);
        }

        #[test]
        fn banded_agrees_with_full(a in dna(40), b in dna(40), k in 0usize..12) {
            let d = edit_distance(&a, &b);
            let expected = (d <= k).then_some(d);
            prop_assert_eq!(edit_distance_within(&a, &b, k), expected);
        }

        #[test]
        fn labels_monotone_in_threshold(seed in 0u64..1000, t in 0usize..10) {
            let store = segment_reference(synthesize_genome(8 * 16, seed).unwrap(), 16).unwrap();
            let read = store.segments()[0].bases.rotated_left(1);
            let lo = label_ground_truth(&store, &read, t).unwrap();
            let hi = label_ground_truth(&store, &read, t + 1).unwrap();
            prop_assert!(lo.iter().zip(&hi).all(|(l, h)| !l || *h));
        }
    }
}
