use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};

use super::{Base, Sequence};
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Per-base edit probabilities. The indel rate is always derived, never stored.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorProfile {
    e_s: f64,
    e_i: f64,
    e_d: f64,
}

impl ErrorProfile {
    pub fn new(e_s: f64, e_i: f64, e_d: f64) -> Result<Self> {
        for (name, r) in [("substitution", e_s), ("insertion", e_i), ("deletion", e_d)] {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::param(format!("{name} rate {r} outside [0, 1)")));
            }
        }
        if e_s + e_i + e_d >= 1.0 {
            return Err(Error::param("edit rates must sum to less than 1"));
        }
        Ok(ErrorProfile { e_s, e_i, e_d })
    }

    pub fn zero() -> Self {
        ErrorProfile { e_s: 0.0, e_i: 0.0, e_d: 0.0 }
    }

    pub fn e_s(&self) -> f64 {
        self.e_s
    }

    pub fn e_i(&self) -> f64 {
        self.e_i
    }

    pub fn e_d(&self) -> f64 {
        self.e_d
    }

    pub fn e_id(&self) -> f64 {
        self.e_i + self.e_d
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EditKind {
    Sub,
    Ins,
    Del,
}

impl EditKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EditKind::Sub => "sub",
            EditKind::Ins => "ins",
            EditKind::Del => "del",
        }
    }
}

/// A ledger entry. `pos` is the origin-window coordinate; an insertion at
/// `pos` goes in front of origin base `pos`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edit {
    pub pos: usize,
    pub kind: EditKind,
    pub original: Option<Base>,
    pub new: Option<Base>,
}

impl fmt::Display for Edit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = |x: Option<Base>| x.map_or('-', Base::to_char);
        write!(f, "{}:{}:{}>{}", self.pos, self.kind.as_str(), b(self.original), b(self.new))
    }
}

impl FromStr for Edit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::param(format!("malformed ledger entry {s:?}"));
        let mut parts = s.splitn(3, ':');
        let pos = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        let kind = match parts.next().ok_or_else(bad)? {
            "sub" => EditKind::Sub,
            "ins" => EditKind::Ins,
            "del" => EditKind::Del,
            _ => return Err(bad()),
        };
        let (o, n) = parts.next().and_then(|r| r.split_once('>')).ok_or_else(bad)?;
        let base = |t: &str| -> Result<Option<Base>> {
            let mut cs = t.chars();
            match (cs.next(), cs.next()) {
                (Some('-'), None) => Ok(None),
                (Some(c), None) => Base::from_char(c).map(Some).ok_or_else(bad),
                _ => Err(bad()),
            }
        };
        let edit = Edit { pos, kind, original: base(o)?, new: base(n)? };
        let shape_ok = match kind {
            EditKind::Sub => edit.original.is_some() && edit.new.is_some(),
            EditKind::Ins => edit.original.is_none() && edit.new.is_some(),
            EditKind::Del => edit.original.is_some() && edit.new.is_none(),
        };
        if shape_ok {
            Ok(edit)
        } else {
            Err(bad())
        }
    }
}

/// What to do at one origin position, before it is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlannedEdit {
    Sub { pos: usize, new: Base },
    Ins { pos: usize, base: Base },
    Del { pos: usize },
}

impl PlannedEdit {
    fn pos(&self) -> usize {
        match *self {
            PlannedEdit::Sub { pos, .. } | PlannedEdit::Ins { pos, .. } | PlannedEdit::Del { pos } => pos,
        }
    }
}

/// One categorical draw per origin base: substitution, insertion in front of
/// the base, deletion, or nothing.
pub fn draw_edit_plan<R: Rng + ?Sized>(origin: &[Base], profile: &ErrorProfile, rng: &mut R) -> Vec<PlannedEdit> {
    let ins_cut = profile.e_s + profile.e_i;
    let del_cut = ins_cut + profile.e_d;
    let mut plan = Vec::new();
    for (pos, &b) in origin.iter().enumerate() {
        let u: f64 = rng.random();
        if u < profile.e_s {
            plan.push(PlannedEdit::Sub { pos, new: b.random_other(rng) });
        } else if u < ins_cut {
            plan.push(PlannedEdit::Ins { pos, base: Base::random(rng) });
        } else if u < del_cut {
            plan.push(PlannedEdit::Del { pos });
        }
    }
    plan
}

/// Applies `plan` (sorted by position, at most one entry per position) to
/// `origin`, then truncates or back-fills from `tail` to exactly `m` bases.
pub fn apply_edits(origin: &[Base], tail: &[Base], m: usize, plan: &[PlannedEdit]) -> Result<(Sequence, Vec<Edit>)> {
    let mut out = Vec::with_capacity(m + 8);
    let mut ledger = Vec::with_capacity(plan.len());
    let mut next = plan.iter().peekable();

    for (pos, &b) in origin.iter().enumerate() {
        let edit = next.next_if(|e| e.pos() == pos);
        if next.peek().is_some_and(|e| e.pos() <= pos) {
            return Err(Error::param("edit plan must be sorted with one edit per position"));
        }
        match edit {
            None => out.push(b),
            Some(&PlannedEdit::Sub { new, .. }) => {
                if new == b {
                    return Err(Error::param(format!("substitution at {pos} does not change the base")));
                }
                out.push(new);
                ledger.push(Edit { pos, kind: EditKind::Sub, original: Some(b), new: Some(new) });
            }
            Some(&PlannedEdit::Ins { base, .. }) => {
                out.push(base);
                out.push(b);
                ledger.push(Edit { pos, kind: EditKind::Ins, original: None, new: Some(base) });
            }
            Some(&PlannedEdit::Del { .. }) => {
                ledger.push(Edit { pos, kind: EditKind::Del, original: Some(b), new: None });
            }
        }
    }
    if let Some(e) = next.next() {
        return Err(Error::IndexOutOfRange { index: e.pos(), len: origin.len() });
    }

    if out.len() < m {
        let needed = m - out.len();
        if tail.len() < needed {
            return Err(Error::TailExhausted { needed, available: tail.len() });
        }
        out.extend_from_slice(&tail[..needed]);
    }
    out.truncate(m);
    Ok((Sequence::new(out), ledger))
}

pub fn inject_edits_with<R: Rng + ?Sized>(
    origin: &[Base],
    tail: &[Base],
    m: usize,
    profile: &ErrorProfile,
    rng: &mut R,
) -> Result<(Sequence, Vec<Edit>)> {
    if origin.len() != m {
        return Err(Error::LengthMismatch { left: origin.len(), right: m });
    }
    let plan = draw_edit_plan(origin, profile, rng);
    apply_edits(origin, tail, m, &plan)
}

pub fn inject_edits(
    origin: &[Base],
    tail: &[Base],
    m: usize,
    profile: &ErrorProfile,
    seed: u64,
) -> Result<(Sequence, Vec<Edit>)> {
    inject_edits_with(origin, tail, m, profile, &mut SimRng::seed_from_u64(seed))
}

/// A fixed-length read with its ground-truth provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct ReadRecord {
    pub read: Sequence,
    pub origin_row: usize,
    pub edit_ledger: Vec<Edit>,
    /// Exact edit distance to the stored row `origin_row`.
    pub true_ed_to_origin: usize,
}

impl ReadRecord {
    pub fn ledger_summary(&self) -> String {
        self.edit_ledger.iter().map(Edit::to_string).collect::<Vec<_>>().join(",")
    }

    /// Net bases back-filled (deletions) or truncated (insertions) to restore
    /// the fixed read length.
    pub fn length_adjustment(&self) -> usize {
        let ins = self.edit_ledger.iter().filter(|e| e.kind == EditKind::Ins).count();
        let del = self.edit_ledger.iter().filter(|e| e.kind == EditKind::Del).count();
        ins.abs_diff(del)
    }

    pub fn count(&self, kind: EditKind) -> usize {
        self.edit_ledger.iter().filter(|e| e.kind == kind).count()
    }
}
