//! Misjudgment correction on top of the ED* search.
//!
//! * HDAC arbitrates between the HD and ED* decisions when they disagree,
//!   picking HD with a probability that favours substitution-heavy error
//!   profiles and small thresholds.
//! * TASR ORs the ED* decisions of the read and a few rotated copies, but
//!   only for thresholds at or above a lower bound that shrinks as the indel
//!   rate grows.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};

use crate::cam::{mismatch_mask, sense, MatchMode, MatchlineSampler, PackedSeq, SearchKind, SearchSite};
use crate::error::{Error, Result};
use crate::genome::{ErrorProfile, Sequence};
use crate::rng::SimRng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HdacParams {
    pub alpha: f64,
    pub beta: f64,
    /// HDAC is switched off (saving its extra HD cycle) below this probability.
    pub disable_threshold: f64,
    pub enabled: bool,
}

impl Default for HdacParams {
    fn default() -> Self {
        HdacParams {
            alpha: 200.0,
            beta: 0.5,
            disable_threshold: 0.01,
            enabled: true,
        }
    }
}

impl HdacParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.beta >= 0.0) {
            return Err(Error::param("hdac alpha and beta must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.disable_threshold) {
            return Err(Error::param("hdac disable_threshold must be in [0, 1]"));
        }
        Ok(())
    }

    pub fn is_active(&self, p: f64) -> bool {
        self.enabled && p >= self.disable_threshold
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RotationDirection {
    Left,
    Right,
    Both,
}

impl RotationDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            RotationDirection::Left => "left",
            RotationDirection::Right => "right",
            RotationDirection::Both => "both",
        }
    }
}

impl fmt::Display for RotationDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RotationDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(RotationDirection::Left),
            "right" => Ok(RotationDirection::Right),
            "both" => Ok(RotationDirection::Both),
            _ => Err(Error::param(format!("unknown rotation direction {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TasrParams {
    pub n_rotations: usize,
    pub gamma: f64,
    pub direction: RotationDirection,
}

impl Default for TasrParams {
    fn default() -> Self {
        TasrParams {
            n_rotations: 2,
            gamma: 2e-4,
            direction: RotationDirection::Both,
        }
    }
}

impl TasrParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::param("tasr gamma must be > 0"));
        }
        Ok(())
    }
}

/// A circular rotation of the read by `amount` bases.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rotation {
    Left(usize),
    Right(usize),
}

impl Rotation {
    pub fn apply(self, read: &Sequence) -> Sequence {
        match self {
            Rotation::Left(k) => read.rotated_left(k),
            Rotation::Right(k) => read.rotated_right(k),
        }
    }
}

/// The `n_rotations` rotated copies compared after the original read.
/// `Both` spends `ceil(N_R / 2)` on left rotations and the rest on right ones.
pub fn rotation_plan(params: &TasrParams) -> Vec<Rotation> {
    let n = params.n_rotations;
    match params.direction {
        RotationDirection::Left => (1..=n).map(Rotation::Left).collect(),
        RotationDirection::Right => (1..=n).map(Rotation::Right).collect(),
        RotationDirection::Both => {
            let left = n.div_ceil(2);
            (1..=left).map(Rotation::Left).chain((1..=n - left).map(Rotation::Right)).collect()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StrategyFired {
    None,
    Hdac,
    Tasr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatchDecision {
    /// `None` when no HD search was performed.
    pub o_hd: Option<bool>,
    pub o_ed_star: bool,
    pub o_final: bool,
    pub fired: StrategyFired,
}

impl MatchDecision {
    pub fn plain(o_ed_star: bool) -> Self {
        MatchDecision {
            o_hd: None,
            o_ed_star,
            o_final: o_ed_star,
            fired: StrategyFired::None,
        }
    }
}

/// `e_s / (e_s + e_id) * exp(-(alpha * e_id + beta * T))`.
pub fn hdac_probability(profile: &ErrorProfile, t: usize, params: &HdacParams) -> Result<f64> {
    let e_s = profile.e_s();
    let e_id = profile.e_id();
    if e_s + e_id <= 0.0 {
        return Err(Error::param("HDAC probability undefined for an error-free profile"));
    }
    Ok(e_s / (e_s + e_id) * (-(params.alpha * e_id + params.beta * t as f64)).exp())
}

/// Keeps the ED* decision unless HD disagrees, in which case HD wins with
/// probability `p`. No randomness is consumed when the two agree.
pub fn hdac_decide(o_hd: bool, o_ed_star: bool, p: f64, seed: u64) -> MatchDecision {
    let mut d = MatchDecision {
        o_hd: Some(o_hd),
        o_ed_star,
        o_final: o_ed_star,
        fired: StrategyFired::None,
    };
    if o_hd != o_ed_star {
        let x: f64 = SimRng::seed_from_u64(seed).random();
        if x < p {
            d.o_final = o_hd;
            d.fired = StrategyFired::Hdac;
        }
    }
    d
}

/// `ceil(gamma / e_id * m)`; `None` (rotation never triggers) when `e_id = 0`.
pub fn tasr_lower_bound(profile: &ErrorProfile, m: usize, params: &TasrParams) -> Option<usize> {
    let e_id = profile.e_id();
    if e_id <= 0.0 {
        return None;
    }
    let x = params.gamma / e_id * m as f64;
    let nearest = x.round();
    // an exact integer computed with rounding error must not ceil upwards
    let x = if (x - nearest).abs() <= 1e-9 * nearest.max(1.0) { nearest } else { x };
    Some(x.ceil() as usize)
}

pub fn tasr_triggered(t: usize, lower_bound: Option<usize>) -> bool {
    lower_bound.is_some_and(|tl| t >= tl)
}

/// OR-composition of the original ED* decision with the rotated ones.
pub fn tasr_combine(t: usize, lower_bound: Option<usize>, original: bool, rotated: impl IntoIterator<Item = bool>) -> MatchDecision {
    if !tasr_triggered(t, lower_bound) {
        return MatchDecision::plain(original);
    }
    let any = rotated.into_iter().fold(original, |acc, r| acc || r);
    MatchDecision {
        o_hd: None,
        o_ed_star: any,
        o_final: any,
        fired: if any != original { StrategyFired::Tasr } else { StrategyFired::None },
    }
}

/// TASR for one (row, read) pair, sensing every comparison through `sampler`.
#[allow(clippy::too_many_arguments)]
pub fn tasr_search(
    segment: &Sequence,
    read: &Sequence,
    t: usize,
    lower_bound: Option<usize>,
    params: &TasrParams,
    sampler: &MatchlineSampler,
    row: usize,
    read_id: u64,
) -> Result<MatchDecision> {
    let row_packed = PackedSeq::new(segment.bases());
    let decide = |r: &Sequence, kind: SearchKind| -> Result<bool> {
        let mask = mismatch_mask(&row_packed, &PackedSeq::new(r.bases()), MatchMode::EdStar)?;
        let v = sampler.sample(SearchSite { row, read_id, kind }, &mask);
        Ok(sense(v, t, sampler.config()))
    };
    let original = decide(read, SearchKind::EdStar)?;
    if !tasr_triggered(t, lower_bound) {
        return Ok(MatchDecision::plain(original));
    }
    let rotated = rotation_plan(params)
        .into_iter()
        .enumerate()
        .map(|(i, rot)| decide(&rot.apply(read), SearchKind::Rotation(i as u32 + 1)))
        .collect::<Result<Vec<_>>>()?;
    Ok(tasr_combine(t, lower_bound, original, rotated))
}
