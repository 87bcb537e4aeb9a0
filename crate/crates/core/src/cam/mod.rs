//! Behavioral model of the capacitive CAM array.

mod image;
pub mod noise;
pub mod packed;

use std::fmt;
use std::str::FromStr;

pub use image::{read_array_image, write_array_image, ArrayImage};
pub use noise::{
    distinguishable_states, eq2_variance, ideal_voltage, matchline_voltage, sample_voltage, sigma_for_states,
    MatchlineSampler, NoiseMode, NoiseModel, ResamplePolicy, SearchKind, SearchSite, EDAM_STATES,
};
pub use packed::{mismatch_count, mismatch_mask, MismatchMask, PackedSeq};

use crate::error::{Error, Result};
use crate::genome::{Base, Sequence};

/// Geometry and supply of the CAM arrays.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArrayConfig {
    /// Rows per array (M).
    pub rows: usize,
    /// Cells per row (N), one base each.
    pub cols: usize,
    pub vdd: f64,
    /// Physical arrays searched in parallel.
    pub array_count: usize,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        ArrayConfig {
            rows: 256,
            cols: 256,
            vdd: 1.2,
            array_count: 512,
        }
    }
}

impl ArrayConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 || self.array_count == 0 {
            return Err(Error::param("rows, cols and array_count must be >= 1"));
        }
        if !(self.vdd > 0.0 && self.vdd.is_finite()) {
            return Err(Error::param(format!("VDD {} must be positive", self.vdd)));
        }
        Ok(())
    }

    /// (array, row within array) of a global row index.
    pub fn locate(&self, global_row: usize) -> (u64, u64) {
        ((global_row / self.rows) as u64, (global_row % self.rows) as u64)
    }

    /// Logical arrays needed to hold `total_rows`.
    pub fn arrays_for(&self, total_rows: usize) -> usize {
        total_rows.div_ceil(self.rows)
    }

    /// Sequential passes over the physical arrays for one search of every row.
    pub fn passes_for(&self, total_rows: usize) -> usize {
        self.arrays_for(total_rows).div_ceil(self.array_count).max(1)
    }

    /// Sense-amplifier reference for threshold `t`, centered between the
    /// ideal levels of `t` and `t + 1` mismatches.
    pub fn v_ref(&self, t: usize) -> f64 {
        (t as f64 + 0.5) / self.cols as f64 * self.vdd
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MatchMode {
    /// Cell matches if its base equals the read base at `i - 1`, `i` or `i + 1`.
    EdStar,
    /// Cell matches if its base equals the read base at `i`.
    Hamming,
}

impl MatchMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MatchMode::EdStar => "ed_star",
            MatchMode::Hamming => "hd",
        }
    }
}

impl fmt::Display for MatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MatchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ed_star" | "edstar" | "ED_STAR" => Ok(MatchMode::EdStar),
            "hd" | "HD" | "hamming" => Ok(MatchMode::Hamming),
            _ => Err(Error::param(format!("unknown match mode {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatchOutcome {
    pub row: usize,
    pub n_mis: usize,
    pub v_ml: f64,
    pub decision: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnergyScope {
    PerRow,
    PerArray,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyEstimate {
    pub joules_per_search: f64,
    pub scope: EnergyScope,
}

/// Single-cell comparison: the reference implementation of the match rule.
pub fn cell_match(stored: Base, read: &[Base], i: usize, mode: MatchMode) -> Result<bool> {
    if i >= read.len() {
        return Err(Error::IndexOutOfRange { index: i, len: read.len() });
    }
    let centre = read[i] == stored;
    Ok(match mode {
        MatchMode::Hamming => centre,
        MatchMode::EdStar => {
            let left = i > 0 && read[i - 1] == stored;
            let right = read.get(i + 1) == Some(&stored);
            centre || left || right
        }
    })
}

/// Cell-by-cell mismatch count. In ED* mode this is ED*.
pub fn row_mismatch_count(segment: &[Base], read: &[Base], mode: MatchMode) -> Result<usize> {
    if segment.len() != read.len() {
        return Err(Error::LengthMismatch { left: segment.len(), right: read.len() });
    }
    let mut n = 0;
    for (i, &q) in segment.iter().enumerate() {
        if !cell_match(q, read, i, mode)? {
            n += 1;
        }
    }
    Ok(n)
}

/// Sense-amplifier decision: match iff `v_ml <= V_ref(t)`.
pub fn sense(v_ml: f64, t: usize, config: &ArrayConfig) -> bool {
    v_ml <= config.v_ref(t)
}

/// Charge-redistribution energy of one search,
/// `n_mis (N - n_mis) / N * mu_C * VDD^2` per row; the array scope multiplies
/// by the row count M.
pub fn energy_per_search(n_mis: usize, config: &ArrayConfig, noise: &NoiseModel, scope: EnergyScope) -> Result<EnergyEstimate> {
    if n_mis > config.cols {
        return Err(Error::IndexOutOfRange { index: n_mis, len: config.cols + 1 });
    }
    let per_row = row_energy(n_mis, config, noise.mu_c);
    let joules_per_search = match scope {
        EnergyScope::PerRow => per_row,
        EnergyScope::PerArray => per_row * config.rows as f64,
    };
    Ok(EnergyEstimate { joules_per_search, scope })
}

#[inline]
pub(crate) fn row_energy(n_mis: usize, config: &ArrayConfig, mu_c: f64) -> f64 {
    let n = config.cols;
    (n_mis * (n - n_mis)) as f64 / n as f64 * mu_c * config.vdd * config.vdd
}

/// Searches `read` against every row of `image`; one outcome per row.
pub fn search(
    image: &ArrayImage,
    read: &Sequence,
    t: usize,
    mode: MatchMode,
    noise: &NoiseModel,
    seed: u64,
    read_id: u64,
) -> Result<Vec<MatchOutcome>> {
    let sampler = MatchlineSampler::new(*image.config(), *noise, seed, image.len())?;
    search_with(image, &sampler, read, t, mode, read_id)
}

pub fn search_with(
    image: &ArrayImage,
    sampler: &MatchlineSampler,
    read: &Sequence,
    t: usize,
    mode: MatchMode,
    read_id: u64,
) -> Result<Vec<MatchOutcome>> {
    let packed = PackedSeq::new(read.bases());
    let kind = match mode {
        MatchMode::EdStar => SearchKind::EdStar,
        MatchMode::Hamming => SearchKind::Hamming,
    };
    image
        .packed_rows()
        .iter()
        .enumerate()
        .map(|(row, r)| {
            let mask = mismatch_mask(r, &packed, mode)?;
            let v_ml = sampler.sample(SearchSite { row, read_id, kind }, &mask);
            Ok(MatchOutcome {
                row,
                n_mis: mask.count(),
                v_ml,
                decision: sense(v_ml, t, sampler.config()),
            })
        })
        .collect()
}
