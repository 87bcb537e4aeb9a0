//! Matchline voltage under capacitor mismatch.
//!
//! Each cell drives the bottom plate of its capacitor to VDD on a mismatch and
//! to ground on a match; the top plates share the matchline. With capacitances
//! `C_j`, the settled voltage is `VDD * sum(C_mismatched) / sum(C_all)`, which
//! is `(n_mis / N) * VDD` when all capacitors are equal. For i.i.d.
//! `C_j ~ N(mu, sigma^2)` the first-order variance is
//! `n_mis (N - n_mis) / N^3 * (sigma / mu)^2 * VDD^2`.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use super::packed::MismatchMask;
use super::ArrayConfig;
use crate::error::{Error, Result};
use crate::rng::{substream, tag, SimRng};

/// Readout states supported by a current-domain matchline under the 3-sigma
/// constraint; used to emulate that readout's noise floor.
pub const EDAM_STATES: u64 = 44;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NoiseMode {
    Ideal,
    GaussianFormula,
    MonteCarloCaps,
    /// Gaussian with the worst-case (half-mismatched) spread at every level.
    GaussianFlat,
}

impl NoiseMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseMode::Ideal => "ideal",
            NoiseMode::GaussianFormula => "gaussian_formula",
            NoiseMode::MonteCarloCaps => "montecarlo_caps",
            NoiseMode::GaussianFlat => "gaussian_flat",
        }
    }
}

impl fmt::Display for NoiseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(NoiseMode::Ideal),
            "gaussian_formula" | "gaussian" => Ok(NoiseMode::GaussianFormula),
            "montecarlo_caps" | "montecarlo" => Ok(NoiseMode::MonteCarloCaps),
            "gaussian_flat" => Ok(NoiseMode::GaussianFlat),
            _ => Err(Error::param(format!("unknown noise mode {s:?}"))),
        }
    }
}

/// When Monte Carlo capacitor values are redrawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ResamplePolicy {
    /// Drawn once per physical row and reused by every search.
    PerArrayInstance,
    /// Drawn afresh for every search.
    PerTrial,
}

impl ResamplePolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            ResamplePolicy::PerArrayInstance => "per_array_instance",
            ResamplePolicy::PerTrial => "per_trial",
        }
    }
}

impl FromStr for ResamplePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_array_instance" => Ok(ResamplePolicy::PerArrayInstance),
            "per_trial" => Ok(ResamplePolicy::PerTrial),
            _ => Err(Error::param(format!("unknown resample policy {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    /// Mean cell capacitance in farads.
    pub mu_c: f64,
    pub sigma_over_mu: f64,
    pub mode: NoiseMode,
    pub resample: ResamplePolicy,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            mu_c: 2e-15,
            sigma_over_mu: 0.014,
            mode: NoiseMode::GaussianFormula,
            resample: ResamplePolicy::PerArrayInstance,
        }
    }
}

impl NoiseModel {
    pub fn ideal() -> Self {
        NoiseModel {
            mode: NoiseMode::Ideal,
            ..Default::default()
        }
    }

    /// Fresh capacitor draws on every sample.
    pub fn monte_carlo_per_trial(sigma_over_mu: f64) -> Self {
        NoiseModel {
            sigma_over_mu,
            mode: NoiseMode::MonteCarloCaps,
            resample: ResamplePolicy::PerTrial,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_over_mu >= 0.0 && self.sigma_over_mu.is_finite()) {
            return Err(Error::param(format!("sigma_over_mu {} must be >= 0", self.sigma_over_mu)));
        }
        if !(self.mu_c > 0.0 && self.mu_c.is_finite()) {
            return Err(Error::param(format!("mu_c {} must be > 0", self.mu_c)));
        }
        Ok(())
    }

    /// Relative deviation that actually reaches the matchline.
    pub fn effective_sigma(&self) -> f64 {
        match self.mode {
            NoiseMode::Ideal => 0.0,
            _ => self.sigma_over_mu,
        }
    }

    /// Gaussian readout whose spread leaves only [`EDAM_STATES`] levels
    /// distinguishable, for comparison against a current-domain matchline.
    pub fn edam_emulated(&self) -> Self {
        NoiseModel {
            sigma_over_mu: sigma_for_states(EDAM_STATES),
            mode: NoiseMode::GaussianFlat,
            ..*self
        }
    }
}

pub fn ideal_voltage(n_mis: usize, cols: usize, vdd: f64) -> f64 {
    n_mis as f64 / cols as f64 * vdd
}

/// First-order matchline variance (V^2).
pub fn eq2_variance(n_mis: usize, cols: usize, vdd: f64, sigma_over_mu: f64) -> f64 {
    let n = cols as f64;
    let k = n_mis as f64;
    k * (n - k) / (n * n * n) * sigma_over_mu * sigma_over_mu * vdd * vdd
}

fn flat_variance(cols: usize, vdd: f64, sigma_over_mu: f64) -> f64 {
    eq2_variance(cols / 2, cols, vdd, sigma_over_mu)
}

/// Largest state count `S` whose level spacing `VDD / S` still covers
/// `6 * sigma` of the worst-case (half-mismatched) matchline, i.e.
/// `floor((1 / (3 * sigma_over_mu))^2)`. `None` when noise is zero.
pub fn distinguishable_states(sigma_over_mu: f64) -> Result<Option<u64>> {
    if sigma_over_mu.is_nan() || sigma_over_mu < 0.0 {
        return Err(Error::param(format!("sigma_over_mu {sigma_over_mu} must be >= 0")));
    }
    if sigma_over_mu == 0.0 {
        return Ok(None);
    }
    let q = 1.0 / (3.0 * sigma_over_mu);
    let x = q * q;
    let mut s = x.floor();
    // absorb rounding just below an exact integer
    if (s + 1.0 - x) <= 1e-9 * x {
        s += 1.0;
    }
    Ok(Some(s as u64))
}

/// Inverse of [`distinguishable_states`] at an exact state count.
pub fn sigma_for_states(states: u64) -> f64 {
    1.0 / (3.0 * (states as f64).sqrt())
}

pub(crate) fn draw_caps(rng: &mut SimRng, cols: usize, noise: &NoiseModel) -> Vec<f64> {
    let sd = noise.mu_c * noise.sigma_over_mu;
    (0..cols)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            noise.mu_c + sd * z
        })
        .collect()
}

fn voltage_from_caps(caps: &[f64], mismatched: impl Iterator<Item = usize>, vdd: f64) -> f64 {
    let total: f64 = caps.iter().sum();
    let driven: f64 = mismatched.map(|j| caps[j]).sum();
    vdd * driven / total
}

fn check_n_mis(n_mis: usize, cols: usize) -> Result<()> {
    if n_mis > cols {
        return Err(Error::IndexOutOfRange { index: n_mis, len: cols + 1 });
    }
    Ok(())
}

/// One matchline sample for a row with `n_mis` mismatches, drawing from `rng`.
/// In Monte Carlo mode the first `n_mis` capacitors are the driven ones;
/// capacitors are exchangeable so the choice does not matter.
pub fn sample_voltage(n_mis: usize, config: &ArrayConfig, noise: &NoiseModel, rng: &mut SimRng) -> Result<f64> {
    check_n_mis(n_mis, config.cols)?;
    let ideal = ideal_voltage(n_mis, config.cols, config.vdd);
    Ok(match noise.mode {
        NoiseMode::Ideal => ideal,
        NoiseMode::GaussianFormula => {
            let z: f64 = StandardNormal.sample(rng);
            ideal + eq2_variance(n_mis, config.cols, config.vdd, noise.sigma_over_mu).sqrt() * z
        }
        NoiseMode::GaussianFlat => {
            let z: f64 = StandardNormal.sample(rng);
            ideal + flat_variance(config.cols, config.vdd, noise.sigma_over_mu).sqrt() * z
        }
        NoiseMode::MonteCarloCaps => {
            let caps = draw_caps(rng, config.cols, noise);
            voltage_from_caps(&caps, 0..n_mis, config.vdd)
        }
    })
}

pub fn matchline_voltage(n_mis: usize, config: &ArrayConfig, noise: &NoiseModel, seed: u64) -> Result<f64> {
    sample_voltage(n_mis, config, noise, &mut SimRng::seed_from_u64(seed))
}

/// Which physical search a matchline sample belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SearchKind {
    EdStar,
    Hamming,
    /// ED* search of the `n`-th rotated copy of the read (1-based).
    Rotation(u32),
    /// ED* search read out through the emulated current-domain matchline.
    EdamReadout,
}

impl SearchKind {
    fn code(self) -> u64 {
        match self {
            SearchKind::EdStar => 0,
            SearchKind::Hamming => 1,
            SearchKind::EdamReadout => 2,
            SearchKind::Rotation(n) => 16 + n as u64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SearchSite {
    /// Global row index across all arrays.
    pub row: usize,
    pub read_id: u64,
    pub kind: SearchKind,
}

/// Draws matchline voltages for row searches with a reproducible substream
/// per `(array, row, read, kind)`. Per-instance capacitor sets are drawn once
/// at construction.
#[derive(Clone, Debug)]
pub struct MatchlineSampler {
    config: ArrayConfig,
    noise: NoiseModel,
    seed: u64,
    caps: Option<Vec<Vec<f64>>>,
}

impl MatchlineSampler {
    pub fn new(config: ArrayConfig, noise: NoiseModel, seed: u64, total_rows: usize) -> Result<Self> {
        noise.validate()?;
        let caps = (noise.mode == NoiseMode::MonteCarloCaps && noise.resample == ResamplePolicy::PerArrayInstance)
            .then(|| {
                (0..total_rows)
                    .map(|row| {
                        let (a, r) = config.locate(row);
                        draw_caps(&mut substream(seed, &[tag::CAPS, a, r]), config.cols, &noise)
                    })
                    .collect()
            });
        Ok(MatchlineSampler { config, noise, seed, caps })
    }

    pub fn config(&self) -> &ArrayConfig {
        &self.config
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn sample(&self, site: SearchSite, mask: &MismatchMask) -> f64 {
        let cols = self.config.cols;
        let vdd = self.config.vdd;
        let (array, row) = self.config.locate(site.row);
        let n_mis = mask.count();
        match self.noise.mode {
            NoiseMode::Ideal => ideal_voltage(n_mis, cols, vdd),
            NoiseMode::GaussianFormula | NoiseMode::GaussianFlat => {
                let var = match self.noise.mode {
                    NoiseMode::GaussianFlat => flat_variance(cols, vdd, self.noise.sigma_over_mu),
                    _ => eq2_variance(n_mis, cols, vdd, self.noise.sigma_over_mu),
                };
                let ideal = ideal_voltage(n_mis, cols, vdd);
                if var == 0.0 {
                    return ideal;
                }
                let mut rng = substream(self.seed, &[tag::NOISE, array, row, site.read_id, site.kind.code()]);
                let z: f64 = StandardNormal.sample(&mut rng);
                ideal + var.sqrt() * z
            }
            NoiseMode::MonteCarloCaps => match &self.caps {
                Some(all) => voltage_from_caps(&all[site.row], mask.iter_ones(), vdd),
                None => {
                    let mut rng = substream(self.seed, &[tag::CAPS, array, row, site.read_id, site.kind.code()]);
                    let caps = draw_caps(&mut rng, cols, &self.noise);
                    voltage_from_caps(&caps, mask.iter_ones(), vdd)
                }
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ArrayConfig {
        ArrayConfig::default()
    }

    #[test]
    fn ideal_levels() {
        let ideal = NoiseModel::ideal();
        assert_eq!(matchline_voltage(0, &cfg(), &ideal, 1).unwrap(), 0.0);
        assert!((matchline_voltage(128, &cfg(), &ideal, 1).unwrap() - 0.6).abs() < 1e-15);
        assert!(matchline_voltage(257, &cfg(), &ideal, 1).is_err());
    }

    #[test]
    fn eq2_midpoint_value() {
        // 128*128/256^3 * 0.014^2 * 1.2^2
        let v = eq2_variance(128, 256, 1.2, 0.014);
        assert!((v - 2.75625e-7).abs() < 1e-18, "{v}");
        assert!((v.sqrt() - 0.000525).abs() < 1e-6);
    }

    #[test]
    fn eq2_symmetry_and_peak() {
        for k in 0..=256 {
            let a = eq2_variance(k, 256, 1.2, 0.014);
            let b = eq2_variance(256 - k, 256, 1.2, 0.014);
            assert!((a - b).abs() <= 1e-22);
            assert!(a <= eq2_variance(128, 256, 1.2, 0.014));
        }
        assert_eq!(eq2_variance(0, 256, 1.2, 0.014), 0.0);
    }

    /// Largest S with VDD/S >= 6 * sigma_worst(S), by direct search.
    fn states_by_search(r: f64) -> u64 {
        let vdd = 1.2;
        let mut s = 1u64;
        while vdd / (s + 1) as f64 >= 6.0 * r * vdd / (2.0 * ((s + 1) as f64).sqrt()) {
            s += 1;
        }
        s
    }

    #[test]
    fn distinguishable_state_counts() {
        assert_eq!(distinguishable_states(0.014).unwrap(), Some(566));
        assert_eq!(distinguishable_states(0.028).unwrap(), Some(141));
        assert_eq!(distinguishable_states(0.001).unwrap(), Some(111_111));
        assert_eq!(distinguishable_states(0.025).unwrap(), Some(177));
        assert_eq!(distinguishable_states(0.0).unwrap(), None);
        assert!(distinguishable_states(-0.1).is_err());
        for r in [0.014, 0.028, 0.025, 0.005, 0.05, 0.1, 0.3] {
            assert_eq!(distinguishable_states(r).unwrap(), Some(states_by_search(r)), "{r}");
        }
    }

    #[test]
    fn edam_sigma_inverts_state_count() {
        for s in [1, 2, 44, 100, 566] {
            assert_eq!(distinguishable_states(sigma_for_states(s)).unwrap(), Some(s));
        }
        let e = NoiseModel::default().edam_emulated();
        assert_eq!(distinguishable_states(e.sigma_over_mu).unwrap(), Some(EDAM_STATES));
    }

    #[test]
    fn flat_readout_spread_does_not_shrink_at_the_rails() {
        let e = NoiseModel::default().edam_emulated();
        let want = eq2_variance(128, 256, 1.2, e.sigma_over_mu);
        for n in [0, 3, 256] {
            let mut rng = substream(5, &[n as u64]);
            let xs: Vec<f64> = (0..20_000).map(|_| sample_voltage(n, &cfg(), &e, &mut rng).unwrap()).collect();
            let m = xs.iter().sum::<f64>() / xs.len() as f64;
            let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
            assert!((v / want - 1.0).abs() < 0.05, "n={n} v={v} want={want}");
        }
    }

    #[test]
    fn sampler_is_reproducible() {
        use crate::cam::packed::{mismatch_mask, PackedSeq};
        use crate::cam::MatchMode;
        use crate::genome::synthesize_genome;
        let a = synthesize_genome(256, 1).unwrap();
        let b = synthesize_genome(256, 2).unwrap();
        let mask = mismatch_mask(&PackedSeq::new(a.bases()), &PackedSeq::new(b.bases()), MatchMode::EdStar).unwrap();
        for mode in [NoiseMode::GaussianFormula, NoiseMode::MonteCarloCaps] {
            for resample in [ResamplePolicy::PerArrayInstance, ResamplePolicy::PerTrial] {
                let noise = NoiseModel { mode, resample, ..Default::default() };
                let s1 = MatchlineSampler::new(cfg(), noise, 5, 300).unwrap();
                let s2 = MatchlineSampler::new(cfg(), noise, 5, 300).unwrap();
                let site = SearchSite { row: 270, read_id: 3, kind: SearchKind::EdStar };
                let v = s1.sample(site, &mask);
                assert_eq!(v, s2.sample(site, &mask));
                let ideal = ideal_voltage(mask.count(), 256, 1.2);
                assert!((v - ideal).abs() < 0.01);
                let other = s1.sample(SearchSite { read_id: 4, ..site }, &mask);
                if mode == NoiseMode::MonteCarloCaps && resample == ResamplePolicy::PerArrayInstance {
                    assert_eq!(v, other);
                } else {
                    assert_ne!(v, other);
                }
            }
        }
    }
}
