use rayon::prelude::*;

use crate::cam::{eq2_variance, sample_voltage, ArrayConfig, NoiseModel};
use crate::error::{Error, Result};
use crate::rng::{substream, tag};

pub const SWEEP_HEADER: &str = "sigma_over_mu,n_mis,N,var_empirical,var_eq2,rel_err";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub sigma_over_mu: f64,
    pub n_mis: usize,
    pub cols: usize,
    pub var_empirical: f64,
    pub var_eq2: f64,
    pub rel_err: f64,
}

impl SweepRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{:.6e},{:.6e},{:.6}",
            self.sigma_over_mu, self.n_mis, self.cols, self.var_empirical, self.var_eq2, self.rel_err
        )
    }
}

/// Empirical matchline variance from per-trial capacitor draws, against the
/// closed form. Each `(sigma, n_mis)` point has its own substream.
pub fn sweep_noise(
    sigmas: &[f64],
    points: &[usize],
    trials: usize,
    seed: u64,
    config: &ArrayConfig,
) -> Result<Vec<SweepRow>> {
    if trials < 2 {
        return Err(Error::param("sweep needs at least 2 trials"));
    }
    if let Some(&n) = points.iter().find(|&&n| n > config.cols) {
        return Err(Error::IndexOutOfRange { index: n, len: config.cols + 1 });
    }
    let grid: Vec<(usize, f64, usize)> = sigmas
        .iter()
        .enumerate()
        .flat_map(|(si, &s)| points.iter().map(move |&n| (si, s, n)))
        .collect();
    grid.par_iter()
        .map(|&(si, sigma, n_mis)| {
            let noise = NoiseModel::monte_carlo_per_trial(sigma);
            noise.validate()?;
            let mut rng = substream(seed, &[tag::SWEEP, si as u64, n_mis as u64]);
            let (mut mean, mut m2) = (0.0f64, 0.0f64);
            for k in 0..trials {
                let v = sample_voltage(n_mis, config, &noise, &mut rng)?;
                let d = v - mean;
                mean += d / (k + 1) as f64;
                m2 += d * (v - mean);
            }
            let var_empirical = m2 / (trials - 1) as f64;
            let var_eq2 = eq2_variance(n_mis, config.cols, config.vdd, sigma);
            let rel_err = if var_eq2 == 0.0 {
                if var_empirical.abs() < 1e-30 { 0.0 } else { f64::INFINITY }
            } else {
                (var_empirical - var_eq2).abs() / var_eq2
            };
            Ok(SweepRow {
                sigma_over_mu: sigma,
                n_mis,
                cols: config.cols,
                var_empirical,
                var_eq2,
                rel_err,
            })
        })
        .collect()
}

pub fn write_sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}
