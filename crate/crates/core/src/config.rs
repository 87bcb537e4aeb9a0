//! Run configuration: flat `section.key = value` files with CLI overrides.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::cam::{ArrayConfig, NoiseMode, NoiseModel, ResamplePolicy};
use crate::correction::{HdacParams, RotationDirection, TasrParams};
use crate::error::{Error, Result};
use crate::eval::{parse_strategies, parse_thresholds, EvalPlan, Strategy};
use crate::genome::{Condition, ErrorProfile};

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetConfig {
    pub condition: Condition,
    /// Overrides the condition's error rates when set.
    pub profile: Option<ErrorProfile>,
    pub synth: Option<usize>,
    pub fasta: Option<PathBuf>,
    pub reads: usize,
    pub read_length: usize,
    pub slack: usize,
    pub aligned: bool,
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            condition: Condition::A,
            profile: None,
            synth: None,
            fasta: None,
            reads: 1024,
            read_length: 256,
            slack: 16,
            aligned: true,
            seed: 1,
        }
    }
}

impl DatasetConfig {
    pub fn error_profile(&self) -> ErrorProfile {
        self.profile.unwrap_or_else(|| self.condition.profile())
    }

    /// Label written into reads files and reports.
    pub fn condition_label(&self) -> String {
        match self.profile {
            Some(_) => "custom".to_string(),
            None => self.condition.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalConfig {
    pub thresholds: Vec<usize>,
    pub strategies: Vec<Strategy>,
    pub seed: u64,
    pub distractors: Option<usize>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            thresholds: (1..=10).collect(),
            strategies: vec![Strategy::PlainEdStar, Strategy::Hdac, Strategy::Tasr],
            seed: 1,
            distractors: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub sigmas: Vec<f64>,
    pub points: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            sigmas: vec![0.0, 0.014, 0.028],
            points: vec![0, 64, 128, 192, 256],
            trials: 10_000,
            seed: 1,
        }
    }
}

/// Every tunable parameter of a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub array: ArrayConfig,
    pub noise: NoiseModel,
    pub hdac: HdacParams,
    pub tasr: TasrParams,
    pub dataset: DatasetConfig,
    pub eval: EvalConfig,
    pub sweep: SweepConfig,
    pub out_dir: PathBuf,
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("bad boolean {value:?} for {key}"))),
    }
}

fn parse_opt<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    if value == "none" {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map_or_else(|| "none".to_string(), ToString::to_string)
}

impl RunConfig {
    pub fn new() -> Self {
        RunConfig {
            out_dir: PathBuf::from("."),
            ..Default::default()
        }
    }

    /// Applies one `section.key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let profile = |c: &RunConfig| c.dataset.error_profile();
        match key {
            "array.rows" => self.array.rows = parse(key, v)?,
            "array.cols" => self.array.cols = parse(key, v)?,
            "array.vdd" => self.array.vdd = parse(key, v)?,
            "array.count" => self.array.array_count = parse(key, v)?,
            "noise.mode" => self.noise.mode = v.parse::<NoiseMode>().map_err(|e| Error::Config(e.to_string()))?,
            "noise.mu_c" => self.noise.mu_c = parse(key, v)?,
            "noise.sigma_over_mu" => self.noise.sigma_over_mu = parse(key, v)?,
            "noise.resample" => {
                self.noise.resample = v.parse::<ResamplePolicy>().map_err(|e| Error::Config(e.to_string()))?
            }
            "hdac.alpha" => self.hdac.alpha = parse(key, v)?,
            "hdac.beta" => self.hdac.beta = parse(key, v)?,
            "hdac.disable_threshold" => self.hdac.disable_threshold = parse(key, v)?,
            "hdac.enabled" => self.hdac.enabled = parse_bool(key, v)?,
            "tasr.n_rotations" => self.tasr.n_rotations = parse(key, v)?,
            "tasr.gamma" => self.tasr.gamma = parse(key, v)?,
            "tasr.direction" => {
                self.tasr.direction = v.parse::<RotationDirection>().map_err(|e| Error::Config(e.to_string()))?
            }
            "dataset.condition" => {
                self.dataset.condition = v.parse::<Condition>().map_err(|e| Error::Config(e.to_string()))?
            }
            "errors.e_s" | "errors.e_i" | "errors.e_d" => {
                let p = profile(self);
                let x: f64 = parse(key, v)?;
                let (s, i, d) = match key {
                    "errors.e_s" => (x, p.e_i(), p.e_d()),
                    "errors.e_i" => (p.e_s(), x, p.e_d()),
                    _ => (p.e_s(), p.e_i(), x),
                };
                self.dataset.profile = Some(ErrorProfile::new(s, i, d).map_err(|e| Error::Config(e.to_string()))?);
            }
            "dataset.synth" => self.dataset.synth = parse_opt(key, v)?,
            "dataset.fasta" => self.dataset.fasta = (v != "none").then(|| PathBuf::from(v)),
            "dataset.reads" => self.dataset.reads = parse(key, v)?,
            "dataset.read_length" => self.dataset.read_length = parse(key, v)?,
            "dataset.slack" => self.dataset.slack = parse(key, v)?,
            "dataset.aligned" => self.dataset.aligned = parse_bool(key, v)?,
            "dataset.seed" => self.dataset.seed = parse(key, v)?,
            "eval.thresholds" => {
                self.eval.thresholds = parse_thresholds(v).map_err(|e| Error::Config(e.to_string()))?
            }
            "eval.strategies" => {
                self.eval.strategies = parse_strategies(v).map_err(|e| Error::Config(e.to_string()))?
            }
            "eval.seed" => self.eval.seed = parse(key, v)?,
            "eval.distractors" => self.eval.distractors = parse_opt(key, v)?,
            "sweep.sigmas" => self.sweep.sigmas = parse_list(key, v)?,
            "sweep.points" => self.sweep.points = parse_list(key, v)?,
            "sweep.trials" => self.sweep.trials = parse(key, v)?,
            "sweep.seed" => self.sweep.seed = parse(key, v)?,
            "output.dir" => self.out_dir = PathBuf::from(v),
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies a config file's settings on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            self.set(k.trim(), v).map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let text = std::fs::read_to_string(path.as_ref())?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.array.validate()?;
        self.noise.validate()?;
        self.hdac.validate()?;
        self.tasr.validate()?;
        if self.dataset.read_length == 0 {
            return Err(Error::Config("dataset.read_length must be >= 1".into()));
        }
        if self.eval.thresholds.is_empty() || self.eval.strategies.is_empty() {
            return Err(Error::Config("eval needs thresholds and strategies".into()));
        }
        Ok(())
    }

    /// Canonical text form. Parsing it back yields an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("array.rows", self.array.rows.to_string());
        kv("array.cols", self.array.cols.to_string());
        kv("array.vdd", self.array.vdd.to_string());
        kv("array.count", self.array.array_count.to_string());
        kv("noise.mode", self.noise.mode.as_str().into());
        kv("noise.mu_c", self.noise.mu_c.to_string());
        kv("noise.sigma_over_mu", self.noise.sigma_over_mu.to_string());
        kv("noise.resample", self.noise.resample.as_str().into());
        kv("hdac.alpha", self.hdac.alpha.to_string());
        kv("hdac.beta", self.hdac.beta.to_string());
        kv("hdac.disable_threshold", self.hdac.disable_threshold.to_string());
        kv("hdac.enabled", self.hdac.enabled.to_string());
        kv("tasr.n_rotations", self.tasr.n_rotations.to_string());
        kv("tasr.gamma", self.tasr.gamma.to_string());
        kv("tasr.direction", self.tasr.direction.as_str().into());
        kv("dataset.condition", self.dataset.condition.to_string());
        if let Some(p) = self.dataset.profile {
            kv("errors.e_s", p.e_s().to_string());
            kv("errors.e_i", p.e_i().to_string());
            kv("errors.e_d", p.e_d().to_string());
        }
        kv("dataset.synth", opt(&self.dataset.synth));
        kv(
            "dataset.fasta",
            self.dataset.fasta.as_ref().map_or("none".into(), |p| p.display().to_string()),
        );
        kv("dataset.reads", self.dataset.reads.to_string());
        kv("dataset.read_length", self.dataset.read_length.to_string());
        kv("dataset.slack", self.dataset.slack.to_string());
        kv("dataset.aligned", self.dataset.aligned.to_string());
        kv("dataset.seed", self.dataset.seed.to_string());
        kv("eval.thresholds", join(&self.eval.thresholds));
        kv("eval.strategies", join(&self.eval.strategies));
        kv("eval.seed", self.eval.seed.to_string());
        kv("eval.distractors", opt(&self.eval.distractors));
        kv("sweep.sigmas", join(&self.sweep.sigmas));
        kv("sweep.points", join(&self.sweep.points));
        kv("sweep.trials", self.sweep.trials.to_string());
        kv("sweep.seed", self.sweep.seed.to_string());
        s
    }

    /// First 16 hex digits of the SHA-256 of [`RunConfig::to_text`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn eval_plan(&self) -> EvalPlan {
        EvalPlan {
            thresholds: self.eval.thresholds.clone(),
            strategies: self.eval.strategies.clone(),
            noise: self.noise,
            hdac: self.hdac,
            tasr: self.tasr,
            seed: self.eval.seed,
            distractor_sample: self.eval.distractors,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_array_constants() {
        let c = RunConfig::new();
        assert_eq!((c.array.rows, c.array.cols), (256, 256));
        assert_eq!(c.array.vdd, 1.2);
        assert_eq!(c.noise.mu_c, 2e-15);
        assert_eq!(c.noise.sigma_over_mu, 0.014);
        assert_eq!((c.hdac.alpha, c.hdac.beta), (200.0, 0.5));
        assert_eq!((c.tasr.n_rotations, c.tasr.gamma), (2, 2e-4));
        assert_eq!(c.dataset.read_length, 256);
    }

    #[test]
    fn text_roundtrip() {
        let mut c = RunConfig::new();
        c.apply_text(
            "# comment\nhdac.alpha = 150\ntasr.direction = left\nerrors.e_i = 0.002\neval.thresholds = 1..4\n\
             eval.strategies = hdac,tasr\ndataset.synth = 4096 # trailing\neval.distractors = 7\n",
        )
        .unwrap();
        assert_eq!(c.hdac.alpha, 150.0);
        assert_eq!(c.tasr.direction, RotationDirection::Left);
        assert_eq!(c.dataset.error_profile().e_i(), 0.002);
        assert_eq!(c.dataset.error_profile().e_s(), 0.01);
        assert_eq!(c.dataset.condition_label(), "custom");
        assert_eq!(c.eval.thresholds, vec![1, 2, 3, 4]);
        let mut d = RunConfig::new();
        d.apply_text(&c.to_text()).unwrap();
        assert_eq!(d.to_text(), c.to_text());
        assert_eq!(d.hash(), c.hash());
        assert_ne!(RunConfig::new().hash(), c.hash());
        assert_eq!(c.hash().len(), 16);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        let mut c = RunConfig::new();
        assert!(c.apply_text("foo.bar = 1").is_err());
        assert!(c.apply_text("hdac.alpha").is_err());
        assert!(c.apply_text("hdac.alpha = many").is_err());
        assert!(c.apply_text("hdac.enabled = maybe").is_err());
    }
}
