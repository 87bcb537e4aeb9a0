//! Experiment runner: datasets, strategy evaluation, F1 reports and noise sweeps.

mod metrics;
mod report;
mod sweep;

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rayon::prelude::*;

pub use metrics::{compute_f1, ConfusionCounts, F1Scores};
pub use report::{read_f1_points, EvalReport, ReportRow, REPORT_HEADER};
pub use sweep::{sweep_noise, write_sweep_csv, SweepRow, SWEEP_HEADER};

use crate::cam::{
    mismatch_mask, row_energy, sense, ArrayConfig, ArrayImage, MatchMode, MatchlineSampler, NoiseModel, PackedSeq,
    SearchKind, SearchSite,
};
use crate::correction::{
    hdac_decide, hdac_probability, rotation_plan, tasr_combine, tasr_lower_bound, tasr_triggered, HdacParams,
    MatchDecision, StrategyFired, TasrParams,
};
use crate::error::{Error, Result};
use crate::genome::{generate_reads, segment_reference, synthesize_genome, Condition, GenomeStore, ReadSet, ReadSetMeta};
use crate::oracle::edit_distance_capped;
use crate::rng::{derive_seed, substream, tag};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    PlainEdStar,
    HdOnly,
    Hdac,
    Tasr,
    HdacTasr,
    /// ED* matching read out through a matchline with only 44 distinguishable states.
    EdamEmulated,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::PlainEdStar,
        Strategy::HdOnly,
        Strategy::Hdac,
        Strategy::Tasr,
        Strategy::HdacTasr,
        Strategy::EdamEmulated,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::PlainEdStar => "plain_ed_star",
            Strategy::HdOnly => "hd_only",
            Strategy::Hdac => "hdac",
            Strategy::Tasr => "tasr",
            Strategy::HdacTasr => "hdac+tasr",
            Strategy::EdamEmulated => "edam_emulated",
        }
    }

    fn uses_hd(self) -> bool {
        matches!(self, Strategy::HdOnly | Strategy::Hdac | Strategy::HdacTasr)
    }

    fn uses_rotation(self) -> bool {
        matches!(self, Strategy::Tasr | Strategy::HdacTasr)
    }

    fn uses_hdac(self) -> bool {
        matches!(self, Strategy::Hdac | Strategy::HdacTasr)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .or(match s {
                "plain" => Some(Strategy::PlainEdStar),
                "hd" => Some(Strategy::HdOnly),
                "edam" => Some(Strategy::EdamEmulated),
                _ => None,
            })
            .ok_or_else(|| Error::param(format!("unknown strategy {s:?}")))
    }
}

/// Parses a comma-separated list such as `plain_ed_star,hdac`.
pub fn parse_strategies(s: &str) -> Result<Vec<Strategy>> {
    s.split(',').filter(|x| !x.is_empty()).map(|x| x.trim().parse()).collect()
}

/// Parses `1,2,5` or `1..10` (inclusive) or a mix of both.
pub fn parse_thresholds(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let bad = || Error::param(format!("bad threshold list entry {part:?}"));
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = a.parse().map_err(|_| bad())?;
            let b: usize = b.trim_start_matches('=').parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(Error::param("threshold list is empty"));
    }
    Ok(out)
}

/// Search cycles one read costs under `strategy`: one ED* (or HD) search,
/// plus one HD search while HDAC is active, plus one per rotated copy while
/// TASR is triggered.
pub fn search_cycles(strategy: Strategy, hdac_active: bool, tasr_on: bool, n_rotations: usize) -> u64 {
    let hdac_extra = u64::from(strategy.uses_hdac() && hdac_active);
    let tasr_extra = if strategy.uses_rotation() && tasr_on { n_rotations as u64 } else { 0 };
    1 + hdac_extra + tasr_extra
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalPlan {
    pub thresholds: Vec<usize>,
    pub strategies: Vec<Strategy>,
    pub noise: NoiseModel,
    pub hdac: HdacParams,
    pub tasr: TasrParams,
    pub seed: u64,
    /// Evaluate each read only on its origin row plus this many random rows.
    pub distractor_sample: Option<usize>,
}

impl Default for EvalPlan {
    fn default() -> Self {
        EvalPlan {
            thresholds: (1..=10).collect(),
            strategies: Strategy::ALL.to_vec(),
            noise: NoiseModel::default(),
            hdac: HdacParams::default(),
            tasr: TasrParams::default(),
            seed: 1,
            distractor_sample: None,
        }
    }
}

/// Everything measured for one read against the rows it is evaluated on.
#[derive(Clone, Debug)]
pub struct ReadTrace {
    pub read_id: u64,
    pub rows: Vec<RowTrace>,
    energy_ed: f64,
    energy_hd: f64,
    energy_rot: f64,
}

#[derive(Clone, Debug)]
pub struct RowTrace {
    pub row: usize,
    /// `min(ED, max threshold + 1)`.
    pub ed_capped: usize,
    pub n_ed_star: usize,
    pub n_hd: usize,
    pub v_ed_star: f64,
    pub v_hd: f64,
    pub v_edam: f64,
    pub v_rot: Vec<f64>,
}

pub struct Evaluator<'a> {
    image: &'a ArrayImage,
    reads: &'a ReadSet,
    plan: &'a EvalPlan,
    sampler: MatchlineSampler,
    edam_sampler: MatchlineSampler,
    lower_bound: Option<usize>,
    hdac_p: Vec<f64>,
    cap: usize,
    need_hd: bool,
    need_rot: bool,
    need_edam: bool,
}

impl<'a> Evaluator<'a> {
    pub fn new(image: &'a ArrayImage, reads: &'a ReadSet, plan: &'a EvalPlan) -> Result<Self> {
        if plan.thresholds.is_empty() {
            return Err(Error::param("no thresholds to evaluate"));
        }
        if plan.strategies.is_empty() {
            return Err(Error::param("no strategies to evaluate"));
        }
        if image.is_empty() {
            return Err(Error::param("array image has no rows"));
        }
        plan.hdac.validate()?;
        plan.tasr.validate()?;
        let cols = image.config().cols;
        if let Some(r) = reads.reads.iter().find(|r| r.read.len() != cols) {
            return Err(Error::LengthMismatch { left: r.read.len(), right: cols });
        }
        let profile = &reads.meta.profile;
        let hdac_p = if plan.strategies.iter().any(|s| s.uses_hdac()) {
            plan.thresholds
                .iter()
                .map(|&t| hdac_probability(profile, t, &plan.hdac))
                .collect::<Result<_>>()?
        } else {
            vec![0.0; plan.thresholds.len()]
        };
        let lower_bound = tasr_lower_bound(profile, cols, &plan.tasr);
        let cfg = *image.config();
        let rows = image.len();
        Ok(Evaluator {
            image,
            reads,
            plan,
            sampler: MatchlineSampler::new(cfg, plan.noise, plan.seed, rows)?,
            edam_sampler: MatchlineSampler::new(cfg, plan.noise.edam_emulated(), plan.seed, rows)?,
            lower_bound,
            hdac_p,
            cap: plan.thresholds.iter().max().copied().unwrap_or(0) + 1,
            need_hd: plan.strategies.iter().any(|s| s.uses_hd()),
            need_rot: plan.strategies.iter().any(|s| s.uses_rotation())
                && plan.thresholds.iter().any(|&t| tasr_triggered(t, lower_bound)),
            need_edam: plan.strategies.contains(&Strategy::EdamEmulated),
        })
    }

    pub fn lower_bound(&self) -> Option<usize> {
        self.lower_bound
    }

    pub fn hdac_probability_at(&self, t_index: usize) -> f64 {
        self.hdac_p[t_index]
    }

    fn config(&self) -> &ArrayConfig {
        self.image.config()
    }

    fn rows_for(&self, read_idx: usize) -> Vec<usize> {
        let n = self.image.len();
        match self.plan.distractor_sample {
            None => (0..n).collect(),
            Some(k) => {
                let origin = self.reads.reads[read_idx].origin_row;
                let mut rng = substream(self.plan.seed, &[tag::DISTRACTOR, read_idx as u64]);
                let others = index::sample(&mut rng, n - 1, k.min(n - 1));
                let mut rows: Vec<usize> = std::iter::once(origin)
                    .chain(others.into_iter().map(|i| if i >= origin { i + 1 } else { i }))
                    .collect();
                rows.sort_unstable();
                rows
            }
        }
    }

    pub fn trace(&self, read_idx: usize) -> Result<ReadTrace> {
        let record = &self.reads.reads[read_idx];
        let read_id = read_idx as u64;
        let read = PackedSeq::new(record.read.bases());
        let rotations: Vec<PackedSeq> = if self.need_rot {
            rotation_plan(&self.plan.tasr)
                .into_iter()
                .map(|r| PackedSeq::new(r.apply(&record.read).bases()))
                .collect()
        } else {
            Vec::new()
        };
        let cfg = *self.config();
        let mu_c = self.plan.noise.mu_c;
        let (mut energy_ed, mut energy_hd, mut energy_rot) = (0.0, 0.0, 0.0);

        let mut rows = Vec::new();
        for row in self.rows_for(read_idx) {
            let stored = &self.image.packed_rows()[row];
            let site = |kind| SearchSite { row, read_id, kind };
            let ed_mask = mismatch_mask(stored, &read, MatchMode::EdStar)?;
            let n_ed_star = ed_mask.count();
            energy_ed += row_energy(n_ed_star, &cfg, mu_c);
            let v_ed_star = self.sampler.sample(site(SearchKind::EdStar), &ed_mask);

            let (n_hd, v_hd) = if self.need_hd {
                let m = mismatch_mask(stored, &read, MatchMode::Hamming)?;
                let n = m.count();
                energy_hd += row_energy(n, &cfg, mu_c);
                (n, self.sampler.sample(site(SearchKind::Hamming), &m))
            } else {
                (0, f64::NAN)
            };

            let v_edam = if self.need_edam {
                self.edam_sampler.sample(site(SearchKind::EdamReadout), &ed_mask)
            } else {
                f64::NAN
            };

            let mut v_rot = Vec::with_capacity(rotations.len());
            for (i, r) in rotations.iter().enumerate() {
                let m = mismatch_mask(stored, r, MatchMode::EdStar)?;
                energy_rot += row_energy(m.count(), &cfg, mu_c);
                v_rot.push(self.sampler.sample(site(SearchKind::Rotation(i as u32 + 1)), &m));
            }

            let ed_capped = edit_distance_capped(self.image.segments()[row].bases.bases(), record.read.bases(), self.cap);
            rows.push(RowTrace {
                row,
                ed_capped,
                n_ed_star,
                n_hd,
                v_ed_star,
                v_hd,
                v_edam,
                v_rot,
            });
        }
        Ok(ReadTrace {
            read_id,
            rows,
            energy_ed,
            energy_hd,
            energy_rot,
        })
    }

    /// Decision of `strategy` at the `t_index`-th threshold for one traced row.
    pub fn decide(&self, trace: &ReadTrace, row: &RowTrace, t_index: usize, strategy: Strategy) -> MatchDecision {
        let t = self.plan.thresholds[t_index];
        let cfg = self.config();
        let ed = sense(row.v_ed_star, t, cfg);
        let tasr = || tasr_combine(t, self.lower_bound, ed, row.v_rot.iter().map(|&v| sense(v, t, cfg)));
        let hdac = |inner: MatchDecision| {
            let p = self.hdac_p[t_index];
            if !self.plan.hdac.is_active(p) {
                return inner;
            }
            let seed = derive_seed(self.plan.seed, &[tag::HDAC, trace.read_id, row.row as u64, t as u64]);
            let d = hdac_decide(sense(row.v_hd, t, cfg), inner.o_ed_star, p, seed);
            if d.fired == StrategyFired::None && inner.fired != StrategyFired::None {
                MatchDecision { fired: inner.fired, ..d }
            } else {
                d
            }
        };
        match strategy {
            Strategy::PlainEdStar => MatchDecision::plain(ed),
            Strategy::HdOnly => {
                let hd = sense(row.v_hd, t, cfg);
                MatchDecision {
                    o_hd: Some(hd),
                    o_ed_star: ed,
                    o_final: hd,
                    fired: StrategyFired::None,
                }
            }
            Strategy::Hdac => hdac(MatchDecision::plain(ed)),
            Strategy::Tasr => tasr(),
            Strategy::HdacTasr => hdac(tasr()),
            Strategy::EdamEmulated => MatchDecision::plain(sense(row.v_edam, t, cfg)),
        }
    }

    /// Ground truth at the `t_index`-th threshold.
    pub fn truth(&self, row: &RowTrace, t_index: usize) -> bool {
        row.ed_capped <= self.plan.thresholds[t_index]
    }

    /// Search cycles and energy one read costs.
    pub fn cycle_energy_account(&self, trace: &ReadTrace, t_index: usize, strategy: Strategy) -> (u64, f64) {
        let t = self.plan.thresholds[t_index];
        let hdac_on = self.plan.hdac.is_active(self.hdac_p[t_index]);
        let tasr_on = tasr_triggered(t, self.lower_bound);
        let passes = self.config().passes_for(self.image.len()) as u64;
        let cycles = passes * search_cycles(strategy, hdac_on, tasr_on, self.plan.tasr.n_rotations);
        let energy = match strategy {
            Strategy::EdamEmulated => f64::NAN,
            Strategy::HdOnly => trace.energy_hd,
            s => {
                let mut e = trace.energy_ed;
                if s.uses_hdac() && hdac_on {
                    e += trace.energy_hd;
                }
                if s.uses_rotation() && tasr_on {
                    e += trace.energy_rot;
                }
                e
            }
        };
        (cycles, energy)
    }

    fn tally(&self, read_idx: usize) -> Result<Vec<Tally>> {
        let trace = self.trace(read_idx)?;
        let mut out = Vec::with_capacity(self.plan.thresholds.len() * self.plan.strategies.len());
        for ti in 0..self.plan.thresholds.len() {
            for &s in &self.plan.strategies {
                let mut t = Tally::default();
                for row in &trace.rows {
                    let d = self.decide(&trace, row, ti, s);
                    t.counts.record(self.truth(row, ti), d.o_final);
                    t.fired += u64::from(d.fired != StrategyFired::None);
                }
                let (c, e) = self.cycle_energy_account(&trace, ti, s);
                t.cycles = c;
                t.energy = e;
                out.push(t);
            }
        }
        Ok(out)
    }

    /// Evaluates every read. Per-read tallies are reduced in read order, so
    /// the report does not depend on the thread schedule.
    pub fn run(&self) -> Result<EvalReport> {
        let per_read: Vec<Vec<Tally>> = (0..self.reads.reads.len())
            .into_par_iter()
            .map(|i| self.tally(i))
            .collect::<Result<_>>()?;
        let width = self.plan.thresholds.len() * self.plan.strategies.len();
        let mut acc = vec![Tally::default(); width];
        for tallies in &per_read {
            for (a, t) in acc.iter_mut().zip(tallies) {
                a.counts += t.counts;
                a.fired += t.fired;
                a.cycles += t.cycles;
                a.energy += t.energy;
            }
        }
        let mut rows = Vec::with_capacity(width);
        for &s in &self.plan.strategies {
            for (ti, &t) in self.plan.thresholds.iter().enumerate() {
                let a = acc[ti * self.plan.strategies.len() + self.plan.strategies.iter().position(|&x| x == s).unwrap()];
                rows.push(ReportRow {
                    condition: self.reads.meta.condition.clone(),
                    strategy: s,
                    t,
                    counts: a.counts,
                    scores: compute_f1(&a.counts),
                    fired: a.fired,
                    cycles: a.cycles,
                    energy_joules: a.energy,
                    seed: self.plan.seed,
                });
            }
        }
        Ok(EvalReport { rows })
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Tally {
    counts: ConfusionCounts,
    fired: u64,
    cycles: u64,
    energy: f64,
}

/// Shape of a synthetic evaluation dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSpec {
    pub condition: Condition,
    pub n_reads: usize,
    pub n_rows: usize,
    pub read_length: usize,
    pub slack: usize,
    pub aligned: bool,
    pub seed: u64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec {
            condition: Condition::A,
            n_reads: 1024,
            n_rows: 2048,
            read_length: 256,
            slack: 16,
            aligned: true,
            seed: 1,
        }
    }
}

/// Synthesizes a reference of `n_rows` rows, segments it, and extracts reads.
pub fn build_dataset(spec: &DatasetSpec) -> Result<(GenomeStore, ReadSet)> {
    let genome = synthesize_genome(spec.n_rows * spec.read_length, spec.seed)?;
    let store = segment_reference(genome, spec.read_length)?;
    let reads = build_reads(&store, spec.condition.to_string(), spec.condition.profile(), spec)?;
    Ok((store, reads))
}

pub fn build_reads(
    store: &GenomeStore,
    condition: String,
    profile: crate::genome::ErrorProfile,
    spec: &DatasetSpec,
) -> Result<ReadSet> {
    let reads = generate_reads(store, spec.n_reads, &profile, spec.slack, spec.seed, spec.aligned)?;
    Ok(ReadSet {
        meta: ReadSetMeta {
            condition,
            profile,
            read_length: store.segment_length(),
            seed: spec.seed,
            aligned: spec.aligned,
            slack: spec.slack,
        },
        reads,
    })
}

/// Builds a dataset for `spec` and evaluates `plan` on it.
pub fn run_condition(spec: &DatasetSpec, plan: &EvalPlan, config: ArrayConfig) -> Result<EvalReport> {
    let (store, reads) = build_dataset(spec)?;
    let image = ArrayImage::from_store(&store, config);
    Evaluator::new(&image, &reads, plan)?.run()
}
