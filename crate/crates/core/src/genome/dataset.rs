use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use super::{Edit, ErrorProfile, GenomeStore, ReadRecord, Segment, Sequence};
use crate::error::{Error, Result};
use crate::oracle;
use crate::rng::{substream, tag};

const READS_MAGIC: &str = "# asmcap reads v1";

/// The two mixed error-rate settings used for short-read evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Condition {
    /// Substitution dominant: e_s = 1%, e_i = e_d = 0.05%.
    A,
    /// Indel dominant: e_s = 0.1%, e_i = e_d = 0.5%.
    B,
}

impl Condition {
    pub fn profile(self) -> ErrorProfile {
        match self {
            Condition::A => ErrorProfile::new(0.01, 0.0005, 0.0005),
            Condition::B => ErrorProfile::new(0.001, 0.005, 0.005),
        }
        .expect("built-in profiles are valid")
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::A => "A",
            Condition::B => "B",
        })
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Condition::A),
            "B" | "b" => Ok(Condition::B),
            _ => Err(Error::param(format!("unknown condition {s:?} (expected A or B)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReadSetMeta {
    /// "A", "B" or "custom".
    pub condition: String,
    pub profile: ErrorProfile,
    pub read_length: usize,
    pub seed: u64,
    pub aligned: bool,
    pub slack: usize,
}

#[derive(Clone, Debug)]
pub struct ReadSet {
    pub meta: ReadSetMeta,
    pub reads: Vec<ReadRecord>,
}

/// Extracts `n_reads` reads of the store's row width and injects edits.
///
/// Aligned reads start exactly at a stored row; unaligned reads start at a
/// uniform reference offset and are attributed to the row containing that
/// offset. The back-fill tail is read cyclically from the reference so the
/// final row also has downstream bases. Read `i` uses its own substream, so
/// the result does not depend on the thread schedule.
pub fn generate_reads(
    store: &GenomeStore,
    n_reads: usize,
    profile: &ErrorProfile,
    slack: usize,
    seed: u64,
    aligned: bool,
) -> Result<Vec<ReadRecord>> {
    let m = store.segment_length();
    let rows = store.len();
    let n = store.reference().len();
    if rows == 0 {
        return Err(Error::param("store has no rows"));
    }

    (0..n_reads)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, &[tag::READ, i as u64]);
            let offset = if aligned {
                rng.random_range(0..rows) * m
            } else {
                rng.random_range(0..=(n - m))
            };
            let origin_row = (offset / m).min(rows - 1);
            let window = store.cyclic_window(offset, m + slack);
            let (read, edit_ledger) = super::inject_edits_with(&window[..m], &window[m..], m, profile, &mut rng)?;
            let true_ed_to_origin = oracle::edit_distance(store.segments()[origin_row].bases.bases(), read.bases());
            Ok(ReadRecord {
                read,
                origin_row,
                edit_ledger,
                true_ed_to_origin,
            })
        })
        .collect()
}

pub fn write_reads_file(path: impl AsRef<Path>, set: &ReadSet) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    let meta = &set.meta;
    writeln!(out, "{READS_MAGIC}")?;
    writeln!(out, "# condition={}", meta.condition)?;
    writeln!(
        out,
        "# profile={},{},{}",
        meta.profile.e_s(),
        meta.profile.e_i(),
        meta.profile.e_d()
    )?;
    writeln!(out, "# read_length={}", meta.read_length)?;
    writeln!(out, "# seed={}", meta.seed)?;
    writeln!(out, "# aligned={}", meta.aligned)?;
    writeln!(out, "# slack={}", meta.slack)?;
    for (id, r) in set.reads.iter().enumerate() {
        writeln!(out, "{id}\t{}\t{}\t{}", r.origin_row, r.read, r.ledger_summary())?;
    }
    out.flush()?;
    Ok(())
}

/// Parses a reads file. `true_ed_to_origin` is recomputed against `rows`.
pub fn read_reads_file(path: impl AsRef<Path>, rows: &[Segment]) -> Result<ReadSet> {
    let path = path.as_ref();
    let width = rows.first().map_or(0, |s| s.bases.len());
    let text = fs::read_to_string(path)?;
    let schema = |line: usize, msg: String| Error::Schema {
        path: path.to_path_buf(),
        line,
        msg,
    };

    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l == READS_MAGIC => {}
        _ => return Err(schema(1, format!("expected {READS_MAGIC:?} header"))),
    }

    let mut condition = None;
    let mut profile = None;
    let mut read_length = None;
    let mut seed = None;
    let mut aligned = None;
    let mut slack = None;
    let mut reads = Vec::new();

    for (idx, line) in lines {
        let lineno = idx + 1;
        if let Some(kv) = line.strip_prefix("# ") {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| schema(lineno, format!("malformed metadata {line:?}")))?;
            let bad = |_| schema(lineno, format!("bad value for {k}: {v:?}"));
            match k {
                "condition" => condition = Some(v.to_string()),
                "profile" => {
                    let rates: Vec<f64> = v
                        .split(',')
                        .map(str::parse::<f64>)
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| schema(lineno, format!("bad profile {v:?}")))?;
                    if rates.len() != 3 {
                        return Err(schema(lineno, format!("profile needs 3 rates, got {v:?}")));
                    }
                    profile = Some(
                        ErrorProfile::new(rates[0], rates[1], rates[2]).map_err(|e| schema(lineno, e.to_string()))?,
                    );
                }
                "read_length" => read_length = Some(v.parse::<usize>().map_err(|e| bad(e.to_string()))?),
                "seed" => seed = Some(v.parse::<u64>().map_err(|e| bad(e.to_string()))?),
                "aligned" => aligned = Some(v.parse::<bool>().map_err(|e| bad(e.to_string()))?),
                "slack" => slack = Some(v.parse::<usize>().map_err(|e| bad(e.to_string()))?),
                _ => return Err(schema(lineno, format!("unknown metadata key {k:?}"))),
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(schema(lineno, format!("expected 4 tab-separated fields, got {}", fields.len())));
        }
        let id: usize = fields[0].parse().map_err(|_| schema(lineno, "bad read_id".into()))?;
        if id != reads.len() {
            return Err(schema(lineno, format!("read ids must be consecutive, expected {}", reads.len())));
        }
        let origin_row: usize = fields[1].parse().map_err(|_| schema(lineno, "bad origin_row".into()))?;
        if origin_row >= rows.len() {
            return Err(schema(lineno, format!("origin_row {origin_row} outside store of {} rows", rows.len())));
        }
        let read: Sequence = fields[2].parse().map_err(|e: Error| schema(lineno, e.to_string()))?;
        if read.len() != width {
            return Err(schema(lineno, format!("read length {} differs from row width {width}", read.len())));
        }
        let edit_ledger = if fields[3].is_empty() {
            Vec::new()
        } else {
            fields[3]
                .split(',')
                .map(str::parse::<Edit>)
                .collect::<Result<Vec<_>>>()
                .map_err(|e| schema(lineno, e.to_string()))?
        };
        let true_ed_to_origin = oracle::edit_distance(rows[origin_row].bases.bases(), read.bases());
        reads.push(ReadRecord {
            read,
            origin_row,
            edit_ledger,
            true_ed_to_origin,
        });
    }

    let missing = |k: &str| schema(1, format!("missing metadata key {k:?}"));
    let meta = ReadSetMeta {
        condition: condition.ok_or_else(|| missing("condition"))?,
        profile: profile.ok_or_else(|| missing("profile"))?,
        read_length: read_length.ok_or_else(|| missing("read_length"))?,
        seed: seed.ok_or_else(|| missing("seed"))?,
        aligned: aligned.ok_or_else(|| missing("aligned"))?,
        slack: slack.ok_or_else(|| missing("slack"))?,
    };
    if meta.read_length != width {
        return Err(schema(1, "read_length metadata differs from row width".into()));
    }
    Ok(ReadSet { meta, reads })
}
