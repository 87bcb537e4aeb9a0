use std::io::Write;
use std::path::Path;

use super::{ConfusionCounts, F1Scores, Strategy};
use crate::error::Result;

pub const REPORT_HEADER: &str = "condition,strategy,T,tp,fp,fn,tn,sensitivity,precision,f1,cycles,energy_joules,seed";

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub condition: String,
    pub strategy: Strategy,
    pub t: usize,
    pub counts: ConfusionCounts,
    pub scores: F1Scores,
    /// Row decisions where a correction strategy changed the outcome path.
    pub fired: u64,
    pub cycles: u64,
    pub energy_joules: f64,
    pub seed: u64,
}

fn ratio(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".to_string(), |v| format!("{v:.6}"))
}

impl ReportRow {
    pub fn to_csv(&self) -> String {
        let c = &self.counts;
        let energy = if self.energy_joules.is_nan() {
            "nan".to_string()
        } else {
            format!("{:.6e}", self.energy_joules)
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.condition,
            self.strategy,
            self.t,
            c.tp,
            c.fp,
            c.fn_,
            c.tn,
            ratio(self.scores.sensitivity),
            ratio(self.scores.precision),
            ratio(self.scores.f1),
            self.cycles,
            energy,
            self.seed
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
}

impl EvalReport {
    pub fn row(&self, strategy: Strategy, t: usize) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.strategy == strategy && r.t == t)
    }

    pub fn f1(&self, strategy: Strategy, t: usize) -> Option<f64> {
        self.row(strategy, t).and_then(|r| r.scores.f1)
    }

    /// Mean F1 of `strategy` over `ts`, skipping undefined values.
    pub fn mean_f1(&self, strategy: Strategy, ts: impl IntoIterator<Item = usize>) -> Option<f64> {
        let vals: Vec<f64> = ts.into_iter().filter_map(|t| self.f1(strategy, t)).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    pub fn extend(&mut self, other: EvalReport) {
        self.rows.extend(other.rows);
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(REPORT_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.to_csv());
            s.push('\n');
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(self.to_csv().as_bytes())?;
        f.flush()?;
        Ok(())
    }
}

/// Reads `(strategy, T, f1)` triples back from a report CSV.
pub fn read_f1_points(path: impl AsRef<Path>) -> Result<Vec<(String, usize, Option<f64>)>> {
    use crate::error::Error;
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let schema = |line: usize, msg: &str| Error::Schema {
        path: path.to_path_buf(),
        line,
        msg: msg.to_string(),
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == REPORT_HEADER => {}
        _ => return Err(schema(1, "missing report header")),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 13 {
            return Err(schema(i + 1, "expected 13 fields"));
        }
        let t = f[2].parse().map_err(|_| schema(i + 1, "bad T"))?;
        let f1 = match f[9] {
            "nan" => None,
            v => Some(v.parse().map_err(|_| schema(i + 1, "bad f1"))?),
        };
        out.push((f[1].to_string(), t, f1));
    }
    Ok(out)
}
