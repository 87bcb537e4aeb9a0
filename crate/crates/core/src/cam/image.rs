use std::fs;
use std::io::Write;
use std::path::Path;

use super::{ArrayConfig, MatchMode, NoiseMode, NoiseModel, PackedSeq, ResamplePolicy};
use crate::error::{Error, Result};
use crate::genome::{GenomeStore, Segment, Sequence};

const IMAGE_MAGIC: &str = "# asmcap array-image v1";

/// Contents of the CAM arrays: one stored reference segment per row, in
/// global row order (row `k` lives in array `k / M`).
#[derive(Clone, Debug)]
pub struct ArrayImage {
    config: ArrayConfig,
    mode: MatchMode,
    noise: NoiseModel,
    segments: Vec<Segment>,
    packed: Vec<PackedSeq>,
}

impl ArrayImage {
    pub fn from_store(store: &GenomeStore, config: ArrayConfig) -> Self {
        let config = ArrayConfig {
            cols: store.segment_length(),
            ..config
        };
        Self::from_segments(store.segments().to_vec(), config, MatchMode::EdStar, NoiseModel::default())
            .expect("segments of a store share one width")
    }

    pub fn from_segments(segments: Vec<Segment>, config: ArrayConfig, mode: MatchMode, noise: NoiseModel) -> Result<Self> {
        config.validate()?;
        for s in &segments {
            if s.bases.len() != config.cols {
                return Err(Error::LengthMismatch { left: s.bases.len(), right: config.cols });
            }
        }
        let packed = segments.iter().map(|s| PackedSeq::new(s.bases.bases())).collect();
        Ok(ArrayImage { config, mode, noise, segments, packed })
    }

    pub fn with_defaults(mut self, mode: MatchMode, noise: NoiseModel) -> Self {
        self.mode = mode;
        self.noise = noise;
        self
    }

    pub fn config(&self) -> &ArrayConfig {
        &self.config
    }

    pub fn default_mode(&self) -> MatchMode {
        self.mode
    }

    pub fn default_noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn packed_rows(&self) -> &[PackedSeq] {
        &self.packed
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

pub fn write_array_image(path: impl AsRef<Path>, image: &ArrayImage) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    let c = image.config;
    let n = image.noise;
    writeln!(out, "{IMAGE_MAGIC}")?;
    writeln!(out, "M={}", c.rows)?;
    writeln!(out, "N={}", c.cols)?;
    writeln!(out, "VDD={}", c.vdd)?;
    writeln!(out, "arrays={}", c.array_count)?;
    writeln!(out, "mode={}", image.mode)?;
    writeln!(out, "noise={}", n.mode)?;
    writeln!(out, "mu_c={}", n.mu_c)?;
    writeln!(out, "sigma_over_mu={}", n.sigma_over_mu)?;
    writeln!(out, "resample={}", n.resample.as_str())?;
    writeln!(out, "rows={}", image.segments.len())?;
    for s in &image.segments {
        writeln!(out, "{}\t{}\t{}", s.row, s.offset, s.bases)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_array_image(path: impl AsRef<Path>) -> Result<ArrayImage> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let schema = |line: usize, msg: String| Error::Schema {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l == IMAGE_MAGIC => {}
        _ => return Err(schema(1, format!("expected {IMAGE_MAGIC:?} header"))),
    }

    let mut header = std::collections::BTreeMap::new();
    let mut segments = Vec::new();
    let mut expected_rows = None;
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        if expected_rows.is_none() {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| schema(lineno, format!("malformed header line {line:?}")))?;
            if k == "rows" {
                expected_rows = Some(v.parse::<usize>().map_err(|_| schema(lineno, format!("bad row count {v:?}")))?);
            } else {
                header.insert(k.to_string(), (lineno, v.to_string()));
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(schema(lineno, format!("expected 3 tab-separated fields, got {}", fields.len())));
        }
        let row: usize = fields[0].parse().map_err(|_| schema(lineno, "bad row index".into()))?;
        if row != segments.len() {
            return Err(schema(lineno, format!("row indices must be consecutive, expected {}", segments.len())));
        }
        let offset: usize = fields[1].parse().map_err(|_| schema(lineno, "bad offset".into()))?;
        let bases: Sequence = fields[2].parse().map_err(|e: Error| schema(lineno, e.to_string()))?;
        segments.push(Segment { row, offset, bases });
    }

    let expected_rows = expected_rows.ok_or_else(|| schema(1, "missing rows= line".into()))?;
    if expected_rows != segments.len() {
        return Err(schema(1, format!("header declares {expected_rows} rows, found {}", segments.len())));
    }

    fn get<T: std::str::FromStr>(
        header: &std::collections::BTreeMap<String, (usize, String)>,
        key: &str,
        schema: &dyn Fn(usize, String) -> Error,
    ) -> Result<T> {
        let (line, v) = header
            .get(key)
            .ok_or_else(|| schema(1, format!("missing header key {key:?}")))?;
        v.parse().map_err(|_| schema(*line, format!("bad value for {key}: {v:?}")))
    }

    let config = ArrayConfig {
        rows: get(&header, "M", &schema)?,
        cols: get(&header, "N", &schema)?,
        vdd: get(&header, "VDD", &schema)?,
        array_count: get(&header, "arrays", &schema)?,
    };
    let mode: MatchMode = get(&header, "mode", &schema)?;
    let noise = NoiseModel {
        mode: get::<NoiseMode>(&header, "noise", &schema)?,
        mu_c: get(&header, "mu_c", &schema)?,
        sigma_over_mu: get(&header, "sigma_over_mu", &schema)?,
        resample: get::<ResamplePolicy>(&header, "resample", &schema)?,
    };
    noise.validate().map_err(|e| schema(1, e.to_string()))?;
    ArrayImage::from_segments(segments, config, mode, noise).map_err(|e| schema(1, e.to_string()))
}
