use std::fs;
use std::io::Write;
use std::path::Path;

use super::{Base, Sequence};
use crate::error::{Error, Result};

/// Concatenated bases of every record plus bookkeeping about what was dropped.
#[derive(Clone, Debug)]
pub struct FastaLoad {
    pub sequence: Sequence,
    pub records: usize,
    /// Count of non-ACGT symbols (N, IUPAC codes, ...) removed from the input.
    pub dropped: usize,
}

pub fn load_fasta(path: impl AsRef<Path>) -> Result<FastaLoad> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_fasta(&text, path)
}

/// Lowercase is folded to uppercase; any other non-ACGT symbol is dropped.
pub fn parse_fasta(text: &str, path: &Path) -> Result<FastaLoad> {
    let err = |line: usize, msg: &str| Error::Fasta {
        path: path.to_path_buf(),
        line,
        msg: msg.to_string(),
    };

    let mut bases = Vec::new();
    let mut records = 0;
    let mut dropped = 0;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim_end_matches('\r');
        if let Some(header) = line.strip_prefix('>') {
            if header.trim().is_empty() {
                return Err(err(lineno, "empty record header"));
            }
            records += 1;
            continue;
        }
        if line.trim().is_empty() || line.starts_with(';') {
            continue;
        }
        if records == 0 {
            return Err(err(lineno, "sequence data before first '>' header"));
        }
        for c in line.chars().filter(|c| !c.is_whitespace()) {
            match Base::from_char(c) {
                Some(b) => bases.push(b),
                None => dropped += 1,
            }
        }
    }

    if records == 0 {
        return Err(err(1, "no FASTA records"));
    }
    if bases.is_empty() {
        return Err(err(1, "no A/C/G/T bases in file"));
    }
    Ok(FastaLoad {
        sequence: Sequence::new(bases),
        records,
        dropped,
    })
}

pub fn write_fasta<W: Write>(mut out: W, name: &str, seq: &Sequence, width: usize) -> Result<()> {
    writeln!(out, ">{name}")?;
    for chunk in seq.bases().chunks(width.max(1)) {
        let line: String = chunk.iter().map(|b| b.to_char()).collect();
        writeln!(out, "{line}")?;
    }
    Ok(())
}
