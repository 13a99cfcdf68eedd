//! LIBSVM text format: `<label> <index>:<value> ...` with 1-based indices.
//!
//! Labels greater than zero read as `+1`, everything else as `-1`. Blank
//! lines and `#` comments are skipped.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseRow {
    /// `+1.0` or `-1.0`.
    pub label: f64,
    /// `(index, value)` pairs, 1-based, strictly increasing indices.
    pub entries: Vec<(usize, f64)>,
}

impl SparseRow {
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    /// Largest index present, 0 for an empty row.
    pub fn max_index(&self) -> usize {
        self.entries.last().map_or(0, |(i, _)| *i)
    }

    /// `w^T x` with `w` indexed from 0.
    pub fn dot(&self, w: &[f64]) -> f64 {
        self.entries.iter().map(|(i, v)| w[i - 1] * v).sum()
    }
}

fn parse_line(line: &str, lineno: usize) -> Result<Option<SparseRow>> {
    let content = line.split('#').next().unwrap_or("").trim();
    if content.is_empty() {
        return Ok(None);
    }
    let err = |message: String| Error::Parse {
        line: lineno,
        message,
    };
    let mut tokens = content.split_whitespace();
    let label_tok = tokens.next().unwrap_or_default();
    let label: f64 = label_tok
        .parse()
        .map_err(|_| err(format!("label {label_tok:?} is not a number")))?;
    if !label.is_finite() {
        return Err(err(format!("label {label_tok:?} is not finite")));
    }
    let mut entries = Vec::new();
    for tok in tokens {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| err(format!("expected index:value, got {tok:?}")))?;
        let idx: usize = idx
            .parse()
            .map_err(|_| err(format!("index {idx:?} is not a positive integer")))?;
        if idx == 0 {
            return Err(err("indices are 1-based; got 0".into()));
        }
        let val: f64 = val
            .parse()
            .map_err(|_| err(format!("value {val:?} is not a number")))?;
        if !val.is_finite() {
            return Err(err(format!("value {val:?} is not finite")));
        }
        entries.push((idx, val));
    }
    entries.sort_by_key(|(i, _)| *i);
    if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(err(format!("duplicate index {}", w[0].0)));
    }
    Ok(Some(SparseRow {
        label: if label > 0.0 { 1.0 } else { -1.0 },
        entries,
    }))
}

pub fn parse_libsvm_str(text: &str) -> Result<Vec<SparseRow>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(row) = parse_line(line, i + 1)? {
            rows.push(row);
        }
    }
    Ok(rows)
}

pub fn read_libsvm(path: &Path) -> Result<Vec<SparseRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_libsvm_str(&text)
}

/// Canonical text: `+1`/`-1` labels, ascending indices, shortest
/// round-tripping float formatting, LF line endings.
pub fn write_libsvm(rows: &[SparseRow]) -> String {
    let mut out = String::new();
    for row in rows {
        out.push_str(if row.label > 0.0 { "+1" } else { "-1" });
        for (i, v) in &row.entries {
            let _ = write!(out, " {i}:{v}");
        }
        out.push('\n');
    }
    out
}
