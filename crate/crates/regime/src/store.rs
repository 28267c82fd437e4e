//! Dataset files.
//!
//! *Text*: UTF-8, comma-separated, one observation per line. An optional
//! header line `#fields: a,b,...` names the columns; `weight`, `x`, `y` and
//! `t` are reserved for weights and coordinates and every other column is an
//! equation term, in order. Without a header every column is a term. Other
//! lines starting with `#` and blank lines are ignored.
//!
//! *Binary*: the magic bytes `RGSC`, then little-endian `u32` version (1),
//! `N`, `D`, `C`, then little-endian `f64` terms (`N x D`, row-major),
//! weights (`N`) and coordinates (`N x C`).

use std::path::Path;

use regime_core::TermDataset;

use crate::error::{CliError, Result};
use crate::fsutil::write_atomic;

pub const MAGIC: &[u8; 4] = b"RGSC";
pub const BINARY_VERSION: u32 = 1;
const COORD_NAMES: [&str; 3] = ["x", "y", "t"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Binary,
}

impl Format {
    /// `.rgsc` and `.bin` files are binary; anything else is text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("rgsc" | "bin") => Format::Binary,
            _ => Format::Text,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Text => "csv",
            Format::Binary => "rgsc",
        }
    }
}

/// Reads a dataset, recognizing the binary format by its magic bytes.
pub fn load_dataset(path: &Path) -> Result<TermDataset> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    if bytes.starts_with(MAGIC) {
        parse_binary(&bytes, path)
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| CliError::Format { path: path.into(), message: "not UTF-8 text".into() })?;
        parse_text(&text, path)
    }
}

pub fn write_dataset(path: &Path, ds: &TermDataset, format: Format) -> Result<()> {
    let bytes = match format {
        Format::Text => to_text(ds, path)?.into_bytes(),
        Format::Binary => to_binary(ds),
    };
    write_atomic(path, &bytes)
}

pub fn parse_text(text: &str, path: &Path) -> Result<TermDataset> {
    let parse_err = |line: usize, message: String| CliError::Parse { path: path.into(), line, message };
    let mut header: Option<Vec<String>> = None;
    let mut width: Option<usize> = None;
    let mut cells: Vec<f64> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if let Some(fields) = line.strip_prefix("#fields:") {
            if width.is_some() || header.is_some() {
                return Err(parse_err(line_no, "the #fields: header must precede all data".into()));
            }
            let names: Vec<String> = fields.split(',').map(|s| s.trim().to_string()).collect();
            if names.iter().any(String::is_empty) {
                return Err(parse_err(line_no, "empty column name in header".into()));
            }
            width = Some(names.len());
            header = Some(names);
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let before = cells.len();
        for (col, cell) in line.split(',').enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| parse_err(line_no, format!("column {}: '{}' is not a number", col + 1, cell.trim())))?;
            cells.push(v);
        }
        let found = cells.len() - before;
        match width {
            Some(w) if w != found => {
                return Err(parse_err(line_no, format!("expected {w} columns, found {found}")));
            }
            None => width = Some(found),
            _ => {}
        }
    }
    let width = width.ok_or_else(|| CliError::Format { path: path.into(), message: "no data rows".into() })?;
    if cells.is_empty() {
        return Err(CliError::Format { path: path.into(), message: "no data rows".into() });
    }
    let names = header.unwrap_or_else(|| (0..width).map(|i| format!("e{i}")).collect());
    assemble(&cells, &names, path)
}

/// Splits flat rows into terms, weights and coordinates by column name.
fn assemble(cells: &[f64], names: &[String], path: &Path) -> Result<TermDataset> {
    let width = names.len();
    let mut term_cols = Vec::new();
    let mut coord_cols = Vec::new();
    let mut weight_col = None;
    for (i, name) in names.iter().enumerate() {
        if name == "weight" {
            if weight_col.replace(i).is_some() {
                return Err(CliError::Format { path: path.into(), message: "duplicate weight column".into() });
            }
        } else if COORD_NAMES.contains(&name.as_str()) {
            if coord_cols.iter().any(|&c: &usize| names[c] == *name) {
                return Err(CliError::Format { path: path.into(), message: format!("duplicate column {name}") });
            }
            coord_cols.push(i);
        } else {
            term_cols.push(i);
        }
    }
    let rows = cells.chunks_exact(width);
    let terms: Vec<f64> = rows.clone().flat_map(|r| term_cols.iter().map(move |&c| r[c])).collect();
    let weights = weight_col.map(|c| rows.clone().map(|r| r[c]).collect());
    let mut ds = TermDataset::new(terms, term_cols.len(), weights)?
        .with_term_names(term_cols.iter().map(|&c| names[c].clone()).collect())?;
    if !coord_cols.is_empty() {
        let coords = rows.flat_map(|r| coord_cols.iter().map(move |&c| r[c])).collect();
        ds = ds.with_coords(coords, coord_cols.iter().map(|&c| names[c].clone()).collect())?;
    }
    Ok(ds)
}

/// Text form with a header; values use the shortest representation that
/// parses back to the same bits.
pub fn to_text(ds: &TermDataset, path: &Path) -> Result<String> {
    if let Some(clash) = ds.term_names().iter().find(|n| *n == "weight" || COORD_NAMES.contains(&n.as_str())) {
        return Err(CliError::Format { path: path.into(), message: format!("term name {clash:?} is reserved") });
    }
    let mut names: Vec<&str> = ds.term_names().iter().map(String::as_str).collect();
    names.push("weight");
    names.extend(ds.coord_names().iter().map(String::as_str));
    if let Some(bad) = names.iter().find(|n| n.contains([',', '\n', '\r']) || n.trim() != **n || n.is_empty()) {
        return Err(CliError::Format { path: path.into(), message: format!("column name {bad:?} cannot be written") });
    }
    let mut out = String::with_capacity(ds.n_rows() * (ds.n_terms() + 1 + ds.n_coords()) * 24);
    out.push_str("#fields: ");
    out.push_str(&names.join(","));
    out.push('\n');
    for i in 0..ds.n_rows() {
        let values = ds.row(i).iter().chain(std::iter::once(&ds.weights()[i])).chain(ds.coord(i).unwrap_or(&[]));
        for (j, v) in values.enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{v:?}"));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn to_binary(ds: &TermDataset) -> Vec<u8> {
    let (n, d, c) = (ds.n_rows(), ds.n_terms(), ds.n_coords());
    let mut out = Vec::with_capacity(20 + 8 * n * (d + 1 + c));
    out.extend_from_slice(MAGIC);
    for v in [BINARY_VERSION, n as u32, d as u32, c as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let values = ds.terms().iter().chain(ds.weights()).chain(ds.coords().unwrap_or(&[]));
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn parse_binary(bytes: &[u8], path: &Path) -> Result<TermDataset> {
    let bad = |message: String| CliError::Format { path: path.into(), message };
    if bytes.len() < 20 || &bytes[..4] != MAGIC {
        return Err(bad("missing RGSC header".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().expect("four bytes"));
    let (version, n, d, c) = (word(0), word(1) as usize, word(2) as usize, word(3) as usize);
    if version != BINARY_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let expected = n
        .checked_mul(d + 1 + c)
        .and_then(|v| v.checked_mul(8))
        .and_then(|v| v.checked_add(20))
        .ok_or_else(|| bad("header sizes overflow".into()))?;
    if bytes.len() != expected {
        return Err(bad(format!("expected {expected} bytes for {n} rows, found {}", bytes.len())));
    }
    let values: Vec<f64> =
        bytes[20..].chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("eight bytes"))).collect();
    let (terms, rest) = values.split_at(n * d);
    let (weights, coords) = rest.split_at(n);
    let mut ds = TermDataset::new(terms.to_vec(), d, Some(weights.to_vec()))?;
    if c > 0 {
        let names = (0..c).map(|i| COORD_NAMES.get(i).map_or_else(|| format!("c{i}"), |s| s.to_string())).collect();
        ds = ds.with_coords(coords.to_vec(), names)?;
    }
    Ok(ds)
}
