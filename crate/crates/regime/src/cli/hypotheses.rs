//! Reading user-supplied masks, labels and named balances.

use std::path::Path;

use regime_core::{Hypothesis, Label, TermDataset};

use crate::error::{CliError, Result};

/// One non-blank, non-comment line with its 1-based line number.
struct Record {
    line: usize,
    text: String,
}

fn read_records(path: &Path) -> Result<Vec<Record>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, l)| Record { line: i + 1, text: l.trim().to_string() })
        .filter(|r| !r.text.is_empty() && !r.text.starts_with('#'))
        .collect())
}

/// The `column` field of a CSV whose first record is a header naming it,
/// otherwise each whole line.
fn column_or_lines(path: &Path, column: &str) -> Result<Vec<Record>> {
    let mut records = read_records(path)?;
    let Some(first) = records.first() else {
        return Err(CliError::Format { path: path.into(), message: "no entries".into() });
    };
    let Some(idx) = first.text.split(',').position(|f| f.trim() == column) else {
        return Ok(records);
    };
    records.remove(0);
    records
        .into_iter()
        .map(|r| match r.text.split(',').nth(idx) {
            Some(field) => Ok(Record { line: r.line, text: field.trim().to_string() }),
            None => Err(CliError::Parse { path: path.into(), line: r.line, message: format!("missing `{column}` field") }),
        })
        .collect()
}

fn hypothesis_reason(e: regime_core::Error) -> String {
    match e {
        regime_core::Error::IllegalHypothesis { reason, .. } => reason,
        other => other.to_string(),
    }
}

/// One mask per observation, or a single mask applied to all of them.
pub fn read_masks(path: &Path, ds: &TermDataset) -> Result<Vec<Hypothesis>> {
    let d = ds.n_terms();
    let records = column_or_lines(path, "mask")?;
    let mut masks = Vec::with_capacity(records.len());
    for (row, r) in records.iter().enumerate() {
        let parse_err = |message: String| CliError::Parse { path: path.into(), line: r.line, message };
        let bits: Vec<bool> = r
            .text
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(parse_err(format!("row {row}: unexpected character `{other}` in mask"))),
            })
            .collect::<Result<_>>()?;
        if bits.len() != d {
            return Err(parse_err(format!("row {row}: mask has {} entries for {d} terms", bits.len())));
        }
        let h = Hypothesis::from_bools(&bits).map_err(|e| parse_err(format!("row {row}: {}", hypothesis_reason(e))))?;
        masks.push(h);
    }
    match masks.len() {
        1 => Ok(vec![masks[0]; ds.n_rows()]),
        n if n == ds.n_rows() => Ok(masks),
        n => Err(CliError::Format {
            path: path.into(),
            message: format!("{n} masks for {} observations (give one per observation or exactly one)", ds.n_rows()),
        }),
    }
}

/// One integer label per observation; negative labels mark noise.
pub fn read_labels(path: &Path, n_rows: usize) -> Result<Vec<Label>> {
    let labels: Vec<Label> = column_or_lines(path, "label")?
        .iter()
        .map(|r| {
            r.text.parse::<Label>().map_err(|_| CliError::Parse {
                path: path.into(),
                line: r.line,
                message: format!("`{}` is not an integer label", r.text),
            })
        })
        .collect::<Result<_>>()?;
    if labels.len() != n_rows {
        return Err(CliError::Format { path: path.into(), message: format!("{} labels for {n_rows} observations", labels.len()) });
    }
    Ok(labels)
}

/// `all`, or a comma-separated list of term names.
pub fn parse_balance(spec: &str, ds: &TermDataset) -> Result<Hypothesis> {
    if spec.trim() == "all" {
        return Ok(Hypothesis::all_true(ds.n_terms()));
    }
    let names = ds.term_names();
    let indices: Vec<usize> = spec
        .split(',')
        .map(str::trim)
        .map(|name| {
            names.iter().position(|n| n == name).ok_or_else(|| {
                CliError::Argument(format!("unknown term `{name}`; the dataset has {}", names.join(", ")))
            })
        })
        .collect::<Result<_>>()?;
    Hypothesis::from_indices(&indices, ds.n_terms())
        .map_err(|e| CliError::Argument(format!("balance `{spec}`: {}", hypothesis_reason(e))))
}
