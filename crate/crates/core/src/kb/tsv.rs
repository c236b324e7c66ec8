use std::fs;
use std::path::Path;

use crate::error::{EdlError, Result};

/// One non-comment line of a tab-separated dictionary file.
pub(crate) struct Record<'a> {
    pub line: usize,
    pub fields: Vec<&'a str>,
}

pub(crate) fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| EdlError::io(format!("reading {}", path.display()), e))
}

/// Splits `text` into records, skipping blank lines and `#` comments. Each
/// record must have a field count within `arity`.
pub(crate) fn records<'a>(
    text: &'a str,
    path: &Path,
    arity: std::ops::RangeInclusive<usize>,
) -> Result<Vec<Record<'a>>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if !arity.contains(&fields.len()) {
            return Err(EdlError::parse(
                path,
                n + 1,
                format!(
                    "expected {} tab-separated fields, found {}",
                    if arity.start() == arity.end() {
                        arity.start().to_string()
                    } else {
                        format!("{}-{}", arity.start(), arity.end())
                    },
                    fields.len()
                ),
            ));
        }
        out.push(Record { line: n + 1, fields });
    }
    Ok(out)
}

pub(crate) fn parse_f64(path: &Path, line: usize, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| EdlError::parse(path, line, format!("invalid number {s:?}")))
}

pub(crate) fn parse_u64(path: &Path, line: usize, s: &str) -> Result<u64> {
    s.trim()
        .parse::<u64>()
        .map_err(|_| EdlError::parse(path, line, format!("invalid count {s:?}")))
}
