//! Input parsing and atomic output.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use recur_core::LabeledSeries;
use tempfile::NamedTempFile;

use crate::Failure;

/// Newline-delimited numbers, most recent last. Blank lines and `#` lines are
/// skipped.
pub fn read_series(path: &Path) -> Result<Vec<f64>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| Failure::config(format!("{}:{}: not a number: `{line}`", path.display(), i + 1)))?;
        values.push(v);
    }
    Ok(values)
}

/// CSV rows `x_1, ..., x_d, y`; the last row is the query and has an empty `y`.
pub fn read_labeled(path: &Path) -> Result<LabeledSeries, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut query_seen = false;
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
        let at = |msg: &str| Failure::config(format!("{}: row {}: {msg}", path.display(), i + 1));
        if query_seen {
            return Err(at("only the last row may have an empty label"));
        }
        if row.len() < 2 {
            return Err(at("expected x_1, ..., x_d, y"));
        }
        let x = row
            .iter()
            .take(row.len() - 1)
            .map(|f| f.parse::<f64>().map_err(|_| at(&format!("not a number: `{f}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        match row.get(row.len() - 1).unwrap_or_default() {
            "" => query_seen = true,
            "0" => labels.push(0),
            "1" => labels.push(1),
            other => return Err(at(&format!("label must be 0, 1 or empty, got `{other}`"))),
        }
        features.push(x);
    }
    if !query_seen {
        return Err(Failure::config(format!(
            "{}: the last row must be the query with an empty label",
            path.display()
        )));
    }
    LabeledSeries::new(features, labels).map_err(Failure::from)
}

/// Writes to a temporary file next to `path` and renames it into place, or
/// to stdout when no path is given.
pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    let Some(path) = path else {
        let mut out = io::stdout().lock();
        return out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| Failure::io(Path::new("<stdout>"), e));
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| Failure::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Failure::io(path, e))?;
    tmp.persist(path).map_err(|e| Failure::io(path, e.error))?;
    Ok(())
}
