use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Converts the CSV artifacts in `dir` to whitespace-separated two-column files.
///
/// Returns the files written. Blank lines separate the curves of `curve.dat`
/// and the snapshot times of `snapshots.dat`.
pub fn emit_plotdata(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    let simple = [
        ("profile.csv", "profile.dat", (0, 1)),
        ("history.csv", "residual.dat", (0, 1)),
        ("front.csv", "front.dat", (0, 1)),
        ("g.csv", "g.dat", (0, 1)),
        ("decay.csv", "decay.dat", (0, 1)),
    ];
    for (src, dst, cols) in simple {
        if let Some(rows) = read_rows(&dir.join(src))? {
            written.push(write_dat(dir, dst, &rows, cols, &[])?);
        }
    }

    if let Some(rows) = read_rows(&dir.join("curve.csv"))? {
        let breaks = curve_breaks(dir)?;
        written.push(write_dat(dir, "curve.dat", &rows, (0, 1), &breaks)?);
    }

    if let Some(rows) = read_rows(&dir.join("snapshots.csv"))? {
        let breaks: Vec<usize> = (1..rows.len()).filter(|&i| rows[i][0] != rows[i - 1][0]).collect();
        written.push(write_dat(dir, "snapshots.dat", &rows, (1, 2), &breaks)?);
    }

    if written.is_empty() {
        return Err(CliError::MissingArtifact(format!("no CSV artifacts in {}", dir.display())));
    }
    Ok(written)
}

fn read_rows(path: &Path) -> Result<Option<Vec<Vec<String>>>, CliError> {
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(path)?;
    let rows = text
        .lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    Ok(Some(rows))
}

/// Row indices where a new curve starts, from the row ranges in `report.json`.
fn curve_breaks(dir: &Path) -> Result<Vec<usize>, CliError> {
    let path = dir.join("report.json");
    if !path.exists() {
        return Err(CliError::MissingArtifact(format!("{} (needed to split curve.csv)", path.display())));
    }
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path)?)?;
    let curves = report["curves"]
        .as_array()
        .ok_or_else(|| CliError::MissingArtifact(format!("curves in {}", path.display())))?;
    Ok(curves
        .iter()
        .filter_map(|c| c["rows"][0].as_u64())
        .map(|s| s as usize)
        .filter(|&s| s > 0)
        .collect())
}

fn write_dat(
    dir: &Path,
    name: &str,
    rows: &[Vec<String>],
    (a, b): (usize, usize),
    breaks: &[usize],
) -> Result<PathBuf, CliError> {
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        if breaks.contains(&i) {
            out.push('\n');
        }
        let (Some(x), Some(y)) = (row.get(a), row.get(b)) else {
            return Err(CliError::MissingArtifact(format!("{name}: short row {}", i + 2)));
        };
        let _ = writeln!(out, "{x} {y}");
    }
    let path = dir.join(name);
    fs::write(&path, out)?;
    Ok(path)
}
