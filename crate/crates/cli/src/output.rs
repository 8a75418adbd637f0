//! CSV emission with a `#`-prefixed provenance header.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{ScenarioConfig, FORMAT_VERSION};
use crate::error::CliError;

/// Renders a table: header comments, column names, rows with 17 significant
/// digits, LF line endings.
pub fn render_csv(
    config: &ScenarioConfig,
    extra: &[(String, String)],
    columns: &[&str],
    rows: &[Vec<f64>],
) -> String {
    let mut out = String::new();
    writeln!(out, "# modbath-format v{FORMAT_VERSION}").unwrap();
    for (k, v) in config.provenance().iter().chain(extra) {
        writeln!(out, "# {k} = {v}").unwrap();
    }
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            first = false;
            write!(out, "{v:.16e}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(
    dir: &Path,
    name: &str,
    config: &ScenarioConfig,
    extra: &[(String, String)],
    columns: &[&str],
    rows: &[Vec<f64>],
) -> Result<PathBuf, CliError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let path = dir.join(name);
    fs::write(&path, render_csv(config, extra, columns, rows)).map_err(io(&path))?;
    Ok(path)
}

/// Every `k`-th row with `k` chosen to keep at most about `max_rows`, always
/// including the last.
pub fn decimate<T: Clone>(rows: &[T], max_rows: usize) -> Vec<T> {
    if rows.len() <= max_rows {
        return rows.to_vec();
    }
    let step = rows.len().div_ceil(max_rows.max(2) - 1);
    let mut out: Vec<T> = rows.iter().step_by(step).cloned().collect();
    if !(rows.len() - 1).is_multiple_of(step) {
        out.push(rows[rows.len() - 1].clone());
    }
    out
}
