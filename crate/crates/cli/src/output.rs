//! CSV tables behind a one-line JSON header comment.

use std::io::Write;
use std::path::Path;

use rankdiv::{Error, Result};
use serde::Serialize;

use crate::config::ExperimentConfig;

/// Version of this build, in `git describe` style.
pub fn version() -> &'static str {
    env!("RANKDIV_VERSION")
}

/// `{"version": …, "config": …}` on one line.
pub fn header(cfg: &ExperimentConfig) -> String {
    serde_json::json!({ "version": version(), "config": cfg }).to_string()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Writes `# header` and then the rows as CSV with a column line.
pub fn write_rows<W: Write, R: Serialize>(mut out: W, header: &str, rows: &[R]) -> Result<()> {
    writeln!(out, "# {header}")?;
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// [`write_rows`] to a file (parents created) or to standard output for `-`.
pub fn write_table<R: Serialize>(path: &Path, header: &str, rows: &[R]) -> Result<()> {
    if path == Path::new("-") {
        return write_rows(std::io::stdout().lock(), header, rows);
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_rows(file, header, rows)
}

/// Reads a sample file: one row per sample, one column per coordinate.
/// Lines starting with `#` and a leading non-numeric column line are skipped.
pub fn read_samples(path: &Path) -> Result<(Vec<f64>, usize)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    let mut data = Vec::new();
    let mut dim = None;
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let row: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let row = match row {
            Ok(r) => r,
            Err(_) if i == 0 => continue,
            Err(e) => {
                return Err(Error::Config(format!(
                    "{}: line {}: {e}",
                    path.display(),
                    i + 1
                )))
            }
        };
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                })
            }
            Some(_) => {}
        }
        data.extend(row);
    }
    let dim = dim.ok_or_else(|| Error::Config(format!("{}: no samples", path.display())))?;
    Ok((data, dim))
}
