//! File output. Every file is written to a temporary sibling and renamed
//! into place, so a crash never leaves a half-written table behind.

use crate::error::{CliError, CliResult};
use sharpfid::numerics::Histogram;
use std::io::Write;
use std::path::Path;
use tempfile::NamedTempFile;

/// Seventeen significant digits: enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> CliResult<()>) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let ctx = || path.display().to_string();
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(ctx(), e))?;
    fill(tmp.as_file_mut())?;
    tmp.as_file_mut().flush().map_err(|e| CliError::io(ctx(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(ctx(), e.error))?;
    Ok(())
}

pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
    write_atomic(path, |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(header)?;
        for row in rows {
            out.write_record(&row)?;
        }
        out.flush().map_err(|e| CliError::io(path.display().to_string(), e))?;
        Ok(())
    })
}

pub fn write_json(path: &Path, value: &impl serde::Serialize) -> CliResult<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(|e| CliError::Usage(format!("json: {e}")))?;
        writeln!(w).map_err(|e| CliError::io(path.display().to_string(), e))
    })
}

/// `label,x,y` rows.
pub fn curve_rows<'a>(label: &'a str, points: &'a [(f64, f64)]) -> impl Iterator<Item = Vec<String>> + 'a {
    points.iter().map(move |&(x, y)| vec![label.to_string(), fmt_f64(x), fmt_f64(y)])
}

/// `label,bin_lo,bin_hi,density` rows.
pub fn histogram_rows(label: &str, h: &Histogram) -> Vec<Vec<String>> {
    h.edges()
        .windows(2)
        .zip(h.densities())
        .map(|(e, &d)| vec![label.to_string(), fmt_f64(e[0]), fmt_f64(e[1]), fmt_f64(d)])
        .collect()
}
