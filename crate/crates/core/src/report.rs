//! Shared output helpers: number formatting, CSV framing and JSON files.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::Result;

/// Shortest round-trip representation, switching to exponent form for very
/// small or very large magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Writes a `# key=value ...` comment line, a header and numeric rows.
pub fn write_csv<W: Write>(
    mut out: W,
    meta: &[(&str, String)],
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> Result<()> {
    let meta_line: Vec<String> = meta.iter().map(|(k, v)| format!("{k}={v}")).collect();
    writeln!(out, "# {}", meta_line.join(" "))?;
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| num(x)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}
