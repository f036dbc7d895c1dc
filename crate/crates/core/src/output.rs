//! Text and file output shared by the experiment drivers.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::integrate::DiagnosticsRecord;

/// Shortest exact text for an `f64`: 17 significant digits in scientific form.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_diagnostics_csv<W: Write>(mut out: W, records: &[DiagnosticsRecord]) -> io::Result<()> {
    writeln!(out, "{}", DiagnosticsRecord::CSV_HEADER)?;
    for r in records {
        let line: Vec<String> = r.values().iter().map(|&v| format_f64(v)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn diagnostics_csv(records: &[DiagnosticsRecord]) -> String {
    let mut buf = Vec::new();
    write_diagnostics_csv(&mut buf, records).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("ASCII output")
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}
