use std::io::Write;
use std::path::Path;

use crate::error::CliError;

/// Shortest fixed-width form that round-trips any f64: 17 significant digits.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// A named output file held in memory until every file is ready.
pub struct OutputFile {
    pub name: &'static str,
    pub bytes: Vec<u8>,
}

pub fn csv_file(name: &'static str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> OutputFile {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    OutputFile { name, bytes: w.into_inner().expect("in-memory flush") }
}

/// Write each file to a temporary name in `dir`, then rename it into place.
pub fn write_atomically(dir: &Path, files: &[OutputFile]) -> Result<(), CliError> {
    let io = |what: &str, e: std::io::Error| CliError::Io(format!("{what} {}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(|e| io("cannot create", e))?;
    let mut staged = Vec::with_capacity(files.len());
    for f in files {
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io("cannot write in", e))?;
        tmp.write_all(&f.bytes).map_err(|e| io("cannot write in", e))?;
        tmp.flush().map_err(|e| io("cannot write in", e))?;
        staged.push((tmp, f.name));
    }
    for (tmp, name) in staged {
        tmp.persist(dir.join(name)).map_err(|e| io("cannot rename into", e.error))?;
    }
    Ok(())
}
