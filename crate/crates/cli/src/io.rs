//! CSV series, JSON reports and atomic file output.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::config::RunConfig;
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Writes `bytes` to `path` through a temporary file in the same directory
/// and a rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io_err = |e: std::io::Error| CliError::Io(format!("cannot write {}: {e}", path.display()));
    let mut tmp = NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Sends `bytes` to `out`, or to stdout when `out` is unset or `-`.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(p) if p != Path::new("-") => write_atomic(p, bytes),
        _ => std::io::stdout().write_all(bytes).map_err(|e| CliError::Io(format!("cannot write to stdout: {e}"))),
    }
}

/// `t,u` header, one `{:.16e}` pair per row, LF line endings.
pub fn series_csv(t: &[f64], u: &[f64]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(["t", "u"]).expect("in-memory write");
    for (a, b) in t.iter().zip(u) {
        w.write_record([format!("{a:.16e}"), format!("{b:.16e}")]).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Reads a two-column `t,u` series with a header row.
pub fn read_series(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let (mut t, mut u) = (Vec::new(), Vec::new());
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let field = |k: usize| -> Result<f64, CliError> {
            rec.get(k)
                .ok_or_else(|| CliError::Io(format!("{}: row {} has fewer than two columns", path.display(), i + 2)))?
                .parse()
                .map_err(|e| CliError::Io(format!("{}: row {}, column {}: {e}", path.display(), i + 2, k + 1)))
        };
        t.push(field(0)?);
        u.push(field(1)?);
    }
    Ok((t, u))
}

#[derive(Serialize)]
struct Report<'a, R: Serialize> {
    version: &'static str,
    config: &'a RunConfig,
    result: R,
}

/// Pretty JSON with the toolkit version and the effective configuration.
pub fn report_json<R: Serialize>(cfg: &RunConfig, result: R) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(&Report { version: VERSION, config: cfg, result }).expect("serializable report");
    bytes.push(b'\n');
    bytes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_lossless() {
        let t = [0.0, 0.1, 1.0 / 3.0, 2.5e-300];
        let u = [1.0, -std::f64::consts::PI, f64::MIN_POSITIVE, 1e300];
        let bytes = series_csv(&t, &u);
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("t,u\n") && !text.contains('\r'));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        write_atomic(&path, &bytes).unwrap();
        let (t2, u2) = read_series(&path).unwrap();
        assert_eq!(t2.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), t.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        assert_eq!(u2.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), u.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    }
}
