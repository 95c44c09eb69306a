//! CSV and JSON reading and writing.
//!
//! Numbers are written as the shortest decimal that round-trips, columns in a
//! fixed order, LF line endings. Files are written to a temporary sibling and
//! renamed into place, so a failed run never leaves partial output.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use touchcap_core::calibration::{MeasuredSeries, SeriesKind};
use touchcap_core::ModelError;

use crate::error::CliError;

/// Shortest round-trip decimal; scientific notation outside `[1e-3, 1e7)`.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (1e-3..1e7).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Where a command sends its primary output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Destination {
    Stdout,
    File(PathBuf),
}

impl Destination {
    pub fn from_arg(path: Option<&Path>) -> Self {
        match path {
            Some(p) if p.as_os_str() != "-" => Destination::File(p.to_path_buf()),
            _ => Destination::Stdout,
        }
    }

    /// Sibling file with the extension replaced, e.g. the JSON sidecar of a CSV.
    pub fn sibling(&self, extension: &str) -> Option<PathBuf> {
        match self {
            Destination::File(p) => Some(p.with_extension(extension)),
            Destination::Stdout => None,
        }
    }

    pub fn write(&self, bytes: &[u8]) -> Result<(), CliError> {
        match self {
            Destination::Stdout => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes)
                    .and_then(|_| out.flush())
                    .map_err(|e| io_error("<stdout>", e))
            }
            Destination::File(p) => write_atomic(p, bytes),
        }
    }
}

fn io_error(path: impl AsRef<Path>, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.as_ref().display().to_string(),
        source,
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_error(path, e))?;
    tmp.write_all(bytes).map_err(|e| io_error(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_error(path, e))?;
    tmp.persist(path).map_err(|e| io_error(path, e.error))?;
    Ok(())
}

/// Table of already formatted cells rendered as CSV.
pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(row).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

/// Pretty JSON with a trailing newline.
pub fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serializable value");
    out.push(b'\n');
    out
}

struct Table {
    headers: Vec<String>,
    rows: Vec<(u64, csv::StringRecord)>,
}

fn read_table(path: &Path) -> Result<Table, CliError> {
    let name = path.display().to_string();
    let input: Box<dyn std::io::Read> = if path.as_os_str() == "-" {
        Box::new(std::io::stdin().lock())
    } else {
        Box::new(std::fs::File::open(path).map_err(|e| io_error(path, e))?)
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| CliError::Parse {
            source_name: name.clone(),
            message: format!("line 1: {e}"),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Parse {
                source_name: name.clone(),
                message: format!("line {line}: {e}"),
            }
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push((line, rec));
    }
    Ok(Table { headers, rows })
}

fn column(table: &Table, name: &str) -> Option<usize> {
    table.headers.iter().position(|h| h == name)
}

fn number(
    path: &Path,
    line: u64,
    rec: &csv::StringRecord,
    idx: usize,
    col: &str,
) -> Result<f64, CliError> {
    let raw = rec.get(idx).unwrap_or("");
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Parse {
            source_name: path.display().to_string(),
            message: format!("line {line}: column '{col}': invalid number '{raw}'"),
        })
}

/// Reads a measured series from a file, or from stdin when `path` is `-`.
///
/// The abscissa column decides the kind:
/// `pressure_pa` or `time_s`, next to `capacitance_f`; extra columns are ignored.
pub fn read_series(path: &Path, expected: Option<SeriesKind>) -> Result<MeasuredSeries, CliError> {
    let table = read_table(path)?;
    let name = path.display().to_string();
    let parse_err = |message: String| CliError::Parse {
        source_name: name.clone(),
        message,
    };
    let (kind, x_col) = if let Some(i) = column(&table, "pressure_pa") {
        (SeriesKind::PressureCapacitance, i)
    } else if let Some(i) = column(&table, "time_s") {
        (SeriesKind::TimeCapacitance, i)
    } else {
        return Err(parse_err(
            "line 1: header needs a 'pressure_pa' or 'time_s' column".into(),
        ));
    };
    if let Some(want) = expected {
        if want != kind {
            return Err(parse_err(format!(
                "line 1: expected a '{}' column",
                want.abscissa_name()
            )));
        }
    }
    let c_col = column(&table, "capacitance_f")
        .ok_or_else(|| parse_err("line 1: header needs a 'capacitance_f' column".into()))?;
    let x_name = kind.abscissa_name();
    let mut x = Vec::with_capacity(table.rows.len());
    let mut c = Vec::with_capacity(table.rows.len());
    for (line, rec) in &table.rows {
        x.push(number(path, *line, rec, x_col, x_name)?);
        c.push(number(path, *line, rec, c_col, "capacitance_f")?);
    }
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    MeasuredSeries::new(kind, x, c, label).map_err(|e| match e {
        ModelError::NotIncreasing { index, .. } => parse_err(format!(
            "line {}: {x_name} must be strictly increasing",
            table.rows[index].0
        )),
        other => parse_err(other.to_string()),
    })
}

/// Reads the `pressure_pa` column of any CSV with a header row.
pub fn read_pressures(path: &Path) -> Result<Vec<f64>, CliError> {
    let table = read_table(path)?;
    let idx = column(&table, "pressure_pa").ok_or_else(|| CliError::Parse {
        source_name: path.display().to_string(),
        message: "line 1: header needs a 'pressure_pa' column".into(),
    })?;
    table
        .rows
        .iter()
        .map(|(line, rec)| number(path, *line, rec, idx, "pressure_pa"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        for v in [
            0.0,
            1.0,
            60000.0,
            6.954062846549191e-12,
            -3.5e-9,
            0.1 + 0.2,
            1e300,
            12345678.9,
        ] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(fmt_f64(10000.0), "10000");
        assert_eq!(fmt_f64(1e-12), "1e-12");
    }

    #[test]
    fn csv_uses_lf() {
        let bytes = csv_bytes(&["a", "b"], &[vec!["1".into(), "2".into()]]);
        assert_eq!(bytes, b"a,b\n1,2\n");
    }

    #[test]
    fn series_errors_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "pressure_pa,capacitance_f\n0,1e-12\n1000,abc\n").unwrap();
        let err = read_series(&p, None).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");

        std::fs::write(
            &p,
            "pressure_pa,capacitance_f\n0,1e-12\n1000,2e-12\n1000,3e-12\n",
        )
        .unwrap();
        let err = read_series(&p, None).unwrap_err().to_string();
        assert!(err.contains("line 4"), "{err}");

        std::fs::write(&p, "time_s,capacitance_f\n0,1\n1,2\n").unwrap();
        assert!(read_series(&p, Some(SeriesKind::PressureCapacitance)).is_err());
        let s = read_series(&p, None).unwrap();
        assert_eq!(s.kind(), SeriesKind::TimeCapacitance);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
