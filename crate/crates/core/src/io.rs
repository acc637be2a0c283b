//! CSV helpers shared by the modules that import or export tables.

use crate::error::{Error, Result};
use std::path::Path;

/// Round-trip safe scientific notation with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<P: AsRef<Path>>(path: P, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::DimensionMismatch { expected: header.len(), got: row.len() });
        }
        w.write_record(row.iter().map(|&x| fmt_num(x)))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a numeric CSV with a header line; returns the header and rows.
pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: {s:?}: {e}", line + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(Error::DimensionMismatch { expected: header.len(), got: row.len() });
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// Checks that the header matches `expected` exactly.
pub fn expect_header(header: &[String], expected: &[&str]) -> Result<()> {
    if header.len() != expected.len() || header.iter().zip(expected).any(|(a, b)| a != b) {
        return Err(Error::Parse(format!("expected columns {expected:?}, found {header:?}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_roundtrip_exactly() {
        for &x in &[0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_num(1.5), "1.5000000000000000e0");
    }

    #[test]
    fn csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let rows = vec![vec![1.0, 2.0], vec![0.1, -3.0]];
        write_csv(&p, &["a", "b"], &rows).unwrap();
        let (h, back) = read_csv(&p).unwrap();
        assert_eq!(h, vec!["a", "b"]);
        assert_eq!(back, rows);
        assert!(expect_header(&h, &["a", "c"]).is_err());
    }
}
