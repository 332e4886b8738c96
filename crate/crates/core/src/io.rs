//! CSV output with a `#` metadata header.

use std::fmt::Display;
use std::io::{self, Write};
use std::path::Path;

/// Metadata key excluded from reproducibility comparisons.
pub const TIMING_KEY: &str = "elapsed_s";

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(header: &str) -> Self {
        CsvTable {
            metadata: Vec::new(),
            header: header.split(',').map(str::to_string).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (k, v) in &self.metadata {
            writeln!(w, "# {k}: {v}")?;
        }
        writeln!(w, "{}", self.header.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        w.flush()
    }

    /// Writes to `path`, or to stdout when `path` is None or "-".
    pub fn write_path(&self, path: Option<&Path>) -> io::Result<()> {
        match path {
            Some(p) if p.as_os_str() != "-" => {
                let f = std::fs::File::create(p)?;
                self.write_to(io::BufWriter::new(f))
            }
            _ => self.write_to(io::stdout().lock()),
        }
    }

    /// Parses the format written by [`CsvTable::write_to`].
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut t = CsvTable::default();
        for (lineno, line) in text.lines().enumerate() {
            if let Some(rest) = line.strip_prefix("# ") {
                let (k, v) = rest.split_once(": ").ok_or(format!("line {}: bad metadata", lineno + 1))?;
                t.metadata.push((k.to_string(), v.to_string()));
            } else if t.header.is_empty() {
                t.header = line.split(',').map(str::to_string).collect();
            } else if !line.is_empty() {
                let row: Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
                let row = row.map_err(|e| format!("line {}: {e}", lineno + 1))?;
                if row.len() != t.header.len() {
                    return Err(format!("line {}: expected {} columns", lineno + 1, t.header.len()));
                }
                t.rows.push(row);
            }
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let mut t = CsvTable::new("a,b");
        t.meta("module", "test");
        t.push(vec![std::f64::consts::PI, -1e-300]);
        t.push(vec![0.1 + 0.2, f64::NAN]);
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        let back = CsvTable::parse(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.metadata, t.metadata);
        assert_eq!(back.rows[0], t.rows[0]);
        assert_eq!(back.rows[1][0], 0.1 + 0.2);
        assert!(back.rows[1][1].is_nan());
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }
}
