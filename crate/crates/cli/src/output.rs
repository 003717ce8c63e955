//! Deterministic text output: RFC-4180 CSV with 12-significant-digit
//! numbers, and writer plumbing shared by all commands.

use std::io::Write;
use std::path::Path;

use crate::CliError;

/// Render a number with 12 significant digits; empty string for absent
/// values (NaN), bare "0" for zero.
pub fn fmt12(x: f64) -> String {
    if x.is_nan() {
        return String::new();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    format!("{:.11e}", x)
}

pub struct CsvWriter<W: Write> {
    inner: W,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut inner: W, header: &[&str]) -> Result<Self, CliError> {
        writeln!(inner, "{}", header.join(",")).map_err(CliError::io)?;
        Ok(Self { inner })
    }

    pub fn row(&mut self, fields: &[f64]) -> Result<(), CliError> {
        let cells: Vec<String> = fields.iter().map(|&x| fmt12(x)).collect();
        writeln!(self.inner, "{}", cells.join(",")).map_err(CliError::io)
    }
}

/// Open the output target: a file when a path is given, stdout otherwise.
pub fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => {
            let f = std::fs::File::create(p)
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))?;
            Ok(Box::new(std::io::BufWriter::new(f)))
        }
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

pub fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    let mut w = open_out(path)?;
    w.write_all(text.as_bytes()).map_err(CliError::io)?;
    w.flush().map_err(CliError::io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt12(1.2325), "1.23250000000e0");
        assert_eq!(fmt12(0.0), "0");
        assert_eq!(fmt12(f64::NAN), "");
        assert_eq!(fmt12(-0.035), "-3.50000000000e-2");
    }

    #[test]
    fn csv_rows_are_rfc4180() {
        let mut buf = Vec::new();
        {
            let mut w = CsvWriter::new(&mut buf, &["a", "b"]).unwrap();
            w.row(&[1.0, f64::NAN]).unwrap();
        }
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1.00000000000e0,\n");
    }
}
