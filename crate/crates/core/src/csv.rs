//! CSV dialect shared by every exported table: comma separator, `.` decimal,
//! LF line endings, UTF-8. Floats use the shortest representation that parses
//! back to the identical bit pattern (never more than 17 significant digits).

use std::fmt::Write as _;

use crate::{Error, Result};

/// Formats a float so that `s.parse::<f64>()` returns the same bits.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Joins floats as one CSV record (no trailing newline).
pub fn join_f64(values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 8);
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&fmt_f64(*v));
    }
    s
}

/// Minimal writer that builds a CSV document in memory.
#[derive(Debug, Default, Clone)]
pub struct CsvBuf {
    buf: String,
}

impl CsvBuf {
    pub fn with_header(cols: &[&str]) -> Self {
        let mut b = Self::default();
        b.buf.push_str(&cols.join(","));
        b.buf.push('\n');
        b
    }

    pub fn comment(&mut self, line: &str) {
        let _ = writeln!(self.buf, "# {line}");
    }

    /// Appends a record; fields are written verbatim.
    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for f in fields {
            if !first {
                self.buf.push(',');
            }
            first = false;
            self.buf.push_str(f.as_ref());
        }
        self.buf.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.buf
    }

    pub fn into_string(self) -> String {
        self.buf
    }
}

/// Parses one record of floats.
pub fn parse_f64_row(line: &str) -> Result<Vec<f64>> {
    line.split(',')
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("{f:?}: {e}")))
        })
        .collect()
}
