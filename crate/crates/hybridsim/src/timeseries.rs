//! Named real-valued observable records on a strictly increasing time grid.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct TimeSeries {
    names: Vec<String>,
    times: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn new(names: Vec<String>) -> Self {
        Self { names, times: Vec::new(), rows: Vec::new() }
    }

    pub fn push(&mut self, t: f64, row: Vec<f64>) -> Result<()> {
        if row.len() != self.names.len() {
            return Err(Error::Dimension(format!(
                "record has {} values for {} columns",
                row.len(),
                self.names.len()
            )));
        }
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::Domain(format!(
                    "time {t} not strictly after previous {last}"
                )));
            }
        }
        self.times.push(t);
        self.rows.push(row);
        Ok(())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Domain(format!("no column named `{name}`")))
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn value(&self, i: usize, name: &str) -> Result<f64> {
        Ok(self.rows[i][self.column_index(name)?])
    }

    pub fn last_row(&self) -> Option<(&f64, &[f64])> {
        match (self.times.last(), self.rows.last()) {
            (Some(t), Some(r)) => Some((t, r.as_slice())),
            _ => None,
        }
    }

    /// Write as CSV with a `t_s` time column. Floats carry 17 significant
    /// digits so files round-trip exactly.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "t_s")?;
        for n in &self.names {
            write!(w, ",{n}")?;
        }
        writeln!(w)?;
        for (t, row) in self.times.iter().zip(&self.rows) {
            write!(w, "{}", fmt_f64(*t))?;
            for v in row {
                write!(w, ",{}", fmt_f64(*v))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn write_csv_file<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

/// 17 significant digits: enough to reconstruct any f64 bit pattern.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
