use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::TimeGrid;

/// Multi-channel record on a shared uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    grid: TimeGrid,
    channels: Vec<Vec<f64>>,
}

impl Ensemble {
    pub fn new(grid: TimeGrid, channels: Vec<Vec<f64>>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::param("an ensemble needs at least one channel"));
        }
        for (c, ch) in channels.iter().enumerate() {
            if ch.len() != grid.n_samples() {
                return Err(Error::DimensionMismatch { expected: grid.n_samples(), got: ch.len() });
            }
            if let Some(k) = ch.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { channel: c, sample: k });
            }
        }
        Ok(Self { grid, channels })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn n_samples(&self) -> usize {
        self.grid.n_samples()
    }

    /// Parses `t,x1,...,xM` CSV text.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let (grid, _, columns) = read_series_csv(reader)?;
        Self::new(grid, columns)
    }

    pub fn read_csv_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(std::io::BufReader::new(f))
    }

    pub fn to_csv<W: Write>(&self, writer: W) -> Result<()> {
        let names: Vec<String> = (1..=self.n_channels()).map(|i| format!("x{i}")).collect();
        write_series_csv(writer, &self.grid, &names, &self.channels)
    }

    pub fn write_csv_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.to_csv(std::io::BufWriter::new(f))
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a `t,<names...>` table.
pub fn write_series_csv<W: Write>(writer: W, grid: &TimeGrid, names: &[String], columns: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let map = |e: csv::Error| Error::Csv { line: 0, reason: e.to_string() };
    let mut header = vec!["t".to_string()];
    header.extend(names.iter().cloned());
    w.write_record(&header).map_err(map)?;
    for k in 0..grid.n_samples() {
        let mut row = Vec::with_capacity(columns.len() + 1);
        row.push(fmt_f64(grid.time(k)));
        for col in columns {
            row.push(fmt_f64(col[k]));
        }
        w.write_record(&row).map_err(map)?;
    }
    w.flush().map_err(|e| Error::Csv { line: 0, reason: e.to_string() })?;
    Ok(())
}

/// Reads a `t,<names...>` table, checking that `t` is a uniform grid.
pub fn read_series_csv<R: Read>(reader: R) -> Result<(TimeGrid, Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::Csv { line: 1, reason: e.to_string() })?.clone();
    if header.len() < 2 || &header[0] != "t" {
        return Err(Error::Csv { line: 1, reason: "header must start with `t` and name at least one channel".into() });
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut times = Vec::new();
    let mut lines = Vec::new();
    let mut columns = vec![Vec::new(); names.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Csv {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            reason: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() != header.len() {
            return Err(Error::Csv { line, reason: format!("expected {} fields, found {}", header.len(), rec.len()) });
        }
        let parse = |s: &str| -> Result<f64> {
            let v: f64 =
                s.parse().map_err(|_| Error::Csv { line, reason: format!("cannot parse `{s}` as a number") })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Csv { line, reason: format!("non-finite value `{s}`") })
            }
        };
        times.push(parse(&rec[0])?);
        for (c, col) in columns.iter_mut().enumerate() {
            col.push(parse(&rec[c + 1])?);
        }
        lines.push(line);
    }
    if times.len() < 2 {
        return Err(Error::Csv { line: lines.last().copied().unwrap_or(1), reason: "need at least two rows".into() });
    }
    let n = times.len();
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::UngriddedData { line: lines[1] });
    }
    for k in 1..n {
        if ((times[k] - times[k - 1]) - dt).abs() >= 1e-9 * dt {
            return Err(Error::UngriddedData { line: lines[k] });
        }
    }
    let grid = TimeGrid::new(times[0], dt, n)?;
    Ok((grid, names, columns))
}
