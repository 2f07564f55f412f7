//! CSV tables with `#` provenance lines.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use super::CliError;

/// Numbers are printed with 15 significant digits; non-finite values as `nan`.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.14e}")
    } else {
        "nan".into()
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_else(|| "nan".into())
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            comments: Vec::new(),
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) -> &mut Self {
        self.comments.push(line.into());
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Parsed values of one column; `nan` and failures become NaN.
    pub fn values(&self, name: &str) -> Vec<f64> {
        let Some(k) = self.column(name) else { return Vec::new() };
        self.rows.iter().map(|r| r[k].parse().unwrap_or(f64::NAN)).collect()
    }

    /// CSV text. The timestamp line is the only non-deterministic content.
    pub fn render(&self) -> String {
        let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let mut s = String::new();
        let _ = writeln!(s, "# qheat {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "# timestamp {ts}");
        for c in &self.comments {
            for line in c.lines() {
                let _ = writeln!(s, "# {line}");
            }
        }
        let _ = writeln!(s, "{}", self.header.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_file(path, &self.render())
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Gnuplot script plotting `columns` of `csv` against its first column.
pub fn gnuplot(title: &str, csv: &str, xlabel: &str, ylabel: &str, header: &[String], columns: &[&str], logx: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set datafile commentschars '#'");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set title '{title}'");
    let _ = writeln!(s, "set xlabel '{xlabel}'");
    let _ = writeln!(s, "set ylabel '{ylabel}'");
    if logx {
        let _ = writeln!(s, "set logscale x");
    }
    let dashes = [1, 2, 4, 3];
    let plots: Vec<String> = columns
        .iter()
        .enumerate()
        .filter_map(|(i, c)| {
            let k = header.iter().position(|h| h == c)? + 1;
            Some(format!("'{csv}' using 1:{k} with lines dashtype {} title '{c}'", dashes[i % dashes.len()]))
        })
        .collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}
