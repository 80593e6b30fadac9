use crate::CliError;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// A CSV table with a `# units:` comment line above the header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub units: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[(&'static str, &'static str)]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.0).collect(),
            units: columns.iter().map(|c| c.1).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut file = BufWriter::new(File::create(path)?);
        writeln!(file, "# units: {}", self.units.join(","))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&v| fmt_f64(v)))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Point list as an `x,y` table.
pub fn curve_table(points: &[(f64, f64)]) -> Table {
    let mut t = Table::new(&[("x", "R0"), ("y", "R0")]);
    for &(x, y) in points {
        t.push(vec![x, y]);
    }
    t
}

/// Flat `key = value` document kept in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn num(&mut self, key: &str, v: f64) {
        self.entries.push((key.to_string(), fmt_f64(v)));
    }

    pub fn int(&mut self, key: &str, v: usize) {
        self.entries.push((key.to_string(), v.to_string()));
    }

    pub fn text(&mut self, key: &str, v: &str) {
        self.entries.push((key.to_string(), v.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|e| e.0 == key).map(|e| e.1.as_str())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}

/// Status of one verification check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
        }
    }
}

/// One line of `verify.report`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub status: Status,
    pub measured: f64,
    pub tolerance: String,
}

/// Whitespace-separated report: `name status measured tolerance`.
pub fn render_report(lines: &[CheckLine]) -> String {
    let mut s = String::from("# check status measured tolerance\n");
    for l in lines {
        let _ = writeln!(s, "{} {} {} {}", l.name, l.status.as_str(), fmt_f64(l.measured), l.tolerance);
    }
    s
}
