//! Artifact directory: CSV tables, gnuplot scripts and the run manifest, all written
//! through a temporary file and an atomic rename.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::LabResult;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Self::Num(x) if x.is_nan() => "nan".into(),
            Self::Num(x) if x.is_infinite() => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Self::Num(x) => format!("{x:e}"),
            Self::Int(i) => i.to_string(),
            Self::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Self::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Self::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Self::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Self::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Self::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Self::Text(x)
    }
}

/// Rectangular table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// UTF-8, comma separated, LF terminated.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render)).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($crate::output::Cell::from($x)),*] };
}

/// One curve of a plot: column indices (1-based) into a CSV.
#[derive(Debug, Clone)]
pub struct Curve {
    pub csv: String,
    pub x: usize,
    pub y: usize,
    pub title: String,
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub name: String,
    pub xlabel: String,
    pub ylabel: String,
    pub logx: bool,
    pub logy: bool,
    pub curves: Vec<Curve>,
}

impl Plot {
    pub fn new(name: &str, xlabel: &str, ylabel: &str) -> Self {
        Self {
            name: name.into(),
            xlabel: xlabel.into(),
            ylabel: ylabel.into(),
            logx: false,
            logy: false,
            curves: Vec::new(),
        }
    }

    pub fn log(mut self, x: bool, y: bool) -> Self {
        self.logx = x;
        self.logy = y;
        self
    }

    pub fn curve(mut self, csv: &str, x: usize, y: usize, title: &str) -> Self {
        self.curves.push(Curve {
            csv: csv.into(),
            x,
            y,
            title: title.into(),
        });
        self
    }

    pub fn script(&self) -> String {
        let mut s = String::new();
        s.push_str("set datafile separator ','\n");
        s.push_str("set terminal pngcairo size 900,600\n");
        s.push_str(&format!("set output '{}.png'\n", self.name));
        s.push_str(&format!("set xlabel '{}'\nset ylabel '{}'\n", self.xlabel, self.ylabel));
        if self.logx {
            s.push_str("set logscale x\n");
        }
        if self.logy {
            s.push_str("set logscale y\n");
        }
        s.push_str("set key outside\n");
        let parts: Vec<String> = self
            .curves
            .iter()
            .map(|c| {
                format!(
                    "'{}' skip 1 using {}:{} with linespoints title '{}'",
                    c.csv, c.x, c.y, c.title
                )
            })
            .collect();
        s.push_str(&format!("plot {}\n", parts.join(", \\\n     ")));
        s
    }
}

/// Output directory of one run.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> LabResult<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> LabResult<()> {
        write_atomic(&self.dir.join(name), bytes)?;
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(())
    }

    pub fn write_csv(&mut self, name: &str, table: &Table) -> LabResult<()> {
        self.write_bytes(name, &table.to_csv())
    }

    pub fn write_plot(&mut self, plot: &Plot) -> LabResult<()> {
        self.write_bytes(&format!("{}.gp", plot.name), plot.script().as_bytes())
    }

    pub fn write_manifest(&mut self, manifest: &Manifest) -> LabResult<()> {
        let text = serde_json::to_string_pretty(&manifest.to_json(&self.files)).expect("manifest serializes");
        self.write_bytes("manifest.json", format!("{text}\n").as_bytes())
    }
}

/// Write to a sibling temporary file, flush, then rename over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("artifact");
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

#[derive(Debug, Clone)]
pub struct Manifest {
    pub subcommand: String,
    pub config_echo: Value,
    pub derived_params: Value,
    pub wall_seconds: f64,
    pub jobs: usize,
    pub status: Value,
}

impl Manifest {
    pub fn to_json(&self, files: &[String]) -> Value {
        let mut status = self.status.clone();
        if let Some(obj) = status.as_object_mut() {
            obj.insert("files".into(), json!(files));
        }
        json!({
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": self.subcommand,
            "config_echo": self.config_echo,
            "derived_params": self.derived_params,
            "timings": { "wall_seconds": self.wall_seconds, "jobs": self.jobs },
            "status": status,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_header_and_lf() {
        let mut t = Table::new(&["a", "b"]);
        t.push(row![0.5, "x"]);
        t.push(row![1e-7, 3usize]);
        let s = String::from_utf8(t.to_csv()).unwrap();
        assert_eq!(s, "a,b\n5e-1,x\n1e-7,3\n");
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt() * 1e-200, -7.25e33] {
            let s = Cell::Num(x).render();
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn plot_script_references_columns() {
        let p = Plot::new("rate", "mu", "eta").log(true, true).curve("rate.csv", 2, 3, "n=0");
        let s = p.script();
        assert!(s.contains("set logscale x") && s.contains("'rate.csv' skip 1 using 2:3"));
    }
}
