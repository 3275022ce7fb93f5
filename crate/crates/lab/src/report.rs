//! Verdicts, tables and the on-disk layout of an experiment's outputs:
//! `summary.json`, one CSV per table and one binary file per sample batch.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use prlmc_core::metrics::{io as batch_io, SampleBatch};
use serde::Serialize;

use crate::config::Experiment;
use crate::error::{LabError, LabResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Pass => 0,
            Self::Fail => 1,
            Self::Inconclusive => 2,
        }
    }
}

/// One comparison of an empirical estimate against a bound or reference value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub criterion: String,
    pub estimate: f64,
    pub se: f64,
    /// The bound or reference value the estimate is compared with.
    pub bound: Option<f64>,
    /// Name of the result that supplies the bound.
    pub reference: String,
    pub status: Status,
    pub note: String,
}

impl Verdict {
    pub fn new(criterion: impl Into<String>, reference: impl Into<String>) -> Self {
        Self {
            criterion: criterion.into(),
            estimate: f64::NAN,
            se: 0.0,
            bound: None,
            reference: reference.into(),
            status: Status::Inconclusive,
            note: String::new(),
        }
    }

    /// Passes unless `estimate > bound + z·se`.
    pub fn at_most(mut self, estimate: f64, se: f64, bound: f64, z: f64) -> Self {
        self.estimate = estimate;
        self.se = se;
        self.bound = Some(bound);
        self.status = pass_if(estimate <= bound + z * se);
        self
    }

    /// Passes when `|estimate − reference| ≤ z·se`.
    pub fn agrees(mut self, estimate: f64, se: f64, reference: f64, z: f64) -> Self {
        self.estimate = estimate;
        self.se = se;
        self.bound = Some(reference);
        self.status = pass_if((estimate - reference).abs() <= z * se);
        self
    }

    /// Exact check without sampling error.
    pub fn holds(mut self, estimate: f64, bound: Option<f64>, ok: bool) -> Self {
        self.estimate = estimate;
        self.se = 0.0;
        self.bound = bound;
        self.status = pass_if(ok);
        self
    }

    pub fn status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

pub fn pass_if(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Self::Int(v) => v.to_string(),
            Self::Float(v) => batch_io::fmt_f64(*v),
            Self::Bool(v) => v.to_string(),
            Self::Text(v) => v.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Self::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Self::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Self::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Self::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Self::Text(v.to_owned())
    }
}

/// A CSV table with a fixed column schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&'static str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Float (or integer) values of one column.
    pub fn floats(&self, name: &str) -> Vec<f64> {
        let Some(j) = self.column_index(name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .map(|r| match &r[j] {
                Cell::Float(v) => *v,
                Cell::Int(v) => *v as f64,
                Cell::Bool(v) => f64::from(u8::from(*v)),
                Cell::Text(_) => f64::NAN,
            })
            .collect()
    }

    fn write(&self, path: &Path) -> LabResult<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush().map_err(|source| io_error(path, source))
    }
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub name: String,
    pub value: f64,
    pub se: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub experiment: Experiment,
    pub status: Status,
    pub master_seed: u64,
    pub config: serde_json::Value,
    /// Closed-form quantities the verdicts rely on.
    pub theory: serde_json::Value,
    pub estimates: Vec<Estimate>,
    pub verdicts: Vec<Verdict>,
    pub warnings: Vec<String>,
    /// Files written next to `summary.json`.
    pub files: Vec<String>,
    #[serde(skip)]
    pub tables: Vec<Table>,
    #[serde(skip)]
    pub batches: Vec<(String, SampleBatch)>,
}

fn io_error(path: &Path, source: std::io::Error) -> LabError {
    LabError::Io {
        path: path.display().to_string(),
        source,
    }
}

impl ExperimentReport {
    pub fn new(experiment: Experiment, master_seed: u64, config: serde_json::Value) -> Self {
        Self {
            experiment,
            status: Status::Pass,
            master_seed,
            config,
            theory: serde_json::Value::Null,
            estimates: Vec::new(),
            verdicts: Vec::new(),
            warnings: Vec::new(),
            files: Vec::new(),
            tables: Vec::new(),
            batches: Vec::new(),
        }
    }

    pub fn estimate(&mut self, name: impl Into<String>, value: f64, se: f64) {
        self.estimates.push(Estimate {
            name: name.into(),
            value,
            se,
        });
    }

    pub fn verdict(&mut self, v: Verdict) {
        self.verdicts.push(v);
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Worst verdict status; a report without verdicts passes.
    pub fn finish(&mut self) {
        self.status = self
            .verdicts
            .iter()
            .map(|v| v.status)
            .max()
            .unwrap_or(Status::Pass);
        self.files = self
            .tables
            .iter()
            .map(|t| format!("{}.csv", t.name))
            .chain(self.batches.iter().map(|(n, _)| format!("{n}.bin")))
            .collect();
    }

    /// Writes everything under `root/<experiment>/` and returns that directory.
    pub fn write(&self, root: &Path) -> LabResult<PathBuf> {
        let dir = root.join(self.experiment.name());
        fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
        for t in &self.tables {
            t.write(&dir.join(format!("{}.csv", t.name)))?;
        }
        for (name, batch) in &self.batches {
            let path = dir.join(format!("{name}.bin"));
            let f = fs::File::create(&path).map_err(|e| io_error(&path, e))?;
            batch_io::write_binary(batch, BufWriter::new(f))?;
        }
        let path = dir.join("summary.json");
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| io_error(&path, e))?;
        Ok(dir)
    }
}
