//! Tagged result tables and pass/fail checks.

use serde::{Deserialize, Serialize};

/// Provenance of a column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tag {
    /// Input coordinate or setting.
    Param,
    /// Certified quadrature or exact arithmetic.
    Exact,
    /// Closed-form evaluation.
    Formula,
    /// Monte Carlo estimate, stderr or sample count.
    Mc,
    /// Outcome of a comparison.
    Verdict,
}

impl Tag {
    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Param => "param",
            Tag::Exact => "exact",
            Tag::Formula => "formula",
            Tag::Mc => "mc",
            Tag::Verdict => "verdict",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub tag: Tag,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.12e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[(&str, Tag)]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|&(n, tag)| Column { name: n.to_string(), tag }).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn num(&self, row: usize, name: &str) -> Option<f64> {
        match self.rows.get(row)?.get(self.column(name)?)? {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

/// One asserted criterion: a row of summary.csv.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub target: f64,
    pub estimate: f64,
    /// Zero for deterministic comparisons.
    pub stderr: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, target: f64, estimate: f64, stderr: f64, pass: bool) -> Self {
        Self { name: name.into(), target, estimate, stderr, pass }
    }

    /// |estimate − target| ≤ k·stderr.
    pub fn within_ci(name: impl Into<String>, target: f64, estimate: f64, stderr: f64, k: f64) -> Self {
        let pass = (estimate - target).abs() <= k * stderr;
        Self::new(name, target, estimate, stderr, pass)
    }

    /// estimate ≤ limit.
    pub fn at_most(name: impl Into<String>, limit: f64, estimate: f64) -> Self {
        Self::new(name, limit, estimate, 0.0, estimate <= limit)
    }
}

/// A line series for the SVG plotter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plot {
    pub name: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub plots: Vec<Plot>,
}

impl Report {
    pub fn new(experiment: &str) -> Self {
        Self { experiment: experiment.to_string(), ..Default::default() }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}
