//! Tabular experiment records.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::format_f64;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Flag(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_f64(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Flag(b) => b.to_string(),
            Cell::Text(t) => t.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            Cell::Flag(_) | Cell::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

/// An inequality `lhs ≤ rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Check {
            label: label.into(),
            lhs,
            rhs,
            pass: lhs <= rhs,
        }
    }

    /// Marks a check that could not be evaluated meaningfully as failed.
    pub fn invalid(label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Check {
            pass: false,
            ..Check::new(label, lhs, rhs)
        }
    }
}

/// Least-squares slope in log-log coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentFit {
    pub label: String,
    pub exponent: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MixingReport {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub fits: Vec<ExponentFit>,
    pub scalars: Vec<(String, f64)>,
    pub checks: Vec<Check>,
}

impl MixingReport {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        MixingReport {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn push_scalar(&mut self, name: impl Into<String>, value: f64) {
        self.scalars.push((name.into(), value));
    }

    pub fn push_fit(&mut self, fit: ExponentFit) {
        self.fits.push(fit);
    }

    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.scalars.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Every flag agrees with its recorded sides.
    pub fn is_consistent(&self) -> bool {
        self.checks
            .iter()
            .all(|c| !c.pass || c.lhs <= c.rhs)
    }

    /// Header row, data rows, then one `# exponent=… residual=…` line per fit.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        for fit in &self.fits {
            let _ = writeln!(
                out,
                "# exponent={} residual={}",
                format_f64(fit.exponent),
                format_f64(fit.residual)
            );
        }
        out
    }
}

/// Least-squares fit of `log value = exponent · log scale + b`; the residual
/// is the largest absolute deviation in natural-log units.
pub fn fit_exponent(pairs: &[(f64, f64)]) -> Result<(f64, f64)> {
    if pairs.len() < 3 {
        return Err(Error::param(
            "pairs",
            format!("need at least 3 points, got {}", pairs.len()),
        ));
    }
    if let Some((s, v)) = pairs
        .iter()
        .find(|(s, v)| !(*s > 0.0 && *v > 0.0 && s.is_finite() && v.is_finite()))
    {
        return Err(Error::param(
            "pairs",
            format!("nonpositive or non-finite point ({s}, {v})"),
        ));
    }
    let pts: Vec<(f64, f64)> = pairs.iter().map(|(s, v)| (s.ln(), v.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::param("pairs", "all scales are equal"));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icept = my - slope * mx;
    let residual = pts
        .iter()
        .map(|(x, y)| (y - slope * x - icept).abs())
        .fold(0.0, f64::max);
    Ok((slope, residual))
}
