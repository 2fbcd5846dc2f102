//! Uniformly sampled scalar fields on a box in one or two dimensions.
//!
//! Samples sit at `a + i * h` with `h = (b - a) / n`, so the right endpoint of
//! every axis is excluded. Spectral operations always treat the box as a
//! periodic cell; a non-periodic field is the restriction of a compactly
//! supported whole-space function, zero-padded to the box edges.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// One axis of a sampling grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub start: f64,
    pub end: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(start: f64, end: f64, n: usize) -> Result<Self> {
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(Error::InvalidDomain { start, end });
        }
        if n < 4 {
            return Err(Error::TooFewPoints(n));
        }
        if !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        Ok(Axis { start, end, n })
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn spacing(&self) -> f64 {
        self.length() / self.n as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + i as f64 * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.point(i))
    }
}

/// A real field sampled on a uniform 1D or 2D grid, stored row-major
/// (the last axis varies fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    axes: Vec<Axis>,
    values: Vec<f64>,
    periodic: bool,
}

impl GridFunction {
    pub fn new(axes: Vec<Axis>, values: Vec<f64>, periodic: bool) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::UnsupportedDimension(axes.len()));
        }
        for ax in &axes {
            Axis::new(ax.start, ax.end, ax.n)?;
        }
        let expected: usize = axes.iter().map(|a| a.n).product();
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(GridFunction {
            axes,
            values,
            periodic,
        })
    }

    pub fn from_fn_1d(axis: Axis, periodic: bool, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = axis.points().map(f).collect();
        Self::new(vec![axis], values, periodic)
    }

    pub fn from_fn_2d(
        x: Axis,
        y: Axis,
        periodic: bool,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(x.n * y.n);
        for i in 0..x.n {
            let xi = x.point(i);
            for j in 0..y.n {
                values.push(f(xi, y.point(j)));
            }
        }
        Self::new(vec![x, y], values, periodic)
    }

    pub fn zeros_like(other: &GridFunction) -> Self {
        GridFunction {
            axes: other.axes.clone(),
            values: vec![0.0; other.values.len()],
            periodic: other.periodic,
        }
    }

    /// Same grid and periodicity, new values. The values are validated.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.axes.clone(), values, self.periodic)
    }

    pub(crate) fn with_values_unchecked(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        GridFunction {
            axes: self.axes.clone(),
            values,
            periodic: self.periodic,
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &Axis {
        &self.axes[i]
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.n).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn volume(&self) -> f64 {
        self.axes.iter().map(Axis::length).product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    /// Coarsest grid spacing over all axes.
    pub fn max_spacing(&self) -> f64 {
        self.axes
            .iter()
            .map(Axis::spacing)
            .fold(0.0, f64::max)
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Discrete L² norm, `(Σ |f|² ΔV)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.cell_volume()).sqrt()
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.axes == other.axes
    }

    fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::IncompatibleGrids(format!(
                "{:?} vs {:?}",
                self.axes, other.axes
            )))
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.with_values_unchecked(self.values.iter().map(|v| v * factor).collect())
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(self.with_values_unchecked(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(self.with_values_unchecked(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    /// Subtract the mean so the field has zero integral.
    pub fn mean_free(&self) -> Self {
        let m = self.mean();
        self.with_values_unchecked(self.values.iter().map(|v| v - m).collect())
    }

    /// Periodic shift by whole grid cells along each axis.
    pub fn roll(&self, shifts: &[isize]) -> Self {
        let shape = self.shape();
        let mut out = vec![0.0; self.values.len()];
        match shape.as_slice() {
            [n] => {
                let s = shifts[0].rem_euclid(*n as isize) as usize;
                for i in 0..*n {
                    out[(i + s) % n] = self.values[i];
                }
            }
            [n1, n2] => {
                let s1 = shifts[0].rem_euclid(*n1 as isize) as usize;
                let s2 = shifts.get(1).copied().unwrap_or(0).rem_euclid(*n2 as isize) as usize;
                for i in 0..*n1 {
                    for j in 0..*n2 {
                        out[((i + s1) % n1) * n2 + (j + s2) % n2] = self.values[i * n2 + j];
                    }
                }
            }
            _ => unreachable!(),
        }
        self.with_values_unchecked(out)
    }

    /// Distance from the support `{|f| > tol}` to the box boundary, in the
    /// coarsest axis' units. `None` for a field that vanishes everywhere.
    pub fn support_margin(&self, tol: f64) -> Option<f64> {
        let shape = self.shape();
        let mut margin = f64::INFINITY;
        let mut any = false;
        for (idx, v) in self.values.iter().enumerate() {
            if v.abs() <= tol {
                continue;
            }
            any = true;
            let mut rem = idx;
            for (d, ax) in self.axes.iter().enumerate().rev() {
                let i = rem % shape[d];
                rem /= shape[d];
                let x = ax.point(i);
                margin = margin.min(x - ax.start).min(ax.end - x);
            }
        }
        any.then_some(margin)
    }

    /// Serialize as CSV: a header row, one metadata row, then one value per
    /// line in row-major order, printed with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let mut header = vec!["dim".to_string()];
        let mut meta = vec![self.dim().to_string()];
        for (i, ax) in self.axes.iter().enumerate() {
            header.push(format!("n{}", i + 1));
            meta.push(ax.n.to_string());
        }
        for (i, ax) in self.axes.iter().enumerate() {
            header.push(format!("a{}", i + 1));
            header.push(format!("b{}", i + 1));
            meta.push(format_f64(ax.start));
            meta.push(format_f64(ax.end));
        }
        header.push("periodic".into());
        meta.push(self.periodic.to_string());
        let _ = writeln!(out, "{}", header.join(","));
        let _ = writeln!(out, "{}", meta.join(","));
        for v in &self.values {
            let _ = writeln!(out, "{}", format_f64(*v));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            reason: "missing header".into(),
        })?;
        let header: Vec<&str> = header.split(',').map(str::trim).collect();
        let (meta_line, meta) = lines.next().ok_or(Error::Parse {
            line: 2,
            reason: "missing metadata row".into(),
        })?;
        let meta: Vec<&str> = meta.split(',').map(str::trim).collect();
        if header.len() != meta.len() {
            return Err(Error::Parse {
                line: meta_line + 1,
                reason: "metadata row does not match header".into(),
            });
        }
        let field = |name: &str| -> Result<&str> {
            header
                .iter()
                .position(|h| *h == name)
                .map(|i| meta[i])
                .ok_or(Error::Parse {
                    line: 1,
                    reason: format!("missing column `{name}`"),
                })
        };
        let parse_num = |name: &str| -> Result<f64> {
            field(name)?.parse::<f64>().map_err(|e| Error::Parse {
                line: meta_line + 1,
                reason: format!("{name}: {e}"),
            })
        };
        let dim = parse_num("dim")? as usize;
        if !(1..=2).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        let mut axes = Vec::with_capacity(dim);
        for d in 1..=dim {
            let n = parse_num(&format!("n{d}"))? as usize;
            let a = parse_num(&format!("a{d}"))?;
            let b = parse_num(&format!("b{d}"))?;
            axes.push(Axis::new(a, b, n)?);
        }
        let periodic = match field("periodic")? {
            "true" | "1" => true,
            "false" | "0" => false,
            other => {
                return Err(Error::Parse {
                    line: meta_line + 1,
                    reason: format!("periodic: `{other}` is not a boolean"),
                })
            }
        };
        let values = lines
            .map(|(i, l)| {
                l.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: i + 1,
                    reason: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(axes, values, periodic)
    }
}

/// 17 significant digits, enough to round-trip any finite double.
pub(crate) fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}
