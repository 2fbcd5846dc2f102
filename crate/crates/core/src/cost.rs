//! Passive-scalar advection by prescribed incompressible flows on the unit
//! torus `[0, 1)²`, and diagnostics for the cost of mixing.

use std::f64::consts::PI;
use std::str::FromStr;

use rayon::prelude::*;

use crate::averaging::{min_radius, BallAverager};
use crate::error::{Error, Result};
use crate::grid::{Axis, GridFunction};
use crate::report::{Cell, Check, MixingReport};
use crate::scales::{bridge_constant, GeometricProfile, RadiusGrid};
use crate::spectrum::{fourier_transform, Spectrum};

const TAU: f64 = 2.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowKind {
    /// `(sin 2πy, 0)`.
    Shear,
    /// `(∂_y ψ, −∂_x ψ)` with `ψ = sin 2πx sin 2πy / 2π`.
    Cellular,
    /// Cellular for the first half of each period, then the same cells
    /// shifted by a quarter in both directions.
    Alternating,
}

impl FlowKind {
    pub fn name(self) -> &'static str {
        match self {
            FlowKind::Shear => "shear",
            FlowKind::Cellular => "cellular",
            FlowKind::Alternating => "alternating",
        }
    }
}

impl FromStr for FlowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shear" => Ok(FlowKind::Shear),
            "cellular" => Ok(FlowKind::Cellular),
            "alternating" => Ok(FlowKind::Alternating),
            other => Err(Error::param("flow", format!("unknown flow kind {other:?}"))),
        }
    }
}

/// A divergence-free velocity field with closed-form gradient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VelocityField {
    kind: FlowKind,
    amplitude: f64,
    /// Switching period of the alternating flow.
    period: f64,
}

/// Gradient `g[i][j] = ∂_j v_i`.
pub type Gradient = [[f64; 2]; 2];

impl VelocityField {
    pub fn new(kind: FlowKind, amplitude: f64) -> Result<Self> {
        Self::with_period(kind, amplitude, 1.0)
    }

    pub fn with_period(kind: FlowKind, amplitude: f64, period: f64) -> Result<Self> {
        if !amplitude.is_finite() {
            return Err(Error::param("amplitude", format!("{amplitude} is not finite")));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::param("period", format!("{period} is not positive")));
        }
        let v = VelocityField {
            kind,
            amplitude,
            period,
        };
        let div = v.max_divergence(32);
        if div > 1e-12 * (1.0 + amplitude.abs()) {
            return Err(Error::param(
                "flow",
                format!("{} has divergence {div}", kind.name()),
            ));
        }
        Ok(v)
    }

    pub fn kind(&self) -> FlowKind {
        self.kind
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Active phase (0 or 1) at time `t`; only the alternating flow uses 1.
    pub fn phase_at(&self, t: f64) -> usize {
        match self.kind {
            FlowKind::Alternating => ((t / (0.5 * self.period)).floor() as i64).rem_euclid(2) as usize,
            _ => 0,
        }
    }

    /// Next time after `t` at which the flow changes.
    pub fn next_switch(&self, t: f64) -> f64 {
        match self.kind {
            FlowKind::Alternating => {
                let half = 0.5 * self.period;
                ((t / half).floor() + 1.0) * half
            }
            _ => f64::INFINITY,
        }
    }

    fn cell_shift(&self, phase: usize) -> f64 {
        if phase == 1 {
            0.25
        } else {
            0.0
        }
    }

    pub fn velocity_in_phase(&self, phase: usize, x: f64, y: f64) -> [f64; 2] {
        let a = self.amplitude;
        match self.kind {
            FlowKind::Shear => [a * (TAU * y).sin(), 0.0],
            FlowKind::Cellular | FlowKind::Alternating => {
                let d = self.cell_shift(phase);
                let (sx, cx) = (TAU * (x + d)).sin_cos();
                let (sy, cy) = (TAU * (y + d)).sin_cos();
                [a * sx * cy, -a * cx * sy]
            }
        }
    }

    pub fn gradient_in_phase(&self, phase: usize, x: f64, y: f64) -> Gradient {
        let a = self.amplitude * TAU;
        match self.kind {
            FlowKind::Shear => [[0.0, a * (TAU * y).cos()], [0.0, 0.0]],
            FlowKind::Cellular | FlowKind::Alternating => {
                let d = self.cell_shift(phase);
                let (sx, cx) = (TAU * (x + d)).sin_cos();
                let (sy, cy) = (TAU * (y + d)).sin_cos();
                [[a * cx * cy, -a * sx * sy], [a * sx * sy, -a * cx * cy]]
            }
        }
    }

    pub fn velocity(&self, t: f64, x: f64, y: f64) -> [f64; 2] {
        self.velocity_in_phase(self.phase_at(t), x, y)
    }

    pub fn gradient(&self, t: f64, x: f64, y: f64) -> Gradient {
        self.gradient_in_phase(self.phase_at(t), x, y)
    }

    fn max_divergence(&self, n: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for phase in 0..2 {
            for i in 0..n {
                for j in 0..n {
                    let (x, y) = (i as f64 / n as f64 + 0.013, j as f64 / n as f64 + 0.007);
                    let g = self.gradient_in_phase(phase, x, y);
                    worst = worst.max((g[0][0] + g[1][1]).abs());
                }
            }
        }
        worst
    }

    /// `max |v|` over all phases.
    pub fn max_speed(&self) -> f64 {
        self.amplitude.abs()
    }

    /// `max |∇v|` (Frobenius) over all phases.
    pub fn max_gradient(&self) -> f64 {
        match self.kind {
            FlowKind::Shear => TAU * self.amplitude.abs(),
            _ => TAU * self.amplitude.abs() * 2f64.sqrt(),
        }
    }
}

/// Operator norm of the symmetric matrix `∇v + ∇vᵀ`.
fn strain_norm(g: &Gradient) -> f64 {
    let a = 2.0 * g[0][0];
    let d = 2.0 * g[1][1];
    let b = g[0][1] + g[1][0];
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d).powi(2) + b * b).sqrt();
    (mean + rad).abs().max((mean - rad).abs())
}

/// Samples per axis used by [`strain_linfty`] and [`gradient_lp_norm`].
pub const FLOW_SAMPLES: usize = 256;

/// `max ‖∇v + ∇vᵀ‖` over a `FLOW_SAMPLES²` grid at time `t`, using the
/// operator norm of the symmetrized gradient.
pub fn strain_linfty(v: &VelocityField, t: f64) -> f64 {
    strain_linfty_in_phase(v, v.phase_at(t))
}

fn strain_linfty_in_phase(v: &VelocityField, phase: usize) -> f64 {
    let n = FLOW_SAMPLES;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 / n as f64;
            (0..n)
                .map(|j| strain_norm(&v.gradient_in_phase(phase, x, j as f64 / n as f64)))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// `‖∇v(t)‖_{L^p}` on the unit torus with the Frobenius norm pointwise.
pub fn gradient_lp_norm(v: &VelocityField, t: f64, p: f64) -> f64 {
    let n = FLOW_SAMPLES;
    let phase = v.phase_at(t);
    let sum: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 / n as f64;
            (0..n)
                .map(|j| {
                    let g = v.gradient_in_phase(phase, x, j as f64 / n as f64);
                    let f = g.iter().flatten().map(|e| e * e).sum::<f64>().sqrt();
                    f.powf(p)
                })
                .sum::<f64>()
        })
        .sum();
    (sum / (n * n) as f64).powf(1.0 / p)
}

/// Cells a departure point may travel per step.
pub const CFL_CELLS: f64 = 4.0;

/// Largest admissible step on `rho`'s grid: departure points stay within
/// [`CFL_CELLS`] cells and `dt ‖∇v‖_∞ ≤ 1/2`.
pub fn cfl_limit(rho: &GridFunction, v: &VelocityField) -> f64 {
    let by_speed = if v.max_speed() > 0.0 {
        CFL_CELLS * rho.max_spacing() / v.max_speed()
    } else {
        f64::INFINITY
    };
    let by_gradient = if v.max_gradient() > 0.0 {
        0.5 / v.max_gradient()
    } else {
        f64::INFINITY
    };
    by_speed.min(by_gradient)
}

fn check_torus(rho: &GridFunction) -> Result<()> {
    let unit = |a: &Axis| a.start == 0.0 && a.end == 1.0;
    if rho.dim() != 2 || !rho.is_periodic() || !rho.axes().iter().all(unit) {
        return Err(Error::param(
            "rho",
            "advection runs on the periodic unit square [0, 1)^2",
        ));
    }
    Ok(())
}

/// Step boundaries on `[0, T]`: spacing at most `dt`, never straddling a
/// switch of the flow.
fn time_steps(v: &VelocityField, total: f64, dt: f64) -> Vec<(f64, f64)> {
    let mut steps = Vec::new();
    let mut t = 0.0;
    while t < total - 1e-12 {
        let seg_end = v.next_switch(t).min(total);
        let n = ((seg_end - t) / dt - 1e-9).ceil().max(1.0) as usize;
        let h = (seg_end - t) / n as f64;
        for i in 0..n {
            let a = t + i as f64 * h;
            let b = if i + 1 == n { seg_end } else { a + h };
            steps.push((a, b));
        }
        t = seg_end;
    }
    steps
}

fn catmull_rom(f: f64) -> [f64; 4] {
    let f2 = f * f;
    let f3 = f2 * f;
    [
        0.5 * (-f3 + 2.0 * f2 - f),
        0.5 * (3.0 * f3 - 5.0 * f2 + 2.0),
        0.5 * (-3.0 * f3 + 4.0 * f2 + f),
        0.5 * (f3 - f2),
    ]
}

/// Catmull–Rom weights and periodic node indices around one point.
#[derive(Clone, Copy, Debug)]
struct Stencil {
    rows: [u32; 4],
    cols: [u32; 4],
    wx: [f64; 4],
    wy: [f64; 4],
}

impl Stencil {
    fn new(n1: usize, n2: usize, x: f64, y: f64) -> Self {
        let u = x * n1 as f64;
        let w = y * n2 as f64;
        let (iu, iw) = (u.floor(), w.floor());
        let (wx, wy) = (catmull_rom(u - iu), catmull_rom(w - iw));
        let (iu, iw) = (iu as i64, iw as i64);
        let idx = |base: i64, a: usize, n: usize| (base + a as i64 - 1).rem_euclid(n as i64) as u32;
        Stencil {
            rows: std::array::from_fn(|a| idx(iu, a, n1)),
            cols: std::array::from_fn(|b| idx(iw, b, n2)),
            wx,
            wy,
        }
    }

    /// Bicubic value clamped to the range of the four enclosing nodes, so
    /// that no new extrema appear.
    fn apply(&self, values: &[f64], n2: usize) -> f64 {
        let mut acc = 0.0;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for a in 0..4 {
            let row = &values[self.rows[a] as usize * n2..];
            let mut inner = 0.0;
            for b in 0..4 {
                let val = row[self.cols[b] as usize];
                inner += self.wy[b] * val;
                if (1..=2).contains(&a) && (1..=2).contains(&b) {
                    lo = lo.min(val);
                    hi = hi.max(val);
                }
            }
            acc += self.wx[a] * inner;
        }
        acc.clamp(lo, hi)
    }
}

/// Interpolation stencils at the departure points of every node over a step of length `h` in `phase`,
/// by RK4 integration of the characteristic backwards in time. The flows are
/// steady within a phase, so these depend only on `(phase, h)`.
fn departures(v: &VelocityField, n1: usize, n2: usize, phase: usize, h: f64) -> Vec<Stencil> {
    let vel = |x: f64, y: f64| v.velocity_in_phase(phase, x, y);
    (0..n1)
        .into_par_iter()
        .flat_map_iter(|i| {
            let x = i as f64 / n1 as f64;
            (0..n2).map(move |j| {
                let y = j as f64 / n2 as f64;
                let k1 = vel(x, y);
                let k2 = vel(x - 0.5 * h * k1[0], y - 0.5 * h * k1[1]);
                let k3 = vel(x - 0.5 * h * k2[0], y - 0.5 * h * k2[1]);
                let k4 = vel(x - h * k3[0], y - h * k3[1]);
                let dx = h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
                let dy = h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
                Stencil::new(n1, n2, x - dx, y - dy)
            })
        })
        .collect()
}

/// Semi-Lagrangian stepper reusing departure stencils across steps.
struct Stepper<'a> {
    v: &'a VelocityField,
    n1: usize,
    n2: usize,
    cache: Vec<(usize, f64, Vec<Stencil>)>,
}

impl<'a> Stepper<'a> {
    fn new(rho: &GridFunction, v: &'a VelocityField) -> Self {
        let shape = rho.shape();
        Stepper {
            v,
            n1: shape[0],
            n2: shape[1],
            cache: Vec::new(),
        }
    }

    /// One step from `t0` to `t1`: clamped bicubic interpolation at the
    /// departure points, then an additive correction restoring the mean.
    fn step(&mut self, rho: &GridFunction, t0: f64, t1: f64) -> GridFunction {
        let phase = self.v.phase_at(0.5 * (t0 + t1));
        let h = t1 - t0;
        let pos = match self
            .cache
            .iter()
            .position(|(p, dt, _)| *p == phase && (dt - h).abs() <= 1e-14 * h.abs())
        {
            Some(i) => i,
            None => {
                let d = departures(self.v, self.n1, self.n2, phase, h);
                self.cache.push((phase, h, d));
                self.cache.len() - 1
            }
        };
        let dep = &self.cache[pos].2;
        let old = rho.values();
        let n2 = self.n2;
        let mut values: Vec<f64> = dep.par_iter().map(|st| st.apply(old, n2)).collect();
        let shift = rho.mean() - values.iter().sum::<f64>() / values.len() as f64;
        for val in &mut values {
            *val += shift;
        }
        rho.with_values_unchecked(values)
    }
}

fn check_step(rho: &GridFunction, v: &VelocityField, total: f64, dt: f64) -> Result<()> {
    check_torus(rho)?;
    if !(total >= 0.0 && total.is_finite()) {
        return Err(Error::param("T", format!("{total} is not a valid final time")));
    }
    let limit = cfl_limit(rho, v);
    if !(dt > 0.0) || dt > limit {
        return Err(Error::CflViolation { dt, limit });
    }
    Ok(())
}

/// `ρ(T)` for `∂_t ρ + v·∇ρ = 0` with `ρ(0) = rho0` on the unit torus.
pub fn advect(rho0: &GridFunction, v: &VelocityField, total: f64, dt: f64) -> Result<GridFunction> {
    check_step(rho0, v, total, dt)?;
    let mut stepper = Stepper::new(rho0, v);
    let mut rho = rho0.clone();
    for (a, b) in time_steps(v, total, dt) {
        rho = stepper.step(&rho, a, b);
    }
    Ok(rho)
}

/// `∫₀ᵀ strain_linfty dt`, exact for the piecewise steady flows here.
pub fn integrated_strain(v: &VelocityField, total: f64) -> f64 {
    let s0 = strain_linfty_in_phase(v, 0);
    let s1 = strain_linfty_in_phase(v, 1);
    let mut acc = 0.0;
    let mut t = 0.0;
    while t < total {
        let end = v.next_switch(t).min(total);
        acc += (end - t) * if v.phase_at(0.5 * (t + end)) == 0 { s0 } else { s1 };
        t = end;
    }
    acc
}

/// Largest tolerated share of `Ḣ¹` energy beyond a third of the grid band.
pub const TAIL_LIMIT: f64 = 0.1;

/// Share of `Σ|ξ|²|ρ̂|²` on modes with `max(|m₁|, |m₂|) > N/3`.
pub fn spectral_tail_fraction(rho: &GridFunction) -> f64 {
    tail_fraction(&fourier_transform(rho), 1.0)
}

/// Share of `Σ|ξ|^{2s}|ρ̂|²` on modes with `max(|m₁|, |m₂|) > N/3`.
fn tail_fraction(spec: &Spectrum, s: f64) -> f64 {
    let shape = spec.shape();
    let lengths: Vec<f64> = spec.axes().iter().map(Axis::length).collect();
    let mut total = 0.0;
    let mut tail = 0.0;
    for (i, c) in spec.coefficients().iter().enumerate() {
        let xi = spec.frequency(i);
        let m2 = xi[0] * xi[0] + xi[1] * xi[1];
        if m2 == 0.0 {
            continue;
        }
        let e = m2.powf(s) * c.norm_sqr();
        total += e;
        let high = (0..2).any(|a| (xi[a] * lengths[a] / TAU).abs() > shape[a] as f64 / 3.0);
        if high {
            tail += e;
        }
    }
    if total > 0.0 {
        tail / total
    } else {
        0.0
    }
}

/// Advects `rho0` and compares `‖∇ρ(t)‖ / ‖∇ρ₀‖` with `exp(½ ∫₀ᵗ strain)`
/// after every step.
///
/// Columns: `t, growth, bound, bound_unhalved, tail, valid, pass`. A check
/// fails if the growth exceeds the bound or the resolution is lost
/// (`tail > TAIL_LIMIT`).
pub fn gronwall_check(
    rho0: &GridFunction,
    v: &VelocityField,
    total: f64,
    dt: f64,
) -> Result<MixingReport> {
    check_step(rho0, v, total, dt)?;
    let g0 = fourier_transform(rho0).weighted_norm(1.0, true);
    let s0 = strain_linfty_in_phase(v, 0);
    let s1 = strain_linfty_in_phase(v, 1);
    let mut rep = MixingReport::new(
        format!("gronwall-{}", v.kind().name()),
        &["t", "growth", "bound", "bound_unhalved", "tail", "valid", "pass"],
    );
    let mut stepper = Stepper::new(rho0, v);
    let mut rho = rho0.clone();
    let mut strain = 0.0;
    let mut max_share: f64 = 0.0;
    let mut all_valid = true;
    let mut max_tail: f64 = spectral_tail_fraction(rho0);
    for (a, b) in time_steps(v, total, dt) {
        rho = stepper.step(&rho, a, b);
        strain += (b - a) * if v.phase_at(0.5 * (a + b)) == 0 { s0 } else { s1 };
        let spec = fourier_transform(&rho);
        let growth = if g0 > 0.0 { spec.weighted_norm(1.0, true) / g0 } else { 1.0 };
        let bound = (0.5 * strain).exp();
        let tail = tail_fraction(&spec, 1.0);
        let valid = tail <= TAIL_LIMIT;
        let pass = growth <= bound;
        max_share = max_share.max(growth / bound);
        max_tail = max_tail.max(tail);
        all_valid &= valid;
        rep.push_row(vec![
            b.into(),
            growth.into(),
            bound.into(),
            strain.exp().into(),
            tail.into(),
            valid.into(),
            pass.into(),
        ]);
    }
    rep.push_scalar("integrated_strain", strain);
    rep.push_scalar("max_growth_over_bound", max_share);
    rep.push_scalar("max_tail", max_tail);
    rep.push_check(Check::new("growth <= exp(1/2 int strain)", max_share, 1.0));
    if all_valid {
        rep.push_check(Check::new("spectral tail", max_tail, TAIL_LIMIT));
    } else {
        rep.push_check(Check::invalid("spectral tail", max_tail, TAIL_LIMIT));
    }
    Ok(rep)
}

/// `1_{[0,1/2)}(y)` on the `n × n` unit torus, as cell averages, smoothed by
/// a Gaussian of standard deviation `width` (no smoothing for `width = 0`).
pub fn make_stripe(n: usize, width: f64) -> Result<GridFunction> {
    if !(width >= 0.0) {
        return Err(Error::param("width", format!("{width} is negative")));
    }
    let ax = Axis::new(0.0, 1.0, n)?;
    let h = ax.spacing();
    // Primitive of the periodic stripe minus its mean.
    let prim = |y: f64| {
        let w = y - y.floor();
        w.min(0.5) - 0.5 * w
    };
    let sharp = GridFunction::from_fn_2d(ax, ax, true, |_, y| {
        0.5 + (prim(y + 0.5 * h) - prim(y - 0.5 * h)) / h
    })?;
    if width == 0.0 {
        return Ok(sharp);
    }
    let spec = fourier_transform(&sharp);
    let smooth = spec
        .apply(|xi| (-0.5 * width * width * (xi[0] * xi[0] + xi[1] * xi[1])).exp())
        .inverse();
    Ok(smooth)
}

/// `sin(2π m x)` on the `n × n` unit torus.
pub fn make_single_mode(n: usize, m: u32) -> Result<GridFunction> {
    let ax = Axis::new(0.0, 1.0, n)?;
    GridFunction::from_fn_2d(ax, ax, true, |x, _| (TAU * m as f64 * x).sin())
}

/// Parameters of [`mixing_cost_curve`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostRun {
    pub n: usize,
    pub p: f64,
    pub total: f64,
    pub dt: f64,
    /// Declared lower bound for `cost / |log ε|` on `[T/2, T]`.
    pub constant: f64,
    /// Geometric mixing level `κ`.
    pub kappa: f64,
}

/// Smallest meaningful `‖ρ − 1/2‖_{Ḣ⁻¹}`.
pub const EPS_FLOOR: f64 = 1e-12;

/// Mixes the stripe `1_{[0,1/2)}(y)` and records, after every step,
/// `ε = ‖ρ − 1/2‖_{Ḣ⁻¹}`, `cost = ∫ ‖∇v‖_{L^p}` and `cost / |log ε|`.
///
/// Columns: `t, eps_H-1, cost_Lp, ratio, grid_valid`. The ratio is checked
/// against `constant` on `[T/2, T]` when the flow is nonzero. Scalars record
/// the geometric mixing level of `ρ(T)` at radius `ε(T)` and the constant
/// needed in `‖f‖_{Ḣ⁻¹} ≤ C (𝔤_{ε₀}[f] + ε₀ ‖f‖_{L²})` for `f = ρ(T) − 1/2`.
pub fn mixing_cost_curve(v: &VelocityField, run: &CostRun) -> Result<MixingReport> {
    if !(run.p > 1.0) {
        return Err(Error::param("p", format!("{} is not above 1", run.p)));
    }
    let rho0 = make_stripe(run.n, 0.0)?;
    check_step(&rho0, v, run.total, run.dt)?;
    // ε and the share of L² energy beyond the resolved band.
    let diagnose = |rho: &GridFunction| {
        let spec = fourier_transform(rho);
        (spec.weighted_norm(-1.0, true), tail_fraction(&spec, 0.0) <= TAIL_LIMIT)
    };
    let mut rep = MixingReport::new(
        format!("cost-{}", v.kind().name()),
        &["t", "eps_H-1", "cost_Lp", "ratio", "grid_valid"],
    );
    let moving = v.amplitude() != 0.0;
    let mut stepper = Stepper::new(&rho0, v);
    let mut rho = rho0;
    let mut cost = 0.0;
    let mut min_ratio = f64::INFINITY;
    let (eps0, valid0) = diagnose(&rho);
    rep.push_row(vec![
        0.0.into(),
        eps0.into(),
        0.0.into(),
        0.0.into(),
        valid0.into(),
    ]);
    let mut eps_final = eps0;
    for (a, b) in time_steps(v, run.total, run.dt) {
        rho = stepper.step(&rho, a, b);
        cost += (b - a) * gradient_lp_norm(v, 0.5 * (a + b), run.p);
        let (eps, valid) = diagnose(&rho);
        if eps < EPS_FLOOR {
            break;
        }
        eps_final = eps;
        let ratio = cost / eps.ln().abs();
        if moving && b >= 0.5 * run.total - 1e-12 {
            min_ratio = min_ratio.min(ratio);
        }
        rep.push_row(vec![
            b.into(),
            eps.into(),
            cost.into(),
            ratio.into(),
            Cell::Flag(valid),
        ]);
    }
    rep.push_scalar("eps_final", eps_final);
    rep.push_scalar("cost_final", cost);
    if moving {
        rep.push_scalar("min_ratio", min_ratio);
        rep.push_check(Check::new("cost / |log eps| on [T/2, T]", run.constant, min_ratio));
    }

    let r = eps_final.max(min_radius(&rho));
    let avg = BallAverager::new(&rho).average(r)?;
    let lo = avg.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = avg.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    rep.push_scalar("geometric_radius", r);
    rep.push_scalar("geometric_kappa", lo.min(1.0 - hi));
    rep.push_scalar("geometric_mixed", f64::from(u8::from(lo >= run.kappa && hi <= 1.0 - run.kappa)));

    let f = rho.map(|x| x - 0.5)?;
    let radii = RadiusGrid::with_density(min_radius(&f), 0.5, 16)?;
    let profile = GeometricProfile::compute(&f, &radii)?;
    let spec = fourier_transform(&f);
    let h = spec.weighted_norm(-1.0, true);
    let l2 = spec.l2_norm();
    let needed = profile
        .radii
        .iter()
        .zip(&profile.functional)
        .map(|(e, g)| {
            let base = g + e * l2;
            if base > 0.0 {
                h / base
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    rep.push_scalar("C_bridge", needed);
    rep.push_check(Check::new("H^-1 <= C (g_eps0 + eps0 L2)", needed, bridge_constant(2)));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_l2(a: &GridFunction, b: &GridFunction) -> f64 {
        a.sub(b).unwrap().l2_norm() / b.l2_norm()
    }

    #[test]
    fn flows_are_divergence_free() {
        for kind in [FlowKind::Shear, FlowKind::Cellular, FlowKind::Alternating] {
            let v = VelocityField::new(kind, 1.3).unwrap();
            assert!(v.max_divergence(64) < 1e-12);
            // Gradient matches centred differences of the velocity.
            let (x, y, e) = (0.31, 0.77, 1e-6);
            for phase in 0..2 {
                let g = v.gradient_in_phase(phase, x, y);
                for i in 0..2 {
                    let dx = (v.velocity_in_phase(phase, x + e, y)[i]
                        - v.velocity_in_phase(phase, x - e, y)[i])
                        / (2.0 * e);
                    let dy = (v.velocity_in_phase(phase, x, y + e)[i]
                        - v.velocity_in_phase(phase, x, y - e)[i])
                        / (2.0 * e);
                    assert!((g[i][0] - dx).abs() < 1e-6 && (g[i][1] - dy).abs() < 1e-6);
                }
            }
        }
        assert!("vortex".parse::<FlowKind>().is_err());
        assert_eq!("alternating".parse::<FlowKind>().unwrap(), FlowKind::Alternating);
    }

    #[test]
    fn strain_values() {
        let zero = VelocityField::new(FlowKind::Shear, 0.0).unwrap();
        assert_eq!(strain_linfty(&zero, 0.3), 0.0);
        let a = 0.7;
        let shear = VelocityField::new(FlowKind::Shear, a).unwrap();
        assert!((strain_linfty(&shear, 0.0) - TAU * a).abs() < 1e-12);
        let alt = VelocityField::new(FlowKind::Alternating, 1.0).unwrap();
        assert_eq!(alt.phase_at(0.5), 1);
        assert_eq!(alt.phase_at(1.0), 0);
        let at_switch = strain_linfty(&alt, 0.5);
        assert!((at_switch - strain_linfty_in_phase(&alt, 1)).abs() < 1e-12);
        assert!((at_switch - 2.0 * TAU).abs() < 1e-9);
        assert!((integrated_strain(&alt, 2.0) - 4.0 * TAU).abs() < 1e-9);
    }

    #[test]
    fn steps_respect_switches() {
        let alt = VelocityField::new(FlowKind::Alternating, 1.0).unwrap();
        let steps = time_steps(&alt, 1.3, 0.2);
        assert!((steps.last().unwrap().1 - 1.3).abs() < 1e-12);
        for (a, b) in &steps {
            assert!(b - a <= 0.2 + 1e-12);
            assert_eq!(alt.phase_at(a + 1e-9), alt.phase_at(b - 1e-9));
        }
    }

    #[test]
    fn zero_flow_is_identity() {
        let rho = make_stripe(64, 0.05).unwrap();
        let v = VelocityField::new(FlowKind::Cellular, 0.0).unwrap();
        let out = advect(&rho, &v, 1.0, 0.1).unwrap();
        assert!(rel_l2(&out, &rho) < 1e-14);
    }

    #[test]
    fn cfl_and_domain_errors() {
        let rho = make_single_mode(64, 1).unwrap();
        let v = VelocityField::new(FlowKind::Shear, 1.0).unwrap();
        let limit = cfl_limit(&rho, &v);
        assert!(matches!(
            advect(&rho, &v, 1.0, 2.0 * limit),
            Err(Error::CflViolation { .. })
        ));
        let ax = Axis::new(0.0, 2.0, 64).unwrap();
        let wrong = GridFunction::from_fn_2d(ax, ax, true, |x, _| x).unwrap();
        assert!(advect(&wrong, &v, 1.0, 0.01).is_err());
    }

    #[test]
    fn shear_matches_characteristics() {
        let n = 256;
        let rho0 = make_single_mode(n, 1).unwrap();
        let v = VelocityField::new(FlowKind::Shear, 1.0).unwrap();
        let out = advect(&rho0, &v, 1.0, 1.0 / 64.0).unwrap();
        let ax = *rho0.axis(0);
        let exact =
            GridFunction::from_fn_2d(ax, ax, true, |x, y| (TAU * (x - (TAU * y).sin())).sin()).unwrap();
        let err = rel_l2(&out, &exact);
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn conservation_properties() {
        let n = 256;
        let data = [make_stripe(n, 0.03).unwrap(), make_single_mode(n, 1).unwrap()];
        for kind in [FlowKind::Shear, FlowKind::Cellular, FlowKind::Alternating] {
            let v = VelocityField::new(kind, 1.0).unwrap();
            for rho0 in &data {
                let out = advect(rho0, &v, 1.0, 1.0 / 128.0).unwrap();
                assert!((out.mean() - rho0.mean()).abs() < 1e-8);
                // Interpolation is not exactly L²-contractive; the excess
                // stays well under a percent.
                assert!(out.l2_norm() <= rho0.l2_norm() * 1.005);
                assert!(out.linf_norm() <= 1.02 * rho0.linf_norm());
                if spectral_tail_fraction(&out) <= TAIL_LIMIT {
                    assert!(out.l2_norm() >= 0.98 * rho0.l2_norm(), "{kind:?}");
                }
            }
        }
    }

    #[test]
    fn gronwall_trivial_and_shear() {
        let rho0 = make_single_mode(128, 1).unwrap();
        let still = VelocityField::new(FlowKind::Shear, 0.0).unwrap();
        let rep = gronwall_check(&rho0, &still, 1.0, 0.1).unwrap();
        let last = rep.rows.last().unwrap();
        assert!((last[1].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(last[2].as_f64().unwrap(), 1.0);

        let shear = VelocityField::new(FlowKind::Shear, 1.0).unwrap();
        let rep = gronwall_check(&rho0, &shear, 1.0, 1.0 / 64.0).unwrap();
        assert!(rep.passed(), "{:?}", rep.checks);
        // ‖∇ρ(t)‖² = (2π)² (1 + 2π² t²) for ρ₀ = sin 2πx.
        let last = rep.rows.last().unwrap();
        let want = (1.0 + 2.0 * PI * PI).sqrt();
        assert!((last[1].as_f64().unwrap() - want).abs() < 1e-3 * want);
    }

    #[test]
    fn gronwall_matrix() {
        let n = 256;
        let data = [make_stripe(n, 0.03).unwrap(), make_single_mode(n, 1).unwrap()];
        for kind in [FlowKind::Shear, FlowKind::Cellular, FlowKind::Alternating] {
            let v = VelocityField::new(kind, 0.5).unwrap();
            for rho0 in &data {
                let rep = gronwall_check(rho0, &v, 1.5, 1.0 / 128.0).unwrap();
                assert!(rep.passed(), "{kind:?}: {:?}", rep.checks);
                assert!(rep.is_consistent());
            }
        }
    }

    #[test]
    fn alternating_cost_curve() {
        let v = VelocityField::new(FlowKind::Alternating, 1.0).unwrap();
        let run = CostRun {
            n: 128,
            p: 2.0,
            total: 2.0,
            dt: 1.0 / 64.0,
            constant: 0.5,
            kappa: 0.1,
        };
        let rep = mixing_cost_curve(&v, &run).unwrap();
        assert!(rep.passed(), "{:?}", rep.checks);
        let eps: Vec<f64> = rep.column("eps_H-1").unwrap().iter().map(|c| c.as_f64().unwrap()).collect();
        assert!(eps.last().unwrap() < &(0.6 * eps[0]));
        assert!(mixing_cost_curve(&v, &CostRun { p: 1.0, ..run }).is_err());
    }

    #[test]
    fn stripe_profile() {
        let sharp = make_stripe(64, 0.0).unwrap();
        assert!((sharp.mean() - 0.5).abs() < 1e-14);
        let v = sharp.values();
        assert_eq!(v[10], 1.0);
        assert_eq!(v[40], 0.0);
        // Cell at y = 0 straddles the jump.
        assert!((v[0] - 0.5).abs() < 1e-12);
        let smooth = make_stripe(64, 0.05).unwrap();
        assert!(spectral_tail_fraction(&smooth) < 1e-6);
    }

    #[test]
    fn cost_curve_zero_flow() {
        let v = VelocityField::new(FlowKind::Alternating, 0.0).unwrap();
        let run = CostRun {
            n: 64,
            p: 2.0,
            total: 0.5,
            dt: 0.05,
            constant: 0.1,
            kappa: 0.1,
        };
        let rep = mixing_cost_curve(&v, &run).unwrap();
        let eps: Vec<f64> = rep.column("eps_H-1").unwrap().iter().map(|c| c.as_f64().unwrap()).collect();
        assert!(eps.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-12));
        assert!(rep.scalar("min_ratio").is_none());
    }
}
