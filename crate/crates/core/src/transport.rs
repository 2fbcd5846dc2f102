//! Free transport `∂_t u + y ∂_x u = 0` on `T × [0, 2πM)` and the norms
//! used to measure its phase mixing.
//!
//! A [`ChannelField`] stores the x-Fourier coefficients `û(k, y)` on a
//! periodic y-grid. Its y-transform is `ũ(k, η) = ∫ û(k, y) e^{-iηy} dy` on
//! the lattice `η = m / M`, and
//! `‖u‖²_{H^σ H^s} = Σ_k ⟨k⟩^{2σ} (1/L_y) Σ_η ⟨η⟩^{2s} |ũ(k, η)|²`,
//! so that `σ = s = 0` is `Σ_k ∫ |û(k, y)|² dy`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::averaging::ball_symbol;
use crate::error::{Error, Result};
use crate::fft::{fft_1d, wavenumber, Direction};
use crate::report::{Cell, Check, MixingReport};

fn bracket(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// Layout of a [`ChannelField`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChannelGrid {
    pub k_max: usize,
    /// `M`: the y-period is `2πM` and frequencies are multiples of `1/M`.
    pub periods: u32,
    pub ny: usize,
}

impl ChannelGrid {
    pub fn new(k_max: usize, periods: u32, ny: usize) -> Result<Self> {
        if k_max == 0 {
            return Err(Error::param("k_max", "must be at least 1"));
        }
        if periods == 0 {
            return Err(Error::param("periods", "must be at least 1"));
        }
        if ny < 4 || !ny.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(ny));
        }
        Ok(ChannelGrid { k_max, periods, ny })
    }

    pub fn rows(&self) -> usize {
        2 * self.k_max + 1
    }

    pub fn length_y(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.periods as f64
    }

    pub fn spacing_y(&self) -> f64 {
        self.length_y() / self.ny as f64
    }

    /// `η` of FFT bin `i`.
    pub fn eta(&self, i: usize) -> f64 {
        wavenumber(i, self.ny) as f64 / self.periods as f64
    }

    /// Largest representable `|η|`.
    pub fn nyquist(&self) -> f64 {
        (self.ny / 2) as f64 / self.periods as f64
    }

    /// Whether `e^{-ikty}` is periodic on the y-grid for every `k`.
    pub fn is_lattice_time(&self, t: f64) -> bool {
        let m = t * self.periods as f64;
        (m - m.round()).abs() < 1e-9
    }

    /// `t` rounded to the nearest lattice time.
    pub fn snap_time(&self, t: f64) -> f64 {
        (t * self.periods as f64).round() / self.periods as f64
    }

    fn row(&self, k: i64) -> usize {
        (k + self.k_max as i64) as usize
    }

    fn k(&self, row: usize) -> i64 {
        row as i64 - self.k_max as i64
    }
}

/// `û(k, y)` for `|k| ≤ k_max` on a periodic y-grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelField {
    grid: ChannelGrid,
    coeffs: Vec<Complex64>,
}

impl ChannelField {
    pub fn zeros(grid: ChannelGrid) -> Self {
        ChannelField {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.rows() * grid.ny],
        }
    }

    /// Row-major `(2 k_max + 1) × ny` coefficients, row `k + k_max`.
    pub fn from_coefficients(grid: ChannelGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.rows() * grid.ny {
            return Err(Error::LengthMismatch {
                expected: grid.rows() * grid.ny,
                got: coeffs.len(),
            });
        }
        if let Some(i) = coeffs.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(ChannelField { grid, coeffs })
    }

    /// Builds the field from `ũ(k, η)` evaluated on the frequency lattice.
    pub fn from_spectrum(grid: ChannelGrid, f: impl Fn(i64, f64) -> Complex64) -> Result<Self> {
        let mut spec = Vec::with_capacity(grid.rows() * grid.ny);
        for row in 0..grid.rows() {
            let k = grid.k(row);
            spec.extend((0..grid.ny).map(|i| f(k, grid.eta(i))));
        }
        Self::from_spectrum_rows(grid, spec)
    }

    fn from_spectrum_rows(grid: ChannelGrid, mut spec: Vec<Complex64>) -> Result<Self> {
        let scale = 1.0 / grid.length_y();
        for row in spec.chunks_mut(grid.ny) {
            fft_1d(row, Direction::Inverse);
            for c in row.iter_mut() {
                *c *= scale;
            }
        }
        Self::from_coefficients(grid, spec)
    }

    pub fn grid(&self) -> &ChannelGrid {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn slice(&self, k: i64) -> &[Complex64] {
        let r = self.grid.row(k);
        &self.coeffs[r * self.grid.ny..(r + 1) * self.grid.ny]
    }

    /// `ũ(k, η)` for every row, FFT-ordered in `η`.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let h = self.grid.spacing_y();
        let mut spec = self.coeffs.clone();
        for row in spec.chunks_mut(self.grid.ny) {
            fft_1d(row, Direction::Forward);
            for c in row.iter_mut() {
                *c *= h;
            }
        }
        spec
    }

    pub fn l2_norm(&self) -> f64 {
        (self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.spacing_y()).sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        ChannelField {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// `û(-k, y) = conj û(k, y)` up to `tol · ‖u‖`.
    pub fn is_real(&self, tol: f64) -> bool {
        let bound = tol * self.l2_norm().max(f64::MIN_POSITIVE);
        let k_max = self.grid.k_max as i64;
        (-k_max..=k_max).all(|k| {
            self.slice(k)
                .iter()
                .zip(self.slice(-k))
                .all(|(a, b)| (a - b.conj()).norm() <= bound)
        })
    }

    /// The `k = 0` slice vanishes up to `tol · ‖u‖`.
    pub fn is_mean_free(&self, tol: f64) -> bool {
        let bound = tol * self.l2_norm();
        let zero: f64 = self.slice(0).iter().map(|c| c.norm_sqr()).sum::<f64>()
            * self.grid.spacing_y();
        zero.sqrt() <= bound
    }

    /// Largest `|η|` carrying more than `tol` times the largest `|ũ|`.
    pub fn frequency_band(&self, tol: f64) -> f64 {
        let spec = self.spectrum();
        let peak = spec.iter().map(|c| c.norm()).fold(0.0, f64::max);
        spec.iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > tol * peak)
            .map(|(i, _)| self.grid.eta(i % self.grid.ny).abs())
            .fold(0.0, f64::max)
    }

    /// Real samples `u(x_a, y_b)` on `nx` equispaced points of `[0, 2π)`,
    /// row-major in `x`.
    pub fn sample(&self, nx: usize) -> Vec<f64> {
        let k_max = self.grid.k_max as i64;
        let mut out = Vec::with_capacity(nx * self.grid.ny);
        for a in 0..nx {
            let x = 2.0 * std::f64::consts::PI * a as f64 / nx as f64;
            let phases: Vec<Complex64> = (-k_max..=k_max)
                .map(|k| Complex64::from_polar(1.0, k as f64 * x))
                .collect();
            for b in 0..self.grid.ny {
                let v: Complex64 = (0..self.grid.rows())
                    .map(|r| phases[r] * self.coeffs[r * self.grid.ny + b])
                    .sum();
                out.push(v.re);
            }
        }
        out
    }
}

/// `û(t, k, y) = û₀(k, y) e^{-ikty}`, i.e. `u(t, x, y) = u₀(x − ty, y)`.
///
/// The phase is periodic on the y-grid only at lattice times
/// ([`ChannelGrid::is_lattice_time`]); norms are meaningful only there.
pub fn evolve_free(u0: &ChannelField, t: f64) -> ChannelField {
    let g = u0.grid;
    let h = g.spacing_y();
    let mut coeffs = u0.coeffs.clone();
    for (row, chunk) in coeffs.chunks_mut(g.ny).enumerate() {
        let k = g.k(row) as f64;
        for (b, c) in chunk.iter_mut().enumerate() {
            *c *= Complex64::from_polar(1.0, -k * t * h * b as f64);
        }
    }
    ChannelField { grid: g, coeffs }
}

/// `‖u‖_{H^σ H^s}`.
pub fn mixed_norm(u: &ChannelField, sigma: f64, s: f64) -> f64 {
    let g = u.grid;
    let spec = u.spectrum();
    let weights: Vec<f64> = (0..g.ny).map(|i| bracket(g.eta(i)).powf(2.0 * s)).collect();
    let total: f64 = spec
        .chunks(g.ny)
        .enumerate()
        .map(|(row, chunk)| {
            let wk = bracket(g.k(row) as f64).powf(2.0 * sigma);
            wk * chunk
                .iter()
                .zip(&weights)
                .map(|(c, w)| w * c.norm_sqr())
                .sum::<f64>()
        })
        .sum();
    (total / g.length_y()).sqrt()
}

/// Real, x-mean-free Gaussian field with `ũ(k, η)` supported in
/// `|η| ≤ eta_max`, `1 ≤ |k| ≤ k_max`, scaled to unit `L²` norm.
pub fn random_channel_field(
    grid: ChannelGrid,
    eta_max: f64,
    rng: &mut impl Rng,
) -> Result<ChannelField> {
    if !(eta_max >= 0.0 && eta_max < grid.nyquist()) {
        return Err(Error::param(
            "eta_max",
            format!("{eta_max} is outside [0, {})", grid.nyquist()),
        ));
    }
    let ny = grid.ny;
    let mut spec = vec![Complex64::new(0.0, 0.0); grid.rows() * ny];
    for k in 1..=grid.k_max as i64 {
        for i in 0..ny {
            if grid.eta(i).abs() > eta_max || i == ny / 2 {
                continue;
            }
            let g1: f64 = rng.sample(StandardNormal);
            let g2: f64 = rng.sample(StandardNormal);
            let c = Complex64::new(g1, g2);
            spec[grid.row(k) * ny + i] = c;
            // ũ(-k, -η) = conj ũ(k, η).
            let j = (ny - i) % ny;
            spec[grid.row(-k) * ny + j] = c.conj();
        }
    }
    let f = ChannelField::from_spectrum_rows(grid, spec)?;
    let norm = f.l2_norm();
    if norm == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(f.scaled(1.0 / norm))
}

fn check_admissible(u0: &ChannelField) -> Result<()> {
    if !u0.is_mean_free(1e-12) {
        return Err(Error::param("u0", "the k = 0 slice does not vanish"));
    }
    Ok(())
}

/// `‖u(t)‖_{L² H⁻¹}` from the spectrum of `u₀`: `ũ(t, k, η) = ũ₀(k, η + kt)`.
fn l2_hm1_at(spec: &[Complex64], grid: &ChannelGrid, t: f64) -> f64 {
    let total: f64 = spec
        .chunks(grid.ny)
        .enumerate()
        .map(|(row, chunk)| {
            let k = grid.k(row) as f64;
            chunk
                .iter()
                .enumerate()
                .map(|(i, c)| c.norm_sqr() / (1.0 + (grid.eta(i) - k * t).powi(2)))
                .sum::<f64>()
        })
        .sum();
    (total / grid.length_y()).sqrt()
}

/// Every populated `η` of every slice stays inside the grid band at all
/// `times`, so the shift `η ↦ η − kt` does not wrap around.
fn check_band(u0: &ChannelField, times: &[f64]) -> Result<()> {
    let g = u0.grid;
    let spec = u0.spectrum();
    let peak = spec.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let nyq = g.nyquist();
    for (row, chunk) in spec.chunks(g.ny).enumerate() {
        let k = g.k(row) as f64;
        let (lo, hi) = chunk
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 1e-13 * peak)
            .map(|(i, _)| g.eta(i))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), e| (a.min(e), b.max(e)));
        if lo > hi {
            continue;
        }
        for &t in times {
            if lo - k * t <= -nyq || hi - k * t >= nyq {
                return Err(Error::param(
                    "times",
                    format!("slice k = {k} leaves the grid band {nyq} by t = {t}"),
                ));
            }
        }
    }
    Ok(())
}

/// Records `t ↦ ‖u(t)‖_{L²H⁻¹} t^s / ‖u₀‖_{H^{-s}H^s}` and checks it against
/// `constant`. Times are snapped to the lattice `ℤ / M`.
///
/// Columns: `t, L2Hm1, ratio, bound`.
pub fn decay_curve(
    u0: &ChannelField,
    s: f64,
    times: &[f64],
    constant: f64,
) -> Result<MixingReport> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::param("s", format!("{s} is outside (0, 1]")));
    }
    if let Some(t) = times.iter().find(|t| !(**t >= 1.0 && t.is_finite())) {
        return Err(Error::param("times", format!("{t} is below 1")));
    }
    check_admissible(u0)?;
    let grid = u0.grid;
    let snapped: Vec<f64> = times.iter().map(|&t| grid.snap_time(t)).collect();
    check_band(u0, &snapped)?;
    let spec = u0.spectrum();
    let denom = mixed_norm(u0, -s, s);
    let values: Vec<(f64, f64)> = snapped
        .par_iter()
        .map(|&t| {
            let h = l2_hm1_at(&spec, &grid, t);
            let ratio = if denom > 0.0 { h * t.powf(s) / denom } else { 0.0 };
            (h, ratio)
        })
        .collect();

    let mut rep = MixingReport::new("transport-decay", &["t", "L2Hm1", "ratio", "bound"]);
    let mut max_ratio: f64 = 0.0;
    for (&t, &(h, ratio)) in snapped.iter().zip(&values) {
        max_ratio = max_ratio.max(ratio);
        rep.push_row(vec![t.into(), h.into(), ratio.into(), constant.into()]);
        rep.push_check(Check::new(format!("ratio at t={t}"), ratio, constant));
    }
    rep.push_scalar("s", s);
    rep.push_scalar("initial_norm", denom);
    rep.push_scalar("max_ratio", max_ratio);
    rep.push_scalar("constant", constant);
    Ok(rep)
}

/// For `T = t_start · 2^i`, the minimum of the decay ratio over
/// `samples` lattice times in `[T, 2T]`.
///
/// Columns: `T, min_ratio`; one check per doubling that the minimum drops.
pub fn decay_trend(
    u0: &ChannelField,
    s: f64,
    t_start: f64,
    doublings: usize,
    samples: usize,
) -> Result<MixingReport> {
    if samples < 2 {
        return Err(Error::param("samples", "need at least 2 per window"));
    }
    let mut rep = MixingReport::new("transport-trend", &["T", "min_ratio"]);
    let mut prev: Option<f64> = None;
    for i in 0..=doublings {
        let t0 = t_start * (i as f64).exp2();
        let times: Vec<f64> = (0..samples)
            .map(|a| t0 * (1.0 + a as f64 / (samples - 1) as f64))
            .collect();
        let curve = decay_curve(u0, s, &times, f64::INFINITY)?;
        let min = curve
            .column("ratio")
            .unwrap_or_default()
            .iter()
            .filter_map(|c| c.as_f64())
            .fold(f64::INFINITY, f64::min);
        rep.push_row(vec![t0.into(), min.into()]);
        if let Some(p) = prev {
            rep.push_check(Check::new(format!("window T={t0}"), min, p));
        }
        prev = Some(min);
    }
    Ok(rep)
}

/// Radius of the reference bump.
pub const BUMP_RADIUS: f64 = 2.0;

/// `φ(η) = A (1 − η²/R²)⁴` on `|η| < R` with `(1/2π) ∫ φ² = 1`.
pub fn reference_bump(eta: f64, radius: f64) -> f64 {
    let q = 1.0 - (eta / radius).powi(2);
    if q <= 0.0 {
        return 0.0;
    }
    // ∫_{-1}^{1} (1 − x²)^8 dx = 2 · 16!! / 17!!.
    let mut i8 = 2.0;
    for m in 1..=8 {
        i8 *= (2 * m) as f64 / (2 * m + 1) as f64;
    }
    let amp = (2.0 * std::f64::consts::PI / (radius * i8)).sqrt();
    amp * q.powi(4)
}

/// Initial data with `ũ₀(k, η) = δ_{k=1} Σ_j α_j ⟨t_j⟩^{-s} φ(η − t_j)` plus
/// the conjugate `k = −1` slice, so `u₀` is real.
pub fn make_resonant_data(
    alphas: &[f64],
    times: &[f64],
    s: f64,
    bump_radius: f64,
    grid: ChannelGrid,
) -> Result<ChannelField> {
    if alphas.is_empty() || alphas.len() != times.len() {
        return Err(Error::param(
            "alphas",
            format!("{} weights for {} times", alphas.len(), times.len()),
        ));
    }
    let norm: f64 = alphas.iter().map(|a| a * a).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 || alphas.iter().any(|a| *a <= 0.0) {
        return Err(Error::param("alphas", format!("need positive weights with unit l2 norm, got {norm}")));
    }
    if !(bump_radius > 0.0 && bump_radius <= BUMP_RADIUS) {
        return Err(Error::param("bump_radius", format!("{bump_radius} is outside (0, 2]")));
    }
    if times[0] <= 4.0 {
        return Err(Error::param("times", format!("first time {} is not above 4", times[0])));
    }
    if let Some(w) = times.windows(2).find(|w| w[1] - w[0] <= 4.0) {
        return Err(Error::param(
            "times",
            format!("gap between {} and {} is not above 4", w[0], w[1]),
        ));
    }
    let t_last = *times.last().unwrap_or(&0.0);
    if t_last + bump_radius >= grid.nyquist() {
        return Err(Error::param(
            "times",
            format!("{t_last} exceeds the grid limit {}", grid.nyquist()),
        ));
    }
    if let Some(t) = times.iter().find(|t| !grid.is_lattice_time(**t)) {
        return Err(Error::param("times", format!("{t} is not a multiple of 1/M")));
    }
    ChannelField::from_spectrum(grid, |k, eta| {
        if k.abs() != 1 {
            return Complex64::new(0.0, 0.0);
        }
        let e = k as f64 * eta;
        let v: f64 = alphas
            .iter()
            .zip(times)
            .map(|(a, t)| a * bracket(*t).powf(-s) * reference_bump(e - t, bump_radius))
            .sum();
        Complex64::new(v, 0.0)
    })
}

/// `α_j ∝ 1/j`, unit `ℓ²` norm.
pub fn harmonic_weights(count: usize) -> Vec<f64> {
    let raw: Vec<f64> = (1..=count).map(|j| 1.0 / j as f64).collect();
    let norm = raw.iter().map(|a| a * a).sum::<f64>().sqrt();
    raw.iter().map(|a| a / norm).collect()
}

/// Evaluates `‖u(t_j)‖_{L²H⁻¹}` against `α_j t_j^{-s}` for resonant data.
///
/// Columns: `j, t, L2Hm1, lower, ratio, pass`; `pass` is `ratio ≥ constant`.
pub fn resonant_check(
    u0: &ChannelField,
    alphas: &[f64],
    times: &[f64],
    s: f64,
    constant: f64,
) -> Result<MixingReport> {
    check_admissible(u0)?;
    check_band(u0, times)?;
    let spec = u0.spectrum();
    let mut rep = MixingReport::new(
        "transport-resonant",
        &["j", "t", "L2Hm1", "lower", "ratio", "pass"],
    );
    let mut min_ratio = f64::INFINITY;
    for (j, (&a, &t)) in alphas.iter().zip(times).enumerate() {
        let h = l2_hm1_at(&spec, &u0.grid, t);
        let lower = a * t.powf(-s);
        let ratio = h / lower;
        min_ratio = min_ratio.min(ratio);
        rep.push_row(vec![
            Cell::Int(j as i64 + 1),
            t.into(),
            h.into(),
            lower.into(),
            ratio.into(),
            (ratio >= constant).into(),
        ]);
        rep.push_check(Check::new(format!("lower bound at t_{}", j + 1), constant, ratio));
    }
    rep.push_scalar("s", s);
    rep.push_scalar("min_ratio", min_ratio);
    rep.push_scalar("constant", constant);
    Ok(rep)
}

/// `t_j = t_base · 2^j`.
pub fn geometric_times(j_max: u32, t_base: u64) -> Vec<f64> {
    (1..=j_max).map(|j| (t_base << j) as f64).collect()
}

/// Constant `c` making `u₀ = c Re(e^{ix} Σ_j j^{-1} ⟨t_j⟩^{-s} e^{i t_j y})`
/// unit in `L² H^s` on `T × [0, 2π)`.
pub fn geometric_lower_constant(s: f64, j_max: u32, t_base: u64) -> f64 {
    let times = geometric_times(j_max, t_base);
    let mut spec_sum = 0.0;
    for (j, t) in times.iter().enumerate() {
        let w = bracket(*t).powf(-s) / (j + 1) as f64;
        spec_sum += (w * bracket(*t).powf(s)).powi(2);
    }
    // ‖c Re(e^{ix} w e^{ity})‖² = 2 · (c/2)² · 2π · Σ ⟨t⟩^{2s} w².
    (1.0 / (std::f64::consts::PI * spec_sum)).sqrt()
}

/// `u₀ = c Re(e^{ix} Σ_{j ≤ J} j^{-1} ⟨t_j⟩^{-s} e^{i t_j y})` with
/// `t_j = t_base 2^j` on `T × [0, 2π)`, normalized in `L² H^s`.
pub fn make_geometric_lower_data(s: f64, j_max: u32, t_base: u64, ny: usize) -> Result<ChannelField> {
    if !(0.0..0.5).contains(&s) {
        return Err(Error::param("s", format!("{s} is outside [0, 1/2)")));
    }
    if j_max == 0 || j_max > 20 {
        return Err(Error::param("J", format!("{j_max} is outside 1..=20")));
    }
    if t_base < 4 {
        return Err(Error::param("t_base", format!("{t_base} is below 4")));
    }
    let grid = ChannelGrid::new(1, 1, ny)?;
    let times = geometric_times(j_max, t_base);
    let t_last = *times.last().unwrap_or(&0.0);
    if t_last >= grid.nyquist() {
        return Err(Error::param(
            "ny",
            format!("{ny} points do not resolve t_J = {t_last}"),
        ));
    }
    let c = geometric_lower_constant(s, j_max, t_base);
    let length = grid.length_y();
    ChannelField::from_spectrum(grid, |k, eta| {
        if k.abs() != 1 {
            return Complex64::new(0.0, 0.0);
        }
        let e = k as f64 * eta;
        match times.iter().position(|t| (e - t).abs() < 0.5) {
            // ũ = L · (c/2) · amplitude for a pure mode on [0, L).
            Some(j) => Complex64::new(
                length * 0.5 * c * bracket(times[j]).powf(-s) / (j + 1) as f64,
                0.0,
            ),
            None => Complex64::new(0.0, 0.0),
        }
    })
}

/// Averaging window for [`channel_sup_average`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Window {
    /// Disk of radius `r`.
    Ball,
    /// Square `[-r, r]²`.
    Square,
}

impl Window {
    pub fn name(self) -> &'static str {
        match self {
            Window::Ball => "ball",
            Window::Square => "square",
        }
    }

    fn symbol(self, r: f64, k: f64, eta: f64) -> f64 {
        match self {
            Window::Ball => ball_symbol(r * k.hypot(eta), 2).unwrap_or(0.0),
            Window::Square => sinc(r * k) * sinc(r * eta),
        }
    }
}

fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 - z * z / 6.0
    } else {
        z.sin() / z
    }
}

/// Largest value of a sampled periodic signal, refined by a parabola
/// through the peak and its neighbours.
fn refined_max(v: &[f64]) -> f64 {
    let n = v.len();
    let (i, &m) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let (a, b) = (v[(i + n - 1) % n], v[(i + 1) % n]);
    let curv = 2.0 * m - a - b;
    if curv > 0.0 {
        m + (b - a).powi(2) / (8.0 * curv)
    } else {
        m
    }
}

/// `sup_{x,y} |average of u over the window of size r centred at (x, y)|`.
///
/// Fields whose only x-modes are `k = ±1` are handled exactly in `x`
/// (`sup_x |Re(e^{ix} W(y))| = |W(y)|`); otherwise `x` is sampled on
/// `16 k_max` points.
pub fn channel_sup_average(u: &ChannelField, r: f64, window: Window) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::param("r", format!("{r} is not a positive radius")));
    }
    let g = u.grid;
    let mut spec = u.spectrum();
    let scale = 1.0 / g.length_y();
    for (row, chunk) in spec.chunks_mut(g.ny).enumerate() {
        let k = g.k(row) as f64;
        for (i, c) in chunk.iter_mut().enumerate() {
            *c *= window.symbol(r, k, g.eta(i)) * scale;
        }
        fft_1d(chunk, Direction::Inverse);
    }
    let averaged = ChannelField::from_coefficients(g, spec)?;
    let only_first = (0..g.rows()).all(|row| {
        g.k(row).abs() == 1 || averaged.slice(g.k(row)).iter().all(|c| c.norm() == 0.0)
    });
    if only_first {
        let w: Vec<f64> = averaged
            .slice(1)
            .iter()
            .zip(averaged.slice(-1))
            .map(|(a, b)| (a + b.conj()).norm())
            .collect();
        Ok(refined_max(&w))
    } else {
        let nx = 16 * g.k_max;
        let samples = averaged.sample(nx);
        Ok(samples.iter().fold(0.0, |m, v| m.max(v.abs())))
    }
}

/// Evolves `u₀` to `t_j = t_base 2^j` and compares the ball and square
/// averages at radius `j / t_j` with `‖u₀‖_{L²H^s} / (j ⟨t_j⟩^s)`.
///
/// Columns: `window, r, g_r, bound, ratio, pass`, where `g_r` is the largest
/// average at radius exactly `r` (a lower bound for the functional) and
/// `pass` is `ratio ≥ constant`.
pub fn geometric_lower_check(
    u0: &ChannelField,
    s: f64,
    j: u32,
    t_base: u64,
    constant: f64,
) -> Result<MixingReport> {
    if j == 0 {
        return Err(Error::param("j", "must be at least 1"));
    }
    let t = (t_base << j) as f64;
    if t >= u0.grid.nyquist() {
        return Err(Error::param("j", format!("t_j = {t} is beyond the grid limit")));
    }
    let u = evolve_free(u0, t);
    let r = j as f64 / t;
    let bound = mixed_norm(u0, 0.0, s) / (j as f64 * bracket(t).powf(s));
    let mut rep = MixingReport::new(
        "transport-geometric",
        &["window", "r", "g_r", "bound", "ratio", "pass"],
    );
    let mut min_ratio = f64::INFINITY;
    for window in [Window::Square, Window::Ball] {
        let g = channel_sup_average(&u, r, window)?;
        let ratio = g / bound;
        min_ratio = min_ratio.min(ratio);
        rep.push_row(vec![
            Cell::Text(window.name().into()),
            r.into(),
            g.into(),
            bound.into(),
            ratio.into(),
            (ratio >= constant).into(),
        ]);
        rep.push_check(Check::new(
            format!("{} average at t_{j}", window.name()),
            constant,
            ratio,
        ));
    }
    rep.push_scalar("t", t);
    rep.push_scalar("min_ratio", min_ratio);
    rep.push_scalar("constant", constant);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::seeded;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid(k_max: usize, m: u32, ny: usize) -> ChannelGrid {
        ChannelGrid::new(k_max, m, ny).unwrap()
    }

    /// `e^{ix} e^{iηy}` plus its conjugate.
    fn single_mode(g: ChannelGrid, eta: f64) -> ChannelField {
        let h = g.spacing_y();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); g.rows() * g.ny];
        for b in 0..g.ny {
            let e = Complex64::from_polar(1.0, eta * h * b as f64);
            coeffs[g.row(1) * g.ny + b] = e;
            coeffs[g.row(-1) * g.ny + b] = e.conj();
        }
        ChannelField::from_coefficients(g, coeffs).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(ChannelGrid::new(0, 1, 64).is_err());
        assert!(ChannelGrid::new(1, 0, 64).is_err());
        assert!(ChannelGrid::new(1, 1, 100).is_err());
        let g = grid(2, 4, 64);
        assert_eq!(g.nyquist(), 8.0);
        assert!(g.is_lattice_time(2.25));
        assert!(!g.is_lattice_time(2.3));
        assert_eq!(g.snap_time(2.3), 2.25);
    }

    #[test]
    fn spectrum_round_trip() {
        let g = grid(3, 2, 256);
        let u = random_channel_field(g, 20.0, &mut seeded(1)).unwrap();
        let back = ChannelField::from_spectrum_rows(g, u.spectrum()).unwrap();
        for (a, b) in u.coefficients().iter().zip(back.coefficients()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(u.is_real(1e-12) && u.is_mean_free(1e-12));
        assert!(u.frequency_band(1e-10) <= 20.0);
    }

    #[test]
    fn single_mode_evolution() {
        let g = grid(1, 1, 128);
        let u0 = single_mode(g, 3.0);
        let t = 5.0;
        let u = evolve_free(&u0, t);
        let want = single_mode(g, 3.0 - t);
        for (a, b) in u.coefficients().iter().zip(want.coefficients()) {
            assert!((a - b).norm() < 1e-12);
        }
        let l = g.length_y();
        let norm = mixed_norm(&u, 0.0, -1.0);
        let expected = (2.0 * l).sqrt() / bracket(3.0 - t);
        assert!((norm - expected).abs() < 1e-12 * expected);
        let n2 = mixed_norm(&u0, 0.5, 0.25);
        let e2 = (2.0 * l).sqrt() * 2f64.sqrt().powf(0.5) * bracket(3.0).powf(0.25);
        assert!((n2 - e2).abs() < 1e-12 * e2);
        assert_eq!(mixed_norm(&ChannelField::zeros(g), 1.0, -1.0), 0.0);
    }

    #[test]
    fn mixed_norm_matches_direct_sum() {
        let g = grid(2, 1, 64);
        let u = random_channel_field(g, 10.0, &mut seeded(4)).unwrap();
        let (sigma, s) = (0.7, -0.4);
        let h = g.spacing_y();
        let mut total = 0.0;
        for k in -2i64..=2 {
            let row = u.slice(k);
            for m in -(g.ny as i64) / 2..(g.ny as i64) / 2 {
                let eta = m as f64;
                let c: Complex64 = row
                    .iter()
                    .enumerate()
                    .map(|(b, v)| v * Complex64::from_polar(h, -eta * h * b as f64))
                    .sum();
                total += bracket(k as f64).powf(2.0 * sigma) * bracket(eta).powf(2.0 * s) * c.norm_sqr();
            }
        }
        let direct = (total / g.length_y()).sqrt();
        let fast = mixed_norm(&u, sigma, s);
        assert!((direct - fast).abs() < 1e-10 * direct);
        assert!((mixed_norm(&u, 0.0, 0.0) - u.l2_norm()).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn unitary_and_group(seed in 0u64..1000, t1 in 0.0f64..50.0, t2 in 0.0f64..50.0) {
            let g = grid(3, 2, 512);
            let u0 = random_channel_field(g, 30.0, &mut seeded(seed)).unwrap();
            let a = evolve_free(&evolve_free(&u0, t1), t2);
            let b = evolve_free(&u0, t1 + t2);
            prop_assert!((a.l2_norm() - 1.0).abs() < 1e-12);
            for (x, y) in a.coefficients().iter().zip(b.coefficients()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn fast_norm_matches_evolved_field() {
        let g = grid(4, 2, 1024);
        let u0 = random_channel_field(g, 40.0, &mut seeded(8)).unwrap();
        let spec = u0.spectrum();
        for t in [1.0, 7.5, 20.0] {
            let direct = mixed_norm(&evolve_free(&u0, t), 0.0, -1.0);
            let fast = l2_hm1_at(&spec, &g, t);
            assert!((direct - fast).abs() < 1e-10 * direct, "t={t}");
        }
    }

    #[test]
    fn decay_single_mode_closed_form() {
        let g = grid(1, 1, 512);
        let u0 = single_mode(g, 0.0);
        let times = [1.0, 2.0, 10.0, 50.0, 100.0];
        let rep = decay_curve(&u0, 1.0, &times, 1.0).unwrap();
        for row in &rep.rows {
            let t = row[0].as_f64().unwrap();
            let ratio = row[2].as_f64().unwrap();
            let want = t / bracket(t) / 2f64.sqrt().powi(-1) / bracket(0.0);
            // ‖u₀‖_{H^{-1}H^1} carries ⟨1⟩^{-1} = 2^{-1/2}.
            assert!((ratio - want).abs() < 1e-10, "t={t}: {ratio} vs {want}");
        }
        let zero = ChannelField::zeros(g);
        let rep = decay_curve(&zero, 0.5, &times, 1.0);
        assert!(rep.is_err() || rep.unwrap().rows.iter().all(|r| r[1].as_f64() == Some(0.0)));
    }

    #[test]
    fn decay_ratio_bounded_for_random_data() {
        let g = grid(8, 2, 4096);
        let times: Vec<f64> = (0..=20).map(|i| 100f64.powf(i as f64 / 20.0)).collect();
        for s in [0.25, 0.5, 1.0] {
            for seed in 0..5 {
                let u0 = random_channel_field(g, 150.0, &mut seeded(seed)).unwrap();
                let rep = decay_curve(&u0, s, &times, 4.0).unwrap();
                assert!(rep.passed(), "s={s} seed={seed}: {:?}", rep.scalar("max_ratio"));
            }
        }
    }

    #[test]
    fn decay_rejects_bad_input() {
        let g = grid(2, 1, 256);
        let u0 = random_channel_field(g, 10.0, &mut seeded(0)).unwrap();
        assert!(decay_curve(&u0, 0.5, &[1.0, 200.0], 4.0).is_err());
        assert!(decay_curve(&u0, 0.0, &[1.0], 4.0).is_err());
        let mut coeffs = u0.coefficients().to_vec();
        coeffs[g.row(0) * g.ny + 3] = Complex64::new(1.0, 0.0);
        let bad = ChannelField::from_coefficients(g, coeffs).unwrap();
        assert!(decay_curve(&bad, 0.5, &[1.0], 4.0).is_err());
    }

    #[test]
    fn decay_trend_drops() {
        let g = grid(2, 2, 2048);
        for seed in 0..3 {
            let u0 = random_channel_field(g, 4.0, &mut seeded(seed)).unwrap();
            let rep = decay_trend(&u0, 0.5, 8.0, 3, 16).unwrap();
            assert!(rep.passed(), "seed={seed}: {:?}", rep.rows);
        }
    }

    #[test]
    fn bump_is_normalized() {
        let n = 20000;
        let h = 4.0 / n as f64;
        let integral: f64 = (0..n)
            .map(|i| reference_bump(-2.0 + (i as f64 + 0.5) * h, 2.0).powi(2))
            .sum::<f64>()
            * h;
        assert!((integral / (2.0 * PI) - 1.0).abs() < 1e-8);
        assert_eq!(reference_bump(2.5, 2.0), 0.0);
    }

    fn resonant_setup(count: usize, s: f64) -> (ChannelField, Vec<f64>, Vec<f64>) {
        let g = grid(1, 8, 16384);
        let alphas = harmonic_weights(count);
        let times: Vec<f64> = (1..=count).map(|j| 8.0 * (j as f64).exp2()).collect();
        let u0 = make_resonant_data(&alphas, &times, s, BUMP_RADIUS, g).unwrap();
        (u0, alphas, times)
    }

    #[test]
    fn resonant_norm_comparable_to_weights() {
        for s in [0.25, 0.5, 1.0] {
            let (u0, _, _) = resonant_setup(6, s);
            let n = mixed_norm(&u0, -s, s);
            let band = 4f64.powf(s);
            assert!(n <= band && n >= 1.0 / band, "s={s}: {n}");
            assert!(u0.is_real(1e-12));
        }
    }

    #[test]
    fn resonant_lower_bound() {
        let s = 0.5;
        let (u0, alphas, times) = resonant_setup(6, s);
        let rep = resonant_check(&u0, &alphas, &times, s, 0.25).unwrap();
        assert!(rep.passed(), "{:?}", rep.scalar("min_ratio"));
        let spec = u0.spectrum();
        let off = l2_hm1_at(&spec, u0.grid(), 48.0);
        let on = l2_hm1_at(&spec, u0.grid(), 32.0);
        assert!(off < 0.25 * on, "{off} vs {on}");
    }

    #[test]
    fn resonant_validation() {
        let g = grid(1, 8, 16384);
        assert!(make_resonant_data(&[1.0], &[4.0], 0.5, 2.0, g).is_err());
        assert!(make_resonant_data(&[0.6, 0.8], &[8.0, 11.0], 0.5, 2.0, g).is_err());
        assert!(make_resonant_data(&[0.5, 0.5], &[8.0, 16.0], 0.5, 2.0, g).is_err());
        let single = make_resonant_data(&[1.0], &[16.0], 0.0, 2.0, g).unwrap();
        let spec = single.spectrum();
        let row = &spec[g.row(1) * g.ny..(g.row(1) + 1) * g.ny];
        for (i, c) in row.iter().enumerate() {
            let want = reference_bump(g.eta(i) - 16.0, 2.0);
            assert!((c.re - want).abs() < 1e-10 && c.im.abs() < 1e-10);
        }
    }

    #[test]
    fn geometric_data_normalized() {
        for s in [0.0, 0.25, 0.4] {
            let u0 = make_geometric_lower_data(s, 4, 32, 4096).unwrap();
            assert!((mixed_norm(&u0, 0.0, s) - 1.0).abs() < 1e-10);
            let c = geometric_lower_constant(s, 4, 32);
            assert!(c > 0.01 && c < 100.0);
        }
        assert!(make_geometric_lower_data(0.25, 4, 32, 512).is_err());
        assert!(make_geometric_lower_data(0.5, 4, 32, 4096).is_err());
    }

    #[test]
    fn geometric_resonance_removes_oscillation() {
        let (s, t_base) = (0.25, 32);
        let u0 = make_geometric_lower_data(s, 3, t_base, 4096).unwrap();
        let u = evolve_free(&u0, 128.0);
        let spec = u.spectrum();
        let g = u.grid();
        let row = &spec[g.row(1) * g.ny..(g.row(1) + 1) * g.ny];
        let c = geometric_lower_constant(s, 3, t_base);
        let want = g.length_y() * 0.5 * c * bracket(128.0).powf(-s) / 2.0;
        assert!((row[0].re - want).abs() < 1e-9 * want && row[0].im.abs() < 1e-9 * want);
    }

    #[test]
    fn geometric_single_term_average() {
        let s = 0.25;
        let u0 = make_geometric_lower_data(s, 1, 32, 4096).unwrap();
        let t = 64.0;
        let u = evolve_free(&u0, t);
        let c = geometric_lower_constant(s, 1, 32);
        // Direct average of c cos(x)/⟨t⟩^s over a disk of radius 1/t.
        let r = 1.0 / t;
        let direct = c * bracket(t).powf(-s) * ball_symbol(r, 2).unwrap();
        let got = channel_sup_average(&u, r, Window::Ball).unwrap();
        assert!((got - direct).abs() < 1e-10 * direct);
        let sq = channel_sup_average(&u, r, Window::Square).unwrap();
        assert!((sq - c * bracket(t).powf(-s) * sinc(r)).abs() < 1e-10 * sq);
    }

    #[test]
    fn sampled_sup_agrees_with_exact_path() {
        let u0 = make_geometric_lower_data(0.25, 2, 8, 1024).unwrap();
        let u = evolve_free(&u0, 16.0);
        let exact = channel_sup_average(&u, 0.1, Window::Ball).unwrap();
        // Force the sampled path by padding to k_max = 2.
        let g2 = grid(2, 1, 1024);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); g2.rows() * g2.ny];
        for k in [-1i64, 1] {
            let dst = g2.row(k) * g2.ny;
            coeffs[dst..dst + g2.ny].copy_from_slice(u.slice(k));
        }
        coeffs[g2.row(2) * g2.ny] = Complex64::new(1e-300, 0.0);
        let padded = ChannelField::from_coefficients(g2, coeffs).unwrap();
        let sampled = channel_sup_average(&padded, 0.1, Window::Ball).unwrap();
        assert!(sampled <= exact * (1.0 + 1e-9) && sampled >= 0.97 * exact);
    }

    #[test]
    fn geometric_lower_bound_and_convergence() {
        let (s, t_base) = (0.25, 32u64);
        let coarse = make_geometric_lower_data(s, 4, t_base, 4096).unwrap();
        let fine = make_geometric_lower_data(s, 4, t_base, 8192).unwrap();
        for j in 1..=4 {
            let a = geometric_lower_check(&coarse, s, j, t_base, 0.125).unwrap();
            assert!(a.passed(), "j={j}: {:?}", a.scalar("min_ratio"));
            let b = geometric_lower_check(&fine, s, j, t_base, 0.125).unwrap();
            for (ra, rb) in a.rows.iter().zip(&b.rows) {
                let (x, y) = (ra[2].as_f64().unwrap(), rb[2].as_f64().unwrap());
                assert!((x - y).abs() < 1e-3 * x, "j={j}: {x} vs {y}");
            }
        }
    }
}
