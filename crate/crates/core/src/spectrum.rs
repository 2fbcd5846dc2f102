//! Discrete Fourier transforms of [`GridFunction`]s and the Sobolev norms
//! built on them.
//!
//! Coefficients approximate the continuous transform
//! `ρ̂(ξ) = ∫ ρ(x) e^{-iξ·x} dx` at the angular frequencies `ξ = 2πm / L` of
//! the box, so `ρ̂(0)` is the integral of the field and the discrete
//! Plancherel identity reads `Σ |ρ̂(ξ)|² / |box| = Σ |ρ|² ΔV`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{fft_nd, wavenumber, Direction};
use crate::grid::{Axis, GridFunction};

/// Normalization of [`Spectrum`] coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// `ρ̂(ξ) ≈ ∫ ρ(x) e^{-iξ·x} dx`, sampled at `ξ = 2πm/L`.
    ContinuousTransform,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    axes: Vec<Axis>,
    periodic: bool,
    freqs: Vec<Vec<f64>>,
    coeffs: Vec<Complex64>,
}

/// Angular frequencies of an axis in FFT order.
pub fn angular_frequencies(axis: &Axis) -> Vec<f64> {
    let dk = 2.0 * PI / axis.length();
    (0..axis.n)
        .map(|i| wavenumber(i, axis.n) as f64 * dk)
        .collect()
}

pub fn fourier_transform(f: &GridFunction) -> Spectrum {
    let axes = f.axes().to_vec();
    let shape = f.shape();
    let mut data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&mut data, &shape, Direction::Forward);
    let freqs: Vec<Vec<f64>> = axes.iter().map(angular_frequencies).collect();
    let dv = f.cell_volume();
    for (idx, c) in data.iter_mut().enumerate() {
        let phase = phase_offset(&axes, &freqs, &shape, idx);
        *c *= Complex64::from_polar(dv, -phase);
    }
    Spectrum {
        axes,
        periodic: f.is_periodic(),
        freqs,
        coeffs: data,
    }
}

/// `ξ·a` for the bin at flat index `idx`, where `a` is the box origin.
fn phase_offset(axes: &[Axis], freqs: &[Vec<f64>], shape: &[usize], idx: usize) -> f64 {
    match shape {
        [_] => freqs[0][idx] * axes[0].start,
        [_, n2] => freqs[0][idx / n2] * axes[0].start + freqs[1][idx % n2] * axes[1].start,
        _ => unreachable!(),
    }
}

impl Spectrum {
    /// Coefficients laid out as [`fourier_transform`] would produce them for a
    /// field on `axes`.
    pub fn from_coefficients(axes: Vec<Axis>, periodic: bool, coeffs: Vec<Complex64>) -> Result<Self> {
        let expected: usize = axes.iter().map(|a| a.n).product();
        if coeffs.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: coeffs.len(),
            });
        }
        let freqs = axes.iter().map(angular_frequencies).collect();
        Ok(Spectrum {
            axes,
            periodic,
            freqs,
            coeffs,
        })
    }

    pub fn convention(&self) -> Normalization {
        Normalization::ContinuousTransform
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.n).collect()
    }

    pub fn frequencies(&self, axis: usize) -> &[f64] {
        &self.freqs[axis]
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn volume(&self) -> f64 {
        self.axes.iter().map(Axis::length).product()
    }

    /// Frequency vector of the bin at flat index `idx`.
    pub fn frequency(&self, idx: usize) -> [f64; 2] {
        match self.freqs.as_slice() {
            [f1] => [f1[idx], 0.0],
            [f1, f2] => {
                let n2 = f2.len();
                [f1[idx / n2], f2[idx % n2]]
            }
            _ => unreachable!(),
        }
    }

    /// `|ξ|` for every bin, in storage order.
    pub fn frequency_magnitudes(&self) -> Vec<f64> {
        (0..self.coeffs.len())
            .map(|i| {
                let [a, b] = self.frequency(i);
                a.hypot(b)
            })
            .collect()
    }

    /// `ρ̂(0)`, the integral of the originating field.
    pub fn zero_mode(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn l2_norm(&self) -> f64 {
        (self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.volume()).sqrt()
    }

    /// `(Σ w(ξ)^{2s} |ρ̂(ξ)|² / |box|)^{1/2}` with `w = ⟨ξ⟩` or, when
    /// `homogeneous`, `w = |ξ|` and the zero mode dropped. No mean check is
    /// made here; see [`sobolev_norm`].
    pub fn weighted_norm(&self, s: f64, homogeneous: bool) -> f64 {
        if s == 0.0 {
            return self.l2_norm();
        }
        let mags = self.frequency_magnitudes();
        let sum: f64 = self
            .coeffs
            .iter()
            .zip(&mags)
            .filter(|(_, &m)| !(homogeneous && m == 0.0))
            .map(|(c, &m)| {
                let w = if homogeneous { m * m } else { 1.0 + m * m };
                w.powf(s) * c.norm_sqr()
            })
            .sum();
        (sum / self.volume()).sqrt()
    }

    /// Multiply every coefficient by `symbol(ξ)`.
    pub fn apply(&self, symbol: impl Fn([f64; 2]) -> f64) -> Spectrum {
        self.apply_indexed(|i| symbol(self.frequency(i)))
    }

    /// Multiply the coefficient at flat index `i` by `symbol(i)`.
    pub fn apply_indexed(&self, symbol: impl Fn(usize) -> f64) -> Spectrum {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * symbol(i))
            .collect();
        Spectrum {
            axes: self.axes.clone(),
            periodic: self.periodic,
            freqs: self.freqs.clone(),
            coeffs,
        }
    }

    /// Inverse transform, keeping the complex samples.
    pub fn inverse_complex(&self) -> Vec<Complex64> {
        let shape = self.shape();
        let dv: f64 = self.axes.iter().map(Axis::spacing).product();
        let n = self.coeffs.len() as f64;
        let mut data: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                let phase = phase_offset(&self.axes, &self.freqs, &shape, idx);
                c * Complex64::from_polar(1.0 / (dv * n), phase)
            })
            .collect();
        fft_nd(&mut data, &shape, Direction::Inverse);
        data
    }

    /// Inverse transform back onto the originating grid (real part).
    pub fn inverse(&self) -> GridFunction {
        let values = self.inverse_complex().into_iter().map(|c| c.re).collect();
        GridFunction::new(self.axes.clone(), values, self.periodic)
            .expect("inverse of a valid spectrum is a valid field")
    }
}

/// Relative size of the mean component, `|mean|·|box|^{1/2} / ‖f‖_{L²}`.
pub(crate) const MEAN_ZERO_TOL: f64 = 1e-8;

/// Sobolev norm of order `s ∈ [-1, 1]`, inhomogeneous (`⟨ξ⟩` weights) or
/// homogeneous (`|ξ|` weights, which requires mean-zero data when `s < 0`).
pub fn sobolev_norm(f: &GridFunction, s: f64, homogeneous: bool) -> Result<f64> {
    if !(-1.0..=1.0).contains(&s) {
        return Err(Error::param("s", format!("{s} is outside [-1, 1]")));
    }
    let spec = fourier_transform(f);
    if homogeneous && s < 0.0 {
        check_mean_zero(&spec)?;
    }
    Ok(spec.weighted_norm(s, homogeneous))
}

pub(crate) fn check_mean_zero(spec: &Spectrum) -> Result<()> {
    let l2 = spec.l2_norm();
    let mean_l2 = spec.zero_mode().norm() / spec.volume().sqrt();
    if mean_l2 > MEAN_ZERO_TOL * l2 {
        return Err(Error::NotMeanZero { mean_l2, l2 });
    }
    Ok(())
}

/// Homogeneous `Ḣ⁻¹` norm, the analytic mixing scale.
pub fn h_minus_one(f: &GridFunction) -> Result<f64> {
    sobolev_norm(f, -1.0, true)
}
