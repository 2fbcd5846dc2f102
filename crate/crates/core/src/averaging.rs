//! Ball averages and smooth mollification, applied as Fourier multipliers.

use crate::bessel::bessel_j_scaled;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::spectrum::{fourier_transform, Spectrum};

/// Kernel used for local averages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mollifier {
    /// Normalized indicator of the unit ball.
    #[default]
    Ball,
    /// Normalized `(1 - |x|²)²` on the unit ball.
    Bump,
}

impl Mollifier {
    /// Fourier transform of the normalized kernel at `|ξ| = z`, equal to 1 at 0.
    pub fn symbol(self, z: f64, dim: usize) -> f64 {
        let z = z.abs();
        match (self, dim) {
            (Mollifier::Ball, 1) => sinc(z),
            (Mollifier::Ball, _) => 2.0 * bessel_j_scaled(1, z),
            (Mollifier::Bump, 1) => 15.0 * spherical_j2_scaled(z),
            (Mollifier::Bump, _) => 48.0 * bessel_j_scaled(3, z),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mollifier::Ball => "ball",
            Mollifier::Bump => "bump",
        }
    }
}

fn sinc(z: f64) -> f64 {
    if z < 1e-4 {
        1.0 - z * z / 6.0
    } else {
        z.sin() / z
    }
}

// j_2(z) / z²
fn spherical_j2_scaled(z: f64) -> f64 {
    if z < 1.0 {
        // Σ_m (-z²/2)^m / (m! (2m+5)!!)
        let q = -0.5 * z * z;
        let mut term = 1.0 / 15.0;
        let mut sum = term;
        for m in 1..30 {
            let m = m as f64;
            term *= q / (m * (2.0 * m + 5.0));
            sum += term;
        }
        sum
    } else {
        let (s, c) = z.sin_cos();
        ((3.0 / (z * z) - 1.0) * s / z - 3.0 * c / (z * z)) / (z * z)
    }
}

/// `ψ(z)`: `sin z / z` in one dimension, `2 J₁(z) / z` in two.
pub fn ball_symbol(z: f64, dim: usize) -> Result<f64> {
    if !(1..=2).contains(&dim) {
        return Err(Error::UnsupportedDimension(dim));
    }
    Ok(Mollifier::Ball.symbol(z, dim))
}

/// Smallest radius accepted by the averaging operators on this grid.
pub fn min_radius(f: &GridFunction) -> f64 {
    2.0 * f.max_spacing()
}

/// Average of `f` over `B_r(x)` at every grid point.
pub fn ball_average_field(f: &GridFunction, r: f64) -> Result<GridFunction> {
    mollify(f, r, Mollifier::Ball)
}

/// Convolution of `f` with the kernel rescaled to radius `r`.
pub fn mollify(f: &GridFunction, r: f64, kernel: Mollifier) -> Result<GridFunction> {
    let min = min_radius(f);
    if !(r >= min) || !r.is_finite() {
        return Err(Error::RadiusBelowResolution {
            radius: r,
            min_radius: min,
        });
    }
    let dim = f.dim();
    let spec = fourier_transform(f);
    let out = spec
        .apply(|[a, b]| kernel.symbol(r * a.hypot(b), dim))
        .inverse();
    Ok(out)
}

/// Ball averages of one field at many radii, sharing a single forward
/// transform.
#[derive(Clone, Debug)]
pub struct BallAverager {
    spectrum: Spectrum,
    magnitudes: Vec<f64>,
    min_radius: f64,
    kernel: Mollifier,
}

impl BallAverager {
    pub fn new(f: &GridFunction) -> Self {
        Self::with_kernel(f, Mollifier::Ball)
    }

    pub fn with_kernel(f: &GridFunction, kernel: Mollifier) -> Self {
        let spectrum = fourier_transform(f);
        let magnitudes = spectrum.frequency_magnitudes();
        BallAverager {
            spectrum,
            magnitudes,
            min_radius: min_radius(f),
            kernel,
        }
    }

    pub fn min_radius(&self) -> f64 {
        self.min_radius
    }

    pub fn average(&self, r: f64) -> Result<GridFunction> {
        if !(r >= self.min_radius) || !r.is_finite() {
            return Err(Error::RadiusBelowResolution {
                radius: r,
                min_radius: self.min_radius,
            });
        }
        let dim = self.spectrum.dim();
        let out = self
            .spectrum
            .apply_indexed(|i| self.kernel.symbol(r * self.magnitudes[i], dim));
        Ok(out.inverse())
    }

    /// `sup_x |average over B_r(x)|` on the grid.
    pub fn sup_average(&self, r: f64) -> Result<f64> {
        Ok(self.average(r)?.linf_norm())
    }
}

/// `f − ball_average_field(f, r0)`: the part of `f` at scales below `r0`.
pub fn large_scale_removal(f: &GridFunction, r0: f64) -> Result<GridFunction> {
    let avg = ball_average_field(f, r0)?;
    f.sub(&avg)
}
