//! Seeded random test data.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::{Axis, GridFunction};
use crate::spectrum::{angular_frequencies, Spectrum};

/// Identifier recorded in run manifests.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha)";

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent uniform samples in `[-1, 1)`.
pub fn uniform_field(axes: Vec<Axis>, periodic: bool, rng: &mut impl Rng) -> Result<GridFunction> {
    let n: usize = axes.iter().map(|a| a.n).product();
    let values = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    GridFunction::new(axes, values, periodic)
}

/// Gaussian random field with `E|ρ̂(ξ)|² ∝ |ξ|^{exponent}` for
/// `k_min ≤ |ξ| ≤ k_max` and no other modes, scaled to unit `L²` norm.
pub fn power_law_field(
    axes: Vec<Axis>,
    exponent: f64,
    k_min: f64,
    k_max: f64,
    rng: &mut impl Rng,
) -> Result<GridFunction> {
    if !(k_min > 0.0 && k_max >= k_min) {
        return Err(Error::param(
            "k_min",
            format!("need 0 < k_min <= k_max, got {k_min}, {k_max}"),
        ));
    }
    let freqs: Vec<Vec<f64>> = axes.iter().map(angular_frequencies).collect();
    let n: usize = axes.iter().map(|a| a.n).product();
    let mut coeffs = Vec::with_capacity(n);
    for idx in 0..n {
        let xi = match freqs.as_slice() {
            [f] => f[idx].abs(),
            [f1, f2] => f1[idx / f2.len()].hypot(f2[idx % f2.len()]),
            _ => return Err(Error::UnsupportedDimension(axes.len())),
        };
        let g1: f64 = rng.sample(StandardNormal);
        let g2: f64 = rng.sample(StandardNormal);
        let amp = if xi >= k_min && xi <= k_max {
            xi.powf(exponent / 2.0)
        } else {
            0.0
        };
        coeffs.push(Complex64::new(g1, g2) * amp);
    }
    let f = Spectrum::from_coefficients(axes, true, coeffs)?.inverse();
    let norm = f.l2_norm();
    if norm == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(f.scaled(1.0 / norm))
}
