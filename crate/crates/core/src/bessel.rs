//! Bessel functions of the first kind for small integer orders.
//!
//! Power series below [`SERIES_LIMIT`], Hankel's asymptotic expansion above.
//! Both branches are accurate to about 1e-11 absolute at the switch point.

use std::f64::consts::PI;

/// Switch point between the series and the asymptotic expansion.
pub const SERIES_LIMIT: f64 = 12.0;

/// `J_n(z) / z^n`, smooth at the origin where it equals `1 / (2^n n!)`.
pub fn bessel_j_scaled(n: u32, z: f64) -> f64 {
    let z = z.abs();
    if z < SERIES_LIMIT {
        series_scaled(n, z)
    } else {
        asymptotic(n, z) / z.powi(n as i32)
    }
}

/// Bessel function of the first kind `J_n(z)`.
pub fn bessel_j(n: u32, z: f64) -> f64 {
    let sign = if z < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
    let z = z.abs();
    let v = if z < SERIES_LIMIT {
        series_scaled(n, z) * z.powi(n as i32)
    } else {
        asymptotic(n, z)
    };
    sign * v
}

pub fn j0(z: f64) -> f64 {
    bessel_j(0, z)
}

pub fn j1(z: f64) -> f64 {
    bessel_j(1, z)
}

// Σ_m (-1)^m (z/2)^{2m} / (2^n m! (m+n)!)
fn series_scaled(n: u32, z: f64) -> f64 {
    let q = -0.25 * z * z;
    let mut term = 1.0;
    for i in 1..=n {
        term /= 2.0 * i as f64;
    }
    let mut sum = term;
    let mut m = 1.0;
    loop {
        term *= q / (m * (m + n as f64));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) && m > 2.0 {
            break;
        }
        m += 1.0;
    }
    sum
}

// sqrt(2/(πz)) (P cos χ − Q sin χ), χ = z − (n/2 + 1/4)π, series truncated
// at its smallest term.
fn asymptotic(n: u32, z: f64) -> f64 {
    let mu = 4.0 * (n as f64) * (n as f64);
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a: f64 = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60 {
        let term = a;
        if term.abs() > last {
            break;
        }
        last = term.abs();
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if term.abs() < 1e-17 {
            break;
        }
        let odd = (2 * k + 1) as f64;
        a *= (mu - odd * odd) / ((k + 1) as f64 * 8.0 * z);
    }
    let chi = z - (0.5 * n as f64 + 0.25) * PI;
    (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}
