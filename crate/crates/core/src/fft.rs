//! Thin wrappers over `rustfft` for unnormalized 1D and row-major 2D
//! transforms.

use num_complex::Complex64;
use rustfft::FftPlanner;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

pub(crate) fn fft_1d(data: &mut [Complex64], dir: Direction) {
    let mut planner = FftPlanner::new();
    let plan = match dir {
        Direction::Forward => planner.plan_fft_forward(data.len()),
        Direction::Inverse => planner.plan_fft_inverse(data.len()),
    };
    plan.process(data);
}

/// Batched transform of `rows` contiguous rows of length `len`.
pub(crate) fn fft_rows(data: &mut [Complex64], len: usize, dir: Direction) {
    let mut planner = FftPlanner::new();
    let plan = match dir {
        Direction::Forward => planner.plan_fft_forward(len),
        Direction::Inverse => planner.plan_fft_inverse(len),
    };
    plan.process(data);
}

/// In-place 2D transform of an `n1 x n2` row-major array.
pub(crate) fn fft_2d(data: &mut [Complex64], n1: usize, n2: usize, dir: Direction) {
    debug_assert_eq!(data.len(), n1 * n2);
    fft_rows(data, n2, dir);
    let mut t = transpose(data, n1, n2);
    fft_rows(&mut t, n1, dir);
    let back = transpose(&t, n2, n1);
    data.copy_from_slice(&back);
}

pub(crate) fn fft_nd(data: &mut [Complex64], shape: &[usize], dir: Direction) {
    match *shape {
        [_] => fft_1d(data, dir),
        [n1, n2] => fft_2d(data, n1, n2, dir),
        _ => unreachable!("grids are 1D or 2D"),
    }
}

fn transpose(data: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for i in 0..rows {
        for j in 0..cols {
            out[j * rows + i] = data[i * cols + j];
        }
    }
    out
}

/// Integer wavenumber of FFT bin `i` out of `n`; the Nyquist bin maps to `-n/2`.
pub(crate) fn wavenumber(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}
