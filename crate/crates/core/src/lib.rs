//! Geometric and analytic mixing scales of scalar fields.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`], [`spectrum`], [`averaging`]: sampled fields, their Fourier
//!   transforms, Sobolev norms and ball averages.
//! * [`dyadic`]: the Walsh wave-packet model on `[0, 1)`.
//! * [`scales`]: continuous geometric mixing functionals, the example
//!   families, and the comparison estimates between the two notions.
//! * [`transport`]: free transport on torus × line and its decay rates.
//! * [`cost`]: semi-Lagrangian advection and mixing-cost diagnostics.
//! * [`report`]: tabular experiment records and their CSV form.

// `!(a <= b)` is used on purpose so that NaN fails the comparison.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod averaging;
pub mod bessel;
pub mod cost;
pub mod dyadic;
pub mod error;
mod fft;
pub mod grid;
pub mod random;
pub mod report;
pub mod scales;
pub mod spectrum;
pub mod transport;

pub use averaging::{ball_average_field, ball_symbol, large_scale_removal, mollify, Mollifier};
pub use error::{Error, Result};
pub use grid::{Axis, GridFunction};
pub use spectrum::{fourier_transform, h_minus_one, sobolev_norm, Normalization, Spectrum};
pub use cost::{FlowKind, VelocityField};
pub use dyadic::{DyadicSignal, Tile};
pub use random::RNG_ALGORITHM;
pub use report::{Cell, Check, ExponentFit, MixingReport};
pub use scales::{GeometricProfile, GeometricScale, RadiusGrid};
pub use transport::{ChannelField, ChannelGrid, Window};
