//! Walsh wave packets on `[0, 1)` and the dyadic mixing seminorms.
//!
//! A tile `(j, k, l)` is the rectangle `I × ω` with `I = 2^{-j}[k, k+1)` and
//! `ω = 2^j [l, l+1)`. Its packet is `2^{j/2} 1_I` for `l = 0` and otherwise
//! `(φ_left ± φ_right) / √2`, built from the two children on the halves of
//! `I` at level `⌊l/2⌋`, with `+` for even `l`.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::format_f64;
use crate::report::{fit_exponent, Cell, Check, ExponentFit, MixingReport};

/// Largest supported resolution exponent.
pub const MAX_RESOLUTION: u32 = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Tile {
    pub j: u32,
    pub k: u64,
    pub l: u64,
}

impl Tile {
    pub fn new(j: u32, k: u64, l: u64) -> Result<Self> {
        if j > MAX_RESOLUTION {
            return Err(Error::param("j", format!("{j} exceeds {MAX_RESOLUTION}")));
        }
        if k >= 1u64 << j {
            return Err(Error::param("k", format!("{k} is not below 2^{j}")));
        }
        Ok(Tile { j, k, l })
    }

    /// Number of halvings in the recursion, `⌈log2(l + 1)⌉`.
    pub fn depth(&self) -> u32 {
        64 - self.l.leading_zeros()
    }

    /// Smallest resolution on which the packet is piecewise constant.
    pub fn required_resolution(&self) -> u32 {
        self.j + self.depth()
    }

    pub fn interval(&self) -> (f64, f64) {
        let w = (-(self.j as f64)).exp2();
        (self.k as f64 * w, (self.k + 1) as f64 * w)
    }

    pub fn frequency_band(&self) -> (f64, f64) {
        let h = (self.j as f64).exp2();
        (self.l as f64 * h, (self.l + 1) as f64 * h)
    }
}

/// Area of `(I ∩ I') × (ω ∩ ω')`.
pub fn tile_overlap(p: &Tile, q: &Tile) -> f64 {
    let overlap = |(a, b): (f64, f64), (c, d): (f64, f64)| (b.min(d) - a.max(c)).max(0.0);
    overlap(p.interval(), q.interval()) * overlap(p.frequency_band(), q.frequency_band())
}

/// Piecewise-constant function on the `2^J` cells of `[0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicSignal {
    resolution: u32,
    values: Vec<f64>,
}

impl DyadicSignal {
    pub fn new(resolution: u32, values: Vec<f64>) -> Result<Self> {
        if resolution > MAX_RESOLUTION {
            return Err(Error::param(
                "J",
                format!("{resolution} exceeds {MAX_RESOLUTION}"),
            ));
        }
        let expected = 1usize << resolution;
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(DyadicSignal { resolution, values })
    }

    pub fn zeros(resolution: u32) -> Result<Self> {
        Self::new(resolution, vec![0.0; 1usize << resolution.min(MAX_RESOLUTION)])
    }

    /// Samples `f` at cell midpoints.
    pub fn from_fn(resolution: u32, f: impl Fn(f64) -> f64) -> Result<Self> {
        let n = 1usize << resolution.min(MAX_RESOLUTION);
        let h = 1.0 / n as f64;
        Self::new(resolution, (0..n).map(|m| f((m as f64 + 0.5) * h)).collect())
    }

    /// Independent uniform values in `[-1, 1)`.
    pub fn random(resolution: u32, rng: &mut impl Rng) -> Result<Self> {
        let n = 1usize << resolution.min(MAX_RESOLUTION);
        Self::new(resolution, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_width(&self) -> f64 {
        1.0 / self.values.len() as f64
    }

    pub fn inner(&self, other: &DyadicSignal) -> Result<f64> {
        if self.resolution != other.resolution {
            return Err(Error::IncompatibleGrids(format!(
                "resolutions {} and {}",
                self.resolution, other.resolution
            )));
        }
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum();
        Ok(s * self.cell_width())
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.cell_width()).sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        DyadicSignal {
            resolution: self.resolution,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn sub(&self, other: &DyadicSignal) -> Result<Self> {
        if self.resolution != other.resolution {
            return Err(Error::IncompatibleGrids(format!(
                "resolutions {} and {}",
                self.resolution, other.resolution
            )));
        }
        Ok(DyadicSignal {
            resolution: self.resolution,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// `# J=<J>` followed by one value per line.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# J={}\n", self.resolution);
        for v in &self.values {
            out.push_str(&format_f64(*v));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            reason: "empty input".into(),
        })?;
        let resolution = header
            .trim()
            .strip_prefix('#')
            .map(str::trim)
            .and_then(|h| h.strip_prefix("J="))
            .and_then(|v| v.trim().parse::<u32>().ok())
            .ok_or(Error::Parse {
                line: 1,
                reason: format!("expected `# J=<int>`, got `{header}`"),
            })?;
        let values = lines
            .map(|(i, l)| {
                l.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: i + 1,
                    reason: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(resolution, values)
    }
}

fn check_scale(f: &DyadicSignal, j: u32) -> Result<()> {
    if j > f.resolution {
        return Err(Error::ScaleAboveResolution {
            j,
            resolution: f.resolution,
        });
    }
    Ok(())
}

/// The packet `φ_p` sampled at resolution `J`.
pub fn wave_packet(p: &Tile, resolution: u32) -> Result<DyadicSignal> {
    let required = p.required_resolution();
    if resolution < required {
        return Err(Error::InsufficientResolution {
            required,
            got: resolution,
        });
    }
    let mut out = DyadicSignal::zeros(resolution)?;
    let cells = 1usize << (resolution - p.j);
    let start = p.k as usize * cells;
    fill_packet(&mut out.values[start..start + cells], p.l, 1.0);
    let amp = (p.j as f64 / 2.0).exp2();
    for v in &mut out.values[start..start + cells] {
        *v *= amp;
    }
    Ok(out)
}

// Writes ±1 pattern of packet `l` on `dst` (the cells of its interval).
fn fill_packet(dst: &mut [f64], l: u64, sign: f64) {
    if l == 0 {
        dst.fill(sign);
        return;
    }
    let half = dst.len() / 2;
    let (left, right) = dst.split_at_mut(half);
    fill_packet(left, l >> 1, sign);
    let child_sign = if l.is_multiple_of(2) { sign } else { -sign };
    fill_packet(right, l >> 1, child_sign);
}

/// Coefficients `c_l = ⟨f, φ_{(0,0,l)}⟩` for `l < 2^J`, in `O(N log N)`.
pub fn walsh_coefficients(f: &DyadicSignal) -> Vec<f64> {
    let big_j = f.resolution;
    let n = f.values.len();
    let mut cur: Vec<f64> = f
        .values
        .iter()
        .map(|v| v * (-(big_j as f64) / 2.0).exp2())
        .collect();
    let mut next = vec![0.0; n];
    // Level j holds ⟨f, φ_{(j,k,l)}⟩ at index k·2^{J-j} + l.
    for j in (0..big_j).rev() {
        let block = 1usize << (big_j - j);
        let half = block / 2;
        for base in (0..n).step_by(block) {
            for m in 0..half {
                let a = cur[base + m];
                let b = cur[base + half + m];
                next[base + 2 * m] = (a + b) * FRAC_1_SQRT_2;
                next[base + 2 * m + 1] = (a - b) * FRAC_1_SQRT_2;
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

/// Inverse of [`walsh_coefficients`].
pub fn walsh_synthesis(resolution: u32, coeffs: &[f64]) -> Result<DyadicSignal> {
    let n = 1usize << resolution.min(MAX_RESOLUTION);
    if coeffs.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: coeffs.len(),
        });
    }
    let mut cur = coeffs.to_vec();
    let mut next = vec![0.0; n];
    for j in 0..resolution {
        let block = 1usize << (resolution - j);
        let half = block / 2;
        for base in (0..n).step_by(block) {
            for m in 0..half {
                let even = cur[base + 2 * m];
                let odd = cur[base + 2 * m + 1];
                next[base + m] = (even + odd) * FRAC_1_SQRT_2;
                next[base + half + m] = (even - odd) * FRAC_1_SQRT_2;
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    let amp = (resolution as f64 / 2.0).exp2();
    DyadicSignal::new(resolution, cur.into_iter().map(|v| v * amp).collect())
}

/// `d_I = ⟨f, χ_I⟩ = 2^{j/2} ∫_I f` for the intervals of generation `j`.
pub fn haar_averages(f: &DyadicSignal, j: u32) -> Result<Vec<f64>> {
    check_scale(f, j)?;
    let cells = 1usize << (f.resolution - j);
    let scale = (j as f64 / 2.0).exp2() * f.cell_width();
    Ok(f
        .values
        .chunks(cells)
        .map(|c| block_sum(c) * scale)
        .collect())
}

// Pairwise sum over a power-of-two block. A block of equal values sums to
// exactly `len · value`, which makes `project` idempotent in floating point.
fn block_sum(v: &[f64]) -> f64 {
    if v.len() == 1 {
        return v[0];
    }
    let (a, b) = v.split_at(v.len() / 2);
    block_sum(a) + block_sum(b)
}

/// `P_j f`: the average of `f` on each interval of generation `j`.
pub fn project(f: &DyadicSignal, j: u32) -> Result<DyadicSignal> {
    check_scale(f, j)?;
    let cells = 1usize << (f.resolution - j);
    let mut values = Vec::with_capacity(f.values.len());
    for chunk in f.values.chunks(cells) {
        let mean = block_sum(chunk) / cells as f64;
        values.extend(std::iter::repeat_n(mean, cells));
    }
    DyadicSignal::new(f.resolution, values)
}

/// `𝔤_j[f]`: the largest absolute mean of `f` over an interval of generation `j`.
pub fn dyadic_geometric(f: &DyadicSignal, j: u32) -> Result<f64> {
    let d = haar_averages(f, j)?;
    let max = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok((j as f64 / 2.0).exp2() * max)
}

/// `h^s_j` seminorm: `(Σ_{l < 2^j} (1 + l²)^s c_l²)^{1/2}`.
pub fn dyadic_analytic(f: &DyadicSignal, s: f64, j: u32) -> Result<f64> {
    check_scale(f, j)?;
    if !(-1.0..=1.0).contains(&s) {
        return Err(Error::param("s", format!("{s} is outside [-1, 1]")));
    }
    let c = walsh_coefficients(f);
    Ok(weighted_coefficient_norm(&c[..1usize << j], s))
}

/// The full `h^s` norm at native resolution.
pub fn dyadic_analytic_full(f: &DyadicSignal, s: f64) -> Result<f64> {
    dyadic_analytic(f, s, f.resolution)
}

fn weighted_coefficient_norm(c: &[f64], s: f64) -> f64 {
    c.iter()
        .enumerate()
        .map(|(l, v)| {
            let l = l as f64;
            (1.0 + l * l).powf(s) * v * v
        })
        .sum::<f64>()
        .sqrt()
}

/// Lower summation index `⌈2^{αj₀}⌉ − 1` of the optimality family.
pub fn packet_sum_lower_index(j0: u32, alpha: f64) -> u64 {
    let e = alpha * j0 as f64;
    let p = if (e - e.round()).abs() < 1e-9 {
        (e.round() as u32).min(63) as f64
    } else {
        e
    };
    (p.exp2().ceil() as u64).saturating_sub(1)
}

/// `2^{-j₀(1-α/2)} Σ_{⌈2^{αj₀}⌉−1 ≤ l ≤ 2^{j₀}−1} φ_{(0,0,l)}` at resolution `J`.
pub fn make_packet_sum(j0: u32, alpha: f64, resolution: u32) -> Result<DyadicSignal> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", format!("{alpha} is outside (0, 1)")));
    }
    packet_sum(j0, packet_sum_lower_index(j0, alpha), alpha, resolution)
}

fn packet_sum(j0: u32, lower: u64, alpha: f64, resolution: u32) -> Result<DyadicSignal> {
    if resolution < j0 {
        return Err(Error::InsufficientResolution {
            required: j0,
            got: resolution,
        });
    }
    if resolution > MAX_RESOLUTION {
        return Err(Error::param(
            "J",
            format!("{resolution} exceeds {MAX_RESOLUTION}"),
        ));
    }
    let scale = (-(j0 as f64) * (1.0 - alpha / 2.0)).exp2();
    let mut c = vec![0.0; 1usize << resolution];
    for v in &mut c[lower as usize..1usize << j0] {
        *v = scale;
    }
    walsh_synthesis(resolution, &c)
}

/// One point of the threshold experiment for the optimality family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdSample {
    pub j0: u32,
    /// Evaluation scale `⌊αj₀⌋`.
    pub j: u32,
    /// `𝔤_j` of the rescaled family, times `2^j` when weighted.
    pub value: f64,
}

/// Evaluates the optimality family at scale `j = ⌊αj₀⌋`.
///
/// The family is taken with lower index `2^{j-1} − 1` (exponent
/// `(j−1)/j₀`), the tight choice for which `P_j ρ ≠ 0`; the literal lower
/// index `⌈2^{αj₀}⌉ − 1` makes `𝔤_j` vanish unless `αj₀` is an integer.
/// The expected growth rate in `j₀` is `3α/2 − 1`, or `5α/2 − 1` when
/// `weighted`.
pub fn threshold_sample(j0: u32, alpha: f64, weighted: bool) -> Result<ThresholdSample> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", format!("{alpha} is outside (0, 1)")));
    }
    let j = (alpha * j0 as f64 + 1e-9).floor() as u32;
    if j < 1 {
        return Err(Error::param(
            "j0",
            format!("{j0} too small for alpha {alpha}"),
        ));
    }
    let family_alpha = (j - 1) as f64 / j0 as f64;
    let lower = (1u64 << (j - 1)) - 1;
    let rho = packet_sum(j0, lower, family_alpha, j0)?;
    let g = dyadic_geometric(&rho, j)?;
    let value = if weighted { g * (j as f64).exp2() } else { g };
    Ok(ThresholdSample { j0, j, value })
}

/// Values of the three estimates relating `h^{-1}` and `𝔤_j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DyadicEstimate {
    pub j: u32,
    pub h_j: f64,
    pub h_full: f64,
    pub g_j: f64,
    pub tail_l2: f64,
}

impl DyadicEstimate {
    pub fn compute(f: &DyadicSignal, j: u32) -> Result<Self> {
        check_scale(f, j)?;
        let c = walsh_coefficients(f);
        let h_j = weighted_coefficient_norm(&c[..1usize << j], -1.0);
        let h_full = weighted_coefficient_norm(&c, -1.0);
        let g_j = dyadic_geometric(f, j)?;
        let tail_l2 = f.sub(&project(f, j)?)?.l2_norm();
        Ok(DyadicEstimate {
            j,
            h_j,
            h_full,
            g_j,
            tail_l2,
        })
    }

    /// `h^{-1}_j ≤ 𝔤_j`.
    pub fn lower(&self, tol: f64) -> bool {
        self.h_j <= self.g_j + tol
    }

    /// `h^{-1} ≤ 𝔤_j + 2^{-j} ‖(1 − P_j) f‖`.
    pub fn full(&self, tol: f64) -> bool {
        self.h_full <= self.g_j + (-(self.j as f64)).exp2() * self.tail_l2 + tol
    }

    /// `𝔤_j ≤ 2^{3j/2} h^{-1}_j`.
    pub fn upper(&self, tol: f64) -> bool {
        self.g_j <= (1.5 * self.j as f64).exp2() * self.h_j + tol
    }
}

/// Evaluates the three estimates on `trials` random signals at resolution
/// `J` for every `j ≤ J`.
///
/// Columns: `j, max_lower, max_full, max_upper, violations`, where the
/// `max_*` entries are the largest ratio of left to right side seen at that
/// scale. One check per scale that no inequality fails at tolerance `tol`.
pub fn estimate_suite(
    resolution: u32,
    trials: usize,
    tol: f64,
    rng: &mut impl Rng,
) -> Result<MixingReport> {
    if trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    let signals: Vec<DyadicSignal> = (0..trials)
        .map(|_| DyadicSignal::random(resolution, rng))
        .collect::<Result<_>>()?;
    let mut rep = MixingReport::new(
        "dyadic-estimates",
        &["j", "max_lower", "max_full", "max_upper", "violations"],
    );
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
    for j in 0..=resolution {
        let (mut lo, mut full, mut up, mut bad) = (0.0f64, 0.0f64, 0.0f64, 0i64);
        for f in &signals {
            let e = DyadicEstimate::compute(f, j)?;
            let w = (-(j as f64)).exp2();
            lo = lo.max(ratio(e.h_j, e.g_j));
            full = full.max(ratio(e.h_full, e.g_j + w * e.tail_l2));
            up = up.max(ratio(e.g_j, (1.5 * j as f64).exp2() * e.h_j));
            bad += [e.lower(tol), e.full(tol), e.upper(tol)]
                .iter()
                .filter(|ok| !**ok)
                .count() as i64;
        }
        rep.push_row(vec![
            Cell::Int(j as i64),
            lo.into(),
            full.into(),
            up.into(),
            Cell::Int(bad),
        ]);
        rep.push_check(Check::new(format!("violations at j={j}"), bad as f64, 0.0));
    }
    rep.push_scalar("trials", trials as f64);
    rep.push_scalar("tol", tol);
    Ok(rep)
}

/// Threshold samples for `j₀` in `j0s` at each `(α, weighted)` case.
///
/// Columns: `alpha, weighted, j0, j, value`. One fit per case of
/// `log₂ value` against `j₀`, and a check that its sign matches the
/// predicted rate `3α/2 − 1` (`5α/2 − 1` when weighted).
pub fn threshold_trend(j0s: &[u32], cases: &[(f64, bool)]) -> Result<MixingReport> {
    if j0s.len() < 3 {
        return Err(Error::param("j0", "need at least 3 values"));
    }
    let mut rep = MixingReport::new("dyadic-optimal", &["alpha", "weighted", "j0", "j", "value"]);
    for &(alpha, weighted) in cases {
        let mut pairs = Vec::with_capacity(j0s.len());
        for &j0 in j0s {
            let s = threshold_sample(j0, alpha, weighted)?;
            rep.push_row(vec![
                alpha.into(),
                weighted.into(),
                Cell::Int(j0 as i64),
                Cell::Int(s.j as i64),
                s.value.into(),
            ]);
            pairs.push(((j0 as f64).exp2(), s.value));
        }
        let (slope, residual) = fit_exponent(&pairs)?;
        let label = format!("alpha={alpha} weighted={weighted}");
        rep.push_fit(ExponentFit {
            label: label.clone(),
            exponent: slope,
            residual,
        });
        let rate = if weighted { 2.5 * alpha - 1.0 } else { 1.5 * alpha - 1.0 };
        rep.push_scalar(format!("slope {label}"), slope);
        rep.push_check(if rate < 0.0 {
            Check::new(format!("{label} decreasing"), slope, 0.0)
        } else {
            Check::new(format!("{label} increasing"), 0.0, slope)
        });
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn packet(j: u32, k: u64, l: u64, big_j: u32) -> DyadicSignal {
        wave_packet(&Tile::new(j, k, l).unwrap(), big_j).unwrap()
    }

    #[test]
    fn tile_validation() {
        assert!(Tile::new(2, 4, 0).is_err());
        assert_eq!(Tile::new(0, 0, 5).unwrap().required_resolution(), 3);
    }

    #[test]
    fn first_packets() {
        assert_eq!(packet(0, 0, 0, 3).values(), &[1.0; 8]);
        assert_eq!(packet(0, 0, 1, 1).values(), &[1.0, -1.0]);
        assert_eq!(packet(0, 0, 2, 2).values(), &[1.0, -1.0, 1.0, -1.0]);
        assert_eq!(packet(0, 0, 3, 2).values(), &[1.0, -1.0, -1.0, 1.0]);
        let s = 2f64.sqrt();
        assert_eq!(packet(1, 1, 1, 2).values(), &[0.0, 0.0, s, -s]);
    }

    #[test]
    fn packet_requires_resolution() {
        let p = Tile::new(1, 0, 4).unwrap();
        assert_eq!(
            wave_packet(&p, 3),
            Err(Error::InsufficientResolution {
                required: 4,
                got: 3
            })
        );
    }

    #[test]
    fn packets_are_normalized_and_supported_on_interval() {
        for j in 0..4 {
            for k in 0..(1u64 << j) {
                for l in 0..16 {
                    let p = Tile::new(j, k, l).unwrap();
                    let f = wave_packet(&p, 8).unwrap();
                    assert!((f.l2_norm() - 1.0).abs() < 1e-12);
                    let amp = (j as f64 / 2.0).exp2();
                    let (a, b) = p.interval();
                    for (m, v) in f.values().iter().enumerate() {
                        let x = (m as f64 + 0.5) / 256.0;
                        if x > a && x < b {
                            assert!((v.abs() - amp).abs() < 1e-12);
                        } else {
                            assert_eq!(*v, 0.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn overlap_examples() {
        let p = Tile::new(0, 0, 0).unwrap();
        let q = Tile::new(1, 0, 0).unwrap();
        assert_eq!(tile_overlap(&p, &p), 1.0);
        assert_eq!(tile_overlap(&p, &Tile::new(0, 0, 3).unwrap()), 0.0);
        assert_eq!(tile_overlap(&p, &q), 0.5);
    }

    #[test]
    fn orthogonality_lemma() {
        let mut tiles = Vec::new();
        for j in 0..=3 {
            for k in 0..(1u64 << j) {
                for l in 0..=8 {
                    tiles.push(Tile::new(j, k, l).unwrap());
                }
            }
        }
        let packets: Vec<_> = tiles.iter().map(|p| wave_packet(p, 8).unwrap()).collect();
        for (p, fp) in tiles.iter().zip(&packets) {
            for (q, fq) in tiles.iter().zip(&packets) {
                let ip = fp.inner(fq).unwrap().abs();
                assert!((ip - tile_overlap(p, q).sqrt()).abs() < 1e-12, "{p:?} {q:?}");
            }
        }
    }

    #[test]
    fn coefficients_of_packets_are_unit_vectors() {
        for l in 0..64u64 {
            let c = walsh_coefficients(&packet(0, 0, l, 6));
            for (i, v) in c.iter().enumerate() {
                let want = if i as u64 == l { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-12);
            }
        }
        let one = DyadicSignal::from_fn(5, |_| 1.0).unwrap();
        let c = walsh_coefficients(&one);
        assert!((c[0] - 1.0).abs() < 1e-15);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn fast_transform_matches_inner_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = DyadicSignal::random(8, &mut rng).unwrap();
        let c = walsh_coefficients(&f);
        for l in 0..256u64 {
            let direct = f.inner(&packet(0, 0, l, 8)).unwrap();
            assert!((direct - c[l as usize]).abs() < 1e-12);
        }
    }

    #[test]
    fn haar_examples() {
        let one = DyadicSignal::from_fn(4, |_| 1.0).unwrap();
        assert_eq!(haar_averages(&one, 2).unwrap(), vec![0.5; 4]);
        assert_eq!(haar_averages(&packet(0, 0, 1, 3), 0).unwrap(), vec![0.0]);
        assert!(haar_averages(&one, 5).is_err());
    }

    #[test]
    fn geometric_examples() {
        let one = DyadicSignal::from_fn(6, |_| 1.0).unwrap();
        for j in 0..=6 {
            assert!((dyadic_geometric(&one, j).unwrap() - 1.0).abs() < 1e-15);
        }
        let h = packet(0, 0, 1, 4);
        assert_eq!(dyadic_geometric(&h, 0).unwrap(), 0.0);
        assert!((dyadic_geometric(&h, 1).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_for_integer_alpha_j0() {
        // Unscaled family: multiply back by 2^{j0(1-α/2)}.
        let (j0, alpha) = (10u32, 0.4);
        let a = 4u32;
        let f = make_packet_sum(j0, alpha, j0).unwrap();
        let f = f.scaled((j0 as f64 * (1.0 - alpha / 2.0)).exp2());
        // The lower index ⌈2^{αj0}⌉ − 1 = 2^a − 1 adds φ_{2^a − 1} to the remark's sum.
        let extra = packet(0, 0, (1 << a) - 1, j0);
        let remark = f.sub(&extra).unwrap();
        for (m, v) in remark.values().iter().enumerate() {
            let x = m as f64 / 1024.0;
            let mut want = 0.0;
            if x < (-(j0 as f64)).exp2() {
                want += (j0 as f64).exp2();
            }
            if x < (-(a as f64)).exp2() {
                want -= (a as f64).exp2();
            }
            assert!((v - want).abs() < 1e-9, "{m}: {v} vs {want}");
        }
        for j in (a + 1)..=j0 {
            let g = dyadic_geometric(&remark, j).unwrap();
            let want = (j as f64).exp2() - (a as f64).exp2();
            assert!((g - want).abs() < 1e-9 * want);
        }
    }

    #[test]
    fn packet_sum_norm_and_support() {
        let f = make_packet_sum(10, 0.5, 12).unwrap();
        let h = dyadic_analytic(&f, -1.0, 10).unwrap();
        let ratio = h / (-10f64).exp2();
        assert!((0.25..=4.0).contains(&ratio), "{ratio}");
        let c = walsh_coefficients(&f);
        assert!(c[..31].iter().all(|v| v.abs() < 1e-12));
        assert!(make_packet_sum(10, 0.5, 9).is_err());
    }

    #[test]
    fn analytic_examples() {
        let p0 = packet(0, 0, 0, 5);
        for s in [-1.0, 0.0, 0.5] {
            assert!((dyadic_analytic(&p0, s, 5).unwrap() - 1.0).abs() < 1e-12);
        }
        for l in [1u64, 5, 17] {
            let v = dyadic_analytic(&packet(0, 0, l, 5), -1.0, 5).unwrap();
            assert!((v - 1.0 / (1.0 + (l * l) as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = DyadicSignal::random(5, &mut rng).unwrap();
        let text = f.to_csv();
        assert!(text.starts_with("# J=5\n"));
        assert_eq!(DyadicSignal::from_csv(&text).unwrap(), f);
        assert!(DyadicSignal::from_csv("J=5\n1\n").is_err());
    }

    fn signal_strategy() -> impl Strategy<Value = DyadicSignal> {
        (0u32..=9).prop_flat_map(|big_j| {
            proptest::collection::vec(-1.0f64..1.0, 1usize << big_j)
                .prop_map(move |v| DyadicSignal::new(big_j, v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn synthesis_inverts_analysis(f in signal_strategy()) {
            let back = walsh_synthesis(f.resolution(), &walsh_coefficients(&f)).unwrap();
            for (a, b) in back.values().iter().zip(f.values()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn bases_preserve_norm(f in signal_strategy()) {
            let c = walsh_coefficients(&f);
            let d = haar_averages(&f, f.resolution()).unwrap();
            let nc = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            let nd = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!((nc - f.l2_norm()).abs() < 1e-12);
            prop_assert!((nd - f.l2_norm()).abs() < 1e-12);
        }

        #[test]
        fn projection_properties(f in signal_strategy(), frac in 0.0f64..=1.0) {
            let j = (frac * f.resolution() as f64).floor() as u32;
            let p = project(&f, j).unwrap();
            prop_assert_eq!(&project(&p, j).unwrap(), &p);
            prop_assert!(p.l2_norm() <= f.l2_norm() * (1.0 + 1e-12));
            let c = walsh_coefficients(&p);
            prop_assert!(c[1usize << j..].iter().all(|v| v.abs() < 1e-12));
            prop_assert_eq!(dyadic_geometric(&p, j).unwrap(), dyadic_geometric(&f, j).unwrap());
            let a = dyadic_analytic(&p, -1.0, j).unwrap();
            let b = dyadic_analytic(&f, -1.0, j).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
        }

        #[test]
        fn dyadic_estimates_hold(f in signal_strategy()) {
            for j in 0..=f.resolution() {
                let e = DyadicEstimate::compute(&f, j).unwrap();
                prop_assert!(e.lower(1e-10) && e.full(1e-10) && e.upper(1e-10), "{:?}", e);
            }
        }

        #[test]
        fn s_zero_full_norm_is_l2(f in signal_strategy()) {
            let n = dyadic_analytic_full(&f, 0.0).unwrap();
            prop_assert!((n - f.l2_norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn threshold_trends() {
        let slope = |alpha: f64, weighted: bool| {
            let pts: Vec<(f64, f64)> = (8..=16)
                .map(|j0| {
                    let s = threshold_sample(j0, alpha, weighted).unwrap();
                    (j0 as f64, s.value.log2())
                })
                .collect();
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            sxy / sxx
        };
        assert!(slope(0.55, false) < 0.0);
        assert!(slope(0.75, false) > 0.0);
        assert!(slope(0.3, true) < 0.0);
        assert!(slope(0.5, true) > 0.0);
    }

    #[test]
    fn estimate_suite_report() {
        let rep = estimate_suite(6, 50, 1e-10, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(rep.rows.len(), 7);
        assert!(rep.passed());
        for row in &rep.rows {
            for c in &row[1..4] {
                assert!(c.as_f64().unwrap() <= 1.0 + 1e-9);
            }
        }
        assert!(estimate_suite(6, 0, 1e-10, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
    }

    #[test]
    fn threshold_trend_report() {
        let j0s: Vec<u32> = (8..=16).collect();
        let rep = threshold_trend(&j0s, &[(0.75, false), (0.3, true)]).unwrap();
        assert_eq!(rep.rows.len(), 18);
        assert_eq!(rep.fits.len(), 2);
        assert!(rep.passed());
        assert!(threshold_trend(&[8, 9], &[(0.5, false)]).is_err());
    }
}
