//! The experiments the runner knows about and their default parameters.

use std::fmt;

use mixscale_core::averaging::Mollifier;
use mixscale_core::cost::{self, CostRun};
use mixscale_core::dyadic;
use mixscale_core::grid::Axis;
use mixscale_core::random::{power_law_field, seeded};
use mixscale_core::scales::{self, ComparisonLimits, UpperEstimate};
use mixscale_core::transport;
use mixscale_core::{ChannelGrid, Error, FlowKind, GridFunction, MixingReport, RadiusGrid, VelocityField};

use crate::config::{Params, UsageError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    DyadicEstimates,
    DyadicOptimal,
    ScalesCompare,
    TwoScale,
    TransportDecay,
    TransportResonant,
    TransportGeometric,
    CostGronwall,
    CostCurve,
}

pub const ALL: [Experiment; 9] = [
    Experiment::DyadicEstimates,
    Experiment::DyadicOptimal,
    Experiment::ScalesCompare,
    Experiment::TwoScale,
    Experiment::TransportDecay,
    Experiment::TransportResonant,
    Experiment::TransportGeometric,
    Experiment::CostGronwall,
    Experiment::CostCurve,
];

/// Failure of a run before any report is produced.
#[derive(Debug)]
pub enum RunError {
    Usage(UsageError),
    Core(Error),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Usage(e) => write!(f, "invalid configuration {e}"),
            RunError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<UsageError> for RunError {
    fn from(e: UsageError) -> Self {
        RunError::Usage(e)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { name, reason } => RunError::Usage(UsageError::new(name, reason)),
            other => RunError::Core(other),
        }
    }
}

type Run = Result<Vec<MixingReport>, RunError>;

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::DyadicEstimates => "dyadic-estimates",
            Experiment::DyadicOptimal => "dyadic-optimal",
            Experiment::ScalesCompare => "scales-compare",
            Experiment::TwoScale => "two-scale",
            Experiment::TransportDecay => "transport-decay",
            Experiment::TransportResonant => "transport-resonant",
            Experiment::TransportGeometric => "transport-geometric",
            Experiment::CostGronwall => "cost-gronwall",
            Experiment::CostCurve => "cost-curve",
        }
    }

    /// Full names plus the short aliases `dyadic`, `transport` and `cost`.
    pub fn lookup(name: &str) -> Option<Self> {
        match name {
            "dyadic" => Some(Experiment::DyadicEstimates),
            "transport" => Some(Experiment::TransportDecay),
            "cost" => Some(Experiment::CostCurve),
            _ => ALL.iter().copied().find(|e| e.name() == name),
        }
    }

    pub fn uses_seed(self) -> bool {
        matches!(
            self,
            Experiment::DyadicEstimates | Experiment::ScalesCompare | Experiment::TransportDecay
        )
    }

    pub fn defaults(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Experiment::DyadicEstimates => &[("J", "12"), ("trials", "1000"), ("seed", "7"), ("tol", "1e-10")],
            Experiment::DyadicOptimal => &[
                ("j0_min", "8"),
                ("j0_max", "16"),
                ("alphas", "0.55,0.75"),
                ("weighted_alphas", "0.3,0.5"),
            ],
            Experiment::ScalesCompare => &[
                ("family", "two-scale"),
                ("j0", "10"),
                ("j1", "4"),
                ("n", "4"),
                ("tooth", "1"),
                ("points", "4096"),
                ("seed", "1"),
                ("per_decade", "16"),
                ("linear", "10"),
                ("bounded", "10"),
                ("lambda", "0.5"),
                ("upper_constant", "10"),
                ("kappa", "0.5"),
            ],
            Experiment::TwoScale => &[
                ("j1_min", "4"),
                ("j1_max", "10"),
                ("offset", "6"),
                ("spread", "4"),
                ("j0_min", "8"),
                ("j0_max", "13"),
                ("alphas", "0.55,0.75"),
                ("weighted_alphas", "0.3,0.5"),
            ],
            Experiment::TransportDecay => &[
                ("s", "0.5"),
                ("tmin", "1"),
                ("tmax", "100"),
                ("samples", "100"),
                ("k_max", "8"),
                ("periods", "2"),
                ("ny", "4096"),
                ("eta_max", "150"),
                ("fields", "1"),
                ("constant", "4"),
                ("seed", "1"),
            ],
            Experiment::TransportResonant => &[
                ("s", "0.5"),
                ("count", "6"),
                ("t_base", "8"),
                ("bump_radius", "2"),
                ("periods", "8"),
                ("ny", "16384"),
                ("constant", "0.25"),
            ],
            Experiment::TransportGeometric => &[
                ("s", "0.25"),
                ("j_max", "4"),
                ("t_base", "32"),
                ("ny", "8192"),
                ("constant", "0.125"),
            ],
            Experiment::CostGronwall => &[
                ("flow", "all"),
                ("data", "all"),
                ("n", "256"),
                ("amplitude", "0.5"),
                ("T", "1.5"),
                ("dt", "0.0078125"),
                ("width", "0.03"),
                ("mode", "1"),
            ],
            Experiment::CostCurve => &[
                ("flow", "alternating"),
                ("amplitude", "1"),
                ("n", "128"),
                ("p", "2"),
                ("T", "2"),
                ("dt", "0.015625"),
                ("constant", "0.5"),
                ("kappa", "0.1"),
            ],
        }
    }

    pub fn run(self, p: &Params) -> Run {
        match self {
            Experiment::DyadicEstimates => dyadic_estimates(p),
            Experiment::DyadicOptimal => dyadic_optimal(p),
            Experiment::ScalesCompare => scales_compare(p),
            Experiment::TwoScale => two_scale(p),
            Experiment::TransportDecay => transport_decay(p),
            Experiment::TransportResonant => transport_resonant(p),
            Experiment::TransportGeometric => transport_geometric(p),
            Experiment::CostGronwall => cost_gronwall(p),
            Experiment::CostCurve => cost_curve(p),
        }
    }
}

fn dyadic_estimates(p: &Params) -> Run {
    let big_j = p.in_range::<u32>("J", 0, 20)?;
    let trials = p.in_range::<usize>("trials", 1, 1_000_000)?;
    let tol = p.in_range::<f64>("tol", 0.0, 1.0)?;
    let mut rng = seeded(p.get("seed")?);
    Ok(vec![dyadic::estimate_suite(big_j, trials, tol, &mut rng)?])
}

fn cases(p: &Params) -> Result<Vec<(f64, bool)>, UsageError> {
    let mut out = Vec::new();
    for (key, weighted) in [("alphas", false), ("weighted_alphas", true)] {
        for a in p.list::<f64>(key)? {
            if !(a > 0.0 && a < 1.0) {
                return Err(UsageError::new(key, format!("{a} is outside (0, 1)")));
            }
            out.push((a, weighted));
        }
    }
    Ok(out)
}

fn j_range(p: &Params, lo_key: &str, hi_key: &str, max: u32) -> Result<Vec<u32>, UsageError> {
    let lo = p.in_range::<u32>(lo_key, 1, max)?;
    let hi = p.in_range::<u32>(hi_key, lo, max)?;
    Ok((lo..=hi).collect())
}

fn dyadic_optimal(p: &Params) -> Run {
    let j0s = j_range(p, "j0_min", "j0_max", 24)?;
    Ok(vec![dyadic::threshold_trend(&j0s, &cases(p)?)?])
}

fn scales_compare(p: &Params) -> Run {
    let f: GridFunction = match p.raw("family") {
        "two-scale" => {
            let j0 = p.in_range::<u32>("j0", 1, 21)?;
            let j1 = p.in_range::<u32>("j1", 0, j0)?;
            scales::make_two_scale(j0, j1)?
        }
        "sawtooth" => scales::make_sawtooth(p.in_range("n", 0, 16)?, p.get("tooth")?)?,
        "random" => {
            let n = p.in_range::<usize>("points", 64, 1 << 22)?;
            let axis = Axis::new(0.0, 1.0, n)?;
            let two_pi = 2.0 * std::f64::consts::PI;
            let mut rng = seeded(p.get("seed")?);
            power_law_field(vec![axis], -1.0, two_pi, two_pi * n as f64 / 4.0, &mut rng)?
        }
        other => {
            return Err(UsageError::new(
                "family",
                format!("{other:?} is not one of two-scale, sawtooth, random"),
            )
            .into())
        }
    };
    let per_decade = p.in_range::<usize>("per_decade", 1, 1000)?;
    let radii = RadiusGrid::for_field(&f, per_decade)?;
    let limits = ComparisonLimits {
        linear: p.get("linear")?,
        bounded: p.get("bounded")?,
    };
    let lambda = p.in_range::<f64>("lambda", 0.0, 1.0)?;
    let upper = UpperEstimate {
        lambda,
        kernel: Mollifier::Bump,
        mollifier_norm: scales::mollifier_sobolev_norm(Mollifier::Bump, lambda, f.dim())?,
        constant: p.get("upper_constant")?,
        kappa: p.in_range("kappa", f64::MIN_POSITIVE, 1.0 - f64::EPSILON)?,
    };
    Ok(vec![
        scales::compare_scales(&f, &radii, &limits)?,
        scales::verify_upper_estimate(&f, &upper, &radii)?,
    ])
}

fn two_scale(p: &Params) -> Run {
    let offset = p.in_range::<u32>("offset", 0, 20)?;
    let j1s = j_range(p, "j1_min", "j1_max", 21 - offset.min(20))?;
    let spread = p.in_range::<f64>("spread", 1.0, f64::MAX)?;
    let j0s = j_range(p, "j0_min", "j0_max", 21)?;
    Ok(vec![
        scales::two_scale_asymptotics(&j1s, offset, spread)?,
        scales::two_scale_trend(&j0s, &cases(p)?)?,
    ])
}

fn transport_decay(p: &Params) -> Run {
    let s = p.in_range::<f64>("s", f64::MIN_POSITIVE, 1.0)?;
    let tmin = p.in_range::<f64>("tmin", 1.0, f64::MAX)?;
    let tmax = p.in_range::<f64>("tmax", tmin, f64::MAX)?;
    let samples = p.in_range::<usize>("samples", 1, 1_000_000)?;
    let grid = ChannelGrid::new(
        p.in_range("k_max", 1, 1024)?,
        p.in_range("periods", 1, 1024)?,
        p.get("ny")?,
    )?;
    let eta_max: f64 = p.get("eta_max")?;
    let fields = p.in_range::<usize>("fields", 1, 10_000)?;
    let constant: f64 = p.get("constant")?;
    let mut times: Vec<f64> = (0..samples)
        .map(|i| {
            if samples == 1 {
                tmin
            } else {
                tmin * (tmax / tmin).powf(i as f64 / (samples - 1) as f64)
            }
        })
        .map(|t| grid.snap_time(t))
        .collect();
    times.dedup();
    let mut rng = seeded(p.get("seed")?);
    let mut out = Vec::with_capacity(fields);
    for i in 0..fields {
        let u0 = transport::random_channel_field(grid, eta_max, &mut rng)?;
        let mut rep = transport::decay_curve(&u0, s, &times, constant)?;
        if fields > 1 {
            rep.name = format!("{}-{i}", rep.name);
        }
        out.push(rep);
    }
    Ok(out)
}

fn transport_resonant(p: &Params) -> Run {
    let s = p.in_range::<f64>("s", 0.0, 1.0)?;
    let count = p.in_range::<usize>("count", 1, 30)?;
    let t_base: f64 = p.in_range("t_base", f64::MIN_POSITIVE, f64::MAX)?;
    let grid = ChannelGrid::new(1, p.in_range("periods", 1, 1024)?, p.get("ny")?)?;
    let alphas = transport::harmonic_weights(count);
    let times: Vec<f64> = (1..=count).map(|j| t_base * (j as f64).exp2()).collect();
    let u0 = transport::make_resonant_data(&alphas, &times, s, p.get("bump_radius")?, grid)?;
    Ok(vec![transport::resonant_check(&u0, &alphas, &times, s, p.get("constant")?)?])
}

fn transport_geometric(p: &Params) -> Run {
    let s = p.in_range::<f64>("s", 0.0, 1.0)?;
    let j_max = p.in_range::<u32>("j_max", 1, 20)?;
    let t_base = p.in_range::<u64>("t_base", 1, 1 << 20)?;
    let constant: f64 = p.get("constant")?;
    let u0 = transport::make_geometric_lower_data(s, j_max, t_base, p.get("ny")?)?;
    let mut merged = MixingReport {
        name: "transport-geometric".into(),
        ..Default::default()
    };
    for j in 1..=j_max {
        let rep = transport::geometric_lower_check(&u0, s, j, t_base, constant)?;
        if merged.columns.is_empty() {
            merged.columns = rep.columns.clone();
        }
        merged.rows.extend(rep.rows);
        merged.checks.extend(rep.checks);
        merged
            .scalars
            .extend(rep.scalars.into_iter().map(|(k, v)| (format!("{k} j={j}"), v)));
    }
    Ok(vec![merged])
}

fn flows(p: &Params) -> Result<Vec<FlowKind>, UsageError> {
    match p.raw("flow") {
        "all" => Ok(vec![FlowKind::Shear, FlowKind::Cellular, FlowKind::Alternating]),
        other => other
            .parse::<FlowKind>()
            .map(|k| vec![k])
            .map_err(|e| UsageError::new("flow", e.to_string())),
    }
}

fn cost_gronwall(p: &Params) -> Run {
    let n = p.in_range::<usize>("n", 8, 4096)?;
    let amplitude: f64 = p.get("amplitude")?;
    let total = p.in_range::<f64>("T", 0.0, f64::MAX)?;
    let dt = p.in_range::<f64>("dt", f64::MIN_POSITIVE, f64::MAX)?;
    let mut data = Vec::new();
    let which = p.raw("data");
    if !matches!(which, "all" | "stripe" | "mode") {
        return Err(UsageError::new("data", format!("{which:?} is not one of all, stripe, mode")).into());
    }
    if which != "mode" {
        data.push(("stripe", cost::make_stripe(n, p.in_range("width", 0.0, 0.5)?)?));
    }
    if which != "stripe" {
        data.push(("mode", cost::make_single_mode(n, p.in_range("mode", 1, n as u32 / 4)?)?));
    }
    let mut out = Vec::new();
    for kind in flows(p)? {
        let v = VelocityField::new(kind, amplitude)?;
        for (label, rho0) in &data {
            let mut rep = cost::gronwall_check(rho0, &v, total, dt)?;
            rep.name = format!("{}-{label}", rep.name);
            out.push(rep);
        }
    }
    Ok(out)
}

fn cost_curve(p: &Params) -> Run {
    let run = CostRun {
        n: p.in_range("n", 8, 4096)?,
        p: p.get("p")?,
        total: p.in_range("T", 0.0, f64::MAX)?,
        dt: p.in_range("dt", f64::MIN_POSITIVE, f64::MAX)?,
        constant: p.get("constant")?,
        kappa: p.in_range("kappa", 0.0, 0.5)?,
    };
    let amplitude: f64 = p.get("amplitude")?;
    let mut out = Vec::new();
    for kind in flows(p)? {
        let v = VelocityField::new(kind, amplitude)?;
        out.push(cost::mixing_cost_curve(&v, &run)?);
    }
    Ok(out)
}
