use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use mixscale_core::averaging::BallAverager;
use mixscale_core::cost::{advect, make_stripe, FlowKind, VelocityField};
use mixscale_core::dyadic::{walsh_coefficients, DyadicSignal};
use mixscale_core::random::{power_law_field, seeded};
use mixscale_core::scales::{make_two_scale, GeometricProfile, RadiusGrid};
use mixscale_core::transport::{decay_curve, random_channel_field, ChannelGrid};
use mixscale_core::{h_minus_one, Axis};

fn walsh(c: &mut Criterion) {
    let mut g = c.benchmark_group("walsh");
    for j in [10u32, 14, 18] {
        let f = DyadicSignal::random(j, &mut seeded(0)).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(j), &f, |b, f| {
            b.iter(|| walsh_coefficients(black_box(f)))
        });
    }
    g.finish();
}

fn spectra(c: &mut Criterion) {
    let ax = Axis::new(0.0, 1.0, 512).unwrap();
    let f = power_law_field(vec![ax, ax], -2.0, 6.0, 600.0, &mut seeded(1)).unwrap();
    c.bench_function("h_minus_one 512^2", |b| b.iter(|| h_minus_one(black_box(&f)).unwrap()));
    let avg = BallAverager::new(&f);
    c.bench_function("sup ball average 512^2", |b| {
        b.iter(|| avg.sup_average(black_box(0.05)).unwrap())
    });
}

fn profile(c: &mut Criterion) {
    let f = make_two_scale(12, 6).unwrap();
    let radii = RadiusGrid::for_field(&f, 8).unwrap();
    let mut g = c.benchmark_group("geometric profile");
    g.sample_size(10);
    g.bench_function("two-scale j0=12", |b| {
        b.iter(|| GeometricProfile::compute(black_box(&f), &radii).unwrap())
    });
    g.finish();
}

fn transport(c: &mut Criterion) {
    let grid = ChannelGrid::new(8, 2, 4096).unwrap();
    let u0 = random_channel_field(grid, 150.0, &mut seeded(2)).unwrap();
    let times: Vec<f64> = (0..=20).map(|i| 100f64.powf(i as f64 / 20.0)).collect();
    c.bench_function("decay curve 21 times", |b| {
        b.iter(|| decay_curve(black_box(&u0), 0.5, &times, 4.0).unwrap())
    });
}

fn advection(c: &mut Criterion) {
    let rho0 = make_stripe(128, 0.03).unwrap();
    let v = VelocityField::new(FlowKind::Alternating, 1.0).unwrap();
    let mut g = c.benchmark_group("advect");
    g.sample_size(10);
    g.bench_function("alternating 128^2 T=0.5", |b| {
        b.iter(|| advect(black_box(&rho0), &v, 0.5, 1.0 / 64.0).unwrap())
    });
    g.finish();
}

criterion_group!(benches, walsh, spectra, profile, transport, advection);
criterion_main!(benches);
