//! Property tests over the public API of the field, scale and cost layers.

use std::f64::consts::TAU;

use mixscale_core::cost::{advect, make_single_mode};
use mixscale_core::{
    ball_average_field, ball_symbol, fourier_transform, h_minus_one, sobolev_norm, Axis, FlowKind,
    GeometricProfile, GridFunction, RadiusGrid, VelocityField,
};
use proptest::prelude::*;

fn field_1d() -> impl Strategy<Value = GridFunction> {
    (5u32..9, -2.0f64..2.0, 0.5f64..4.0).prop_flat_map(|(e, start, len)| {
        prop::collection::vec(-1.0f64..1.0, 1usize << e).prop_map(move |v| {
            let ax = Axis::new(start, start + len, v.len()).unwrap();
            GridFunction::new(vec![ax], v, true).unwrap()
        })
    })
}

fn field_2d() -> impl Strategy<Value = GridFunction> {
    prop::collection::vec(-1.0f64..1.0, 32 * 32).prop_map(|v| {
        let ax = Axis::new(0.0, 1.0, 32).unwrap();
        GridFunction::new(vec![ax, ax], v, true).unwrap()
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_is_unitary_and_invertible(f in field_1d()) {
        let spec = fourier_transform(&f);
        prop_assert!(close(spec.l2_norm(), f.l2_norm(), 1e-12));
        prop_assert!(close(spec.zero_mode().re, f.integral(), 1e-12));
        let back = spec.inverse();
        prop_assert!(back.sub(&f).unwrap().linf_norm() < 1e-12);
    }

    #[test]
    fn sobolev_norms_are_ordered(f in field_1d()) {
        let l2 = f.l2_norm();
        let hm1 = sobolev_norm(&f, -1.0, false).unwrap();
        let hm_half = sobolev_norm(&f, -0.5, false).unwrap();
        prop_assert!(hm1 <= hm_half * (1.0 + 1e-12));
        prop_assert!(hm_half <= l2 * (1.0 + 1e-12));
    }

    #[test]
    fn h_minus_one_poincare_and_shift(f in field_1d(), shift in -40isize..40) {
        let g = f.mean_free();
        let h = h_minus_one(&g).unwrap();
        // Smallest nonzero frequency on a box of length L is 2π/L.
        let len = g.axis(0).length();
        prop_assert!(h <= g.l2_norm() * len / TAU * (1.0 + 1e-12));
        let rolled = h_minus_one(&g.roll(&[shift])).unwrap();
        prop_assert!(close(h, rolled, 1e-10));
        prop_assert!(close(h_minus_one(&g.scaled(-3.0)).unwrap(), 3.0 * h, 1e-12));
    }

    #[test]
    fn ball_symbol_is_bounded(z in 0.0f64..200.0, dim in 1usize..3) {
        let v = ball_symbol(z, dim).unwrap();
        prop_assert!(v.abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn ball_average_keeps_mean_and_shrinks_l2(f in field_2d(), r in 0.07f64..0.5) {
        let g = ball_average_field(&f, r).unwrap();
        prop_assert!(close(g.mean(), f.mean(), 1e-12));
        prop_assert!(g.l2_norm() <= f.l2_norm() * (1.0 + 1e-12));
    }

    #[test]
    fn geometric_functional_is_monotone(f in field_1d()) {
        let radii = RadiusGrid::for_field(&f, 8).unwrap();
        let p = GeometricProfile::compute(&f, &radii).unwrap();
        for w in p.functional.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        for (g, s) in p.functional.iter().zip(&p.sup_average) {
            prop_assert!(g >= s);
        }
        prop_assert!(p.functional[0] <= p.linf * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn flows_are_incompressible(amp in 0.1f64..2.0, t in 0.0f64..5.0, x in 0.0f64..1.0, y in 0.0f64..1.0) {
        for kind in [FlowKind::Shear, FlowKind::Cellular, FlowKind::Alternating] {
            let v = VelocityField::new(kind, amp).unwrap();
            let g = v.gradient(t, x, y);
            prop_assert!((g[0][0] + g[1][1]).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn advection_conserves_mass(amp in 0.2f64..1.0, m in 1u32..3, kind in 0usize..3) {
        let kind = [FlowKind::Shear, FlowKind::Cellular, FlowKind::Alternating][kind];
        let v = VelocityField::new(kind, amp).unwrap();
        let rho0 = make_single_mode(64, m).unwrap().map(|x| x + 0.5).unwrap();
        let rho = advect(&rho0, &v, 0.25, 1.0 / 64.0).unwrap();
        prop_assert!(close(rho.integral(), rho0.integral(), 1e-10));
        prop_assert!(rho.l2_norm() <= rho0.l2_norm() * 1.005);
    }
}
