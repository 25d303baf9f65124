use hardyopt_core::calculus::{abs_pow, chain_rule_plap, flux, p_laplacian_at, RadialFunction, ScalarMap};
use hardyopt_core::domain::{green_radial, Coordinate, ProblemParams, RadialDomain};
use hardyopt_core::energy::{energy_qv, simplified_densities, RadialGrid, TestFunction};
use hardyopt_core::optimality::{optimality_probe, probe_function};
use hardyopt_core::rellich::rellich_constant;
use hardyopt_core::weights::{alpha_coefficient, hardy_weight_case1, interpolation_hessian, optimal_alpha, PotentialProfile};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn abs_pow_agrees_with_powf(x in -50.0f64..50.0, e in 0.1f64..6.0) {
        prop_assert!(rel(abs_pow(x, e), x.abs().powf(e)) < 1e-14 || x == 0.0);
    }

    #[test]
    fn power_profiles_have_constant_flux(p in 1.2f64..6.0, n in 2u32..6, a in 0.05f64..0.95, b in 0.05f64..0.95) {
        prop_assume!((p - n as f64).abs() > 0.05);
        let params = ProblemParams::new(p, n).unwrap();
        let g = green_radial(&params, &RadialDomain::PuncturedSpace).unwrap();
        let levels = g.sample_levels(200);
        let ta = levels[(a * 199.0) as usize];
        let tb = levels[(b * 199.0) as usize];
        prop_assert!(rel(flux(&g, ta).unwrap(), flux(&g, tb).unwrap()) < 1e-9);
    }

    #[test]
    fn scaled_profiles_stay_p_harmonic(p in 1.2f64..6.0, n in 2u32..6, c in 0.01f64..100.0, r in 0.01f64..100.0) {
        prop_assume!((p - n as f64).abs() > 0.05);
        let params = ProblemParams::new(p, n).unwrap();
        let g = green_radial(&params, &RadialDomain::PuncturedSpace).unwrap().scaled(c).unwrap();
        let lap = p_laplacian_at(&g.as_radial(), &params, r).unwrap();
        let scale = abs_pow(g.derivative(r), p - 1.0) / r;
        prop_assert!(lap.abs() <= 1e-10 * scale);
    }

    #[test]
    fn power_chain_rule_gives_alpha_weight(p in 1.3f64..5.0, n in 2u32..5, alpha in 0.05f64..0.95, r in 0.05f64..20.0) {
        prop_assume!((p - n as f64).abs() > 0.05);
        let params = ProblemParams::new(p, n).unwrap();
        let g = green_radial(&params, &RadialDomain::PuncturedSpace).unwrap();
        let field = chain_rule_plap(&ScalarMap::power(alpha), &g.as_radial(), &params, &RadialDomain::PuncturedSpace).unwrap();
        let (gv, dg) = (g.value(r), g.derivative(r));
        let expected = (p - 1.0) * alpha_coefficient(p, alpha) * abs_pow(dg / gv, p) * gv.powf(alpha * (p - 1.0));
        prop_assert!(rel(field.eval(r), expected) < 1e-9);
    }

    #[test]
    fn optimal_alpha_maximizes_coefficient(p in 1.05f64..10.0, alpha in 0.0f64..1.0) {
        prop_assert!(alpha_coefficient(p, alpha) <= alpha_coefficient(p, optimal_alpha(p)) * (1.0 + 1e-14));
        prop_assert!(rel(alpha_coefficient(p, optimal_alpha(p)) * (p - 1.0), ((p - 1.0) / p).powf(p)) < 1e-13);
    }

    #[test]
    fn hessian_is_degenerate_and_signed(p in 1.05f64..6.0, xi in 0.01f64..100.0, eta in 0.01f64..100.0) {
        let h = interpolation_hessian(p, xi, eta);
        let trace = h[0][0] + h[1][1];
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        let scale = h[0][0].abs() * h[1][1].abs();
        prop_assert!(det.abs() <= 1e-10 * scale.max(1e-300));
        if p >= 2.0 { prop_assert!(trace >= 0.0) } else { prop_assert!(trace <= 0.0) }
    }

    #[test]
    fn coordinates_round_trip(s in -12.0f64..12.0, lo in 0.1f64..5.0, width in 0.1f64..5.0) {
        for c in [Coordinate::Log, Coordinate::Logit { lo, hi: lo + width }, Coordinate::ShiftedLog { lo }] {
            let r = c.to_r(s);
            prop_assert!((c.to_s(r) - s).abs() < 1e-9 * (1.0 + s.abs()));
        }
    }

    #[test]
    fn energy_is_p_homogeneous(p in 1.2f64..5.0, c in -20.0f64..20.0, peak in 0.3f64..0.7) {
        prop_assume!(c.abs() > 1e-3);
        let params = ProblemParams::new(p, 3).unwrap();
        let grid = RadialGrid::log_spaced(&params, 0.5, 4.0, 64).unwrap();
        let (a, b) = (0.5f64.ln(), 4.0f64.ln());
        let mid = a + peak * (b - a);
        let phi = TestFunction::from_fn(&grid, |r| {
            let s = r.ln();
            if s < mid { (s - a) / (mid - a) } else { (b - s) / (b - mid) }
        }).unwrap();
        let g = green_radial(&params, &RadialDomain::PuncturedSpace).unwrap();
        let (w, _) = hardy_weight_case1(&g).unwrap();
        let pot = PotentialProfile::new(std::sync::Arc::new(|r: f64| 1.0 / (1.0 + r)));
        let base = energy_qv(&phi, &pot, Some(&w), &grid).unwrap();
        let scaled = energy_qv(&phi.scaled(c), &pot, Some(&w), &grid).unwrap();
        let k = c.abs().powf(p);
        prop_assert!(rel(scaled.q, k * base.q) < 1e-12);
        prop_assert!(rel(scaled.rhs, k * base.rhs) < 1e-12);
        prop_assert!(rel(scaled.q, scaled.gradient_term + scaled.potential_term) < 1e-15);
    }

    #[test]
    fn simplified_density_is_x_at_p2(v in 0.01f64..10.0, dv in -10.0f64..10.0, w in 0.0f64..10.0, dw in -10.0f64..10.0) {
        let (x, _, sim) = simplified_densities(2.0, v, dv, w, dw);
        prop_assert!(rel(x, sim) < 1e-14 || x == 0.0);
    }

    #[test]
    fn simplified_densities_are_nonnegative(p in 1.05f64..6.0, v in 0.01f64..10.0, dv in -10.0f64..10.0, w in 0.0f64..10.0, dw in -10.0f64..10.0) {
        let (x, y, sim) = simplified_densities(p, v, dv, w, dw);
        prop_assert!(x >= 0.0 && y >= 0.0 && sim >= 0.0);
    }

    #[test]
    fn rellich_constant_at_p2(alpha in 0.01f64..0.99) {
        let expected = (1.0 - alpha * alpha).powi(2);
        prop_assert!(rel(rellich_constant(2.0, alpha), expected) < 1e-13);
    }

    #[test]
    fn probe_ramp_matches_closed_form(p in 1.2f64..5.0, gamma in 0.1f64..1.5, k in 2.0f64..8.0) {
        let eps = 10f64.powf(-k);
        let probe = optimality_probe(p, gamma, eps).unwrap();
        let l = -eps.ln();
        let ramp = l.powf(-gamma * p) / p;
        prop_assert!(rel(probe.ramp_lhs, ramp) < 1e-9);
        prop_assert!(rel(probe.ramp_rhs, ramp) < 1e-9);
        prop_assert!(rel(probe.lhs, probe.ramp_lhs + probe.middle_lhs + probe.tail_lhs) < 1e-12);
        prop_assert!(rel(probe.rhs, probe.ramp_rhs + probe.middle_rhs + probe.tail_rhs) < 1e-12);
    }

    #[test]
    fn probe_function_is_nonnegative(gamma in 0.1f64..2.0, k in 1.0f64..8.0, t in 0.0f64..1.0) {
        let (f, _) = probe_function(gamma, 10f64.powf(-k), t);
        prop_assert!(f >= 0.0 && f.is_finite());
    }
}

#[test]
fn power_map_composes_like_powers() {
    let u = RadialFunction::power(1.5);
    let v = u.compose(&ScalarMap::power(2.0));
    for r in [0.3, 1.0, 2.7] {
        assert!(rel(v.value(r), r.powi(3)) < 1e-14);
        assert!(rel(v.derivative(r), 3.0 * r * r) < 1e-14);
    }
}
