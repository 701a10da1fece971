//! Invariants checked over randomly drawn inputs.

use proptest::prelude::*;
use rmhd_sonic::boundary::{CurveSpec, HodographBoundary};
use rmhd_sonic::hodograph_solver::{char_plus, tau1_of};
use rmhd_sonic::numerics::cheb::Chebyshev;
use rmhd_sonic::numerics::quad::integrate;
use rmhd_sonic::numerics::roots::brent;
use rmhd_sonic::thermo::{canonical_law, canonical_params, Thermo, ThermoTable};
use rmhd_sonic::verify::{observed_order, Level};
use std::sync::OnceLock;

fn hb() -> &'static HodographBoundary {
    static HB: OnceLock<HodographBoundary> = OnceLock::new();
    HB.get_or_init(|| {
        let table = ThermoTable::build(Thermo::new(canonical_law(), &canonical_params()).unwrap(), 0.3).unwrap();
        HodographBoundary::build(&CurveSpec::canonical(), &table).unwrap()
    })
}

fn thermo() -> &'static Thermo {
    &hb().table.thermo
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polytropic_number_density_has_closed_form(rho in 0.1f64..0.8) {
        // For p = A rho^2 the integrand 1/(s + A s^2) integrates to ln(s / (1 + A s)).
        let e = &thermo().eos;
        let exact = e.n0 * (rho / (1.0 + 0.1 * rho)) / (e.rho0 / (1.0 + 0.1 * e.rho0));
        prop_assert!((e.number_density(rho).unwrap() - exact).abs() <= 1e-13 * exact);
    }

    #[test]
    fn supersonic_states_keep_the_bernoulli_constant(rho in 0.1f64..0.53) {
        let th = thermo();
        let s = th.state_at_rho(rho.min(th.rho_star)).unwrap();
        prop_assert!((s.bernoulli() - th.b).abs() <= 1e-13 * th.b);
    }

    #[test]
    fn mach_decreases_with_density(a in 0.1f64..0.7, d in 1e-4f64..0.1) {
        let th = thermo();
        prop_assert!(th.mach(a).unwrap() > th.mach(a + d).unwrap());
    }

    #[test]
    fn table_states_sit_on_their_mach_curve(t in 0.0f64..0.3) {
        let s = hb().table.state(t).unwrap();
        prop_assert!((s.mach - 1.0 / (1.0 - t * t).sqrt()).abs() <= 1e-10);
        prop_assert!((s.varpi * s.mach - 1.0).abs() <= 1e-10);
        let v2 = s.varpi * s.varpi;
        prop_assert!((s.f_cap - v2 * (v2 + s.g)).abs() <= 1e-12 * s.f_cap);
        prop_assert!(s.q < th_limit());
    }

    #[test]
    fn chi_bar_is_twice_the_lambda_integral(t in 0.0f64..0.3) {
        let h = hb();
        let l = h.table.lambda_integral(t).unwrap();
        prop_assert!((h.chi_bar(t).unwrap() - 2.0 * l).abs() <= 1e-15);
        prop_assert!((h.r_bar(t).unwrap() - h.r2 - l).abs() <= 1e-15);
    }

    #[test]
    fn lambda_integral_matches_adaptive_quadrature(t in 0.01f64..0.3) {
        let table = &hb().table;
        let direct = integrate(|s| s * s * (1.0 - s * s).sqrt() / table.state(s).unwrap().f_cap, 0.0, t).unwrap();
        prop_assert!((table.lambda_integral(t).unwrap() - direct).abs() <= 1e-12 * direct.max(1e-6));
    }

    #[test]
    fn tau1_lies_on_the_plus_characteristic(tau in 0.02f64..0.3, frac in 0.0f64..0.99) {
        let h = hb();
        let zeta = frac * h.chi_bar(tau).unwrap();
        let t1 = tau1_of(h, tau, zeta).unwrap().unwrap();
        prop_assert!((0.0..=tau).contains(&t1));
        // The plus characteristic through (tau, zeta) meets chi = 0 at tau1.
        prop_assert!(char_plus(h, t1, tau, zeta).unwrap().abs() <= 1e-10);
        prop_assert!((char_plus(h, tau, tau, zeta).unwrap() - zeta).abs() <= 1e-15);
    }

    #[test]
    fn plus_characteristic_beyond_the_origin_curve_reaches_the_sonic_line(tau in 0.02f64..0.3, extra in 0.0f64..1.0) {
        let h = hb();
        let zeta = h.chi_bar(tau).unwrap() + extra;
        prop_assert!(tau1_of(h, tau, zeta).unwrap().is_none());
    }

    #[test]
    fn observed_order_recovers_power_laws(p in 0.5f64..4.0, c in 1e-6f64..1e3) {
        let levels: Vec<Level> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| Level { h, linf: c * f64::powf(h, p), l2: 0.0, samples: 1 })
            .collect();
        prop_assert!((observed_order(&levels) - p).abs() <= 1e-10);
    }

    #[test]
    fn brent_finds_bracketed_roots(r in -0.9f64..0.9, k in 1u32..6) {
        let x = brent(|x| (x - r) * (1.0 + (x - r).powi(2 * k as i32)), -1.0, 1.0, 1e-14, "test").unwrap();
        prop_assert!((x - r).abs() <= 1e-12);
    }

    #[test]
    fn chebyshev_antiderivative_differentiates_back(a in -1.0f64..1.0, x in 0.0f64..1.0) {
        let c = Chebyshev::fit(0.0, 1.0, 24, |s| (a * s).exp());
        let back = c.integral().derivative();
        prop_assert!((back.eval(x) - (a * x).exp()).abs() <= 1e-12);
    }
}

fn th_limit() -> f64 {
    thermo().limit_speed().unwrap()
}
