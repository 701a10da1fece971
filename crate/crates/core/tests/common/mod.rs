//! Brute-force oracles written from the defining formulas only: closed-form pressure
//! law, fixed-step Simpson, full scans and plain bisection. Nothing here calls the
//! library's numerics.

#![allow(dead_code)]

/// Polytropic law `p = A rho^Gamma` with the frozen-in field constant.
#[derive(Clone, Copy, Debug)]
pub struct Gas {
    pub a: f64,
    pub gamma: f64,
    pub kappa0: f64,
    pub n0: f64,
    pub rho0: f64,
}

pub const CANONICAL: Gas = Gas { a: 0.1, gamma: 2.0, kappa0: 0.05, n0: 1.0, rho0: 0.5 };
pub const RHO_RANGE: (f64, f64) = (0.1, 0.8);
pub const REFERENCE: (f64, f64) = (0.5, 0.35);

/// Composite Simpson with `panels` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels.is_multiple_of(2));
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for k in 1..panels {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Bisection to the last representable bracket; `f(lo)` and `f(hi)` differ in sign.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "oracle bracket [{lo}, {hi}] has no sign change");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Oracle state: everything derived from `(rho, n)` by the defining formulas.
#[derive(Clone, Copy, Debug)]
pub struct State {
    pub rho: f64,
    pub n: f64,
    pub i: f64,
    pub i_tot: f64,
    pub w2: f64,
    pub gamma_w2: f64,
    pub pp: f64,
    pub gamma: f64,
    pub q: f64,
    pub mach: f64,
}

impl State {
    /// `F1` at a given `varpi`: `2 i_tot Pp gamma_w^2 f + 4 i^2 w^2 varpi^2` with
    /// `f = gamma_w^2 + 2 i^2 w^4 / (i_tot Pp)`.
    pub fn f1(&self, varpi: f64) -> f64 {
        let f = self.gamma_w2 + 2.0 * self.i * self.i * self.w2 * self.w2 / (self.i_tot * self.pp);
        2.0 * self.i_tot * self.pp * self.gamma_w2 * f + 4.0 * self.i * self.i * self.w2 * varpi * varpi
    }

    /// `F = (1 - t^2) F1 / (4 i^2 w^2)` on the curve `cos(omega) = t`.
    pub fn f_cap(&self, t: f64) -> f64 {
        let v2 = 1.0 - t * t;
        v2 * self.f1(v2.sqrt()) / (4.0 * self.i * self.i * self.w2)
    }
}

impl Gas {
    pub fn p(&self, rho: f64) -> f64 {
        self.a * rho.powf(self.gamma)
    }
    pub fn dp(&self, rho: f64) -> f64 {
        self.a * self.gamma * rho.powf(self.gamma - 1.0)
    }
    pub fn d2p(&self, rho: f64) -> f64 {
        self.a * self.gamma * (self.gamma - 1.0) * rho.powf(self.gamma - 2.0)
    }

    /// `n0 exp(int_{rho0}^{rho} ds / (s + p(s)))` by Simpson.
    pub fn n(&self, rho: f64, panels: usize) -> f64 {
        self.n0 * simpson(|s| 1.0 / (s + self.p(s)), self.rho0, rho, panels).exp()
    }

    /// State with Bernoulli constant `b`, `gamma = b n / i_tot`; `mach = 0` past stagnation.
    pub fn state_with_n(&self, b: f64, rho: f64, n: f64) -> State {
        let k2 = self.kappa0 * self.kappa0;
        let i = self.p(rho) + rho;
        let i_tot = i + k2 * n * n;
        let w2 = self.dp(rho) + k2 * n * n / i;
        let gamma_w2 = 1.0 / (1.0 - w2);
        let pp = i * i * self.d2p(rho) + k2 * n * n * (1.0 - self.dp(rho));
        let gamma = b * n / i_tot;
        let (q, mach) = if gamma >= 1.0 {
            let q = (1.0 - 1.0 / (gamma * gamma)).sqrt();
            (q, gamma * q / (gamma_w2.sqrt() * w2.sqrt()))
        } else {
            (0.0, 0.0)
        };
        State { rho, n, i, i_tot, w2, gamma_w2, pp, gamma, q, mach }
    }

    pub fn state(&self, b: f64, rho: f64, panels: usize) -> State {
        self.state_with_n(b, rho, self.n(rho, panels))
    }

    /// Bernoulli constant through the reference state `(rho, q)`.
    pub fn bernoulli(&self, reference: (f64, f64), panels: usize) -> f64 {
        let (rho, q) = reference;
        let n = self.n(rho, panels);
        let i_tot = self.p(rho) + rho + self.kappa0 * self.kappa0 * n * n;
        i_tot / (n * (1.0 - q * q).sqrt())
    }

    /// Sonic density from a scan of `points` densities over `range`, with `n` carried
    /// by two-panel Simpson increments between neighbours and the crossing refined by
    /// bisection inside the bracketing cell.
    pub fn sonic_scan(&self, b: f64, range: (f64, f64), points: usize) -> f64 {
        let h = (range.1 - range.0) / (points - 1) as f64;
        let mut n = self.n(range.0, 20_000);
        let inc = |a: f64| simpson(|s| 1.0 / (s + self.p(s)), a, a + h, 2).exp();
        let mut prev = self.state_with_n(b, range.0, n).mach - 1.0;
        assert!(prev > 0.0);
        for k in 1..points {
            let rho = range.0 + (k - 1) as f64 * h;
            let n_next = n * inc(rho);
            let cur = self.state_with_n(b, rho + h, n_next).mach - 1.0;
            if cur <= 0.0 {
                return bisect(|r| self.state_with_n(b, r, n * simpson(|s| 1.0 / (s + self.p(s)), rho, r, 2).exp()).mach - 1.0, rho, rho + h);
            }
            n = n_next;
            prev = cur;
        }
        let _ = prev;
        panic!("no sonic point in the scan range");
    }

    /// Supersonic density with `cos(omega) = t`, by bisection on `M = 1/sqrt(1 - t^2)`.
    pub fn rho_of_t(&self, b: f64, t: f64, range: (f64, f64), panels: usize) -> f64 {
        let target = 1.0 / (1.0 - t * t).sqrt();
        bisect(|r| self.state(b, r, panels).mach - target, range.0, range.1)
    }

    pub fn state_of_t(&self, b: f64, t: f64, range: (f64, f64), panels: usize) -> State {
        self.state(b, self.rho_of_t(b, t, range, panels), panels)
    }

    /// `int_0^t s^2 sqrt(1 - s^2) / F(s) ds`.
    pub fn lambda_integral(&self, b: f64, t: f64, range: (f64, f64), panels: usize) -> f64 {
        simpson(
            |s| {
                let st = self.state_of_t(b, s, range, 400);
                s * s * (1.0 - s * s).sqrt() / st.f_cap(s)
            },
            0.0,
            t,
            panels,
        )
    }

    /// `int_{lo}^{varpi} g(s, state) ds` over `varpi` with states found by bisection.
    pub fn varpi_integral(&self, b: f64, lo: f64, varpi: f64, range: (f64, f64), panels: usize, g: impl Fn(f64, &State) -> f64) -> f64 {
        simpson(
            |s| {
                let t = (1.0 - s * s).max(0.0).sqrt();
                g(s, &self.state_of_t(b, t, range, 400))
            },
            lo,
            varpi,
            panels,
        )
    }

    /// `I(varpi) = int 2 i^2 w^2 / (s F1(s)) ds` from `lo`.
    pub fn i_integral(&self, b: f64, lo: f64, varpi: f64, range: (f64, f64), panels: usize) -> f64 {
        self.varpi_integral(b, lo, varpi, range, panels, |s, st| 2.0 * st.i * st.i * st.w2 / (s * st.f1(s)))
    }

    /// `Q(varpi) = int 4 i^2 w^2 sqrt(1 - s^2) / F1(s) ds` from `lo`.
    pub fn q_integral(&self, b: f64, lo: f64, varpi: f64, range: (f64, f64), panels: usize) -> f64 {
        self.varpi_integral(b, lo, varpi, range, panels, |s, st| 4.0 * st.i * st.i * st.w2 * (1.0 - s * s).sqrt() / st.f1(s))
    }

    /// `tau1` with `int_{tau1}^{tau} 2 s^2 sqrt(1 - s^2) / F ds = zeta`: scan of the
    /// cumulative integral downward from `tau` in `cells` cells, then bisection inside
    /// the crossing cell.
    pub fn tau1(&self, b: f64, tau: f64, zeta: f64, range: (f64, f64), cells: usize) -> f64 {
        let g = |s: f64| {
            let st = self.state_of_t(b, s, range, 400);
            2.0 * s * s * (1.0 - s * s).sqrt() / st.f_cap(s)
        };
        let h = tau / cells as f64;
        let mut acc = 0.0;
        for k in 0..cells {
            let hi = tau - k as f64 * h;
            let lo = hi - h;
            let cell = simpson(g, lo, hi, 4);
            if acc + cell >= zeta {
                return bisect(|s| acc + simpson(g, s, hi, 4) - zeta, lo, hi);
            }
            acc += cell;
        }
        panic!("zeta beyond the full integral");
    }
}

/// Relative difference with an absolute floor at 1e-300.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// One derived value computed twice: by the library and by its oracle.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub library: f64,
    pub oracle: f64,
}

impl Fixture {
    pub fn rel(&self) -> f64 {
        rel(self.library, self.oracle)
    }
}

/// Relative tolerance of every derived fixture.
pub const FIXTURE_TOL: f64 = 1e-8;

/// The derived fixture values of the canonical configuration.
pub fn fixtures() -> Vec<Fixture> {
    use rmhd_sonic::boundary::{CurveSpec, HodographBoundary};
    use rmhd_sonic::hodograph_solver::tau1_of;
    use rmhd_sonic::thermo::{canonical_law, canonical_params, Eos, Thermo, ThermoTable};

    let gas = CANONICAL;
    let b = gas.bernoulli(REFERENCE, 1_000_000);
    let mut out = Vec::new();
    let mut push = |name, library: f64, oracle: f64| out.push(Fixture { name, library, oracle });

    // n outside the canonical density range needs a wider admissible range.
    let wide = Eos::build(canonical_law(), &rmhd_sonic::thermo::ThermoParams { rho_range: (0.1, 1.2), ..canonical_params() }).unwrap();
    push("n(rho = 1.0)", wide.number_density(1.0).unwrap(), gas.n(1.0, 1_000_000));
    push("n(rho = 0.2)", wide.number_density(0.2).unwrap(), gas.n(0.2, 1_000_000));

    let thermo = Thermo::new(canonical_law(), &canonical_params()).unwrap();
    push("B", thermo.b, b);
    let n08 = gas.n(0.8, 1_000_000);
    push("w(rho = 0.8)", thermo.eos.sound_speed(0.8).unwrap(), gas.state_with_n(b, 0.8, n08).w2.sqrt());
    push("q(rho = 0.7)", thermo.bernoulli_speed(0.7).unwrap().0, {
        // Bernoulli closure solved for q directly: i_tot / (n sqrt(1 - q^2)) = B.
        let n = gas.n(0.7, 1_000_000);
        let i_tot = gas.p(0.7) + 0.7 + gas.kappa0 * gas.kappa0 * n * n;
        bisect(|q| i_tot / (n * (1.0 - q * q).sqrt()) - b, 0.0, 1.0 - 1e-15)
    });
    push("rho*", thermo.rho_star, gas.sonic_scan(b, RHO_RANGE, 1_000_000));
    push("rho(t = 0.2)", thermo.rho_of_t(0.2).unwrap(), gas.rho_of_t(b, 0.2, RHO_RANGE, 20_000));

    let table = ThermoTable::build(thermo.clone(), 0.3).unwrap();
    let st = gas.state_of_t(b, 0.1, RHO_RANGE, 20_000);
    push("F(t = 0.1)", table.coefficients(0.1).unwrap().f_cap, st.f_cap(0.1));
    push("Lambda(t = 0.2)", table.lambda_integral(0.2).unwrap(), gas.lambda_integral(b, 0.2, RHO_RANGE, 2000));

    // A deeper table so that varpi = 0.95 lies inside it.
    let deep = ThermoTable::build(thermo.clone(), 0.4).unwrap();
    let lo = (1.0f64 - 0.16).sqrt();
    push("I(varpi = 0.97)", deep.i_of_varpi(0.97).unwrap(), gas.i_integral(b, lo, 0.97, RHO_RANGE, 2000));
    push("Q(varpi = 0.95)", deep.q_of_varpi(0.95).unwrap(), gas.q_integral(b, lo, 0.95, RHO_RANGE, 2000));

    let hb = HodographBoundary::build(&CurveSpec::canonical(), &table).unwrap();
    push("rbar(t = 0.2) - r2", hb.r_bar(0.2).unwrap() - hb.r2, gas.lambda_integral(b, 0.2, RHO_RANGE, 2000));
    let zeta = hb.chi_bar(0.2).unwrap() / 2.0;
    push("tau1(0.2, chibar(0.2)/2)", tau1_of(&hb, 0.2, zeta).unwrap().unwrap(), gas.tau1(b, 0.2, zeta, RHO_RANGE, 2000));
    out
}
