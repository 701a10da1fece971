//! Equation of state and the state algebra along the Bernoulli curve.
//!
//! Units have c = 1. Every scalar the solver needs is a function of the single
//! hodograph variable `t = cos(omega)`, `varpi = sin(omega) = 1/M`.

use crate::error::{Error, Result};
use crate::numerics::{brent, integrate, Chebyshev};
use serde::{Deserialize, Serialize};

/// Pressure as a function of mass-energy density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum PressureLaw {
    /// `p = A rho^Gamma`.
    Polytropic {
        #[serde(rename = "A")]
        a: f64,
        #[serde(rename = "Gamma")]
        gamma: f64,
    },
    /// `p = sigma rho`; p'' = 0, so only for closed-form tests.
    AffineLinear { sigma: f64 },
}

impl PressureLaw {
    pub fn p(&self, rho: f64) -> f64 {
        match *self {
            PressureLaw::Polytropic { a, gamma } => a * rho.powf(gamma),
            PressureLaw::AffineLinear { sigma } => sigma * rho,
        }
    }

    pub fn dp(&self, rho: f64) -> f64 {
        match *self {
            PressureLaw::Polytropic { a, gamma } => a * gamma * rho.powf(gamma - 1.0),
            PressureLaw::AffineLinear { sigma } => sigma,
        }
    }

    pub fn d2p(&self, rho: f64) -> f64 {
        match *self {
            PressureLaw::Polytropic { a, gamma } => a * gamma * (gamma - 1.0) * rho.powf(gamma - 2.0),
            PressureLaw::AffineLinear { .. } => 0.0,
        }
    }

    /// The affine law violates p'' > 0.
    pub fn is_test_only(&self) -> bool {
        matches!(self, PressureLaw::AffineLinear { .. })
    }

    fn check_params(&self) -> Result<()> {
        match *self {
            PressureLaw::Polytropic { a, gamma } if !(a > 0.0 && gamma > 1.0) => {
                Err(Error::Config(format!("polytropic law needs A > 0, Gamma > 1 (got A = {a}, Gamma = {gamma})")))
            }
            PressureLaw::AffineLinear { sigma } if !(sigma > 0.0 && sigma < 1.0) => {
                Err(Error::Config(format!("affine law needs 0 < sigma < 1 (got {sigma})")))
            }
            _ => Ok(()),
        }
    }
}

/// How the Bernoulli constant `B = gamma (i + H^2/gamma^2) / n` is pinned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BernoulliSpec {
    Constant(f64),
    Reference { rho_ref: f64, q_ref: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoParams {
    pub kappa0: f64,
    pub n0: f64,
    pub rho0: f64,
    pub bernoulli: BernoulliSpec,
    pub rho_range: (f64, f64),
}

/// Points of the validation mesh for the pressure-law conditions.
pub const VALIDATION_MESH: usize = 401;

/// Equation of state with the frozen-in magnetic term.
#[derive(Debug, Clone, PartialEq)]
pub struct Eos {
    pub law: PressureLaw,
    pub kappa0: f64,
    pub n0: f64,
    pub rho0: f64,
    pub rho_range: (f64, f64),
}

impl Eos {
    /// Builds the law and verifies the admissibility conditions on a mesh of `rho_range`.
    pub fn build(law: PressureLaw, params: &ThermoParams) -> Result<Eos> {
        law.check_params()?;
        let (lo, hi) = params.rho_range;
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::Config(format!("rho_range must satisfy 0 < lo < hi (got [{lo}, {hi}])")));
        }
        if !(params.kappa0 >= 0.0 && params.n0 > 0.0 && params.rho0 > 0.0) {
            return Err(Error::Config("need kappa0 >= 0, n0 > 0, rho0 > 0".into()));
        }
        let eos = Eos { law, kappa0: params.kappa0, n0: params.n0, rho0: params.rho0, rho_range: params.rho_range };
        for k in 0..VALIDATION_MESH {
            let rho = lo + (hi - lo) * k as f64 / (VALIDATION_MESH - 1) as f64;
            eos.check_condition(rho)?;
        }
        Ok(eos)
    }

    /// Checks `p > 0`, `0 < p' + k0^2 n^2/(p+rho) < 1` and (unless test-only) `p'' > 0`.
    pub fn check_condition(&self, rho: f64) -> Result<()> {
        let p = self.law.p(rho);
        if !(p > 0.0) {
            return Err(Error::Condition { rho, which: format!("p(rho) > 0 fails (p = {p})") });
        }
        let n = self.number_density(rho)?;
        let w2 = self.sound_speed_sq(rho, n);
        if !(w2 > 0.0) {
            return Err(Error::Condition { rho, which: format!("p' + k0^2 n^2/(p+rho) > 0 fails ({w2})") });
        }
        if !(w2 < 1.0) {
            return Err(Error::Condition { rho, which: format!("p' + k0^2 n^2/(p+rho) < 1 fails ({w2})") });
        }
        if !self.law.is_test_only() && !(self.law.d2p(rho) > 0.0) {
            return Err(Error::Condition { rho, which: "p''(rho) > 0 fails".into() });
        }
        Ok(())
    }

    /// `n = n0 exp(int_{rho0}^{rho} ds / (s + p(s)))`.
    pub fn number_density(&self, rho: f64) -> Result<f64> {
        let law = self.law;
        let e = integrate(|s| 1.0 / (s + law.p(s)), self.rho0, rho)?;
        Ok(self.n0 * e.exp())
    }

    /// `n' = n/(p+rho)`.
    pub fn dn(&self, rho: f64, n: f64) -> f64 {
        n / (self.law.p(rho) + rho)
    }

    /// `n'' = -p' n/(p+rho)^2`.
    pub fn d2n(&self, rho: f64, n: f64) -> f64 {
        let i = self.law.p(rho) + rho;
        -self.law.dp(rho) * n / (i * i)
    }

    pub fn sound_speed_sq(&self, rho: f64, n: f64) -> f64 {
        let i = self.law.p(rho) + rho;
        self.law.dp(rho) + self.kappa0 * self.kappa0 * n * n / i
    }

    /// Magneto-acoustic speed `w`.
    pub fn sound_speed(&self, rho: f64) -> Result<f64> {
        let n = self.number_density(rho)?;
        let w2 = self.sound_speed_sq(rho, n);
        if !(w2 > 0.0 && w2 < 1.0) {
            return Err(Error::EosRange { rho, which: format!("w^2 = {w2} outside (0, 1)") });
        }
        Ok(w2.sqrt())
    }

    /// `i + H^2/gamma^2 = p + rho + k0^2 n^2`.
    pub fn enthalpy_total(&self, rho: f64, n: f64) -> f64 {
        self.law.p(rho) + rho + self.kappa0 * self.kappa0 * n * n
    }
}

/// Every scalar of one point on the Bernoulli curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermoState {
    /// `cos(omega)`; NaN on the subsonic side.
    pub t: f64,
    /// `sin(omega) = 1/M`.
    pub varpi: f64,
    pub rho: f64,
    pub p: f64,
    pub dp: f64,
    pub d2p: f64,
    pub n: f64,
    /// Gas enthalpy density `p + rho`.
    pub i: f64,
    /// `i + H^2/gamma^2`.
    pub i_tot: f64,
    pub w: f64,
    pub gamma_w: f64,
    pub q: f64,
    pub gamma: f64,
    pub mach: f64,
    /// `i^2 p'' + k0^2 n^2 (1 - p')`.
    pub pp: f64,
    /// `f(w)`; infinite when `pp = 0`.
    pub f_w: f64,
    /// `i_tot pp gamma_w^2 f / (2 i^2 w^2)`, the coefficient group of the semi-linear system.
    pub g: f64,
    /// `F1` at this state.
    pub f1hat: f64,
    /// `F = (1 - t^2) F1 / (4 i^2 w^2) = varpi^2 (varpi^2 + g)`.
    pub f_cap: f64,
}

impl ThermoState {
    /// `dw/dq` along the Bernoulli curve; negative on admissible states.
    pub fn dw_dq(&self) -> f64 {
        -self.i_tot * self.q * self.gamma * self.gamma * self.pp / (2.0 * self.i * self.i * self.w.powi(3))
    }

    /// The Bernoulli invariant recomputed from the state.
    pub fn bernoulli(&self) -> f64 {
        self.gamma * self.i_tot / self.n
    }
}

/// Semi-linear coefficients at one value of the hodograph variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coefficients {
    pub t: f64,
    pub f1hat: f64,
    pub f_cap: f64,
    pub f_w: f64,
    /// The bracketed group `G`; `F(0) = 1 + G(0)`.
    pub g: f64,
    /// `G + 2 - t^2`.
    pub k1: f64,
    /// `G + 2 (1 - t^2)`.
    pub k2: f64,
    /// `2 t^2 sqrt(1 - t^2) / F`.
    pub lambda_plus: f64,
}

/// EOS plus the Bernoulli constant and the sonic point.
#[derive(Debug, Clone, PartialEq)]
pub struct Thermo {
    pub eos: Eos,
    pub b: f64,
    pub rho_star: f64,
}

impl Thermo {
    pub fn new(law: PressureLaw, params: &ThermoParams) -> Result<Thermo> {
        let eos = Eos::build(law, params)?;
        let b = match params.bernoulli {
            BernoulliSpec::Constant(b) if b > 0.0 => b,
            BernoulliSpec::Constant(b) => return Err(Error::Config(format!("Bernoulli constant must be > 0 (got {b})"))),
            BernoulliSpec::Reference { rho_ref, q_ref } => {
                if !(q_ref > 0.0 && q_ref < 1.0 && rho_ref > 0.0) {
                    return Err(Error::Config("reference state needs rho_ref > 0 and 0 < q_ref < 1".into()));
                }
                let n = eos.number_density(rho_ref)?;
                eos.enthalpy_total(rho_ref, n) / n / (1.0 - q_ref * q_ref).sqrt()
            }
        };
        let mut th = Thermo { eos, b, rho_star: f64::NAN };
        th.rho_star = th.find_sonic()?;
        Ok(th)
    }

    /// Pure algebra from `(rho, n)`; `t` and `varpi` derive from the Mach number.
    pub fn state_from(&self, rho: f64, n: f64) -> Result<ThermoState> {
        let law = self.eos.law;
        let k2 = self.eos.kappa0 * self.eos.kappa0;
        let p = law.p(rho);
        let dp = law.dp(rho);
        let d2p = law.d2p(rho);
        let i = p + rho;
        let i_tot = i + k2 * n * n;
        let w2 = dp + k2 * n * n / i;
        if !(w2 > 0.0 && w2 < 1.0) {
            return Err(Error::EosRange { rho, which: format!("w^2 = {w2} outside (0, 1)") });
        }
        let w = w2.sqrt();
        let gamma_w = 1.0 / (1.0 - w2).sqrt();
        let gamma = self.b * n / i_tot;
        if !(gamma >= 1.0) {
            return Err(Error::Bernoulli { rho, gamma });
        }
        let q = (1.0 - 1.0 / (gamma * gamma)).sqrt();
        let mach = gamma * q / (gamma_w * w);
        let varpi = 1.0 / mach;
        let t = if mach >= 1.0 { (1.0 - varpi * varpi).sqrt() } else { f64::NAN };
        let pp = i * i * d2p + k2 * n * n * (1.0 - dp);
        // pp * f stays finite when pp = 0.
        let pf = pp * gamma_w * gamma_w + 2.0 * i * i * w2 * w2 / i_tot;
        let f_w = pf / pp;
        let g = i_tot * gamma_w * gamma_w * pf / (2.0 * i * i * w2);
        let v2 = varpi.min(1.0).powi(2);
        let f1hat = 4.0 * i * i * w2 * (v2 + g);
        let f_cap = v2 * (v2 + g);
        Ok(ThermoState {
            t,
            varpi,
            rho,
            p,
            dp,
            d2p,
            n,
            i,
            i_tot,
            w,
            gamma_w,
            q,
            gamma,
            mach,
            pp,
            f_w,
            g,
            f1hat,
            f_cap,
        })
    }

    pub fn state_at_rho(&self, rho: f64) -> Result<ThermoState> {
        let n = self.eos.number_density(rho)?;
        self.state_from(rho, n)
    }

    /// `(q, gamma)` from the Bernoulli closure `gamma = B n / i_tot`.
    pub fn bernoulli_speed(&self, rho: f64) -> Result<(f64, f64)> {
        let s = self.state_at_rho(rho)?;
        Ok((s.q, s.gamma))
    }

    pub fn mach(&self, rho: f64) -> Result<f64> {
        Ok(self.state_at_rho(rho)?.mach)
    }

    // M - target, continued by -target past stagnation so the bracket survives.
    fn mach_minus(&self, rho: f64, target: f64) -> f64 {
        match self.state_at_rho(rho) {
            Ok(s) => s.mach - target,
            Err(Error::Bernoulli { .. }) => -target,
            Err(_) => f64::NAN,
        }
    }

    fn find_sonic(&self) -> Result<f64> {
        let (lo, hi) = self.eos.rho_range;
        let f_lo = self.mach_minus(lo, 1.0);
        let f_hi = self.mach_minus(hi, 1.0);
        if !(f_lo > 0.0 && f_hi < 0.0) {
            return Err(Error::NoSonicPoint { lo, hi });
        }
        brent(|r| self.mach_minus(r, 1.0), lo, hi, 0.0, "sonic density")
    }

    /// The sonic state, `t = 0` and `varpi = 1` exactly.
    pub fn sonic_state(&self) -> Result<ThermoState> {
        let mut s = self.state_at_rho(self.rho_star)?;
        s.t = 0.0;
        s.varpi = 1.0;
        s.f1hat = 4.0 * s.i * s.i * s.w * s.w * (1.0 + s.g);
        s.f_cap = 1.0 + s.g;
        Ok(s)
    }

    /// Density on the supersonic branch with `cos(omega) = t`.
    pub fn rho_of_t(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(self.rho_star);
        }
        if !(0.0..1.0).contains(&t) {
            return Err(Error::TableRange { t, t_max: 1.0 });
        }
        let target = 1.0 / (1.0 - t * t).sqrt();
        let lo = self.eos.rho_range.0;
        if !(self.mach_minus(lo, target) > 0.0) {
            return Err(Error::TableRange { t, t_max: self.t_of_rho(lo).unwrap_or(f64::NAN) });
        }
        brent(|r| self.mach_minus(r, target), lo, self.rho_star, 0.0, "rho(t)")
    }

    fn t_of_rho(&self, rho: f64) -> Result<f64> {
        Ok(self.state_at_rho(rho)?.t)
    }

    /// Exact (root-finding) state with `cos(omega) = t`; `t` and `varpi` are stored as requested.
    pub fn state_of_t(&self, t: f64) -> Result<ThermoState> {
        if t == 0.0 {
            return self.sonic_state();
        }
        let rho = self.rho_of_t(t)?;
        let s = self.state_at_rho(rho)?;
        Ok(with_t(s, t))
    }

    /// The limit speed `q^`: the supremum of `q` as `n -> 0`.
    pub fn limit_speed(&self) -> Result<f64> {
        match self.eos.law {
            // i/n -> 0 as rho -> 0: no rest-mass floor, q^ = 1.
            PressureLaw::AffineLinear { .. } => Ok(1.0),
            PressureLaw::Polytropic { .. } => {
                let law = self.eos.law;
                // lim (p + rho)/n = (rho0/n0) exp(-int_0^rho0 p / (s (s + p)) ds).
                let e = integrate(|s| if s > 0.0 { law.p(s) / (s * (s + law.p(s))) } else { 0.0 }, 0.0, self.eos.rho0)?;
                let m = self.eos.rho0 / self.eos.n0 * (-e).exp();
                let gh = self.b / m;
                if gh <= 1.0 {
                    return Err(Error::Bernoulli { rho: 0.0, gamma: gh });
                }
                Ok((1.0 - 1.0 / (gh * gh)).sqrt())
            }
        }
    }
}

fn with_t(mut s: ThermoState, t: f64) -> ThermoState {
    let v2 = 1.0 - t * t;
    s.t = t;
    s.varpi = v2.sqrt();
    s.f1hat = 4.0 * s.i * s.i * s.w * s.w * (v2 + s.g);
    s.f_cap = v2 * (v2 + s.g);
    s
}

/// Default Chebyshev order of the table fits.
pub const TABLE_ORDER: usize = 48;

/// Thermodynamic table over `t in [0, t_max]`: Chebyshev fits of `rho(t)` and `n(t)`
/// built from exact root-found states, plus the characteristic-speed antiderivative.
#[derive(Debug, Clone)]
pub struct ThermoTable {
    pub thermo: Thermo,
    pub t_max: f64,
    /// Lower limit of `I` and `Q`; `varpi(t_max)`.
    pub varpi_lo: f64,
    pub f_min: f64,
    /// `max 1/F` on the table.
    pub k_delta: f64,
    rho: Chebyshev,
    n: Chebyshev,
    lambda_int: Chebyshev,
}

impl ThermoTable {
    pub fn build(thermo: Thermo, t_max: f64) -> Result<ThermoTable> {
        Self::build_with_order(thermo, t_max, TABLE_ORDER)
    }

    pub fn build_with_order(thermo: Thermo, t_max: f64, order: usize) -> Result<ThermoTable> {
        if !(t_max > 0.0 && t_max < 1.0) {
            return Err(Error::Config(format!("t_max must lie in (0, 1) (got {t_max})")));
        }
        let nodes = Chebyshev::nodes(0.0, t_max, order);
        let mut rv = Vec::with_capacity(order);
        let mut nv = Vec::with_capacity(order);
        for &t in &nodes {
            let rho = thermo.rho_of_t(t)?;
            rv.push(rho);
            nv.push(thermo.eos.number_density(rho)?);
        }
        let rho = Chebyshev::from_values(0.0, t_max, &rv);
        let n = Chebyshev::from_values(0.0, t_max, &nv);
        let mut table = ThermoTable {
            thermo,
            t_max,
            varpi_lo: (1.0 - t_max * t_max).sqrt(),
            f_min: f64::NAN,
            k_delta: f64::NAN,
            rho,
            n,
            lambda_int: Chebyshev::fit(0.0, 1.0, 2, |_| 0.0),
        };
        // Monotonicity of rho -> M and positivity of F on a scan.
        let scan = 2001;
        let mut prev_rho = f64::INFINITY;
        let mut f_min = f64::INFINITY;
        for k in 0..scan {
            let t = t_max * k as f64 / (scan - 1) as f64;
            let s = table.state(t)?;
            if !(s.rho < prev_rho) {
                return Err(Error::Verify(format!("rho(t) not strictly decreasing near t = {t}")));
            }
            prev_rho = s.rho;
            f_min = f_min.min(s.f_cap);
        }
        if !(f_min > 0.0) {
            return Err(Error::TableRange { t: t_max, t_max });
        }
        table.f_min = f_min;
        table.k_delta = 1.0 / f_min;
        let lam = Chebyshev::fit(0.0, t_max, order, |s| {
            let st = table.state(s).expect("inside table");
            s * s * st.varpi / st.f_cap
        });
        table.lambda_int = lam.integral();
        Ok(table)
    }

    fn check_range(&self, t: f64) -> Result<f64> {
        let slack = 1e-12 * self.t_max;
        if t < -slack || t > self.t_max + slack || t.is_nan() {
            return Err(Error::TableRange { t, t_max: self.t_max });
        }
        Ok(t.clamp(0.0, self.t_max))
    }

    /// Fast state from the fits; closure `gamma = B n / i_tot` is exact by construction.
    pub fn state(&self, t: f64) -> Result<ThermoState> {
        let t = self.check_range(t)?;
        let s = self.thermo.state_from(self.rho.eval(t), self.n.eval(t))?;
        Ok(with_t(s, t))
    }

    pub fn coefficients(&self, t: f64) -> Result<Coefficients> {
        let s = self.state(t)?;
        if !(s.f_cap > 0.0) {
            return Err(Error::TableRange { t, t_max: self.t_max });
        }
        let v2 = 1.0 - t * t;
        Ok(Coefficients {
            t,
            f1hat: s.f1hat,
            f_cap: s.f_cap,
            f_w: s.f_w,
            g: s.g,
            k1: s.g + 2.0 - t * t,
            k2: s.g + 2.0 * v2,
            lambda_plus: 2.0 * t * t * v2.sqrt() / s.f_cap,
        })
    }

    /// Derivative of `I` with respect to `varpi`: `2 i^2 w^2 / (varpi F1)`.
    pub fn di_dvarpi(&self, varpi: f64) -> Result<f64> {
        let s = self.state((1.0 - varpi * varpi).max(0.0).sqrt())?;
        Ok(2.0 * s.i * s.i * s.w * s.w / (varpi * s.f1hat))
    }

    /// Derivative of `Q` with respect to `varpi`: `4 i^2 w^2 sqrt(1 - varpi^2) / F1`.
    pub fn dq_dvarpi(&self, varpi: f64) -> Result<f64> {
        let t = (1.0 - varpi * varpi).max(0.0).sqrt();
        let s = self.state(t)?;
        Ok(4.0 * s.i * s.i * s.w * s.w * t / s.f1hat)
    }

    fn varpi_integral(&self, varpi: f64, d: impl Fn(&Self, f64) -> Result<f64>) -> Result<f64> {
        if !(varpi >= self.varpi_lo - 1e-15 && varpi <= 1.0) {
            return Err(Error::TableRange { t: (1.0 - varpi * varpi).max(0.0).sqrt(), t_max: self.t_max });
        }
        let mut err = None;
        let v = integrate(
            |s| match d(self, s.clamp(self.varpi_lo, 1.0)) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    f64::NAN
                }
            },
            self.varpi_lo,
            varpi,
        );
        if let Some(e) = err {
            return Err(e);
        }
        v
    }

    /// `I(varpi) = int_{varpi_lo}^{varpi} 2 i^2 w^2 / (s F1(s)) ds`.
    pub fn i_of_varpi(&self, varpi: f64) -> Result<f64> {
        self.varpi_integral(varpi, Self::di_dvarpi)
    }

    /// `Q(varpi) = int_{varpi_lo}^{varpi} 4 i^2 w^2 sqrt(1 - s^2) / F1(s) ds`.
    pub fn q_of_varpi(&self, varpi: f64) -> Result<f64> {
        self.varpi_integral(varpi, Self::dq_dvarpi)
    }

    /// `int_0^t s^2 sqrt(1 - s^2) / F(s) ds` from the Chebyshev antiderivative.
    pub fn lambda_integral(&self, t: f64) -> Result<f64> {
        let t = self.check_range(t)?;
        Ok(self.lambda_int.eval(t))
    }

    /// Sampled rows for the table dump, `count >= 2` points on `[0, t_max]`.
    pub fn rows(&self, count: usize) -> Result<Vec<TableRow>> {
        (0..count)
            .map(|k| {
                let t = self.t_max * k as f64 / (count - 1) as f64;
                let s = self.state(t)?;
                Ok(TableRow {
                    t,
                    varpi: s.varpi,
                    rho: s.rho,
                    p: s.p,
                    n: s.n,
                    w: s.w,
                    q: s.q,
                    gamma: s.gamma,
                    mach: 1.0 / s.varpi,
                    f1hat: s.f1hat,
                    f: s.f_cap,
                    i: self.i_of_varpi(s.varpi)?,
                    q_int: self.q_of_varpi(s.varpi)?,
                })
            })
            .collect()
    }
}

/// One line of the table dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableRow {
    pub t: f64,
    pub varpi: f64,
    pub rho: f64,
    pub p: f64,
    pub n: f64,
    pub w: f64,
    pub q: f64,
    pub gamma: f64,
    #[serde(rename = "M")]
    pub mach: f64,
    #[serde(rename = "F1hat")]
    pub f1hat: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "Q")]
    pub q_int: f64,
}

/// The shipped default law and parameters.
pub fn canonical_law() -> PressureLaw {
    PressureLaw::Polytropic { a: 0.1, gamma: 2.0 }
}

pub fn canonical_params() -> ThermoParams {
    ThermoParams {
        kappa0: 0.05,
        n0: 1.0,
        rho0: 0.5,
        bernoulli: BernoulliSpec::Reference { rho_ref: 0.5, q_ref: 0.35 },
        rho_range: (0.1, 0.8),
    }
}
