//! Boundary data: the sonic curve `y = phi(x)` carrying the flow angle `theta^(x)`,
//! the positive characteristic `x = psi(y)`, their images in the `(t, r)` plane and
//! the homogenized data of the Goursat problem in `(upsilon, chi)`.
//!
//! The characteristic is parameterized by `s = sqrt(y_B - y)`:
//! `psi = sum c_k s^k`. Near the corner the hodograph variable grows like `s`, so
//! corner compatibility (a finite nonzero `W` at `B`) needs the `s^3` term; a
//! polynomial in `y` would force `W(B) = 0`.

use crate::error::{Error, Result};
use crate::numerics::{brent, Chebyshev};
use crate::thermo::ThermoTable;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// Order of the Chebyshev fits of the hodograph boundary functions.
pub const FIT_ORDER: usize = 64;
/// Mesh size of the hypothesis scans.
pub const SCAN: usize = 401;
/// Tolerance of the zeroth-order corner identity.
pub const CORNER_TOL: f64 = 1e-8;
/// Tolerance of the first-order corner identity.
pub const CORNER_SLOPE_TOL: f64 = 1e-6;
/// Relative tolerance on the second-order corner condition.
pub const CORNER_CURVATURE_TOL: f64 = 1e-6;

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect()
}

/// Physical boundary curves and the flow angle on the sonic curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub x_b: f64,
    pub y_b: f64,
    /// Right end of the sonic curve.
    pub x_c: f64,
    /// Lower end of the characteristic.
    pub y_a: f64,
    /// `phi(x)`, ascending powers of `x`.
    pub phi: Vec<f64>,
    /// `theta^(x)`, ascending powers of `x`.
    pub theta_hat: Vec<f64>,
    /// `c_k` of `psi = sum c_k s^k`, `s = sqrt(y_B - y)`; `c_0 = x_B`, `c_1 = 0`.
    pub psi: Vec<f64>,
    /// Overwrite `c_0..c_5` (`c_0..c_4` for a shorter `psi`) so the corner compatibility
    /// identities hold.
    #[serde(default)]
    pub fit_corner: bool,
}

impl CurveSpec {
    /// The shipped default curves. `psi` is completed by corner fitting.
    pub fn canonical() -> CurveSpec {
        CurveSpec {
            x_b: 0.0,
            y_b: 0.0,
            x_c: 1.0,
            y_a: -0.08,
            phi: vec![0.0, 0.0, 0.05],
            theta_hat: vec![0.0, -0.2],
            psi: vec![0.0; 6],
            fit_corner: true,
        }
    }

    fn check_shape(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !(self.x_c > self.x_b && self.y_a < self.y_b) {
            return Err(Error::Config("need x_C > x_B and y_A < y_B".into()));
        }
        if self.phi.is_empty() || self.theta_hat.len() < 2 || !finite(&self.phi) || !finite(&self.theta_hat) {
            return Err(Error::Config("phi and theta_hat need finite coefficients; theta_hat at least linear".into()));
        }
        if !finite(&self.psi) {
            return Err(Error::Config("psi coefficients must be finite".into()));
        }
        if self.psi.len() < 4 && !self.fit_corner {
            return Err(Error::Config("psi needs coefficients up to s^3".into()));
        }
        Ok(())
    }

    pub fn phi(&self, x: f64) -> f64 {
        horner(&self.phi, x)
    }

    pub fn dphi(&self, x: f64) -> f64 {
        horner(&derivative(&self.phi), x)
    }

    pub fn theta(&self, x: f64) -> f64 {
        horner(&self.theta_hat, x)
    }

    pub fn dtheta(&self, x: f64) -> f64 {
        horner(&derivative(&self.theta_hat), x)
    }

    /// `phi' sin theta^ + cos theta^`, the transversality factor of the sonic curve.
    pub fn sonic_denominator(&self, x: f64) -> f64 {
        let th = self.theta(x);
        self.dphi(x) * th.sin() + th.cos()
    }

    /// `W = -a^0` on the sonic curve.
    pub fn a0_hat(&self, x: f64) -> Result<f64> {
        let d = self.sonic_denominator(x);
        if !(d > 0.0) {
            return Err(Error::Hypothesis(format!("phi' sin theta + cos theta = {d} <= 0 at x = {x}")));
        }
        Ok(self.dtheta(x) / (2.0 * d))
    }

    /// `W_t = Z_t = a^1` on the sonic curve.
    pub fn a1_hat(&self, x: f64) -> Result<f64> {
        let a0 = self.a0_hat(x)?;
        let th = self.theta(x);
        let dp = self.dphi(x);
        Ok(a0 * (dp * th.cos() - th.sin()) / (th.cos() + dp * th.sin()))
    }

    pub fn s_of_y(&self, y: f64) -> f64 {
        (self.y_b - y).max(0.0).sqrt()
    }

    pub fn s_a(&self) -> f64 {
        self.s_of_y(self.y_a)
    }

    /// `psi` at parameter `s`.
    pub fn psi_s(&self, s: f64) -> f64 {
        horner(&self.psi, s)
    }

    /// `psi'(y)` at parameter `s`; finite at `s = 0` only when `c_1 = 0`.
    pub fn dpsi_s(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (k, &c) in self.psi.iter().enumerate().skip(1).filter(|(_, c)| **c != 0.0) {
            acc += k as f64 * c * s.powi(k as i32 - 2);
        }
        -0.5 * acc
    }

    /// `s psi''(y)`, finite at `s = 0` when `c_1 = 0`.
    pub fn s_d2psi_s(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (k, &c) in self.psi.iter().enumerate().skip(1).filter(|(k, c)| *k != 2 && **c != 0.0) {
            let k = k as i32;
            acc += (k * (k - 2)) as f64 * c * s.powi(k - 3);
        }
        0.25 * acc
    }

    pub fn psi(&self, y: f64) -> f64 {
        self.psi_s(self.s_of_y(y))
    }

    pub fn dpsi(&self, y: f64) -> f64 {
        self.dpsi_s(self.s_of_y(y))
    }

    pub fn d2psi(&self, y: f64) -> f64 {
        let s = self.s_of_y(y);
        self.s_d2psi_s(s) / s
    }

    fn coeff(&self, k: usize) -> f64 {
        self.psi.get(k).copied().unwrap_or(0.0)
    }
}

/// One pass/fail line of the hypothesis audit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub name: String,
    pub pass: bool,
    /// Positive when satisfied, in the natural units of the check.
    pub margin: f64,
    pub detail: String,
}

impl Diagnostic {
    fn new(name: &str, pass: bool, margin: f64, detail: impl Into<String>) -> Diagnostic {
        Diagnostic { name: name.into(), pass, margin, detail: detail.into() }
    }
}

/// Characteristic data along `AB` through the table. Borrowed view used during
/// construction and by the anchor lookups of the physical map.
#[derive(Clone, Copy)]
pub struct CharCurve<'a> {
    pub spec: &'a CurveSpec,
    pub table: &'a ThermoTable,
    pub r2: f64,
}

impl<'a> CharCurve<'a> {
    pub fn new(spec: &'a CurveSpec, table: &'a ThermoTable) -> Self {
        CharCurve { spec, table, r2: spec.theta(spec.x_b) }
    }

    /// `arcsin t - (rbar(t) - r2)`, increasing while `F1 > 4 i^2 w^2 t^2`.
    pub fn g(&self, t: f64) -> Result<f64> {
        Ok(t.asin() - self.table.lambda_integral(t)?)
    }

    /// `r2 + arctan psi'`, the right-hand side at parameter `s`.
    pub fn h(&self, s: f64) -> f64 {
        self.r2 + self.spec.dpsi_s(s).atan()
    }

    /// Hodograph variable `t~ = cos(omega)` at parameter `s`.
    pub fn t_of_s(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(0.0);
        }
        let target = self.h(s);
        if !(target >= 0.0) {
            return Err(Error::Hypothesis(format!(
                "characteristic data not bracketed at y = {}: psi' points the wrong way",
                self.spec.y_b - s * s
            )));
        }
        let t_max = self.table.t_max;
        if self.g(t_max)? < target {
            return Err(Error::TableRange { t: f64::NAN, t_max });
        }
        let mut err = None;
        let t = brent(
            |t| match self.g(t) {
                Ok(v) => v - target,
                Err(e) => {
                    err = Some(e);
                    f64::NAN
                }
            },
            0.0,
            t_max,
            0.0,
            "characteristic data t(s)",
        );
        match err {
            Some(e) => Err(e),
            None => t,
        }
    }

    /// Inverse of [`CharCurve::t_of_s`] on `[0, s_A]`.
    pub fn s_of_t(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        let target = self.g(t)?;
        let s_a = self.spec.s_a();
        // t = t~(y_A) lands on s_A up to roundoff in either direction.
        let at_end = self.h(s_a) - target;
        if at_end <= 0.0 && at_end.abs() <= 1e-12 * (1.0 + target.abs()) {
            return Ok(s_a);
        }
        brent(|s| self.h(s) - target, 0.0, s_a, 0.0, "characteristic data s(t)")
    }

    /// `lim t/s` at the corner.
    pub fn slope_at_corner(&self) -> f64 {
        let c2 = self.spec.coeff(2);
        -1.5 * self.spec.coeff(3) / (1.0 + c2 * c2)
    }

    /// `W` on the characteristic at a matched pair `(s, t = t~(s))`.
    pub fn b0_tilde_st(&self, s: f64, t: f64) -> Result<f64> {
        let st = self.table.state(t)?;
        let k = 4.0 * st.i * st.i * st.w * st.w;
        let margin = st.f1hat - k * t * t;
        if !(margin > 0.0) {
            return Err(Error::Hypothesis(format!("F1 - 4 i^2 w^2 t^2 = {margin} <= 0 at t = {t}")));
        }
        let dpsi = self.spec.dpsi_s(s);
        let t_over_s = if s > 0.0 { t / s } else { self.slope_at_corner() };
        Ok(0.5 * k * (-self.spec.s_d2psi_s(s)) * t_over_s / (st.varpi * (1.0 + dpsi * dpsi).powf(1.5) * margin))
    }

    /// `b~0(y)`.
    pub fn b0_tilde(&self, y: f64) -> Result<f64> {
        let s = self.spec.s_of_y(y);
        self.b0_tilde_st(s, self.t_of_s(s)?)
    }

    /// `b0bar(t) = b~0(y~(t))`.
    pub fn b0_bar(&self, t: f64) -> Result<f64> {
        self.b0_tilde_st(self.s_of_t(t)?, t)
    }

    /// `varpi~(y)`.
    pub fn varpi_tilde(&self, y: f64) -> Result<f64> {
        let t = self.t_of_s(self.spec.s_of_y(y))?;
        Ok((1.0 - t * t).sqrt())
    }

    /// `theta~(y) = arccot psi'(y) - arcsin varpi~(y)`.
    pub fn theta_tilde(&self, y: f64) -> Result<f64> {
        let s = self.spec.s_of_y(y);
        let t = self.t_of_s(s)?;
        Ok(FRAC_PI_2 - self.spec.dpsi_s(s).atan() - (1.0 - t * t).sqrt().asin())
    }

    /// Physical point of `AB` with hodograph variable `t`.
    pub fn point(&self, t: f64) -> Result<(f64, f64)> {
        let s = self.s_of_t(t)?;
        Ok((self.spec.psi_s(s), self.spec.y_b - s * s))
    }

    /// Chebyshev fit of `b0bar` on `[0, t0]`.
    fn fit_b0_bar(&self, t0: f64) -> Result<Chebyshev> {
        let nodes = Chebyshev::nodes(0.0, t0, FIT_ORDER);
        let vals = nodes.iter().map(|&t| self.b0_bar(t)).collect::<Result<Vec<_>>>()?;
        Ok(Chebyshev::from_values(0.0, t0, &vals))
    }
}

/// Fills `c_0..c_4` of `psi`: position, direction, `W(B) = -a^0(x_B)` in closed form
/// and `W_t(B) = a^1(x_B)` by Newton on `c_4`. With six or more coefficients `c_5` is
/// fitted jointly so that the data is also compatible at second order.
pub fn fit_corner(spec: &mut CurveSpec, table: &ThermoTable) -> Result<()> {
    if spec.psi.len() < 5 {
        spec.psi.resize(5, 0.0);
    }
    let r2 = spec.theta(spec.x_b);
    if !(r2.abs() < FRAC_PI_2) {
        return Err(Error::Corner(format!("flow angle at B = {r2} outside (-pi/2, pi/2)")));
    }
    let a0 = spec.a0_hat(spec.x_b)?;
    let a1 = spec.a1_hat(spec.x_b)?;
    if !(a0 < 0.0) {
        return Err(Error::Hypothesis(format!("a^0(x_B) = {a0} must be negative")));
    }
    let f0 = table.state(0.0)?.f_cap;
    let c2 = r2.tan();
    spec.psi[0] = spec.x_b;
    spec.psi[1] = 0.0;
    spec.psi[2] = c2;
    spec.psi[3] = -(16.0 * f0 * (-a0) * (1.0 + c2 * c2).powf(2.5) / 9.0).sqrt();
    let curv_target = second_order_target(spec, table)?;
    let n = if spec.psi.len() >= 6 { 2 } else { 1 };
    let mismatch = |c: &[f64; 2]| -> Result<[f64; 2]> {
        let mut trial = spec.clone();
        trial.psi[4] = c[0];
        if n == 2 {
            trial.psi[5] = c[1];
        }
        let (slope, curv) = corner_derivatives(&trial, table)?;
        Ok([slope - a1, (curv - curv_target) / (1.0 + curv_target.abs())])
    };
    let scale = spec.psi[3].abs();
    let mut c = [0.0, 0.0];
    let mut m = mismatch(&c)?;
    for _ in 0..30 {
        if m[0].abs() <= 1e-13 * (1.0 + a1.abs()) && (n == 1 || m[1].abs() <= 1e-12) {
            break;
        }
        let h = 1e-3 * scale;
        let mut jac = [[0.0; 2]; 2];
        for k in 0..n {
            let mut cp = c;
            cp[k] += h;
            let mp = mismatch(&cp)?;
            for (row, (a, b)) in jac.iter_mut().zip(mp.iter().zip(&m)) {
                row[k] = (a - b) / h;
            }
        }
        // The problem is affine in (c4, c5) up to the fit error, so this converges in a
        // few steps.
        if n == 1 {
            c[0] -= m[0] / jac[0][0];
        } else {
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if !(det.abs() > 0.0) {
                return Err(Error::Corner("singular corner fit in (c4, c5)".into()));
            }
            c[0] -= (jac[1][1] * m[0] - jac[0][1] * m[1]) / det;
            c[1] -= (-jac[1][0] * m[0] + jac[0][0] * m[1]) / det;
        }
        m = mismatch(&c)?;
    }
    if !(m[0].abs() <= 0.1 * CORNER_SLOPE_TOL) {
        return Err(Error::Corner(format!("corner fit left slope mismatch {:e}", m[0])));
    }
    // The curvature comes from a second derivative of the fit at its endpoint, whose
    // noise floor is near 1e-7, so it gets no safety factor.
    if n == 2 && !(m[1].abs() <= CORNER_CURVATURE_TOL) {
        return Err(Error::Corner(format!("corner fit left curvature mismatch {:e}", m[1])));
    }
    spec.psi[4] = c[0];
    if n == 2 {
        spec.psi[5] = c[1];
    }
    Ok(())
}

/// `(b0bar'(0), b0''(0))` with `b0 = 1/b0bar`, from the Chebyshev fit.
fn corner_derivatives(spec: &CurveSpec, table: &ThermoTable) -> Result<(f64, f64)> {
    let cc = CharCurve::new(spec, table);
    let t0 = cc.t_of_s(spec.s_a())?;
    let fit = cc.fit_b0_bar(t0)?;
    let d1 = fit.derivative();
    let (b, db, d2b) = (fit.eval(0.0), d1.eval(0.0), d1.derivative().eval(0.0));
    Ok((db, 2.0 * db * db / (b * b * b) - d2b / (b * b)))
}

/// `b0''(0)` making `b1` agree to order `v^2` with the limit of the sonic-side solution,
/// `U ~ -K2(0) a0(0) v^2 / (2 F(0))`. Without it `U` has a layer of width `chibar(v)`
/// along `chi = 0` across which `U_chi ~ 1/v`.
pub fn second_order_target(spec: &CurveSpec, table: &ThermoTable) -> Result<f64> {
    let c = table.coefficients(0.0)?;
    let a0 = -1.0 / spec.a0_hat(spec.x_b)?;
    Ok(-c.k2 * a0 / c.f_cap)
}

/// Homogenized boundary data of the Goursat problem, with everything it was built from.
#[derive(Debug, Clone)]
pub struct HodographBoundary {
    /// Curves after corner fitting.
    pub spec: CurveSpec,
    pub table: ThermoTable,
    /// `theta^(x_C)`.
    pub r1: f64,
    /// `theta^(x_B)`.
    pub r2: f64,
    /// `t~(y_A)`.
    pub t0: f64,
    /// `r2 - r1`, the extent of the sonic line in `chi`.
    pub chi_max: f64,
    pub eps0: f64,
    /// Hypotheses that only warn.
    pub warnings: Vec<String>,
    pub diagnostics: Vec<Diagnostic>,
    a0: Chebyshev,
    da0: Chebyshev,
    a1: Chebyshev,
    da1: Chebyshev,
    b0_bar: Chebyshev,
}

impl HodographBoundary {
    /// Validates the curves, fits the corner if requested and tabulates the data.
    pub fn build(spec: &CurveSpec, table: &ThermoTable) -> Result<HodographBoundary> {
        spec.check_shape()?;
        let mut spec = spec.clone();
        if spec.fit_corner {
            fit_corner(&mut spec, table)?;
        }
        let audit = audit(&spec, table);
        if let Some(d) = audit.diagnostics.iter().find(|d| !d.pass && !ADVISORY.contains(&d.name.as_str())) {
            return Err(match d.name.as_str() {
                n if n.starts_with("corner") => Error::Corner(format!("{}: {}", d.name, d.detail)),
                _ => Error::Hypothesis(format!("{}: {}", d.name, d.detail)),
            });
        }
        let (t0, eps0) = (audit.t0, audit.eps0);
        let r1 = spec.theta(spec.x_c);
        let r2 = spec.theta(spec.x_b);
        let chi_max = r2 - r1;
        let sonic = SonicLine { spec: &spec, r1, r2 };
        let a0_vals = Chebyshev::nodes(0.0, chi_max, FIT_ORDER)
            .iter()
            .map(|&c| Ok(-1.0 / sonic.a0_hat(r2 - c)?))
            .collect::<Result<Vec<_>>>()?;
        let a1_vals = Chebyshev::nodes(0.0, chi_max, FIT_ORDER)
            .iter()
            .map(|&c| {
                let a0 = sonic.a0_hat(r2 - c)?;
                Ok(sonic.a1_hat(r2 - c)? / (a0 * a0))
            })
            .collect::<Result<Vec<_>>>()?;
        let a0 = Chebyshev::from_values(0.0, chi_max, &a0_vals);
        let a1 = Chebyshev::from_values(0.0, chi_max, &a1_vals);
        let b0_bar = CharCurve::new(&spec, table).fit_b0_bar(t0)?;
        let warnings = audit
            .diagnostics
            .iter()
            .filter(|d| !d.pass)
            .map(|d| format!("{}: {}", d.name, d.detail))
            .collect();
        Ok(HodographBoundary {
            da0: a0.derivative(),
            da1: a1.derivative(),
            a0,
            a1,
            b0_bar,
            table: table.clone(),
            r1,
            r2,
            t0,
            chi_max,
            eps0,
            warnings,
            diagnostics: audit.diagnostics,
            spec,
        })
    }

    pub fn sonic(&self) -> SonicLine<'_> {
        SonicLine { spec: &self.spec, r1: self.r1, r2: self.r2 }
    }

    pub fn characteristic(&self) -> CharCurve<'_> {
        CharCurve { spec: &self.spec, table: &self.table, r2: self.r2 }
    }

    /// `a0(chi) = -1/a^0(r2 - chi)`.
    pub fn a0(&self, chi: f64) -> f64 {
        self.a0.eval(chi)
    }

    pub fn da0(&self, chi: f64) -> f64 {
        self.da0.eval(chi)
    }

    /// `a1(chi) = (a^1/a^0^2)(r2 - chi)`.
    pub fn a1(&self, chi: f64) -> f64 {
        self.a1.eval(chi)
    }

    pub fn da1(&self, chi: f64) -> f64 {
        self.da1.eval(chi)
    }

    /// `W` on `A'B'` as a function of `t`.
    pub fn b0_bar(&self, t: f64) -> f64 {
        self.b0_bar.eval(t)
    }

    pub fn db0_bar(&self, t: f64) -> f64 {
        self.b0_bar.derivative().eval(t)
    }

    /// `b0 = 1/b0bar`.
    pub fn b0(&self, v: f64) -> f64 {
        1.0 / self.b0_bar.eval(v)
    }

    /// `b1(v) = b0(v) - a0(0) + a1(0) v`; vanishes to second order at 0.
    /// `b0(0) = a0(0)` holds to the audited corner tolerance, and `b0(0)` stands in
    /// for `a0(0)` so that `b1(0) = 0` exactly.
    pub fn b1(&self, v: f64) -> f64 {
        self.b0(v) - self.b0(0.0) + self.a1(0.0) * v
    }

    /// `rbar(t) = r2 + int_0^t s^2 sqrt(1 - s^2)/F ds`, the image of `AB`.
    pub fn r_bar(&self, t: f64) -> Result<f64> {
        Ok(self.r2 + self.table.lambda_integral(t)?)
    }

    /// `chibar(v) = 2 (rbar(v) - r2)`, the `lambda_+` curve through the origin.
    pub fn chi_bar(&self, v: f64) -> Result<f64> {
        Ok(2.0 * self.table.lambda_integral(v)?)
    }
}

/// The sonic curve in hodograph form, `r = theta^(x)` on `[r1, r2]`.
#[derive(Clone, Copy)]
pub struct SonicLine<'a> {
    pub spec: &'a CurveSpec,
    pub r1: f64,
    pub r2: f64,
}

impl<'a> SonicLine<'a> {
    /// `x^(r)`, inverse of the strictly decreasing `theta^`.
    pub fn x_hat(&self, r: f64) -> Result<f64> {
        let spec = self.spec;
        if r == self.r2 {
            return Ok(spec.x_b);
        }
        brent(|x| spec.theta(x) - r, spec.x_b, spec.x_c, 0.0, "sonic inverse x^(r)")
    }

    pub fn a0_hat(&self, r: f64) -> Result<f64> {
        self.spec.a0_hat(self.x_hat(r)?)
    }

    pub fn a1_hat(&self, r: f64) -> Result<f64> {
        self.spec.a1_hat(self.x_hat(r)?)
    }

    /// Physical point of the sonic curve with flow angle `r`.
    pub fn point(&self, r: f64) -> Result<(f64, f64)> {
        let x = self.x_hat(r)?;
        Ok((x, self.spec.phi(x)))
    }
}

const INTERVAL_INEQUALITY: &str = "characteristic-monotonicity-interval";
const SECOND_ORDER: &str = "second-order-compatibility";
/// Diagnostics reported as warnings rather than errors.
const ADVISORY: [&str; 2] = [INTERVAL_INEQUALITY, SECOND_ORDER];

/// Result of the hypothesis scan.
#[derive(Debug, Clone)]
pub struct Audit {
    pub diagnostics: Vec<Diagnostic>,
    pub eps0: f64,
    pub t0: f64,
}

/// Evaluates every hypothesis on the curves with its measured margin; never fails.
pub fn audit(spec: &CurveSpec, table: &ThermoTable) -> Audit {
    let mut out = Vec::new();
    let xs: Vec<f64> = (0..SCAN).map(|k| spec.x_b + (spec.x_c - spec.x_b) * k as f64 / (SCAN - 1) as f64).collect();
    let mesh_max = |f: &dyn Fn(f64) -> f64| xs.iter().map(|&x| f(x)).fold(f64::NEG_INFINITY, f64::max);

    let max_dtheta = mesh_max(&|x| spec.dtheta(x));
    out.push(Diagnostic::new("theta-hat-decreasing", max_dtheta < 0.0, -max_dtheta, format!("max theta^' = {max_dtheta:e}")));

    let min_den = -mesh_max(&|x| -spec.sonic_denominator(x));
    out.push(Diagnostic::new(
        "sonic-transversality",
        min_den > 0.0,
        min_den,
        format!("min (phi' sin theta^ + cos theta^) = {min_den:e}"),
    ));

    let max_a0 = if min_den > 0.0 { mesh_max(&|x| spec.a0_hat(x).unwrap_or(f64::NAN)) } else { f64::NAN };
    out.push(Diagnostic::new("a0-hat-negative", max_a0 < 0.0, -max_a0, format!("max a^0 = {max_a0:e}")));

    let pos = (spec.psi.first().copied().unwrap_or(f64::NAN) - spec.x_b).abs();
    out.push(Diagnostic::new("corner-position", pos <= 1e-12, -pos, format!("|psi(y_B) - x_B| = {pos:e}")));

    let r2 = spec.theta(spec.x_b);
    let dir = spec.coeff(1).abs().max((spec.coeff(2) - r2.tan()).abs());
    out.push(Diagnostic::new(
        "corner-direction",
        dir <= 1e-12,
        -dir,
        format!("psi must leave B along the Mach direction (|c1|, |c2 - tan r2| <= {dir:e})"),
    ));

    let cc = CharCurve::new(spec, table);
    let s_a = spec.s_a();
    let ss: Vec<f64> = (1..SCAN).map(|k| s_a * k as f64 / (SCAN - 1) as f64).collect();
    let max_d2psi = ss.iter().map(|&s| spec.s_d2psi_s(s) / s).fold(f64::NEG_INFINITY, f64::max);
    let concavity = |eps0: f64| {
        Diagnostic::new("psi-concavity", max_d2psi <= eps0, eps0 - max_d2psi, format!("max psi'' = {max_d2psi:e} against eps0"))
    };
    let t0 = if dir <= 1e-12 { cc.t_of_s(s_a) } else { Err(Error::Corner("corner direction".into())) };
    let t0 = match t0 {
        Ok(t0) => {
            out.push(Diagnostic::new(
                "characteristic-bracket",
                true,
                table.t_max - t0,
                format!("t~(y_A) = {t0} within table range {}", table.t_max),
            ));
            t0
        }
        Err(e) => {
            out.push(Diagnostic::new("characteristic-bracket", false, f64::NAN, e.to_string()));
            // eps0 without the b~0 term, which needs the bracket.
            out.push(concavity((-max_a0).min(-max_dtheta)));
            return Audit { diagnostics: out, eps0: f64::NAN, t0: f64::NAN };
        }
    };


    let mut min_b0 = f64::INFINITY;
    let mut worst_interval = f64::INFINITY;
    let mut b0_err = None;
    for &s in std::iter::once(&0.0).chain(ss.iter()) {
        let r = cc.t_of_s(s).and_then(|t| {
            let st = table.state(t)?;
            let k = 4.0 * st.i * st.i * st.w * st.w;
            worst_interval = worst_interval.min(1.0 - k * t * t / st.f1hat);
            cc.b0_tilde_st(s, t)
        });
        match r {
            Ok(b) => min_b0 = min_b0.min(b),
            Err(e) => {
                b0_err = Some(e.to_string());
                break;
            }
        }
    }
    out.push(Diagnostic::new(
        "b0-tilde-positive",
        b0_err.is_none() && min_b0 > 0.0,
        min_b0,
        b0_err.unwrap_or_else(|| format!("min b~0 = {min_b0:e}")),
    ));

    let end = table.state(t0).map(|st| 1.0 / t0 - 4.0 * st.i * st.i * st.w * st.w * t0 / st.f1hat);
    let end = end.unwrap_or(f64::NAN);
    out.push(Diagnostic::new(
        "characteristic-monotonicity-endpoint",
        end > 0.0,
        end,
        format!("1/t0 - 4 i^2 w^2 t0 / F1 = {end:e} at y_A"),
    ));
    out.push(Diagnostic::new(
        INTERVAL_INEQUALITY,
        worst_interval > 0.0,
        worst_interval,
        format!("min (1 - 4 i^2 w^2 t^2 / F1) on [y_A, y_B] = {worst_interval:e}"),
    ));

    let a0_b = spec.a0_hat(spec.x_b).unwrap_or(f64::NAN);
    let b0_b = cc.b0_tilde_st(0.0, 0.0).unwrap_or(f64::NAN);
    let gap = (a0_b + b0_b).abs();
    out.push(Diagnostic::new(
        "corner-compatibility",
        gap <= CORNER_TOL,
        CORNER_TOL - gap,
        format!("|a^0(x_B) + b~0(y_B)| = {gap:e}"),
    ));

    let slope_gap = cc
        .fit_b0_bar(t0)
        .map(|f| (f.derivative().eval(0.0) - spec.a1_hat(spec.x_b).unwrap_or(f64::NAN)).abs())
        .unwrap_or(f64::NAN);
    out.push(Diagnostic::new(
        "corner-compatibility-slope",
        slope_gap <= CORNER_SLOPE_TOL,
        CORNER_SLOPE_TOL - slope_gap,
        format!("|b0bar'(0) - a^1(r2)| = {slope_gap:e}"),
    ));

    let curv_gap = match (corner_derivatives(spec, table), second_order_target(spec, table)) {
        (Ok((_, c)), Ok(target)) => (c - target).abs() / (1.0 + target.abs()),
        _ => f64::NAN,
    };
    out.push(Diagnostic::new(
        SECOND_ORDER,
        curv_gap <= CORNER_CURVATURE_TOL,
        CORNER_CURVATURE_TOL - curv_gap,
        format!("relative |b0''(0) + K2 a0 / F| at the corner = {curv_gap:e}"),
    ));

    let eps0 = (-max_a0).min(min_b0).min(-max_dtheta);
    out.push(Diagnostic::new("eps0-positive", eps0 > 0.0, eps0, format!("eps0 = {eps0:e}")));
    out.push(concavity(eps0));
    out.push(Diagnostic::new(
        "smoothness",
        true,
        0.0,
        "phi and theta^ polynomial; psi polynomial in sqrt(y_B - y), smooth on [y_A, y_B)",
    ));
    Audit { diagnostics: out, eps0, t0 }
}
