//! Inverse hodograph map: `(t, r) -> (x, y)` by integration along characteristics,
//! its numerical inverse, and the physical fields on the recovered patch.
//!
//! Along the negative characteristic `dr/dt = -t^2 sqrt(1 - t^2)/F`
//!
//! ```text
//! dx/dt = -t cos(beta)/(2 F Z),  dy/dt = -t sin(beta)/(2 F Z),  beta = r - omega,
//! ```
//!
//! and along the positive one (`dr/dt = +t^2 sqrt(1 - t^2)/F`) the same with `alpha = r + omega`
//! and `W` in place of `Z`. Here `t = cos(omega)`.

use crate::error::{Error, Result};
use crate::hodograph_solver::{tau1_of, WzField};
use serde::Serialize;

/// Bound on the Richardson estimate of a traced point.
pub const TRACE_TOL: f64 = 1e-8;
/// Newton stops once the image is this close to the query.
pub const NEWTON_TOL: f64 = 1e-12;
const NEWTON_ITERS: usize = 50;

/// Which boundary the negative characteristic through a point starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    /// From the sonic curve.
    Sonic = 1,
    /// From the characteristic boundary `AB`.
    Characteristic = 2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForwardMapSample {
    pub t: f64,
    pub r: f64,
    pub x: f64,
    pub y: f64,
    /// `d(x, y)/d(t, r)`.
    pub j: f64,
    pub region: Region,
    /// Richardson estimate of the integration error.
    pub err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Trace {
    pub x: f64,
    pub y: f64,
    pub region: Region,
    pub err: f64,
}

/// Fixed-step integrator settings. Simpson's rule is fourth-order Runge-Kutta for a
/// right-hand side independent of the state, which is the case once the path is known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeOptions {
    /// Target step; each path uses the nearest even step count.
    pub h_ode: f64,
}

impl OdeOptions {
    /// Half a solver cell.
    pub fn for_field(field: &WzField) -> OdeOptions {
        OdeOptions { h_ode: 0.5 * field.grid.hv() }
    }
}

/// Composite Simpson of a vector integrand with the Richardson estimate from the
/// doubled step on the same nodes.
fn simpson2<F: FnMut(f64) -> Result<(f64, f64)>>(mut f: F, a: f64, b: f64, h: f64) -> Result<((f64, f64), f64)> {
    if b <= a {
        return Ok(((0.0, 0.0), 0.0));
    }
    // A multiple of 4 so the doubled step is also a Simpson rule.
    let n = (((b - a) / h).ceil() as usize).max(4).div_ceil(4) * 4;
    let step = (b - a) / n as f64;
    let vals = (0..=n).map(|k| f(if k == n { b } else { a + k as f64 * step })).collect::<Result<Vec<_>>>()?;
    let rule = |stride: usize| {
        let m = n / stride;
        let hh = step * stride as f64;
        let (mut sx, mut sy) = (0.0, 0.0);
        for k in 0..=m {
            let w = if k == 0 || k == m { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            sx += w * vals[k * stride].0;
            sy += w * vals[k * stride].1;
        }
        (sx * hh / 3.0, sy * hh / 3.0)
    };
    let fine = rule(1);
    let coarse = rule(2);
    let err = ((fine.0 - coarse.0).abs()).max((fine.1 - coarse.1).abs()) / 15.0;
    Ok((fine, err))
}

/// Image of `(t^, r^)` under the inverse hodograph map.
pub fn trace_xy(field: &WzField, t_hat: f64, r_hat: f64, opts: OdeOptions) -> Result<Trace> {
    let hb = &field.hb;
    let chi_hat = hb.r_bar(t_hat)? - r_hat;
    trace_vchi(field, t_hat, chi_hat, opts)
}

/// Same as [`trace_xy`] in solver coordinates `chi = rbar(t) - r`.
pub fn trace_vchi(field: &WzField, t_hat: f64, chi_hat: f64, opts: OdeOptions) -> Result<Trace> {
    let hb = &field.hb;
    let delta = field.grid.delta;
    let slack = 1e-12 * delta;
    if !(t_hat >= -slack && t_hat <= delta + slack && chi_hat >= -slack && chi_hat <= delta + slack) {
        return Err(Error::Domain(format!("(t, chi) = ({t_hat}, {chi_hat}) outside the solved patch [0, {delta}]^2")));
    }
    let (t_hat, chi_hat) = (t_hat.clamp(0.0, delta), chi_hat.clamp(0.0, delta));
    let cb_hat = hb.chi_bar(t_hat)?;
    let (t_start, (x0, y0), region) = match tau1_of(hb, t_hat, chi_hat)? {
        None => {
            let r0 = hb.r2 - (chi_hat - cb_hat);
            (0.0, hb.sonic().point(r0)?, Region::Sonic)
        }
        Some(t1) => (t1, hb.characteristic().point(t1)?, Region::Characteristic),
    };
    let table = &hb.table;
    let ((dx, dy), err) = simpson2(
        |t| {
            // The path stays within one solver cell of chi_hat.
            let chi = (chi_hat - (cb_hat - hb.chi_bar(t)?)).clamp(0.0, delta);
            let r = hb.r_bar(t)? - chi;
            let (_, z) = field.wz_vchi(t, chi)?;
            if !(z < 0.0) {
                return Err(Error::Positivity(format!("Z = {z} >= 0 at t = {t}, r = {r}")));
            }
            let f = table.coefficients(t)?.f_cap;
            let varpi = (1.0 - t * t).sqrt();
            let (cb, sb) = (t * r.cos() + varpi * r.sin(), t * r.sin() - varpi * r.cos());
            let k = -t / (2.0 * f * z);
            Ok((k * cb, k * sb))
        },
        t_start,
        t_hat,
        opts.h_ode,
    )?;
    Ok(Trace { x: x0 + dx, y: y0 + dy, region, err })
}

/// Image of `(t^, rbar(t^))` reached along the positive characteristic from the corner
/// `B`. It lies on `x = psi(y)` when the recovered field carries the `AB` data.
pub fn trace_plus(field: &WzField, t_hat: f64, opts: OdeOptions) -> Result<Trace> {
    let hb = &field.hb;
    let table = &hb.table;
    let ((dx, dy), err) = simpson2(
        |t| {
            let r = hb.r_bar(t)?;
            let (w, _) = field.wz_vchi(t, 0.0)?;
            if !(w > 0.0) {
                return Err(Error::Positivity(format!("W = {w} <= 0 at t = {t}")));
            }
            let f = table.coefficients(t)?.f_cap;
            let varpi = (1.0 - t * t).sqrt();
            let (ca, sa) = (t * r.cos() - varpi * r.sin(), t * r.sin() + varpi * r.cos());
            let k = -t / (2.0 * f * w);
            Ok((k * ca, k * sa))
        },
        0.0,
        t_hat,
        opts.h_ode,
    )?;
    Ok(Trace { x: hb.spec.x_b + dx, y: hb.spec.y_b + dy, region: Region::Characteristic, err })
}

/// `j = t/(4 F W Z)`.
pub fn jacobian_j(field: &WzField, t: f64, r: f64) -> Result<f64> {
    let (w, z) = field.wz(t, r)?;
    let f = field.hb.table.coefficients(t)?.f_cap;
    Ok(t / (4.0 * f * w * z))
}

/// Partial derivatives `[[x_t, x_r], [y_t, y_r]]` of the inverse map from the field.
pub fn map_derivatives(field: &WzField, t: f64, r: f64) -> Result<[[f64; 2]; 2]> {
    let (w, z) = field.wz(t, r)?;
    let f = field.hb.table.coefficients(t)?.f_cap;
    let varpi = (1.0 - t * t).sqrt();
    let (p, q) = (w + z, w - z);
    let (s, c) = r.sin_cos();
    let d = 4.0 * f * w * z;
    let e = 4.0 * t * varpi * w * z;
    Ok([
        [-t * (t * c * p + varpi * s * q) / d, (t * c * q + varpi * s * p) / e],
        [-t * (t * s * p - varpi * c * q) / d, (t * s * q - varpi * c * p) / e],
    ])
}

pub fn forward_sample(field: &WzField, t: f64, chi: f64, opts: OdeOptions) -> Result<ForwardMapSample> {
    let tr = trace_vchi(field, t, chi, opts)?;
    let r = field.hb.r_bar(t)? - chi;
    Ok(ForwardMapSample { t, r, x: tr.x, y: tr.y, j: jacobian_j(field, t, r)?, region: tr.region, err: tr.err })
}

/// Forward images of a structured `(t, chi)` lattice; seeds for the inversion.
#[derive(Debug, Clone)]
pub struct ForwardMap {
    pub n_t: usize,
    pub n_chi: usize,
    pub samples: Vec<ForwardMapSample>,
    pub opts: OdeOptions,
    /// Queries converging below this `t` are flagged as near-sonic.
    pub t_floor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inverse {
    pub t: f64,
    pub r: f64,
    pub residual: f64,
    pub iterations: usize,
    /// `t < t_floor`: the map is nearly singular there.
    pub near_sonic: bool,
}

impl ForwardMap {
    pub fn build(field: &WzField, n_t: usize, n_chi: usize, opts: OdeOptions) -> Result<ForwardMap> {
        let d = field.grid.delta;
        let mut samples = Vec::with_capacity(n_t * n_chi);
        for i in 0..n_t {
            for j in 0..n_chi {
                let t = d * i as f64 / (n_t - 1) as f64;
                let chi = d * j as f64 / (n_chi - 1) as f64;
                samples.push(forward_sample(field, t, chi, opts)?);
            }
        }
        Ok(ForwardMap { n_t, n_chi, samples, opts, t_floor: field.grid.hv() })
    }

    /// `(t, r)` with `(x, y)(t, r) = (x, y)`, by Newton from the nearest sample.
    pub fn invert(&self, field: &WzField, x: f64, y: f64) -> Result<Inverse> {
        let hb = &field.hb;
        let d = field.grid.delta;
        let seed = self
            .samples
            .iter()
            .filter(|s| s.t > 0.0)
            .min_by(|a, b| ((a.x - x).hypot(a.y - y)).total_cmp(&(b.x - x).hypot(b.y - y)))
            .ok_or_else(|| Error::Inverse("no forward samples".into()))?;
        let (mut t, mut chi) = (seed.t, hb.r_bar(seed.t)? - seed.r);
        let mut res = f64::INFINITY;
        for it in 0..NEWTON_ITERS {
            let tr = trace_vchi(field, t, chi, self.opts)?;
            let (ex, ey) = (tr.x - x, tr.y - y);
            res = ex.hypot(ey);
            if res <= NEWTON_TOL {
                let r = hb.r_bar(t)? - chi;
                return Ok(Inverse { t, r, residual: res, iterations: it, near_sonic: t < self.t_floor });
            }
            // Derivatives in (t, chi): d/dt|chi = d/dt|r + rbar' d/dr.
            let r = hb.r_bar(t)? - chi;
            let tt = t.max(1e-3 * self.t_floor);
            let m = map_derivatives(field, tt, r)?;
            let lam = tt * tt * (1.0 - tt * tt).sqrt() / hb.table.coefficients(tt)?.f_cap;
            let a = [[m[0][0] + lam * m[0][1], -m[0][1]], [m[1][0] + lam * m[1][1], -m[1][1]]];
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            if !(det.abs() > 0.0) || !det.is_finite() {
                return Err(Error::Inverse(format!("singular map at t = {t}")));
            }
            let dt = (a[1][1] * ex - a[0][1] * ey) / det;
            let dc = (-a[1][0] * ex + a[0][0] * ey) / det;
            let (nt, nc) = (t - dt, chi - dc);
            if nt < -0.25 * d || nt > 1.25 * d || nc < -0.25 * d || nc > 1.25 * d {
                return Err(Error::Inverse(format!("query ({x}, {y}) outside the patch")));
            }
            (t, chi) = (nt.clamp(0.0, d), nc.clamp(0.0, d));
        }
        Err(Error::Inverse(format!("Newton stalled at residual {res:e} for ({x}, {y})")))
    }
}

/// Physical state at one point of the patch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalRecord {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub varpi: f64,
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub q: f64,
    #[serde(rename = "M")]
    pub mach: f64,
}

/// Fields at `(t, r)`; `(x, y)` are left at NaN for the caller to fill.
pub fn evaluate_fields(table: &crate::thermo::ThermoTable, t: f64, r: f64) -> Result<PhysicalRecord> {
    let s = table.state(t)?;
    let varpi = (1.0 - t * t).sqrt();
    let k = s.w * s.gamma_w / (s.gamma * varpi);
    Ok(PhysicalRecord {
        x: f64::NAN,
        y: f64::NAN,
        theta: r,
        varpi,
        t,
        u: k * r.cos(),
        v: k * r.sin(),
        w: s.w,
        q: s.q,
        mach: s.mach,
    })
}

/// Physical records at the images of a `(t, chi)` lattice.
pub fn physical_lattice(field: &WzField, n_t: usize, n_chi: usize, opts: OdeOptions) -> Result<Vec<PhysicalRecord>> {
    let fm = ForwardMap::build(field, n_t, n_chi, opts)?;
    fm.samples
        .iter()
        .map(|s| {
            let mut rec = evaluate_fields(&field.hb.table, s.t, s.r)?;
            rec.x = s.x;
            rec.y = s.y;
            Ok(rec)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{CurveSpec, HodographBoundary};
    use crate::hodograph_solver::{recover_wz, solve, SolveOptions, SolverGrid};
    use crate::thermo::{canonical_law, canonical_params, Thermo, ThermoTable};

    fn field() -> WzField {
        let tb = ThermoTable::build(Thermo::new(canonical_law(), &canonical_params()).unwrap(), 0.3).unwrap();
        let hb = HodographBoundary::build(&CurveSpec::canonical(), &tb).unwrap();
        let g = SolverGrid::new(0.1, 17, 17).unwrap();
        let sol = solve(&hb, g, &SolveOptions::default()).unwrap();
        recover_wz(&sol, &hb).unwrap()
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let ((a, b), e) = simpson2(|t| Ok((t * t * t, 1.0)), 0.0, 2.0, 0.3).unwrap();
        assert!((a - 4.0).abs() < 1e-13 && (b - 2.0).abs() < 1e-14 && e < 1e-13);
    }

    #[test]
    fn corner_and_sonic_anchors() {
        let f = field();
        let o = OdeOptions::for_field(&f);
        let b = trace_xy(&f, 0.0, f.hb.r2, o).unwrap();
        assert!(b.x.abs() < 1e-14 && b.y.abs() < 1e-14);
        let r = f.hb.r2 - 0.05;
        let s = trace_xy(&f, 0.0, r, o).unwrap();
        let (x, y) = f.hb.sonic().point(r).unwrap();
        assert_eq!((s.x, s.y, s.region), (x, y, Region::Sonic));
    }

    #[test]
    fn points_on_ab_are_anchored_there() {
        let f = field();
        let o = OdeOptions::for_field(&f);
        let t = 0.06;
        let p = trace_vchi(&f, t, 0.0, o).unwrap();
        let (x, y) = f.hb.characteristic().point(t).unwrap();
        assert_eq!(p.region, Region::Characteristic);
        assert!((p.x - x).abs() < 1e-15 && (p.y - y).abs() < 1e-15);
    }

    #[test]
    fn jacobian_sign_and_degeneracy() {
        let f = field();
        assert_eq!(jacobian_j(&f, 0.0, f.hb.r2 - 0.02).unwrap(), 0.0);
        for k in 1..10 {
            assert!(jacobian_j(&f, 0.01 * k as f64, f.hb.r_bar(0.01 * k as f64).unwrap() - 0.03).unwrap() < 0.0);
        }
    }

    #[test]
    fn derivative_determinant_is_j() {
        let f = field();
        let (t, r) = (0.05, f.hb.r_bar(0.05).unwrap() - 0.04);
        let m = map_derivatives(&f, t, r).unwrap();
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let j = jacobian_j(&f, t, r).unwrap();
        assert!((det - j).abs() < 1e-12 * j.abs(), "{det} {j}");
    }

    #[test]
    fn sonic_fields() {
        let f = field();
        let rec = evaluate_fields(&f.hb.table, 0.0, 0.0).unwrap();
        assert!((rec.mach - 1.0).abs() < 1e-12);
        assert!((rec.u - rec.q).abs() < 1e-12 && rec.v == 0.0);
        let rec = evaluate_fields(&f.hb.table, 0.07, -0.1).unwrap();
        assert!((rec.u.hypot(rec.v) - rec.q).abs() < 1e-10);
    }
}
