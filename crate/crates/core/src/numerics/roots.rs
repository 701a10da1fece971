//! Bracketed scalar root finding (bisection-secant hybrid in Brent's form).

use crate::error::{Error, Result};

/// Absolute x-tolerance used by every root solve in the crate.
pub const ROOT_TOL: f64 = 1e-12;

const MAX_ITERS: usize = 200;

/// Finds `x` in `[a, b]` with `f(x) = 0`, given a sign change on the bracket.
/// Terminates when the bracket is below `xtol + 4 eps |x|` or `f(x) == 0`.
pub fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    xtol: f64,
    what: &'static str,
) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::NotBracketed { a, b, fa, fb, what });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITERS {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::RootBudget { what });
        }
    }
    Err(Error::RootBudget { what })
}

/// Expands `[a, b]` geometrically towards `limit` until `f` changes sign.
/// Returns the bracket or the last tried interval as an error.
pub fn expand_bracket<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    mut b: f64,
    limit: f64,
    what: &'static str,
) -> Result<(f64, f64)> {
    let fa = f(a);
    let mut fb = f(b);
    let mut step = b - a;
    for _ in 0..200 {
        if fa.signum() != fb.signum() {
            return Ok((a, b));
        }
        if (b - limit).abs() <= f64::EPSILON * limit.abs().max(1.0) {
            break;
        }
        step *= 2.0;
        b = if limit > a { (a + step).min(limit) } else { (a + step).max(limit) };
        fb = f(b);
    }
    Err(Error::NotBracketed { a, b, fa, fb, what })
}
