//! Chebyshev interpolation on an interval, with derivative and antiderivative series.

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct Chebyshev {
    a: f64,
    b: f64,
    c: Vec<f64>,
}

impl Chebyshev {
    /// Interpolates `f` at `n` Chebyshev points of the first kind on `[a, b]`.
    pub fn fit<F: FnMut(f64) -> f64>(a: f64, b: f64, n: usize, mut f: F) -> Self {
        let vals: Vec<f64> = (0..n)
            .map(|k| {
                let x = (PI * (k as f64 + 0.5) / n as f64).cos();
                f(0.5 * (b - a) * x + 0.5 * (b + a))
            })
            .collect();
        Self::from_values(a, b, &vals)
    }

    /// Same as [`Chebyshev::fit`] for values already sampled at the nodes.
    pub fn from_values(a: f64, b: f64, vals: &[f64]) -> Self {
        let n = vals.len();
        let c = (0..n)
            .map(|j| {
                let s: f64 = vals
                    .iter()
                    .enumerate()
                    .map(|(k, v)| v * (PI * j as f64 * (k as f64 + 0.5) / n as f64).cos())
                    .sum();
                let s = 2.0 * s / n as f64;
                if j == 0 {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        Chebyshev { a, b, c }
    }

    /// Node abscissae used by [`Chebyshev::fit`].
    pub fn nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| 0.5 * (b - a) * (PI * (k as f64 + 0.5) / n as f64).cos() + 0.5 * (b + a))
            .collect()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let u = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &cj in self.c.iter().skip(1).rev() {
            let t = 2.0 * u * b1 - b2 + cj;
            b2 = b1;
            b1 = t;
        }
        u * b1 - b2 + self.c[0]
    }

    pub fn derivative(&self) -> Chebyshev {
        let n = self.c.len();
        if n < 2 {
            return Chebyshev { a: self.a, b: self.b, c: vec![0.0] };
        }
        let mut d = vec![0.0; n];
        for j in (0..n - 1).rev() {
            let next = if j + 2 < n { d[j + 2] } else { 0.0 };
            d[j] = next + 2.0 * (j as f64 + 1.0) * self.c[j + 1];
        }
        d[0] *= 0.5;
        d.truncate(n - 1);
        let scale = 2.0 / (self.b - self.a);
        for v in &mut d {
            *v *= scale;
        }
        Chebyshev { a: self.a, b: self.b, c: d }
    }

    /// Antiderivative vanishing at the left endpoint `a`.
    pub fn integral(&self) -> Chebyshev {
        let n = self.c.len();
        let mut c = self.c.clone();
        c[0] *= 2.0;
        let mut out = vec![0.0; n + 1];
        for j in 1..=n {
            let prev = c[j - 1];
            let next = if j + 1 < n { c[j + 1] } else { 0.0 };
            out[j] = (prev - next) / (2.0 * j as f64);
        }
        let scale = 0.5 * (self.b - self.a);
        for v in &mut out {
            *v *= scale;
        }
        let mut res = Chebyshev { a: self.a, b: self.b, c: out };
        let at_a = res.eval(self.a);
        res.c[0] -= at_a;
        res
    }

    /// Magnitude of the trailing coefficients, a cheap truncation estimate.
    pub fn tail(&self) -> f64 {
        let n = self.c.len();
        self.c[n.saturating_sub(3)..].iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_exp() {
        let c = Chebyshev::fit(0.0, 0.3, 24, f64::exp);
        for k in 0..50 {
            let x = 0.3 * k as f64 / 49.0;
            assert!((c.eval(x) - x.exp()).abs() < 1e-14);
        }
        assert!(c.tail() < 1e-14);
    }

    #[test]
    fn derivative_and_integral() {
        let c = Chebyshev::fit(-0.5, 1.5, 30, |x| (2.0 * x).sin());
        let d = c.derivative();
        let i = c.integral();
        for k in 0..20 {
            let x = -0.5 + 2.0 * k as f64 / 19.0;
            assert!((d.eval(x) - 2.0 * (2.0 * x).cos()).abs() < 1e-12);
            let exact = (-(2.0 * x).cos() + (-1.0f64).cos()) / 2.0;
            assert!((i.eval(x) - exact).abs() < 1e-14);
        }
    }
}
