//! Piecewise-cubic Lagrange interpolation on uniform grids.
//!
//! Stencils are centred where possible and shifted one-sided at the edges, so the
//! interpolant is fourth-order accurate on the whole grid.

/// Stencil start and the four Lagrange weights for `x` on `x0 + k h`, `k < n`.
#[inline]
pub fn cubic_weights(x0: f64, h: f64, n: usize, x: f64) -> (usize, [f64; 4]) {
    debug_assert!(n >= 4);
    let s = (x - x0) / h;
    let cell = (s.floor() as isize).clamp(0, n as isize - 2);
    let start = (cell - 1).clamp(0, n as isize - 4) as usize;
    let u = s - start as f64;
    // Nodes at 0, 1, 2, 3 in stencil coordinates.
    let w0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
    let w1 = u * (u - 2.0) * (u - 3.0) / 2.0;
    let w2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
    let w3 = u * (u - 1.0) * (u - 2.0) / 6.0;
    (start, [w0, w1, w2, w3])
}

/// Interpolates samples `y[k] = f(x0 + k h)` at `x`.
pub fn cubic(x0: f64, h: f64, y: &[f64], x: f64) -> f64 {
    let (s, w) = cubic_weights(x0, h, y.len(), x);
    w[0] * y[s] + w[1] * y[s + 1] + w[2] * y[s + 2] + w[3] * y[s + 3]
}

/// Row-major uniform 2-D grid; `ny` rows along the first axis, `nx` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2 {
    pub y0: f64,
    pub hy: f64,
    pub ny: usize,
    pub x0: f64,
    pub hx: f64,
    pub nx: usize,
}

impl Grid2 {
    /// Tensor-product cubic interpolation of `data[i * nx + j]` at `(y, x)`.
    pub fn interp(&self, data: &[f64], y: f64, x: f64) -> f64 {
        let (si, wi) = cubic_weights(self.y0, self.hy, self.ny, y);
        let (sj, wj) = cubic_weights(self.x0, self.hx, self.nx, x);
        let mut acc = 0.0;
        for (a, wa) in wi.iter().enumerate() {
            let row = &data[(si + a) * self.nx + sj..(si + a) * self.nx + sj + 4];
            acc += wa * (wj[0] * row[0] + wj[1] * row[1] + wj[2] * row[2] + wj[3] * row[3]);
        }
        acc
    }
}
