//! Picard iteration for the homogenized Goursat problem on `[0, delta]^2` in
//! `(upsilon, chi)` and recovery of `(W, Z)`.
//!
//! `V` is transported along `chi = const` (`lambda_- = 0`), `U` along
//! `chi_+(v) = zeta - (chibar(tau) - chibar(v))`. A `chi_+` curve either reaches the
//! sonic line `v = 0` (`zeta >= chibar(tau)`) or the characteristic `chi = 0` at
//! `tau1`, where `U = b1(tau1)`.

use crate::boundary::HodographBoundary;
use crate::error::{Error, Result};
use crate::numerics::interp::{cubic, Grid2};
use crate::numerics::brent;
use crate::thermo::ThermoTable;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Iterations whose envelopes are recorded.
pub const ENVELOPE_ITERS: usize = 20;
/// Bound on the contraction prerequisite `1/4 + delta^2 K_delta / 2`.
pub const CONTRACTION_BOUND: f64 = 2.0 / 3.0;
/// Contraction ratio above which a run counts as failing.
pub const RATIO_LIMIT: f64 = 0.7;

/// Uniform grid on `[0, delta]^2`; row `i` is `v = i hv`, column `j` is `chi = j hchi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverGrid {
    pub delta: f64,
    pub n_v: usize,
    pub n_chi: usize,
}

impl SolverGrid {
    pub fn new(delta: f64, n_v: usize, n_chi: usize) -> Result<SolverGrid> {
        if !(delta > 0.0 && delta.is_finite()) || n_v < 5 || n_chi < 5 {
            return Err(Error::Config(format!("grid needs delta > 0 and at least 5 nodes per axis (got {delta}, {n_v}x{n_chi})")));
        }
        Ok(SolverGrid { delta, n_v, n_chi })
    }

    pub fn hv(&self) -> f64 {
        self.delta / (self.n_v - 1) as f64
    }

    pub fn hchi(&self) -> f64 {
        self.delta / (self.n_chi - 1) as f64
    }

    pub fn v(&self, i: usize) -> f64 {
        // The last node is exactly delta.
        if i + 1 == self.n_v {
            self.delta
        } else {
            i as f64 * self.hv()
        }
    }

    pub fn chi(&self, j: usize) -> f64 {
        if j + 1 == self.n_chi {
            self.delta
        } else {
            j as f64 * self.hchi()
        }
    }

    pub fn len(&self) -> usize {
        self.n_v * self.n_chi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn interp_grid(&self) -> Grid2 {
        Grid2 { y0: 0.0, hy: self.hv(), ny: self.n_v, x0: 0.0, hx: self.hchi(), nx: self.n_chi }
    }

    /// Same domain with every cell halved.
    pub fn refined(&self) -> SolverGrid {
        SolverGrid { delta: self.delta, n_v: 2 * self.n_v - 1, n_chi: 2 * self.n_chi - 1 }
    }

    /// Checks the domain against the data intervals and returns the measured `K_delta`.
    pub fn check(&self, hb: &HodographBoundary) -> Result<f64> {
        if self.delta > hb.t0 || self.delta > hb.chi_max || self.delta > hb.table.t_max {
            return Err(Error::Domain(format!(
                "delta = {} exceeds the data intervals (t0 = {}, r2 - r1 = {}, t_max = {})",
                self.delta, hb.t0, hb.chi_max, hb.table.t_max
            )));
        }
        let k_delta = k_delta(&hb.table, self.delta)?;
        let factor = 0.25 + self.delta * self.delta * k_delta / 2.0;
        if !(factor < CONTRACTION_BOUND) {
            return Err(Error::Domain(format!(
                "contraction prerequisite 1/4 + delta^2 K_delta / 2 = {factor} >= 2/3; try delta = {}",
                self.delta / 2.0
            )));
        }
        Ok(k_delta)
    }
}

/// Default domain size `min(0.15, t0/2, (r2 - r1)/2)`.
pub fn auto_delta(hb: &HodographBoundary) -> f64 {
    0.15f64.min(hb.t0 / 2.0).min(hb.chi_max / 2.0)
}

/// `max(1/F, K1/F, K2/F)` on `[0, delta]`.
pub fn k_delta(table: &ThermoTable, delta: f64) -> Result<f64> {
    let mut k = 0.0f64;
    for m in 0..=400 {
        let c = table.coefficients(delta * m as f64 / 400.0)?;
        k = k.max(1.0 / c.f_cap).max(c.k1 / c.f_cap).max(c.k2 / c.f_cap);
    }
    Ok(k)
}

/// Coefficients of the homogenized system at one `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coef {
    pub v: f64,
    pub f: f64,
    pub k1: f64,
    pub k2: f64,
    pub varpi: f64,
}

impl Coef {
    pub fn at(table: &ThermoTable, v: f64) -> Result<Coef> {
        let c = table.coefficients(v)?;
        Ok(Coef { v, f: c.f_cap, k1: c.k1, k2: c.k2, varpi: (1.0 - v * v).sqrt() })
    }

    /// Weight of `U - V`: `1/(2v) + K1 v/(2F)`; zero at `v = 0` where `U = V = 0`.
    fn p(&self) -> f64 {
        if self.v > 0.0 {
            0.5 / self.v + self.k1 * self.v / (2.0 * self.f)
        } else {
            0.0
        }
    }

    /// Weight of the damping term: `K2 v / F`.
    fn q(&self) -> f64 {
        self.k2 * self.v / self.f
    }

    /// `v E1(v, chi)`.
    pub fn e1v(&self, hb: &HodographBoundary, chi: f64) -> f64 {
        let v = self.v;
        let (a0, a1) = (hb.a0(chi), hb.a1(chi));
        let e1 = -self.k2 * a0 / self.f
            - 2.0 * v * self.varpi / self.f * (hb.da0(chi) - hb.da1(chi) * v)
            - a1 * v * v * v / self.f;
        e1 * v
    }

    /// `v E2(v, chi)`.
    pub fn e2v(&self, hb: &HodographBoundary, chi: f64) -> f64 {
        let v = self.v;
        (hb.a1(chi) * v * v * v - self.k2 * hb.a0(chi)) / self.f * v
    }

    /// Linear integrand of the `U` equation.
    fn lu(&self, u: f64, v: f64) -> f64 {
        self.p() * (u - v) - self.q() * u
    }

    /// Linear integrand of the `V` equation.
    fn lv(&self, u: f64, v: f64) -> f64 {
        self.p() * (v - u) - self.q() * v
    }
}

/// `tau1` with `zeta = chibar(tau) - chibar(tau1)`, or `None` when the `chi_+` curve
/// through `(tau, zeta)` reaches the sonic line.
pub fn tau1_of(hb: &HodographBoundary, tau: f64, zeta: f64) -> Result<Option<f64>> {
    let cb = hb.chi_bar(tau)?;
    if zeta >= cb {
        return Ok(None);
    }
    if zeta <= 0.0 {
        return Ok(Some(tau));
    }
    let target = cb - zeta;
    let table = &hb.table;
    let t1 = brent(
        |s| 2.0 * table.lambda_integral(s).unwrap_or(f64::NAN) - target,
        0.0,
        tau,
        0.0,
        "tau1",
    )?;
    Ok(Some(t1))
}

/// `chi_+(v; tau, zeta) = zeta - (chibar(tau) - chibar(v))`.
pub fn char_plus(hb: &HodographBoundary, v: f64, tau: f64, zeta: f64) -> Result<f64> {
    Ok(zeta - (hb.chi_bar(tau)? - hb.chi_bar(v)?))
}

/// `chi_-(v; tau, zeta) = zeta`.
pub fn char_minus(_v: f64, _tau: f64, zeta: f64) -> f64 {
    zeta
}

/// Iterate `k` on the grid, row-major in `(v, chi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationState {
    pub k: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl IterationState {
    pub fn zero(grid: &SolverGrid) -> IterationState {
        IterationState { k: 0, u: vec![0.0; grid.len()], v: vec![0.0; grid.len()] }
    }
}

#[derive(Debug, Clone, Copy)]
enum Start {
    Sonic,
    /// `chi_+` meets `chi = 0` at `tau1`; rows `k0..=i` follow.
    Char { tau1: f64, k0: usize, coef: Coef, b1: f64 },
}

/// Iteration-independent data: coefficients per row, path starts and the integrated
/// source terms.
pub struct Plan {
    pub grid: SolverGrid,
    rows: Vec<Coef>,
    chibar: Vec<f64>,
    starts: Vec<Start>,
    src_u: Vec<f64>,
    src_v: Vec<f64>,
}

impl Plan {
    pub fn new(hb: &HodographBoundary, grid: SolverGrid) -> Result<Plan> {
        let (nv, nc) = (grid.n_v, grid.n_chi);
        let hv = grid.hv();
        let rows = (0..nv).map(|i| Coef::at(&hb.table, grid.v(i))).collect::<Result<Vec<_>>>()?;
        let chibar = (0..nv).map(|i| hb.chi_bar(grid.v(i))).collect::<Result<Vec<_>>>()?;
        let mut starts = vec![Start::Sonic; grid.len()];
        let mut src_u = vec![0.0; grid.len()];
        let mut src_v = vec![0.0; grid.len()];
        for j in 0..nc {
            let chi = grid.chi(j);
            let mut acc = 0.0;
            let mut prev = rows[0].e2v(hb, chi);
            for i in 1..nv {
                let cur = rows[i].e2v(hb, chi);
                acc += 0.5 * (grid.v(i) - grid.v(i - 1)) * (prev + cur);
                src_v[i * nc + j] = acc;
                prev = cur;
            }
        }
        for i in 1..nv {
            let tau = grid.v(i);
            for j in 0..nc {
                let zeta = grid.chi(j);
                let idx = i * nc + j;
                let path = |k: usize| zeta - (chibar[i] - chibar[k]);
                match tau1_of(hb, tau, zeta)? {
                    None => {
                        let mut acc = 0.0;
                        let mut prev = rows[0].e1v(hb, path(0));
                        for k in 1..=i {
                            let cur = rows[k].e1v(hb, path(k));
                            acc += 0.5 * (grid.v(k) - grid.v(k - 1)) * (prev + cur);
                            prev = cur;
                        }
                        src_u[idx] = acc;
                    }
                    Some(tau1) => {
                        let k0 = ((tau1 / hv).floor() as usize + 1).min(i + 1);
                        let coef = Coef::at(&hb.table, tau1)?;
                        let b1 = hb.b1(tau1);
                        let mut acc = 0.0;
                        if k0 <= i {
                            let mut prev = coef.e1v(hb, 0.0);
                            let mut left = tau1;
                            for k in k0..=i {
                                let cur = rows[k].e1v(hb, path(k).max(0.0));
                                acc += 0.5 * (grid.v(k) - left) * (prev + cur);
                                prev = cur;
                                left = grid.v(k);
                            }
                        }
                        src_u[idx] = acc;
                        starts[idx] = Start::Char { tau1, k0, coef, b1 };
                    }
                }
            }
        }
        Ok(Plan { grid, rows, chibar, starts, src_u, src_v })
    }

    /// One Picard update. Row `v = 0` of the result is exactly zero.
    pub fn step(&self, prev: &IterationState) -> IterationState {
        let g = self.grid;
        let (nv, nc) = (g.n_v, g.n_chi);
        let hchi = g.hchi();
        let mut u = vec![0.0; g.len()];
        let mut v = vec![0.0; g.len()];
        for j in 0..nc {
            let mut acc = 0.0;
            let mut prev_l = 0.0;
            for i in 1..nv {
                let idx = i * nc + j;
                let cur = self.rows[i].lv(prev.u[idx], prev.v[idx]);
                acc += 0.5 * (g.v(i) - g.v(i - 1)) * (prev_l + cur);
                v[idx] = self.src_v[idx] + acc;
                prev_l = cur;
            }
        }
        let col0: Vec<f64> = (0..nv).map(|i| prev.v[i * nc]).collect();
        for i in 1..nv {
            for j in 0..nc {
                let idx = i * nc + j;
                let zeta = g.chi(j);
                let at = |k: usize| {
                    let chi = (zeta - (self.chibar[i] - self.chibar[k])).max(0.0);
                    let row = k * nc..(k + 1) * nc;
                    (cubic(0.0, hchi, &prev.u[row.clone()], chi), cubic(0.0, hchi, &prev.v[row], chi))
                };
                let mut acc = self.src_u[idx];
                match self.starts[idx] {
                    Start::Sonic => {
                        let mut prev_l = 0.0;
                        for k in 1..=i {
                            let (uu, vv) = at(k);
                            let cur = self.rows[k].lu(uu, vv);
                            acc += 0.5 * (g.v(k) - g.v(k - 1)) * (prev_l + cur);
                            prev_l = cur;
                        }
                    }
                    Start::Char { tau1, k0, coef, b1 } => {
                        acc += b1;
                        if k0 <= i {
                            let v1 = if tau1 > 0.0 { cubic(0.0, g.hv(), &col0, tau1) } else { 0.0 };
                            let mut prev_l = if tau1 > 0.0 { coef.lu(b1, v1) } else { 0.0 };
                            let mut left = tau1;
                            for k in k0..=i {
                                let (uu, vv) = at(k);
                                let cur = self.rows[k].lu(uu, vv);
                                acc += 0.5 * (g.v(k) - left) * (prev_l + cur);
                                prev_l = cur;
                                left = g.v(k);
                            }
                        }
                    }
                }
                u[idx] = acc;
            }
        }
        IterationState { k: prev.k + 1, u, v }
    }
}

/// Free-standing form of one Picard update.
pub fn picard_step(hb: &HodographBoundary, grid: SolverGrid, prev: &IterationState) -> Result<IterationState> {
    Ok(Plan::new(hb, grid)?.step(prev))
}

/// Starting iterate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Seed {
    Zero,
    /// `amplitude v^2` times a random smooth profile in `(v, chi)`.
    Perturbed { amplitude: f64, seed: u64 },
}

impl Seed {
    pub fn state(&self, grid: &SolverGrid) -> IterationState {
        let mut st = IterationState::zero(grid);
        if let Seed::Perturbed { amplitude, seed } = *self {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, b, c, d): (f64, f64, f64, f64) = (rng.gen_range(5.0..40.0), rng.gen(), rng.gen_range(5.0..40.0), rng.gen());
            for i in 0..grid.n_v {
                for j in 0..grid.n_chi {
                    let (v, chi) = (grid.v(i), grid.chi(j));
                    let idx = i * grid.n_chi + j;
                    st.u[idx] = amplitude * v * v * (a * chi + 6.0 * b).sin();
                    st.v[idx] = amplitude * v * v * (c * (chi + v) + 6.0 * d).cos();
                }
            }
        }
        st
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub seed: Seed,
    /// Keep every iterate for the per-iteration dump.
    pub keep_iterates: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-10, max_iters: 60, seed: Seed::Zero, keep_iterates: false }
    }
}

/// Per-iteration sup-norm deltas and `v^2`-weighted envelopes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub k: usize,
    #[serde(rename = "dU")]
    pub d_u: f64,
    #[serde(rename = "dV")]
    pub d_v: f64,
    /// `max(dU, dV)` over its predecessor; NaN at `k = 1`.
    pub ratio: f64,
    /// `max |U^k| / v^2` over `v > 0`.
    #[serde(skip)]
    pub env_u: f64,
    #[serde(skip)]
    pub env_v: f64,
    #[serde(skip)]
    pub env_uv: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub grid: SolverGrid,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub history: Vec<IterationRecord>,
    /// Least-squares ratio of successive deltas for `k >= 3`.
    pub ratio_fit: f64,
    /// `max(|U|, |V|, |U - V|) / v^2` of the first iterate.
    pub m_hat: f64,
    pub k_delta: f64,
    pub iterates: Vec<IterationState>,
}

fn envelopes(grid: &SolverGrid, st: &IterationState) -> (f64, f64, f64) {
    let nc = grid.n_chi;
    let (mut eu, mut ev, mut euv) = (0.0f64, 0.0f64, 0.0f64);
    for i in 1..grid.n_v {
        let w = 1.0 / (grid.v(i) * grid.v(i));
        for j in 0..nc {
            let (u, v) = (st.u[i * nc + j], st.v[i * nc + j]);
            eu = eu.max(u.abs() * w);
            ev = ev.max(v.abs() * w);
            euv = euv.max((u - v).abs() * w);
        }
    }
    (eu, ev, euv)
}

/// Ratio `exp(slope)` of the least-squares line through `ln d_k`, `k >= 3`.
pub fn fitted_ratio(deltas: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = deltas
        .iter()
        .enumerate()
        .skip(2)
        .filter(|(_, d)| **d > 0.0)
        .map(|(k, d)| ((k + 1) as f64, d.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxy / sxx).exp()
}

/// Iterates to `max(dU, dV) <= tol`.
pub fn solve(hb: &HodographBoundary, grid: SolverGrid, opts: &SolveOptions) -> Result<Solution> {
    let k_delta = grid.check(hb)?;
    let plan = Plan::new(hb, grid)?;
    let mut st = opts.seed.state(&grid);
    let mut history: Vec<IterationRecord> = Vec::new();
    let mut iterates = Vec::new();
    if opts.keep_iterates {
        iterates.push(st.clone());
    }
    let mut m_hat = f64::NAN;
    loop {
        let next = plan.step(&st);
        let d_u = next.u.iter().zip(&st.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let d_v = next.v.iter().zip(&st.v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let d = d_u.max(d_v);
        let ratio = history.last().map(|h| d / h.d_u.max(h.d_v)).unwrap_or(f64::NAN);
        let (env_u, env_v, env_uv) = if next.k <= ENVELOPE_ITERS { envelopes(&grid, &next) } else { (f64::NAN, f64::NAN, f64::NAN) };
        if next.k == 1 {
            m_hat = env_u.max(env_v).max(env_uv);
        }
        history.push(IterationRecord { k: next.k, d_u, d_v, ratio, env_u, env_v, env_uv });
        if opts.keep_iterates {
            iterates.push(next.clone());
        }
        st = next;
        if !d.is_finite() {
            return Err(Error::NoConvergence { iters: st.k, ratios: last_ratios(&history) });
        }
        if d <= opts.tol {
            break;
        }
        if st.k >= opts.max_iters {
            return Err(Error::NoConvergence { iters: st.k, ratios: last_ratios(&history) });
        }
    }
    let deltas: Vec<f64> = history.iter().map(|h| h.d_u.max(h.d_v)).collect();
    Ok(Solution { grid, u: st.u, v: st.v, ratio_fit: fitted_ratio(&deltas), history, m_hat, k_delta, iterates })
}

fn last_ratios(history: &[IterationRecord]) -> Vec<f64> {
    history.iter().rev().take(5).rev().map(|h| h.ratio).collect()
}

/// Solves with `delta` halved (at most four times) on a positivity or contraction
/// failure. Returns the solution, its field and the log of attempts.
pub fn solve_auto(
    hb: &HodographBoundary,
    delta: Option<f64>,
    n_v: usize,
    n_chi: usize,
    opts: &SolveOptions,
) -> Result<(Solution, WzField, Vec<String>)> {
    let mut delta = delta.unwrap_or_else(|| auto_delta(hb));
    let mut log = Vec::new();
    for attempt in 0..5 {
        let res = SolverGrid::new(delta, n_v, n_chi).and_then(|g| {
            let sol = solve(hb, g, opts)?;
            if sol.ratio_fit > RATIO_LIMIT {
                return Err(Error::NoConvergence { iters: sol.history.len(), ratios: vec![sol.ratio_fit] });
            }
            let wz = recover_wz(&sol, hb)?;
            Ok((sol, wz))
        });
        match res {
            Ok((sol, wz)) => {
                log.push(format!("attempt {attempt}: delta = {delta} converged in {} iterations", sol.history.len()));
                return Ok((sol, wz, log));
            }
            Err(e @ (Error::Domain(_) | Error::Positivity(_) | Error::NoConvergence { .. })) => {
                log.push(format!("attempt {attempt}: delta = {delta} failed: {e}; halving"));
                delta /= 2.0;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::Domain(format!("no admissible delta after {} attempts: {}", log.len(), log.join(" | "))))
}

/// `(W, Z)` over the solved patch. Off-grid values interpolate `U, V` bicubically and
/// add the exact homogenization terms.
#[derive(Debug, Clone)]
pub struct WzField {
    pub grid: SolverGrid,
    pub hb: HodographBoundary,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// `rbar` at each row.
    pub r_bar: Vec<f64>,
}

/// Guard: `W~, Z~` must stay above this fraction of `min a0`.
pub const POSITIVITY_FRACTION: f64 = 0.5;

/// Undoes the homogenization and the inversions, checking positivity of `W~, Z~`.
pub fn recover_wz(sol: &Solution, hb: &HodographBoundary) -> Result<WzField> {
    let g = sol.grid;
    let a0_min = (0..g.n_chi).map(|j| hb.a0(g.chi(j))).fold(f64::INFINITY, f64::min);
    let guard = POSITIVITY_FRACTION * a0_min;
    let r_bar = (0..g.n_v).map(|i| hb.r_bar(g.v(i))).collect::<Result<Vec<_>>>()?;
    let field = WzField { grid: g, hb: hb.clone(), u: sol.u.clone(), v: sol.v.clone(), r_bar };
    for i in 0..g.n_v {
        for j in 0..g.n_chi {
            let (wt, zt) = field.node_tilde(i, j);
            if !(wt > guard && zt > guard) {
                return Err(Error::Positivity(format!(
                    "W~ = {wt}, Z~ = {zt} below {guard} at v = {}, chi = {}; delta too large",
                    g.v(i),
                    g.chi(j)
                )));
            }
        }
    }
    Ok(field)
}

impl WzField {
    /// `(W~, Z~)` at a node.
    pub fn node_tilde(&self, i: usize, j: usize) -> (f64, f64) {
        let (v, chi) = (self.grid.v(i), self.grid.chi(j));
        let idx = i * self.grid.n_chi + j;
        let (a0, a1) = (self.hb.a0(chi), self.hb.a1(chi));
        (self.u[idx] + a0 - a1 * v, self.v[idx] + a0 + a1 * v)
    }

    /// `(W, Z)` at a node.
    pub fn node_wz(&self, i: usize, j: usize) -> (f64, f64) {
        let (wt, zt) = self.node_tilde(i, j);
        (1.0 / wt, -1.0 / zt)
    }

    /// `(t, r)` of a node.
    pub fn node_tr(&self, i: usize, j: usize) -> (f64, f64) {
        (self.grid.v(i), self.r_bar[i] - self.grid.chi(j))
    }

    fn check_domain(&self, v: f64, chi: f64) -> Result<()> {
        let d = self.grid.delta;
        let slack = 1e-12 * d;
        if v < -slack || v > d + slack || chi < -slack || chi > d + slack || v.is_nan() || chi.is_nan() {
            return Err(Error::Domain(format!("(v, chi) = ({v}, {chi}) outside [0, {d}]^2")));
        }
        Ok(())
    }

    /// `(W~, Z~)` anywhere in the patch.
    pub fn tilde(&self, v: f64, chi: f64) -> Result<(f64, f64)> {
        self.check_domain(v, chi)?;
        let g = self.grid.interp_grid();
        let (u, vv) = (g.interp(&self.u, v, chi), g.interp(&self.v, v, chi));
        let (a0, a1) = (self.hb.a0(chi), self.hb.a1(chi));
        Ok((u + a0 - a1 * v, vv + a0 + a1 * v))
    }

    /// `(W, Z)` at `(v, chi)`.
    pub fn wz_vchi(&self, v: f64, chi: f64) -> Result<(f64, f64)> {
        let (wt, zt) = self.tilde(v, chi)?;
        Ok((1.0 / wt, -1.0 / zt))
    }

    /// `(W, Z)` at `(t, r)`.
    pub fn wz(&self, t: f64, r: f64) -> Result<(f64, f64)> {
        self.wz_vchi(t, self.hb.r_bar(t)? - r)
    }

    /// Node rows `t, r, W, Z` for the dump.
    pub fn rows(&self) -> Vec<[f64; 4]> {
        let mut out = Vec::with_capacity(self.grid.len());
        for i in 0..self.grid.n_v {
            for j in 0..self.grid.n_chi {
                let (t, r) = self.node_tr(i, j);
                let (w, z) = self.node_wz(i, j);
                out.push([t, r, w, z]);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::CurveSpec;
    use crate::thermo::{canonical_law, canonical_params, Thermo};

    fn boundary() -> HodographBoundary {
        let tb = ThermoTable::build(Thermo::new(canonical_law(), &canonical_params()).unwrap(), 0.3).unwrap();
        HodographBoundary::build(&CurveSpec::canonical(), &tb).unwrap()
    }

    #[test]
    fn tau1_limits() {
        let hb = boundary();
        assert_eq!(tau1_of(&hb, 0.08, 0.0).unwrap(), Some(0.08));
        let cb = hb.chi_bar(0.08).unwrap();
        assert_eq!(tau1_of(&hb, 0.08, cb).unwrap(), None);
        let t1 = tau1_of(&hb, 0.08, cb * (1.0 - 1e-12)).unwrap().unwrap();
        assert!(t1 < 1e-3, "{t1}");
        let t1 = tau1_of(&hb, 0.08, 0.5 * cb).unwrap().unwrap();
        assert!((hb.chi_bar(0.08).unwrap() - hb.chi_bar(t1).unwrap() - 0.5 * cb).abs() < 1e-15);
    }

    #[test]
    fn char_plus_endpoints() {
        let hb = boundary();
        assert_eq!(char_plus(&hb, 0.05, 0.05, 0.01).unwrap(), 0.01);
        let cb = hb.chi_bar(0.05).unwrap();
        assert!(char_plus(&hb, 0.0, 0.05, cb).unwrap().abs() < 1e-18);
        assert_eq!(char_minus(0.0, 0.05, 0.01), 0.01);
    }

    #[test]
    fn coefficient_groups_at_sonic_point() {
        let hb = boundary();
        let c = Coef::at(&hb.table, 0.0).unwrap();
        let s = hb.table.coefficients(0.0).unwrap();
        assert_eq!(c.k1 - c.k2, 0.0);
        assert!((c.f - 1.0 - s.g).abs() < 1e-15);
        assert_eq!(c.p(), 0.0);
    }

    #[test]
    fn zero_row_is_exact() {
        let hb = boundary();
        let g = SolverGrid::new(0.05, 17, 17).unwrap();
        let plan = Plan::new(&hb, g).unwrap();
        let mut st = Seed::Perturbed { amplitude: 1.0, seed: 3 }.state(&g);
        for _ in 0..3 {
            st = plan.step(&st);
            assert!(st.u[..g.n_chi].iter().chain(&st.v[..g.n_chi]).all(|x| *x == 0.0));
        }
    }

    #[test]
    fn column_zero_carries_b1() {
        let hb = boundary();
        let g = SolverGrid::new(0.05, 17, 17).unwrap();
        let sol = solve(&hb, g, &SolveOptions::default()).unwrap();
        for i in 0..g.n_v {
            let d = sol.u[i * g.n_chi] - hb.b1(g.v(i));
            assert!(d.abs() < 1e-15, "{i} {d} {}", hb.b1(g.v(i)));
        }
    }

    #[test]
    fn ratio_fit_of_geometric_history() {
        let d: Vec<f64> = (0..12).map(|k| 3.0 * 0.5f64.powi(k)).collect();
        assert!((fitted_ratio(&d) - 0.5).abs() < 1e-12);
    }
}
