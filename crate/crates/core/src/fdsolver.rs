//! Finite-difference evolution of the reduced problem, used to cross-check
//! the characteristic solution before focusing.
//!
//! `v = Du` obeys `v_t + F(v)_x = 0` with `F(v) = −v − 2 ln(1 − v)`, so the
//! transport speed is `F'(v) = (1 + v)/(1 − v)`, positive for `|v| < 1`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charflow::{CharFlow, FieldSample};
use crate::quad::{linear_fit, GaussLegendre};
use crate::report;
use crate::{Error, Result};

/// Speed bound used to size the time step; `(1+|v|)/(1−|v|) ≤ 1.03` for `|v| ≤ 1/100`.
pub const SPEED_BOUND: f64 = 1.03;
/// Largest admissible CFL ratio.
pub const MAX_CFL: f64 = 0.4;
/// Fraction of the focusing time the solver may reach.
pub const FOCUS_GUARD: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Limiter {
    #[default]
    None,
    Minmod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Conservative upwind, optionally MUSCL with Heun steps.
    #[default]
    Upwind,
    /// Two-step centered scheme, started by one upwind step.
    Leapfrog,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FdConfig {
    pub h: f64,
    pub cfl: f64,
    pub t_final: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub limiter: Limiter,
    pub scheme: Scheme,
    /// Number of equally spaced output times after `t = 0`.
    pub snapshots: usize,
    /// Also recover `u` by integrating `−v` along `x + t = const`.
    pub track_u: bool,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig {
            h: 5e-5,
            cfl: MAX_CFL,
            t_final: 0.1,
            x_min: -0.01,
            x_max: 0.26,
            limiter: Limiter::None,
            scheme: Scheme::Upwind,
            snapshots: 4,
            track_u: false,
        }
    }
}

impl FdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::Domain { name: "h", value: self.h, domain: "(0, inf)" });
        }
        if !(self.cfl > 0.0 && self.cfl <= MAX_CFL) {
            return Err(Error::Domain { name: "cfl", value: self.cfl, domain: "(0, 0.4]" });
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::Domain { name: "t_final", value: self.t_final, domain: "[0, inf)" });
        }
        if !(self.x_max - self.x_min >= 4.0 * self.h) {
            return Err(Error::pre("x_max - x_min must span at least four cells"));
        }
        if self.snapshots == 0 {
            return Err(Error::pre("at least one snapshot is required"));
        }
        Ok(())
    }

    pub fn nodes(&self) -> Vec<f64> {
        let n = ((self.x_max - self.x_min) / self.h).round() as usize + 1;
        (0..n).map(|i| self.x_min + i as f64 * self.h).collect()
    }
}

/// Conservative flux `−v − 2 ln(1 − v)`.
pub fn flux(v: f64) -> f64 {
    -v - 2.0 * (-v).ln_1p()
}

/// Transport speed `(1 + v)/(1 − v)`.
pub fn speed(v: f64) -> f64 {
    (1.0 + v) / (1.0 - v)
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdSnapshot {
    pub field: FieldSample,
    pub u: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdSolution {
    pub config: FdConfig,
    pub dt: f64,
    pub steps: usize,
    /// Largest `speed·dt/h` met during the run.
    pub max_courant: f64,
    pub snapshots: Vec<FdSnapshot>,
}

impl FdSolution {
    pub fn last(&self) -> &FdSnapshot {
        self.snapshots.last().expect("at least the initial snapshot")
    }

    /// Long-format time series `t,x1,v,v_x,v_xx[,u]`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let c = &self.config;
        let meta = [
            ("kind", "fd_series".to_string()),
            ("h", report::num(c.h)),
            ("dt", report::num(self.dt)),
            ("scheme", format!("{:?}", c.scheme).to_lowercase()),
            ("limiter", format!("{:?}", c.limiter).to_lowercase()),
        ];
        let with_u = c.track_u;
        let header: &[&str] =
            if with_u { &["t", "x1", "v", "v_x", "v_xx", "u"] } else { &["t", "x1", "v", "v_x", "v_xx"] };
        let rows = self.snapshots.iter().flat_map(|s| {
            let f = &s.field;
            (0..f.x1.len()).map(move |i| {
                let mut r = vec![f.t, f.x1[i], f.v[i], f.v_x[i], f.v_xx[i]];
                if let Some(u) = &s.u {
                    r.push(u[i]);
                }
                r
            })
        });
        report::write_csv(out, &meta, header, rows)
    }
}

fn snapshot(t: f64, epsilon: f64, xs: &[f64], v: &[f64], h: f64, u: Option<&[f64]>) -> FdSnapshot {
    let n = v.len();
    let mut v_x = vec![0.0; n];
    let mut v_xx = vec![0.0; n];
    for i in 1..n - 1 {
        v_x[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
        v_xx[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
    }
    FdSnapshot {
        field: FieldSample { t, epsilon, x1: xs.to_vec(), v: v.to_vec(), v_x, v_xx },
        u: u.map(|u| u.to_vec()),
    }
}

const CHUNK: usize = 8192;

// flux through the left face of every cell from `first` on, plus the outflow face at index n;
// the inflow face uses the boundary state and the outflow face extrapolates linearly
fn face_fluxes(v: &[f64], inflow: f64, limiter: Limiter, first: usize, out: &mut [f64]) {
    let n = v.len();
    let face = |i: usize| -> f64 {
        if i == 0 {
            return flux(inflow);
        }
        let c = v[i - 1];
        match limiter {
            Limiter::None => flux(c),
            Limiter::Minmod => {
                let l = if i >= 2 { v[i - 2] } else { inflow };
                let r = if i < n { v[i] } else { 2.0 * c - l };
                flux(c + 0.5 * minmod(c - l, r - c))
            }
        }
    };
    out[first..].par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
        let base = first + c * CHUNK;
        for (k, f) in chunk.iter_mut().enumerate() {
            *f = face(base + k);
        }
    });
}

// out[i] = v[i] − r (F_{i+1/2} − F_{i−1/2})
fn apply_fluxes(v: &[f64], fl: &[f64], ratio: f64, first: usize, out: &mut [f64]) {
    out[..first].copy_from_slice(&v[..first]);
    out[first..].par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
        let base = first + c * CHUNK;
        for (k, o) in chunk.iter_mut().enumerate() {
            let i = base + k;
            *o = v[i] - ratio * (fl[i + 1] - fl[i]);
        }
    });
}

// speed is increasing in v, so the largest value decides
fn check_courant(v: &[f64], ratio: f64, step: usize, xs: &[f64]) -> Result<f64> {
    let (k, vmax) = v
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |a, (i, &x)| if x > a.1 || x.is_nan() { (i, x) } else { a });
    let vmin = v.iter().fold(f64::INFINITY, |a, &x| a.min(x));
    let c = speed(vmax);
    if !c.is_finite() || !(vmax < 1.0) || !(vmin > -1.0) || c > SPEED_BOUND {
        return Err(Error::pre(format!(
            "CFL bound violated at step {step}: speed {c} at x1 = {} exceeds {SPEED_BOUND}",
            xs[k]
        )));
    }
    Ok(c.max(1.0) * ratio)
}

// cells before the returned index still hold exactly the inflow state
fn inflow_prefix(v: &[f64], inflow: f64) -> usize {
    v.iter().position(|&x| x.to_bits() != inflow.to_bits()).unwrap_or(v.len()).saturating_sub(2)
}

/// Evolves `v` from `v(0, ·) = ic` up to `cfg.t_final`, refusing to go past
/// `0.9·t_eps`. The left boundary keeps the initial inflow state.
pub fn solve_factored<F>(ic: F, cfg: &FdConfig, t_eps: f64, epsilon: f64) -> Result<FdSolution>
where
    F: Fn(f64) -> f64 + Sync,
{
    cfg.validate()?;
    if !(cfg.t_final < FOCUS_GUARD * t_eps) {
        return Err(Error::pre(format!(
            "t_final = {} is not below {FOCUS_GUARD} t_eps = {}",
            cfg.t_final,
            FOCUS_GUARD * t_eps
        )));
    }
    let xs = cfg.nodes();
    let n = xs.len();
    let h = cfg.h;
    let mut v: Vec<f64> = xs.par_iter().map(|&x| ic(x)).collect();
    let inflow = v[0];
    let interval = cfg.t_final / cfg.snapshots as f64;
    let dt_max = cfg.cfl * h / SPEED_BOUND;
    let per = if interval > 0.0 { (interval / dt_max).ceil().max(1.0) as usize } else { 0 };
    let dt = if per > 0 { interval / per as f64 } else { 0.0 };
    let ratio = dt / h;

    let mut u = cfg.track_u.then(|| vec![0.0; n]);
    let mut snaps = vec![snapshot(0.0, epsilon, &xs, &v, h, u.as_deref())];
    let mut fl = vec![0.0; n + 1];
    let mut w = vec![0.0; n];
    let mut stage = vec![0.0; n];
    let mut prev: Option<Vec<f64>> = None;
    let mut max_courant = 0.0f64;
    let mut step = 0usize;

    for s in 1..=cfg.snapshots {
        for _ in 0..per {
            max_courant = max_courant.max(check_courant(&v, ratio, step, &xs)?);
            let first = if cfg.scheme == Scheme::Upwind { inflow_prefix(&v, inflow) } else { 0 };
            match (cfg.scheme, cfg.limiter) {
                (Scheme::Upwind, Limiter::None) => {
                    face_fluxes(&v, inflow, Limiter::None, first, &mut fl);
                    apply_fluxes(&v, &fl, ratio, first, &mut w);
                }
                (Scheme::Upwind, Limiter::Minmod) => {
                    // Heun: average of the start state and two Euler stages
                    face_fluxes(&v, inflow, Limiter::Minmod, first, &mut fl);
                    apply_fluxes(&v, &fl, ratio, first, &mut stage);
                    face_fluxes(&stage, inflow, Limiter::Minmod, first, &mut fl);
                    apply_fluxes(&stage, &fl, ratio, first, &mut w);
                    w.iter_mut().zip(&v).skip(first).for_each(|(a, b)| *a = 0.5 * (*a + b));
                }
                (Scheme::Leapfrog, _) => match prev.as_ref() {
                    None => {
                        face_fluxes(&v, inflow, Limiter::None, 0, &mut fl);
                        apply_fluxes(&v, &fl, ratio, 0, &mut w);
                    }
                    Some(p) => leapfrog_step(p, &v, inflow, ratio, &mut w),
                },
            }
            if let Some(u) = u.as_mut() {
                transport_u(u, &v, &w, ratio, dt);
            }
            if cfg.scheme == Scheme::Leapfrog {
                prev = Some(v.clone());
            }
            std::mem::swap(&mut v, &mut w);
            step += 1;
        }
        snaps.push(snapshot(s as f64 * interval, epsilon, &xs, &v, h, u.as_deref()));
    }
    Ok(FdSolution { config: *cfg, dt, steps: step, max_courant, snapshots: snaps })
}

fn leapfrog_step(prev: &[f64], cur: &[f64], inflow: f64, ratio: f64, out: &mut [f64]) {
    let n = cur.len();
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
        let base = c * CHUNK;
        for (k, o) in chunk.iter_mut().enumerate() {
            let i = base + k;
            *o = if i == n - 1 {
                // outflow cell: one-sided upwind
                cur[i] - ratio * (flux(cur[i]) - flux(cur[i - 1]))
            } else {
                let left = if i == 0 { inflow } else { cur[i - 1] };
                prev[i] - ratio * (flux(cur[i + 1]) - flux(left))
            };
        }
    });
}

// u(t + dt, x) = u(t, x + dt) − ∫ v along the diagonal, trapezoid in time
fn transport_u(u: &mut [f64], v_old: &[f64], v_new: &[f64], theta: f64, dt: f64) {
    let n = u.len();
    for i in 0..n {
        let b = (i + 1).min(n - 1);
        let u_shift = (1.0 - theta) * u[i] + theta * u[b];
        let v_shift = (1.0 - theta) * v_old[i] + theta * v_old[b];
        u[i] = u_shift - 0.5 * dt * (v_shift + v_new[i]);
    }
}

/// Drift of `v` along tracers `x' = (1+v)/(1−v)` integrated through the snapshots of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TracerReport {
    pub labels: Vec<f64>,
    /// Tracer positions at the last snapshot.
    pub end: Vec<f64>,
    /// `max_k |v_fd(t_k, x(t_k)) − v(0, y)|` per tracer.
    pub drift: Vec<f64>,
    pub max_drift: f64,
}

fn interp(xs: &[f64], v: &[f64], x: f64) -> f64 {
    let h = xs[1] - xs[0];
    let p = ((x - xs[0]) / h).clamp(0.0, (xs.len() - 1) as f64);
    let i = (p.floor() as usize).min(xs.len() - 2);
    let w = p - i as f64;
    (1.0 - w) * v[i] + w * v[i + 1]
}

/// Follows the tracer starting at each label with Heun steps between
/// consecutive snapshots, reading `v` by linear interpolation.
pub fn trace_tracers(sol: &FdSolution, labels: &[f64], substeps: usize) -> Result<TracerReport> {
    let snaps = &sol.snapshots;
    if snaps.len() < 2 || substeps == 0 {
        return Err(Error::pre("tracers need two snapshots and at least one substep"));
    }
    let xs = &snaps[0].field.x1;
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    let mut end = Vec::with_capacity(labels.len());
    let mut drift = Vec::with_capacity(labels.len());
    for &y in labels {
        if !(y >= lo && y <= hi) {
            return Err(Error::Domain { name: "label", value: y, domain: "grid interval" });
        }
        let v0 = interp(xs, &snaps[0].field.v, y);
        let mut x = y;
        let mut worst = 0.0f64;
        for w in snaps.windows(2) {
            let (a, b) = (&w[0].field, &w[1].field);
            let dt = (b.t - a.t) / substeps as f64;
            let at = |tau: f64, x: f64| {
                let th = tau / (b.t - a.t);
                (1.0 - th) * interp(xs, &a.v, x) + th * interp(xs, &b.v, x)
            };
            for k in 0..substeps {
                let tau = k as f64 * dt;
                let k1 = speed(at(tau, x));
                let k2 = speed(at(tau + dt, x + dt * k1));
                x += 0.5 * dt * (k1 + k2);
            }
            if x > hi {
                return Err(Error::pre(format!("tracer from {y} left the grid")));
            }
            worst = worst.max((interp(xs, &b.v, x) - v0).abs());
        }
        end.push(x);
        drift.push(worst);
    }
    let max_drift = drift.iter().copied().fold(0.0, f64::max);
    Ok(TracerReport { labels: labels.to_vec(), end, drift, max_drift })
}

/// `v` from the characteristic solution on the given nodes; zero left of `φ(t, 0) = t`.
pub fn characteristic_field(flow: &CharFlow, t: f64, xs: &[f64]) -> Result<Vec<f64>> {
    xs.par_iter()
        .map(|&x| {
            if x <= t {
                Ok(0.0)
            } else {
                flow.data.chi_eps.value(flow.invert_phi(t, x)?)
            }
        })
        .collect()
}

/// Label `y` of the characteristic through `(t, x)`, extended with unit speed where `χ_ε = 0`.
fn label(flow: &CharFlow, t: f64, x: f64) -> Result<f64> {
    if x <= t {
        Ok(x - t)
    } else {
        flow.invert_phi(t, x)
    }
}

/// `u(t, x) = −∫₀ᵗ v(τ, x + t − τ) dτ`, rewritten as an integral over the
/// characteristic label: with `s = x + t`,
/// `u = −½ ∫_{y_t}^{s} χ_ε(y) [(1 − χ_ε(y)) + (s − y) χ_ε'(y)] dy`.
pub fn characteristic_u(flow: &CharFlow, t: f64, x: f64) -> Result<f64> {
    let s = x + t;
    if s > 1.0 {
        return Err(Error::Domain { name: "x + t", value: s, domain: "(-inf, 1]" });
    }
    let eps = flow.params().epsilon;
    let lo = label(flow, t, x)?.max(0.5 * eps);
    if lo >= s {
        return Ok(0.0);
    }
    let gl = GaussLegendre::new(20);
    let integrand = |y: f64| {
        let c = flow.data.chi_eps.jet(y).expect("label inside the profile domain");
        c.v * ((1.0 - c.v) + (s - y) * c.d1)
    };
    let mut cuts = vec![lo];
    for b in [eps, 2.0 * eps, 8.0 * eps, 64.0 * eps] {
        if b > lo && b < s {
            cuts.push(b);
        }
    }
    cuts.push(s);
    let mut acc = 0.0;
    for w in cuts.windows(2) {
        // geometric panels resolve the logarithmic growth toward small y
        let panels = 8;
        let r = (w[1] / w[0]).powf(1.0 / panels as f64);
        let mut a = w[0];
        for k in 0..panels {
            let b = if k + 1 == panels { w[1] } else { a * r };
            acc += gl.integrate(a, b, integrand);
            a = b;
        }
    }
    Ok(-0.5 * acc)
}

/// Samples of `u` on `nt × nx` nodes `(t0 + i·k, x0 + j·k)`, row-major in time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StencilGrid {
    pub t0: f64,
    pub x0: f64,
    pub k: f64,
    pub nt: usize,
    pub nx: usize,
    pub values: Vec<f64>,
}

impl StencilGrid {
    pub fn from_fn<F>(t0: f64, x0: f64, k: f64, nt: usize, nx: usize, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Result<f64> + Sync,
    {
        let values = (0..nt * nx)
            .into_par_iter()
            .map(|idx| f(t0 + (idx / nx) as f64 * k, x0 + (idx % nx) as f64 * k))
            .collect::<Result<Vec<_>>>()?;
        Ok(StencilGrid { t0, x0, k, nt, nx, values })
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.nx + j]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub k: f64,
    /// Discrete `L²` norm of `□u − (Du)(D²u)` over interior nodes.
    pub l2: f64,
    pub max: f64,
    /// Same norm of `□u` alone, for scale.
    pub wave_l2: f64,
}

/// Second-order central differences of `u_tt − u_xx − (u_x − u_t)(u_xx − 2u_xt + u_tt)`.
pub fn residual_check(u: &StencilGrid) -> Result<ResidualReport> {
    if u.nt < 3 || u.nx < 3 {
        return Err(Error::pre("residual needs at least a 3 x 3 stencil"));
    }
    let k = u.k;
    let mut sq = 0.0;
    let mut wave_sq = 0.0;
    let mut max = 0.0f64;
    let mut count = 0usize;
    for i in 1..u.nt - 1 {
        for j in 1..u.nx - 1 {
            let c = u.at(i, j);
            let u_t = (u.at(i + 1, j) - u.at(i - 1, j)) / (2.0 * k);
            let u_x = (u.at(i, j + 1) - u.at(i, j - 1)) / (2.0 * k);
            let u_tt = (u.at(i + 1, j) - 2.0 * c + u.at(i - 1, j)) / (k * k);
            let u_xx = (u.at(i, j + 1) - 2.0 * c + u.at(i, j - 1)) / (k * k);
            let u_xt = (u.at(i + 1, j + 1) - u.at(i + 1, j - 1) - u.at(i - 1, j + 1) + u.at(i - 1, j - 1))
                / (4.0 * k * k);
            let wave = u_tt - u_xx;
            let r = wave - (u_x - u_t) * (u_xx - 2.0 * u_xt + u_tt);
            sq += r * r;
            wave_sq += wave * wave;
            max = max.max(r.abs());
            count += 1;
        }
    }
    let scale = if count > 0 { k * k } else { 0.0 };
    Ok(ResidualReport { k, l2: (sq * scale).sqrt(), max, wave_l2: (wave_sq * scale).sqrt() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheckReport {
    pub t: f64,
    pub scheme: Scheme,
    pub limiter: Limiter,
    pub h: Vec<f64>,
    /// `max |v_fd − v_char|` on the nodes at time `t`.
    pub sup_error: Vec<f64>,
    /// Order between consecutive refinements.
    pub orders: Vec<f64>,
    /// Least-squares slope of `log error` against `log h`.
    pub observed_order: f64,
    pub max_principle: bool,
}

/// Runs the solver at each `h` in `hs` up to time `t` and measures the
/// distance to the characteristic solution.
pub fn crosscheck(flow: &CharFlow, base: &FdConfig, hs: &[f64], t: f64) -> Result<CrossCheckReport> {
    if hs.len() < 2 {
        return Err(Error::pre("need at least two step sizes"));
    }
    let chi = &flow.data.chi_eps;
    let v_min = chi.value(base.x_max.min(1.0))?.min(0.0);
    let mut sup_error = Vec::with_capacity(hs.len());
    let mut max_principle = true;
    for &h in hs {
        let cfg = FdConfig { h, t_final: t, snapshots: 1, track_u: false, ..*base };
        let sol = solve_factored(|x| chi.value(x.min(1.0)).unwrap_or(0.0), &cfg, flow.t_eps, flow.params().epsilon)?;
        let last = &sol.last().field;
        let exact = characteristic_field(flow, t, &last.x1)?;
        let err = last.v.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        max_principle &= last.v.iter().all(|&x| x <= 0.0 && x >= v_min - 1e-14);
        sup_error.push(err);
    }
    let orders: Vec<f64> = (1..hs.len())
        .map(|i| (sup_error[i - 1] / sup_error[i]).ln() / (hs[i - 1] / hs[i]).ln())
        .collect();
    let lh: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let le: Vec<f64> = sup_error.iter().map(|e| e.ln()).collect();
    let (_, slope, _) = linear_fit(&lh, &le);
    Ok(CrossCheckReport {
        t,
        scheme: base.scheme,
        limiter: base.limiter,
        h: hs.to_vec(),
        sup_error,
        orders,
        observed_order: slope,
        max_principle,
    })
}
