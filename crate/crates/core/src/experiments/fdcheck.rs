//! Finite-difference solutions against the characteristic solution.

use serde::{Deserialize, Serialize};

use crate::charflow::CharFlow;
use crate::fdsolver::{crosscheck, solve_factored, CrossCheckReport, FdConfig, Limiter, Scheme};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FdCheckConfig {
    /// Step sizes as divisors of ε.
    pub h_divisors: Vec<f64>,
    /// Final time as a fraction of `t_ε`.
    pub t_fraction: f64,
    /// Distance kept between the rightmost characteristic of interest and `x_max`.
    pub x_margin: f64,
    pub limiters: Vec<Limiter>,
    pub min_order: f64,
}

impl Default for FdCheckConfig {
    fn default() -> Self {
        FdCheckConfig {
            h_divisors: vec![10.0, 20.0, 40.0],
            t_fraction: 0.5,
            x_margin: 0.02,
            limiters: vec![Limiter::None, Limiter::Minmod],
            min_order: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdCheckReport {
    pub epsilon: f64,
    pub t: f64,
    pub runs: Vec<CrossCheckReport>,
    /// Smallest consecutive-refinement order over all runs.
    pub min_order: f64,
    pub order_ok: bool,
    pub zero_data_bitwise_zero: bool,
    pub all_pass: bool,
}

impl FdCheckReport {
    pub const CURVE_HEADER: [&'static str; 4] = ["limiter", "h", "sup_error", "order"];

    /// Limiter encoded as 0 (none) or 1 (minmod); order is NaN on the first row.
    pub fn curve_rows(&self) -> Vec<Vec<f64>> {
        let mut rows = Vec::new();
        for r in &self.runs {
            let code = match r.limiter {
                Limiter::None => 0.0,
                Limiter::Minmod => 1.0,
            };
            for (k, (&h, &e)) in r.h.iter().zip(&r.sup_error).enumerate() {
                rows.push(vec![code, h, e, if k == 0 { f64::NAN } else { r.orders[k - 1] }]);
            }
        }
        rows
    }
}

/// Zero initial data must give a solution that is `+0.0` bit for bit.
pub fn zero_data_is_fixed(cfg: &FdConfig) -> Result<bool> {
    let cfg = FdConfig { track_u: true, ..*cfg };
    let sol = solve_factored(|_| 0.0, &cfg, f64::INFINITY, 1.0)?;
    Ok(sol.snapshots.iter().all(|s| {
        s.field.v.iter().all(|v| v.to_bits() == 0) && s.u.as_ref().is_none_or(|u| u.iter().all(|x| x.to_bits() == 0))
    }))
}

pub fn run_fdcheck(flow: &CharFlow, cfg: &FdCheckConfig) -> Result<FdCheckReport> {
    if cfg.h_divisors.len() < 2 || cfg.limiters.is_empty() {
        return Err(Error::pre("need at least two step sizes and one limiter"));
    }
    if !(cfg.t_fraction > 0.0 && cfg.t_fraction < 1.0) {
        return Err(Error::Domain { name: "t_fraction", value: cfg.t_fraction, domain: "(0, 1)" });
    }
    let eps = flow.params().epsilon;
    let t = cfg.t_fraction * flow.t_eps;
    let hs: Vec<f64> = cfg.h_divisors.iter().map(|d| eps / d).collect();
    let mut runs = Vec::new();
    for &limiter in &cfg.limiters {
        let base = FdConfig { x_max: t + cfg.x_margin, limiter, scheme: Scheme::Upwind, ..FdConfig::default() };
        runs.push(crosscheck(flow, &base, &hs, t)?);
    }
    let min_order = runs.iter().flat_map(|r| r.orders.iter().copied()).fold(f64::INFINITY, f64::min);
    let zero_cfg = FdConfig { h: hs[0], t_final: t, x_max: t + cfg.x_margin, ..FdConfig::default() };
    let zero = cfg
        .limiters
        .iter()
        .map(|&limiter| zero_data_is_fixed(&FdConfig { limiter, ..zero_cfg }))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .all(|z| z);
    let order_ok = min_order >= cfg.min_order;
    Ok(FdCheckReport {
        epsilon: eps,
        t,
        runs,
        min_order,
        order_ok,
        zero_data_bitwise_zero: zero,
        all_pass: order_ok && zero,
    })
}
