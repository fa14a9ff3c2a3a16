//! Focusing time `t_ε` against the bound `|ln ε|^{−α}`.

use rayon::prelude::*;
use serde::Serialize;

use crate::charflow::CharFlow;
use crate::profiles::ProfileParams;
use crate::{Error, Result};

pub const PRODUCT_CAP: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LifespanRow {
    pub epsilon: f64,
    pub t_eps: f64,
    pub nu_eps: f64,
    /// `|ln ε|^{−α}`.
    pub bound: f64,
    /// `t_ε |ln ε|^α`.
    pub product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LifespanReport {
    pub alpha: f64,
    pub rows: Vec<LifespanRow>,
    pub strictly_decreasing: bool,
    pub max_product: f64,
    pub product_cap: f64,
    pub all_pass: bool,
}

impl LifespanReport {
    pub const CURVE_HEADER: [&'static str; 5] = ["epsilon", "t_eps", "nu_eps", "bound", "product"];

    pub fn curve_rows(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| vec![r.epsilon, r.t_eps, r.nu_eps, r.bound, r.product]).collect()
    }
}

pub fn default_eps_list() -> Vec<f64> {
    (2..=6).map(|k| 10f64.powi(-k)).collect()
}

pub fn lifespan_sweep(params: ProfileParams, eps_list: &[f64]) -> Result<LifespanReport> {
    if eps_list.is_empty() {
        return Err(Error::pre("empty epsilon list"));
    }
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::pre("epsilon list must be strictly decreasing"));
    }
    if let Some(&e) = eps_list.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::Domain { name: "epsilon", value: e, domain: "(0, 1)" });
    }
    let rows = eps_list
        .par_iter()
        .map(|&e| {
            let flow = CharFlow::new(params.with_epsilon(e))?;
            let l = (-e.ln()).powf(params.alpha);
            Ok(LifespanRow { epsilon: e, t_eps: flow.t_eps, nu_eps: flow.nu_eps, bound: 1.0 / l, product: flow.t_eps * l })
        })
        .collect::<Result<Vec<_>>>()?;
    let strictly_decreasing = rows.windows(2).all(|w| w[1].t_eps < w[0].t_eps);
    let max_product = rows.iter().map(|r| r.product).fold(0.0, f64::max);
    let all_pass = strictly_decreasing && max_product <= PRODUCT_CAP && rows.iter().all(|r| r.product > 0.0);
    Ok(LifespanReport { alpha: params.alpha, rows, strictly_decreasing, max_product, product_cap: PRODUCT_CAP, all_pass })
}
