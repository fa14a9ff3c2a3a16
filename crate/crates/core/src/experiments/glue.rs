//! Finite partial sums of the glued sequence of rescaled, translated solutions.
//!
//! `ln ε_n = −max(n⁵, n^{6/α})` is carried symbolically; `ε_n` itself
//! underflows for every `n ≥ 2` at small `α`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MAX_TERMS: u32 = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlueConfig {
    pub n_max: u32,
    pub omega: f64,
    pub gamma: f64,
    /// Constant `C` in `t_ε ≤ C |ln ε|^{−α}`.
    pub lifespan_constant: f64,
    /// Smallest gap between translated supports.
    pub grid_cell: f64,
}

impl Default for GlueConfig {
    fn default() -> Self {
        GlueConfig { n_max: MAX_TERMS, omega: -1.0, gamma: 1.0, lifespan_constant: 1.05, grid_cell: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlueTerm {
    pub n: u32,
    pub lambda: f64,
    pub log_eps: f64,
    pub log10_eps: f64,
    /// `|ln ε_n|^α`.
    pub log_eps_pow_alpha: f64,
    /// Upper bound `C λ^{−γ} |ln ε_n|^{−α}` on the rescaled lifespan.
    pub t_n: f64,
    pub t_n_ok: bool,
    /// `2λ^ω λ^{7γ/4}(1 + 2|ln λ^γ|)^β`.
    pub norm_bound: f64,
    pub partial_sum: f64,
    /// Unscaled support `[ε_n/2, 2|ln ε_n|^{−α/2}]`, lower end as `log10`.
    pub log10_support_lo: f64,
    pub support_hi: f64,
    /// Support length after the dilation by `λ^{−γ}`.
    pub scaled_length: f64,
    /// Translated support `[start, end]` of the rescaled term.
    pub start: f64,
    pub end: f64,
    pub gap_before: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlueReport {
    pub alpha: f64,
    pub beta: f64,
    pub omega: f64,
    pub gamma: f64,
    pub terms: Vec<GlueTerm>,
    pub supports_disjoint: bool,
    pub all_t_n_ok: bool,
    pub partial_sums_increasing: bool,
    pub terms_decreasing: bool,
    /// `∫_N^∞ 2x^{−3}(1 + 8 ln x) dx = (5 + 8 ln N)/N²`, an upper bound on the
    /// remaining norm-bound sum when `β ≤ 1`.
    pub tail_bound: Option<f64>,
    /// `Σ 2/n³ + gaps`, the extent obtained from the unscaled supports.
    pub unscaled_extent_bound: f64,
    pub cumulative_extent: f64,
    pub all_pass: bool,
}

impl GlueReport {
    pub const CURVE_HEADER: [&'static str; 8] =
        ["n", "lambda", "log_eps", "t_n", "norm_bound", "partial_sum", "start", "end"];

    pub fn curve_rows(&self) -> Vec<Vec<f64>> {
        self.terms
            .iter()
            .map(|t| vec![t.n as f64, t.lambda, t.log_eps, t.t_n, t.norm_bound, t.partial_sum, t.start, t.end])
            .collect()
    }
}

pub fn build_glued_sequence(alpha: f64, beta: f64, cfg: &GlueConfig) -> Result<GlueReport> {
    if !(2..=MAX_TERMS).contains(&cfg.n_max) {
        return Err(Error::pre(format!("n_max = {} must lie in [2, {MAX_TERMS}]", cfg.n_max)));
    }
    if (cfg.omega + cfg.gamma).abs() > 1e-12 {
        return Err(Error::pre("omega + gamma must vanish"));
    }
    if !(alpha > 0.0 && beta >= 0.0 && cfg.grid_cell > 0.0 && cfg.lifespan_constant > 0.0) {
        return Err(Error::pre("alpha, grid_cell and lifespan_constant must be positive, beta non-negative"));
    }
    let mut terms: Vec<GlueTerm> = Vec::new();
    let mut partial = 0.0;
    let mut cursor = 0.0;
    let mut extent_bound = 0.0;
    for n in 2..=cfg.n_max {
        let nf = n as f64;
        let lambda = nf.powi(-4);
        let log_eps = -nf.powi(5).max(nf.powf(6.0 / alpha));
        let lpa = (-log_eps).powf(alpha);
        let scale = lambda.powf(-cfg.gamma);
        let t_n = cfg.lifespan_constant * scale / lpa;
        let norm_bound = 2.0
            * lambda.powf(cfg.omega)
            * lambda.powf(1.75 * cfg.gamma)
            * (1.0 + 2.0 * (cfg.gamma * lambda.ln()).abs()).powf(beta);
        partial += norm_bound;
        let support_hi = 2.0 / (-log_eps).powf(0.5 * alpha);
        let scaled_length = scale * support_hi;
        let gap = cfg.grid_cell + terms.last().map_or(0.0, |p| p.t_n) + t_n;
        let start = if terms.is_empty() { 0.0 } else { cursor + gap };
        let end = start + scaled_length;
        cursor = end;
        extent_bound += 2.0 / nf.powi(3) + if terms.is_empty() { 0.0 } else { gap };
        terms.push(GlueTerm {
            n,
            lambda,
            log_eps,
            log10_eps: log_eps / std::f64::consts::LN_10,
            log_eps_pow_alpha: lpa,
            t_n,
            t_n_ok: t_n <= 1.0 / nf,
            norm_bound,
            partial_sum: partial,
            log10_support_lo: (log_eps - 2f64.ln()) / std::f64::consts::LN_10,
            support_hi,
            scaled_length,
            start,
            end,
            gap_before: if n == 2 { 0.0 } else { gap },
        });
    }
    let supports_disjoint = terms.windows(2).all(|w| w[1].start - w[0].end >= cfg.grid_cell);
    if !supports_disjoint {
        return Err(Error::Construction("translated supports overlap".into()));
    }
    let all_t_n_ok = terms.iter().all(|t| t.t_n_ok);
    let partial_sums_increasing = terms.windows(2).all(|w| w[1].partial_sum > w[0].partial_sum);
    let terms_decreasing = terms.windows(2).all(|w| w[1].norm_bound < w[0].norm_bound);
    let nl = cfg.n_max as f64;
    let tail_bound = (beta <= 1.0).then(|| (5.0 + 8.0 * nl.ln()) / (nl * nl));
    let all_pass = all_t_n_ok && partial_sums_increasing && terms_decreasing;
    Ok(GlueReport {
        alpha,
        beta,
        omega: cfg.omega,
        gamma: cfg.gamma,
        terms,
        supports_disjoint,
        all_t_n_ok,
        partial_sums_increasing,
        terms_decreasing,
        tail_bound,
        unscaled_extent_bound: extent_bound,
        cumulative_extent: cursor,
        all_pass,
    })
}
