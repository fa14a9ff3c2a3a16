use serde::Serialize;

use super::{NormSpec, Spectrum};
use crate::field::SampledField2D;
use crate::{Error, Result};

/// Largest `L = ln r ≥ 0` with `(1 + L)^{2β} = e^{2λL}`; beyond `r` the log
/// weight is dominated by `|ξ|^{2λ}`.
pub fn log_crossover(beta: f64, lambda: f64) -> f64 {
    if beta <= lambda {
        return 0.0;
    }
    // g > 0 on (0, root) and g < 0 beyond
    let g = |l: f64| 2.0 * beta * (1.0 + l).ln() - 2.0 * lambda * l;
    let (mut lo, mut hi) = (0.0, 1.0);
    while g(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if g(m) > 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    hi
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub s: f64,
    pub beta: f64,
    pub lambda: f64,
    /// `‖f‖_{Ḣ^s(ln H)^{−β}}`.
    pub log_norm: f64,
    /// `‖f‖_{Ḣ^s}`.
    pub plain_norm: f64,
    /// `‖f‖_{Ḣ^{s−λ}}`.
    pub lower_norm: f64,
    /// `‖f‖_{H^s}`.
    pub inhomogeneous_norm: f64,
    /// `ln r` of the crossover radius.
    pub crossover_log_radius: f64,
    /// `log₁₀(π r^{2+2s−2λ} ‖f‖²_{L¹})`, the low-frequency term bounding `‖f‖²_{Ḣ^{s−λ}}`.
    pub ball_term_log10: f64,
    pub log_le_plain: bool,
    pub inhomogeneous_ge_homogeneous: bool,
    pub lower_bounded: bool,
    pub pass: bool,
}

/// Compares the log-perturbed norm with its two neighbours in the scale.
pub fn embedding_check(f: &SampledField2D, s: f64, beta: f64, lambda: f64) -> Result<EmbeddingReport> {
    if !(lambda > 0.0 && lambda <= s) {
        return Err(Error::pre(format!("need 0 < lambda <= s, got lambda = {lambda}, s = {s}")));
    }
    let log_spec = NormSpec::homogeneous(s, beta);
    let plain_spec = NormSpec::homogeneous(s, 0.0);
    let lower_spec = NormSpec::homogeneous(s - lambda, 0.0);
    let inhom_spec = NormSpec::inhomogeneous(s, 0.0);
    for spec in [&log_spec, &plain_spec, &lower_spec, &inhom_spec] {
        spec.validate()?;
    }
    let sp = Spectrum::of(f)?;
    let log_sq = sp.norm_squared(&log_spec);
    let plain_sq = sp.norm_squared(&plain_spec);
    let lower_sq = sp.norm_squared(&lower_spec);
    let inhom_sq = sp.norm_squared(&inhom_spec);
    let l = log_crossover(beta, lambda);
    let l1 = f.l1_norm();
    let ln_ball = std::f64::consts::PI.ln() + (2.0 + 2.0 * s - 2.0 * lambda) * l + 2.0 * l1.ln();
    let bound = if ln_ball > 700.0 { f64::INFINITY } else { ln_ball.exp() + log_sq };
    let log_le_plain = log_sq <= plain_sq;
    let inhomogeneous_ge_homogeneous = inhom_sq >= plain_sq;
    let lower_bounded = lower_sq <= bound;
    Ok(EmbeddingReport {
        s,
        beta,
        lambda,
        log_norm: log_sq.sqrt(),
        plain_norm: plain_sq.sqrt(),
        lower_norm: lower_sq.sqrt(),
        inhomogeneous_norm: inhom_sq.sqrt(),
        crossover_log_radius: l,
        ball_term_log10: ln_ball / std::f64::consts::LN_10,
        log_le_plain,
        inhomogeneous_ge_homogeneous,
        lower_bounded,
        pass: log_le_plain && inhomogeneous_ge_homogeneous && lower_bounded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpgradeReport {
    pub s: f64,
    pub beta: f64,
    /// `∫ (1+|ξ|²)^s (1+|ln|ξ||)^{−2β} |f̂|²`.
    pub inhomogeneous_log_sq: f64,
    pub inner_part: f64,
    /// `2^s ∫_{|ξ|<1} |f̂|²`.
    pub inner_bound: f64,
    pub outer_part: f64,
    /// `2^s ∫_{|ξ|≥1} |ξ|^{2s} (1+|ln|ξ||)^{−2β} |f̂|²`.
    pub outer_bound: f64,
    /// `2^s ‖f̂‖²_{L²} + 2^s ‖f‖²_{Ḣ^s(ln H)^{−β}}`.
    pub rhs: f64,
    /// `rhs − inhomogeneous_log_sq`.
    pub slack: f64,
    pub holds: bool,
}

/// Splits the inhomogeneous log-norm at `|ξ| = 1` and bounds each part by
/// the `L²` norm and the homogeneous log-norm.
pub fn compact_support_upgrade(f: &SampledField2D, s: f64, beta: f64) -> Result<UpgradeReport> {
    NormSpec::homogeneous(s, beta).validate()?;
    let sp = Spectrum::of(f)?;
    let two_s = 2f64.powf(s);
    let inh = NormSpec::inhomogeneous(s, beta);
    let hom = NormSpec::homogeneous(s, beta);
    let inside = |a: f64, b: f64| a.hypot(b) < 1.0;
    let sq = |w: f64| w * w;
    let inner_part = sp.weighted_square(|a, b| if inside(a, b) { sq(inh.weight(a, b)) } else { 0.0 });
    let outer_part = sp.weighted_square(|a, b| if inside(a, b) { 0.0 } else { sq(inh.weight(a, b)) });
    let inner_l2 = sp.weighted_square(|a, b| if inside(a, b) { 1.0 } else { 0.0 });
    let outer_hom = sp.weighted_square(|a, b| if inside(a, b) { 0.0 } else { sq(hom.weight(a, b)) });
    let l2 = sp.weighted_square(|_, _| 1.0);
    let hom_full = sp.norm_squared(&hom);
    let inner_bound = two_s * inner_l2;
    let outer_bound = two_s * outer_hom;
    let lhs = inner_part + outer_part;
    let rhs = two_s * l2 + two_s * hom_full;
    Ok(UpgradeReport {
        s,
        beta,
        inhomogeneous_log_sq: lhs,
        inner_part,
        inner_bound,
        outer_part,
        outer_bound,
        rhs,
        slack: rhs - lhs,
        holds: inner_part <= inner_bound && outer_part <= outer_bound && lhs <= rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossover_root() {
        let l = log_crossover(0.6, 0.01);
        let g = 1.2 * (1.0 + l).ln() - 0.02 * l;
        assert!(g.abs() < 1e-9 && l > 100.0);
        assert_eq!(log_crossover(0.0, 0.01), 0.0);
    }
}
