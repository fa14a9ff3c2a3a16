//! Norm of `f_λ(x) = λ^ω f(λ^γ x)` in `Ḣ^{11/4}(ln H)^{−β}`.

use serde::Serialize;

use crate::field::SampledField2D;
use crate::smooth::plateau;
use crate::sobolev::{fourier_norm, NormSpec};
use crate::{Error, Result};

pub const SCALING_ORDER: f64 = 2.75;
pub const RATIO_CAP: f64 = 2.0;
pub const RATIO_SLACK: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub lambda: f64,
    pub norm: f64,
    /// `λ^ω λ^{7γ/4} (1 + 2|ln λ^γ|)^β ‖f‖`.
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub omega: f64,
    pub gamma: f64,
    pub beta: f64,
    pub base_norm: f64,
    pub rows: Vec<ScalingRow>,
    /// Exponent of λ from the first and last rows.
    pub measured_exponent: Option<f64>,
    /// `ω + 7γ/4`.
    pub expected_exponent: f64,
    pub max_ratio: f64,
    pub all_pass: bool,
}

impl ScalingReport {
    pub const CURVE_HEADER: [&'static str; 4] = ["lambda", "norm", "bound", "ratio"];

    pub fn curve_rows(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| vec![r.lambda, r.norm, r.bound, r.ratio]).collect()
    }
}

/// Radial plateau bump on `[−0.6, 0.6]²`.
pub fn default_test_field() -> SampledField2D {
    let n = 129;
    let h = 1.2 / (n - 1) as f64;
    SampledField2D::from_fn(n, n, [h, h], [-0.6, -0.6], 4, |x1, x2| plateau(x1.hypot(x2), 0.15, 0.5).v)
}

/// `f_λ` sampled on the grid dilated by `λ^{−γ}`.
pub fn rescaled(f: &SampledField2D, omega: f64, gamma: f64, lam: f64) -> SampledField2D {
    if lam == 1.0 {
        return f.clone();
    }
    let k = lam.powf(-gamma);
    let mut g = f.scaled(lam.powf(omega));
    g.h1 *= k;
    g.h2 *= k;
    g.origin = [f.origin[0] * k, f.origin[1] * k];
    g
}

pub fn scale_norm_check(f: &SampledField2D, omega: f64, gamma: f64, lam_list: &[f64], beta: f64) -> Result<ScalingReport> {
    if (omega + gamma).abs() > 1e-12 {
        return Err(Error::pre(format!("omega + gamma = {} must vanish", omega + gamma)));
    }
    if let Some(&l) = lam_list.iter().find(|&&l| !(l > 0.0 && l <= 1.0)) {
        return Err(Error::Domain { name: "lambda", value: l, domain: "(0, 1]" });
    }
    let spec = NormSpec::homogeneous(SCALING_ORDER, beta);
    let base_norm = fourier_norm(f, &spec)?;
    if !(base_norm > 0.0) {
        return Err(Error::pre("test field has zero norm"));
    }
    let mut rows = Vec::with_capacity(lam_list.len());
    for &lam in lam_list {
        let norm = fourier_norm(&rescaled(f, omega, gamma, lam), &spec)?;
        let bound = lam.powf(omega) * lam.powf(1.75 * gamma) * (1.0 + 2.0 * (gamma * lam.ln()).abs()).powf(beta) * base_norm;
        rows.push(ScalingRow { lambda: lam, norm, bound, ratio: norm / bound });
    }
    let measured_exponent = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) if a.lambda != b.lambda => Some((a.norm / b.norm).ln() / (a.lambda / b.lambda).ln()),
        _ => None,
    };
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let all_pass = max_ratio <= RATIO_CAP * (1.0 + RATIO_SLACK);
    Ok(ScalingReport {
        omega,
        gamma,
        beta,
        base_norm,
        rows,
        measured_exponent,
        expected_exponent: omega + 1.75 * gamma,
        max_ratio,
        all_pass,
    })
}
