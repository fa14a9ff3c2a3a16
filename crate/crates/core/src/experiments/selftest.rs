//! Spectral norm engine against the Gaussian closed form.

use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::field::SampledField2D;
use crate::sobolev::{fourier_norm, NormSpec};
use crate::Result;

use std::f64::consts::PI;

pub const ORDERS: [f64; 4] = [0.0, 0.75, 1.75, 2.75];
pub const TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelftestRow {
    pub s: f64,
    pub computed: f64,
    pub closed_form: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub nodes: usize,
    pub rows: Vec<SelftestRow>,
    pub max_rel_error: f64,
    pub all_pass: bool,
}

/// `‖e^{−π|x|²}‖_{Ḣ^s(ℝ²)} = (Γ(s+1)/(2(2π)^s))^{1/2}`.
pub fn gaussian_norm(s: f64) -> f64 {
    (gamma(s + 1.0) / (2.0 * (2.0 * PI).powf(s))).sqrt()
}

/// `e^{−π|x|²}` on `[−4, 4]²`, values below `1e-16` set to zero.
pub fn gaussian_field(n: usize) -> SampledField2D {
    let h = 8.0 / n as f64;
    SampledField2D::centered([n + 1, n + 1], [h, h], [0.0, 0.0], 4, |x, y| {
        let v = (-PI * (x * x + y * y)).exp();
        if v < 1e-16 { 0.0 } else { v }
    })
}

pub fn norms_selftest(n: usize) -> Result<SelftestReport> {
    let f = gaussian_field(n);
    let mut rows = Vec::new();
    for s in ORDERS {
        let computed = fourier_norm(&f, &NormSpec::homogeneous(s, 0.0))?;
        let closed_form = gaussian_norm(s);
        rows.push(SelftestRow { s, computed, closed_form, rel_error: (computed / closed_form - 1.0).abs() });
    }
    let max_rel_error = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    Ok(SelftestReport { nodes: n, rows, max_rel_error, all_pass: max_rel_error <= TOLERANCE })
}
