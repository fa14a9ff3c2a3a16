use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use statrs::function::gamma::gamma;

use super::NormReport;
use crate::field::SampledField2D;
use crate::quad::{cubic_toeplitz_weights, pairwise_sum};
use crate::{Error, Result};

use std::f64::consts::PI;

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..0.125).contains(&lambda) {
        return Err(Error::pre(format!("lambda = {lambda} must lie in [0, 1/8)")));
    }
    Ok(())
}

/// Constant `c` with `‖f‖²_{Ḣ^{7/4−λ}_{x₁}} = c ∬ f₁₁(x) |x₁−y|^{−1/2+2λ} f₁₁(y, x₂)`.
pub fn kernel_constant(lambda: f64) -> f64 {
    (2.0 * PI).powi(-4) * PI.powf(2.0 * lambda) * gamma(0.25 - lambda) / gamma(0.25 + lambda)
}

/// `(2π)^{−1/2−2λ} π^{2λ} Γ(1/4−λ)/Γ(1/4+λ)`, the leading constant in the
/// usual statement of the kernel representation. It differs from
/// [`kernel_constant`] by the factor `(2π)^{7/2−2λ}`.
pub fn displayed_constant(lambda: f64) -> f64 {
    (2.0 * PI).powf(-0.5 - 2.0 * lambda) * PI.powf(2.0 * lambda) * gamma(0.25 - lambda) / gamma(0.25 + lambda)
}

/// `∂²f/∂x₁²` by spectral differentiation of every zero-padded row.
pub fn second_derivative_x1(f: &SampledField2D) -> Result<SampledField2D> {
    f.check_spectral()?;
    let n = f.pad * f.nx1;
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut out = f.zeros_like();
    out.values.par_chunks_mut(f.nx1).enumerate().for_each(|(i2, dst)| {
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (b, &v) in buf.iter_mut().zip(f.row(i2)) {
            *b = Complex64::new(v, 0.0);
        }
        fwd.process(&mut buf);
        for (k, b) in buf.iter_mut().enumerate() {
            let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            let w = 2.0 * PI * kk / (n as f64 * f.h1);
            *b *= -w * w / n as f64;
        }
        if n.is_multiple_of(2) {
            buf[n / 2] = Complex64::new(0.0, 0.0);
        }
        inv.process(&mut buf);
        for (d, b) in dst.iter_mut().zip(&buf) {
            *d = b.re;
        }
    });
    Ok(out)
}

/// `∬ g₁(x₁, x₂) ∫ |x₁ − y|^{−1/2+2λ} g₂(y, x₂) dy dx₂ dx₁` by a product rule
/// exact for cubics against the kernel.
pub fn kernel_pairing(g1: &SampledField2D, g2: &SampledField2D, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if !g1.same_grid(g2) {
        return Err(Error::pre("kernel pairing needs both fields on one grid"));
    }
    let p = 0.5 - 2.0 * lambda;
    let n = g1.nx1;
    let kmax = n + 1;
    let w = cubic_toeplitz_weights(kmax, p);
    let scale = g1.h1.powf(1.0 - p) * g1.h1 * g1.h2;
    let rows: Vec<f64> = (0..g1.nx2)
        .into_par_iter()
        .map(|i2| {
            let (a, b) = (g1.row(i2), g2.row(i2));
            if a.iter().all(|&v| v == 0.0) || b.iter().all(|&v| v == 0.0) {
                return 0.0;
            }
            let terms: Vec<f64> = (0..n)
                .map(|i| {
                    if a[i] == 0.0 {
                        return 0.0;
                    }
                    let inner: Vec<f64> = (0..n).map(|l| w[i + kmax - l] * b[l]).collect();
                    a[i] * pairwise_sum(&inner)
                })
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    Ok(pairwise_sum(&rows) * scale)
}

/// `‖f‖_{Ḣ^{7/4−λ}_{x₁}}` through the singular kernel. `d2` supplies
/// `∂²f/∂x₁²` on the same grid; otherwise it is computed spectrally.
pub fn kernel_norm_x1(f: &SampledField2D, lambda: f64, d2: Option<&SampledField2D>) -> Result<f64> {
    check_lambda(lambda)?;
    f.check_compact()?;
    let owned;
    let g = match d2 {
        Some(g) => {
            if !g.same_grid(f) {
                return Err(Error::pre("second derivative lives on a different grid"));
            }
            g
        }
        None => {
            owned = second_derivative_x1(f)?;
            &owned
        }
    };
    let form = kernel_pairing(g, g, lambda)?;
    Ok((kernel_constant(lambda) * form).max(0.0).sqrt())
}

/// Kernel norm with the change observed when the `x₁` spacing is doubled.
pub fn kernel_norm_report(f: &SampledField2D, lambda: f64, d2: Option<&SampledField2D>) -> Result<NormReport> {
    let value = kernel_norm_x1(f, lambda, d2)?;
    let coarse_g = match d2 {
        Some(g) => g.coarsened_x1(),
        None => second_derivative_x1(f)?.coarsened_x1(),
    };
    let coarse = (kernel_constant(lambda) * kernel_pairing(&coarse_g, &coarse_g, lambda)?).max(0.0).sqrt();
    Ok(NormReport {
        norm_kind: "homogeneous_x1".into(),
        s: 1.75 - lambda,
        beta: 0.0,
        lambda: Some(lambda),
        value,
        error_estimate: (value - coarse).abs(),
        grid: f.info(),
        method: "kernel",
    })
}
