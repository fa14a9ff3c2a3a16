//! Fractional and log-perturbed Sobolev norms of sampled 2-D fields.
//!
//! Fourier transforms use `f̂(ξ) = ∫ f(x) e^{−2πi⟨x,ξ⟩} dx`.

mod embedding;
mod fourier;
mod kernel;

pub use embedding::{compact_support_upgrade, embedding_check, log_crossover, EmbeddingReport, UpgradeReport};
pub use fourier::{fourier_norm, fourier_norm_report, Spectrum};
pub use kernel::{
    displayed_constant, kernel_constant, kernel_norm_report, kernel_norm_x1, kernel_pairing,
    second_derivative_x1,
};

use serde::Serialize;

use crate::field::GridInfo;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Directional {
    /// Weight in `|ξ|`.
    Full,
    /// Weight in `|ξ₁|` only.
    X1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormSpec {
    pub s: f64,
    pub beta: f64,
    pub homogeneous: bool,
    pub directional: Directional,
}

impl NormSpec {
    pub fn homogeneous(s: f64, beta: f64) -> Self {
        NormSpec { s, beta, homogeneous: true, directional: Directional::Full }
    }

    pub fn inhomogeneous(s: f64, beta: f64) -> Self {
        NormSpec { s, beta, homogeneous: false, directional: Directional::Full }
    }

    pub fn x1_only(self) -> Self {
        NormSpec { directional: Directional::X1, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=4.0).contains(&self.s) {
            return Err(Error::Domain { name: "s", value: self.s, domain: "[0, 4]" });
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::Domain { name: "beta", value: self.beta, domain: "[0, inf)" });
        }
        Ok(())
    }

    pub fn kind(&self) -> String {
        let base = if self.homogeneous { "homogeneous" } else { "inhomogeneous" };
        match self.directional {
            Directional::Full => base.to_string(),
            Directional::X1 => format!("{base}_x1"),
        }
    }

    /// `|ξ|^s/(1+|ln|ξ||)^β` or `(1+|ξ|²)^{s/2}/(1+|ln|ξ||)^β`.
    pub fn weight(&self, xi1: f64, xi2: f64) -> f64 {
        let r = match self.directional {
            Directional::Full => xi1.hypot(xi2),
            Directional::X1 => xi1.abs(),
        };
        if r == 0.0 {
            return if self.homogeneous {
                if self.s == 0.0 && self.beta == 0.0 { 1.0 } else { 0.0 }
            } else {
                1.0
            };
        }
        let base = if self.homogeneous { r.powf(self.s) } else { (1.0 + r * r).powf(0.5 * self.s) };
        if self.beta == 0.0 {
            base
        } else {
            base / (1.0 + r.ln().abs()).powf(self.beta)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    pub norm_kind: String,
    pub s: f64,
    pub beta: f64,
    pub lambda: Option<f64>,
    pub value: f64,
    pub error_estimate: f64,
    pub grid: GridInfo,
    pub method: &'static str,
}
