//! Dyadic block norms `‖ζ(·/λ) h_ε‖²_{Ḣ^{7/4}(ln H)^{−β}}`, `λ = 2^{−j}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::field::SampledField2D;
use crate::profiles::{zeta_block, InitialData, ProfileParams};
use crate::quad::{linear_fit, pairwise_sum};
use crate::sobolev::{fourier_norm, NormSpec};
use crate::{Error, Result};

pub const BLOCK_ORDER: f64 = 1.75;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DyadicConfig {
    pub j_min: i32,
    pub j_max: i32,
    /// Nodes per direction on the coarse block grid; the fine grid doubles it.
    pub nodes: usize,
    pub pad: usize,
    pub richardson_tol: f64,
    pub fit_j_min: i32,
    pub fit_j_max: i32,
    /// ε used for the slope fit, small enough that no fitted block sees the
    /// mollifier.
    pub fit_epsilon: f64,
    pub slope_margin: f64,
    pub tail_blocks: usize,
    pub tail_tol: f64,
    pub uniformity_eps: Vec<f64>,
    pub uniformity_tol: f64,
    /// Translation applied in the invariance check, in units of the fine spacing.
    pub shift_cells: f64,
    pub shift_tol: f64,
}

impl Default for DyadicConfig {
    fn default() -> Self {
        DyadicConfig {
            j_min: 2,
            j_max: 24,
            nodes: 128,
            pad: 4,
            richardson_tol: 0.05,
            fit_j_min: 4,
            fit_j_max: 20,
            fit_epsilon: 1e-8,
            slope_margin: 0.15,
            tail_blocks: 4,
            tail_tol: 0.05,
            uniformity_eps: vec![1e-3, 1e-4, 1e-5],
            uniformity_tol: 0.10,
            shift_cells: 0.37,
            shift_tol: 1e-3,
        }
    }
}

impl DyadicConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2 <= self.j_min && self.j_min <= self.j_max && self.j_max <= 24) {
            return Err(Error::pre(format!("j range [{}, {}] must lie in [2, 24]", self.j_min, self.j_max)));
        }
        if !(2 <= self.fit_j_min && self.fit_j_min + 2 <= self.fit_j_max && self.fit_j_max <= 24) {
            return Err(Error::pre("fit range must hold at least 3 blocks inside [2, 24]"));
        }
        if self.nodes < 16 || self.pad < 4 {
            return Err(Error::pre("block grids need at least 16 nodes and padding 4"));
        }
        if self.tail_blocks == 0 || self.tail_blocks as i32 > self.j_max - self.j_min + 1 {
            return Err(Error::pre("tail_blocks must be between 1 and the number of blocks"));
        }
        if !(self.fit_epsilon > 0.0) || self.uniformity_eps.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::pre("epsilon values must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockNorm {
    pub j: i32,
    pub lambda: f64,
    /// Value on the fine grid.
    pub norm_squared: f64,
    pub coarse: f64,
    pub richardson: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub epsilon: f64,
    pub blocks: Vec<BlockNorm>,
    pub used: Vec<i32>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonTotal {
    pub epsilon: f64,
    pub total_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicChecks {
    pub blocks_finite: bool,
    pub slope_negative: bool,
    pub slope_ok: bool,
    pub tail_ok: bool,
    pub uniformity_ok: bool,
    pub translation_ok: bool,
    pub all_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicReport {
    pub epsilon: f64,
    pub blocks: Vec<BlockNorm>,
    pub total_norm_squared: f64,
    pub tail_fraction: f64,
    pub fit: SlopeFit,
    /// `2α − 2β − δ`.
    pub block_exponent: f64,
    pub slope_limit: f64,
    pub uniformity: Vec<EpsilonTotal>,
    pub uniformity_spread: f64,
    pub translation_max_rel: f64,
    pub flagged: Vec<i32>,
    pub checks: DyadicChecks,
}

impl DyadicReport {
    pub const CURVE_HEADER: [&'static str; 6] = ["j", "lambda", "norm_squared", "coarse", "richardson", "flagged"];

    pub fn curve_rows(&self) -> Vec<Vec<f64>> {
        self.blocks
            .iter()
            .map(|b| vec![b.j as f64, b.lambda, b.norm_squared, b.coarse, b.richardson, b.flagged as u8 as f64])
            .collect()
    }
}

/// Sampled `ζ(x₁/λ) h_ε(x₁ − shift, x₂)` on an `n × n` grid covering the block.
pub fn block_field(data: &InitialData, j: i32, n: usize, pad: usize, shift: f64) -> SampledField2D {
    let lam = 2f64.powi(-j);
    let (lo, hi) = (0.45 * lam, 2.05 * lam);
    let xm = (2.0 * lam).min(0.5);
    let half = 1.1 * 0.5 * data.base_half_width(xm);
    let h = [(hi - lo) / (n - 1) as f64, 2.0 * half / (n - 1) as f64];
    SampledField2D::from_fn(n, n, h, [lo, -half], pad, |x1, x2| {
        let y = x1 - shift;
        let z = zeta_block(j, y);
        if z == 0.0 {
            0.0
        } else {
            z * data.h_eps(y, x2)
        }
    })
}

fn fine_spacing(j: i32, n: usize) -> f64 {
    1.6 * 2f64.powi(-j) / (2 * n - 1) as f64
}

fn block_support_empty(data: &InitialData, j: i32) -> bool {
    let lam = 2f64.powi(-j);
    2.0 * lam <= 0.5 * data.params.epsilon || 0.5 * lam >= 0.5
}

/// Squared block norm on a grid of `n` nodes per direction.
pub fn block_norm_squared(data: &InitialData, j: i32, n: usize, pad: usize, shift: f64) -> Result<f64> {
    if j < 0 {
        return Err(Error::Domain { name: "j", value: j as f64, domain: "[0, inf)" });
    }
    if block_support_empty(data, j) && shift == 0.0 {
        return Ok(0.0);
    }
    let f = block_field(data, j, n, pad, shift);
    let spec = NormSpec::homogeneous(BLOCK_ORDER, data.params.beta);
    Ok(fourier_norm(&f, &spec)?.powi(2))
}

fn block(data: &InitialData, j: i32, cfg: &DyadicConfig) -> Result<BlockNorm> {
    let coarse = block_norm_squared(data, j, cfg.nodes, cfg.pad, 0.0)?;
    let fine = block_norm_squared(data, j, 2 * cfg.nodes, cfg.pad, 0.0)?;
    let richardson = if fine == 0.0 { 0.0 } else { ((coarse - fine) / fine).abs() };
    Ok(BlockNorm {
        j,
        lambda: 2f64.powi(-j),
        norm_squared: fine,
        coarse,
        richardson,
        flagged: richardson > cfg.richardson_tol,
    })
}

pub fn block_sweep(params: ProfileParams, js: std::ops::RangeInclusive<i32>, cfg: &DyadicConfig) -> Result<Vec<BlockNorm>> {
    let data = InitialData::new(params)?;
    let js: Vec<i32> = js.collect();
    js.par_iter().map(|&j| block(&data, j, cfg)).collect()
}

fn total(blocks: &[BlockNorm]) -> f64 {
    pairwise_sum(&blocks.iter().map(|b| b.norm_squared).collect::<Vec<_>>())
}

pub fn run_dyadic(params: ProfileParams, cfg: &DyadicConfig) -> Result<DyadicReport> {
    cfg.validate()?;
    let data = InitialData::new(params)?;
    let blocks = block_sweep(params, cfg.j_min..=cfg.j_max, cfg)?;
    let total_sq = total(&blocks);
    let tail: f64 = blocks[blocks.len() - cfg.tail_blocks..].iter().map(|b| b.norm_squared).sum();
    let tail_fraction = if total_sq > 0.0 { tail / total_sq } else { 0.0 };

    let fit_blocks = block_sweep(params.with_epsilon(cfg.fit_epsilon), cfg.fit_j_min..=cfg.fit_j_max, cfg)?;
    let used: Vec<&BlockNorm> = fit_blocks.iter().filter(|b| !b.flagged && b.norm_squared > 0.0).collect();
    if used.len() < 3 {
        return Err(Error::Quadrature(format!("only {} resolvable blocks in the fit range", used.len())));
    }
    let x: Vec<f64> = used.iter().map(|b| (b.j as f64 * std::f64::consts::LN_2).ln()).collect();
    let y: Vec<f64> = used.iter().map(|b| b.norm_squared.ln()).collect();
    let (intercept, slope, r2) = linear_fit(&x, &y);
    let fit = SlopeFit {
        epsilon: cfg.fit_epsilon,
        used: used.iter().map(|b| b.j).collect(),
        blocks: fit_blocks.clone(),
        slope,
        intercept,
        r2,
    };

    let mut uniformity = Vec::with_capacity(cfg.uniformity_eps.len());
    for &e in &cfg.uniformity_eps {
        let t = if e == params.epsilon {
            total_sq
        } else {
            total(&block_sweep(params.with_epsilon(e), cfg.j_min..=cfg.j_max, cfg)?)
        };
        uniformity.push(EpsilonTotal { epsilon: e, total_norm: t.sqrt() });
    }
    let (lo, hi) = uniformity
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), u| (lo.min(u.total_norm), hi.max(u.total_norm)));
    let uniformity_spread = if uniformity.is_empty() { 0.0 } else { (hi - lo) / lo };

    let shifted: Vec<f64> = blocks
        .par_iter()
        .filter(|b| b.norm_squared > 0.0)
        .map(|b| {
            let a = cfg.shift_cells * fine_spacing(b.j, cfg.nodes);
            let v = block_norm_squared(&data, b.j, 2 * cfg.nodes, cfg.pad, a)?;
            Ok(((v - b.norm_squared) / b.norm_squared).abs())
        })
        .collect::<Result<Vec<_>>>()?;
    let translation_max_rel = shifted.into_iter().fold(0.0, f64::max);

    let block_exponent = params.block_exponent();
    let slope_limit = block_exponent + cfg.slope_margin;
    let mut checks = DyadicChecks {
        blocks_finite: blocks.iter().chain(&fit_blocks).all(|b| b.norm_squared.is_finite()),
        slope_negative: slope < 0.0,
        slope_ok: slope <= slope_limit,
        tail_ok: tail_fraction < cfg.tail_tol,
        uniformity_ok: uniformity_spread <= cfg.uniformity_tol,
        translation_ok: translation_max_rel <= cfg.shift_tol,
        all_pass: false,
    };
    checks.all_pass = checks.blocks_finite
        && checks.slope_negative
        && checks.slope_ok
        && checks.tail_ok
        && checks.uniformity_ok
        && checks.translation_ok;
    let flagged = blocks.iter().chain(&fit_blocks).filter(|b| b.flagged).map(|b| b.j).collect();

    Ok(DyadicReport {
        epsilon: params.epsilon,
        blocks,
        total_norm_squared: total_sq,
        tail_fraction,
        fit,
        block_exponent,
        slope_limit,
        uniformity,
        uniformity_spread,
        translation_max_rel,
        flagged,
        checks,
    })
}
