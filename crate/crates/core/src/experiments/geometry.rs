//! Causal-speed ellipse, base width asymptotics and the transverse-curve
//! inequality ledger over random configurations.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::charflow::CharFlow;
use crate::geometry::{transverse_chain_check, ellipse_in_circle_check, width_asymptotic_check, ChainLedger, EllipseReport, WidthReport};
use crate::profiles::ProfileParams;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    /// Field values `v` spread evenly over `[−1/100, 0]`.
    pub v_samples: usize,
    pub chain_samples: usize,
    /// Upper end of the edge abscissa `a`, sampled log-uniformly from `ε/4`.
    pub a_max: f64,
    /// Largest time as a fraction of `t_ε`.
    pub t_max_fraction: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig { v_samples: 101, chain_samples: 1000, a_max: 0.005, t_max_fraction: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryTally {
    pub passed: usize,
    pub failed: usize,
    pub min_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSummary {
    pub samples: usize,
    pub seed: u64,
    pub assumption_failures: usize,
    pub all_pass_count: usize,
    pub entries: BTreeMap<&'static str, EntryTally>,
    pub max_measured_constant: f64,
    pub all_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryReport {
    pub ellipse: EllipseReport,
    pub tangency_ok: bool,
    pub width: WidthReport,
    pub chain: ChainSummary,
    #[serde(skip)]
    pub ledgers: Vec<ChainLedger>,
    pub all_pass: bool,
}

/// Random `(a, y, t)` with `ε/4 ≤ a`, `0 ≤ y ≤ a` and `b ≥ a`.
pub fn sample_chain_configs(flow: &CharFlow, cfg: &GeometryConfig, seed: u64) -> Result<Vec<ChainLedger>> {
    let eps = flow.params().epsilon;
    let lo = 0.25 * eps;
    if !(cfg.a_max > lo && cfg.a_max < 0.5) {
        return Err(Error::pre(format!("a_max = {} must lie in (eps/4, 1/2)", cfg.a_max)));
    }
    if !(cfg.t_max_fraction > 0.0 && cfg.t_max_fraction < 1.0) || !flow.t_eps.is_finite() {
        return Err(Error::pre("t_max_fraction must lie in (0, 1) and the flow must focus"));
    }
    let t_max = cfg.t_max_fraction * flow.t_eps;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(cfg.chain_samples);
    let mut tries = 0usize;
    while out.len() < cfg.chain_samples {
        tries += 1;
        if tries > 100 * cfg.chain_samples.max(1) {
            return Err(Error::pre("could not draw admissible chain configurations"));
        }
        let a = lo * (cfg.a_max / lo).powf(rng.gen::<f64>());
        let y = a * rng.gen::<f64>();
        let t = t_max * rng.gen::<f64>();
        match transverse_chain_check(flow, a, y, t) {
            Ok(l) => out.push(l),
            Err(Error::Precondition(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

pub fn summarize_chain(ledgers: &[ChainLedger], seed: u64) -> ChainSummary {
    let mut entries: BTreeMap<&'static str, EntryTally> = BTreeMap::new();
    for l in ledgers {
        for e in &l.entries {
            let t = entries.entry(e.name).or_insert(EntryTally { passed: 0, failed: 0, min_slack: f64::INFINITY });
            if e.pass {
                t.passed += 1;
            } else {
                t.failed += 1;
            }
            t.min_slack = t.min_slack.min(e.slack);
        }
    }
    let all_pass_count = ledgers.iter().filter(|l| l.all_pass()).count();
    ChainSummary {
        samples: ledgers.len(),
        seed,
        assumption_failures: ledgers.iter().filter(|l| !l.assumption_holds).count(),
        all_pass_count,
        entries,
        max_measured_constant: ledgers.iter().map(|l| l.measured_constant).fold(0.0, f64::max),
        all_pass: all_pass_count == ledgers.len(),
    }
}

pub fn run_geometry(params: ProfileParams, cfg: &GeometryConfig, seed: u64) -> Result<GeometryReport> {
    if cfg.v_samples < 2 {
        return Err(Error::pre("v_samples must be at least 2"));
    }
    let vs: Vec<f64> = (0..cfg.v_samples).map(|k| -0.01 * k as f64 / (cfg.v_samples - 1) as f64).collect();
    let ellipse = ellipse_in_circle_check(&vs)?;
    let tangency_ok = ellipse.samples.iter().filter(|s| s.v < 0.0).all(|s| {
        let near = |p: [f64; 2]| (p[0] + 1.0).abs() < 1e-6 && p[1].abs() < 1e-6;
        near(s.argmax) && s.tangency.is_some_and(near)
    });
    let width = width_asymptotic_check(&params)?;
    let flow = CharFlow::new(params)?;
    let ledgers = sample_chain_configs(&flow, cfg, seed)?;
    let chain = summarize_chain(&ledgers, seed);
    let all_pass = ellipse.pass && tangency_ok && width.pass && chain.all_pass;
    Ok(GeometryReport { ellipse, tangency_ok, width, chain, ledgers, all_pass })
}
