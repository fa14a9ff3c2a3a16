//! Growth of the localized `Ḣ^{7/4−λ}_{x₁}` quantity as `t → t_ε`.
//!
//! Everything is computed in the label variable `a` with `x₁ = φ(t, a)`.
//! For `g = ∂²_{x₁}(v ψ¹)` the pulled-back density is
//! `G(a) = φ_y · g(φ(t, a))`, and
//! `|φ(a) − φ(b)|^{−p} = |a − b|^{−p} Q(a, b)^{−p}` with `Q` the difference
//! quotient of `φ`, so the only singular factor is `|a − b|^{−p}`, which is
//! integrated exactly against piecewise linear interpolants.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charflow::CharFlow;
use crate::field::SampledField2D;
use crate::quad::{linear_fit, pairwise_sum, GaussLegendre};
use crate::smooth::plateau;
use crate::sobolev::{fourier_norm, kernel_constant, NormSpec};
use crate::{Error, Result};

/// How the label half-window `η_ε` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EtaRule {
    /// `η = (ν_ε − ε/2)/2`, half the distance from the focus label to the
    /// start of the mollifier ramp.
    #[default]
    RampHalf,
    /// `η = (ε − ν_ε)/2`.
    UpperGap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlowupConfig {
    /// `t/t_ε` for every sample.
    pub t_fractions: Vec<f64>,
    /// Label nodes on the localization window.
    pub nodes: usize,
    pub eta_rule: EtaRule,
    /// Largest relative change of `I²` between `nodes/2` and `nodes`.
    pub refine_tol: f64,
    /// Samples with `t/t_ε` at most this value are also measured spectrally.
    pub crosscheck_below: f64,
    pub crosscheck_nodes: usize,
    pub fit_points: usize,
    pub exponent_margin: f64,
    pub i1_exponent_cap: f64,
    pub min_ratio: f64,
}

impl Default for BlowupConfig {
    fn default() -> Self {
        BlowupConfig {
            t_fractions: default_fractions(),
            nodes: 800,
            eta_rule: EtaRule::RampHalf,
            refine_tol: 1e-2,
            crosscheck_below: 0.95,
            crosscheck_nodes: 513,
            fit_points: 6,
            exponent_margin: 0.4,
            i1_exponent_cap: 1.2,
            min_ratio: 10.0,
        }
    }
}

/// `1 − 0.1·2^{−k}`, `k = 0..10`.
pub fn default_fractions() -> Vec<f64> {
    (0..=10).map(|k| 1.0 - 0.1 * 2f64.powi(-k)).collect()
}

impl BlowupConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t_fractions.len() < self.fit_points.max(4) {
            return Err(Error::pre(format!(
                "need at least {} time samples, got {}",
                self.fit_points.max(4),
                self.t_fractions.len()
            )));
        }
        if self.fit_points < 4 {
            return Err(Error::pre("fit_points must be at least 4"));
        }
        for w in self.t_fractions.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::pre("t_fractions must be strictly increasing"));
            }
        }
        for &f in &self.t_fractions {
            if !(0.9..1.0 - 1e-6).contains(&f) {
                return Err(Error::Domain { name: "t_fraction", value: f, domain: "[0.9, 1 - 1e-6)" });
            }
        }
        if self.nodes < 32 {
            return Err(Error::pre("nodes must be at least 32"));
        }
        if self.crosscheck_nodes < 33 {
            return Err(Error::pre("crosscheck_nodes must be at least 33"));
        }
        Ok(())
    }
}

/// Sums of the four-way split of the middle-region integrand over the label
/// square `[ζ^{2+}, ζ^{3−}]²`. `terms[k]` are (i)..(iv); the quadrants split
/// (iv) by the side of `ν_ε` of each variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadrantSplit {
    pub terms: [f64; 4],
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    /// `∫∫_{δ∪β}` of the (iv) integrand.
    pub j: f64,
    /// Sampled node pairs where the (iv) integrand has the wrong sign.
    pub sign_violations: usize,
    pub sign_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupSample {
    pub t: f64,
    pub gap: f64,
    /// `ζ¹..ζ⁴`: labels of `x₁ = X ∓ 2δ, X ∓ δ` with `X = φ(t, ν_ε)`.
    pub zeta: [f64; 4],
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    /// `c·I_ε·(I¹ + I² + I³)`, the squared localized norm.
    pub norm_squared: f64,
    pub ratio: f64,
    /// Relative change of `I²` from half the nodes.
    pub refinement: f64,
    pub nodes: usize,
    pub quadrants: QuadrantSplit,
    /// Squared directional Fourier norm of the same field, when resolvable.
    pub fourier_norm_squared: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    /// `e` in `value ≈ C (t_ε − t)^{−e}` over the last `points` samples.
    pub exponent: f64,
    pub exponent_short: f64,
    pub uncertainty: f64,
    pub r2: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupChecks {
    pub i2_positive_last4: bool,
    pub i2_monotone_last4: bool,
    pub ratio_monotone_last4: bool,
    pub final_ratio: f64,
    pub ratio_exceeds_min: bool,
    pub i2_exponent_ok: bool,
    pub i2_exponent_above_one: bool,
    pub i1_exponent_ok: bool,
    pub quadrant_signs_ok: bool,
    pub fit_r2_ok: bool,
    pub crosscheck_max_rel: Option<f64>,
    pub all_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupReport {
    pub epsilon: f64,
    pub lambda: f64,
    pub t_eps: f64,
    pub nu_eps: f64,
    pub eta_rule: EtaRule,
    pub eta: f64,
    pub delta: f64,
    pub zeta_2plus: f64,
    pub zeta_3minus: f64,
    pub kappa: f64,
    /// `∫ (ψ²)² dx₂`.
    pub i_eps: f64,
    pub kernel_constant: f64,
    pub samples: Vec<BlowupSample>,
    pub fit_i1: PowerFit,
    pub fit_i2: PowerFit,
    pub fit_i3: PowerFit,
    /// `11/4 − 3λ`.
    pub lower_bound_exponent: f64,
    pub checks: BlowupChecks,
}

impl BlowupReport {
    pub fn curve_rows(&self) -> Vec<Vec<f64>> {
        self.samples
            .iter()
            .map(|s| {
                vec![
                    s.t,
                    s.gap,
                    s.i1,
                    s.i2,
                    s.i3,
                    s.ratio,
                    s.norm_squared,
                    s.quadrants.alpha,
                    s.quadrants.beta,
                    s.quadrants.gamma,
                    s.quadrants.delta,
                    s.quadrants.j,
                ]
            })
            .collect()
    }

    pub const CURVE_HEADER: [&'static str; 12] =
        ["t", "gap", "i1", "i2", "i3", "ratio", "norm_squared", "alpha", "beta", "gamma", "delta", "j"];
}

struct Localization {
    eta: f64,
    delta: f64,
}

struct Geometry<'a> {
    flow: &'a CharFlow,
    t: f64,
    p: f64,
}

// Label-side data at one node.
#[derive(Clone, Copy)]
struct Node {
    a: f64,
    chi: f64,
    g: f64,
    phi_y: f64,
    phi_yy: f64,
    d1: f64,
    d2: f64,
}

impl<'a> Geometry<'a> {
    fn node(&self, a: f64) -> Result<Node> {
        let c = self.flow.data.chi_eps.jet(a)?;
        let w = 1.0 - c.v;
        let g1 = 2.0 * c.d1 / (w * w);
        let g2 = 2.0 * c.d2 / (w * w) + 4.0 * c.d1 * c.d1 / (w * w * w);
        Ok(Node {
            a,
            chi: c.v,
            g: 2.0 / w - 1.0,
            phi_y: 1.0 + self.t * g1,
            phi_yy: self.t * g2,
            d1: c.d1,
            d2: c.d2,
        })
    }

    // (φ(a) − φ(b))/(a − b) without forming φ(a) − φ(b)
    fn quotient(&self, x: &Node, y: &Node) -> f64 {
        if x.a == y.a {
            return x.phi_y;
        }
        let dchi = (x.chi - y.chi) / (x.a - y.a);
        1.0 + self.t * 2.0 * dchi / ((1.0 - x.chi) * (1.0 - y.chi))
    }

    fn nodes(&self, labels: &[f64]) -> Result<Vec<Node>> {
        labels.iter().map(|&a| self.node(a)).collect()
    }

    /// `Σ_cells ∫ |b − a_i|^{−p} Q^{−p}(a_i, ·) F` over the cells `[c0, c1)`,
    /// with `Q^{−p}F` interpolated linearly.
    fn singular_row(&self, nodes: &[Node], f: &[f64], i: usize, c0: usize, c1: usize) -> f64 {
        let p = self.p;
        let ai = nodes[i].a;
        let mut acc = 0.0;
        let anti0 = |u: f64| u.signum() * u.abs().powf(1.0 - p) / (1.0 - p);
        let anti1 = |u: f64| u.abs().powf(2.0 - p) / (2.0 - p);
        let q = |m: usize| self.quotient(&nodes[i], &nodes[m]).powf(-p) * f[m];
        let mut prev = (nodes[c0].a - ai, q(c0));
        let (mut a0, mut a1) = (anti0(prev.0), anti1(prev.0));
        for m in c0..c1 {
            let u1 = nodes[m + 1].a - ai;
            let f1 = q(m + 1);
            let (b0, b1) = (anti0(u1), anti1(u1));
            let h = u1 - prev.0;
            let m0 = b0 - a0;
            let m1 = (b1 - a1) - prev.0 * m0;
            acc += (m0 - m1 / h) * prev.1 + (m1 / h) * f1;
            prev = (u1, f1);
            a0 = b0;
            a1 = b1;
        }
        acc
    }
}

fn trapezoid_weights(nodes: &[Node], lo: usize, hi: usize) -> Vec<f64> {
    let mut w = vec![0.0; nodes.len()];
    for m in lo..hi {
        let h = nodes[m + 1].a - nodes[m].a;
        w[m] += 0.5 * h;
        w[m + 1] += 0.5 * h;
    }
    w
}

/// `center + w sinh(s)` nodes spanning `[lo, hi]`, with `marks` inserted
/// exactly. Returns the nodes and the index of every mark.
fn sinh_nodes(lo: f64, hi: f64, center: f64, width: f64, n: usize, marks: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let s0 = ((lo - center) / width).asinh();
    let s1 = ((hi - center) / width).asinh();
    let base: Vec<f64> = (0..n).map(|k| center + width * (s0 + (s1 - s0) * k as f64 / (n - 1) as f64).sinh()).collect();
    let spacing = |x: f64| {
        let s = ((x - center) / width).asinh();
        width * s.cosh() * (s1 - s0) / (n - 1) as f64
    };
    let mut all: Vec<f64> = base
        .into_iter()
        .filter(|&x| x > lo && x < hi && marks.iter().all(|&m| (x - m).abs() > 0.25 * spacing(m)))
        .collect();
    all.extend_from_slice(marks);
    all.sort_by(f64::total_cmp);
    all.dedup();
    let idx = marks.iter().map(|m| all.iter().position(|x| x == m).expect("mark was inserted")).collect();
    (all, idx)
}

fn focus_width(flow: &CharFlow, t: f64) -> f64 {
    let tau = (1.0 - t / flow.t_eps).max(1e-12);
    flow.params().epsilon * (0.5 * tau).sqrt() / 4.0
}

fn localization(flow: &CharFlow, rule: EtaRule, ts: &[f64]) -> Result<Localization> {
    let eps = flow.params().epsilon;
    let nu = flow.nu_eps;
    let eta = match rule {
        EtaRule::RampHalf => 0.5 * (nu - 0.5 * eps),
        EtaRule::UpperGap => 0.5 * (eps - nu),
    };
    if !(eta > 0.0) {
        return Err(Error::pre(format!("label half-window eta = {eta} is not positive")));
    }
    let mut room = f64::INFINITY;
    for &t in ts {
        let c = flow.phi(t, nu)?.phi;
        let r = flow.phi(t, nu + eta)?.phi - c;
        let l = c - flow.phi(t, nu - eta)?.phi;
        room = room.min(r).min(l);
    }
    Ok(Localization { eta, delta: 0.5 * room })
}

fn pullbacks(flow: &CharFlow, t: f64, delta: f64) -> Result<[f64; 4]> {
    let c = flow.phi(t, flow.nu_eps)?.phi;
    Ok([
        flow.invert_phi(t, c - 2.0 * delta)?,
        flow.invert_phi(t, c - delta)?,
        flow.invert_phi(t, c + delta)?,
        flow.invert_phi(t, c + 2.0 * delta)?,
    ])
}

/// `I¹, I², I³` at one time on `n` label nodes.
fn region_integrals(flow: &CharFlow, t: f64, delta: f64, zeta: [f64; 4], n: usize) -> Result<[f64; 3]> {
    let geo = Geometry { flow, t, p: 0.5 - 2.0 * flow.params().lambda };
    let nu = flow.nu_eps;
    let (labels, marks) = sinh_nodes(zeta[0], zeta[3], nu, focus_width(flow, t), n, &zeta);
    let nodes = geo.nodes(&labels)?;
    let xc = flow.phi(t, nu)?.phi;
    let dens: Vec<f64> = nodes
        .iter()
        .map(|nd| {
            let x = nd.a + t * nd.g;
            let b = plateau(x - xc, delta, 2.0 * delta);
            nd.phi_y * b.d2 * nd.chi
                + 2.0 * b.d1 * nd.d1
                + b.v * (nd.d2 / nd.phi_y - nd.d1 * nd.phi_yy / (nd.phi_y * nd.phi_y))
        })
        .collect();
    let last = nodes.len() - 1;
    let inner: Vec<f64> = (0..nodes.len())
        .into_par_iter()
        .map(|i| if dens[i] == 0.0 { 0.0 } else { geo.singular_row(&nodes, &dens, i, 0, last) })
        .collect();
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let w = trapezoid_weights(&nodes, marks[k], marks[k + 1]);
        let terms: Vec<f64> = (0..nodes.len()).map(|i| w[i] * dens[i] * inner[i]).collect();
        *o = pairwise_sum(&terms);
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite region integral at t = {t}, nodes = {n}")));
    }
    Ok(out)
}

/// Terms (i)..(iv) and the quadrant split of (iv) on `[ν − κ, ν + κ]²`.
fn quadrant_split(flow: &CharFlow, t: f64, kappa: f64, n: usize) -> Result<QuadrantSplit> {
    let geo = Geometry { flow, t, p: 0.5 - 2.0 * flow.params().lambda };
    let nu = flow.nu_eps;
    let (labels, marks) = sinh_nodes(nu - kappa, nu + kappa, nu, focus_width(flow, t), n, &[nu - kappa, nu, nu + kappa]);
    let nodes = geo.nodes(&labels)?;
    let mid = marks[1];
    let last = nodes.len() - 1;
    // v_xx φ_y = χ''/φ_y − χ'φ_yy/φ_y² = c + g
    let c: Vec<f64> = nodes.iter().map(|nd| nd.d2 / nd.phi_y).collect();
    let g: Vec<f64> = nodes.iter().map(|nd| -nd.d1 * nd.phi_yy / (nd.phi_y * nd.phi_y)).collect();
    let rows: Vec<[f64; 4]> = (0..nodes.len())
        .into_par_iter()
        .map(|i| {
            [
                geo.singular_row(&nodes, &c, i, 0, mid),
                geo.singular_row(&nodes, &c, i, mid, last),
                geo.singular_row(&nodes, &g, i, 0, mid),
                geo.singular_row(&nodes, &g, i, mid, last),
            ]
        })
        .collect();
    let wl = trapezoid_weights(&nodes, 0, mid);
    let wr = trapezoid_weights(&nodes, mid, last);
    let sum = |f: &dyn Fn(usize) -> f64| pairwise_sum(&(0..nodes.len()).map(f).collect::<Vec<_>>());
    let w = |i: usize| wl[i] + wr[i];
    let terms = [
        sum(&|i| w(i) * c[i] * (rows[i][0] + rows[i][1])),
        sum(&|i| w(i) * c[i] * (rows[i][2] + rows[i][3])),
        sum(&|i| w(i) * g[i] * (rows[i][0] + rows[i][1])),
        sum(&|i| w(i) * g[i] * (rows[i][2] + rows[i][3])),
    ];
    // first variable is the outer one (x₁), second the inner one (y)
    let alpha = sum(&|i| wl[i] * g[i] * rows[i][2]);
    let gamma = sum(&|i| wl[i] * g[i] * rows[i][3]);
    let beta = sum(&|i| wr[i] * g[i] * rows[i][2]);
    let delta = sum(&|i| wr[i] * g[i] * rows[i][3]);

    let mut violations = 0;
    let mut samples = 0;
    for i in 0..nodes.len() {
        for m in 0..nodes.len() {
            if i == m || i == mid || m == mid {
                continue;
            }
            let k = (geo.quotient(&nodes[i], &nodes[m]) * (nodes[i].a - nodes[m].a)).abs().powf(-geo.p);
            let v = g[i] * g[m] * k;
            let same_side = (i < mid) == (m < mid);
            samples += 1;
            if (same_side && v < 0.0) || (!same_side && v > 0.0) {
                violations += 1;
            }
        }
    }
    Ok(QuadrantSplit {
        terms,
        alpha,
        beta,
        gamma,
        delta,
        j: delta + beta,
        sign_violations: violations,
        sign_samples: samples,
    })
}

fn plateau_square_integral(delta: f64) -> f64 {
    let gl = GaussLegendre::new(64);
    2.0 * delta + 2.0 * gl.integrate(delta, 2.0 * delta, |x| plateau(x, delta, 2.0 * delta).v.powi(2))
}

/// Squared `Ḣ^{7/4−λ}_{x₁}` norm of `v ψ¹ ψ²` by the discrete Fourier transform.
pub fn localized_fourier_norm_squared(flow: &CharFlow, t: f64, delta: f64, n1: usize) -> Result<f64> {
    let xc = flow.phi(t, flow.nu_eps)?.phi;
    let half = 2.2 * delta;
    let h1 = 2.0 * half / (n1 - 1) as f64;
    let n2 = 65;
    let h2 = 2.0 * half / (n2 - 1) as f64;
    let xs: Vec<f64> = (0..n1).map(|i| xc - half + i as f64 * h1).collect();
    let mut prof = Vec::with_capacity(n1);
    for &x in &xs {
        let b = plateau(x - xc, delta, 2.0 * delta).v;
        prof.push(if b == 0.0 { 0.0 } else { b * flow.data.chi_eps.value(flow.invert_phi(t, x)?)? });
    }
    let f = SampledField2D::from_fn(n1, n2, [h1, h2], [xc - half, -half], 4, |x1, x2| {
        let i = ((x1 - (xc - half)) / h1).round() as usize;
        prof[i.min(n1 - 1)] * plateau(x2, delta, 2.0 * delta).v
    });
    let s = 1.75 - flow.params().lambda;
    Ok(fourier_norm(&f, &NormSpec::homogeneous(s, 0.0).x1_only())?.powi(2))
}

fn power_fit(gaps: &[f64], values: &[f64], points: usize) -> PowerFit {
    let fit = |k: usize| {
        let n = gaps.len();
        let x: Vec<f64> = gaps[n - k..].iter().map(|g| g.ln()).collect();
        let y: Vec<f64> = values[n - k..].iter().map(|v| v.abs().max(f64::MIN_POSITIVE).ln()).collect();
        let (_, slope, r2) = linear_fit(&x, &y);
        (-slope, r2)
    };
    let (e, r2) = fit(points);
    let (e4, _) = fit(4);
    PowerFit { exponent: e, exponent_short: e4, uncertainty: 0.5 * (e - e4).abs(), r2, points }
}

pub fn run_blowup(flow: &CharFlow, cfg: &BlowupConfig) -> Result<BlowupReport> {
    cfg.validate()?;
    if !flow.t_eps.is_finite() {
        return Err(Error::pre("no focusing for these parameters"));
    }
    let t_eps = flow.t_eps;
    let nu = flow.nu_eps;
    let ts: Vec<f64> = cfg.t_fractions.iter().map(|f| f * t_eps).collect();
    let loc = localization(flow, cfg.eta_rule, &ts)?;
    let zetas = ts.iter().map(|&t| pullbacks(flow, t, loc.delta)).collect::<Result<Vec<_>>>()?;
    let kappa = 0.5 * zetas.iter().fold(f64::INFINITY, |k, z| k.min(nu - z[1]).min(z[2] - nu));
    let lambda = flow.params().lambda;
    let i_eps = plateau_square_integral(loc.delta);
    let c = kernel_constant(lambda);

    let mut samples = Vec::with_capacity(ts.len());
    for (k, &t) in ts.iter().enumerate() {
        let zeta = zetas[k];
        let fine = region_integrals(flow, t, loc.delta, zeta, cfg.nodes)?;
        let coarse = region_integrals(flow, t, loc.delta, zeta, cfg.nodes / 2)?;
        let refinement = ((fine[1] - coarse[1]) / fine[1]).abs();
        if !(refinement <= cfg.refine_tol) {
            return Err(Error::Quadrature(format!(
                "I2 changed by {refinement:.3e} under refinement at t = {t}, nodes = {}",
                cfg.nodes
            )));
        }
        let quadrants = quadrant_split(flow, t, kappa, cfg.nodes / 2)?;
        let fourier_norm_squared = if cfg.t_fractions[k] <= cfg.crosscheck_below {
            Some(localized_fourier_norm_squared(flow, t, loc.delta, cfg.crosscheck_nodes)?)
        } else {
            None
        };
        samples.push(BlowupSample {
            t,
            gap: t_eps - t,
            zeta,
            i1: fine[0],
            i2: fine[1],
            i3: fine[2],
            norm_squared: c * i_eps * (fine[0] + fine[1] + fine[2]),
            ratio: fine[1] / (fine[0].abs() + fine[2].abs()),
            refinement,
            nodes: cfg.nodes,
            quadrants,
            fourier_norm_squared,
        });
    }

    let gaps: Vec<f64> = samples.iter().map(|s| s.gap).collect();
    let col = |f: fn(&BlowupSample) -> f64| samples.iter().map(f).collect::<Vec<_>>();
    let fit_i1 = power_fit(&gaps, &col(|s| s.i1), cfg.fit_points);
    let fit_i2 = power_fit(&gaps, &col(|s| s.i2), cfg.fit_points);
    let fit_i3 = power_fit(&gaps, &col(|s| s.i3), cfg.fit_points);
    let bound = 2.75 - 3.0 * lambda;

    let tail = &samples[samples.len() - 4..];
    let final_ratio = tail[3].ratio;
    let crosscheck_max_rel = samples
        .iter()
        .filter_map(|s| s.fourier_norm_squared.map(|f| ((s.norm_squared - f) / f).abs()))
        .reduce(f64::max);
    let mut checks = BlowupChecks {
        i2_positive_last4: tail.iter().all(|s| s.i2 > 0.0),
        i2_monotone_last4: tail.windows(2).all(|w| w[1].i2 > w[0].i2),
        ratio_monotone_last4: tail.windows(2).all(|w| w[1].ratio > w[0].ratio),
        final_ratio,
        ratio_exceeds_min: final_ratio > cfg.min_ratio,
        i2_exponent_ok: fit_i2.exponent >= bound - cfg.exponent_margin,
        i2_exponent_above_one: fit_i2.exponent >= 1.0 + cfg.exponent_margin,
        i1_exponent_ok: fit_i1.exponent <= cfg.i1_exponent_cap,
        quadrant_signs_ok: samples.iter().all(|s| s.quadrants.sign_violations == 0),
        fit_r2_ok: fit_i2.r2 >= 0.98,
        crosscheck_max_rel,
        all_pass: false,
    };
    checks.all_pass = checks.i2_positive_last4
        && checks.i2_monotone_last4
        && checks.ratio_monotone_last4
        && checks.ratio_exceeds_min
        && checks.i2_exponent_ok
        && checks.i2_exponent_above_one
        && checks.i1_exponent_ok
        && checks.quadrant_signs_ok;

    Ok(BlowupReport {
        epsilon: flow.params().epsilon,
        lambda,
        t_eps,
        nu_eps: nu,
        eta_rule: cfg.eta_rule,
        eta: loc.eta,
        delta: loc.delta,
        zeta_2plus: nu - kappa,
        zeta_3minus: nu + kappa,
        kappa,
        i_eps,
        kernel_constant: c,
        samples,
        fit_i1,
        fit_i2,
        fit_i3,
        lower_bound_exponent: bound,
        checks,
    })
}
