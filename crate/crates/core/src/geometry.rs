//! Domain-of-dependence geometry for the reduced problem.
//!
//! The domain is never built as a set in space-time. Everything is reduced
//! to the admissible-velocity ellipse, the base width at `t = 0` and the
//! transverse estimate along curves that start on the edge of the base.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::charflow::CharFlow;
use crate::profiles::{ProfileParams, Width};
use crate::quad::linear_fit;
use crate::{Error, Result};

/// Boundary points used by the ellipse checks.
pub const ELLIPSE_POINTS: usize = 10_000;

/// Lorentzian metric with `v = Du`, coordinates `(t, x₁, x₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metric {
    pub v: f64,
}

impl Metric {
    pub fn new(v: f64) -> Self {
        Metric { v }
    }

    /// `g^{ij}`.
    pub fn upper(&self) -> [[f64; 3]; 3] {
        let v = self.v;
        [[1.0 - v, v, 0.0], [v, -1.0 - v, 0.0], [0.0, 0.0, -1.0]]
    }

    /// `g_{ij}`.
    pub fn lower(&self) -> [[f64; 3]; 3] {
        let v = self.v;
        [[1.0 + v, v, 0.0], [v, -1.0 + v, 0.0], [0.0, 0.0, -1.0]]
    }

    /// `max |g^{ik} g_{kj} − δ_ij|`.
    pub fn inverse_residual(&self) -> f64 {
        let (a, b) = (self.upper(), self.lower());
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let p: f64 = (0..3).map(|k| a[i][k] * b[k][j]).sum();
                let id = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p - id).abs());
            }
        }
        worst
    }

    /// `max |g^{ij} − m^{ij}|` against the Minkowski metric.
    pub fn minkowski_deviation(&self) -> f64 {
        let m = Metric::new(0.0).upper();
        let g = self.upper();
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((g[i][j] - m[i][j]).abs());
            }
        }
        worst
    }

    /// `g_{ij} ẋ^i ẋ^j` for the tangent `(1, ẋ₁, ẋ₂)`; nonnegative for causal velocities.
    pub fn causal_form(&self, dx1: f64, dx2: f64) -> f64 {
        let v = self.v;
        (1.0 + v) + 2.0 * v * dx1 + (v - 1.0) * dx1 * dx1 - dx2 * dx2
    }
}

/// Axis-aligned ellipse of admissible velocities `(∂ₜx₁, ∂ₜx₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ellipse {
    pub center: [f64; 2],
    pub semi_axes: [f64; 2],
}

impl Ellipse {
    /// Point at polar parameters `rho ∈ [0, 1]` and angle `theta` about the center.
    pub fn point(&self, rho: f64, theta: f64) -> [f64; 2] {
        [
            self.center[0] + rho * self.semi_axes[0] * theta.cos(),
            self.center[1] + rho * self.semi_axes[1] * theta.sin(),
        ]
    }

    /// `n` boundary points at angles `2πk/n`.
    pub fn boundary(&self, n: usize) -> Vec<[f64; 2]> {
        (0..n).map(|k| self.point(1.0, 2.0 * PI * k as f64 / n as f64)).collect()
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let a = (p[0] - self.center[0]) / self.semi_axes[0];
        let b = (p[1] - self.center[1]) / self.semi_axes[1];
        a * a + b * b <= 1.0
    }
}

/// The admissible-velocity ellipse at field value `v ∈ (−1, 1/2)`.
pub fn causal_speed_set(v: f64) -> Result<Ellipse> {
    if !(v > -1.0 && v < 0.5) {
        return Err(Error::Domain { name: "v", value: v, domain: "(-1, 1/2)" });
    }
    let w = 1.0 - v;
    Ok(Ellipse { center: [v / w, 0.0], semi_axes: [1.0 / w, 1.0 / w.sqrt()] })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllipseSample {
    pub v: f64,
    pub max_radius: f64,
    /// Boundary sample closest to the unit circle.
    pub argmax: [f64; 2],
    /// Double root of the ellipse-circle intersection, absent when they coincide.
    pub tangency: Option<[f64; 2]>,
    /// Largest radius over boundary points with `x ≥` center, away from the tangency.
    pub far_radius: f64,
    /// `1 − radius` at the top of the ellipse.
    pub margin_top: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllipseReport {
    pub points: usize,
    pub samples: Vec<EllipseSample>,
    /// Inclusion in the unit disk bounds every causal displacement by elapsed time.
    pub speed_bound_implied: bool,
    pub pass: bool,
}

/// `1 − |p|²` at angle `theta` on the boundary, in the cancellation-free
/// form `−v(1 + cos θ)²/(1 − v)²`.
pub fn radius_deficit(v: f64, theta: f64) -> f64 {
    let c = 1.0 + theta.cos();
    -v * c * c / ((1.0 - v) * (1.0 - v))
}

/// Intersection of the ellipse boundary with the unit circle. Substituting
/// `y² = 1 − x²` leaves `A x² + B x + C = 0`; for `v ≠ 0` the discriminant
/// vanishes and the double root is the tangency.
pub fn tangency(v: f64) -> Result<Option<[f64; 2]>> {
    causal_speed_set(v)?;
    // coefficients with `w = 1 − v` and `w·c = v` substituted
    let w = 1.0 - v;
    let qa = -v * w;
    let qb = -2.0 * v * w;
    let qc = v * v - v;
    if qa == 0.0 {
        return Ok(None);
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc > 1e-12 * qb * qb {
        return Ok(None);
    }
    let x = -qb / (2.0 * qa);
    Ok(Some([x, (1.0 - x * x).max(0.0).sqrt()]))
}

/// Largest boundary radius of the ellipse for each `v`.
pub fn ellipse_in_circle_check(v_samples: &[f64]) -> Result<EllipseReport> {
    let mut samples = Vec::with_capacity(v_samples.len());
    for &v in v_samples {
        if !(-0.01..=0.0).contains(&v) {
            return Err(Error::Domain { name: "v", value: v, domain: "[-1/100, 0]" });
        }
        let e = causal_speed_set(v)?;
        let mut max_radius = 0.0f64;
        let mut min_deficit = f64::INFINITY;
        let mut argmax = [0.0; 2];
        let mut far_radius = 0.0f64;
        for k in 0..ELLIPSE_POINTS {
            let th = 2.0 * PI * k as f64 / ELLIPSE_POINTS as f64;
            let p = e.point(1.0, th);
            let r = p[0].hypot(p[1]);
            max_radius = max_radius.max(r);
            let d = radius_deficit(v, th);
            if d < min_deficit {
                min_deficit = d;
                argmax = p;
            }
            if p[0] >= e.center[0] {
                far_radius = far_radius.max(r);
            }
        }
        let top = e.point(1.0, 0.5 * PI);
        samples.push(EllipseSample {
            v,
            max_radius,
            argmax,
            tangency: tangency(v)?,
            far_radius,
            margin_top: 1.0 - top[0].hypot(top[1]),
            pass: max_radius <= 1.0 + 1e-12,
        });
    }
    let pass = samples.iter().all(|s| s.pass);
    Ok(EllipseReport { points: ELLIPSE_POINTS, samples, speed_bound_implied: pass, pass })
}

/// Cross-section `Ω_t ∩ {x₁ = const}` of the domain, approximated from inside.
///
/// At `t = 0` this is the base `|x₂| ≤ w√x₁/|ln x₁|^δ`, `0 < x₁ < 1`. For
/// `t > 0` a point is kept when the closed disk of radius `t` around it lies
/// in the base, which is sufficient because causal speeds are at most one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainSlice {
    pub t: f64,
    pub width: Width,
    pub delta: f64,
}

const DISK_SAMPLES: usize = 64;

impl DomainSlice {
    pub fn new(params: &ProfileParams, t: f64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Domain { name: "t", value: t, domain: "[0, inf)" });
        }
        Ok(DomainSlice { t, width: params.width, delta: params.delta })
    }

    /// Base half-width `w√x₁/|ln x₁|^δ`, zero outside `(0, 1)`.
    pub fn base_half_width(&self, x1: f64) -> f64 {
        if !(x1 > 0.0 && x1 < 1.0) {
            return 0.0;
        }
        self.width.factor() * x1.sqrt() / (-x1.ln()).powf(self.delta)
    }

    fn in_base(&self, x1: f64, x2: f64) -> bool {
        x1 > 0.0 && x1 < 1.0 && x2.abs() <= self.base_half_width(x1)
    }

    pub fn contains(&self, x1: f64, x2: f64) -> bool {
        if self.t == 0.0 {
            return self.in_base(x1, x2);
        }
        (0..=DISK_SAMPLES).all(|k| {
            let s = -1.0 + 2.0 * k as f64 / DISK_SAMPLES as f64;
            let dx = s * self.t;
            let h = self.t * (1.0 - s * s).max(0.0).sqrt();
            self.in_base(x1 + dx, x2.abs() + h)
        })
    }

    /// Width `a_t(x₁)` of the slice, by bisection on the half-width.
    pub fn width_at(&self, x1: f64) -> f64 {
        if !self.contains(x1, 0.0) {
            return 0.0;
        }
        let mut lo = 0.0;
        let mut hi = self.base_half_width(x1).max(f64::MIN_POSITIVE) * 2.0;
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if self.contains(x1, m) {
                lo = m;
            } else {
                hi = m;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        2.0 * lo
    }

    /// `(x₁, a_t(x₁)/2)` on the given abscissae.
    pub fn boundary(&self, xs: &[f64]) -> Vec<[f64; 2]> {
        xs.iter().map(|&x| [x, 0.5 * self.width_at(x)]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidthReport {
    pub width: Width,
    pub delta: f64,
    pub y: Vec<f64>,
    /// `a₀(y)|ln y|^δ/√y`.
    pub ratio: Vec<f64>,
    /// Relative change of the ratio per decade, for decades below `1e-4`.
    pub max_change_per_decade: f64,
    /// `ln a₀ + δ ln|ln y| = ln C + p ln y` by least squares.
    pub fitted_constant: f64,
    pub fitted_exponent: f64,
    /// `2w`, the constant the base formula predicts.
    pub expected_constant: f64,
    pub pass: bool,
}

/// Samples the base width on `y ∈ [1e-8, 1e-2]` (9 points per decade).
pub fn width_asymptotic_check(params: &ProfileParams) -> Result<WidthReport> {
    let slice = DomainSlice::new(params, 0.0)?;
    let per_decade = 9;
    let n = 6 * per_decade + 1;
    let y: Vec<f64> = (0..n).map(|k| 10f64.powf(-8.0 + k as f64 / per_decade as f64)).collect();
    let widths: Vec<f64> = y.iter().map(|&yy| slice.width_at(yy)).collect();
    let ratio: Vec<f64> = y
        .iter()
        .zip(&widths)
        .map(|(&yy, &a)| a * (-yy.ln()).powf(params.delta) / yy.sqrt())
        .collect();
    let mut max_change = 0.0f64;
    for k in 0..n - per_decade {
        if y[k + per_decade] <= 1e-4 * (1.0 + 1e-12) {
            max_change = max_change.max((ratio[k + per_decade] / ratio[k] - 1.0).abs());
        }
    }
    let lx: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y
        .iter()
        .zip(&widths)
        .map(|(&yy, &a)| a.ln() + params.delta * (-yy.ln()).ln())
        .collect();
    let (intercept, slope, _) = linear_fit(&lx, &ly);
    let fitted_constant = intercept.exp();
    let expected_constant = 2.0 * params.width.factor();
    Ok(WidthReport {
        width: params.width,
        delta: params.delta,
        y,
        ratio,
        max_change_per_decade: max_change,
        fitted_constant,
        fitted_exponent: slope,
        expected_constant,
        pass: max_change <= 0.01 && (fitted_constant / expected_constant - 1.0).abs() <= 0.02,
    })
}

/// One inequality `lhs ≤ rhs` with `slack = rhs − lhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

impl LedgerEntry {
    pub fn new(name: &'static str, lhs: f64, rhs: f64) -> Self {
        LedgerEntry { name, lhs, rhs, slack: rhs - lhs, pass: lhs <= rhs }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainLedger {
    pub a: f64,
    pub y: f64,
    pub t: f64,
    /// Endpoint parameter `b = φ(t, y) + t`.
    pub b: f64,
    /// Field value `χ_ε(y)` carried by the characteristic.
    pub v: f64,
    /// `|v| < 1/100` as assumed by the chain.
    pub assumption_holds: bool,
    /// `|r(b) − r(a)| / (√t √a)` for the extremal curve.
    pub measured_constant: f64,
    /// `(r(a) − |r(b) − r(a)|)/r(a)`; tends to at least `1/2` only as `ε → 0`.
    pub retained_fraction: f64,
    pub entries: Vec<LedgerEntry>,
}

impl ChainLedger {
    pub fn all_pass(&self) -> bool {
        self.assumption_holds && self.entries.iter().all(|e| e.pass)
    }

    /// One JSON object per line: `{name, lhs, rhs, slack, pass}`.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for e in &self.entries {
            serde_json::to_writer(&mut out, e)?;
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Constant of the transverse bound `|r(b) − r(a)| ≤ C√t√a` implied by
/// `b − a ≤ 2t` and `q(a) − h(b, y) ≤ 9a/8`.
pub const TRANSVERSE_CONSTANT: f64 = 1.5;

fn edge_radius(p: &ProfileParams, a: f64) -> f64 {
    p.width.factor() * a.sqrt() / (-a.ln()).powf(p.delta)
}

/// Evaluates the transverse-curve inequalities for a curve leaving the edge
/// of the base at abscissa `a` and arriving at time `t` on the
/// characteristic from `y`.
///
/// In null coordinates `s = x₁ + t`, `q = x₁ − t` the characteristic is the
/// line `h(s, y) = y + χ_ε(y)(s − y)`. The worst transverse displacement
/// allowed by the causal constraint is `√(b − a)·√(q(a) − h(b, y))`.
pub fn transverse_chain_check(flow: &CharFlow, a: f64, y: f64, t: f64) -> Result<ChainLedger> {
    let p = flow.params();
    let eps = p.epsilon;
    if !(a >= 0.25 * eps && a < 0.5) {
        return Err(Error::pre(format!("need eps/4 <= a < 1/2, got a = {a}")));
    }
    if !(y >= 0.0 && y <= a) {
        return Err(Error::pre(format!("need 0 <= y <= a, got y = {y}")));
    }
    if !(t >= 0.0 && t < flow.t_eps) {
        return Err(Error::pre(format!("need 0 <= t < t_eps = {}, got t = {t}", flow.t_eps)));
    }
    let v = flow.data.chi_eps.value(y)?;
    // b − y = t(1 + (1 + v)/(1 − v))
    let by = 2.0 * t / (1.0 - v);
    let b = y + by;
    let ba = by - (a - y);
    if ba < 0.0 {
        return Err(Error::pre(format!("curve from a = {a} cannot reach x1 = {} by time {t}", b - t)));
    }
    let q_gap = (a - y) - v * by;
    let transverse = ba.sqrt() * q_gap.max(0.0).sqrt();
    let r_a = edge_radius(p, a);
    let root_ta = (t * a).sqrt();
    let c_bound = TRANSVERSE_CONSTANT * root_ta;
    let decay = p.log_eps().abs().powf(p.delta - 0.5 * p.alpha);
    let entries = vec![
        LedgerEntry::new("q(a)-h(b,y) <= 101/100 (a-y)", q_gap, 1.01 * (a - y)),
        LedgerEntry::new("101/100 (a-y) <= 9/8 a", 1.01 * (a - y), 1.125 * a),
        LedgerEntry::new("q(a)-h(b,y) <= 9/8 a", q_gap, 1.125 * a),
        LedgerEntry::new("b-y <= 2t + (b-y)/100", by, 2.0 * t + 0.01 * by),
        LedgerEntry::new("sqrt(b-a) <= sqrt(b-y)", ba.sqrt(), by.sqrt()),
        LedgerEntry::new("sqrt(b-y) <= sqrt(2t)", by.sqrt(), (2.0 * t).sqrt()),
        LedgerEntry::new("|r(b)-r(a)| <= C sqrt(t) sqrt(a)", transverse, c_bound),
        LedgerEntry::new("C sqrt(t) sqrt(a) <= r(a) |ln eps|^(delta-alpha/2)", c_bound, r_a * decay),
    ];
    Ok(ChainLedger {
        a,
        y,
        t,
        b,
        v,
        assumption_holds: v.abs() < 0.01,
        measured_constant: if root_ta > 0.0 { transverse / root_ta } else { 0.0 },
        retained_fraction: 1.0 - transverse / r_a,
        entries,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClearanceSample {
    pub t: f64,
    /// `φ(t, ν_ε)`.
    pub center: f64,
    /// Distance from the center to base points with `x₁ ≤ ε/4`.
    pub near_distance: f64,
    /// `near_distance − t`, what remains after unit-speed travel.
    pub near_clearance: f64,
    /// Smallest transverse height `r(a) − √(b−a)√(q(a)−h(b,ν))` over the sampled `a > ε/4`.
    pub far_clearance: f64,
    /// Smallest `(r(a) − displacement)/r(a)`; the asymptotic chain gives `1/2`.
    pub far_ratio: f64,
    pub clearance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallProbeReport {
    pub epsilon: f64,
    pub t_eps: f64,
    pub nu_eps: f64,
    pub samples: Vec<ClearanceSample>,
    pub min_clearance: f64,
    pub pass: bool,
}

const FAR_SAMPLES: usize = 400;

/// Radius of a ball around `(φ(t, ν_ε), 0)` that no admissible curve from
/// outside the base reaches, for each time in `t_grid`.
pub fn ball_persistence_probe(flow: &CharFlow, t_grid: &[f64]) -> Result<BallProbeReport> {
    let p = *flow.params();
    if p.alpha <= 2.0 * p.delta {
        return Err(Error::pre(format!("need alpha > 2 delta, got alpha = {}, delta = {}", p.alpha, p.delta)));
    }
    if !flow.t_eps.is_finite() {
        return Err(Error::pre("no focusing time for these parameters"));
    }
    let eps = p.epsilon;
    let nu = flow.nu_eps;
    let h_nu = flow.data.chi_eps.value(nu)?;
    let mut samples = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if !(t >= 0.0 && t < flow.t_eps) {
            return Err(Error::Domain { name: "t", value: t, domain: "[0, t_eps)" });
        }
        let center = flow.phi(t, nu)?.phi;
        let near_distance = center - 0.25 * eps;
        let b = center + t;
        let lo = nu.max(0.25 * eps);
        let hi = b.min(0.499);
        let mut far_clearance = f64::INFINITY;
        let mut far_ratio = f64::INFINITY;
        for k in 0..=FAR_SAMPLES {
            let a = lo * (hi / lo).powf(k as f64 / FAR_SAMPLES as f64);
            let q_gap = a - (nu + h_nu * (b - nu));
            let disp = (b - a).max(0.0).sqrt() * q_gap.max(0.0).sqrt();
            let r = edge_radius(&p, a);
            far_clearance = far_clearance.min(r - disp);
            far_ratio = far_ratio.min((r - disp) / r);
        }
        let near_clearance = near_distance - t;
        samples.push(ClearanceSample {
            t,
            center,
            near_distance,
            near_clearance,
            far_clearance,
            far_ratio,
            clearance: near_clearance.min(far_clearance),
        });
    }
    let min_clearance = samples.iter().map(|s| s.clearance).fold(f64::INFINITY, f64::min);
    Ok(BallProbeReport {
        epsilon: eps,
        t_eps: flow.t_eps,
        nu_eps: nu,
        pass: min_clearance > 0.0,
        samples,
        min_clearance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minkowski_case() {
        let e = causal_speed_set(0.0).unwrap();
        assert_eq!(e.center, [0.0, 0.0]);
        assert_eq!(e.semi_axes, [1.0, 1.0]);
        assert_eq!(Metric::new(0.0).minkowski_deviation(), 0.0);
        assert!(causal_speed_set(0.5).is_err());
        assert!(causal_speed_set(-1.0).is_err());
    }

    #[test]
    fn ledger_entry_slack() {
        let e = LedgerEntry::new("x", 1.0, 3.0);
        assert!(e.pass && e.slack == 2.0);
        assert!(!LedgerEntry::new("x", 3.0, 1.0).pass);
    }
}
