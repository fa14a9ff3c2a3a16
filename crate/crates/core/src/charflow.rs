//! Exact evolution of the reduced one-dimensional problem by characteristics.
//!
//! Along `x₁ = φ(t, y) = y + t(1 + χ_ε(y))/(1 − χ_ε(y))` the field `v` keeps
//! the value `χ_ε(y)`. Writing `H = |χ_ε'|/(1 − χ_ε)²` one has
//! `φ_y = 1 − 2tH`, so the first focusing time is `1/(2 max H)`.

use std::io::Write;

use serde::Serialize;

use crate::profiles::{InitialData, ProfileParams};
use crate::report;
use crate::{Error, Result};

/// Relative gap to the focusing time below which sampling is refused.
pub const FOCUS_GAP: f64 = 1e-6;

const SCAN_POINTS: usize = 100_000;
const UNIQUENESS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiJet {
    pub phi: f64,
    pub phi_y: f64,
    pub phi_yy: f64,
    pub phi_ty: f64,
    pub phi_tyy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Blowup {
    pub t_eps: f64,
    pub nu_eps: f64,
    pub m_eps: f64,
}

#[derive(Debug, Clone)]
pub struct CharFlow {
    pub data: InitialData,
    pub t_eps: f64,
    pub nu_eps: f64,
    pub m_eps: f64,
}

impl CharFlow {
    pub fn new(params: ProfileParams) -> Result<Self> {
        let data = InitialData::new(params)?;
        let b = compute_blowup(&data)?;
        Ok(CharFlow { data, t_eps: b.t_eps, nu_eps: b.nu_eps, m_eps: b.m_eps })
    }

    pub fn params(&self) -> &ProfileParams {
        &self.data.params
    }

    pub fn blowup(&self) -> Blowup {
        Blowup { t_eps: self.t_eps, nu_eps: self.nu_eps, m_eps: self.m_eps }
    }

    pub fn phi(&self, t: f64, y: f64) -> Result<PhiJet> {
        if !(t >= 0.0) {
            return Err(Error::Domain { name: "t", value: t, domain: "[0, inf)" });
        }
        let c = self.data.chi_eps.jet(y)?;
        let w = 1.0 - c.v;
        // g = (1 + χ)/(1 − χ) = 2/(1 − χ) − 1
        let g = 2.0 / w - 1.0;
        let g1 = 2.0 * c.d1 / (w * w);
        let g2 = 2.0 * c.d2 / (w * w) + 4.0 * c.d1 * c.d1 / (w * w * w);
        Ok(PhiJet { phi: y + t * g, phi_y: 1.0 + t * g1, phi_yy: t * g2, phi_ty: g1, phi_tyy: g2 })
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) {
            return Err(Error::Domain { name: "t", value: t, domain: "[0, inf)" });
        }
        if t > self.t_eps * (1.0 - FOCUS_GAP) {
            return Err(Error::pre(format!(
                "t = {t} is not below the focusing time {} by the relative gap {FOCUS_GAP}",
                self.t_eps
            )));
        }
        Ok(())
    }

    /// The unique `y ∈ [0, 1/2]` with `φ(t, y) = x1`.
    pub fn invert_phi(&self, t: f64, x1: f64) -> Result<f64> {
        self.check_time(t)?;
        let (mut lo, mut hi) = (0.0, 0.5);
        let f_lo = self.phi(t, lo)?.phi - x1;
        let f_hi = self.phi(t, hi)?.phi - x1;
        if f_lo > 0.0 || f_hi < 0.0 || x1.is_nan() {
            return Err(Error::Domain { name: "x1", value: x1, domain: "[phi(t, 0), phi(t, 1/2)]" });
        }
        let tol = 1e-12 * (1.0 + x1.abs());
        if f_lo.abs() <= tol {
            return Ok(lo);
        }
        if f_hi.abs() <= tol {
            return Ok(hi);
        }
        // safeguarded Newton: keep a sign bracket, fall back to bisection
        let mut y = lo + (hi - lo) * (-f_lo) / (f_hi - f_lo);
        for _ in 0..200 {
            let p = self.phi(t, y)?;
            let f = p.phi - x1;
            if f.abs() <= tol {
                return Ok(y);
            }
            if f < 0.0 {
                lo = y;
            } else {
                hi = y;
            }
            let newton = y - f / p.phi_y;
            y = if p.phi_y > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo <= f64::EPSILON * hi {
                return Ok(y);
            }
        }
        Err(Error::Quadrature(format!("inverse characteristic did not converge at x1 = {x1}")))
    }

    /// `v`, `v_x`, `v_xx` at time `t` on the given `x₁` nodes.
    pub fn sample_field(&self, t: f64, grid: &[f64]) -> Result<FieldSample> {
        self.check_time(t)?;
        let n = grid.len();
        let mut s = FieldSample {
            t,
            epsilon: self.params().epsilon,
            x1: grid.to_vec(),
            v: Vec::with_capacity(n),
            v_x: Vec::with_capacity(n),
            v_xx: Vec::with_capacity(n),
        };
        for &x in grid {
            let y = self.invert_phi(t, x)?;
            let c = self.data.chi_eps.jet(y)?;
            let p = self.phi(t, y)?;
            s.v.push(c.v);
            s.v_x.push(c.d1 / p.phi_y);
            s.v_xx.push((c.d2 * p.phi_y - c.d1 * p.phi_yy) / p.phi_y.powi(3));
        }
        Ok(s)
    }

    /// Nodes on `[lo, hi]` whose spacing grows from `h_min` at the focus
    /// `φ(t, ν_ε)` by the ratio 1.05 up to `h_max`.
    pub fn focus_grid(&self, t: f64, lo: f64, hi: f64, h_min: f64, h_max: f64) -> Result<Vec<f64>> {
        if !(lo < hi && h_min > 0.0 && h_min <= h_max) {
            return Err(Error::pre("focus grid needs lo < hi and 0 < h_min <= h_max"));
        }
        let xc = if self.nu_eps.is_finite() { self.phi(t, self.nu_eps)?.phi.clamp(lo, hi) } else { lo };
        let mut right = vec![xc];
        let mut h = h_min;
        while *right.last().unwrap() < hi {
            right.push((right.last().unwrap() + h).min(hi));
            h = (h * 1.05).min(h_max);
        }
        let mut left = Vec::new();
        let (mut x, mut h) = (xc, h_min);
        while x > lo {
            x = (x - h).max(lo);
            left.push(x);
            h = (h * 1.05).min(h_max);
        }
        left.reverse();
        left.extend(right);
        left.dedup();
        Ok(left)
    }
}

/// `H(y) = |χ_ε'|/(1 − χ_ε)²` and `H'(y)`.
pub fn focusing_rate(data: &InitialData, y: f64) -> Result<(f64, f64)> {
    let c = data.chi_eps.jet(y)?;
    let w = 1.0 - c.v;
    let h = -c.d1 / (w * w);
    let h1 = -c.d2 / (w * w) - 2.0 * c.d1 * c.d1 / (w * w * w);
    Ok((h, h1))
}

/// Maximizes `H` over `[ε/2, 1/2]`; `t_ε = 1/(2 M_ε)`.
pub fn compute_blowup(data: &InitialData) -> Result<Blowup> {
    let eps = data.params.epsilon;
    let (a, b) = (0.5 * eps, 0.5);
    if a >= b {
        return Ok(Blowup { t_eps: f64::INFINITY, nu_eps: f64::NAN, m_eps: 0.0 });
    }
    let ratio = (b / a).ln() / (SCAN_POINTS - 1) as f64;
    let ys: Vec<f64> = (0..SCAN_POINTS).map(|k| a * (ratio * k as f64).exp()).collect();
    let hs = ys.iter().map(|&y| focusing_rate(data, y).map(|r| r.0)).collect::<Result<Vec<_>>>()?;
    let (kbest, &hbest) = hs
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .expect("scan is not empty");
    if hbest <= 0.0 {
        return Ok(Blowup { t_eps: f64::INFINITY, nu_eps: f64::NAN, m_eps: 0.0 });
    }
    let rivals: Vec<f64> = (1..SCAN_POINTS - 1)
        .filter(|&k| k.abs_diff(kbest) > 2)
        .filter(|&k| hs[k] >= hs[k - 1] && hs[k] >= hs[k + 1])
        .filter(|&k| hs[k] >= hbest * (1.0 - UNIQUENESS_TOL))
        .map(|k| ys[k])
        .collect();
    if !rivals.is_empty() {
        let mut candidates = vec![ys[kbest]];
        candidates.extend(rivals);
        return Err(Error::NonUniqueMaximizer { candidates });
    }
    let lo = ys[kbest.saturating_sub(1)];
    let hi = ys[(kbest + 1).min(SCAN_POINTS - 1)];
    let nu = refine_max(data, lo, hi)?;
    let m = focusing_rate(data, nu)?.0.max(hbest);
    Ok(Blowup { t_eps: 0.5 / m, nu_eps: nu, m_eps: m })
}

// golden section on H, then bisection on the sign of H' when it changes sign
fn refine_max(data: &InitialData, mut lo: f64, mut hi: f64) -> Result<f64> {
    let h = |y: f64| focusing_rate(data, y).map(|r| r.0);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut hc, mut hd) = (h(c)?, h(d)?);
    while hi - lo > 1e-12 * hi.max(1e-300) && hi - lo > 1e-300 {
        if hc >= hd {
            hi = d;
            d = c;
            hd = hc;
            c = hi - g * (hi - lo);
            hc = h(c)?;
        } else {
            lo = c;
            c = d;
            hc = hd;
            d = lo + g * (hi - lo);
            hd = h(d)?;
        }
    }
    let span = (hi - lo).max(1e-9 * hi);
    let (mut a, mut b) = (lo - span, hi + span);
    let da = focusing_rate(data, a)?.1;
    let db = focusing_rate(data, b)?.1;
    if da > 0.0 && db < 0.0 {
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if focusing_rate(data, m)?.1 > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        return Ok(0.5 * (a + b));
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSample {
    pub t: f64,
    pub epsilon: f64,
    pub x1: Vec<f64>,
    pub v: Vec<f64>,
    pub v_x: Vec<f64>,
    pub v_xx: Vec<f64>,
}

impl FieldSample {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let meta = [
            ("kind", "field".to_string()),
            ("t", report::num(self.t)),
            ("epsilon", report::num(self.epsilon)),
        ];
        let rows = (0..self.x1.len()).map(|i| vec![self.x1[i], self.v[i], self.v_x[i], self.v_xx[i]]);
        report::write_csv(out, &meta, &["x1", "v", "v_x", "v_xx"], rows)
    }
}
