//! Quadrature building blocks: Gauss-Legendre rules, pairwise summation and
//! product rules for the weakly singular weight `|u|^{-p}`, `0 < p < 1`.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

// P_n(x) and P_n'(x)
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Pairwise summation with a fixed tree shape determined by the length.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `∫_{u0}^{u1} |u|^{-p} u^k du` for k ∈ {0, 1}, for any sign of the endpoints.
fn power_moment(u0: f64, u1: f64, p: f64, k: i32) -> f64 {
    // antiderivative of |u|^{-p} u^k
    let anti = |u: f64| -> f64 {
        let a = u.abs();
        match k {
            0 => u.signum() * a.powf(1.0 - p) / (1.0 - p),
            _ => a.powf(2.0 - p) / (2.0 - p),
        }
    };
    anti(u1) - anti(u0)
}

/// Product-trapezoid weights for `∫ |x - b|^{-p} F(b) db` over the nodes `b`,
/// with `F` interpolated linearly on every cell. Weights are added into `out`.
pub fn linear_product_weights(nodes: &[f64], x: f64, p: f64, out: &mut [f64]) {
    debug_assert_eq!(nodes.len(), out.len());
    for j in 0..nodes.len() - 1 {
        let (b0, b1) = (nodes[j], nodes[j + 1]);
        let h = b1 - b0;
        // u = b - x
        let u0 = b0 - x;
        let u1 = b1 - x;
        let m0 = power_moment(u0, u1, p, 0);
        // ∫ |u|^{-p} (u - u0) du
        let m1 = power_moment(u0, u1, p, 1) - u0 * m0;
        out[j] += m0 - m1 / h;
        out[j + 1] += m1 / h;
    }
}

/// Product rule for one unit cell `[0, 1]` against `|d - τ|^{-p}`, with the
/// integrand interpolated by the cubic through τ = -1, 0, 1, 2.
struct CubicCellRule {
    coef: [[f64; 4]; 4],
    gl: GaussLegendre,
    p: f64,
}

impl CubicCellRule {
    const NODES: [f64; 4] = [-1.0, 0.0, 1.0, 2.0];

    fn new(p: f64) -> Self {
        let mut coef = [[0.0f64; 4]; 4];
        for (m, row) in coef.iter_mut().enumerate() {
            let mut poly = vec![1.0];
            let mut denom = 1.0;
            for l in 0..4 {
                if l == m {
                    continue;
                }
                let mut next = vec![0.0; poly.len() + 1];
                for (i, c) in poly.iter().enumerate() {
                    next[i + 1] += c;
                    next[i] -= c * Self::NODES[l];
                }
                poly = next;
                denom *= Self::NODES[m] - Self::NODES[l];
            }
            for (i, c) in poly.iter().enumerate() {
                row[i] = c / denom;
            }
        }
        CubicCellRule { coef, gl: GaussLegendre::new(24), p }
    }

    // ∫_0^1 |d - τ|^{-p} τ^k dτ, k = 0..3
    fn moments(&self, d: i64) -> [f64; 4] {
        let p = self.p;
        let df = d as f64;
        let mut out = [0.0; 4];
        if d.abs() >= 4 {
            for (k, o) in out.iter_mut().enumerate() {
                *o = self.gl.integrate(0.0, 1.0, |t| (df - t).abs().powf(-p) * t.powi(k as i32));
            }
            return out;
        }
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            if d >= 1 {
                // τ = d - u, u ∈ [d-1, d]
                for m in 0..=k {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    let c = binom(k, m) * df.powi((k - m) as i32) * sign;
                    let e = m as f64 + 1.0 - p;
                    acc += c * (df.powf(e) - (df - 1.0).powf(e)) / e;
                }
            } else {
                // τ = u - e with e = -d ≥ 0, u ∈ [e, 1+e]
                let ef = -df;
                for m in 0..=k {
                    let c = binom(k, m) * (-ef).powi((k - m) as i32);
                    let ex = m as f64 + 1.0 - p;
                    let lo = if ef == 0.0 { 0.0 } else { ef.powf(ex) };
                    acc += c * ((1.0 + ef).powf(ex) - lo) / ex;
                }
            }
            *o = acc;
        }
        out
    }

    /// Weights of the stencil values at τ = -1, 0, 1, 2.
    fn weights(&self, d: i64) -> [f64; 4] {
        let mom = self.moments(d);
        let mut w = [0.0; 4];
        for (m, wm) in w.iter_mut().enumerate() {
            *wm = (0..4).map(|k| self.coef[m][k] * mom[k]).sum();
        }
        w
    }
}

/// Toeplitz weights for `∫ |x_i - y|^{-p} g(y) dy` on a uniform grid with unit
/// spacing, using cubic interpolation of `g` on the stencil `{j-1, j, j+1, j+2}`
/// of every cell `[j, j+1]`. Entry `k + kmax` is the weight of `g_{i-k}`,
/// `k = -kmax..=kmax`. Scale by `h^{1-p}` for spacing `h`.
pub fn cubic_toeplitz_weights(kmax: usize, p: f64) -> Vec<f64> {
    let rule = CubicCellRule::new(p);
    let mut w = vec![0.0; 2 * kmax + 1];
    // cell j at offset d = i - j feeds node j-1+m, whose offset is d + 1 - m
    let dmax = kmax as i64 + 2;
    for d in -dmax..=dmax {
        let cw = rule.weights(d);
        for (m, wm) in cw.iter().enumerate() {
            let k = d + 1 - m as i64;
            if k.unsigned_abs() as usize <= kmax {
                w[(k + kmax as i64) as usize] += wm;
            }
        }
    }
    for k in 1..=kmax {
        let s = 0.5 * (w[kmax + k] + w[kmax - k]);
        w[kmax + k] = s;
        w[kmax - k] = s;
    }
    w
}

fn binom(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Ordinary least squares fit `y = a + b x`; returns (intercept, slope, r²).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (my - slope * mx, slope, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_polynomials() {
        let gl = GaussLegendre::new(8);
        for k in 0..16 {
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            let got = gl.integrate(-1.0, 1.0, |x| x.powi(k));
            assert!((got - exact).abs() < 1e-14, "k={k}");
        }
        assert!((gl.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn linear_product_rule_exact_for_affine() {
        let nodes: Vec<f64> = (0..=20).map(|i| (i as f64 / 20.0).powi(2)).collect();
        let p = 0.48;
        for &x in &[0.0, 0.1, 0.3025, 0.77, 1.0] {
            let mut w = vec![0.0; nodes.len()];
            linear_product_weights(&nodes, x, p, &mut w);
            let got: f64 = nodes.iter().zip(&w).map(|(b, wi)| wi * (2.0 + 3.0 * b)).sum();
            // ∫_0^1 |x-b|^{-p}(2 + 3b) db, b = x + u
            let exact = 2.0 * power_moment(-x, 1.0 - x, p, 0)
                + 3.0 * (power_moment(-x, 1.0 - x, p, 1) + x * power_moment(-x, 1.0 - x, p, 0));
            assert!((got - exact).abs() < 1e-12, "x={x}: {got} vs {exact}");
        }
    }

    #[test]
    fn cubic_cell_rule_exact_for_cubics() {
        let p = 0.46;
        let rule = CubicCellRule::new(p);
        let gl = GaussLegendre::new(60);
        let q = |t: f64| 1.0 - 0.5 * t + 0.25 * t * t - 0.7 * t * t * t;
        for d in -6i64..=7 {
            let w = rule.weights(d);
            let got: f64 = w.iter().zip(CubicCellRule::NODES).map(|(wi, t)| wi * q(t)).sum();
            let exact = if (0..=1).contains(&d) {
                // singular point at an endpoint of the cell
                singular_split(0.0, d as f64, 1.0, p, &q, &gl)
            } else {
                gl.integrate(0.0, 1.0, |t| (d as f64 - t).abs().powf(-p) * q(t))
            };
            assert!((got - exact).abs() < 1e-10 * (1.0 + exact.abs()), "d={d}: {got} vs {exact}");
        }
    }

    // ∫_a^b |c - y|^{-p} q(y) dy by substitution removing the singularity at c
    fn singular_split(a: f64, c: f64, b: f64, p: f64, q: &dyn Fn(f64) -> f64, gl: &GaussLegendre) -> f64 {
        let e = 1.0 / (1.0 - p);
        let left = gl.integrate(0.0, (c - a).powf(1.0 - p), |s| {
            let u = s.powf(e);
            e * q(c - u)
        });
        let right = gl.integrate(0.0, (b - c).powf(1.0 - p), |s| {
            let u = s.powf(e);
            e * q(c + u)
        });
        left + right
    }

    #[test]
    fn cubic_weights_reproduce_kernel_moments() {
        // compactly supported smooth g sampled on unit grid: the rule must converge
        // to the continuum value at 4th order in the spacing
        let p = 0.48;
        let gl = GaussLegendre::new(80);
        let g = |y: f64| (-(y * y)).exp();
        let mut reference = singular_split(-1.0, 0.0, 1.0, p, &g, &gl);
        for k in 0..8 {
            let (a, b) = (1.0 + k as f64, 2.0 + k as f64);
            reference += 2.0 * gl.integrate(a, b, |y| y.powf(-p) * g(y));
        }
        let mut errs = Vec::new();
        for &h in &[0.2f64, 0.1, 0.05] {
            let n = (9.0 / h) as i64;
            let kmax = 2 * n as usize + 2;
            let w = cubic_toeplitz_weights(kmax, p);
            let scale = h.powf(1.0 - p);
            let i = 0i64;
            let mut got = 0.0;
            for l in -n..=n {
                let y = l as f64 * h;
                got += w[(i - l + kmax as i64) as usize] * (-(y * y)).exp();
            }
            errs.push((got * scale - reference).abs());
        }
        assert!(errs[2] < 2e-6, "{errs:?}");
        for k in 0..2 {
            let order = (errs[k] / errs[k + 1]).log2();
            assert!(order > 3.5, "{errs:?}");
        }
    }

    #[test]
    fn fit_recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 0.5 - 2.0 * v).collect();
        let (a, b, r2) = linear_fit(&x, &y);
        assert!((a - 0.5).abs() < 1e-12 && (b + 2.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }
}
