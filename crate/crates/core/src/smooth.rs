//! Smooth transition functions carried together with their first two derivatives.

use std::ops::{Add, Mul, Neg, Sub};

/// Value with first and second derivative in one variable.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const fn new(v: f64, d1: f64, d2: f64) -> Self {
        Jet { v, d1, d2 }
    }

    pub const fn constant(v: f64) -> Self {
        Jet { v, d1: 0.0, d2: 0.0 }
    }

    /// `outer(self(x))` where `outer` is given as a jet evaluated at `self.v`.
    pub fn compose(outer: Jet, inner: Jet) -> Jet {
        Jet {
            v: outer.v,
            d1: outer.d1 * inner.d1,
            d2: outer.d2 * inner.d1 * inner.d1 + outer.d1 * inner.d2,
        }
    }

    /// Derivatives of `f(k x)` given the jet of `f` at `k x`.
    pub fn chain_scale(self, k: f64) -> Jet {
        Jet::new(self.v, self.d1 * k, self.d2 * k * k)
    }

    pub fn scale(self, c: f64) -> Jet {
        Jet::new(self.v * c, self.d1 * c, self.d2 * c)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.v + o.v, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.v - o.v, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.v, -self.d1, -self.d2)
    }
}

/// Quintic smoothstep `6z⁵ − 15z⁴ + 10z³`, clamped to 0 below 0 and 1 above 1. C² at both ends.
pub fn quintic_step(z: f64) -> Jet {
    if z <= 0.0 {
        Jet::constant(0.0)
    } else if z >= 1.0 {
        Jet::constant(1.0)
    } else {
        let w = 1.0 - z;
        Jet::new(
            z * z * z * (10.0 - 15.0 * z + 6.0 * z * z),
            30.0 * z * z * w * w,
            60.0 * z * w * (1.0 - 2.0 * z),
        )
    }
}

// e^{-1/z} and its derivatives, zero for z <= 0
fn flat_exp(z: f64) -> [f64; 3] {
    if z <= 0.0 {
        return [0.0, 0.0, 0.0];
    }
    let f = (-1.0 / z).exp();
    let z2 = z * z;
    [f, f / z2, f * (1.0 - 2.0 * z) / (z2 * z2)]
}

/// C^∞ step from 0 (z ≤ 0) to 1 (z ≥ 1) built from `e^{-1/z}`.
pub fn exp_step(z: f64) -> Jet {
    if z <= 0.0 {
        return Jet::constant(0.0);
    }
    if z >= 1.0 {
        return Jet::constant(1.0);
    }
    let a = flat_exp(z);
    let b0 = flat_exp(1.0 - z);
    // derivatives of b(z) = f(1 - z)
    let b = [b0[0], -b0[1], b0[2]];
    let s = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
    let g = a[0] / s[0];
    let g1 = (a[1] - g * s[1]) / s[0];
    let g2 = (a[2] - 2.0 * g1 * s[1] - g * s[2]) / s[0];
    Jet::new(g, g1, g2)
}

/// Even plateau: 1 for |x| ≤ inner, 0 for |x| ≥ outer, C^∞ in between.
pub fn plateau(x: f64, inner: f64, outer: f64) -> Jet {
    let width = outer - inner;
    let z = (outer - x.abs()) / width;
    let g = exp_step(z);
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    // dz/dx = -sign / width
    Jet::new(g.v, -sign * g.d1 / width, g.d2 / (width * width))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: impl Fn(f64) -> Jet, xs: &[f64]) {
        let h = 1e-5;
        for &x in xs {
            let Jet { d1, d2, .. } = f(x);
            let p = f(x + h).v;
            let m = f(x - h).v;
            let c = f(x).v;
            let fd1 = (p - m) / (2.0 * h);
            let fd2 = (p - 2.0 * c + m) / (h * h);
            assert!((fd1 - d1).abs() < 1e-6 * (1.0 + d1.abs()), "d1 at {x}: {fd1} vs {d1}");
            assert!((fd2 - d2).abs() < 1e-3 * (1.0 + d2.abs()), "d2 at {x}: {fd2} vs {d2}");
        }
    }

    #[test]
    fn quintic_derivatives() {
        fd_check(quintic_step, &[0.1, 0.3, 0.5, 0.77, 0.95]);
        assert_eq!(quintic_step(0.5).v, 0.5);
    }

    #[test]
    fn exp_step_derivatives_and_symmetry() {
        fd_check(exp_step, &[0.05, 0.2, 0.5, 0.8, 0.97]);
        for z in [0.1, 0.33, 0.6] {
            let a = exp_step(z).v;
            let b = exp_step(1.0 - z).v;
            assert!((a + b - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn jet_product_and_composition() {
        // (x² sin x) at x = 0.7 and sin(x²)
        let x = 0.7f64;
        let sq = Jet::new(x * x, 2.0 * x, 2.0);
        let sn = Jet::new(x.sin(), x.cos(), -x.sin());
        let p = sq * sn;
        let exact_d2 = 2.0 * x.sin() + 4.0 * x * x.cos() - x * x * x.sin();
        assert!((p.d2 - exact_d2).abs() < 1e-14);
        let outer = Jet::new((x * x).sin(), (x * x).cos(), -(x * x).sin());
        let c = Jet::compose(outer, sq);
        let exact = 2.0 * (x * x).cos() - 4.0 * x * x * (x * x).sin();
        assert!((c.d2 - exact).abs() < 1e-14);
    }

    #[test]
    fn plateau_shape() {
        assert_eq!(plateau(0.2, 0.25, 0.5).v, 1.0);
        assert_eq!(plateau(-0.5, 0.25, 0.5).v, 0.0);
        assert_eq!(plateau(0.7, 0.25, 0.5).v, 0.0);
        fd_check(|x| plateau(x, 0.25, 0.5), &[0.3, -0.3, 0.41, -0.45]);
    }
}
