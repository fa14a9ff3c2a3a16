use proptest::prelude::*;
use qlwave::charflow::CharFlow;
use qlwave::profiles::ProfileParams;
use std::sync::OnceLock;

fn flow() -> &'static CharFlow {
    static F: OnceLock<CharFlow> = OnceLock::new();
    F.get_or_init(|| CharFlow::new(ProfileParams::default()).unwrap())
}

#[test]
fn focusing_time_bound() {
    let f = flow();
    let bound = 1.0 / (1e3f64).ln().powf(0.11);
    assert!((bound - 0.808_486_804_768_5).abs() < 1e-12);
    assert!(f.t_eps <= bound);
    assert!(f.t_eps * (1e3f64).ln().powf(0.11) <= 1.05);
}

#[test]
fn focusing_time_nonincreasing_in_eps() {
    let ts: Vec<f64> = [1e-2, 1e-3, 1e-4, 1e-5]
        .iter()
        .map(|&e| CharFlow::new(ProfileParams::default().with_epsilon(e)).unwrap().t_eps)
        .collect();
    for w in ts.windows(2) {
        assert!(w[1] <= w[0], "{ts:?}");
    }
}

#[test]
fn max_is_found_by_dense_scan() {
    // independent brute force over a uniform grid in the transition layer
    let f = flow();
    let e = f.params().epsilon;
    let mut best: f64 = 0.0;
    for i in 0..=200_000 {
        let y = 0.5 * e + 1.5 * e * i as f64 / 200_000.0;
        best = best.max(qlwave::charflow::focusing_rate(&f.data, y).unwrap().0);
    }
    assert!(f.m_eps >= best);
    assert!((f.m_eps - best) / best < 1e-9);
}

#[test]
fn second_derivative_scales_linearly_in_time() {
    let f = flow();
    let e = f.params().epsilon;
    for y in [0.6 * e, 0.9 * e, 3.0 * e, 0.1] {
        let full = f.phi(f.t_eps, y).unwrap().phi_yy;
        for s in [0.1, 0.5, 0.9] {
            let p = f.phi(s * f.t_eps, y).unwrap().phi_yy;
            assert!((p - s * full).abs() <= 1e-10 * full.abs().max(1.0));
        }
    }
}

#[test]
fn analytic_derivatives_converge_against_differences() {
    let f = flow();
    let e = f.params().epsilon;
    let t = 0.5 * f.t_eps;
    for y in [0.7 * e, 0.95 * e, 2.0 * e] {
        let p = f.phi(t, y).unwrap();
        let err = |h: f64| {
            let a = f.phi(t, y + h).unwrap();
            let b = f.phi(t, y - h).unwrap();
            let e1 = ((a.phi - b.phi) / (2.0 * h) - p.phi_y).abs();
            let e2 = ((a.phi_y - b.phi_y) / (2.0 * h) - p.phi_yy).abs();
            let ht = 1e-3 * t;
            let c = f.phi(t + ht, y).unwrap();
            let d = f.phi(t - ht, y).unwrap();
            let e3 = ((c.phi_y - d.phi_y) / (2.0 * ht) - p.phi_ty).abs();
            (e1, e2, e3)
        };
        let h = 0.01 * e;
        let (a1, a2, a3) = err(h);
        let (b1, b2, _) = err(h / 2.0);
        assert!((a1 / b1).log2() >= 1.9, "{a1} {b1}");
        assert!((a2 / b2).log2() >= 1.9, "{a2} {b2}");
        assert!(a3 <= 1e-9 * p.phi_ty.abs().max(1.0));
    }
}

#[test]
fn inverse_derivative_near_focus() {
    let f = flow();
    let gap = 1e-4;
    let t = f.t_eps * (1.0 - gap);
    let p = f.phi(t, f.nu_eps).unwrap();
    let x = p.phi;
    let h = 1e-6 * p.phi_y * f.nu_eps;
    let dinv = (f.invert_phi(t, x + h).unwrap() - f.invert_phi(t, x - h).unwrap()) / (2.0 * h);
    assert!((dinv * p.phi_y - 1.0).abs() < 1e-3, "{dinv} {}", 1.0 / p.phi_y);
    // at y = ν the two-sided bound reduces to φ_y ∝ (t_ε − t)
    let ratio = p.phi_y / (f.t_eps - t);
    assert!((ratio * f.t_eps - 1.0).abs() < 1e-6, "{ratio}");
}

#[test]
fn two_sided_comparison_near_focus() {
    // φ_y = (t_ε − t)/t_ε + 2t(M − H(y)) with M − H ≈ c(y − ν)², so the ratio
    // φ_y / ((y − ν)² + (t_ε − t)) stays between min and max of 1/t_ε and 2tc
    let f = flow();
    let e = f.params().epsilon;
    let eta = 0.5 * (f.nu_eps - 0.5 * e);
    let rate = |y: f64| qlwave::charflow::focusing_rate(&f.data, y).unwrap();
    let mut c_lo = f64::INFINITY;
    let mut c_hi: f64 = 0.0;
    for i in 0..=100 {
        let y = f.nu_eps - eta + 2.0 * eta * i as f64 / 100.0;
        if (y - f.nu_eps).abs() > 1e-3 * eta {
            let c = (f.m_eps - rate(y).0) / (y - f.nu_eps).powi(2);
            c_lo = c_lo.min(c);
            c_hi = c_hi.max(c);
        }
    }
    assert!(c_lo > 0.0);
    for dec in 0..=3 {
        for k in 0..=20 {
            let gap = 10f64.powf(-(dec as f64) - k as f64 / 20.0).max(1e-6);
            let t = f.t_eps * (1.0 - gap);
            let lo = (1.0 / f.t_eps).min(2.0 * t * c_lo);
            let hi = (1.0 / f.t_eps).max(2.0 * t * c_hi);
            for i in 0..=100 {
                let y = f.nu_eps - eta + 2.0 * eta * i as f64 / 100.0;
                let q = (y - f.nu_eps).powi(2) + (f.t_eps - t);
                let r = f.phi(t, y).unwrap().phi_y / q;
                assert!(r >= lo * (1.0 - 1e-6) && r <= hi * (1.0 + 1e-6), "gap {gap} y {y}: {r} not in [{lo}, {hi}]");
            }
        }
    }
}

#[test]
fn field_sample_matches_characteristics() {
    let f = flow();
    let t0 = f.sample_field(0.0, &[0.0, 0.0007, 0.01, 0.3]).unwrap();
    for (x, v) in t0.x1.iter().zip(&t0.v) {
        assert_eq!(*v, f.data.chi_eps.value(*x).unwrap());
    }
    let t = 0.6 * f.t_eps;
    let e = f.params().epsilon;
    for y in [0.55 * e, 0.8 * e, e, 4.0 * e, 0.2] {
        let x = f.phi(t, y).unwrap().phi;
        let s = f.sample_field(t, &[x]).unwrap();
        assert!((s.v[0] - f.data.chi_eps.value(y).unwrap()).abs() <= 1e-10);
    }
}

#[test]
fn field_derivatives_match_differences() {
    let f = flow();
    let t = 0.5 * f.t_eps;
    let x0 = f.phi(t, 3.0 * f.params().epsilon).unwrap().phi;
    let s = f.sample_field(t, &[x0]).unwrap();
    let err = |h: f64| {
        let g = f.sample_field(t, &[x0 - h, x0 + h]).unwrap();
        let fd = (g.v[1] - g.v[0]) / (2.0 * h);
        (fd - s.v_x[0]).abs()
    };
    let h = 2e-5;
    let (a, b) = (err(h), err(h / 2.0));
    assert!((a / b).log2() >= 1.9, "{a} {b}");
    let g = f.sample_field(t, &[x0 - 1e-6, x0 + 1e-6]).unwrap();
    let fd2 = (g.v_x[1] - g.v_x[0]) / 2e-6;
    assert!((fd2 - s.v_xx[0]).abs() <= 1e-5 * s.v_xx[0].abs());
}

#[test]
fn curvature_grows_toward_focus() {
    let f = flow();
    let mut prev = 0.0;
    for s in [0.5, 0.9, 0.99, 0.999] {
        let t = s * f.t_eps;
        let lo = f.phi(t, 0.0).unwrap().phi;
        let hi = f.phi(t, 0.05).unwrap().phi;
        let grid = f.focus_grid(t, lo, hi, 1e-8, 1e-4).unwrap();
        let sample = f.sample_field(t, &grid).unwrap();
        let sup = sample.v_xx.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(sup > prev, "{s}: {sup} <= {prev}");
        prev = sup;
    }
}

#[test]
fn field_csv_header() {
    let f = flow();
    let s = f.sample_field(0.1, &[0.2, 0.3]).unwrap();
    let mut buf = Vec::new();
    s.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "# kind=field t=0.1 epsilon=0.001");
    assert_eq!(lines.next().unwrap(), "x1,v,v_x,v_xx");
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn inverse_round_trip(s in 0.0f64..0.999, y in 0.0f64..0.5) {
        let f = flow();
        let t = s * f.t_eps;
        let x = f.phi(t, y).unwrap().phi;
        let back = f.invert_phi(t, x).unwrap();
        prop_assert!((back - y).abs() <= 1e-10, "{} vs {}", back, y);
    }

    #[test]
    fn phi_monotone_before_focus(s in 0.0f64..0.9999, y in 0.0f64..0.5) {
        let f = flow();
        prop_assert!(f.phi(s * f.t_eps, y).unwrap().phi_y > 0.0);
    }

    #[test]
    fn field_values_in_range(s in 0.0f64..0.99, u in 0.0f64..1.0) {
        let f = flow();
        let t = s * f.t_eps;
        let lo = f.phi(t, 0.0).unwrap().phi;
        let hi = f.phi(t, 0.5).unwrap().phi;
        let sample = f.sample_field(t, &[lo + u * (hi - lo)]).unwrap();
        let vmin = f.data.chi_eps.value(0.5).unwrap();
        prop_assert!(sample.v[0] <= 0.0 && sample.v[0] >= vmin);
    }
}
