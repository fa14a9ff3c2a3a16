use proptest::prelude::*;
use qlwave::charflow::CharFlow;
use qlwave::fdsolver::*;
use qlwave::profiles::ProfileParams;
use qlwave::Error;

fn flow(eps: f64) -> CharFlow {
    CharFlow::new(ProfileParams::default().with_epsilon(eps)).unwrap()
}

fn chi_ic(f: &CharFlow) -> impl Fn(f64) -> f64 + Sync + '_ {
    move |x| f.data.chi_eps.value(x.min(1.0)).unwrap_or(0.0)
}

fn all_schemes() -> [(Scheme, Limiter); 3] {
    [(Scheme::Upwind, Limiter::None), (Scheme::Upwind, Limiter::Minmod), (Scheme::Leapfrog, Limiter::None)]
}

#[test]
fn constant_state_is_transported_unchanged() {
    for (scheme, limiter) in all_schemes() {
        let cfg = FdConfig { h: 1e-3, t_final: 0.2, x_max: 0.3, scheme, limiter, ..Default::default() };
        let sol = solve_factored(|_| -0.004, &cfg, 1.0, 1e-3).unwrap();
        for s in &sol.snapshots {
            assert!(s.field.v.iter().all(|&v| v == -0.004), "{scheme:?} {limiter:?}");
        }
    }
}

#[test]
fn zero_data_gives_bitwise_zero() {
    for (scheme, limiter) in all_schemes() {
        let cfg = FdConfig { h: 1e-3, t_final: 0.2, x_max: 0.3, scheme, limiter, track_u: true, ..Default::default() };
        let sol = solve_factored(|_| 0.0, &cfg, 1.0, 1e-3).unwrap();
        let last = sol.last();
        assert!(last.field.v.iter().all(|v| v.to_bits() == 0), "{scheme:?} {limiter:?}");
        assert!(last.u.as_ref().unwrap().iter().all(|u| u.to_bits() == 0));
    }
}

#[test]
fn config_guards() {
    let f = flow(1e-3);
    let ic = chi_ic(&f);
    let bad = FdConfig { cfl: 0.5, ..Default::default() };
    assert!(matches!(solve_factored(&ic, &bad, f.t_eps, 1e-3), Err(Error::Domain { name: "cfl", .. })));
    let late = FdConfig { t_final: 0.9 * f.t_eps, ..Default::default() };
    assert!(matches!(solve_factored(&ic, &late, f.t_eps, 1e-3), Err(Error::Precondition(_))));
    let narrow = FdConfig { x_min: 0.0, x_max: 1e-4, ..Default::default() };
    assert!(narrow.validate().is_err());
    let toml_text = "h = 1e-4\nlimiter = \"minmod\"\n";
    let parsed: FdConfig = toml::from_str(toml_text).unwrap();
    assert_eq!(parsed.limiter, Limiter::Minmod);
    assert_eq!(parsed.cfl, MAX_CFL);
    assert!(toml::from_str::<FdConfig>("gamma = 1").is_err());
}

#[test]
fn runtime_speed_violation_aborts() {
    let cfg = FdConfig { h: 1e-3, t_final: 0.01, x_max: 0.1, ..Default::default() };
    let err = solve_factored(|x| if x > 0.05 { 0.02 } else { 0.0 }, &cfg, 1.0, 1e-3).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("CFL bound violated at step 0"), "{msg}");
    assert!(msg.contains("0.05"), "{msg}");
}

#[test]
fn courant_number_stays_below_cfl() {
    let f = flow(1e-3);
    let cfg = FdConfig { h: 1e-4, t_final: 0.05, x_max: 0.1, ..Default::default() };
    let sol = solve_factored(chi_ic(&f), &cfg, f.t_eps, 1e-3).unwrap();
    assert!(sol.max_courant <= MAX_CFL);
    assert!(sol.dt <= MAX_CFL * cfg.h / SPEED_BOUND * (1.0 + 1e-12));
    assert_eq!(sol.snapshots.len(), cfg.snapshots + 1);
    assert!((sol.last().field.t - 0.05).abs() < 1e-15);
}

#[test]
fn maximum_principle_at_default_parameters() {
    let f = flow(1e-3);
    let t = 0.5 * f.t_eps;
    let lo = f.data.chi_eps.value(t + 0.02).unwrap();
    for limiter in [Limiter::None, Limiter::Minmod] {
        let cfg = FdConfig { h: 1e-4, t_final: t, x_max: t + 0.02, limiter, snapshots: 8, ..Default::default() };
        let sol = solve_factored(chi_ic(&f), &cfg, f.t_eps, 1e-3).unwrap();
        for s in &sol.snapshots {
            assert!(s.field.v.iter().all(|&v| v <= 0.0 && v >= lo), "{limiter:?} t={}", s.field.t);
        }
    }
}

#[test]
fn resolved_front_converges_at_scheme_order() {
    // feature width ε/2 well above the numerical diffusion length
    let f = flow(0.05);
    let base = FdConfig { x_max: 0.2, ..Default::default() };
    let hs = [2.5e-3, 1.25e-3, 6.25e-4];
    let r = crosscheck(&f, &base, &hs, 0.01).unwrap();
    assert!(r.observed_order > 0.9 && r.observed_order < 1.1, "{r:?}");
    assert!(r.max_principle);
    let m = crosscheck(&f, &FdConfig { limiter: Limiter::Minmod, ..base }, &hs, 0.01).unwrap();
    assert!(m.observed_order > 1.5 && m.observed_order < 2.1, "{m:?}");
    assert!(m.sup_error[2] < r.sup_error[2], "{m:?} {r:?}");
}

#[test]
fn unresolved_front_reports_fractional_order() {
    let f = flow(1e-3);
    let t = 0.5 * f.t_eps;
    let base = FdConfig { x_max: t + 0.02, ..Default::default() };
    let r = crosscheck(&f, &base, &[2e-4, 1e-4], t).unwrap();
    assert!(r.sup_error[1] < r.sup_error[0]);
    assert!(r.orders[0] > 0.3 && r.orders[0] < 0.9, "{r:?}");
}

#[test]
fn tracers_keep_their_value() {
    let f = flow(0.05);
    let t = 0.5 * f.t_eps;
    let labels = [0.1, 0.15, 0.2];
    let mut drifts = Vec::new();
    for h in [1e-3, 5e-4] {
        let cfg = FdConfig { h, t_final: t, x_max: 0.5, snapshots: 16, ..Default::default() };
        let sol = solve_factored(chi_ic(&f), &cfg, f.t_eps, 0.05).unwrap();
        let r = trace_tracers(&sol, &labels, 8).unwrap();
        for (y, x) in labels.iter().zip(&r.end) {
            let exact = f.phi(t, *y).unwrap().phi;
            assert!((x - exact).abs() < 5.0 * h, "y={y} x={x} exact={exact}");
        }
        drifts.push(r.max_drift);
    }
    assert!(drifts[0] < 5e-3, "{drifts:?}");
    let order = (drifts[0] / drifts[1]).log2();
    assert!(order > 0.7, "{drifts:?}");
}

#[test]
fn tracer_guards() {
    let cfg = FdConfig { h: 1e-3, t_final: 0.1, x_max: 0.2, ..Default::default() };
    let sol = solve_factored(|_| 0.0, &cfg, 1.0, 1e-3).unwrap();
    assert!(trace_tracers(&sol, &[0.15], 4).is_err());
    assert!(trace_tracers(&sol, &[0.5], 4).is_err());
    let r = trace_tracers(&sol, &[0.05], 4).unwrap();
    assert!((r.end[0] - 0.15).abs() < 1e-12);
    assert_eq!(r.max_drift, 0.0);
}

#[test]
fn characteristic_field_matches_flow() {
    let f = flow(1e-3);
    let t = 0.3 * f.t_eps;
    let xs: Vec<f64> = (0..50).map(|i| t - 0.001 + i as f64 * 1e-4).collect();
    let v = characteristic_field(&f, t, &xs).unwrap();
    for (x, v) in xs.iter().zip(&v) {
        if *x <= t {
            assert_eq!(*v, 0.0);
        } else {
            let y = f.invert_phi(t, *x).unwrap();
            assert!((f.phi(t, y).unwrap().phi - x).abs() < 1e-12);
        }
    }
}

#[test]
fn characteristic_u_solves_du_equals_v() {
    let f = flow(1e-3);
    let t = 0.25 * f.t_eps;
    let k = 1e-6;
    for x in [t + 2e-4, t + 8e-4, t + 3e-3, t + 0.05] {
        let ux = (characteristic_u(&f, t, x + k).unwrap() - characteristic_u(&f, t, x - k).unwrap()) / (2.0 * k);
        let ut = (characteristic_u(&f, t + k, x).unwrap() - characteristic_u(&f, t - k, x).unwrap()) / (2.0 * k);
        let v = characteristic_field(&f, t, &[x]).unwrap()[0];
        assert!((ux - ut - v).abs() < 1e-6 * (1.0 + v.abs() * 1e3), "x={x} Du={} v={v}", ux - ut);
    }
    assert_eq!(characteristic_u(&f, 0.1, -0.1).unwrap(), 0.0);
    assert!(characteristic_u(&f, 0.5, 0.6).is_err());
}

#[test]
fn tracked_u_matches_characteristic_u() {
    let f = flow(0.05);
    let t = 0.1;
    let mut errs = Vec::new();
    for h in [1e-3, 5e-4] {
        let cfg = FdConfig { h, t_final: t, x_max: 0.4, track_u: true, snapshots: 1, ..Default::default() };
        let sol = solve_factored(chi_ic(&f), &cfg, f.t_eps, 0.05).unwrap();
        let last = sol.last();
        let u = last.u.as_ref().unwrap();
        let mut worst = 0.0f64;
        for (i, &x) in last.field.x1.iter().enumerate() {
            // the outflow end lacks upstream data for the diagonal shift
            if x > 0.3 {
                break;
            }
            worst = worst.max((u[i] - characteristic_u(&f, t, x).unwrap()).abs());
        }
        errs.push(worst);
    }
    assert!(errs[0] < 1e-3, "{errs:?}");
    assert!(errs[1] < 0.7 * errs[0], "{errs:?}");
}

#[test]
fn residual_vanishes_on_trivial_fields() {
    let zero = StencilGrid::from_fn(0.0, 0.0, 0.01, 5, 7, |_, _| Ok(0.0)).unwrap();
    let r = residual_check(&zero).unwrap();
    assert_eq!((r.l2, r.max), (0.0, 0.0));
    let affine = StencilGrid::from_fn(0.1, -0.2, 0.01, 5, 7, |t, x| Ok(x - t + 0.3)).unwrap();
    assert!(residual_check(&affine).unwrap().max < 1e-10);
    let tiny = StencilGrid::from_fn(0.0, 0.0, 0.01, 2, 7, |_, _| Ok(0.0)).unwrap();
    assert!(residual_check(&tiny).is_err());
}

fn focus_residual(f: &CharFlow, k: f64, scale: Option<(f64, f64, f64)>) -> ResidualReport {
    let eps = f.params().epsilon;
    let t = 0.25 * f.t_eps;
    let xc = f.phi(t, f.nu_eps).unwrap().phi;
    let n = (4.0 * eps / k).round() as usize;
    let g = match scale {
        None => StencilGrid::from_fn(t - k, xc - 2.0 * eps, k, 3, n, |t, x| characteristic_u(f, t, x)),
        Some((lam, omega, gamma)) => {
            // same physical window after the change of variables
            let c = lam.powf(-gamma);
            StencilGrid::from_fn(c * (t - k), c * (xc - 2.0 * eps), c * k, 3, n, |t, x| {
                Ok(lam.powf(omega) * characteristic_u(f, lam.powf(gamma) * t, lam.powf(gamma) * x)?)
            })
        }
    };
    residual_check(&g.unwrap()).unwrap()
}

#[test]
fn characteristic_u_residual_converges() {
    let f = flow(1e-3);
    let ks = [1e-4, 5e-5, 2.5e-5];
    let r: Vec<f64> = ks.iter().map(|&k| focus_residual(&f, k, None).l2).collect();
    for w in r.windows(2) {
        assert!((w[0] / w[1]).log2() >= 1.0, "{r:?}");
    }
    assert!(r[2] < 1e-3 * focus_residual(&f, 2.5e-5, None).wave_l2, "{r:?}");
}

#[test]
fn scaled_solutions_need_balanced_exponents() {
    let f = flow(1e-3);
    let k = 5e-5;
    let base = focus_residual(&f, k, None);
    let balanced = focus_residual(&f, k, Some((2.0, -1.0, 1.0)));
    let unbalanced = focus_residual(&f, k, Some((2.0, 0.0, 1.0)));
    assert!((balanced.l2 - base.l2).abs() <= 1e-6 * base.l2 + 1e-15, "{balanced:?} {base:?}");
    assert!(unbalanced.l2 > 100.0 * balanced.l2, "{unbalanced:?} {balanced:?}");
}

#[test]
fn csv_layout() {
    let cfg = FdConfig { h: 1e-2, t_final: 0.1, x_max: 0.2, snapshots: 2, track_u: true, ..Default::default() };
    let sol = solve_factored(|_| 0.0, &cfg, 1.0, 1e-3).unwrap();
    let mut buf = Vec::new();
    sol.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "t,x1,v,v_x,v_xx,u");
    assert!(text.contains("fd_series"));
    let rows = text.lines().filter(|l| !l.starts_with('#')).count() - 1;
    assert_eq!(rows, 3 * cfg.nodes().len());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn monotone_schemes_keep_bounds(vals in prop::collection::vec(-0.3f64..0.0, 8), minmod in any::<bool>()) {
        let ic = move |x: f64| {
            let i = ((x.max(0.0) * 40.0) as usize).min(vals.len() - 1);
            vals[i]
        };
        let lo = (0..8).map(|i| ic(i as f64 / 40.0)).fold(0.0, f64::min).min(ic(-1.0));
        let hi = (0..8).map(|i| ic(i as f64 / 40.0)).fold(f64::NEG_INFINITY, f64::max).max(ic(-1.0));
        let limiter = if minmod { Limiter::Minmod } else { Limiter::None };
        let cfg = FdConfig { h: 2e-3, t_final: 0.1, x_min: -0.01, x_max: 0.3, limiter, snapshots: 5, ..Default::default() };
        let sol = solve_factored(ic, &cfg, 1.0, 1e-3).unwrap();
        for s in &sol.snapshots {
            prop_assert!(s.field.v.iter().all(|&v| v >= lo - 1e-15 && v <= hi + 1e-15));
        }
    }
}
