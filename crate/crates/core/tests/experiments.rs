use proptest::prelude::*;
use qlwave::charflow::CharFlow;
use qlwave::experiments::blowup::{localized_fourier_norm_squared, EtaRule};
use qlwave::experiments::dyadic::{block_field, block_norm_squared};
use qlwave::experiments::scaling::default_test_field;
use qlwave::experiments::*;
use qlwave::profiles::{InitialData, ProfileParams};
use qlwave::sobolev::{fourier_norm, NormSpec};
use qlwave::Error;
use std::sync::OnceLock;

fn default_flow() -> &'static CharFlow {
    static F: OnceLock<CharFlow> = OnceLock::new();
    F.get_or_init(|| CharFlow::new(ProfileParams::default()).unwrap())
}

fn default_blowup() -> &'static BlowupReport {
    static R: OnceLock<BlowupReport> = OnceLock::new();
    R.get_or_init(|| run_blowup(default_flow(), &BlowupConfig::default()).unwrap())
}

#[test]
fn blowup_early_sample_is_finite_and_matches_fourier() {
    let r = default_blowup();
    let s = &r.samples[0];
    assert!((s.t / r.t_eps - 0.9).abs() < 1e-12);
    for v in [s.i1, s.i2, s.i3, s.norm_squared] {
        assert!(v.is_finite());
    }
    let f = s.fourier_norm_squared.expect("t = 0.9 t_eps is resolvable");
    assert!(((s.norm_squared - f) / f).abs() < 0.02, "{} vs {f}", s.norm_squared);
    // an independent spectral evaluation on a finer grid
    let g = localized_fourier_norm_squared(default_flow(), s.t, r.delta, 1025).unwrap();
    assert!(((s.norm_squared - g) / g).abs() < 0.02);
}

#[test]
fn blowup_growth_and_rates() {
    let r = default_blowup();
    let c = &r.checks;
    assert!(c.i2_positive_last4 && c.i2_monotone_last4 && c.ratio_monotone_last4);
    assert!(c.final_ratio > 10.0, "{}", c.final_ratio);
    assert!(r.fit_i2.exponent >= r.lower_bound_exponent - 0.4, "{:?}", r.fit_i2);
    assert!(r.fit_i2.r2 >= 0.98);
    assert!(r.fit_i1.exponent <= 1.2, "{:?}", r.fit_i1);
    assert!((r.lower_bound_exponent - 2.72).abs() < 1e-12);
    assert!(c.all_pass);
    let gaps: Vec<f64> = r.samples.iter().map(|s| s.gap / r.t_eps).collect();
    assert!(gaps.first().unwrap() / gaps.last().unwrap() >= 1000.0);
}

#[test]
fn blowup_localization_parameters() {
    let r = default_blowup();
    let nu = r.nu_eps;
    assert!(r.delta > 0.0 && r.kappa > 0.0 && r.i_eps > 2.0 * r.delta && r.i_eps < 4.0 * r.delta);
    assert!((r.zeta_2plus + r.zeta_3minus - 2.0 * nu).abs() <= 1e-15);
    for s in &r.samples {
        let z = s.zeta;
        let chain = [z[0], z[1], r.zeta_2plus, nu, r.zeta_3minus, z[2], z[3]];
        assert!(chain.windows(2).all(|w| w[0] < w[1]), "{chain:?}");
        // δ_ε is the largest admissible value, so the window touches ν ± η at the binding time
        let slack = 1e-9 * nu;
        assert!(z[0] >= nu - r.eta - slack && z[3] <= nu + r.eta + slack);
    }
}

#[test]
fn quadrant_signs_and_symmetry() {
    let r = default_blowup();
    for s in &r.samples {
        let q = &s.quadrants;
        assert_eq!(q.sign_violations, 0);
        assert!(q.sign_samples > 0);
        assert!(q.alpha >= 0.0 && q.delta >= 0.0 && q.beta <= 0.0 && q.gamma <= 0.0);
        let sum = q.alpha + q.beta + q.gamma + q.delta;
        assert!((sum - q.terms[3]).abs() <= 1e-9 * q.terms[3].abs());
        assert!(((q.beta - q.gamma) / q.beta).abs() < 1e-5);
        assert!(((q.terms[1] - q.terms[2]) / q.terms[1]).abs() < 1e-5);
        assert_eq!(q.j, q.delta + q.beta);
    }
}

#[test]
fn upper_gap_window_does_not_localize() {
    let cfg = BlowupConfig { eta_rule: EtaRule::UpperGap, crosscheck_below: 0.0, ..BlowupConfig::default() };
    let r = run_blowup(default_flow(), &cfg).unwrap();
    assert!(r.samples.iter().all(|s| s.i2 < 0.0));
    assert!(!r.checks.all_pass);
}

#[test]
fn blowup_guards() {
    let flow = default_flow();
    let bad = |f: Vec<f64>| BlowupConfig { t_fractions: f, ..BlowupConfig::default() };
    let mut early = blowup::default_fractions();
    early[0] = 0.5;
    assert!(matches!(run_blowup(flow, &bad(early)), Err(Error::Domain { .. })));
    let mut unordered = blowup::default_fractions();
    unordered.swap(3, 4);
    assert!(matches!(run_blowup(flow, &bad(unordered)), Err(Error::Precondition(_))));
    assert!(run_blowup(flow, &bad(vec![0.9, 0.95])).is_err());
    let strict = BlowupConfig { nodes: 64, refine_tol: 1e-12, ..BlowupConfig::default() };
    match run_blowup(flow, &strict) {
        Err(Error::Quadrature(m)) => assert!(m.contains("nodes = 64") && m.contains("t = ")),
        other => panic!("{other:?}"),
    }
    let none = CharFlow::new(ProfileParams::default().with_epsilon(1.5)).unwrap();
    assert!(run_blowup(&none, &BlowupConfig::default()).is_err());
}

#[test]
fn blocks_outside_support_vanish() {
    let data = InitialData::new(ProfileParams::default()).unwrap();
    assert_eq!(block_norm_squared(&data, 0, 64, 4, 0.0).unwrap(), 0.0);
    assert_eq!(block_norm_squared(&data, 13, 64, 4, 0.0).unwrap(), 0.0);
    assert!(block_norm_squared(&data, 1, 64, 4, 0.0).unwrap() > 0.0);
}

#[test]
fn block_spectrum_obeys_plancherel() {
    let data = InitialData::new(ProfileParams::default()).unwrap();
    for j in [3, 7, 10] {
        let f = block_field(&data, j, 128, 4, 0.0);
        let spectral = fourier_norm(&f, &NormSpec::homogeneous(0.0, 0.0)).unwrap();
        let direct = f.l2_norm();
        assert!(((spectral - direct) / direct).abs() < 1e-12, "j={j}");
    }
}

#[test]
fn reduced_dyadic_run() {
    let cfg = DyadicConfig {
        j_max: 14,
        fit_j_max: 12,
        uniformity_eps: vec![1e-3],
        nodes: 64,
        ..DyadicConfig::default()
    };
    let r = run_dyadic(ProfileParams::default(), &cfg).unwrap();
    assert_eq!(r.blocks.len(), 13);
    assert!(r.checks.blocks_finite && r.checks.slope_negative && r.checks.slope_ok);
    assert!(r.checks.tail_ok && r.checks.translation_ok && r.checks.uniformity_ok);
    assert!(r.flagged.is_empty());
    assert!(r.fit.slope <= r.block_exponent + 0.15, "{}", r.fit.slope);
    assert!((r.block_exponent + 1.03).abs() < 1e-12);
    assert!(r.translation_max_rel < 1e-3);
    assert_eq!(r.curve_rows().len(), 13);
}

#[test]
fn dyadic_guards() {
    let p = ProfileParams::default();
    for cfg in [
        DyadicConfig { j_min: 1, ..DyadicConfig::default() },
        DyadicConfig { j_max: 25, ..DyadicConfig::default() },
        DyadicConfig { fit_j_min: 10, fit_j_max: 11, ..DyadicConfig::default() },
        DyadicConfig { pad: 2, ..DyadicConfig::default() },
    ] {
        assert!(matches!(run_dyadic(p, &cfg), Err(Error::Precondition(_))));
    }
}

#[test]
fn lifespan_table() {
    let r = lifespan_sweep(ProfileParams::default(), &lifespan::default_eps_list()).unwrap();
    assert!(r.strictly_decreasing && r.all_pass);
    assert!(r.max_product <= 1.05 && r.max_product > 0.0);
    let row = r.rows.iter().find(|x| x.epsilon == 1e-3).unwrap();
    assert!(row.t_eps <= 0.808487);
    assert!((row.t_eps - 0.404_449_831_474_958_6).abs() < 1e-9, "{}", row.t_eps);
    assert!(lifespan_sweep(ProfileParams::default(), &[1e-3, 1e-2]).is_err());
    assert!(lifespan_sweep(ProfileParams::default(), &[]).is_err());
    assert!(lifespan_sweep(ProfileParams::default(), &[2.0, 1e-2]).is_err());
}

#[test]
fn scaling_identity_and_bound() {
    let f = default_test_field();
    let one = scale_norm_check(&f, -1.0, 1.0, &[1.0], 0.6).unwrap();
    assert_eq!(one.rows[0].ratio, 1.0);
    let lams: Vec<f64> = (2..=5).map(|n| (n as f64).powi(-4)).collect();
    let plain = scale_norm_check(&f, -1.0, 1.0, &lams, 0.0).unwrap();
    let e = plain.measured_exponent.unwrap();
    assert!((e - 0.75).abs() < 5e-4, "{e}");
    for row in &plain.rows {
        assert!((row.ratio - 1.0).abs() < 5e-3);
    }
    let logged = scale_norm_check(&f, -1.0, 1.0, &lams, 0.6).unwrap();
    assert!(logged.max_ratio <= 2.1 && logged.all_pass);
    assert!(matches!(scale_norm_check(&f, -1.0, 0.5, &lams, 0.6), Err(Error::Precondition(_))));
    assert!(scale_norm_check(&f, -1.0, 1.0, &[0.0], 0.6).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn homogeneous_scaling_is_exact(lam in 1e-3f64..1.0, gamma in 0.5f64..2.0) {
        let f = default_test_field();
        let r = scale_norm_check(&f, -gamma, gamma, &[lam], 0.0).unwrap();
        let expected = lam.powf(-gamma + 1.75 * gamma);
        prop_assert!((r.rows[0].norm / r.base_norm / expected - 1.0).abs() < 1e-9);
    }
}

#[test]
fn glued_sequence() {
    let r = build_glued_sequence(0.11, 0.6, &GlueConfig::default()).unwrap();
    assert_eq!(r.terms.len(), 7);
    assert!(r.all_pass && r.supports_disjoint && r.all_t_n_ok);
    for t in &r.terms {
        let n = t.n as f64;
        assert!(t.t_n <= 1.0 / n);
        assert_eq!(t.log_eps, -n.powf(6.0 / 0.11));
        let expected = 2.0 / n.powi(3) * (1.0 + 8.0 * n.ln()).powf(0.6);
        assert!((t.norm_bound - expected).abs() <= 1e-12 * expected);
    }
    let sums: Vec<f64> = r.terms.iter().map(|t| t.partial_sum).collect();
    assert!(sums.windows(2).all(|w| w[1] > w[0]));
    let last = *sums.last().unwrap();
    assert!(last + r.tail_bound.unwrap() < 2.0);
    assert!(r.unscaled_extent_bound < 2.0);
    // with α large, n⁵ dominates
    let wide = build_glued_sequence(1.5, 0.6, &GlueConfig::default()).unwrap();
    assert_eq!(wide.terms[0].log_eps, -32.0);
    assert!(build_glued_sequence(0.11, 0.6, &GlueConfig { n_max: 9, ..GlueConfig::default() }).is_err());
    assert!(build_glued_sequence(0.11, 0.6, &GlueConfig { omega: 0.0, ..GlueConfig::default() }).is_err());
}
