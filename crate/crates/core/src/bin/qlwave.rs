use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use qlwave::charflow::CharFlow;
use qlwave::config::RunConfig;
use qlwave::experiments::dyadic::block_sweep;
use qlwave::experiments::scaling::default_test_field;
use qlwave::experiments::*;
use qlwave::geometry::causal_speed_set;
use qlwave::profiles::InitialData;
use qlwave::report;
use qlwave::Error;

const EXIT_FAIL: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_QUADRATURE: u8 = 3;
const EXIT_PRECONDITION: u8 = 4;
const EXIT_USAGE: u8 = 5;

/// Batch driver for the singular-data experiments.
///
/// Exit codes: 0 pass, 1 failed check or invalid config, 2 I/O or config
/// error, 3 quadrature failure, 4 precondition or domain error, 5 usage.
#[derive(Debug, Parser)]
#[command(name = "qlwave", version)]
struct Cli {
    /// TOML config; built-in defaults when absent.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Random seed, overriding `seed`.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Count warnings as failures.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check parameter constraints and section settings.
    Validate {
        /// Config to check; same as `--config`.
        path: Option<PathBuf>,
    },
    /// Run one experiment and write its report, curves and manifest.
    Run { experiment: Experiment },
    /// Write a profile, field, ellipse or block table.
    Export {
        kind: ExportKind,
        /// Absolute time for `field-at-t`, overriding `export.field_t_fraction`.
        #[arg(long)]
        t: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Experiment {
    Dyadic,
    Blowup,
    Lifespan,
    Scaling,
    Glue,
    Geometry,
    Fdcheck,
    NormsSelftest,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExportKind {
    Profile,
    FieldAtT,
    Ellipse,
    DyadicBlocks,
}

fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_string()
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Json(_) | Error::Config(_) => EXIT_IO,
        Error::Quadrature(_) | Error::NonUniqueMaximizer { .. } => EXIT_QUADRATURE,
        Error::Precondition(_) | Error::Domain { .. } | Error::Construction(_) => EXIT_PRECONDITION,
    }
}

/// Files produced by one command plus its verdict.
#[derive(Default)]
struct Outcome {
    outputs: Vec<String>,
    checks: Vec<(String, bool)>,
    warnings: Vec<String>,
}

impl Outcome {
    fn check(&mut self, name: &str, ok: bool) {
        self.checks.push((name.to_string(), ok));
    }

    fn warn(&mut self, msg: String) {
        self.warnings.push(msg);
    }

    fn json<T: Serialize>(&mut self, dir: &Path, name: &str, value: &T) -> qlwave::Result<()> {
        report::write_json(&dir.join(name), value)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn csv(
        &mut self,
        dir: &Path,
        name: &str,
        meta: &[(&str, String)],
        header: &[&str],
        rows: Vec<Vec<f64>>,
    ) -> qlwave::Result<()> {
        report::write_csv(BufWriter::new(File::create(dir.join(name))?), meta, header, rows)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn file(&mut self, dir: &Path, name: &str, write: impl FnOnce(BufWriter<File>) -> qlwave::Result<()>) -> qlwave::Result<()> {
        write(BufWriter::new(File::create(dir.join(name))?))?;
        self.outputs.push(name.to_string());
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    ExitCode::from(dispatch(&cli))
}

fn load_config(cli: &Cli, path: Option<&Path>) -> qlwave::Result<RunConfig> {
    let mut cfg = match path.or(cli.config.as_deref()) {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = &cli.out {
        cfg.output.dir = dir.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn dispatch(cli: &Cli) -> u8 {
    if let Command::Validate { path } = &cli.command {
        return validate(cli, path.as_deref());
    }
    let cfg = match load_config(cli, None) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let (name, command) = match &cli.command {
        Command::Run { experiment } => (value_name(experiment), format!("run {}", value_name(experiment))),
        Command::Export { kind, .. } => (value_name(kind), format!("export {}", value_name(kind))),
        Command::Validate { .. } => unreachable!(),
    };
    let dir = cfg.output.dir.join(&name);
    if let Err(e) = std::fs::create_dir_all(&dir) {
        eprintln!("error: cannot create {}: {e}", dir.display());
        return EXIT_IO;
    }
    let started = chrono::Utc::now();
    let mut outcome = Outcome::default();
    let result = match &cli.command {
        Command::Run { experiment } => run(*experiment, &cfg, &dir, &mut outcome),
        Command::Export { kind, t } => export(*kind, *t, &cfg, &dir, &mut outcome),
        Command::Validate { .. } => unreachable!(),
    };
    let all_pass = outcome.checks.iter().all(|(_, ok)| *ok);
    let (code, status, error) = match &result {
        Err(e) => (exit_code(e), "error", Some(e.to_string())),
        Ok(()) if !all_pass => (EXIT_FAIL, "fail", None),
        Ok(()) if cli.strict && !outcome.warnings.is_empty() => (EXIT_FAIL, "fail", None),
        Ok(()) => (0, "pass", None),
    };
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    for (check, ok) in &outcome.checks {
        println!("{} {check}", if *ok { "PASS" } else { "FAIL" });
    }
    if let Some(e) = &error {
        eprintln!("error: {e}");
    }
    let checks: serde_json::Map<String, Value> = outcome.checks.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    let manifest = json!({
        "command": command,
        "config": cfg,
        "version": env!("CARGO_PKG_VERSION"),
        "started_at": started.to_rfc3339(),
        "finished_at": chrono::Utc::now().to_rfc3339(),
        "strict": cli.strict,
        "threads": cli.threads,
        "outputs": outcome.outputs,
        "summary": {
            "status": status,
            "exit_code": code,
            "all_pass": error.is_none() && all_pass,
            "checks": checks,
            "warnings": outcome.warnings,
            "error": error,
        },
    });
    match report::write_json(&dir.join("manifest.json"), &manifest) {
        Ok(()) => {
            println!("manifest: {}", dir.join("manifest.json").display());
            code
        }
        Err(e) => {
            eprintln!("error: writing manifest: {e}");
            EXIT_IO
        }
    }
}

fn validate(cli: &Cli, path: Option<&Path>) -> u8 {
    let cfg = match load_config(cli, path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let violations = cfg.violations();
    if violations.is_empty() {
        println!("config valid");
        0
    } else {
        for v in &violations {
            println!("violation: {v}");
        }
        EXIT_FAIL
    }
}

fn run(exp: Experiment, cfg: &RunConfig, dir: &Path, out: &mut Outcome) -> qlwave::Result<()> {
    let p = cfg.params;
    let meta = |extra: Vec<(&'static str, String)>| {
        let mut m = vec![
            ("alpha", report::num(p.alpha)),
            ("beta", report::num(p.beta)),
            ("delta", report::num(p.delta)),
            ("epsilon", report::num(p.epsilon)),
            ("lambda", report::num(p.lambda)),
        ];
        m.extend(extra);
        m
    };
    match exp {
        Experiment::Dyadic => {
            let r = run_dyadic(p, &cfg.dyadic)?;
            let c = &r.checks;
            out.check("blocks_finite", c.blocks_finite);
            out.check("slope_negative", c.slope_negative);
            out.check("slope_within_limit", c.slope_ok);
            out.check("tail_small", c.tail_ok);
            out.check("uniform_in_epsilon", c.uniformity_ok);
            out.check("translation_invariant", c.translation_ok);
            if !r.flagged.is_empty() {
                out.warn(format!("blocks {:?} failed the refinement tolerance", r.flagged));
            }
            out.json(dir, "report.json", &r)?;
            out.csv(dir, "blocks.csv", &meta(vec![]), &DyadicReport::CURVE_HEADER, r.curve_rows())?;
            let fit_rows = r.fit.blocks.iter().map(|b| vec![b.j as f64, b.lambda, b.norm_squared, b.richardson]).collect();
            out.csv(
                dir,
                "fit_blocks.csv",
                &meta(vec![("fit_epsilon", report::num(r.fit.epsilon))]),
                &["j", "lambda", "norm_squared", "richardson"],
                fit_rows,
            )?;
        }
        Experiment::Blowup => {
            let flow = CharFlow::new(p)?;
            let r = run_blowup(&flow, &cfg.blowup)?;
            let c = &r.checks;
            out.check("i2_positive_last4", c.i2_positive_last4);
            out.check("i2_monotone_last4", c.i2_monotone_last4);
            out.check("ratio_exceeds_min", c.ratio_exceeds_min);
            out.check("i2_exponent", c.i2_exponent_ok);
            out.check("i1_exponent", c.i1_exponent_ok);
            out.check("quadrant_signs", c.quadrant_signs_ok);
            if !c.fit_r2_ok {
                out.warn("power-law fit has low r2".into());
            }
            out.json(dir, "report.json", &r)?;
            out.csv(dir, "curve.csv", &meta(vec![("t_eps", report::num(r.t_eps))]), &BlowupReport::CURVE_HEADER, r.curve_rows())?;
        }
        Experiment::Lifespan => {
            let r = lifespan_sweep(p, &cfg.lifespan.eps_list)?;
            out.check("t_eps_strictly_decreasing", r.strictly_decreasing);
            out.check("product_within_cap", r.max_product <= r.product_cap);
            out.json(dir, "report.json", &r)?;
            out.csv(dir, "curve.csv", &meta(vec![]), &LifespanReport::CURVE_HEADER, r.curve_rows())?;
        }
        Experiment::Scaling => {
            let s = &cfg.scaling;
            let beta = s.beta.unwrap_or(p.beta);
            let r = scale_norm_check(&default_test_field(), s.omega, s.gamma, &s.lam_list, beta)?;
            out.check("ratios_within_bound", r.all_pass);
            if r.measured_exponent.is_none() {
                out.warn("fewer than two scales, exponent not measured".into());
            }
            out.json(dir, "report.json", &r)?;
            let m = vec![("omega", report::num(s.omega)), ("gamma", report::num(s.gamma)), ("beta", report::num(beta))];
            out.csv(dir, "curve.csv", &m, &ScalingReport::CURVE_HEADER, r.curve_rows())?;
        }
        Experiment::Glue => {
            let r = build_glued_sequence(p.alpha, p.beta, &cfg.glue)?;
            out.check("supports_disjoint", r.supports_disjoint);
            out.check("lifespans_below_1_over_n", r.all_t_n_ok);
            out.check("partial_sums_increasing", r.partial_sums_increasing);
            out.check("terms_decreasing", r.terms_decreasing);
            out.json(dir, "report.json", &r)?;
            out.csv(dir, "curve.csv", &meta(vec![]), &GlueReport::CURVE_HEADER, r.curve_rows())?;
        }
        Experiment::Geometry => {
            let r = run_geometry(p, &cfg.geometry, cfg.seed)?;
            out.check("ellipse_in_circle", r.ellipse.pass);
            out.check("tangency_at_minus_one", r.tangency_ok);
            out.check("width_asymptotic", r.width.pass);
            out.check("chain_ledger", r.chain.all_pass);
            if r.chain.assumption_failures > 0 {
                out.warn(format!("{} chain samples violate |v| < 1/100", r.chain.assumption_failures));
            }
            out.json(dir, "report.json", &r)?;
            let rows = r.ellipse.samples.iter().map(|s| vec![s.v, s.max_radius, s.far_radius, s.margin_top]).collect();
            out.csv(dir, "ellipse.csv", &[], &["v", "max_radius", "far_radius", "margin_top"], rows)?;
            let rows = r.width.y.iter().zip(&r.width.ratio).map(|(&y, &q)| vec![y, q]).collect();
            out.csv(dir, "width.csv", &meta(vec![]), &["y", "ratio"], rows)?;
            out.file(dir, "chain.jsonl", |mut w| {
                for l in &r.ledgers {
                    l.write_jsonl(&mut w)?;
                }
                Ok(())
            })?;
        }
        Experiment::Fdcheck => {
            let flow = CharFlow::new(p)?;
            let r = run_fdcheck(&flow, &cfg.fdcheck)?;
            out.check("observed_order", r.order_ok);
            out.check("zero_data_bitwise_zero", r.zero_data_bitwise_zero);
            out.json(dir, "report.json", &r)?;
            out.csv(dir, "curve.csv", &meta(vec![("t", report::num(r.t))]), &FdCheckReport::CURVE_HEADER, r.curve_rows())?;
        }
        Experiment::NormsSelftest => {
            let r = norms_selftest(cfg.selftest.nodes)?;
            out.check("gaussian_closed_form", r.all_pass);
            out.json(dir, "report.json", &r)?;
            let rows = r.rows.iter().map(|x| vec![x.s, x.computed, x.closed_form, x.rel_error]).collect();
            out.csv(dir, "curve.csv", &[("nodes", r.nodes.to_string())], &["s", "computed", "closed_form", "rel_error"], rows)?;
        }
    }
    Ok(())
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn export(kind: ExportKind, t: Option<f64>, cfg: &RunConfig, dir: &Path, out: &mut Outcome) -> qlwave::Result<()> {
    let e = &cfg.export;
    if e.profile_points < 2 || e.field_points < 2 || e.ellipse_points < 3 {
        return Err(Error::Config("export point counts are too small".into()));
    }
    match kind {
        ExportKind::Profile => {
            let data = InitialData::new(cfg.params)?;
            let table = data.tabulate(e.profile_kind, &linspace(e.x_min, e.x_max, e.profile_points), e.x2)?;
            out.file(dir, "profile.csv", |w| table.write_csv(w))?;
        }
        ExportKind::FieldAtT => {
            let flow = CharFlow::new(cfg.params)?;
            let t = t.unwrap_or(e.field_t_fraction * flow.t_eps);
            if t >= flow.t_eps {
                return Err(Error::Precondition(format!("t = {t} is not below the blow-up time {}", flow.t_eps)));
            }
            let xs = linspace(e.x_min, e.x_max, e.field_points)
                .into_iter()
                .map(|y| flow.phi(t, y).map(|j| j.phi))
                .collect::<qlwave::Result<Vec<_>>>()?;
            let s = flow.sample_field(t, &xs)?;
            out.file(dir, "field.csv", |w| s.write_csv(w))?;
        }
        ExportKind::Ellipse => {
            let ell = causal_speed_set(e.ellipse_v)?;
            let pts = ell.boundary(e.ellipse_points);
            let max_radius = pts.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
            out.check("max_radius_at_most_one", max_radius <= 1.0 + 1e-12);
            let rows = pts.iter().map(|p| vec![p[0], p[1], p[0].hypot(p[1])]).collect();
            let meta = [("v", report::num(e.ellipse_v)), ("max_radius", report::num(max_radius))];
            out.csv(dir, "ellipse.csv", &meta, &["x1", "x2", "radius"], rows)?;
        }
        ExportKind::DyadicBlocks => {
            cfg.dyadic.validate()?;
            let blocks = block_sweep(cfg.params, cfg.dyadic.j_min..=cfg.dyadic.j_max, &cfg.dyadic)?;
            let rows = blocks
                .iter()
                .map(|b| vec![b.j as f64, b.lambda, b.norm_squared, b.coarse, b.richardson, b.flagged as u8 as f64])
                .collect();
            let meta = [("epsilon", report::num(cfg.params.epsilon)), ("beta", report::num(cfg.params.beta))];
            out.csv(dir, "blocks.csv", &meta, &DyadicReport::CURVE_HEADER, rows)?;
        }
    }
    Ok(())
}
