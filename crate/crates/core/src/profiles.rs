//! Initial-data profiles: the logarithmic profile `χ`, its mollified version
//! `χ_ε`, cutoffs, the dyadic partition `ζ` and the extended datum `h_ε`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_ui};

use crate::quad::GaussLegendre;
use crate::report;
use crate::smooth::{exp_step, plateau, quintic_step, Jet};
use crate::{Error, Result};

/// Width convention of the admissible base `|x₂| ≤ w·√x₁/|ln x₁|^δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Width {
    #[default]
    Unit,
    Sqrt2,
}

impl Width {
    pub fn factor(self) -> f64 {
        match self {
            Width::Unit => 1.0,
            Width::Sqrt2 => std::f64::consts::SQRT_2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileParams {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub lambda: f64,
    pub width: Width,
    /// Multiply `h_ε` by `l(x₁|ln ε|^{α/2})`.
    pub late_cutoff: bool,
}

impl Default for ProfileParams {
    fn default() -> Self {
        ProfileParams {
            alpha: 0.11,
            beta: 0.60,
            delta: 0.05,
            epsilon: 1e-3,
            lambda: 0.01,
            width: Width::Unit,
            late_cutoff: false,
        }
    }
}

impl ProfileParams {
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// `2α − 2β − δ`, the exponent governing the dyadic block bound.
    pub fn block_exponent(&self) -> f64 {
        2.0 * self.alpha - 2.0 * self.beta - self.delta
    }

    pub fn log_eps(&self) -> f64 {
        -self.epsilon.ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub constraint: &'static str,
    /// Amount by which the inequality fails.
    pub margin: f64,
}

/// Lists every violated parameter constraint. Empty means valid.
pub fn validate_params(p: &ProfileParams) -> Vec<Violation> {
    let fields = [p.alpha, p.beta, p.delta, p.epsilon, p.lambda];
    if fields.iter().any(|x| !x.is_finite()) {
        return vec![Violation { constraint: "all fields finite", margin: f64::NAN }];
    }
    let mut out = Vec::new();
    let mut need = |constraint, margin: f64| {
        if margin >= 0.0 {
            out.push(Violation { constraint, margin });
        }
    };
    need("2*alpha - 2*beta - delta < -1", p.block_exponent() + 1.0);
    need("alpha > 2*delta", 2.0 * p.delta - p.alpha);
    if p.alpha > 1.0 {
        need("alpha <= 1", p.alpha - 1.0);
    }
    need("beta > 1/2", 0.5 - p.beta);
    if p.alpha <= 0.0 {
        need("alpha > 0", -p.alpha);
    }
    if p.delta <= 0.0 {
        need("delta > 0", -p.delta);
    }
    if p.epsilon <= 0.0 {
        need("epsilon > 0", -p.epsilon);
    }
    if p.epsilon > 0.5 {
        need("epsilon <= 1/2", p.epsilon - 0.5);
    }
    if p.lambda < 0.0 {
        need("lambda >= 0", -p.lambda);
    }
    need("lambda < 1/8", p.lambda - 0.125);
    out
}

fn log_pow(x: f64, a: f64) -> f64 {
    (-x.ln()).abs().powf(a)
}

/// `χ(x) = −∫₀^x |ln s|^α ds = −Γ(α+1, −ln x)` on `[0, 1]`.
#[derive(Debug, Clone, Copy)]
pub struct Chi {
    pub alpha: f64,
}

impl Chi {
    pub fn value(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain { name: "x1", value: x, domain: "[0, 1]" });
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        if x == 1.0 {
            return Ok(-gamma(self.alpha + 1.0));
        }
        Ok(-gamma_ui(self.alpha + 1.0, -x.ln()))
    }

    pub fn jet(&self, x: f64) -> Result<Jet> {
        let v = self.value(x)?;
        if x == 0.0 {
            return Ok(Jet::new(0.0, f64::NEG_INFINITY, f64::INFINITY));
        }
        let l = -x.ln();
        Ok(Jet::new(v, -l.powf(self.alpha), self.alpha * l.powf(self.alpha - 1.0) / x))
    }
}

/// Mollifier `ψ_ε(x) = S(2x/ε − 1)`: 0 below ε/2, 1 above ε.
pub fn mollifier(x: f64, eps: f64) -> Jet {
    let s = quintic_step(2.0 * x / eps - 1.0);
    Jet::new(s.v, s.d1 * 2.0 / eps, s.d2 * 4.0 / (eps * eps))
}

/// Outer cutoff `ψ`: 1 on `|x| ≤ 1/4`, 0 on `|x| ≥ 1/2`, even and C^∞.
pub fn cutoff(x: f64) -> Jet {
    plateau(x, 0.25, 0.5)
}

/// Late cutoff profile `l`: 1 on `[0, 1]`, 0 beyond 2.
pub fn late_profile(x: f64) -> Jet {
    plateau(x, 1.0, 2.0)
}

/// Dyadic bump `ζ(x) = H(log₂x + 1) − H(log₂x)`, supported in `[1/2, 2]`.
/// Integer shifts in `log₂x` telescope to 1.
pub fn dyadic_zeta(x: f64) -> Jet {
    if x <= 0.5 || x >= 2.0 {
        return Jet::constant(0.0);
    }
    let ln2 = std::f64::consts::LN_2;
    let tau = x.log2();
    let b = exp_step(tau + 1.0) - exp_step(tau);
    let inner = Jet::new(tau, 1.0 / (x * ln2), -1.0 / (x * x * ln2));
    Jet::compose(b, inner)
}

/// `ζ(2^j x)`.
pub fn zeta_block(j: i32, x: f64) -> f64 {
    dyadic_zeta(x * 2f64.powi(j)).v
}

/// `ζ_{2^{-j}} f`, supported in `[2^{-j}/2, 2^{1-j}]`.
#[derive(Debug, Clone, Copy)]
pub struct DyadicBlock<F> {
    pub j: i32,
    pub f: F,
}

impl<F: Fn(f64) -> f64> DyadicBlock<F> {
    pub fn eval(&self, x: f64) -> f64 {
        let z = zeta_block(self.j, x);
        if z == 0.0 {
            0.0
        } else {
            z * (self.f)(x)
        }
    }

    pub fn support(&self) -> (f64, f64) {
        let l = 2f64.powi(-self.j);
        (0.5 * l, 2.0 * l)
    }
}

pub fn dyadic_block<F: Fn(f64) -> f64>(j: i32, f: F) -> DyadicBlock<F> {
    DyadicBlock { j, f }
}

/// `χ_ε(x) = −∫_0^x ψ_ε(s)|ln s|^α ds`.
#[derive(Debug, Clone)]
pub struct MollifiedChi {
    pub alpha: f64,
    pub eps: f64,
    chi: Chi,
    chi_at_eps: f64,
    /// `∫_{ε/2}^{ε} ψ_ε |ln s|^α ds`.
    transition_mass: f64,
    gl: GaussLegendre,
}

impl MollifiedChi {
    pub fn new(alpha: f64, eps: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain { name: "alpha", value: alpha, domain: "(0, inf)" });
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Domain { name: "epsilon", value: eps, domain: "(0, inf)" });
        }
        let chi = Chi { alpha };
        let gl = GaussLegendre::new(24);
        let mut m = MollifiedChi { alpha, eps, chi, chi_at_eps: 0.0, transition_mass: 0.0, gl };
        m.transition_mass = m.ramp_integral(eps);
        m.chi_at_eps = if eps <= 1.0 { chi.value(eps)? } else { f64::NAN };
        Ok(m)
    }

    fn ramp_integral(&self, x: f64) -> f64 {
        let lo = 0.5 * self.eps;
        self.gl.integrate(lo, x, |s| mollifier(s, self.eps).v * log_pow(s, self.alpha))
    }

    /// Constant `χ_ε(x) − χ(x)` for `x ≥ ε`.
    pub fn offset(&self) -> f64 {
        -self.transition_mass - self.chi_at_eps
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        if x > 1.0 || x.is_nan() {
            return Err(Error::Domain { name: "x1", value: x, domain: "(-inf, 1]" });
        }
        let lo = 0.5 * self.eps;
        Ok(if x <= lo {
            0.0
        } else if x <= self.eps {
            -self.ramp_integral(x)
        } else {
            self.chi.value(x)? - self.chi_at_eps - self.transition_mass
        })
    }

    pub fn jet(&self, x: f64) -> Result<Jet> {
        let v = self.value(x)?;
        if x <= 0.5 * self.eps {
            return Ok(Jet::constant(0.0));
        }
        let m = mollifier(x, self.eps);
        let l = -x.ln();
        let la = l.powf(self.alpha);
        let d1 = -m.v * la;
        let d2 = -m.d1 * la + m.v * self.alpha * l.powf(self.alpha - 1.0) / x;
        Ok(Jet::new(v, d1, d2))
    }
}

/// All initial-data profiles for one parameter set.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub params: ProfileParams,
    pub chi: Chi,
    pub chi_eps: MollifiedChi,
}

impl InitialData {
    pub fn new(params: ProfileParams) -> Result<Self> {
        Ok(InitialData {
            params,
            chi: Chi { alpha: params.alpha },
            chi_eps: MollifiedChi::new(params.alpha, params.epsilon)?,
        })
    }

    /// `l(x₁|ln ε|^{α/2})` when enabled, otherwise 1.
    pub fn late_cutoff(&self, x1: f64) -> Jet {
        if !self.params.late_cutoff {
            return Jet::constant(1.0);
        }
        let k = self.params.log_eps().powf(0.5 * self.params.alpha);
        late_profile(x1 * k).chain_scale(k)
    }

    /// Half-width of the admissible base at `x₁`.
    pub fn base_half_width(&self, x1: f64) -> f64 {
        self.params.width.factor() * x1.sqrt() / log_pow(x1, self.params.delta)
    }

    /// `ψ(|ln x₁|^δ x₂ / (w√x₁)) ψ(x₁)` with its x₁-derivatives at fixed x₂.
    pub fn kappa_jet(&self, x1: f64, x2: f64) -> Jet {
        if x1 <= 0.0 || x1 >= 0.5 {
            return Jet::constant(0.0);
        }
        let d = self.params.delta;
        let l = -x1.ln();
        // q(x) = L^δ x^{-1/2}, L = -ln x
        let m = d * l.powf(d - 1.0) + 0.5 * l.powf(d);
        let dm = -(d * (d - 1.0) * l.powf(d - 2.0) + 0.5 * d * l.powf(d - 1.0)) / x1;
        let q = l.powf(d) / x1.sqrt();
        let q1 = -m * x1.powf(-1.5);
        let q2 = 1.5 * x1.powf(-2.5) * m - x1.powf(-1.5) * dm;
        let c = x2 / self.params.width.factor();
        let arg = Jet::new(c * q, c * q1, c * q2);
        Jet::compose(cutoff(arg.v), arg) * cutoff(x1)
    }

    pub fn kappa(&self, x1: f64, x2: f64) -> f64 {
        self.kappa_jet(x1, x2).v
    }

    /// `h_ε = χ_ε(x₁) κ(x₁, x₂)` (times the late cutoff when enabled).
    pub fn h_eps_jet(&self, x1: f64, x2: f64) -> Jet {
        let k = self.kappa_jet(x1, x2);
        if k == Jet::constant(0.0) {
            return k;
        }
        let c = self.chi_eps.jet(x1).expect("x1 < 1/2 lies in the domain");
        c * k * self.late_cutoff(x1)
    }

    pub fn h_eps(&self, x1: f64, x2: f64) -> f64 {
        self.h_eps_jet(x1, x2).v
    }

    pub fn eval(&self, kind: ProfileKind, x1: f64, x2: f64) -> Result<Jet> {
        Ok(match kind {
            ProfileKind::Chi => self.chi.jet(x1)?,
            ProfileKind::ChiEps => self.chi_eps.jet(x1)?,
            ProfileKind::MollifierPsiEps => mollifier(x1, self.params.epsilon),
            ProfileKind::CutoffPsi => cutoff(x1),
            ProfileKind::Kappa => self.kappa_jet(x1, x2),
            ProfileKind::DyadicZeta => dyadic_zeta(x1),
            ProfileKind::HEps => self.h_eps_jet(x1, x2),
        })
    }

    /// Samples a profile and its first two x₁-derivatives on `xs` at fixed `x2`.
    pub fn tabulate(&self, kind: ProfileKind, xs: &[f64], x2: f64) -> Result<ProfileTable> {
        let rows = xs
            .iter()
            .map(|&x| self.eval(kind, x, x2).map(|j| [x, j.v, j.d1, j.d2]))
            .collect::<Result<Vec<_>>>()?;
        Ok(ProfileTable { kind, params: self.params, x2, rows })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Chi,
    ChiEps,
    MollifierPsiEps,
    CutoffPsi,
    Kappa,
    DyadicZeta,
    HEps,
}

impl ProfileKind {
    pub const ALL: [ProfileKind; 7] = [
        ProfileKind::Chi,
        ProfileKind::ChiEps,
        ProfileKind::MollifierPsiEps,
        ProfileKind::CutoffPsi,
        ProfileKind::Kappa,
        ProfileKind::DyadicZeta,
        ProfileKind::HEps,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::Chi => "chi",
            ProfileKind::ChiEps => "chi_eps",
            ProfileKind::MollifierPsiEps => "mollifier_psi_eps",
            ProfileKind::CutoffPsi => "cutoff_psi",
            ProfileKind::Kappa => "kappa",
            ProfileKind::DyadicZeta => "dyadic_zeta",
            ProfileKind::HEps => "h_eps",
        }
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProfileKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ProfileKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown profile kind '{s}'")))
    }
}

#[derive(Debug, Clone)]
pub struct ProfileTable {
    pub kind: ProfileKind,
    pub params: ProfileParams,
    pub x2: f64,
    /// `(x1, value, d1, d2)`.
    pub rows: Vec<[f64; 4]>,
}

impl ProfileTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let p = &self.params;
        let meta = [
            ("kind", self.kind.to_string()),
            ("alpha", report::num(p.alpha)),
            ("beta", report::num(p.beta)),
            ("delta", report::num(p.delta)),
            ("epsilon", report::num(p.epsilon)),
            ("lambda", report::num(p.lambda)),
            ("width", report::num(p.width.factor())),
            ("late_cutoff", p.late_cutoff.to_string()),
            ("x2", report::num(self.x2)),
        ];
        report::write_csv(out, &meta, &["x1", "value", "d1", "d2"], self.rows.iter().map(|r| r.to_vec()))
    }
}
