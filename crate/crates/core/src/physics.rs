//! Material laws, hypothesis validation, loads and the discrete state.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{FieldExpr, TimeProfile};
use crate::monotone::MonotoneFunction;
use crate::regularizers::Vec2;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A scalar coefficient law with its first two derivatives.
#[derive(Clone)]
pub struct ScalarLaw {
    name: String,
    f: RealFn,
    df: RealFn,
    d2f: RealFn,
}

impl fmt::Debug for ScalarLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarLaw({})", self.name)
    }
}

impl ScalarLaw {
    pub fn new<F, D, D2>(name: impl Into<String>, f: F, df: D, d2f: D2) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ScalarLaw { name: name.into(), f: Arc::new(f), df: Arc::new(df), d2f: Arc::new(d2f) }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("{c}"), move |_| c, |_| 0.0, |_| 0.0)
    }

    pub fn linear(slope: f64) -> Self {
        Self::new(format!("{slope}·x"), move |x| slope * x, move |_| slope, |_| 0.0)
    }

    /// `(a/2)·x²`, the primitive of `a·x`.
    pub fn half_square(a: f64) -> Self {
        Self::new(format!("{a}·x²/2"), move |x| 0.5 * a * x * x, move |x| a * x, move |_| a)
    }

    /// `c₀ + a·ln cosh x`.
    pub fn log_cosh(c0: f64, a: f64) -> Self {
        Self::new(
            format!("{c0} + {a}·ln cosh x"),
            move |x| {
                let ax = x.abs();
                c0 + a * (ax + (-2.0 * ax).exp().ln_1p() - std::f64::consts::LN_2)
            },
            move |x| a * x.tanh(),
            move |x| a / x.cosh().powi(2),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        (self.df)(x)
    }

    pub fn deriv2(&self, x: f64) -> f64 {
        (self.d2f)(x)
    }
}

/// Isotropic plane-strain tensor given by its Lamé pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lame {
    pub lambda: f64,
    pub mu: f64,
}

impl Lame {
    /// Positive definiteness on symmetric 2×2 tensors.
    pub fn is_positive_definite(&self) -> bool {
        self.mu > 0.0 && self.lambda + self.mu > 0.0
    }

    /// Voigt matrix acting on `(e_xx, e_yy, 2e_xy)`.
    pub fn voigt(&self) -> [[f64; 3]; 3] {
        let (l, m) = (self.lambda, self.mu);
        [[l + 2.0 * m, l, 0.0], [l, l + 2.0 * m, 0.0], [0.0, 0.0, m]]
    }
}

/// Bounds assumed of the coefficient laws.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HypothesisConstants {
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c5_prime: f64,
    pub c7: f64,
    pub c8: f64,
}

#[derive(Clone, Debug)]
pub struct MaterialModel {
    pub bulk_entropy: MonotoneFunction,
    pub surface_entropy: MonotoneFunction,
    /// Heat-conduction law `g` (diffusion of `g(θ)`).
    pub g: ScalarLaw,
    /// Heat-exchange coefficient `k(χ)`.
    pub k: ScalarLaw,
    /// Friction coefficient `𝔠` as a function of the temperature gap.
    pub friction: ScalarLaw,
    /// Latent coupling `λ(χ)`.
    pub lambda: ScalarLaw,
    /// Smooth part `γ` of the adhesion potential; its derivative is `γ′`.
    pub gamma: ScalarLaw,
    pub theta_eq: f64,
    pub elastic: Lame,
    pub viscous: Lame,
    pub constants: HypothesisConstants,
}

/// Tunable scalars of the default family of coefficient laws.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialParams {
    pub g_slope: f64,
    pub k0: f64,
    pub friction_c5: f64,
    pub friction_a: f64,
    pub lambda1: f64,
    pub gamma1: f64,
    pub theta_eq: f64,
    pub elastic: Lame,
    pub viscous: Lame,
}

impl Default for MaterialParams {
    fn default() -> Self {
        MaterialParams {
            g_slope: 1.0,
            k0: 0.5,
            friction_c5: 1.0,
            friction_a: 0.2,
            lambda1: 0.3,
            gamma1: 0.1,
            theta_eq: 0.0,
            elastic: Lame { lambda: 1.0, mu: 1.0 },
            viscous: Lame { lambda: 0.5, mu: 0.5 },
        }
    }
}

impl MaterialModel {
    pub fn from_params(bulk: MonotoneFunction, surface: MonotoneFunction, p: &MaterialParams) -> Self {
        MaterialModel {
            bulk_entropy: bulk,
            surface_entropy: surface,
            g: ScalarLaw::linear(p.g_slope),
            k: ScalarLaw::constant(p.k0),
            friction: ScalarLaw::log_cosh(p.friction_c5, p.friction_a),
            lambda: ScalarLaw::linear(p.lambda1),
            gamma: ScalarLaw::half_square(p.gamma1),
            theta_eq: p.theta_eq,
            elastic: p.elastic,
            viscous: p.viscous,
            constants: HypothesisConstants {
                c3: p.g_slope,
                c4: p.g_slope,
                c5: p.friction_c5,
                c5_prime: p.friction_a.abs(),
                c7: p.lambda1.abs(),
                c8: 0.0,
            },
        }
    }

    pub fn with_entropies(bulk: MonotoneFunction, surface: MonotoneFunction) -> Self {
        Self::from_params(bulk, surface, &MaterialParams::default())
    }
}

impl Default for MaterialModel {
    fn default() -> Self {
        Self::with_entropies(MonotoneFunction::logarithm(), MonotoneFunction::logarithm())
    }
}

/// One sampled check of [`validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub hypothesis: &'static str,
    pub description: String,
    pub passed: bool,
    /// First violating sample `(x, offending value)`.
    pub violation: Option<(f64, f64)>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed { "pass" } else { "FAIL" };
            write!(f, "[{status}] {}: {}", c.hypothesis, c.description)?;
            if let Some((x, v)) = c.violation {
                write!(f, " (x = {x}, value = {v})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

pub const H_ENTROPY: &str = "entropy monotonicity";
pub const H_CONDUCTION: &str = "heat-conduction bounds";
pub const H_EXCHANGE: &str = "heat-exchange coefficient";
pub const H_FRICTION: &str = "friction-coefficient bounds";
pub const H_LATENT: &str = "latent-coupling bounds";
pub const H_ADHESION: &str = "adhesion potential";
pub const H_TENSORS: &str = "elastic and viscous tensors";

/// Uniform grid on `[a, b]` with `n` points.
pub fn sample_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn check_all(
    checks: &mut Vec<Check>,
    hypothesis: &'static str,
    description: impl Into<String>,
    grid: &[f64],
    value: impl Fn(f64) -> f64,
    ok: impl Fn(f64, f64) -> bool,
) {
    let violation = grid.iter().find_map(|&x| {
        let v = value(x);
        if ok(x, v) {
            None
        } else {
            Some((x, v))
        }
    });
    checks.push(Check { hypothesis, description: description.into(), passed: violation.is_none(), violation });
}

/// Lipschitz probe: difference quotients on the grid must be finite and must
/// not grow when the grid is refined by inserting midpoints.
fn lipschitz_check(checks: &mut Vec<Check>, hypothesis: &'static str, name: &str, grid: &[f64], f: impl Fn(f64) -> f64) {
    let quotient = |pts: &[f64]| -> (f64, f64) {
        let mut worst = (0.0, f64::NAN);
        for w in pts.windows(2) {
            let q = ((f(w[1]) - f(w[0])) / (w[1] - w[0])).abs();
            if !(q <= worst.0) {
                worst = (q, w[0]);
            }
        }
        worst
    };
    let coarse = quotient(grid);
    let mut fine = Vec::with_capacity(2 * grid.len());
    for w in grid.windows(2) {
        fine.push(w[0]);
        fine.push(0.5 * (w[0] + w[1]));
    }
    if let Some(&last) = grid.last() {
        fine.push(last);
    }
    let refined = quotient(&fine);
    let passed = coarse.0.is_finite() && refined.0.is_finite() && refined.0 <= 1.01 * coarse.0 + 1e-9;
    checks.push(Check {
        hypothesis,
        description: format!("{name} is Lipschitz (max difference quotient {})", refined.0),
        passed,
        violation: if passed { None } else { Some((refined.1, refined.0)) },
    });
}

/// Checks every sampled hypothesis on `grid`. The report lists all checks;
/// the error names the first violated hypothesis.
pub fn validate(model: &MaterialModel, grid: &[f64]) -> Result<ValidationReport> {
    let mut checks = Vec::new();
    let c = model.constants;

    for (label, mf) in [("L", model.bulk_entropy), ("l", model.surface_entropy)] {
        let inside: Vec<f64> = grid.iter().copied().filter(|&x| mf.in_domain(x)).collect();
        check_all(&mut checks, H_ENTROPY, format!("{label}′ > 0"), &inside, |x| mf.deriv(x), |_, v| v > 0.0);
        lipschitz_check(&mut checks, H_ENTROPY, &format!("1/{label}′"), &inside, |x| mf.inv_deriv(x));
        check_all(&mut checks, H_ENTROPY, format!("J({label}) vanishes at 0"), &[0.0], |x| mf.primitive(x), |_, v| v == 0.0);
        check_all(
            &mut checks,
            H_ENTROPY,
            format!("Fenchel equality for {label}"),
            &inside,
            |x| mf.primitive(x) + mf.conjugate(mf.eval(x)) - x * mf.eval(x),
            |x, v| v.abs() <= 1e-10 * (1.0 + (x * mf.eval(x)).abs()),
        );
    }

    check_all(
        &mut checks,
        H_CONDUCTION,
        format!("{} ≤ g′ ≤ {}", c.c3, c.c4),
        grid,
        |x| model.g.deriv(x),
        |_, v| c.c3 > 0.0 && v >= c.c3 && v <= c.c4,
    );

    check_all(&mut checks, H_EXCHANGE, "k ≥ 0", grid, |x| model.k.value(x), |_, v| v >= 0.0);
    lipschitz_check(&mut checks, H_EXCHANGE, "k", grid, |x| model.k.value(x));

    check_all(
        &mut checks,
        H_FRICTION,
        format!("𝔠 ≥ {}", c.c5),
        grid,
        |x| model.friction.value(x),
        |_, v| c.c5 > 0.0 && v >= c.c5,
    );
    check_all(
        &mut checks,
        H_FRICTION,
        format!("|𝔠′| ≤ {}", c.c5_prime),
        grid,
        |x| model.friction.deriv(x),
        |_, v| v.abs() <= c.c5_prime,
    );
    check_all(&mut checks, H_FRICTION, "𝔠′(x)·x ≥ 0", grid, |x| model.friction.deriv(x) * x, |_, v| v >= 0.0);

    check_all(
        &mut checks,
        H_LATENT,
        format!("|λ′| ≤ {}", c.c7),
        grid,
        |x| model.lambda.deriv(x),
        |_, v| v.abs() <= c.c7,
    );
    check_all(
        &mut checks,
        H_LATENT,
        format!("|λ″| ≤ {}", c.c8),
        grid,
        |x| model.lambda.deriv2(x),
        |_, v| v.abs() <= c.c8,
    );

    lipschitz_check(&mut checks, H_ADHESION, "γ′", grid, |x| model.gamma.deriv(x));

    checks.push(Check {
        hypothesis: H_TENSORS,
        description: "elastic and viscous tensors positive definite".into(),
        passed: model.elastic.is_positive_definite() && model.viscous.is_positive_definite(),
        violation: None,
    });

    let report = ValidationReport { checks };
    match report.first_failure() {
        None => Ok(report),
        Some(f) => Err(Error::Validation {
            hypothesis: f.hypothesis.to_string(),
            detail: match f.violation {
                Some((x, v)) => format!("{} fails at x = {x} (value {v})", f.description),
                None => format!("{} fails", f.description),
            },
        }),
    }
}

/// A load written as spatial profile × time profile.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTime {
    pub space: FieldExpr,
    pub time: TimeProfile,
}

impl SpaceTime {
    pub fn zero() -> Self {
        SpaceTime { space: FieldExpr::zero(), time: TimeProfile::Constant }
    }

    pub fn is_zero(&self) -> bool {
        self.space.is_identically_zero()
    }
}

/// Bulk heat source `h`, body force `f` and traction `g` on the lateral
/// (Neumann) edges.
#[derive(Clone, Debug, PartialEq)]
pub struct Loads {
    pub heat: SpaceTime,
    pub body_force: [SpaceTime; 2],
    pub traction: [SpaceTime; 2],
}

impl Loads {
    pub fn zero() -> Self {
        Loads {
            heat: SpaceTime::zero(),
            body_force: [SpaceTime::zero(), SpaceTime::zero()],
            traction: [SpaceTime::zero(), SpaceTime::zero()],
        }
    }
}

/// Auxiliary selections stored alongside the primary fields.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Aux {
    /// Contact force `DΦε(u)` as a dual vector on the surface nodes.
    pub eta: Vec<Vec2>,
    /// `|𝓡(η)|` at the surface nodes.
    pub r_eta: Vec<f64>,
    /// `μ = |𝓡(η)|·z`.
    pub mu: Vec<Vec2>,
    /// Friction direction `∇Ψδ(Δu/τ)`.
    pub z: Vec<Vec2>,
    /// `ξ = βε(χ)`.
    pub xi: Vec<f64>,
    /// `ζ = ρε(Δχ/τ)`.
    pub zeta: Vec<f64>,
}

/// Discrete fields at one time level. Bulk arrays are indexed by bulk node,
/// surface arrays by surface node.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct State {
    pub time: f64,
    pub theta: Vec<f64>,
    pub theta_s: Vec<f64>,
    pub chi: Vec<f64>,
    pub u: Vec<Vec2>,
    pub aux: Aux,
}
