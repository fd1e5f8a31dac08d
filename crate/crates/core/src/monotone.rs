//! Scalar maximal monotone maps, their resolvents and Yosida regularizations,
//! and the regularized entropy functions built on top of them.
//!
//! The two supported maps are `ln` on `(0, ∞)` and the identity on `ℝ`.
//! Resolvents are computed in the dual variable `w = L(r)`: writing
//! `γ = L⁻¹`, the resolvent equation `r + εL(r) = x` becomes
//! `γ(w) + εw = x`, which is strictly increasing on all of `ℝ` and never
//! needs `ln` of a number that may have underflowed to zero.

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;

/// Relative tolerance used for every integral defined in this module.
pub const QUAD_TOL: f64 = 1e-9;

const ROOT_MAX_ITER: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EntropyKind {
    Logarithm,
    Identity,
}

impl EntropyKind {
    pub fn tag(self) -> &'static str {
        match self {
            EntropyKind::Logarithm => "ln",
            EntropyKind::Identity => "id",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        match s {
            "ln" | "log" | "logarithm" => Some(EntropyKind::Logarithm),
            "id" | "identity" => Some(EntropyKind::Identity),
            _ => None,
        }
    }
}

/// A scalar maximal monotone map `L` with its primitive `J` (normalized by
/// `J(0) = 0`) and conjugate `J*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MonotoneFunction {
    kind: EntropyKind,
}

impl MonotoneFunction {
    pub const fn new(kind: EntropyKind) -> Self {
        MonotoneFunction { kind }
    }

    pub const fn logarithm() -> Self {
        Self::new(EntropyKind::Logarithm)
    }

    pub const fn identity() -> Self {
        Self::new(EntropyKind::Identity)
    }

    pub fn kind(&self) -> EntropyKind {
        self.kind
    }

    /// Open interval `D(L)`.
    pub fn domain(&self) -> (f64, f64) {
        match self.kind {
            EntropyKind::Logarithm => (0.0, f64::INFINITY),
            EntropyKind::Identity => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn in_domain(&self, x: f64) -> bool {
        let (lo, hi) = self.domain();
        x.is_finite() && x > lo && x < hi
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            EntropyKind::Logarithm => x.ln(),
            EntropyKind::Identity => x,
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match self.kind {
            EntropyKind::Logarithm => 1.0 / x,
            EntropyKind::Identity => 1.0,
        }
    }

    /// `1/L′`, extended continuously to the closure of the domain.
    pub fn inv_deriv(&self, x: f64) -> f64 {
        match self.kind {
            EntropyKind::Logarithm => x,
            EntropyKind::Identity => 1.0,
        }
    }

    /// `J` with `J(0) = 0`; for `ln` the value at the boundary point 0 is the limit.
    pub fn primitive(&self, x: f64) -> f64 {
        match self.kind {
            EntropyKind::Logarithm => {
                if x == 0.0 {
                    0.0
                } else {
                    x * x.ln() - x
                }
            }
            EntropyKind::Identity => 0.5 * x * x,
        }
    }

    /// Fenchel conjugate `J*`.
    pub fn conjugate(&self, w: f64) -> f64 {
        match self.kind {
            EntropyKind::Logarithm => w.exp(),
            EntropyKind::Identity => 0.5 * w * w,
        }
    }

    /// `γ = L⁻¹ = (J*)′`.
    pub fn inverse(&self, w: f64) -> f64 {
        match self.kind {
            EntropyKind::Logarithm => w.exp(),
            EntropyKind::Identity => w,
        }
    }

    pub fn inverse_deriv(&self, w: f64) -> f64 {
        match self.kind {
            EntropyKind::Logarithm => w.exp(),
            EntropyKind::Identity => 1.0,
        }
    }

    /// `f(x) = ∫₀ˣ 1/L′(s) ds`, the unregularized surface flux potential.
    pub fn flux_limit(&self, x: f64) -> f64 {
        match self.kind {
            EntropyKind::Logarithm => 0.5 * x * x,
            EntropyKind::Identity => x,
        }
    }
}

/// Safeguarded Newton for a strictly increasing C¹ function `h`, returning
/// `(value, derivative)`. The bracket is grown geometrically from `guess`.
fn increasing_root<H: Fn(f64) -> (f64, f64)>(h: H, guess: f64, x: f64, eps: f64) -> Result<f64> {
    let (h0, _) = h(guess);
    if h0 == 0.0 {
        return Ok(guess);
    }
    let mut step = guess.abs().max(1.0);
    let (mut lo, mut hi);
    if h0 < 0.0 {
        lo = guess;
        hi = guess + step;
        let mut n = 0;
        while h(hi).0 < 0.0 {
            lo = hi;
            step *= 2.0;
            hi = guess + step;
            n += 1;
            if n > ROOT_MAX_ITER {
                return Err(Error::Resolvent { x, eps, lo, hi });
            }
        }
    } else {
        hi = guess;
        lo = guess - step;
        let mut n = 0;
        while h(lo).0 > 0.0 {
            hi = lo;
            step *= 2.0;
            lo = guess - step;
            n += 1;
            if n > ROOT_MAX_ITER {
                return Err(Error::Resolvent { x, eps, lo, hi });
            }
        }
    }

    let mut w = if h0 < 0.0 { lo } else { hi };
    for _ in 0..ROOT_MAX_ITER {
        let (hv, dv) = h(w);
        if hv == 0.0 {
            return Ok(w);
        }
        if hv < 0.0 {
            lo = w;
        } else {
            hi = w;
        }
        let mut next = w - hv / dv;
        if !(next.is_finite() && next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - w).abs() <= 1e-15 * w.abs().max(1.0) || hi - lo <= 1e-15 * lo.abs().max(1.0) {
            return Ok(next);
        }
        w = next;
    }
    Err(Error::Resolvent { x, eps, lo, hi })
}

/// Resolvent and Yosida value at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YosidaPoint {
    /// `Rε(x)`.
    pub resolvent: f64,
    /// `Lε(x) = L(Rε(x))`.
    pub yosida: f64,
}

/// The family `Rε, Lε, Jε, J*ε` of a monotone map at a fixed `ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YosidaFamily {
    base: MonotoneFunction,
    eps: f64,
}

impl YosidaFamily {
    pub fn new(base: MonotoneFunction, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Parameter(format!("eps must be positive and finite, got {eps}")));
        }
        Ok(YosidaFamily { base, eps })
    }

    pub fn base(&self) -> MonotoneFunction {
        self.base
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn point(&self, x: f64) -> Result<YosidaPoint> {
        let eps = self.eps;
        match self.base.kind {
            EntropyKind::Identity => {
                let r = x / (1.0 + eps);
                Ok(YosidaPoint { resolvent: r, yosida: r })
            }
            EntropyKind::Logarithm => {
                if !x.is_finite() {
                    return Err(Error::Resolvent { x, eps, lo: f64::NAN, hi: f64::NAN });
                }
                let guess = if x > 0.0 { x.ln().min(x / eps) } else { x / eps };
                let w = increasing_root(
                    |w| {
                        let e = w.exp();
                        (e + eps * w - x, e + eps)
                    },
                    guess,
                    x,
                    eps,
                )?;
                Ok(YosidaPoint { resolvent: w.exp(), yosida: w })
            }
        }
    }

    pub fn resolvent(&self, x: f64) -> Result<f64> {
        Ok(self.point(x)?.resolvent)
    }

    pub fn yosida(&self, x: f64) -> Result<f64> {
        Ok(self.point(x)?.yosida)
    }

    /// `Lε′(x) = L′(R)/(1 + εL′(R))`, written as `1/(ε + 1/L′(R))` so that it
    /// stays finite when `R` sits on the boundary of the domain.
    pub fn yosida_deriv(&self, x: f64) -> Result<f64> {
        let p = self.point(x)?;
        Ok(self.deriv_at(p))
    }

    fn deriv_at(&self, p: YosidaPoint) -> f64 {
        1.0 / (self.eps + self.base.inv_deriv(p.resolvent))
    }

    /// Moreau envelope `Jε(x) = (ε/2)Lε(x)² + J(Rε(x))`.
    pub fn primitive(&self, x: f64) -> Result<f64> {
        let p = self.point(x)?;
        Ok(self.primitive_at(p))
    }

    fn primitive_at(&self, p: YosidaPoint) -> f64 {
        // J(R) via the Fenchel equality J(R) = R·L(R) − J*(L(R)).
        let j_r = p.resolvent * p.yosida - self.base.conjugate(p.yosida);
        0.5 * self.eps * p.yosida * p.yosida + j_r
    }

    /// `J*ε(w) = J*(w) + (ε/2)w²`.
    pub fn conjugate(&self, w: f64) -> f64 {
        self.base.conjugate(w) + 0.5 * self.eps * w * w
    }
}

pub fn resolvent(mf: MonotoneFunction, x: f64, eps: f64) -> Result<f64> {
    YosidaFamily::new(mf, eps)?.resolvent(x)
}

pub fn yosida(mf: MonotoneFunction, x: f64, eps: f64) -> Result<f64> {
    YosidaFamily::new(mf, eps)?.yosida(x)
}

/// Bulk entropies (`L`) carry the stored-entropy density only; surface
/// entropies (`ℓ`) additionally carry the flux potential `fε` and `Hε`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Bulk,
    Surface,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    Tilde,
    TildeDeriv,
    Flux,
    BigI,
    BigH,
}

/// `L̃ε(x) = εx + Lε(x)` and the functions derived from it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularizedEntropy {
    family: YosidaFamily,
    variant: Variant,
    j_eps_zero: f64,
    flux_offset: f64,
}

/// `y − ln(1+y)` without cancellation for small `y`.
fn log1p_gap(y: f64) -> f64 {
    if y.abs() < 1e-2 {
        let mut term = y * y;
        let mut sum = 0.0;
        for k in 2..14 {
            sum += term / k as f64 * if k % 2 == 0 { 1.0 } else { -1.0 };
            term *= y;
        }
        sum
    } else {
        y - y.ln_1p()
    }
}

impl RegularizedEntropy {
    pub fn new(base: MonotoneFunction, eps: f64, variant: Variant) -> Result<Self> {
        let family = YosidaFamily::new(base, eps)?;
        let p0 = family.point(0.0)?;
        let mut re = RegularizedEntropy {
            family,
            variant,
            j_eps_zero: family.primitive_at(p0),
            flux_offset: 0.0,
        };
        re.flux_offset = re.flux_antiderivative(p0);
        Ok(re)
    }

    pub fn bulk(base: MonotoneFunction, eps: f64) -> Result<Self> {
        Self::new(base, eps, Variant::Bulk)
    }

    pub fn surface(base: MonotoneFunction, eps: f64) -> Result<Self> {
        Self::new(base, eps, Variant::Surface)
    }

    pub fn family(&self) -> &YosidaFamily {
        &self.family
    }

    pub fn eps(&self) -> f64 {
        self.family.eps
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn tilde(&self, x: f64) -> Result<f64> {
        Ok(self.eps() * x + self.family.yosida(x)?)
    }

    pub fn tilde_deriv(&self, x: f64) -> Result<f64> {
        Ok(self.eps() + self.family.yosida_deriv(x)?)
    }

    /// `(L̃ε(x), L̃ε′(x))` from a single resolvent solve.
    pub fn tilde_with_deriv(&self, x: f64) -> Result<(f64, f64)> {
        let p = self.family.point(x)?;
        let eps = self.eps();
        Ok((eps * x + p.yosida, eps + self.family.deriv_at(p)))
    }

    /// `𝓘ε(x) = (ε/2)x² + J*ε(Lε(x)) + Jε(0)`, the closed form of
    /// `∫₀ˣ s·L̃ε′(s) ds`.
    pub fn big_i_closed(&self, x: f64) -> Result<f64> {
        let w = self.family.yosida(x)?;
        Ok(0.5 * self.eps() * x * x + self.family.conjugate(w) + self.j_eps_zero)
    }

    fn flux_antiderivative(&self, p: YosidaPoint) -> f64 {
        let eps = self.eps();
        match self.family.base.kind {
            EntropyKind::Identity => 0.0,
            EntropyKind::Logarithm => {
                // Substituting s = e^w + εw and u = e^w + ε turns ∫ ds/ℓ̃ε′(s)
                // into a rational integral in u whose logarithmic part is w.
                let u = p.resolvent + eps;
                let e2 = eps * eps;
                log1p_gap(eps * u) / e2 + (eps * u).ln_1p() / (1.0 + e2) + e2 * p.yosida / (1.0 + e2)
            }
        }
    }

    /// `fε(x) = ∫₀ˣ 1/ℓ̃ε′(s) ds` in closed form.
    pub fn flux_closed(&self, x: f64) -> Result<f64> {
        let eps = self.eps();
        match self.family.base.kind {
            EntropyKind::Identity => Ok(x / (eps + 1.0 / (1.0 + eps))),
            EntropyKind::Logarithm => {
                let p = self.family.point(x)?;
                Ok(self.flux_antiderivative(p) - self.flux_offset)
            }
        }
    }

    /// `(fε(x), fε′(x))` from a single resolvent solve.
    pub fn flux_with_deriv(&self, x: f64) -> Result<(f64, f64)> {
        let eps = self.eps();
        let p = self.family.point(x)?;
        let d = 1.0 / (eps + self.family.deriv_at(p));
        let f = match self.family.base.kind {
            EntropyKind::Identity => x * d,
            EntropyKind::Logarithm => self.flux_antiderivative(p) - self.flux_offset,
        };
        Ok((f, d))
    }

    /// Evaluates one of the defining quantities. Integrals are computed by
    /// adaptive quadrature directly from their definitions.
    pub fn eval(&self, which: Quantity, x: f64) -> Result<f64> {
        if matches!(which, Quantity::Flux | Quantity::BigH) && self.variant != Variant::Surface {
            return Err(Error::Parameter(
                "flux and H are defined only for the surface entropy".into(),
            ));
        }
        let td = |s: f64| self.tilde_deriv(s).unwrap_or(f64::NAN);
        match which {
            Quantity::Tilde => self.tilde(x),
            Quantity::TildeDeriv => self.tilde_deriv(x),
            Quantity::Flux => adaptive_simpson(|s| 1.0 / td(s), 0.0, x, QUAD_TOL),
            Quantity::BigI => adaptive_simpson(|s| s * td(s), 0.0, x, QUAD_TOL),
            Quantity::BigH => adaptive_simpson(
                |s| match self.flux_with_deriv(s) {
                    Ok((f, d)) => f / d,
                    Err(_) => f64::NAN,
                },
                0.0,
                x,
                QUAD_TOL,
            ),
        }
    }
}

pub fn reg_entropy_eval(re: &RegularizedEntropy, which: Quantity, x: f64) -> Result<f64> {
    re.eval(which, x)
}

/// Regularized bulk initial datum `θ₀ε = γε(w₀) + ε·ϱε(w₀)`, `w₀ = L(θ₀)`,
/// where `ϱε` and `γε` are the resolvent and Yosida map of `γ = L⁻¹`. It is
/// built so that `Lε(θ₀ε) = ϱε(w₀)`.
pub fn approx_bulk_init(theta0: &[f64], l: MonotoneFunction, eps: f64) -> Result<Vec<f64>> {
    YosidaFamily::new(l, eps)?;
    theta0
        .iter()
        .enumerate()
        .map(|(node, &t)| {
            if !l.in_domain(t) {
                return Err(Error::Domain { node, value: t });
            }
            let w0 = l.eval(t);
            let rho = match l.kind() {
                EntropyKind::Identity => w0 / (1.0 + eps),
                EntropyKind::Logarithm => increasing_root(
                    |r| {
                        let e = r.exp();
                        (r + eps * e - w0, 1.0 + eps * e)
                    },
                    w0,
                    w0,
                    eps,
                )?,
            };
            // γε(w₀) = γ(ϱε(w₀)).
            Ok(l.inverse(rho) + eps * rho)
        })
        .collect()
}

/// Surface initial datum for `ℓ = ln`: `max(θs⁰, ε^α)` nodewise.
pub fn approx_surf_init_log(theta_s0: &[f64], alpha: f64, eps: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Parameter(format!("eps must be positive and finite, got {eps}")));
    }
    let floor = eps.powf(alpha);
    theta_s0
        .iter()
        .enumerate()
        .map(|(node, &t)| {
            if !(t > 0.0 && t.is_finite()) {
                Err(Error::Domain { node, value: t })
            } else {
                Ok(t.max(floor))
            }
        })
        .collect()
}

/// Surface initial datum for an arbitrary `ℓ`: the lift is needed only for `ln`.
pub fn approx_surf_init(theta_s0: &[f64], ell: MonotoneFunction, alpha: f64, eps: f64) -> Result<Vec<f64>> {
    match ell.kind() {
        EntropyKind::Logarithm => approx_surf_init_log(theta_s0, alpha, eps),
        EntropyKind::Identity => Ok(theta_s0.to_vec()),
    }
}
