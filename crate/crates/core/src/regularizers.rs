//! Contact, friction and adhesion nonlinearities with their regularizations,
//! and the nonlocal smoother that mollifies the normal contact pressure.

use crate::error::{Error, Result};
use crate::physics::MaterialModel;

pub type Vec2 = [f64; 2];

/// Outward unit normal on the contact edge (the bottom of the body).
pub const NORMAL: Vec2 = [0.0, -1.0];

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn normal_component(u: Vec2) -> f64 {
    dot(u, NORMAL)
}

#[inline]
pub fn tangential_part(u: Vec2) -> Vec2 {
    let un = normal_component(u);
    [u[0] - un * NORMAL[0], u[1] - un * NORMAL[1]]
}

/// Moreau–Yosida regularization of the indicator of `{u_N ≤ 0}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactPotential {
    pub eps: f64,
}

impl ContactPotential {
    pub fn value(&self, u: Vec2) -> f64 {
        let p = normal_component(u).max(0.0);
        0.5 * p * p / self.eps
    }

    pub fn gradient(&self, u: Vec2) -> Vec2 {
        let p = normal_component(u).max(0.0) / self.eps;
        // Built from the normal directly so the tangential entry is an exact zero.
        [p * NORMAL[0], p * NORMAL[1]]
    }

    /// Magnitude of the normal pressure `max(u_N, 0)/ε`.
    pub fn pressure(&self, u: Vec2) -> f64 {
        normal_component(u).max(0.0) / self.eps
    }
}

pub fn contact_force(u: Vec2, eps: f64) -> Vec2 {
    ContactPotential { eps }.gradient(u)
}

/// `Ψδ(v) = sqrt(|v_T|² + δ²) − δ`; at `δ = 0` this is `|v_T|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrictionPotential {
    pub delta: f64,
}

impl FrictionPotential {
    pub fn value(&self, v: Vec2) -> f64 {
        let t = norm(tangential_part(v));
        t.hypot(self.delta) - self.delta
    }

    pub fn gradient(&self, v: Vec2) -> Vec2 {
        let vt = tangential_part(v);
        let s = norm(vt).hypot(self.delta);
        if s == 0.0 {
            [0.0, 0.0]
        } else {
            [vt[0] / s, vt[1] / s]
        }
    }

    /// Second derivative along the tangent `(1, 0)`, `δ²/(|v_T|² + δ²)^{3/2}`.
    pub fn tangential_curvature(&self, v: Vec2) -> f64 {
        let t = norm(tangential_part(v));
        let s2 = t * t + self.delta * self.delta;
        if s2 == 0.0 {
            0.0
        } else {
            self.delta * self.delta / (s2 * s2.sqrt())
        }
    }
}

/// `DΦε(u) · ∇Ψδ(v)`; zero by construction since one factor is normal and
/// the other tangential.
pub fn orthogonality_check(u: Vec2, v: Vec2, eps: f64, delta: f64) -> f64 {
    dot(contact_force(u, eps), FrictionPotential { delta }.gradient(v))
}

/// Yosida regularizations of `∂I_[0,1]` (acting on χ) and `∂I_(−∞,0]`
/// (acting on the rate of χ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdhesionConstraints {
    pub eps: f64,
}

impl AdhesionConstraints {
    pub fn beta(&self, chi: f64) -> f64 {
        (chi.min(0.0) + (chi - 1.0).max(0.0)) / self.eps
    }

    pub fn beta_deriv(&self, chi: f64) -> f64 {
        if (0.0..=1.0).contains(&chi) {
            0.0
        } else {
            1.0 / self.eps
        }
    }

    /// Primitive of `beta`, vanishing on `[0, 1]`.
    pub fn beta_hat(&self, chi: f64) -> f64 {
        let lo = chi.min(0.0);
        let hi = (chi - 1.0).max(0.0);
        0.5 * (lo * lo + hi * hi) / self.eps
    }

    pub fn rho(&self, v: f64) -> f64 {
        v.max(0.0) / self.eps
    }

    pub fn rho_deriv(&self, v: f64) -> f64 {
        if v > 0.0 {
            1.0 / self.eps
        } else {
            0.0
        }
    }

    pub fn rho_hat(&self, v: f64) -> f64 {
        let p = v.max(0.0);
        0.5 * p * p / self.eps
    }
}

/// Parameters of the nonlocal smoother. `nu` is carried for reference only;
/// it plays no role in the discrete operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonlocalSmoother {
    pub kernel_width: f64,
    pub nu: f64,
}

/// The smoother assembled on a particular set of surface nodes.
///
/// A dual vector `η` is first mapped to its Riesz representative with the
/// lumped surface mass, then averaged with the Gaussian kernel scaled
/// symmetrically (`K_ij = d_i G_ij d_j m_j`) so that every row of `K` sums to
/// one and `Σ_i m_i K_ij = m_j`. Constants are therefore reproduced and
/// total mass is conserved.
#[derive(Clone, Debug)]
pub struct SmootherOperator {
    n: usize,
    masses: Vec<f64>,
    kernel: Vec<f64>,
    bound: f64,
}

impl SmootherOperator {
    pub fn new(sm: &NonlocalSmoother, coords: &[f64], masses: &[f64]) -> Result<Self> {
        let n = coords.len();
        if masses.len() != n || n == 0 {
            return Err(Error::Assembly("smoother needs one mass per surface node".into()));
        }
        if masses.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::Assembly("singular surface mass matrix".into()));
        }
        if !(sm.kernel_width > 0.0) {
            return Err(Error::Parameter(format!(
                "kernel width must be positive, got {}",
                sm.kernel_width
            )));
        }
        let s2 = 2.0 * sm.kernel_width * sm.kernel_width;
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let dx = coords[i] - coords[j];
                g[i * n + j] = (-dx * dx / s2).exp();
            }
        }
        let mut d: Vec<f64> = masses.iter().map(|m| 1.0 / m.sqrt()).collect();
        let mut converged = false;
        for _ in 0..20_000 {
            let mut change: f64 = 0.0;
            let gd: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| g[i * n + j] * masses[j] * d[j]).sum::<f64>())
                .collect();
            for i in 0..n {
                let next = (d[i] / gd[i]).sqrt();
                change = change.max((next - d[i]).abs() / next);
                d[i] = next;
            }
            if change < 1e-15 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Assembly("kernel normalization did not converge".into()));
        }
        let mut kernel = vec![0.0; n * n];
        let mut bound: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let sym = d[i] * g[i * n + j] * d[j];
                bound = bound.max(sym);
                kernel[i * n + j] = sym * masses[j];
            }
        }
        Ok(SmootherOperator { n, masses: masses.to_vec(), kernel, bound })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `max_ij d_i G_ij d_j`: the output is bounded by this constant times
    /// the total variation `Σ|η_j|` of the input.
    pub fn kernel_bound(&self) -> f64 {
        self.bound
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.kernel[i * self.n..(i + 1) * self.n].iter().sum()
    }

    /// Smooths a scalar dual vector.
    pub fn apply(&self, eta: &[f64]) -> Vec<f64> {
        let rep: Vec<f64> = eta.iter().zip(&self.masses).map(|(e, m)| e / m).collect();
        (0..self.n)
            .map(|i| {
                self.kernel[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(&rep)
                    .map(|(k, r)| k * r)
                    .sum()
            })
            .collect()
    }

    /// Smooths a vector-valued dual field componentwise.
    pub fn apply_vec(&self, eta: &[Vec2]) -> Vec<Vec2> {
        let x: Vec<f64> = eta.iter().map(|e| e[0]).collect();
        let y: Vec<f64> = eta.iter().map(|e| e[1]).collect();
        let sx = self.apply(&x);
        let sy = self.apply(&y);
        sx.into_iter().zip(sy).map(|(a, b)| [a, b]).collect()
    }
}

/// One-shot form of [`SmootherOperator::apply`].
pub fn apply_smoother(sm: &NonlocalSmoother, eta: &[f64], coords: &[f64], masses: &[f64]) -> Result<Vec<f64>> {
    Ok(SmootherOperator::new(sm, coords, masses)?.apply(eta))
}

/// Frictional traction `𝔠(gap)·|𝓡(η)|·∇Ψδ(v)`.
pub fn friction_traction(theta_gap: f64, r_eta: f64, vdot: Vec2, model: &MaterialModel, delta: f64) -> Vec2 {
    let c = model.friction.value(theta_gap) * r_eta;
    let z = FrictionPotential { delta }.gradient(vdot);
    [c * z[0], c * z[1]]
}
