//! Backward-Euler time stepping with a three-stage fixed-point coupling.
//!
//! Each step iterates the stage map on guessed ("hat") fields until the
//! relative change falls below `tol_picard`:
//!
//! 1. momentum: convex minimization in `u` with `θ̂, θ̂s, χ̂, û` frozen;
//! 2. adhesion: convex minimization in `χ` with `θ̂s` and the new `u`;
//! 3. bulk and surface temperatures, decoupled through the frozen exchange
//!    and friction-heat term.
//!
//! All nodal nonlinearities use lumped masses.

use crate::error::{Error, Result};
use crate::fem::{assemble, AssembledForms};
use crate::linalg::{add_diagonal, bilinear, diagonal_positions, lin_comb, matvec, SpMat, SpdSolver};
use crate::mesh::Mesh;
use crate::monotone::RegularizedEntropy;
use crate::physics::{Aux, Loads, MaterialModel, State};
use crate::regularizers::{
    norm, normal_component, AdhesionConstraints, ContactPotential, FrictionPotential, NonlocalSmoother,
    SmootherOperator, Vec2,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub tau: f64,
    pub t_end: f64,
    pub eps: f64,
    /// Smoothing width of the friction potential.
    pub delta_psi: f64,
    pub tol_picard: f64,
    pub max_picard: usize,
    pub tol_newton: f64,
    pub max_newton: usize,
    /// Width of the Gaussian kernel of the contact-pressure smoother.
    pub sigma_r: f64,
    /// Exponent of the lower bound `ε^α` on the surface initial datum.
    pub alpha: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tau: 0.005,
            t_end: 0.5,
            eps: 0.1,
            delta_psi: 1e-3,
            tol_picard: 1e-9,
            max_picard: 50,
            tol_newton: 1e-11,
            max_newton: 60,
            sigma_r: 0.1,
            alpha: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tau", self.tau),
            ("eps", self.eps),
            ("delta_psi", self.delta_psi),
            ("tol_picard", self.tol_picard),
            ("tol_newton", self.tol_newton),
            ("sigma_r", self.sigma_r),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Parameter(format!("t_end must be nonnegative, got {}", self.t_end)));
        }
        if self.tol_picard >= 1.0 {
            return Err(Error::Parameter("tol_picard must be below 1".into()));
        }
        if self.max_picard == 0 || self.max_newton == 0 {
            return Err(Error::Parameter("iteration caps must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Parameter(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        self.num_steps().map(|_| ())
    }

    /// Number of steps to reach `t_end`; `t_end` must be a multiple of `tau`.
    pub fn num_steps(&self) -> Result<usize> {
        let n = (self.t_end / self.tau).round();
        if (n * self.tau - self.t_end).abs() > 1e-9 * self.t_end.max(self.tau) {
            return Err(Error::Parameter(format!(
                "t_end = {} is not a multiple of tau = {}",
                self.t_end, self.tau
            )));
        }
        Ok(n as usize)
    }
}

/// Outcome of one accepted step.
#[derive(Clone, Debug)]
pub struct StepReport {
    pub picard_iterations: usize,
    /// Relative change of the hat fields after each fixed-point iterate.
    pub history: Vec<f64>,
}

pub(crate) fn flatten(u: &[Vec2]) -> Vec<f64> {
    u.iter().flat_map(|p| [p[0], p[1]]).collect()
}

pub(crate) fn unflatten(x: &[f64]) -> Vec<Vec2> {
    x.chunks_exact(2).map(|c| [c[0], c[1]]).collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// `max|a − b| / max(max|a|, 1)`.
fn rel_change(a: &[f64], b: &[f64]) -> f64 {
    max_abs_diff(a, b) / crate::linalg::max_abs(a).max(1.0)
}

/// Everything fixed during a run: mesh, forms, laws, loads and the cached
/// factorizations of the stage Jacobians.
pub struct Stepper {
    pub mesh: Mesh,
    pub forms: AssembledForms,
    pub model: MaterialModel,
    pub loads: Loads,
    pub cfg: SolverConfig,
    pub bulk: RegularizedEntropy,
    pub surf: RegularizedEntropy,
    pub smoother: SmootherOperator,
    pub contact: ContactPotential,
    pub friction: FrictionPotential,
    pub adhesion: AdhesionConstraints,
    mom_base: SpMat,
    mom_diag: Vec<usize>,
    mom_solver: SpdSolver,
    heat_diag: Vec<usize>,
    heat_solver: SpdSolver,
    surf_diag: Vec<usize>,
    surf_solver: SpdSolver,
    adh_solver: SpdSolver,
}

impl std::fmt::Debug for Stepper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Stepper(eps = {}, tau = {}, {} nodes)", self.cfg.eps, self.cfg.tau, self.mesh.num_nodes())
    }
}

/// Frozen surface quantities used by the friction terms.
struct FrictionData {
    /// `|𝓡(DΦε(û))|`.
    r_eta: Vec<f64>,
    /// `Ψδ((û − uⁿ)/τ)`.
    psi: Vec<f64>,
}

impl Stepper {
    pub fn new(mesh: Mesh, model: MaterialModel, loads: Loads, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let forms = assemble(&mesh, &model)?;
        let bulk = RegularizedEntropy::bulk(model.bulk_entropy, cfg.eps)?;
        let surf = RegularizedEntropy::surface(model.surface_entropy, cfg.eps)?;
        let smoother = SmootherOperator::new(
            &NonlocalSmoother { kernel_width: cfg.sigma_r, nu: 0.0 },
            &mesh.surface.coords,
            &forms.lumped_surface,
        )?;
        let mom_base = lin_comb(1.0 / cfg.tau, &forms.viscosity_b, 1.0, &forms.elasticity_a);
        let mom_diag = diagonal_positions(&mom_base)?;
        let mom_solver = SpdSolver::new(&mom_base)?;
        let k = &forms.stiffness_bulk;
        let heat_diag = diagonal_positions(k)?;
        let heat_solver = SpdSolver::new(&add_diagonal(k, &heat_diag, &forms.lumped_bulk))?;
        let ks = &forms.surface_stiffness;
        let surf_diag = diagonal_positions(ks)?;
        let seed = add_diagonal(ks, &surf_diag, &forms.lumped_surface);
        let surf_solver = SpdSolver::new(&seed)?;
        let adh_solver = SpdSolver::new(&seed)?;
        Ok(Stepper {
            contact: ContactPotential { eps: cfg.eps },
            friction: FrictionPotential { delta: cfg.delta_psi },
            adhesion: AdhesionConstraints { eps: cfg.eps },
            mesh,
            forms,
            model,
            loads,
            cfg,
            bulk,
            surf,
            smoother,
            mom_base,
            mom_diag,
            mom_solver,
            heat_diag,
            heat_solver,
            surf_diag,
            surf_solver,
            adh_solver,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.mesh.num_nodes()
    }

    pub fn num_surface(&self) -> usize {
        self.mesh.surface.len()
    }

    /// Momentum dual vector `F(t)`: lumped body force plus lumped edge
    /// tractions on the lateral edges, zero on clamped dofs.
    pub fn momentum_load(&self, t: f64) -> Vec<f64> {
        let n = self.num_nodes();
        let mut f = vec![0.0; 2 * n];
        for c in 0..2 {
            let bf = &self.loads.body_force[c];
            if !bf.is_zero() {
                let s = bf.time.eval(t);
                for (i, p) in self.mesh.nodes.iter().enumerate() {
                    f[2 * i + c] += self.forms.lumped_bulk[i] * s * bf.space.eval(p[0], p[1]);
                }
            }
            let tr = &self.loads.traction[c];
            if !tr.is_zero() {
                let s = tr.time.eval(t);
                for &[a, b] in &self.mesh.neumann_edges {
                    let (pa, pb) = (self.mesh.nodes[a], self.mesh.nodes[b]);
                    let h = 0.5 * (pb[0] - pa[0]).hypot(pb[1] - pa[1]);
                    f[2 * a + c] += h * s * tr.space.eval(pa[0], pa[1]);
                    f[2 * b + c] += h * s * tr.space.eval(pb[0], pb[1]);
                }
            }
        }
        for (v, &fixed) in f.iter_mut().zip(&self.forms.dirichlet_dofs) {
            if fixed {
                *v = 0.0;
            }
        }
        f
    }

    /// Heat-source dual vector `M h(t)` with the lumped mass.
    pub fn heat_load(&self, t: f64) -> Vec<f64> {
        let h = &self.loads.heat;
        if h.is_zero() {
            return vec![0.0; self.num_nodes()];
        }
        let s = h.time.eval(t);
        self.mesh
            .nodes
            .iter()
            .zip(&self.forms.lumped_bulk)
            .map(|(p, m)| m * s * h.space.eval(p[0], p[1]))
            .collect()
    }

    /// Contact force as a surface dual vector and the magnitude of its
    /// smoothed representative.
    pub fn contact_dual(&self, u: &[Vec2]) -> (Vec<Vec2>, Vec<f64>) {
        let eta: Vec<Vec2> = self
            .mesh
            .surface
            .nodes
            .iter()
            .zip(&self.forms.lumped_surface)
            .map(|(&i, &m)| {
                let g = self.contact.gradient(u[i]);
                [m * g[0], m * g[1]]
            })
            .collect();
        let r = self.smoother.apply_vec(&eta).into_iter().map(norm).collect();
        (eta, r)
    }

    fn friction_data(&self, u_hat: &[Vec2], u_n: &[Vec2]) -> FrictionData {
        let (_, r_eta) = self.contact_dual(u_hat);
        let tau = self.cfg.tau;
        let psi = self
            .mesh
            .surface
            .nodes
            .iter()
            .map(|&i| self.friction.value([(u_hat[i][0] - u_n[i][0]) / tau, (u_hat[i][1] - u_n[i][1]) / tau]))
            .collect();
        FrictionData { r_eta, psi }
    }

    /// Auxiliary selections of a state whose previous displacement is `u_prev`.
    pub fn aux_fields(&self, u: &[Vec2], u_prev: &[Vec2], chi: &[f64], chi_prev: &[f64]) -> Aux {
        let tau = self.cfg.tau;
        let (eta, r_eta) = self.contact_dual(u);
        let z: Vec<Vec2> = self
            .mesh
            .surface
            .nodes
            .iter()
            .map(|&i| self.friction.gradient([(u[i][0] - u_prev[i][0]) / tau, (u[i][1] - u_prev[i][1]) / tau]))
            .collect();
        let mu = z.iter().zip(&r_eta).map(|(z, r)| [r * z[0], r * z[1]]).collect();
        Aux {
            eta,
            r_eta,
            mu,
            z,
            xi: chi.iter().map(|&c| self.adhesion.beta(c)).collect(),
            zeta: chi.iter().zip(chi_prev).map(|(c, p)| self.adhesion.rho((c - p) / tau)).collect(),
        }
    }

    /// Stage 1: displacement from the frozen hats. Returns the new `u`.
    pub fn solve_momentum(&mut self, hat: &State, n: &State, t1: f64) -> Result<Vec<Vec2>> {
        let tau = self.cfg.tau;
        let nn = self.num_nodes();
        let un = flatten(&n.u);
        let f = self.momentum_load(t1);
        let dt_theta = crate::linalg::matvec_t(&self.forms.div_coupling, &hat.theta);
        let (_, r_hat) = self.contact_dual(&hat.u);
        let surf = &self.mesh.surface;
        let ms = &self.forms.lumped_surface;
        // Friction coefficient 𝔠(θ̂ − θ̂s)|𝓡(η̂)| per surface node.
        let coef: Vec<f64> = (0..surf.len())
            .map(|k| self.model.friction.value(hat.theta[surf.nodes[k]] - hat.theta_s[k]) * r_hat[k])
            .collect();
        let fixed = &self.forms.dirichlet_dofs;

        let energy_grad = |x: &[f64]| -> (f64, Vec<f64>) {
            let du: Vec<f64> = x.iter().zip(&un).map(|(a, b)| a - b).collect();
            let bdu = matvec(&self.forms.viscosity_b, &du);
            let ax = matvec(&self.forms.elasticity_a, x);
            let mut e = 0.0;
            let mut g = vec![0.0; 2 * nn];
            for i in 0..2 * nn {
                if fixed[i] {
                    continue;
                }
                e += 0.5 * du[i] * bdu[i] / tau + 0.5 * x[i] * ax[i] + (dt_theta[i] - f[i]) * x[i];
                g[i] = bdu[i] / tau + ax[i] + dt_theta[i] - f[i];
            }
            for k in 0..surf.len() {
                let i = surf.nodes[k];
                let ui = [x[2 * i], x[2 * i + 1]];
                let v = [du[2 * i] / tau, du[2 * i + 1] / tau];
                let chi = hat.chi[k];
                let gc = self.contact.gradient(ui);
                let gf = self.friction.gradient(v);
                e += ms[k]
                    * (0.5 * chi * (ui[0] * ui[0] + ui[1] * ui[1])
                        + self.contact.value(ui)
                        + coef[k] * tau * self.friction.value(v));
                for c in 0..2 {
                    g[2 * i + c] += ms[k] * (chi * ui[c] + gc[c] + coef[k] * gf[c]);
                }
            }
            (e, g)
        };

        let mut x = flatten(&hat.u);
        let (mut e, mut g) = energy_grad(&x);
        let mut history = Vec::new();
        for _ in 0..self.cfg.max_newton {
            let mut d = vec![0.0; 2 * nn];
            for k in 0..surf.len() {
                let i = surf.nodes[k];
                let ui = [x[2 * i], x[2 * i + 1]];
                let v = [(x[2 * i] - un[2 * i]) / tau, (x[2 * i + 1] - un[2 * i + 1]) / tau];
                let pen = if normal_component(ui) > 0.0 { 1.0 / self.cfg.eps } else { 0.0 };
                d[2 * i] += ms[k] * (hat.chi[k] + coef[k] * self.friction.tangential_curvature(v) / tau);
                d[2 * i + 1] += ms[k] * (hat.chi[k] + pen);
            }
            self.mom_solver.refactor(&add_diagonal(&self.mom_base, &self.mom_diag, &d))?;
            let step: Vec<f64> = self.mom_solver.solve(&g).into_iter().map(|v| -v).collect();
            let size = crate::linalg::max_abs(&step);
            history.push(crate::linalg::max_abs(&g));
            let slope = crate::linalg::dot(&g, &step);
            let mut alpha = 1.0;
            let mut trial: Vec<f64>;
            loop {
                trial = x.iter().zip(&step).map(|(a, s)| a + alpha * s).collect();
                let (et, gt) = energy_grad(&trial);
                if et <= e + 1e-4 * alpha * slope || alpha < 1e-8 || size * alpha < 1e-14 {
                    e = et;
                    g = gt;
                    break;
                }
                alpha *= 0.5;
            }
            x = trial;
            if alpha * size <= self.cfg.tol_newton * crate::linalg::max_abs(&x).max(1.0) {
                return Ok(unflatten(&x));
            }
        }
        Err(Error::Stage {
            stage: "momentum",
            time: t1,
            detail: format!("Newton did not converge in {} iterations", self.cfg.max_newton),
            history,
        })
    }

    /// Stage 2: adhesion field from `θ̂s` and the new displacement, with
    /// `γ′` and `λ′` lagged at `χⁿ`.
    pub fn solve_adhesion(&mut self, theta_s_hat: &[f64], u_new: &[Vec2], n: &State, t1: f64) -> Result<Vec<f64>> {
        let tau = self.cfg.tau;
        let ns = self.num_surface();
        let ms = &self.forms.lumped_surface;
        let a = &self.forms.surface_stiffness;
        let rhs: Vec<f64> = (0..ns)
            .map(|k| {
                let ui = u_new[self.mesh.surface.nodes[k]];
                -self.model.gamma.deriv(n.chi[k])
                    - self.model.lambda.deriv(n.chi[k]) * (theta_s_hat[k] - self.model.theta_eq)
                    - 0.5 * (ui[0] * ui[0] + ui[1] * ui[1])
            })
            .collect();
        let adh = self.adhesion;
        let energy_grad = |x: &[f64]| -> (f64, Vec<f64>) {
            let ax = matvec(a, x);
            let mut e = 0.0;
            let mut g = ax.clone();
            for k in 0..ns {
                let v = (x[k] - n.chi[k]) / tau;
                e += 0.5 * x[k] * ax[k]
                    + ms[k] * (tau * (0.5 * v * v + adh.rho_hat(v)) + adh.beta_hat(x[k]) - rhs[k] * x[k]);
                g[k] += ms[k] * (v + adh.rho(v) + adh.beta(x[k]) - rhs[k]);
            }
            (e, g)
        };
        let mut x = n.chi.clone();
        let (mut e, mut g) = energy_grad(&x);
        let mut history = Vec::new();
        for _ in 0..self.cfg.max_newton {
            let d: Vec<f64> = (0..ns)
                .map(|k| {
                    let v = (x[k] - n.chi[k]) / tau;
                    ms[k] * ((1.0 + adh.rho_deriv(v)) / tau + adh.beta_deriv(x[k]))
                })
                .collect();
            self.adh_solver.refactor(&add_diagonal(a, &self.surf_diag, &d))?;
            let step: Vec<f64> = self.adh_solver.solve(&g).into_iter().map(|v| -v).collect();
            let size = crate::linalg::max_abs(&step);
            history.push(crate::linalg::max_abs(&g));
            let slope = crate::linalg::dot(&g, &step);
            let mut alpha = 1.0;
            let mut trial: Vec<f64>;
            loop {
                trial = x.iter().zip(&step).map(|(a, s)| a + alpha * s).collect();
                let (et, gt) = energy_grad(&trial);
                if et <= e + 1e-4 * alpha * slope || alpha < 1e-8 || size * alpha < 1e-14 {
                    e = et;
                    g = gt;
                    break;
                }
                alpha *= 0.5;
            }
            x = trial;
            if alpha * size <= self.cfg.tol_newton * crate::linalg::max_abs(&x).max(1.0) {
                return Ok(x);
            }
        }
        Err(Error::Stage {
            stage: "adhesion",
            time: t1,
            detail: format!("Newton did not converge in {} iterations", self.cfg.max_newton),
            history,
        })
    }

    /// Frozen exchange plus friction heat `F̂` per surface node.
    fn exchange_heat(&self, hat: &State, chi_new: &[f64], fd: &FrictionData) -> Vec<f64> {
        (0..self.num_surface())
            .map(|k| {
                let gap = hat.theta[self.mesh.surface.nodes[k]] - hat.theta_s[k];
                self.model.k.value(chi_new[k]) * gap + self.friction_heat(gap, fd.r_eta[k], fd.psi[k])
            })
            .collect()
    }

    /// `𝔠′(gap)·|𝓡(η)|·Ψδ(v)`.
    pub fn friction_heat(&self, gap: f64, r_eta: f64, psi: f64) -> f64 {
        self.model.friction.deriv(gap) * r_eta * psi
    }

    /// Stage 3a: bulk temperature, Newton on `θ` with the Jacobian
    /// symmetrized through `y = g′(θ)·δθ`.
    pub fn solve_bulk_temperature(
        &mut self,
        hat: &State,
        u_new: &[Vec2],
        chi_new: &[f64],
        n: &State,
        t1: f64,
    ) -> Result<Vec<f64>> {
        let fd = self.friction_data(&hat.u, &n.u);
        let fhat = self.exchange_heat(hat, chi_new, &fd);
        self.bulk_temperature_with_source(&fhat, u_new, n, t1)
    }

    /// Bulk temperature step for a given surface heat flux `fhat` (per
    /// surface node, leaving the body when positive).
    pub fn bulk_temperature_with_source(&mut self, fhat: &[f64], u_new: &[Vec2], n: &State, t1: f64) -> Result<Vec<f64>> {
        let tau = self.cfg.tau;
        let nn = self.num_nodes();
        let m = &self.forms.lumped_bulk;
        let du: Vec<f64> = flatten(u_new).iter().zip(flatten(&n.u)).map(|(a, b)| a - b).collect();
        let ddu = matvec(&self.forms.div_coupling, &du);
        let h = self.heat_load(t1);
        let mut fixed_part = vec![0.0; nn];
        for i in 0..nn {
            fixed_part[i] = -m[i] * self.bulk.tilde(n.theta[i])? / tau - ddu[i] / tau - h[i];
        }
        for (k, &i) in self.mesh.surface.nodes.iter().enumerate() {
            fixed_part[i] += self.forms.lumped_surface[k] * fhat[k];
        }
        let residual = |x: &[f64]| -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
            let mut lt = Vec::with_capacity(nn);
            let mut gx = Vec::with_capacity(nn);
            for &xi in x {
                lt.push(self.bulk.tilde_with_deriv(xi)?);
                gx.push(self.model.g.value(xi));
            }
            let kg = matvec(&self.forms.stiffness_bulk, &gx);
            let r = (0..nn).map(|i| m[i] * lt[i].0 / tau + kg[i] + fixed_part[i]).collect();
            let jd = (0..nn).map(|i| m[i] * lt[i].1 / tau).collect();
            let gp = x.iter().map(|&xi| self.model.g.deriv(xi)).collect();
            Ok((r, jd, gp))
        };
        let scale = m.iter().fold(0.0f64, |a, &b| a.max(b)) / tau;
        newton_symmetrized(
            &mut self.heat_solver,
            &self.forms.stiffness_bulk,
            &self.heat_diag,
            n.theta.clone(),
            residual,
            &self.cfg,
            scale,
            ("bulk temperature", t1),
        )
    }

    /// Stage 3b: surface temperature with `θs` implicit in the exchange term.
    pub fn solve_surface_temperature(&mut self, hat: &State, chi_new: &[f64], n: &State, t1: f64) -> Result<Vec<f64>> {
        let fd = self.friction_data(&hat.u, &n.u);
        let ns = self.num_surface();
        let tau = self.cfg.tau;
        let ms = &self.forms.lumped_surface;
        let kchi: Vec<f64> = chi_new.iter().map(|&c| self.model.k.value(c)).collect();
        let mut fixed_part = vec![0.0; ns];
        for k in 0..ns {
            let i = self.mesh.surface.nodes[k];
            let gap = hat.theta[i] - hat.theta_s[k];
            let dl = self.model.lambda.value(chi_new[k]) - self.model.lambda.value(n.chi[k]);
            fixed_part[k] = -ms[k]
                * (self.surf.tilde(n.theta_s[k])? / tau
                    + dl / tau
                    + kchi[k] * hat.theta[i]
                    + self.friction_heat(gap, fd.r_eta[k], fd.psi[k]));
        }
        let residual = |x: &[f64]| -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
            let mut lt = Vec::with_capacity(ns);
            let mut fl = Vec::with_capacity(ns);
            for &xi in x {
                lt.push(self.surf.tilde_with_deriv(xi)?);
                fl.push(self.surf.flux_with_deriv(xi)?);
            }
            let fv: Vec<f64> = fl.iter().map(|p| p.0).collect();
            let kf = matvec(&self.forms.surface_stiffness, &fv);
            let r = (0..ns).map(|k| ms[k] * (lt[k].0 / tau + kchi[k] * x[k]) + kf[k] + fixed_part[k]).collect();
            let jd = (0..ns).map(|k| ms[k] * (lt[k].1 / tau + kchi[k])).collect();
            let fp = fl.iter().map(|p| p.1).collect();
            Ok((r, jd, fp))
        };
        let scale = ms.iter().fold(0.0f64, |a, &b| a.max(b)) / tau;
        newton_symmetrized(
            &mut self.surf_solver,
            &self.forms.surface_stiffness,
            &self.surf_diag,
            n.theta_s.clone(),
            residual,
            &self.cfg,
            scale,
            ("surface temperature", t1),
        )
    }

    /// One backward-Euler step from `n` to `t = n.time + τ`.
    pub fn step(&mut self, n: &State) -> Result<(State, StepReport)> {
        let t1 = n.time + self.cfg.tau;
        let mut hat = n.clone();
        let mut history = Vec::new();
        for it in 1..=self.cfg.max_picard {
            let u = self.solve_momentum(&hat, n, t1)?;
            let chi = self.solve_adhesion(&hat.theta_s, &u, n, t1)?;
            let theta = self.solve_bulk_temperature(&hat, &u, &chi, n, t1)?;
            let theta_s = self.solve_surface_temperature(&hat, &chi, n, t1)?;
            let change = rel_change(&theta, &hat.theta)
                .max(rel_change(&theta_s, &hat.theta_s))
                .max(rel_change(&chi, &hat.chi))
                .max(rel_change(&flatten(&u), &flatten(&hat.u)));
            history.push(change);
            hat = State { time: t1, theta, theta_s, chi, u, aux: Aux::default() };
            if change < self.cfg.tol_picard {
                hat.aux = self.aux_fields(&hat.u, &n.u, &hat.chi, &n.chi);
                return Ok((hat, StepReport { picard_iterations: it, history }));
            }
        }
        Err(Error::Stage {
            stage: "fixed-point",
            time: t1,
            detail: format!("no convergence in {} iterations", self.cfg.max_picard),
            history,
        })
    }

    /// Elastic energy `½ a(u, u)` of a nodal displacement.
    pub fn elastic_energy(&self, u: &[Vec2]) -> f64 {
        let x = flatten(u);
        0.5 * bilinear(&self.forms.elasticity_a, &x, &x)
    }
}

/// Newton for `R(x) = 0` where `R′(x) = diag(jd) + K·diag(gp)` with `K`
/// symmetric positive semidefinite and `gp > 0`. The substitution
/// `y = gp·δ` gives the SPD system `(diag(jd/gp) + K) y = −R`. Steps are
/// halved until the residual norm decreases.
#[allow(clippy::too_many_arguments)]
fn newton_symmetrized<F>(
    solver: &mut SpdSolver,
    k: &SpMat,
    diag_pos: &[usize],
    mut x: Vec<f64>,
    residual: F,
    cfg: &SolverConfig,
    scale: f64,
    (stage, time): (&'static str, f64),
) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)>,
{
    let norm2 = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (mut r, mut jd, mut gp) = residual(&x)?;
    let mut rn = norm2(&r);
    let mut history = vec![rn];
    for _ in 0..cfg.max_newton {
        let d: Vec<f64> = jd.iter().zip(&gp).map(|(j, g)| j / g).collect();
        solver.refactor(&add_diagonal(k, diag_pos, &d))?;
        let y = solver.solve(&r);
        let step: Vec<f64> = y.iter().zip(&gp).map(|(y, g)| -y / g).collect();
        let size = crate::linalg::max_abs(&step);
        let mut alpha = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a + alpha * s).collect();
            let (rt, jt, gt) = residual(&trial)?;
            let rtn = norm2(&rt);
            if rtn <= (1.0 - 1e-4 * alpha) * rn || alpha < 1e-6 || rtn <= 1e-14 * scale {
                x = trial;
                r = rt;
                jd = jt;
                gp = gt;
                rn = rtn;
                break;
            }
            alpha *= 0.5;
        }
        history.push(rn);
        if alpha * size <= cfg.tol_newton * crate::linalg::max_abs(&x).max(1.0) {
            return Ok(x);
        }
    }
    Err(Error::Stage {
        stage,
        time,
        detail: format!("Newton did not converge in {} iterations", cfg.max_newton),
        history,
    })
}

/// Trajectory and per-step bookkeeping of one run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub states: Vec<State>,
    pub ledgers: Vec<crate::diagnostics::EnergyLedger>,
    pub picard_iterations: Vec<usize>,
}

/// Steps from `initial` to `t_end`, recording the energy ledger of every step.
pub fn run_transient(stepper: &mut Stepper, initial: State) -> Result<Trajectory> {
    let steps = stepper.cfg.num_steps()?;
    let mut states = Vec::with_capacity(steps + 1);
    let mut ledgers = Vec::with_capacity(steps);
    let mut picard_iterations = Vec::with_capacity(steps);
    states.push(initial);
    for _ in 0..steps {
        let prev = states.last().expect("trajectory starts with the initial state");
        let (next, report) = stepper.step(prev)?;
        ledgers.push(crate::diagnostics::ledger(prev, &next, stepper)?);
        picard_iterations.push(report.picard_iterations);
        states.push(next);
    }
    Ok(Trajectory { states, ledgers, picard_iterations })
}
