//! Run configuration, initial data and the ε-sweep driver.

use crate::diagnostics::{accumulated_residual, bv_monitor, constraint_report, ConstraintReport};
use crate::error::{Error, Result};
use crate::fields::FieldExpr;
use crate::linalg::bilinear;
use crate::mesh::build_mesh;
use crate::monotone::{approx_bulk_init, approx_surf_init, EntropyKind, MonotoneFunction};
use crate::physics::{sample_grid, validate, Loads, MaterialModel, MaterialParams, State};
use crate::solver::{flatten, run_transient, SolverConfig, Stepper, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshSpec {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

/// Initial fields as expressions in `(x, y)`; surface fields see `y = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialSpec {
    pub theta: FieldExpr,
    pub theta_s: FieldExpr,
    pub chi: FieldExpr,
    pub u: [FieldExpr; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scenario: String,
    pub bulk_entropy: EntropyKind,
    pub surface_entropy: EntropyKind,
    pub mesh: MeshSpec,
    pub material: MaterialParams,
    pub loads: Loads,
    pub initial: InitialSpec,
    pub solver: SolverConfig,
    pub sweep: Vec<f64>,
    pub output: String,
    /// Field snapshots are written every this many steps.
    pub snapshot_every: usize,
}

impl RunConfig {
    /// `"ln-ln"`, `"id-id"`, ...
    pub fn entropy_tag(&self) -> String {
        format!("{}-{}", self.bulk_entropy.tag(), self.surface_entropy.tag())
    }

    pub fn model(&self) -> MaterialModel {
        MaterialModel::from_params(
            MonotoneFunction::new(self.bulk_entropy),
            MonotoneFunction::new(self.surface_entropy),
            &self.material,
        )
    }

    pub fn with_eps(&self, eps: f64) -> RunConfig {
        let mut c = self.clone();
        c.solver.eps = eps;
        c
    }

    /// Checks the material hypotheses, then builds the mesh, forms and solvers.
    pub fn stepper(&self) -> Result<Stepper> {
        validate(&self.model(), &sample_grid(-10.0, 10.0, 2001))?;
        let m = &self.mesh;
        let mesh = build_mesh(m.nx, m.ny, m.lx, m.ly)?;
        Stepper::new(mesh, self.model(), self.loads.clone(), self.solver)
    }

    /// Regularized initial data and the auxiliary fields at `t = 0`.
    pub fn initial_state(&self, st: &Stepper) -> Result<State> {
        let eps = self.solver.eps;
        let nodes = &st.mesh.nodes;
        let theta0: Vec<f64> = nodes.iter().map(|p| self.initial.theta.eval(p[0], p[1])).collect();
        let theta = approx_bulk_init(&theta0, st.model.bulk_entropy, eps)?;
        let sx = &st.mesh.surface.coords;
        let ts0: Vec<f64> = sx.iter().map(|&x| self.initial.theta_s.eval(x, 0.0)).collect();
        let theta_s = approx_surf_init(&ts0, st.model.surface_entropy, self.solver.alpha, eps)?;
        let chi: Vec<f64> = sx.iter().map(|&x| self.initial.chi.eval(x, 0.0)).collect();
        let u: Vec<[f64; 2]> = nodes
            .iter()
            .map(|p| [self.initial.u[0].eval(p[0], p[1]), self.initial.u[1].eval(p[0], p[1])])
            .collect();
        for &i in &st.mesh.gamma_d {
            if u[i] != [0.0, 0.0] {
                return Err(Error::Parameter(format!("initial displacement is nonzero at clamped node {i}")));
            }
        }
        if let Some(bad) = theta.iter().chain(&theta_s).chain(&chi).find(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("initial data is not finite ({bad})")));
        }
        let aux = st.aux_fields(&u, &u, &chi, &chi);
        Ok(State { time: 0.0, theta, theta_s, chi, u, aux })
    }

    pub fn run(&self) -> Result<(Stepper, Trajectory)> {
        let mut st = self.stepper()?;
        let s0 = self.initial_state(&st)?;
        let traj = run_transient(&mut st, s0)?;
        Ok((st, traj))
    }
}

/// Differences between the trajectories of two regularization levels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CauchyRow {
    pub eps_coarse: f64,
    pub eps_fine: f64,
    /// `‖Δθ‖` in `L²(0,T;L²(Ω))`.
    pub theta: f64,
    /// `‖Δθs‖` in `L²(0,T;L²(ΓC))`.
    pub theta_s: f64,
    /// `‖Δu‖` in `H¹(0,T;W)` with the elastic energy norm on `W`.
    pub u: f64,
    /// `‖Δχ‖` in `L^∞(0,T;L²(ΓC))`.
    pub chi: f64,
}

/// Summary of one run of the sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRun {
    pub eps: f64,
    pub constraints: ConstraintReport,
    pub accumulated_residual: f64,
    pub bv: f64,
    pub max_picard: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub runs: Vec<SweepRun>,
    pub pairs: Vec<CauchyRow>,
    /// Set when a run failed; the report then covers the runs before it.
    pub failure: Option<String>,
}

pub fn cauchy_row(st: &Stepper, a: &Trajectory, b: &Trajectory, eps_a: f64, eps_b: f64) -> CauchyRow {
    let m = &st.forms.lumped_bulk;
    let ms = &st.forms.lumped_surface;
    let tau = st.cfg.tau;
    let (mut th, mut ts, mut uu, mut chi) = (0.0, 0.0, 0.0f64, 0.0f64);
    let mut prev_w: Option<Vec<f64>> = None;
    for (sa, sb) in a.states.iter().zip(&b.states) {
        let w: Vec<f64> = flatten(&sa.u).iter().zip(flatten(&sb.u)).map(|(x, y)| x - y).collect();
        let c = sa.chi.iter().zip(&sb.chi).zip(ms).map(|((x, y), m)| m * (x - y).powi(2)).sum::<f64>();
        chi = chi.max(c.sqrt());
        if let Some(pw) = &prev_w {
            th += tau * sa.theta.iter().zip(&sb.theta).zip(m).map(|((x, y), m)| m * (x - y).powi(2)).sum::<f64>();
            ts += tau
                * sa.theta_s.iter().zip(&sb.theta_s).zip(ms).map(|((x, y), m)| m * (x - y).powi(2)).sum::<f64>();
            let wd: Vec<f64> = w.iter().zip(pw).map(|(x, y)| (x - y) / tau).collect();
            let a_form = &st.forms.elasticity_a;
            uu += tau * (bilinear(a_form, &w, &w) + bilinear(a_form, &wd, &wd));
        }
        prev_w = Some(w);
    }
    CauchyRow { eps_coarse: eps_a, eps_fine: eps_b, theta: th.sqrt(), theta_s: ts.sqrt(), u: uu.sqrt(), chi }
}

/// Runs every ε of `eps_list` (strictly decreasing) and compares
/// consecutive trajectories.
pub fn epsilon_sweep(cfg: &RunConfig, eps_list: &[f64]) -> Result<SweepReport> {
    epsilon_sweep_with(cfg, eps_list, |_, _, _| Ok(()))
}

/// [`epsilon_sweep`] with a hook called on every completed run.
pub fn epsilon_sweep_with<F>(cfg: &RunConfig, eps_list: &[f64], mut on_run: F) -> Result<SweepReport>
where
    F: FnMut(f64, &Stepper, &Trajectory) -> Result<()>,
{
    if eps_list.is_empty() || eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Parameter("sweep list must be nonempty and strictly decreasing".into()));
    }
    let mut runs = Vec::new();
    let mut pairs = Vec::new();
    let mut prev: Option<(f64, Trajectory)> = None;
    for &eps in eps_list {
        let c = cfg.with_eps(eps);
        let (st, traj) = match c.run() {
            Ok(r) => r,
            Err(e) => {
                return Ok(SweepReport { runs, pairs, failure: Some(format!("eps = {eps}: {e}")) });
            }
        };
        on_run(eps, &st, &traj)?;
        runs.push(SweepRun {
            eps,
            constraints: constraint_report(&traj.states, &st.model),
            accumulated_residual: accumulated_residual(&traj),
            bv: bv_monitor(&traj.states, &st.forms),
            max_picard: traj.picard_iterations.iter().copied().max().unwrap_or(0),
        });
        if let Some((pe, pt)) = &prev {
            pairs.push(cauchy_row(&st, pt, &traj, *pe, eps));
        }
        prev = Some((eps, traj));
    }
    Ok(SweepReport { runs, pairs, failure: None })
}
