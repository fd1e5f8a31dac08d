#![allow(dead_code)]

use std::path::PathBuf;

use thermocontact::config::parse_config;
use thermocontact::mesh::build_mesh;
use thermocontact::monotone::MonotoneFunction;
use thermocontact::physics::{Aux, Loads, MaterialModel, MaterialParams, State};
use thermocontact::scenario::RunConfig;
use thermocontact::solver::{SolverConfig, Stepper};

pub const LN: MonotoneFunction = MonotoneFunction::logarithm();
pub const ID: MonotoneFunction = MonotoneFunction::identity();

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

pub fn shipped(name: &str) -> RunConfig {
    parse_config(config_path(name)).expect("shipped config parses")
}

pub fn shipped_configs() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs"))
        .expect("configs directory")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|e| e == "cfg"))
        .collect();
    v.sort();
    v
}

pub fn solver_cfg(tau: f64, t_end: f64, eps: f64) -> SolverConfig {
    SolverConfig { tau, t_end, eps, ..SolverConfig::default() }
}

pub fn stepper(
    bulk: MonotoneFunction,
    surf: MonotoneFunction,
    params: MaterialParams,
    loads: Loads,
    (nx, ny): (usize, usize),
    cfg: SolverConfig,
) -> Stepper {
    let mesh = build_mesh(nx, ny, 2.0, 1.0).expect("mesh");
    let model = MaterialModel::from_params(bulk, surf, &params);
    Stepper::new(mesh, model, loads, cfg).expect("stepper")
}

/// Spatially uniform state at rest with its auxiliary fields.
pub fn uniform_state(st: &Stepper, theta: f64, theta_s: f64, chi: f64) -> State {
    let u = vec![[0.0; 2]; st.num_nodes()];
    let chi = vec![chi; st.num_surface()];
    let aux = st.aux_fields(&u, &u, &chi, &chi);
    State { time: 0.0, theta: vec![theta; st.num_nodes()], theta_s: vec![theta_s; st.num_surface()], chi, u, aux }
}

pub fn bare_state(st: &Stepper, theta: f64, theta_s: f64, chi: f64) -> State {
    State { aux: Aux::default(), ..uniform_state(st, theta, theta_s, chi) }
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Root of an increasing function on `[lo, hi]` by plain bisection.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    assert!(f(lo) <= 0.0 && f(hi) >= 0.0, "bracket does not enclose a root");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Independent resolvent oracle: bisection on `r + εL(r) = x`.
pub fn resolvent_oracle(l: MonotoneFunction, x: f64, eps: f64) -> f64 {
    if l == ID {
        return x / (1.0 + eps);
    }
    // r + ε ln r is increasing on (0, ∞); bracket the root.
    let f = |r: f64| r + eps * r.ln() - x;
    let mut lo = 1e-300;
    let mut hi = x.abs().max(1.0) + 1.0;
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    if f(lo) > 0.0 {
        lo = 0.0;
    }
    bisect(|r| if r == 0.0 { f64::NEG_INFINITY } else { f(r) }, lo, hi)
}
