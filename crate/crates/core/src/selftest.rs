//! Quick built-in consistency checks run by the `selftest` subcommand.

use crate::config::parse_config_str;
use crate::diagnostics::EnergyLedger;
use crate::fem::assemble;
use crate::mesh::build_mesh;
use crate::monotone::{MonotoneFunction, Quantity, RegularizedEntropy};
use crate::physics::{sample_grid, validate, MaterialModel};
use crate::regularizers::orthogonality_check;

#[derive(Clone, Debug, PartialEq)]
pub struct SelfCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, worst: f64, bound: f64) -> SelfCheck {
    SelfCheck { name, passed: worst <= bound, detail: format!("worst {worst:.3e} (bound {bound:.1e})") }
}

const SMALL_RUN: &str = "\
[scenario]
name = selftest
entropy = ln-ln
[mesh]
nx = 6
ny = 3
lx = 2
ly = 1
[loads]
heat = const(0.2)
body_force_y = const(-3)
body_force_y_time = ramp(0.05)
[initial]
theta = ramp(1.7, 0, -0.5)
theta_s = const(1.7)
chi = const(0.3) + gauss(0.5, 2, 0, 0.6)
[solver]
tau = 0.005
t_end = 0.05
eps = 0.1
";

pub fn run() -> Vec<SelfCheck> {
    let mut out = Vec::new();
    let xs = sample_grid(-5.0, 5.0, 401);
    let pairs = [MonotoneFunction::logarithm(), MonotoneFunction::identity()];

    let mut worst: f64 = 0.0;
    for &l in &pairs {
        for eps in [1.0, 0.1, 0.01] {
            let fam = crate::monotone::YosidaFamily::new(l, eps).expect("positive eps");
            for &x in &xs {
                match fam.point(x) {
                    Ok(p) => {
                        let back = p.resolvent + eps * p.yosida;
                        worst = worst.max((back - x).abs() / x.abs().max(1.0));
                    }
                    Err(_) => worst = f64::INFINITY,
                }
            }
        }
    }
    out.push(check("resolvent inverts x = R + ε·L(R)", worst, 1e-12));

    let mut worst: f64 = 0.0;
    for &l in &pairs {
        for eps in [1.0, 0.1, 0.01] {
            let re = RegularizedEntropy::bulk(l, eps).expect("positive eps");
            for &x in &xs {
                let d = re.tilde_deriv(x).unwrap_or(f64::NAN);
                let excess = (eps - d).max(d - eps - 2.0 / eps);
                worst = worst.max(if d.is_nan() { f64::INFINITY } else { excess.max(0.0) });
            }
        }
    }
    out.push(check("ε < L̃ε′ ≤ ε + 2/ε", worst, 0.0));

    let mut worst: f64 = 0.0;
    for &l in &pairs {
        let re = RegularizedEntropy::surface(l, 0.1).expect("positive eps");
        for &x in &[-2.0, -0.3, 0.0, 0.7, 3.0] {
            let closed = re.flux_closed(x).unwrap_or(f64::NAN);
            let quad = re.eval(Quantity::Flux, x).unwrap_or(f64::NAN);
            let rel = (closed - quad).abs() / quad.abs().max(1.0);
            worst = worst.max(if rel.is_nan() { f64::INFINITY } else { rel });
        }
    }
    out.push(check("closed-form flux matches quadrature", worst, 1e-8));

    let mut worst: f64 = 0.0;
    for i in 0..40 {
        for j in 0..40 {
            let a = -2.0 + 0.1 * i as f64;
            let b = -2.0 + 0.1 * j as f64;
            worst = worst.max(orthogonality_check([a, b], [b, -a], 0.05, 1e-3).abs());
        }
    }
    out.push(check("contact force is orthogonal to friction direction", worst, 0.0));

    let model = MaterialModel::default();
    let report = validate(&model, &sample_grid(-10.0, 10.0, 401));
    out.push(SelfCheck {
        name: "default material satisfies its hypotheses",
        passed: report.is_ok(),
        detail: match report {
            Ok(r) => format!("{} checks", r.checks.len()),
            Err(e) => e.to_string(),
        },
    });

    let forms = build_mesh(8, 4, 2.0, 1.0).and_then(|m| assemble(&m, &model));
    out.push(match forms {
        Ok(f) => {
            let mass: f64 = f.lumped_bulk.iter().sum();
            check("assembled bulk mass equals the area", (mass - 2.0).abs(), 1e-12)
        }
        Err(e) => SelfCheck { name: "assembled bulk mass equals the area", passed: false, detail: e.to_string() },
    });

    let run = parse_config_str(SMALL_RUN).and_then(|c| c.run());
    out.push(match run {
        Ok((_, traj)) => {
            let worst = traj
                .ledgers
                .iter()
                .map(|l: &EnergyLedger| l.residual.abs() / (l.dissipation_sum() + 1e-12))
                .fold(0.0, f64::max);
            check("short transient closes its energy ledger", worst, 0.02)
        }
        Err(e) => SelfCheck { name: "short transient closes its energy ledger", passed: false, detail: e.to_string() },
    });
    out
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_selfchecks_pass() {
        for c in super::run() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
