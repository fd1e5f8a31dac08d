//! CSV writers. Every file starts with a versioned `#` comment line and
//! reals are written with 17 significant digits.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::diagnostics::{ConstraintReport, EnergyLedger};
use crate::error::Result;
use crate::physics::State;
use crate::regularizers::{norm, normal_component, tangential_part};
use crate::scenario::{CauchyRow, SweepRun};
use crate::solver::{Stepper, Trajectory};

pub const LEDGER_HEADER: &str = "# thermocontact ledger v1";
pub const FIELDS_HEADER: &str = "# thermocontact fields v1";
pub const SWEEP_HEADER: &str = "# thermocontact sweep v1";
pub const CONSTRAINTS_HEADER: &str = "# thermocontact constraints v1";

/// Environment variable that overrides the output root.
pub const OUT_ENV: &str = "THERMOCONTACT_OUT";

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), real)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_ledger<W: Write>(mut w: W, ledgers: &[EnergyLedger]) -> Result<()> {
    writeln!(w, "{LEDGER_HEADER}")?;
    writeln!(w, "step,time,{}", EnergyLedger::COLUMNS.join(","))?;
    for (n, l) in ledgers.iter().enumerate() {
        let vals: Vec<String> = l.values().iter().map(|&v| real(v)).collect();
        writeln!(w, "{},{},{}", n + 1, real(l.time), vals.join(","))?;
    }
    Ok(())
}

/// One snapshot: a `bulk` row per node, then a `surface` row per contact node.
pub fn write_fields<W: Write>(mut w: W, st: &Stepper, s: &State) -> Result<()> {
    writeln!(w, "{FIELDS_HEADER} t={}", real(s.time))?;
    writeln!(w, "kind,id,x,y,theta,u_x,u_y,theta_s,chi,u_n,u_t_abs")?;
    for (i, p) in st.mesh.nodes.iter().enumerate() {
        writeln!(
            w,
            "bulk,{i},{},{},{},{},{},,,,",
            real(p[0]),
            real(p[1]),
            real(s.theta[i]),
            real(s.u[i][0]),
            real(s.u[i][1])
        )?;
    }
    for (k, &i) in st.mesh.surface.nodes.iter().enumerate() {
        let p = st.mesh.nodes[i];
        writeln!(
            w,
            "surface,{k},{},{},,,,{},{},{},{}",
            real(p[0]),
            real(p[1]),
            real(s.theta_s[k]),
            real(s.chi[k]),
            real(normal_component(s.u[i])),
            real(norm(tangential_part(s.u[i])))
        )?;
    }
    Ok(())
}

pub fn write_sweep<W: Write>(mut w: W, pairs: &[CauchyRow]) -> Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    writeln!(w, "eps_coarse,eps_fine,theta,theta_s,u,chi")?;
    for p in pairs {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            real(p.eps_coarse),
            real(p.eps_fine),
            real(p.theta),
            real(p.theta_s),
            real(p.u),
            real(p.chi)
        )?;
    }
    Ok(())
}

pub fn write_constraints<W: Write>(mut w: W, runs: &[SweepRun]) -> Result<()> {
    writeln!(w, "{CONSTRAINTS_HEADER}")?;
    writeln!(
        w,
        "eps,chi_below,chi_above,chi_growth,theta_negative,theta_s_negative,theta_min,theta_s_min,accumulated_residual,bv,max_picard"
    )?;
    for r in runs {
        let c: &ConstraintReport = &r.constraints;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            real(r.eps),
            real(c.chi_below),
            real(c.chi_above),
            real(c.chi_growth),
            opt(c.theta_negative),
            opt(c.theta_s_negative),
            real(c.theta_min),
            real(c.theta_s_min),
            real(r.accumulated_residual),
            real(r.bv),
            r.max_picard
        )?;
    }
    Ok(())
}

/// Writes `ledger.csv` and the field snapshots of one run into `dir`.
/// Snapshots are taken every `every` steps and always at the final time.
pub fn write_run(dir: &Path, st: &Stepper, traj: &Trajectory, every: usize) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = create(&dir.join("ledger.csv"))?;
    write_ledger(&mut w, &traj.ledgers)?;
    w.flush()?;
    let last = traj.states.len() - 1;
    for (n, s) in traj.states.iter().enumerate() {
        if n % every.max(1) == 0 || n == last {
            let mut w = create(&dir.join(format!("fields_t{n:05}.csv")))?;
            write_fields(&mut w, st, s)?;
            w.flush()?;
        }
    }
    Ok(())
}

pub fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Output directory of a scenario: `$THERMOCONTACT_OUT/<scenario>` when the
/// variable is set, the configured directory otherwise.
pub fn output_dir(configured: &str, scenario: &str) -> PathBuf {
    match std::env::var_os(OUT_ENV) {
        Some(root) if !root.is_empty() => PathBuf::from(root).join(scenario),
        _ => PathBuf::from(configured),
    }
}
