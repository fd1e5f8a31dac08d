//! Flat INI-style run configuration.
//!
//! ```text
//! # comment
//! [section]
//! key = value
//! ```
//!
//! Unknown sections and keys are rejected. Field values use the expression
//! language of [`crate::fields`].

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::{FieldExpr, TimeProfile};
use crate::monotone::EntropyKind;
use crate::physics::{Lame, Loads, MaterialParams, SpaceTime};
use crate::scenario::{InitialSpec, MeshSpec, RunConfig};
use crate::solver::SolverConfig;

/// `(section, key, required)`, in the order missing keys are reported.
const SCHEMA: &[(&str, &str, bool)] = &[
    ("scenario", "name", true),
    ("scenario", "entropy", true),
    ("mesh", "nx", true),
    ("mesh", "ny", true),
    ("mesh", "lx", true),
    ("mesh", "ly", true),
    ("material", "g_slope", false),
    ("material", "k0", false),
    ("material", "friction_c5", false),
    ("material", "friction_a", false),
    ("material", "lambda1", false),
    ("material", "gamma1", false),
    ("material", "theta_eq", false),
    ("material", "elastic_lambda", false),
    ("material", "elastic_mu", false),
    ("material", "viscous_lambda", false),
    ("material", "viscous_mu", false),
    ("loads", "heat", false),
    ("loads", "heat_time", false),
    ("loads", "body_force_x", false),
    ("loads", "body_force_x_time", false),
    ("loads", "body_force_y", false),
    ("loads", "body_force_y_time", false),
    ("loads", "traction_x", false),
    ("loads", "traction_x_time", false),
    ("loads", "traction_y", false),
    ("loads", "traction_y_time", false),
    ("initial", "theta", true),
    ("initial", "theta_s", true),
    ("initial", "chi", true),
    ("initial", "u_x", false),
    ("initial", "u_y", false),
    ("solver", "tau", true),
    ("solver", "t_end", true),
    ("solver", "eps", true),
    ("solver", "delta_psi", false),
    ("solver", "tol_picard", false),
    ("solver", "max_picard", false),
    ("solver", "tol_newton", false),
    ("solver", "max_newton", false),
    ("solver", "sigma_r", false),
    ("solver", "alpha", false),
    ("sweep", "eps", false),
    ("output", "dir", false),
    ("output", "snapshot_every", false),
];

struct Entries {
    map: BTreeMap<(String, String), (usize, String)>,
}

impl Entries {
    fn raw(&self, section: &str, key: &str) -> Option<(usize, &str)> {
        self.map.get(&(section.to_string(), key.to_string())).map(|(l, v)| (*l, v.as_str()))
    }

    fn parse<T>(&self, section: &str, key: &str, default: T, f: impl Fn(&str) -> std::result::Result<T, String>) -> Result<T> {
        match self.raw(section, key) {
            None => Ok(default),
            Some((line, v)) => f(v).map_err(|msg| Error::ConfigLine { line, msg: format!("{section}.{key}: {msg}") }),
        }
    }

    fn real(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        self.parse(section, key, default, |v| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("expected a real number, got `{v}`"))
        })
    }

    fn count(&self, section: &str, key: &str, default: usize) -> Result<usize> {
        self.parse(section, key, default, |v| {
            v.parse::<usize>().map_err(|_| format!("expected a nonnegative integer, got `{v}`"))
        })
    }

    fn field(&self, section: &str, key: &str) -> Result<FieldExpr> {
        self.parse(section, key, FieldExpr::zero(), FieldExpr::parse)
    }

    fn time(&self, section: &str, key: &str) -> Result<TimeProfile> {
        self.parse(section, key, TimeProfile::Constant, TimeProfile::parse)
    }

    fn load(&self, name: &str) -> Result<SpaceTime> {
        Ok(SpaceTime { space: self.field("loads", name)?, time: self.time("loads", &format!("{name}_time"))? })
    }
}

fn tokenize(text: &str) -> Result<Entries> {
    let mut map = BTreeMap::new();
    let mut section: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') || s.starts_with(';') {
            continue;
        }
        if let Some(rest) = s.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::ConfigLine { line, msg: format!("malformed section header `{s}`") })?
                .trim();
            if !SCHEMA.iter().any(|(sec, _, _)| *sec == name) {
                return Err(Error::ConfigLine { line, msg: format!("unknown section [{name}]") });
            }
            section = Some(name.to_string());
            continue;
        }
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| Error::ConfigLine { line, msg: format!("expected `key = value`, got `{s}`") })?;
        let (k, v) = (k.trim(), v.trim());
        let sec = section
            .clone()
            .ok_or_else(|| Error::ConfigLine { line, msg: format!("key `{k}` appears before any section") })?;
        if !SCHEMA.iter().any(|(s2, k2, _)| *s2 == sec && *k2 == k) {
            return Err(Error::ConfigLine { line, msg: format!("unknown key `{k}` in [{sec}]") });
        }
        if map.insert((sec.clone(), k.to_string()), (line, v.to_string())).is_some() {
            return Err(Error::ConfigLine { line, msg: format!("duplicate key `{k}` in [{sec}]") });
        }
    }
    Ok(Entries { map })
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let e = tokenize(text)?;
    for (sec, key, required) in SCHEMA {
        if *required && e.raw(sec, key).is_none() {
            return Err(Error::Config(format!("missing required key `{key}` in [{sec}]")));
        }
    }
    let (_, name) = e.raw("scenario", "name").expect("checked above");
    let (eline, etag) = e.raw("scenario", "entropy").expect("checked above");
    let (bulk_entropy, surface_entropy) = etag
        .split_once('-')
        .and_then(|(a, b)| Some((EntropyKind::from_tag(a.trim())?, EntropyKind::from_tag(b.trim())?)))
        .ok_or_else(|| Error::ConfigLine {
            line: eline,
            msg: format!("scenario.entropy: expected a pair such as `ln-ln` or `ln-id`, got `{etag}`"),
        })?;

    let mesh = MeshSpec {
        nx: e.count("mesh", "nx", 0)?,
        ny: e.count("mesh", "ny", 0)?,
        lx: e.real("mesh", "lx", 0.0)?,
        ly: e.real("mesh", "ly", 0.0)?,
    };
    let d = MaterialParams::default();
    let material = MaterialParams {
        g_slope: e.real("material", "g_slope", d.g_slope)?,
        k0: e.real("material", "k0", d.k0)?,
        friction_c5: e.real("material", "friction_c5", d.friction_c5)?,
        friction_a: e.real("material", "friction_a", d.friction_a)?,
        lambda1: e.real("material", "lambda1", d.lambda1)?,
        gamma1: e.real("material", "gamma1", d.gamma1)?,
        theta_eq: e.real("material", "theta_eq", d.theta_eq)?,
        elastic: Lame {
            lambda: e.real("material", "elastic_lambda", d.elastic.lambda)?,
            mu: e.real("material", "elastic_mu", d.elastic.mu)?,
        },
        viscous: Lame {
            lambda: e.real("material", "viscous_lambda", d.viscous.lambda)?,
            mu: e.real("material", "viscous_mu", d.viscous.mu)?,
        },
    };
    let loads = Loads {
        heat: e.load("heat")?,
        body_force: [e.load("body_force_x")?, e.load("body_force_y")?],
        traction: [e.load("traction_x")?, e.load("traction_y")?],
    };
    let initial = InitialSpec {
        theta: e.field("initial", "theta")?,
        theta_s: e.field("initial", "theta_s")?,
        chi: e.field("initial", "chi")?,
        u: [e.field("initial", "u_x")?, e.field("initial", "u_y")?],
    };
    let s = SolverConfig::default();
    let solver = SolverConfig {
        tau: e.real("solver", "tau", s.tau)?,
        t_end: e.real("solver", "t_end", s.t_end)?,
        eps: e.real("solver", "eps", s.eps)?,
        delta_psi: e.real("solver", "delta_psi", s.delta_psi)?,
        tol_picard: e.real("solver", "tol_picard", s.tol_picard)?,
        max_picard: e.count("solver", "max_picard", s.max_picard)?,
        tol_newton: e.real("solver", "tol_newton", s.tol_newton)?,
        max_newton: e.count("solver", "max_newton", s.max_newton)?,
        sigma_r: e.real("solver", "sigma_r", s.sigma_r)?,
        alpha: e.real("solver", "alpha", s.alpha)?,
    };
    let sweep = e.parse("sweep", "eps", Vec::new(), |v| {
        v.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad number `{}` in list", t.trim())))
            .collect()
    })?;
    let output = match e.raw("output", "dir") {
        Some((_, v)) => v.to_string(),
        None => format!("out/{name}"),
    };
    Ok(RunConfig {
        scenario: name.to_string(),
        bulk_entropy,
        surface_entropy,
        mesh,
        material,
        loads,
        initial,
        solver,
        sweep,
        output,
        snapshot_every: e.count("output", "snapshot_every", 10)?.max(1),
    })
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text)
}
