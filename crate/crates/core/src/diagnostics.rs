//! Energy ledger, constraint monitors and the bounded-variation surrogate.

use crate::error::Result;
use crate::fem::{dual_norm_surrogate, AssembledForms};
use crate::linalg::{bilinear, matvec};
use crate::monotone::EntropyKind;
use crate::physics::{MaterialModel, State};
use crate::regularizers::dot;
use crate::solver::{flatten, Stepper, Trajectory};

/// Every term of the approximate energy identity for one step `n → n+1`.
///
/// Stored energies are evaluated at `t_{n+1}`; dissipation and work terms
/// are the increments over the step. The residual is
/// `E_{n+1} + D − E_n − W`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyLedger {
    pub time: f64,
    pub bulk_entropy: f64,
    pub bulk_dissipation: f64,
    pub surface_entropy: f64,
    pub surface_dissipation: f64,
    pub exchange: f64,
    pub viscous: f64,
    pub elastic: f64,
    pub adhesive: f64,
    pub contact: f64,
    pub friction: f64,
    pub friction_gap: f64,
    pub rate: f64,
    pub irreversibility: f64,
    pub gradient: f64,
    pub constraint: f64,
    pub potential: f64,
    pub heat_work: f64,
    pub load_work: f64,
    pub residual: f64,
}

impl EnergyLedger {
    /// Column names in file order, excluding `time`.
    pub const COLUMNS: [&'static str; 19] = [
        "bulk_entropy",
        "bulk_dissipation",
        "surface_entropy",
        "surface_dissipation",
        "exchange",
        "viscous",
        "elastic",
        "adhesive",
        "contact",
        "friction",
        "friction_gap",
        "rate",
        "irreversibility",
        "gradient",
        "constraint",
        "potential",
        "heat_work",
        "load_work",
        "residual",
    ];

    /// Names of the columns that must be nonnegative.
    pub const DISSIPATION: [&'static str; 8] = [
        "bulk_dissipation",
        "surface_dissipation",
        "exchange",
        "viscous",
        "friction",
        "friction_gap",
        "rate",
        "irreversibility",
    ];

    pub fn values(&self) -> [f64; 19] {
        [
            self.bulk_entropy,
            self.bulk_dissipation,
            self.surface_entropy,
            self.surface_dissipation,
            self.exchange,
            self.viscous,
            self.elastic,
            self.adhesive,
            self.contact,
            self.friction,
            self.friction_gap,
            self.rate,
            self.irreversibility,
            self.gradient,
            self.constraint,
            self.potential,
            self.heat_work,
            self.load_work,
            self.residual,
        ]
    }

    pub fn get(&self, column: &str) -> Option<f64> {
        Self::COLUMNS.iter().position(|c| *c == column).map(|i| self.values()[i])
    }

    pub fn dissipation_terms(&self) -> [f64; 8] {
        [
            self.bulk_dissipation,
            self.surface_dissipation,
            self.exchange,
            self.viscous,
            self.friction,
            self.friction_gap,
            self.rate,
            self.irreversibility,
        ]
    }

    pub fn dissipation_sum(&self) -> f64 {
        self.dissipation_terms().iter().sum()
    }

    pub fn stored_sum(&self) -> f64 {
        self.bulk_entropy
            + self.surface_entropy
            + self.elastic
            + self.adhesive
            + self.contact
            + self.gradient
            + self.constraint
            + self.potential
    }

    pub fn work_sum(&self) -> f64 {
        self.heat_work + self.load_work
    }
}

/// The eight stored energies of a state, in ledger order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StoredEnergy {
    pub bulk_entropy: f64,
    pub surface_entropy: f64,
    pub elastic: f64,
    pub adhesive: f64,
    pub contact: f64,
    pub gradient: f64,
    pub constraint: f64,
    pub potential: f64,
}

impl StoredEnergy {
    pub fn total(&self) -> f64 {
        self.bulk_entropy
            + self.surface_entropy
            + self.elastic
            + self.adhesive
            + self.contact
            + self.gradient
            + self.constraint
            + self.potential
    }
}

pub fn stored_energy(s: &State, st: &Stepper) -> Result<StoredEnergy> {
    let m = &st.forms.lumped_bulk;
    let ms = &st.forms.lumped_surface;
    let mut bulk_entropy = 0.0;
    for (t, w) in s.theta.iter().zip(m) {
        bulk_entropy += w * st.bulk.big_i_closed(*t)?;
    }
    let mut surface_entropy = 0.0;
    let (mut adhesive, mut contact, mut constraint, mut potential) = (0.0, 0.0, 0.0, 0.0);
    for (k, &i) in st.mesh.surface.nodes.iter().enumerate() {
        surface_entropy += ms[k] * st.surf.big_i_closed(s.theta_s[k])?;
        let u = s.u[i];
        adhesive += 0.5 * ms[k] * s.chi[k] * dot(u, u);
        contact += ms[k] * st.contact.value(u);
        constraint += ms[k] * st.adhesion.beta_hat(s.chi[k]);
        potential += ms[k] * st.model.gamma.value(s.chi[k]);
    }
    Ok(StoredEnergy {
        bulk_entropy,
        surface_entropy,
        elastic: st.elastic_energy(&s.u),
        adhesive,
        contact,
        gradient: 0.5 * bilinear(&st.forms.surface_stiffness, &s.chi, &s.chi),
        constraint,
        potential,
    })
}

/// Ledger of the accepted step `prev → next`.
pub fn ledger(prev: &State, next: &State, st: &Stepper) -> Result<EnergyLedger> {
    let tau = next.time - prev.time;
    let e0 = stored_energy(prev, st)?;
    let e1 = stored_energy(next, st)?;
    let ms = &st.forms.lumped_surface;
    let model = &st.model;

    let gtheta: Vec<f64> = next.theta.iter().map(|&t| model.g.value(t)).collect();
    let bulk_dissipation = tau * crate::linalg::dot(&next.theta, &matvec(&st.forms.stiffness_bulk, &gtheta));
    let mut flux = Vec::with_capacity(next.theta_s.len());
    for &t in &next.theta_s {
        flux.push(st.surf.flux_closed(t)?);
    }
    let surface_dissipation =
        tau * crate::linalg::dot(&next.theta_s, &matvec(&st.forms.surface_stiffness, &flux));

    let du: Vec<f64> = flatten(&next.u).iter().zip(flatten(&prev.u)).map(|(a, b)| a - b).collect();
    let viscous = bilinear(&st.forms.viscosity_b, &du, &du) / tau;
    let load_work = crate::linalg::dot(&st.momentum_load(next.time), &du);
    let heat_work = tau * crate::linalg::dot(&st.heat_load(next.time), &next.theta);

    let (mut exchange, mut friction, mut friction_gap, mut rate, mut irreversibility) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (k, &i) in st.mesh.surface.nodes.iter().enumerate() {
        let gap = next.theta[i] - next.theta_s[k];
        exchange += tau * ms[k] * model.k.value(next.chi[k]) * gap * gap;
        let dui = [next.u[i][0] - prev.u[i][0], next.u[i][1] - prev.u[i][1]];
        let r = next.aux.r_eta[k];
        // Power of the frictional traction: 𝔠|𝓡(η)| z·Δu, which is Ψ(Δu)
        // exactly in the unsmoothed limit.
        friction += ms[k] * model.friction.value(gap) * r * dot(next.aux.z[k], dui);
        let psi = st.friction.value([dui[0] / tau, dui[1] / tau]);
        friction_gap += tau * ms[k] * st.friction_heat(gap, r, psi) * gap;
        let v = (next.chi[k] - prev.chi[k]) / tau;
        rate += tau * ms[k] * v * v;
        irreversibility += tau * ms[k] * st.adhesion.rho(v) * v;
    }

    let mut l = EnergyLedger {
        time: next.time,
        bulk_entropy: e1.bulk_entropy,
        bulk_dissipation,
        surface_entropy: e1.surface_entropy,
        surface_dissipation,
        exchange,
        viscous,
        elastic: e1.elastic,
        adhesive: e1.adhesive,
        contact: e1.contact,
        friction,
        friction_gap,
        rate,
        irreversibility,
        gradient: e1.gradient,
        constraint: e1.constraint,
        potential: e1.potential,
        heat_work,
        load_work,
        residual: 0.0,
    };
    l.residual = e1.total() + l.dissipation_sum() - e0.total() - l.work_sum();
    Ok(l)
}

/// Maxima of the constraint violations over a trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstraintReport {
    /// `max(−χ, 0)`.
    pub chi_below: f64,
    /// `max(χ − 1, 0)`.
    pub chi_above: f64,
    /// Positive part of `Δχ/τ`.
    pub chi_growth: f64,
    /// `max(−θ, 0)`; `None` when the bulk entropy is not logarithmic.
    pub theta_negative: Option<f64>,
    pub theta_s_negative: Option<f64>,
    /// Space-time minima of the temperatures.
    pub theta_min: f64,
    pub theta_s_min: f64,
}

pub fn constraint_report(states: &[State], model: &MaterialModel) -> ConstraintReport {
    let fold_max = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0f64, f64::max);
    let chi_below = fold_max(&mut states.iter().flat_map(|s| s.chi.iter().map(|c| (-c).max(0.0))));
    let chi_above = fold_max(&mut states.iter().flat_map(|s| s.chi.iter().map(|c| (c - 1.0).max(0.0))));
    let chi_growth = fold_max(&mut states.windows(2).flat_map(|w| {
        let tau = w[1].time - w[0].time;
        w[1].chi.iter().zip(&w[0].chi).map(move |(a, b)| ((a - b) / tau).max(0.0))
    }));
    let theta_min = states.iter().flat_map(|s| s.theta.iter().copied()).fold(f64::INFINITY, f64::min);
    let theta_s_min = states.iter().flat_map(|s| s.theta_s.iter().copied()).fold(f64::INFINITY, f64::min);
    let is_log = |k: EntropyKind| k == EntropyKind::Logarithm;
    ConstraintReport {
        chi_below,
        chi_above,
        chi_growth,
        theta_negative: is_log(model.bulk_entropy.kind()).then(|| (-theta_min).max(0.0)),
        theta_s_negative: is_log(model.surface_entropy.kind()).then(|| (-theta_s_min).max(0.0)),
        theta_min,
        theta_s_min,
    }
}

/// `Σₙ ‖M(θⁿ⁺¹ − θⁿ)‖` in the discrete `H¹(Ω)′` norm.
pub fn bv_monitor(states: &[State], forms: &AssembledForms) -> f64 {
    states
        .windows(2)
        .map(|w| {
            let d: Vec<f64> = w[1].theta.iter().zip(&w[0].theta).map(|(a, b)| a - b).collect();
            dual_norm_surrogate(forms, &matvec(&forms.mass_bulk, &d))
        })
        .sum()
}

/// Accumulated signed residual of a trajectory.
pub fn accumulated_residual(t: &Trajectory) -> f64 {
    t.ledgers.iter().map(|l| l.residual).sum()
}
