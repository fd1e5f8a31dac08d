mod common;

use common::{bisect, resolvent_oracle, simpson, ID, LN};
use proptest::prelude::*;
use thermocontact::monotone::{approx_bulk_init, MonotoneFunction, Quantity, RegularizedEntropy, YosidaFamily};
use thermocontact::physics::MaterialModel;
use thermocontact::regularizers::{
    contact_force, friction_traction, normal_component, orthogonality_check, AdhesionConstraints, ContactPotential,
    FrictionPotential,
};

fn base() -> impl Strategy<Value = MonotoneFunction> {
    prop_oneof![Just(LN), Just(ID)]
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

#[test]
fn resolvent_matches_bisection_examples() {
    let r = YosidaFamily::new(LN, 0.1).unwrap().resolvent(0.0).unwrap();
    let oracle = bisect(|r| r + 0.1 * r.ln(), 1e-9, 1.0);
    assert!((r - oracle).abs() < 1e-12);
    assert_eq!(YosidaFamily::new(ID, 1.0).unwrap().resolvent(1.0).unwrap(), 0.5);
    assert_eq!(YosidaFamily::new(LN, 0.3).unwrap().resolvent(1.0).unwrap(), 1.0);

    let l = YosidaFamily::new(LN, 0.1).unwrap().yosida(-2.0).unwrap();
    let r = resolvent_oracle(LN, -2.0, 0.1);
    assert!(rel(l, (-2.0 - r) / 0.1) < 1e-9);
}

#[test]
fn graph_convergence_of_the_logarithm() {
    let exact = 1.5f64.ln();
    let errs: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&e| (YosidaFamily::new(LN, e).unwrap().yosida(1.5).unwrap() - exact).abs())
        .collect();
    assert!(errs[1] <= errs[0] && errs[2] <= errs[1], "{errs:?}");
    let tiny = (YosidaFamily::new(LN, 1e-4).unwrap().yosida(1.5).unwrap() - exact).abs();
    assert!(tiny < 1e-3, "{tiny}");
}

#[test]
fn flux_error_at_least_halves_with_eps() {
    // f(x) = ∫₀ˣ ds/ℓ′(s): x²/2 for ln and x for id.
    for (l, f) in [(LN, (|x: f64| 0.5 * x * x) as fn(f64) -> f64), (ID, |x: f64| x)] {
        for x in [0.5, 1.0, 2.0, 3.0] {
            let err = |e: f64| (RegularizedEntropy::surface(l, e).unwrap().flux_closed(x).unwrap() - f(x)).abs();
            let (a, b) = (err(0.02), err(0.01));
            let ratio = a / b;
            // For id the error is O(ε²), so only the lower end applies.
            let upper = if l == LN { 2.0 * 1.5 } else { f64::INFINITY };
            assert!(ratio >= 2.0 / 1.5 && ratio <= upper, "{l:?} x={x}: ratio {ratio}");
        }
    }
}

#[test]
fn big_h_is_below_half_square_for_the_logarithm() {
    for eps in [0.5, 0.1, 0.01] {
        let re = RegularizedEntropy::surface(LN, eps).unwrap();
        let h = re.eval(Quantity::BigH, 3.0).unwrap();
        assert!(h <= 4.5, "eps={eps}: {h}");
    }
}

#[test]
fn bulk_init_of_unit_temperature_tends_to_one() {
    let mut prev = f64::INFINITY;
    for eps in [0.1, 0.01, 0.001] {
        let v = approx_bulk_init(&[1.0; 3], LN, eps).unwrap();
        assert!(v.iter().all(|&x| x == v[0]));
        let d = (v[0] - 1.0).abs();
        assert!(d < prev);
        prev = d;
    }
    // L = id: every map is linear and θ₀ε = θ₀ exactly.
    let v = approx_bulk_init(&[5.0], ID, 0.2).unwrap();
    assert!((v[0] - 5.0).abs() < 1e-14);
}

proptest! {
    #[test]
    fn resolvent_is_a_contraction(l in base(), eps in 0.01f64..1.0, x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let fam = YosidaFamily::new(l, eps).unwrap();
        let (rx, ry) = (fam.resolvent(x).unwrap(), fam.resolvent(y).unwrap());
        prop_assert!((rx - ry).abs() <= (x - y).abs() * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn resolvent_solves_its_equation(l in base(), eps in 0.01f64..1.0, x in -5.0f64..5.0) {
        let p = YosidaFamily::new(l, eps).unwrap().point(x).unwrap();
        prop_assert!(rel(p.resolvent, resolvent_oracle(l, x, eps)) < 1e-10);
        if p.resolvent > 0.0 || l == ID {
            prop_assert!(rel(p.yosida, l.eval(p.resolvent)) < 1e-10);
        }
    }

    #[test]
    fn moreau_envelope_identities(l in base(), eps in 0.01f64..1.0, x in -3.0f64..3.0) {
        let fam = YosidaFamily::new(l, eps).unwrap();
        let w = fam.yosida(x).unwrap();
        let je = fam.primitive(x).unwrap();
        prop_assert!(rel(je + fam.conjugate(w), x * w) < 1e-10);
        prop_assert!(rel(fam.conjugate(w), l.conjugate(w) + 0.5 * eps * w * w) < 1e-12);
        // Jε′ = Lε, checked by integrating Lε from 0.
        let integral = simpson(|s| fam.yosida(s).unwrap(), 0.0, x, 2000);
        prop_assert!((je - fam.primitive(0.0).unwrap() - integral).abs() < 1e-7 * (1.0 + integral.abs()));
    }

    #[test]
    fn tilde_derivative_bounds(l in base(), eps in 0.01f64..1.0, x in -10.0f64..10.0) {
        let d = RegularizedEntropy::bulk(l, eps).unwrap().tilde_deriv(x).unwrap();
        prop_assert!(d > eps && d <= eps + 2.0 / eps);
    }

    #[test]
    fn big_i_closed_form_matches_its_integral(l in base(), eps in 0.05f64..1.0, x in -3.0f64..3.0) {
        let re = RegularizedEntropy::bulk(l, eps).unwrap();
        let quad = simpson(|s| s * re.tilde_deriv(s).unwrap(), 0.0, x, 4000);
        prop_assert!(rel(re.big_i_closed(x).unwrap(), quad) < 1e-8);
    }

    #[test]
    fn contact_force_is_normal_and_vanishes_when_admissible(ux in -2.0f64..2.0, uy in -2.0f64..2.0, eps in 0.01f64..1.0) {
        let f = contact_force([ux, uy], eps);
        prop_assert_eq!(f[0], 0.0);
        if normal_component([ux, uy]) <= 0.0 {
            prop_assert_eq!(f, [0.0, 0.0]);
        } else {
            // Exact 1/ε scaling of the pressure.
            let g = contact_force([ux, uy], eps / 2.0);
            prop_assert!((g[1] - 2.0 * f[1]).abs() <= 1e-12 * f[1].abs());
        }
        let c = ContactPotential { eps };
        prop_assert!(c.value([ux, uy]) >= 0.0);
    }

    #[test]
    fn contact_potential_is_convex(a in -2.0f64..2.0, b in -2.0f64..2.0, t in 0.0f64..1.0) {
        let c = ContactPotential { eps: 0.1 };
        let (u, v) = ([0.0, a], [0.0, b]);
        let m = [0.0, t * a + (1.0 - t) * b];
        prop_assert!(c.value(m) <= t * c.value(u) + (1.0 - t) * c.value(v) + 1e-12);
    }

    #[test]
    fn friction_gradient_is_bounded_and_dissipative(vx in -3.0f64..3.0, vy in -3.0f64..3.0, delta in 0.0f64..0.5) {
        let fp = FrictionPotential { delta };
        let z = fp.gradient([vx, vy]);
        prop_assert!(z[0].hypot(z[1]) <= 1.0 + 1e-15);
        prop_assert!(z[0] * vx + z[1] * vy >= fp.value([vx, vy]) - delta - 1e-12);
        if delta == 0.0 {
            prop_assert!((fp.value([vx, vy]) - vx.abs()).abs() < 1e-15);
        }
    }

    #[test]
    fn friction_traction_dissipates(gap in -5.0f64..5.0, r in 0.0f64..10.0, vx in -3.0f64..3.0, vy in -3.0f64..3.0) {
        let model = MaterialModel::default();
        let t = friction_traction(gap, r, [vx, vy], &model, 1e-3);
        prop_assert!(t[0] * vx + t[1] * vy >= 0.0);
    }

    #[test]
    fn orthogonality_is_exact(ux in -5.0f64..5.0, uy in -5.0f64..5.0, vx in -5.0f64..5.0, vy in -5.0f64..5.0) {
        prop_assert_eq!(orthogonality_check([ux, uy], [vx, vy], 0.1, 1e-4), 0.0);
    }

    #[test]
    fn adhesion_maps_are_monotone_and_lipschitz(a in -2.0f64..3.0, b in -2.0f64..3.0, eps in 0.01f64..1.0) {
        let ad = AdhesionConstraints { eps };
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for f in [|ad: &AdhesionConstraints, x: f64| ad.beta(x), |ad: &AdhesionConstraints, x: f64| ad.rho(x)] {
            let d = f(&ad, hi) - f(&ad, lo);
            prop_assert!(d >= 0.0);
            prop_assert!(d <= (hi - lo) / eps * (1.0 + 1e-12) + 1e-15);
        }
        prop_assert_eq!(ad.beta(a) == 0.0, (0.0..=1.0).contains(&a));
        prop_assert_eq!(ad.rho(a) == 0.0, a <= 0.0);
        prop_assert!(ad.beta_hat(a) >= 0.0);
    }

    #[test]
    fn default_friction_heat_has_the_sign_of_the_gap(x in -20.0f64..20.0) {
        let m = MaterialModel::default();
        prop_assert!(m.friction.deriv(x) * x >= 0.0);
        prop_assert!(m.friction.value(x) >= m.constants.c5);
    }
}
