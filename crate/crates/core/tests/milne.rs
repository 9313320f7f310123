use phasekit::direct::direct_phase;
use phasekit::freepair::{square_well_phase_exact, BasePair};
use phasekit::milne::{
    build_fg, milne_phase, milne_phase_shift, milne_phase_shift_with, milne_residual, solve_milne, MilneInit,
};
use phasekit::numerics::IntegratorConfig;
use phasekit::potentials::{Model, PotentialSpec, ScatteringContext};
use std::f64::consts::PI;

fn ctx(model: Model<f64>, ell: u32, e: f64) -> ScatteringContext<f64> {
    ScatteringContext::new(PotentialSpec::new(model), ell, e).unwrap()
}

fn cfg() -> IntegratorConfig<f64> {
    IntegratorConfig::default()
}

#[test]
fn constant_wavenumber_amplitude() {
    let c = ctx(Model::Zero, 0, 4.0);
    let init = MilneInit::Inner { alpha: 0.5f64.sqrt(), slope: 0.0 };
    let sol = solve_milne(&c, (0.0, 10.0), init, &cfg()).unwrap();
    // round-off perturbations of the fixed point are integrated at the
    // configured tolerance with steps of order one
    for &a in sol.alpha.values() {
        assert!((a - 0.707_106_781_186_547_5).abs() < 1e-9);
    }
    let sol = milne_phase(sol, &c, &cfg()).unwrap();
    let phi = sol.phi().unwrap();
    for (&r, &p) in phi.nodes().iter().zip(phi.values()) {
        // inherits the amplitude drift above through φ' = α⁻²
        assert!((p - 2.0 * r).abs() < 1e-8, "r {r}: {p}");
    }
}

#[test]
fn oscillating_amplitude_stays_positive() {
    let c = ctx(Model::Zero, 0, 1.0);
    let init = MilneInit::Inner { alpha: 2.0, slope: 0.0 };
    let sol = solve_milne(&c, (0.0, 20.0), init, &cfg()).unwrap();
    let lo = sol.alpha.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = sol.alpha.values().iter().cloned().fold(0.0, f64::max);
    // α² = 4 cos² r + sin² r / 4 for this start
    assert!((lo - 0.5).abs() < 1e-6 && (hi - 2.0).abs() < 1e-9, "{lo} {hi}");
    let res = milne_residual(&sol, &c).unwrap();
    assert!(res.relative() <= 1e-8, "{}", res.relative());
}

#[test]
fn residual_within_ten_tolerances() {
    for (model, e) in [
        (Model::square_well(-2.0, 1.0), 1.0),
        (Model::gaussian(-1.0, 1.0), 0.5),
        (Model::exponential(-1.0, 1.0), 3.0),
    ] {
        let c = ctx(model, 0, e);
        let sol = solve_milne(&c, (c.r_min(), c.r_max()), MilneInit::Jwkb, &cfg()).unwrap();
        let res = milne_residual(&sol, &c).unwrap().relative();
        assert!(res <= 10.0 * cfg().abs_tol, "E {e}: {res:e}");
    }
}

#[test]
fn square_well_amplitude_is_jwkb_outside() {
    let c = ctx(Model::square_well(-2.0, 1.0), 0, 1.0);
    let sol = solve_milne(&c, (c.r_min(), c.r_max()), MilneInit::Jwkb, &cfg()).unwrap();
    for (&r, &a) in sol.alpha.nodes().iter().zip(sol.alpha.values()) {
        if r > 1.0 {
            assert!((a - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn phase_increases_and_reconstruction_solves_equation() {
    let c = ctx(Model::square_well(-2.0, 1.0), 0, 1.0);
    let fine = cfg().max_step(0.01);
    let sol = solve_milne(&c, (c.r_min(), c.r_max()), MilneInit::Jwkb, &fine).unwrap();
    let sol = milne_phase(sol, &c, &fine).unwrap();
    let phi = sol.phi().unwrap();
    assert!(phi.values().windows(2).all(|p| p[1] > p[0]));
    assert!(phi.first_value() < 1e-5);
    let pair = build_fg(&sol).unwrap();
    // uniform resampling: the solver's own nodes shrink geometrically near
    // the inward start, which ruins three-node stencils there
    let nodes = phasekit::numerics::Trace::uniform_nodes(0.01, c.r_max(), 800);
    let (f, g) = pair.traces_on(&nodes).unwrap();
    for u in [f, g] {
        let res = phasekit::direct::regular_residual(&c, &u);
        assert!(res <= 1e-7, "{res:e}");
    }
}

#[test]
fn wronskian_is_fixed_everywhere() {
    let c = ctx(Model::gaussian(-3.0, 1.0), 0, 2.0);
    let sol = solve_milne(&c, (c.r_min(), c.r_max()), MilneInit::Jwkb, &cfg()).unwrap();
    let sol = milne_phase(sol, &c, &cfg()).unwrap();
    let pair = build_fg(&sol).unwrap();
    for i in 0..20 {
        let r = 0.01 + i as f64 * 0.4;
        let w = pair.eval(r).wronskian();
        assert!((w - 2.0 / PI).abs() < 1e-10);
    }
}

#[test]
fn free_pair_from_unit_amplitude() {
    let c = ctx(Model::Zero, 0, 1.0);
    let sol = solve_milne(&c, (0.0, 8.0), MilneInit::Inner { alpha: 1.0, slope: 0.0 }, &cfg()).unwrap();
    let sol = milne_phase(sol, &c, &cfg()).unwrap();
    let pair = build_fg(&sol).unwrap();
    let n = (2.0 / PI).sqrt();
    for r in [0.3, 2.0, 5.5] {
        let p = pair.eval(r);
        assert!((p.f - n * f64::sin(r)).abs() < 1e-9);
        assert!((p.g + n * f64::cos(r)).abs() < 1e-9);
    }
}

#[test]
fn zero_potential_phase_vanishes() {
    for ell in 0..=2 {
        let c = ctx(Model::Zero, ell, 1.0).with_r_max(20.0).unwrap();
        let d = milne_phase_shift(&c, &cfg()).unwrap();
        assert!(d.delta_principal.abs() < 1e-9, "ell {ell}: {}", d.delta_principal);
    }
}

#[test]
fn square_well_matches_closed_form_and_direct() {
    let c = ctx(Model::square_well(-2.0, 1.0), 0, 1.0);
    let d = milne_phase_shift(&c, &cfg()).unwrap();
    let exact = square_well_phase_exact(-2.0, 1.0, 1.0).unwrap();
    assert!((d.delta_principal - exact).abs() < 1e-6);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let e = 0.1 + i as f64 * (9.9 / 19.0);
        let c = ctx(Model::square_well(-2.0, 1.0), 0, e);
        let m = milne_phase_shift(&c, &cfg()).unwrap().delta_principal;
        let r = direct_phase(&c, &cfg()).unwrap().delta_principal;
        worst = worst.max(phasekit::phase::diff_mod_pi(m, r).abs());
    }
    assert!(worst <= 1e-6, "{worst:e}");
}

#[test]
fn higher_ell_matches_direct() {
    for ell in 1..=4 {
        let c = ctx(Model::gaussian(-4.0, 1.0), ell, 2.0);
        let m = milne_phase_shift(&c, &cfg()).unwrap().delta_principal;
        let r = direct_phase(&c, &cfg()).unwrap().delta_principal;
        assert!(phasekit::phase::diff_mod_pi(m, r).abs() < 1e-7, "ell {ell}: {m} vs {r}");
    }
}

#[test]
fn initialization_does_not_change_phase() {
    let c = ctx(Model::gaussian(-2.0, 1.0), 0, 1.5);
    let a = milne_phase_shift(&c, &cfg()).unwrap().delta_principal;
    let w = 1.5f64;
    let other = MilneInit::Outer { alpha: 1.4 * w.powf(-0.25), slope: 0.2 };
    let b = milne_phase_shift_with(&c, other, &cfg()).unwrap().delta_principal;
    assert!((a - b).abs() < 1e-8, "{a} vs {b}");
}
