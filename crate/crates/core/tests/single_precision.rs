use phasekit::direct::direct_phase;
use phasekit::freepair::square_well_phase_exact;
use phasekit::milne::milne_phase_shift;
use phasekit::phase::diff_mod_pi;
use phasekit::potentials::{Model, PotentialSpec};
use phasekit::vpa::vpa_partitioned_phase;
use phasekit::{Config32, Context32};

fn cfg() -> Config32 {
    Config32 { abs_tol: 1e-6, rel_tol: 1e-6, min_step: 1e-6, ..Default::default() }
}

#[test]
fn square_well_in_single_precision() {
    for e in [0.5f32, 1.0, 4.0] {
        let exact = square_well_phase_exact(-2.0f64, 1.0, e as f64).unwrap() as f32;
        let c = Context32::new(PotentialSpec::new(Model::square_well(-2.0, 1.0)), 0, e).unwrap();
        for d in [
            direct_phase(&c, &cfg()).unwrap(),
            milne_phase_shift(&c, &cfg()).unwrap(),
            vpa_partitioned_phase(&c, &cfg()).unwrap(),
        ] {
            assert!(diff_mod_pi(d.delta_principal, exact).abs() < 1e-4, "E {e}: {:?} {} vs {exact}", d.method, d.delta_principal);
        }
    }
}

#[test]
fn zero_potential_in_single_precision() {
    let c = Context32::new(PotentialSpec::zero(), 1, 1.0).unwrap();
    let d = vpa_partitioned_phase(&c, &cfg()).unwrap();
    assert!(d.delta_principal.abs() < 1e-6);
}
