//! Acceptance suite. One line per criterion; exits nonzero if any fails.
//!
//! Run with `cargo test -p phasekit-cli --test acceptance`.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use phasekit::direct::{direct_phase, phase_of_truncated, Method};
use phasekit::freepair::{born_phase, square_well_phase_exact, BasePair, FreePair};
use phasekit::gauge::{cancellation_with_power, gauge_residual, imaginary_cancellation_check, GaugeFunction};
use phasekit::jwkb::{jwkb_phase_estimate, jwkb_residual_check, jwkb_wave_on};
use phasekit::milne::{build_fg, milne_phase, milne_phase_shift, milne_residual, solve_milne, MilneInit};
use phasekit::numerics::{IntegratorConfig, Trace};
use phasekit::phase::diff_mod_pi;
use phasekit::potentials::{Model, PotentialSpec, ScatteringContext};
use phasekit::variational::{error_order_diagnostic, variational_phase, AdjointSign, Perturbation};
use phasekit::vpa::{
    solve_partitioned, solve_partitioned_with, truncation_phase, vpa_local_phase, vpa_partitioned_phase, Coupling, SharedPair,
};
use phasekit::Error;
use phasekit_cli::config::RunConfig;
use phasekit_cli::sweep::{run_sweep, solve_one};

type Outcome = Result<String, String>;

fn ctx(model: Model<f64>, ell: u32, e: f64) -> ScatteringContext<f64> {
    ScatteringContext::new(PotentialSpec::new(model), ell, e).unwrap()
}

fn cfg() -> IntegratorConfig<f64> {
    IntegratorConfig::default()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn cross_method_agreement() -> Outcome {
    let model = Model::square_well(-2.0, 1.0);
    let tight = IntegratorConfig::with_tol(1e-12);
    let mut oracle_dev = 0.0f64;
    for e in [0.3, 2.0, 7.0] {
        let exact = square_well_phase_exact(-2.0, 1.0, e).unwrap();
        let d = direct_phase(&ctx(model.clone(), 0, e), &tight).unwrap().delta_principal;
        oracle_dev = oracle_dev.max(diff_mod_pi(d, exact).abs());
    }
    if oracle_dev > 1e-9 {
        return Err(format!("closed form disagrees with direct by {oracle_dev:.2e}"));
    }
    let methods: [(&str, fn(&ScatteringContext<f64>, &IntegratorConfig<f64>) -> phasekit::Result<phasekit::PhaseShift64>); 4] = [
        ("direct", direct_phase),
        ("milne", milne_phase_shift),
        ("vpa_partitioned", vpa_partitioned_phase),
        ("vpa_local", vpa_local_phase),
    ];
    let mut worst = [0.0f64; 4];
    for e in linspace(0.1, 10.0, 20) {
        let c = ctx(model.clone(), 0, e);
        let exact = square_well_phase_exact(-2.0, 1.0, e).unwrap();
        for (k, (_, f)) in methods.iter().enumerate() {
            let d = f(&c, &cfg()).map_err(|err| format!("{} at E = {e}: {err}", methods[k].0))?;
            worst[k] = worst[k].max(diff_mod_pi(d.delta_principal, exact).abs());
        }
    }
    let detail = methods
        .iter()
        .zip(worst)
        .map(|((name, _), w)| format!("{name} {w:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    check(worst.iter().all(|&w| w <= 1e-6), format!("max |δ − exact| over 20 energies: {detail}"))
}

fn wronskian_convention() -> Outcome {
    let w0 = 2.0 / PI;
    let mut worst = 0.0f64;
    let mut nodes = 0;
    for model in [Model::square_well(-2.0, 1.0), Model::gaussian(-1.0, 1.0), Model::exponential(-1.0, 1.0)] {
        for e in [0.5, 1.0, 4.0] {
            let c = ctx(model.clone(), 0, e);
            let sol = solve_milne(&c, (c.r_min(), c.r_max()), MilneInit::Jwkb, &cfg()).map_err(|err| err.to_string())?;
            let sol = milne_phase(sol, &c, &cfg()).map_err(|err| err.to_string())?;
            let pair = build_fg(&sol).map_err(|err| err.to_string())?;
            for &r in sol.alpha.nodes() {
                worst = worst.max((pair.eval(r).wronskian() - w0).abs() / w0);
                nodes += 1;
            }
        }
    }
    check(worst <= 1e-8, format!("max |W − 2/π|/(2/π) = {worst:.1e} over {nodes} nodes"))
}

fn jwkb_residual_identity() -> Outcome {
    let c = ctx(Model::exponential(-1.0, 1.0), 0, 2.0);
    let res = |h: f64| {
        let n = (10.0 / h).round() as usize + 1;
        let wave = jwkb_wave_on(&c, &Trace::uniform_nodes(0.0, 10.0, n), &cfg()).unwrap();
        jwkb_residual_check(&wave, &c, 1e-3).unwrap()
    };
    let (fine, coarse) = (res(0.05), res(0.1));
    let slope = (coarse / fine).ln() / 2f64.ln();
    check(
        (slope - 4.0).abs() <= 0.3 && fine <= 1e-6,
        format!("slope {slope:.3} (stencil order 4), residual {fine:.1e} at h = 0.05"),
    )
}

const EPS: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];

fn variational_quadratic_order() -> Outcome {
    let c = ctx(Model::square_well(-2.0, 1.0), 0, 1.0);
    let mut parts = Vec::new();
    let mut ok = true;
    for shape in Perturbation::SHAPES {
        let good = error_order_diagnostic(&c, shape, &EPS, AdjointSign::Correct, &cfg()).map_err(|e| e.to_string())?;
        let bad = error_order_diagnostic(&c, shape, &EPS, AdjointSign::Flipped, &cfg()).map_err(|e| e.to_string())?;
        ok &= (1.9..=2.1).contains(&good.slope) && bad.slope <= 1.2;
        parts.push(format!("{} {:.3}/{:.3}", shape.as_str(), good.slope, bad.slope));
    }
    check(ok, format!("slope correct/flipped: {}", parts.join(", ")))
}

fn variational_beats_jwkb() -> Outcome {
    let mut ratios = Vec::new();
    let mut ok = true;
    for e in [0.5, 1.0, 1.5, 2.0, 3.0] {
        let c = ctx(Model::gaussian(-1.0, 1.0), 0, e);
        let d = direct_phase(&c, &cfg()).map_err(|err| err.to_string())?.delta_continuous;
        let j = jwkb_phase_estimate(&c, c.r_max(), &cfg()).map_err(|err| err.to_string())?.delta_continuous;
        let v = variational_phase(&c, &cfg()).map_err(|err| err.to_string())?.delta_continuous;
        let (ej, ev) = ((j - d).abs(), (v - d).abs());
        if ej < 1e-3 {
            return Err(format!("JWKB error {ej:.1e} at E = {e} is below 1e-3"));
        }
        ok &= ev < ej;
        ratios.push(ej / ev);
    }
    ok &= ratios[0] >= 10.0;
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.1}")).collect();
    check(ok, format!("JWKB/variational error ratio at E = 0.5..3: {}", shown.join(", ")))
}

fn truncation() -> Outcome {
    let mut worst = 0.0f64;
    for model in [Model::square_well(-2.0, 1.0), Model::gaussian(-1.0, 1.0)] {
        let c = ctx(model, 0, 1.0).with_r_max(12.0).unwrap();
        let pair: SharedPair<f64> = Arc::new(FreePair::for_context(&c).unwrap());
        let d = solve_partitioned(&c, pair, &cfg()).map_err(|err| err.to_string())?;
        for r0 in [0.25, 0.5, 1.0, 2.0, 5.0] {
            let v = truncation_phase(&d, r0).map_err(|err| err.to_string())?;
            let t = phase_of_truncated(&c, r0, &cfg()).map_err(|err| err.to_string())?.delta_principal;
            worst = worst.max(diff_mod_pi(v, t).abs());
        }
    }
    check(worst <= 1e-6, format!("max |δ(r0) − δ_truncated| = {worst:.1e} over 10 cases"))
}

fn gauge_identity() -> Outcome {
    let c = ctx(Model::square_well(-2.0, 1.0), 0, 1.0);
    let sol = solve_milne(&c, (c.r_min(), c.r_max()), MilneInit::Jwkb, &cfg()).map_err(|err| err.to_string())?;
    let sol = milne_phase(sol, &c, &cfg()).map_err(|err| err.to_string())?;
    let gauges = [GaugeFunction::Zero, GaugeFunction::MilneInverseSquare, GaugeFunction::Scaled(0.5), GaugeFunction::DampedSine];
    let mut worst = 0.0f64;
    for gf in &gauges {
        worst = worst.max(gauge_residual(&sol, gf, &c).map_err(|err| err.to_string())?.relative());
    }
    let zero = gauge_residual(&sol, &GaugeFunction::Zero, &c).map_err(|err| err.to_string())?;
    let milne = milne_residual(&sol, &c).map_err(|err| err.to_string())?;
    let same = (zero.max_abs_residual - milne.max_abs).abs() / milne.scale;
    let canc = imaginary_cancellation_check(&sol, 1.0).map_err(|err| err.to_string())?;
    let canc = canc.max_abs / canc.scale;
    let control = cancellation_with_power(&sol, 1.0, 1.0).map_err(|err| err.to_string())?;
    let control = control.max_abs / control.scale;
    check(
        worst <= 1e-6 && same <= 1e-14 && canc <= 1e-12 && control > 0.0,
        format!(
            "max residual/scale {worst:.1e}, zero gauge vs amplitude equation {same:.1e}, \
             cancellation {canc:.1e}, first-power control {control:.2e}"
        ),
    )
}

fn coupling_calibration() -> Outcome {
    let lambda = 1e-3;
    let c = ctx(Model::square_well(-2.0 * lambda, 1.0), 0, 1.0);
    let born = born_phase(&c, c.r_max(), &cfg()).map_err(|err| err.to_string())? / lambda;
    let tight = IntegratorConfig::with_tol(1e-13);
    let pair: SharedPair<f64> = Arc::new(FreePair::for_context(&c).unwrap());
    let one = solve_partitioned_with(&c, pair.clone(), Coupling::InverseWronskian, &tight).map_err(|err| err.to_string())?;
    let two = solve_partitioned_with(&c, pair, Coupling::TwoOverWronskian, &tight).map_err(|err| err.to_string())?;
    let rel_one = ((one.asymptotic() / lambda - born) / born).abs();
    let rel_two = ((two.asymptotic() / lambda - born) / born).abs();
    check(
        rel_one <= 1e-3 && rel_two > 1e-3,
        format!("relative error vs Born: 1/W {rel_one:.1e}, 2/W {rel_two:.2} (control)"),
    )
}

fn free_particle_nullity() -> Outcome {
    let mut worst = 0.0f64;
    let mut na = 0;
    let mut unexpected = Vec::new();
    for ell in 0..=2 {
        for e in [0.5, 1.0, 4.0] {
            let c = ctx(Model::Zero, ell, e);
            for m in Method::ALL {
                match solve_one(m, &c, &cfg()) {
                    Ok((r, _)) => worst = worst.max(r.delta_principal.abs()).max(r.delta_continuous.abs()),
                    Err(Error::UnsupportedEll(_)) if ell > 0 => na += 1,
                    Err(err) => unexpected.push(format!("{m} ℓ = {ell} E = {e}: {err}")),
                }
            }
        }
    }
    if !unexpected.is_empty() {
        return Err(unexpected.join("; "));
    }
    check(
        worst <= 1e-9,
        format!("max |δ| = {worst:.1e}; {na} (method, ℓ > 0) cases not applicable to ℓ = 0 methods"),
    )
}

fn acceptance_configs() -> Vec<RunConfig> {
    let spec = |m| PotentialSpec::new(m);
    let mut out = vec![
        RunConfig::new(spec(Model::square_well(-2.0, 1.0)), 0, linspace(0.1, 10.0, 20)),
        RunConfig::new(spec(Model::gaussian(-1.0, 1.0)), 0, vec![0.5, 1.0, 1.5, 2.0, 3.0]),
        RunConfig::new(spec(Model::exponential(-1.0, 1.0)), 0, vec![0.5, 1.0, 2.0, 4.0]),
    ];
    for ell in 0..=2 {
        out.push(RunConfig::new(spec(Model::Zero), ell, vec![0.5, 1.0, 4.0]));
    }
    out
}

fn determinism() -> Outcome {
    let mut records = 0;
    for mut rc in acceptance_configs() {
        rc.concurrent = false;
        let serial = run_sweep(&rc).map_err(|err| err.to_string())?;
        rc.concurrent = true;
        let concurrent = run_sweep(&rc).map_err(|err| err.to_string())?;
        let again = run_sweep(&rc).map_err(|err| err.to_string())?;
        if serial.records != concurrent.records || concurrent.records != again.records {
            return Err(format!("records differ for {}", rc.potential_text));
        }
        records += serial.records.len();
    }
    check(true, format!("{records} records identical across serial, concurrent and repeated runs"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("cross-method agreement", cross_method_agreement),
        ("wronskian convention", wronskian_convention),
        ("jwkb residual identity", jwkb_residual_identity),
        ("variational quadratic order", variational_quadratic_order),
        ("variational improves on jwkb", variational_beats_jwkb),
        ("truncation", truncation),
        ("gauge identity", gauge_identity),
        ("coupling calibration", coupling_calibration),
        ("free-particle nullity", free_particle_nullity),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {:>2} {name}: PASS ({d}) [{secs:.2}s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({d}) [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
