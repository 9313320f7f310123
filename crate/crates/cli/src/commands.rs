use std::time::Instant;

use serde_json::Value;

use phasekit::direct::Method;
use phasekit::freepair::{square_well_phase_exact, BasePair};
use phasekit::gauge::{gauge_residual, imaginary_cancellation_check, GaugeFunction};
use phasekit::milne::{build_fg, milne_phase, residual_profile, solve_milne, MilneInit};
use phasekit::phase::diff_mod_pi;
use phasekit::potentials::Model;
use phasekit::variational::{error_order_diagnostic, AdjointSign, Perturbation};
use phasekit::vpa::{partitioned_profile, reference_pair, solve_partitioned};

use crate::config::{MethodSel, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Table};
use crate::sweep::{map_energies, run_sweep, solve_one};

pub fn phaseshift(rc: &RunConfig) -> CliResult<(Table, Vec<String>)> {
    let out = run_sweep(rc)?;
    let mut t = Table::new(
        "phaseshift",
        &[
            "method",
            "ell",
            "energy",
            "delta_principal",
            "delta_continuous",
            "alpha_at_origin",
            "max_residual",
            "step_count",
            "r_match",
            "tolerance",
        ],
    );
    for r in &out.records {
        let d = &r.diagnostics;
        t.push(vec![
            r.method.as_str().into(),
            r.ell.into(),
            r.energy.into(),
            r.delta_principal.into(),
            r.delta_continuous.into(),
            r.alpha_at_origin.into(),
            d.max_residual.into(),
            d.step_count.into(),
            d.r_match.into(),
            d.tolerance.into(),
        ]);
    }
    t.json_rows = Some(out.records.iter().map(|r| serde_json::to_value(r).expect("serializable record")).collect());
    Ok((t, out.skipped))
}

/// Closed-form phase where one exists: the square well and the zero
/// potential, for `ℓ = 0` without a long-range part or cutoff.
pub fn oracle(rc: &RunConfig, energy: f64) -> Option<f64> {
    let spec = &rc.potential;
    if rc.ell != 0 || spec.cutoff.is_some() || spec.long_range.as_ref().is_some_and(|m| !m.is_zero()) {
        return None;
    }
    match spec.model {
        Model::Zero => Some(0.0),
        Model::SquareWell { depth, radius } => square_well_phase_exact(depth, radius, energy).ok(),
        _ => None,
    }
}

const COMPARE_ORDER: [Method; 6] =
    [Method::Direct, Method::Milne, Method::VpaLocal, Method::VpaPartitioned, Method::Jwkb, Method::Variational];

/// Approximations, left out of the pairwise deviation.
fn approximate(m: Method) -> bool {
    matches!(m, Method::Jwkb | Method::Variational)
}

pub fn compare(rc: &RunConfig) -> CliResult<(Table, Vec<String>)> {
    if rc.method != MethodSel::All {
        return Err(CliError::Config("method: compare runs every method; use --method all".into()));
    }
    let out = run_sweep(rc)?;
    let mut t = Table::new(
        "compare",
        &[
            "energy",
            "delta_direct",
            "delta_milne",
            "delta_vpa_local",
            "delta_vpa_partitioned",
            "delta_jwkb",
            "delta_variational",
            "delta_oracle",
            "max_pairwise_deviation",
        ],
    );
    let mut worst = [0.0f64; 8];
    for &e in &rc.energies {
        let delta = |m: Method| {
            out.records
                .iter()
                .find(|r| r.energy == e && r.method == m.as_str())
                .map(|r| r.delta_principal)
        };
        let vals: Vec<Option<f64>> = COMPARE_ORDER.iter().map(|&m| delta(m)).collect();
        let orc = oracle(rc, e);
        let exact: Vec<f64> = COMPARE_ORDER
            .iter()
            .zip(&vals)
            .filter(|(m, _)| !approximate(**m))
            .filter_map(|(_, v)| *v)
            .chain(orc)
            .collect();
        let mut pair_dev = 0.0f64;
        for i in 0..exact.len() {
            for j in i + 1..exact.len() {
                pair_dev = pair_dev.max(diff_mod_pi(exact[i], exact[j]).abs());
            }
        }
        let reference = vals[0].or(orc);
        for (k, v) in vals.iter().chain(std::iter::once(&orc)).enumerate() {
            if let (Some(v), Some(r)) = (v, reference) {
                worst[k] = worst[k].max(diff_mod_pi(*v, r).abs());
            }
        }
        worst[7] = worst[7].max(pair_dev);
        let mut row: Vec<Cell> = vec![e.into()];
        row.extend(vals.iter().map(|&v| Cell::from(v)));
        row.push(orc.into());
        row.push(pair_dev.into());
        t.push(row);
    }
    let mut summary: Vec<Cell> = vec!["max".into()];
    summary.extend(worst.iter().map(|&w| Cell::from(w)));
    t.push(summary);
    Ok((t, out.skipped))
}

pub fn milne(rc: &RunConfig) -> CliResult<Table> {
    let blocks = map_energies(rc, |e| {
        let fail = |err| CliError::solver("milne", e, err);
        let ctx = rc.context(e).map_err(fail)?;
        let sol = solve_milne(&ctx, (ctx.r_min(), ctx.r_max()), MilneInit::Jwkb, &rc.tol).map_err(fail)?;
        let sol = milne_phase(sol, &ctx, &rc.tol).map_err(fail)?;
        let res = residual_profile(&sol, &ctx).map_err(fail)?;
        let pair = build_fg(&sol).map_err(fail)?;
        let phi = sol.phi().map_err(fail)?;
        let rows: Vec<Vec<Cell>> = sol
            .alpha
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let p = pair.eval(r);
                vec![e.into(), r.into(), sol.alpha.values()[i].into(), phi.values()[i].into(), p.f.into(), p.g.into(), res[i].into()]
            })
            .collect();
        Ok(rows)
    })?;
    let mut t = Table::new("milne", &["energy", "r", "alpha", "phi", "f", "g", "residual"]);
    blocks.into_iter().flatten().for_each(|row| t.push(row));
    Ok(t)
}

pub fn vpa(rc: &RunConfig) -> CliResult<Table> {
    let blocks = map_energies(rc, |e| {
        let fail = |err| CliError::solver("vpa_partitioned", e, err);
        let ctx = rc.context(e).map_err(fail)?;
        let pair = reference_pair(&ctx, &rc.tol).map_err(fail)?;
        let d = solve_partitioned(&ctx, pair, &rc.tol).map_err(fail)?;
        let p = partitioned_profile(&d, &ctx, &rc.tol).map_err(fail)?;
        Ok((0..p.r.len())
            .map(|i| vec![e.into(), p.r[i].into(), p.delta[i].into(), p.alpha[i].into(), p.residual[i].into()])
            .collect::<Vec<Vec<Cell>>>())
    })?;
    let mut t = Table::new("vpa", &["energy", "r", "delta", "alpha", "F_residual"]);
    blocks.into_iter().flatten().for_each(|row| t.push(row));
    Ok(t)
}

pub const DEFAULT_EPS: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];

pub fn variational(rc: &RunConfig, shapes: &[Perturbation], eps: &[f64], sign: AdjointSign) -> CliResult<Table> {
    let adjoint = match sign {
        AdjointSign::Correct => "correct",
        AdjointSign::Flipped => "flipped",
    };
    let blocks = map_energies(rc, |e| {
        let fail = |err| CliError::solver("variational", e, err);
        let ctx = rc.context(e).map_err(fail)?;
        let mut rows = Vec::new();
        for &shape in shapes {
            let fit = error_order_diagnostic(&ctx, shape, eps, sign, &rc.tol).map_err(fail)?;
            for s in &fit.samples {
                rows.push(vec![
                    e.into(),
                    shape.as_str().into(),
                    adjoint.into(),
                    s.eps.into(),
                    s.trial_error.into(),
                    s.variational_error.into(),
                    fit.slope.into(),
                ]);
            }
        }
        Ok(rows)
    })?;
    let mut t = Table::new(
        "variational",
        &["energy", "shape", "adjoint", "eps", "delta_t_error", "delta_v_error", "slope"],
    );
    blocks.into_iter().flatten().for_each(|row| t.push(row));
    Ok(t)
}

pub fn default_gauges() -> Vec<GaugeFunction<f64>> {
    vec![
        GaugeFunction::Zero,
        GaugeFunction::MilneInverseSquare,
        GaugeFunction::Scaled(0.5),
        GaugeFunction::DampedSine,
    ]
}

pub fn gauge_check(rc: &RunConfig, gauges: &[GaugeFunction<f64>]) -> CliResult<Table> {
    let blocks = map_energies(rc, |e| {
        let fail = |err| CliError::solver("gauge", e, err);
        let ctx = rc.context(e).map_err(fail)?;
        let sol = solve_milne(&ctx, (ctx.r_min(), ctx.r_max()), MilneInit::Jwkb, &rc.tol).map_err(fail)?;
        let mut rows = Vec::new();
        for gf in gauges {
            let rep = gauge_residual(&sol, gf, &ctx).map_err(fail)?;
            let c = match gf {
                GaugeFunction::Scaled(c) if *c != 0.0 => *c,
                _ => 1.0,
            };
            let canc = imaginary_cancellation_check(&sol, c).map_err(fail)?;
            rows.push(vec![
                e.into(),
                rep.beta_tag.clone().into(),
                rep.max_abs_residual.into(),
                rep.max_imag_residual.into(),
                rep.scale.into(),
                rep.relative().into(),
                (canc.max_abs / canc.scale.max(f64::MIN_POSITIVE)).into(),
            ]);
        }
        Ok(rows)
    })?;
    let mut t = Table::new(
        "gauge-check",
        &[
            "energy",
            "beta",
            "max_abs_residual",
            "max_imag_residual",
            "scale",
            "relative_residual",
            "cancellation_relative",
        ],
    );
    blocks.into_iter().flatten().for_each(|row| t.push(row));
    Ok(t)
}

pub const MIN_REPEATS: usize = 5;

/// Per method: the whole energy sweep timed `repeats` times on one thread.
pub fn bench(rc: &RunConfig, repeats: usize) -> CliResult<Table> {
    if repeats < MIN_REPEATS {
        return Err(CliError::Config(format!("repeats: at least {MIN_REPEATS} required, got {repeats}")));
    }
    let mut t = Table::new(
        "bench",
        &["method", "repeats", "median_seconds", "min_seconds", "step_count", "max_residual"],
    );
    for m in rc.methods() {
        let mut times = Vec::with_capacity(repeats);
        let (mut steps, mut residual) = (0usize, 0.0f64);
        for _ in 0..repeats {
            let start = Instant::now();
            let (mut s, mut res) = (0usize, 0.0f64);
            for &e in &rc.energies {
                let ctx = rc.context(e).map_err(|err| CliError::solver("setup", e, err))?;
                let (r, _) = solve_one(m, &ctx, &rc.tol).map_err(|err| CliError::solver(m.as_str(), e, err))?;
                s += r.diagnostics.step_count;
                res = res.max(r.diagnostics.max_residual);
            }
            times.push(start.elapsed().as_secs_f64());
            (steps, residual) = (s, res);
        }
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        t.push(vec![
            m.as_str().into(),
            repeats.into(),
            median(&times).into(),
            times[0].into(),
            steps.into(),
            residual.into(),
        ]);
    }
    Ok(t)
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Rows of a rendered JSON document, for tests and scripting.
pub fn json_rows(doc: &str) -> Vec<Value> {
    serde_json::from_str::<Value>(doc)
        .ok()
        .and_then(|v| v.get("rows").cloned())
        .and_then(|v| v.as_array().cloned())
        .unwrap_or_default()
}
