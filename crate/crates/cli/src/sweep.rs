//! Energy sweeps over one or more methods, with branch unwrapping across
//! energies.

use rayon::prelude::*;
use serde::Serialize;

use phasekit::direct::{direct_phase, Method};
use phasekit::jwkb::jwkb_phase_estimate;
use phasekit::milne::milne_phase_shift;
use phasekit::numerics::IntegratorConfig;
use phasekit::phase::unwrap_from;
use phasekit::variational::variational_phase;
use phasekit::vpa::{vpa_local_phase, vpa_partitioned_with_amplitude};
use phasekit::{Context64, Error, PhaseShift64};

use crate::config::{MethodSel, RunConfig};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub max_residual: f64,
    pub step_count: usize,
    pub r_match: f64,
    pub tolerance: f64,
}

/// One phase shift: one method at one energy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub method: String,
    pub ell: u32,
    pub energy: f64,
    pub delta_principal: f64,
    pub delta_continuous: f64,
    pub alpha_at_origin: Option<f64>,
    pub diagnostics: DiagnosticsRecord,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutcome {
    /// Ordered by energy, then by method.
    pub records: Vec<ResultRecord>,
    /// Methods left out under `--method all`, with the reason.
    pub skipped: Vec<String>,
}

/// Phase shift by `method`, plus `α(r_min)` where the method provides it.
pub fn solve_one(method: Method, ctx: &Context64, cfg: &IntegratorConfig<f64>) -> phasekit::Result<(PhaseShift64, Option<f64>)> {
    match method {
        Method::Direct => direct_phase(ctx, cfg).map(|r| (r, None)),
        Method::Jwkb => jwkb_phase_estimate(ctx, ctx.r_max(), cfg).map(|r| (r, None)),
        Method::Milne => milne_phase_shift(ctx, cfg).map(|r| (r, None)),
        Method::VpaLocal => vpa_local_phase(ctx, cfg).map(|r| (r, None)),
        Method::VpaPartitioned => vpa_partitioned_with_amplitude(ctx, cfg).map(|(r, a)| (r, Some(a))),
        Method::Variational => variational_phase(ctx, cfg).map(|r| (r, None)),
    }
}

/// Runs `f` on every energy, concurrently unless the config says otherwise.
/// Results keep the energy order; the first failure in that order wins.
pub fn map_energies<R: Send>(rc: &RunConfig, f: impl Fn(f64) -> CliResult<R> + Sync) -> CliResult<Vec<R>> {
    let out: Vec<CliResult<R>> = if rc.concurrent {
        rc.energies.par_iter().map(|&e| f(e)).collect()
    } else {
        rc.energies.iter().map(|&e| f(e)).collect()
    };
    out.into_iter().collect()
}

fn not_applicable(err: &Error) -> bool {
    matches!(err, Error::UnsupportedEll(_) | Error::TurningPointInSpan { .. })
}

fn record(method: Method, ell: u32, energy: f64, res: &PhaseShift64, alpha0: Option<f64>) -> ResultRecord {
    let d = &res.diagnostics;
    ResultRecord {
        method: method.as_str().into(),
        ell,
        energy,
        delta_principal: res.delta_principal,
        delta_continuous: res.delta_continuous,
        alpha_at_origin: alpha0,
        diagnostics: DiagnosticsRecord {
            max_residual: d.max_residual,
            step_count: d.step_count,
            r_match: d.r_match,
            tolerance: d.tolerance,
        },
    }
}

/// Every selected method at every energy. `delta_continuous` is unwrapped
/// per method along the energy order, anchored at the first energy.
pub fn run_sweep(rc: &RunConfig) -> CliResult<SweepOutcome> {
    let methods = rc.methods();
    let lenient = rc.method == MethodSel::All;
    let rows = map_energies(rc, |e| {
        let ctx = rc.context(e).map_err(|err| CliError::solver("setup", e, err))?;
        let mut row = Vec::with_capacity(methods.len());
        for &m in &methods {
            match solve_one(m, &ctx, &rc.tol) {
                Ok((res, a)) => row.push(Ok(record(m, rc.ell, e, &res, a))),
                Err(err) if lenient && not_applicable(&err) => row.push(Err(format!("{m} at E = {e}: {err}"))),
                Err(err) => return Err(CliError::solver(m.as_str(), e, err)),
            }
        }
        Ok(row)
    })?;

    let mut grid: Vec<Vec<Option<ResultRecord>>> = Vec::with_capacity(rows.len());
    let mut skipped = Vec::new();
    for row in rows {
        grid.push(
            row.into_iter()
                .map(|cell| match cell {
                    Ok(r) => Some(r),
                    Err(msg) => {
                        skipped.push(msg);
                        None
                    }
                })
                .collect(),
        );
    }
    for j in 0..methods.len() {
        let idx: Vec<usize> = (0..grid.len()).filter(|&i| grid[i][j].is_some()).collect();
        let raw: Vec<f64> = idx.iter().map(|&i| grid[i][j].as_ref().unwrap().delta_continuous).collect();
        for (&i, v) in idx.iter().zip(unwrap_from(&raw, 0)) {
            grid[i][j].as_mut().unwrap().delta_continuous = v;
        }
    }
    Ok(SweepOutcome { records: grid.into_iter().flatten().flatten().collect(), skipped })
}
