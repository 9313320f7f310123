//! Adjoint-corrected phase shift from a trial phase function.
//!
//! For a trial `δ_t` with `δ_t(r_min) = 0`,
//! `δ_v = δ_t(r_max) − ∫ L (δ_t' − G(δ_t, r)) dr`, where the adjoint obeys
//! `L' = −L ∂G/∂δ` with `L(r_max) = 1`. First-order errors of the trial
//! cancel, leaving `δ_v − δ = O(‖δ_t − δ‖²)`.

use crate::direct::{Diagnostics, Method, PhaseShiftResult};
use crate::freepair::BasePair;
use crate::jwkb::find_turning_point;
use crate::numerics::{cumulative_quadrature, integrate_ivp_with_stops, quadrature_with_stops, union_nodes};
use crate::numerics::{IntegratorConfig, Trace};
use crate::potentials::ScatteringContext;
use crate::vpa::{phase_rhs, reference_pair, solve_partitioned, Coupling, PhaseFunctionTrace};
use crate::{Error, Real, Result};

/// A trial phase function `δ_t(r)` with its derivative.
pub trait TrialPhase<T: Real> {
    fn span(&self) -> (T, T);

    /// `(δ_t, δ_t')` at `r`.
    fn eval(&self, r: T) -> (T, T);

    /// Radii where `δ_t'` may jump.
    fn breakpoints(&self) -> Vec<T> {
        Vec::new()
    }
}

impl<T: Real> TrialPhase<T> for PhaseFunctionTrace<T> {
    fn span(&self) -> (T, T) {
        (self.delta.lo(), self.delta.hi())
    }

    fn eval(&self, r: T) -> (T, T) {
        self.delta.eval_clamped(r)
    }
}

/// Tabulated trial, e.g. from a file.
#[derive(Debug, Clone)]
pub struct TabulatedTrial<T> {
    pub trace: Trace<T>,
}

impl<T: Real> TrialPhase<T> for TabulatedTrial<T> {
    fn span(&self) -> (T, T) {
        (self.trace.lo(), self.trace.hi())
    }

    fn eval(&self, r: T) -> (T, T) {
        self.trace.eval_clamped(r)
    }
}

/// Shapes `η` used to perturb an exact phase function. Each vanishes at the
/// inner end of the span; `s = (r − r_min)/(r_max − r_min)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    /// `η = s sin(π s)`.
    SineRamp,
    /// `η = s²`.
    Quadratic,
    /// `η = 1 − exp(−4 s)`.
    Saturating,
    /// `η = 0`.
    Zero,
}

impl Perturbation {
    pub const SHAPES: [Perturbation; 3] = [Perturbation::SineRamp, Perturbation::Quadratic, Perturbation::Saturating];

    pub fn as_str(self) -> &'static str {
        match self {
            Perturbation::SineRamp => "sine-ramp",
            Perturbation::Quadratic => "quadratic",
            Perturbation::Saturating => "saturating",
            Perturbation::Zero => "zero",
        }
    }

    /// `(η, η')` at `r` for the span `(lo, hi)`.
    pub fn eval<T: Real>(self, r: T, (lo, hi): (T, T)) -> (T, T) {
        let len = hi - lo;
        let s = (r - lo) / len;
        let pi = T::PI();
        let (v, ds) = match self {
            Perturbation::SineRamp => ((pi * s).sin() * s, (pi * s).sin() + pi * s * (pi * s).cos()),
            Perturbation::Quadratic => (s * s, T::lit(2.0) * s),
            Perturbation::Saturating => {
                let e = (-T::lit(4.0) * s).exp();
                (T::one() - e, T::lit(4.0) * e)
            }
            Perturbation::Zero => (T::zero(), T::zero()),
        };
        (v, ds / len)
    }
}

impl std::str::FromStr for Perturbation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Perturbation::SineRamp, Perturbation::Quadratic, Perturbation::Saturating, Perturbation::Zero]
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown perturbation '{s}'")))
    }
}

/// `δ_exact + ε η`.
pub struct PerturbedTrial<'a, T> {
    pub base: &'a PhaseFunctionTrace<T>,
    pub shape: Perturbation,
    pub eps: T,
}

impl<T: Real> TrialPhase<T> for PerturbedTrial<'_, T> {
    fn span(&self) -> (T, T) {
        self.base.span()
    }

    fn eval(&self, r: T) -> (T, T) {
        let (d, dd) = self.base.eval(r);
        let (e, de) = self.shape.eval(r, self.base.span());
        (d + self.eps * e, dd + self.eps * de)
    }
}

/// JWKB phase excess accumulated from the inner radius,
/// `δ_t(r) = ∫_{r_min}^r (√w − k) dr'` (`ℓ = 0`).
#[derive(Debug, Clone)]
pub struct JwkbTrial<'a, T> {
    ctx: &'a ScatteringContext<T>,
    phase: Trace<T>,
}

impl<'a, T: Real> JwkbTrial<'a, T> {
    pub fn new(ctx: &'a ScatteringContext<T>, span: (T, T), cfg: &IntegratorConfig<T>) -> Result<Self> {
        if ctx.ell != 0 {
            return Err(Error::UnsupportedEll(ctx.ell));
        }
        if let Some(r) = find_turning_point(ctx, span.0, span.1) {
            return Err(Error::TurningPointInSpan { r: r.as_f64() });
        }
        let k = ctx.k();
        let excess = |r: T| {
            let w = ctx.w(r);
            (w - ctx.energy) / (w.sqrt() + k)
        };
        let stops = ctx.breakpoints_within(span.0, span.1);
        let run = cumulative_quadrature(excess, span.0, span.1, &stops, cfg)?;
        let integral = run.component(0);
        Ok(Self { ctx, phase: integral })
    }

    pub fn phase(&self) -> &Trace<T> {
        &self.phase
    }
}

impl<T: Real> TrialPhase<T> for JwkbTrial<'_, T> {
    fn span(&self) -> (T, T) {
        (self.phase.lo(), self.phase.hi())
    }

    fn eval(&self, r: T) -> (T, T) {
        let (v, _) = self.phase.eval_clamped(r);
        let w = self.ctx.w(r);
        (v, (w - self.ctx.energy) / (w.sqrt() + self.ctx.k()))
    }

    fn breakpoints(&self) -> Vec<T> {
        self.ctx.breakpoints()
    }
}

/// Sign of the adjoint equation. `Flipped` (`L' = +L ∂G/∂δ`) is wrong on
/// purpose and only serves to show first-order contamination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdjointSign {
    #[default]
    Correct,
    Flipped,
}

/// Where the adjoint's boundary condition sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdjointAnchor {
    #[default]
    Outer,
    /// Not allowed: the phase is fixed at the origin, so the adjoint must be
    /// fixed at the other end.
    Origin,
}

/// Adjoint (Lagrange) function with `L(r_max) = 1`.
#[derive(Debug, Clone)]
pub struct AdjointTrace<T> {
    pub l: Trace<T>,
    pub sign: AdjointSign,
    pub step_count: usize,
}

/// Where the trial came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialSource {
    Jwkb,
    PerturbedExact,
    User,
}

impl TrialSource {
    pub fn as_str(self) -> &'static str {
        match self {
            TrialSource::Jwkb => "jwkb",
            TrialSource::PerturbedExact => "perturbed_exact",
            TrialSource::User => "user",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationalReport<T> {
    pub delta_trial_inf: T,
    pub correction: T,
    /// `delta_trial_inf − correction`.
    pub delta_variational: T,
    pub trial_source: TrialSource,
}

/// Integrates `L' = −L ∂G/∂δ(δ_t(r), r)` inward from `L(r_max) = 1`.
pub fn solve_adjoint<T: Real>(
    trial: &impl TrialPhase<T>,
    ctx: &ScatteringContext<T>,
    pair: &(impl BasePair<T> + ?Sized),
    cfg: &IntegratorConfig<T>,
) -> Result<AdjointTrace<T>> {
    solve_adjoint_with(trial, ctx, pair, AdjointSign::Correct, AdjointAnchor::Outer, cfg)
}

/// [`solve_adjoint`] with explicit sign and anchor; an origin anchor is
/// rejected.
pub fn solve_adjoint_with<T: Real>(
    trial: &impl TrialPhase<T>,
    ctx: &ScatteringContext<T>,
    pair: &(impl BasePair<T> + ?Sized),
    sign: AdjointSign,
    anchor: AdjointAnchor,
    cfg: &IntegratorConfig<T>,
) -> Result<AdjointTrace<T>> {
    if anchor == AdjointAnchor::Origin {
        return Err(Error::AdjointAnchoredAtOrigin);
    }
    let (a, b) = trial.span();
    let s = match sign {
        AdjointSign::Correct => -T::one(),
        AdjointSign::Flipped => T::one(),
    };
    let rhs = |r: T, y: &[T; 1]| {
        let (d, _) = trial.eval(r);
        let (_, g_delta) = phase_rhs(pair, Coupling::InverseWronskian, ctx.spec.short_range(r), r, d);
        [s * y[0] * g_delta]
    };
    let stops = stops_for(ctx, pair, trial, a, b);
    let sol = integrate_ivp_with_stops(rhs, [T::one()], (b, a), &stops, cfg)?;
    Ok(AdjointTrace { l: sol.component(0), sign, step_count: sol.step_count() })
}

fn stops_for<T: Real>(
    ctx: &ScatteringContext<T>,
    pair: &(impl BasePair<T> + ?Sized),
    trial: &impl TrialPhase<T>,
    a: T,
    b: T,
) -> Vec<T> {
    let inside = |v: Vec<T>| v.into_iter().filter(|&x| x > a && x < b).collect::<Vec<_>>();
    let s = union_nodes(&ctx.breakpoints_within(a, b), &inside(pair.breakpoints()));
    union_nodes(&s, &inside(trial.breakpoints()))
}

/// `δ_v = δ_t(r_max) − ∫ L (δ_t' − G(δ_t, r)) dr`.
pub fn variational_estimate<T: Real>(
    trial: &impl TrialPhase<T>,
    adj: &AdjointTrace<T>,
    ctx: &ScatteringContext<T>,
    pair: &(impl BasePair<T> + ?Sized),
    source: TrialSource,
    cfg: &IntegratorConfig<T>,
) -> Result<VariationalReport<T>> {
    let (a, b) = trial.span();
    let (d0, _) = trial.eval(a);
    if d0.abs() > T::lit(1e4) * T::epsilon() {
        return Err(Error::TrialBoundaryViolation(d0.as_f64()));
    }
    let defect = |r: T| {
        let (d, dd) = trial.eval(r);
        let (g, _) = phase_rhs(pair, Coupling::InverseWronskian, ctx.spec.short_range(r), r, d);
        let (l, _) = adj.l.eval_clamped(r);
        l * (dd - g)
    };
    let stops = stops_for(ctx, pair, trial, a, b);
    let correction = quadrature_with_stops(defect, a, b, &stops, cfg)?;
    let delta_trial_inf = trial.eval(b).0;
    Ok(VariationalReport {
        delta_trial_inf,
        correction,
        delta_variational: delta_trial_inf - correction,
        trial_source: source,
    })
}

/// Variational phase shift from the JWKB trial over `[r_min, r_max]`.
pub fn variational_phase<T: Real>(ctx: &ScatteringContext<T>, cfg: &IntegratorConfig<T>) -> Result<PhaseShiftResult<T>> {
    let span = (ctx.r_min(), ctx.r_max());
    let trial = JwkbTrial::new(ctx, span, cfg)?;
    let pair = reference_pair(ctx, cfg)?;
    let adj = solve_adjoint(&trial, ctx, pair.as_ref(), cfg)?;
    let report = variational_estimate(&trial, &adj, ctx, pair.as_ref(), TrialSource::Jwkb, cfg)?;
    let diagnostics = Diagnostics {
        max_residual: report.correction.abs(),
        step_count: adj.step_count,
        r_match: span.1,
        tolerance: cfg.abs_tol,
    };
    Ok(PhaseShiftResult::from_continuous(report.delta_variational, Method::Variational, diagnostics))
}

/// One row of an error-order scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderSample<T> {
    pub eps: T,
    /// `|δ_t(r_max) − δ|`.
    pub trial_error: T,
    /// `|δ_v − δ|`.
    pub variational_error: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderFit<T> {
    pub samples: Vec<OrderSample<T>>,
    /// Least-squares slope of `ln |δ_v − δ|` against `ln ε`.
    pub slope: T,
}

/// Scans `δ_exact + ε η` over `eps_list` and fits the order of the
/// variational error. The exact phase function comes from the partitioned
/// solver at a tolerance 100 times tighter than `cfg` (floored at 1e-13).
pub fn error_order_diagnostic<T: Real>(
    ctx: &ScatteringContext<T>,
    shape: Perturbation,
    eps_list: &[T],
    sign: AdjointSign,
    cfg: &IntegratorConfig<T>,
) -> Result<OrderFit<T>> {
    if eps_list.len() < 2 {
        return Err(Error::InvalidArgument("need at least two perturbation sizes".into()));
    }
    let tight_tol = (cfg.abs_tol * T::lit(0.01)).max(T::lit(1e-13));
    let tight = IntegratorConfig { abs_tol: tight_tol, rel_tol: tight_tol, ..*cfg };
    let pair = reference_pair(ctx, &tight)?;
    let exact = solve_partitioned(ctx, pair.clone(), &tight)?;
    let reference = exact.asymptotic();
    let mut samples = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let trial = PerturbedTrial { base: &exact, shape, eps };
        let adj = solve_adjoint_with(&trial, ctx, pair.as_ref(), sign, AdjointAnchor::Outer, &tight)?;
        let rep = variational_estimate(&trial, &adj, ctx, pair.as_ref(), TrialSource::PerturbedExact, &tight)?;
        samples.push(OrderSample {
            eps,
            trial_error: (rep.delta_trial_inf - reference).abs(),
            variational_error: (rep.delta_variational - reference).abs(),
        });
    }
    let floor = T::lit(10.0) * cfg.abs_tol;
    if samples.iter().all(|s| s.variational_error <= floor) {
        return Err(Error::DegeneratePerturbation { floor: floor.as_f64() });
    }
    let pts: Vec<(T, T)> = samples
        .iter()
        .filter(|s| s.variational_error > T::zero())
        .map(|s| (s.eps.abs().ln(), s.variational_error.ln()))
        .collect();
    Ok(OrderFit { slope: fit_slope(&pts), samples })
}

fn fit_slope<T: Real>(pts: &[(T, T)]) -> T {
    let n = T::from_usize(pts.len()).unwrap();
    let mx = pts.iter().fold(T::zero(), |s, p| s + p.0) / n;
    let my = pts.iter().fold(T::zero(), |s, p| s + p.1) / n;
    let sxy = pts.iter().fold(T::zero(), |s, p| s + (p.0 - mx) * (p.1 - my));
    let sxx = pts.iter().fold(T::zero(), |s, p| s + (p.0 - mx) * (p.0 - mx));
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_power_law() {
        let pts: Vec<(f64, f64)> = [1e-1, 1e-2, 1e-3].iter().map(|&e: &f64| (e.ln(), (3.0 * e * e).ln())).collect();
        assert!((fit_slope(&pts) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn shapes_vanish_at_the_inner_end() {
        for p in Perturbation::SHAPES {
            let (v, _) = p.eval(0.5f64, (0.5, 4.0));
            assert_eq!(v, 0.0);
            let h = 1e-6f64;
            let (a, _) = p.eval(2.0 - h, (0.5, 4.0));
            let (b, _) = p.eval(2.0 + h, (0.5, 4.0));
            let (_, d) = p.eval(2.0, (0.5, 4.0));
            assert!(((b - a) / (2.0 * h) - d).abs() < 1e-8);
        }
    }
}
