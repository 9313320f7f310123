//! Variable-phase solvers: the local-wavenumber form and the form
//! partitioned against a reference pair `(f, g)` of the long-range problem.

use std::sync::Arc;

use crate::direct::{regular_residual, Diagnostics, Method, PhaseShiftResult};
use crate::freepair::{BasePair, FreePair};
use crate::jwkb::find_turning_point;
use crate::milne::{build_fg, milne_phase, milne_phase_shift, solve_milne, MilneInit};
use crate::numerics::{integrate_ivp_with_stops, node_residuals, union_nodes, IntegratorConfig, Trace};
use crate::potentials::{Model, PotentialSpec, ScatteringContext};
use crate::{Error, Real, Result};

/// Shared handle to a reference pair.
pub type SharedPair<T> = Arc<dyn BasePair<T> + Send + Sync>;

/// Coefficient in front of `v_s (f cos δ − g sin δ)²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coupling {
    /// `1/W`, the value that follows from the constrained parametrization.
    #[default]
    InverseWronskian,
    /// `2/W`; kept only as a negative control.
    TwoOverWronskian,
}

impl Coupling {
    fn factor<T: Real>(self, wronskian: T) -> T {
        match self {
            Coupling::InverseWronskian => wronskian.recip(),
            Coupling::TwoOverWronskian => T::lit(2.0) / wronskian,
        }
    }
}

/// One smooth piece of a local-form solution.
#[derive(Debug, Clone)]
pub struct LocalSegment<T> {
    pub phi: Trace<T>,
    pub alpha: Trace<T>,
}

/// Solution of `φ' = k + (k'/2k) sin 2φ`, `α' = −(k'/k) α cos²φ`.
///
/// Where `w` jumps, `φ` and `α` jump too (so that `u` and `u'` stay
/// continuous); the solution is therefore stored as one segment per smooth
/// piece.
#[derive(Debug, Clone)]
pub struct LocalFormSolution<T> {
    pub segments: Vec<LocalSegment<T>>,
    /// Asymptotic wavenumber.
    pub k: T,
    pub step_count: usize,
}

impl<T: Real> LocalFormSolution<T> {
    pub fn lo(&self) -> T {
        self.segments[0].phi.lo()
    }

    pub fn hi(&self) -> T {
        self.segments[self.segments.len() - 1].phi.hi()
    }

    fn segment(&self, r: T) -> Result<&LocalSegment<T>> {
        if r < self.lo() || r > self.hi() || r.is_nan() {
            return Err(Error::OutOfRange { r: r.as_f64(), lo: self.lo().as_f64(), hi: self.hi().as_f64() });
        }
        Ok(self.segments.iter().find(|s| r < s.phi.hi()).unwrap_or(&self.segments[self.segments.len() - 1]))
    }

    /// `φ(r)`, right-continuous at jumps.
    pub fn phi_at(&self, r: T) -> Result<T> {
        self.segment(r)?.phi.eval(r)
    }

    pub fn alpha_at(&self, r: T) -> Result<T> {
        self.segment(r)?.alpha.eval(r)
    }

    /// `φ(r_end) − k r_end`.
    pub fn delta(&self) -> T {
        let last = &self.segments[self.segments.len() - 1];
        last.phi.last_value() - self.k * self.hi()
    }

    /// `u = α sin φ` with `u' = α √w cos φ` on all nodes.
    pub fn reconstruction(&self, ctx: &ScatteringContext<T>) -> Result<Trace<T>> {
        let (mut nodes, mut u, mut du) = (Vec::new(), Vec::new(), Vec::new());
        for seg in &self.segments {
            for (i, &r) in seg.phi.nodes().iter().enumerate() {
                if nodes.last().is_some_and(|&x| x >= r) {
                    continue;
                }
                let (phi, alpha) = (seg.phi.values()[i], seg.alpha.values()[i]);
                let right = i == 0;
                let k = ctx.w_one_sided(r, right).0.sqrt();
                nodes.push(r);
                u.push(alpha * phi.sin());
                du.push(alpha * k * phi.cos());
            }
        }
        Trace::new(nodes, u, du)
    }
}

/// Integrates the local form over `span` for `ℓ = 0`, from `φ = 0`, `α = 1`.
///
/// Requires `w > 0` on the span. At a jump of `w` the exact jump conditions
/// `α₊ sin φ₊ = α₋ sin φ₋`, `α₊ k₊ cos φ₊ = α₋ k₋ cos φ₋` are applied.
pub fn solve_local_form<T: Real>(
    ctx: &ScatteringContext<T>,
    span: (T, T),
    cfg: &IntegratorConfig<T>,
) -> Result<LocalFormSolution<T>> {
    if ctx.ell != 0 {
        return Err(Error::UnsupportedEll(ctx.ell));
    }
    let (a, b) = span;
    if !(a >= T::zero() && b > a) {
        return Err(Error::InvalidArgument(format!("invalid span [{a}, {b}]")));
    }
    if let Some(r) = find_turning_point(ctx, a, b) {
        return Err(Error::TurningPointInSpan { r: r.as_f64() });
    }
    let mut edges = vec![a];
    edges.extend(ctx.breakpoints_within(a, b));
    edges.push(b);

    let half = T::lit(0.5);
    let mut state = [T::zero(), T::one()];
    let mut segments = Vec::with_capacity(edges.len() - 1);
    let mut steps = 0;
    for (j, pair) in edges.windows(2).enumerate() {
        let (lo, hi) = (pair[0], pair[1]);
        if j > 0 {
            state = jump(ctx, lo, state);
        }
        let rhs = |r: T, y: &[T; 2]| {
            let (w, dw) = if r <= lo {
                ctx.w_one_sided(r, true)
            } else if r >= hi {
                ctx.w_one_sided(r, false)
            } else {
                ctx.w_with_derivative(r)
            };
            // k'/k = w'/(2w)
            let ratio = half * dw / w;
            let (s, c) = y[0].sin_cos();
            [w.sqrt() + ratio * s * c, -ratio * y[1] * c * c]
        };
        let sol = integrate_ivp_with_stops(rhs, state, (lo, hi), &[], cfg)?;
        steps += sol.step_count();
        state = sol.last();
        segments.push(LocalSegment { phi: sol.component(0), alpha: sol.component(1) });
    }
    Ok(LocalFormSolution { segments, k: ctx.k(), step_count: steps })
}

fn jump<T: Real>(ctx: &ScatteringContext<T>, r: T, state: [T; 2]) -> [T; 2] {
    let k1 = ctx.w_one_sided(r, false).0.sqrt();
    let k2 = ctx.w_one_sided(r, true).0.sqrt();
    let [phi, alpha] = state;
    let (s, c) = phi.sin_cos();
    let two_pi = T::lit(2.0) * T::PI();
    let mut d = (k2 * s).atan2(k1 * c) - phi;
    d = d - two_pi * (d / two_pi).round();
    let ratio = k1 / k2;
    [phi + d, alpha * (s * s + ratio * ratio * c * c).sqrt()]
}

/// Local-form phase shift, integrated from the origin to `r_max`.
pub fn vpa_local_phase<T: Real>(ctx: &ScatteringContext<T>, cfg: &IntegratorConfig<T>) -> Result<PhaseShiftResult<T>> {
    let r_max = ctx.r_max();
    let sol = solve_local_form(ctx, (T::zero(), r_max), cfg)?;
    // the residual needs stencil-sized steps; the solver's own steps can be
    // as long as the whole span where w is constant
    let h = T::lit(0.02).min(T::PI() / (T::lit(50.0) * ctx.k()));
    let dense = solve_local_form(ctx, (T::zero(), r_max), &cfg.max_step(h))?;
    let u = dense.reconstruction(ctx)?;
    let diagnostics = Diagnostics {
        max_residual: regular_residual(ctx, &u),
        step_count: sol.step_count,
        r_match: r_max,
        tolerance: cfg.abs_tol,
    };
    Ok(PhaseShiftResult::from_continuous(sol.delta(), Method::VpaLocal, diagnostics))
}

/// Short-range phase function `δ(r)` against a reference pair.
#[derive(Clone)]
pub struct PhaseFunctionTrace<T> {
    /// `δ` with `δ'` as slope and one-sided `δ''` attached.
    pub delta: Trace<T>,
    pub pair: SharedPair<T>,
    pub coupling: Coupling,
    pub step_count: usize,
}

impl<T: Real> std::fmt::Debug for PhaseFunctionTrace<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PhaseFunctionTrace")
            .field("delta", &self.delta)
            .field("coupling", &self.coupling)
            .field("step_count", &self.step_count)
            .finish()
    }
}

impl<T: Real> PhaseFunctionTrace<T> {
    /// `δ(r_max)`, the short-range phase shift.
    pub fn asymptotic(&self) -> T {
        self.delta.last_value()
    }

    /// The phase right-hand side `G(δ, r)` and `∂G/∂δ` for this trace's
    /// pair and coupling.
    pub fn rhs(&self, ctx: &ScatteringContext<T>, r: T, delta: T) -> (T, T) {
        phase_rhs(self.pair.as_ref(), self.coupling, ctx.spec.short_range(r), r, delta)
    }
}

/// `G = −c v_s Q²` and `∂G/∂δ = 2 c v_s Q P` with `Q = f cos δ − g sin δ`,
/// `P = f sin δ + g cos δ` and `c` the coupling factor.
pub fn phase_rhs<T: Real>(pair: &(impl BasePair<T> + ?Sized), coupling: Coupling, v: T, r: T, delta: T) -> (T, T) {
    if v == T::zero() {
        return (T::zero(), T::zero());
    }
    let c = coupling.factor(pair.wronskian());
    let p = pair.eval(r);
    let (s, co) = delta.sin_cos();
    let q = p.f * co - p.g * s;
    let pp = p.f * s + p.g * co;
    (-c * v * q * q, T::lit(2.0) * c * v * q * pp)
}

/// `dG/dr` along `δ(r)` (for the trace's second derivative).
fn phase_rhs_total_derivative<T: Real>(
    pair: &(impl BasePair<T> + ?Sized),
    coupling: Coupling,
    (v, dv): (T, T),
    r: T,
    delta: T,
) -> T {
    if v == T::zero() && dv == T::zero() {
        return T::zero();
    }
    let c = coupling.factor(pair.wronskian());
    let p = pair.eval(r);
    let (s, co) = delta.sin_cos();
    let q = p.f * co - p.g * s;
    let qr = p.df * co - p.dg * s;
    let pp = p.f * s + p.g * co;
    let g = -c * v * q * q;
    let g_delta = T::lit(2.0) * c * v * q * pp;
    -c * (dv * q * q + T::lit(2.0) * v * q * qr) + g_delta * g
}

fn short_one_sided<T: Real>(ctx: &ScatteringContext<T>, r: T, right: bool) -> (T, T) {
    let eps = T::lit(1e-12) * (T::one() + r.abs());
    if ctx.breakpoints().iter().any(|&b| (b - r).abs() <= eps) {
        ctx.spec.short_range_with_derivative(if right { r + eps } else { r - eps })
    } else {
        ctx.spec.short_range_with_derivative(r)
    }
}

/// Reference pair for `ctx`: the free Riccati–Bessel pair when there is no
/// long-range potential, otherwise the Milne pair of the long-range problem.
pub fn reference_pair<T: Real>(ctx: &ScatteringContext<T>, cfg: &IntegratorConfig<T>) -> Result<SharedPair<T>> {
    match &ctx.spec.long_range {
        Some(m) if !m.is_zero() => {
            let reference = reference_context(ctx)?;
            let sol = solve_milne(&reference, (reference.r_min(), ctx.r_max()), MilneInit::Jwkb, cfg)?;
            let sol = milne_phase(sol, &reference, cfg)?;
            Ok(Arc::new(build_fg(&sol)?))
        }
        _ => Ok(Arc::new(FreePair::for_context(ctx)?)),
    }
}

/// The long-range problem alone, sharing `r_max` with `ctx`.
fn reference_context<T: Real>(ctx: &ScatteringContext<T>) -> Result<ScatteringContext<T>> {
    let long = ctx.spec.long_range.clone().unwrap_or(Model::Zero);
    let mut spec = PotentialSpec::new(long);
    spec.cutoff = None;
    ScatteringContext::new(spec, ctx.ell, ctx.energy)?.with_r_max(ctx.r_max())
}

/// Integrates `δ' = G(δ, r)` outward from `δ(r_min) = 0` to `r_max`.
pub fn solve_partitioned<T: Real>(
    ctx: &ScatteringContext<T>,
    pair: SharedPair<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<PhaseFunctionTrace<T>> {
    solve_partitioned_with(ctx, pair, Coupling::InverseWronskian, cfg)
}

/// [`solve_partitioned`] with an explicit coupling coefficient.
pub fn solve_partitioned_with<T: Real>(
    ctx: &ScatteringContext<T>,
    pair: SharedPair<T>,
    coupling: Coupling,
    cfg: &IntegratorConfig<T>,
) -> Result<PhaseFunctionTrace<T>> {
    partitioned_on(ctx, pair, coupling, &[], cfg)
}

fn partitioned_on<T: Real>(
    ctx: &ScatteringContext<T>,
    pair: SharedPair<T>,
    coupling: Coupling,
    extra_stops: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<PhaseFunctionTrace<T>> {
    let (a, b) = (ctx.r_min(), ctx.r_max());
    if pair.ell() != ctx.ell {
        return Err(Error::InvalidArgument(format!("pair has ell {} but problem has {}", pair.ell(), ctx.ell)));
    }
    let (v0, _) = ctx.spec.short_range_with_derivative(a);
    if !v0.is_finite() {
        return Err(Error::SingularShortRange);
    }
    let stops = union_nodes(&union_nodes(&ctx.breakpoints_within(a, b), &pair.breakpoints()), extra_stops);
    let p = pair.as_ref();
    let rhs = |r: T, y: &[T; 1]| [phase_rhs(p, coupling, ctx.spec.short_range(r), r, y[0]).0];
    let sol = integrate_ivp_with_stops(rhs, [T::zero()], (a, b), &stops, cfg)?;
    let delta = sol.component(0);
    let second = |right: bool| -> Vec<T> {
        delta
            .nodes()
            .iter()
            .zip(delta.values())
            .map(|(&r, &d)| phase_rhs_total_derivative(p, coupling, short_one_sided(ctx, r, right), r, d))
            .collect()
    };
    let (right, left) = (second(true), second(false));
    let delta = delta.with_seconds(right, left)?;
    Ok(PhaseFunctionTrace { delta, pair, coupling, step_count: sol.step_count() })
}

/// Amplitude paired with a phase function.
#[derive(Debug, Clone)]
pub struct AmplitudeTrace<T> {
    /// `α` with `α(r_max) = 1`.
    pub alpha: Trace<T>,
    pub step_count: usize,
}

impl<T: Real> AmplitudeTrace<T> {
    /// `α` at the inner end of the span.
    pub fn at_origin(&self) -> T {
        self.alpha.first_value()
    }
}

/// Integrates `α' = −(α/2) ∂G/∂δ` inward from `α(r_max) = 1` along the
/// phase function.
pub fn amplitude_from_phase<T: Real>(
    dtrace: &PhaseFunctionTrace<T>,
    ctx: &ScatteringContext<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<AmplitudeTrace<T>> {
    amplitude_on(dtrace, ctx, &[], cfg)
}

fn amplitude_on<T: Real>(
    dtrace: &PhaseFunctionTrace<T>,
    ctx: &ScatteringContext<T>,
    extra_stops: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<AmplitudeTrace<T>> {
    let (a, b) = (dtrace.delta.lo(), dtrace.delta.hi());
    let half = T::lit(0.5);
    let rhs = |r: T, y: &[T; 1]| {
        let (d, _) = dtrace.delta.eval_clamped(r);
        let (_, g_delta) = dtrace.rhs(ctx, r, d);
        [-half * y[0] * g_delta]
    };
    let mut stops = union_nodes(&ctx.breakpoints_within(a, b), &dtrace.pair.breakpoints());
    stops = union_nodes(&stops, extra_stops);
    let sol = integrate_ivp_with_stops(rhs, [T::one()], (b, a), &stops, cfg)?;
    Ok(AmplitudeTrace { alpha: sol.component(0), step_count: sol.step_count() })
}

/// `F = α (f cos δ − g sin δ)` with the constrained slope
/// `F' = α (f' cos δ − g' sin δ)`, on the amplitude nodes.
pub fn reconstruction<T: Real>(dtrace: &PhaseFunctionTrace<T>, amp: &AmplitudeTrace<T>) -> Result<Trace<T>> {
    reconstruction_on(dtrace, amp, amp.alpha.nodes())
}

fn reconstruction_on<T: Real>(dtrace: &PhaseFunctionTrace<T>, amp: &AmplitudeTrace<T>, nodes: &[T]) -> Result<Trace<T>> {
    let mut values = Vec::with_capacity(nodes.len());
    let mut slopes = Vec::with_capacity(nodes.len());
    for &r in nodes {
        let alpha = amp.alpha.eval(r)?;
        let d = dtrace.delta.eval(r)?;
        let p = dtrace.pair.eval(r);
        let (s, c) = d.sin_cos();
        values.push(alpha * (p.f * c - p.g * s));
        slopes.push(alpha * (p.df * c - p.dg * s));
    }
    Trace::new(nodes.to_vec(), values, slopes)
}

/// Scaled residual of `F'' + w F` (full potential) from three-node stencils
/// on a uniform grid of about 100 points per wavelength, at most 0.02 apart.
/// Phase and amplitude are re-integrated so that both land on every grid
/// node; interpolating `δ` between the solver's own nodes would dominate
/// the residual.
pub fn f_residual<T: Real>(
    dtrace: &PhaseFunctionTrace<T>,
    ctx: &ScatteringContext<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<T> {
    let (_, _, f) = dense_reconstruction(dtrace, ctx, cfg)?;
    Ok(regular_residual(ctx, &f))
}

/// Phase function, amplitude and scaled residual of `F` on the grid used by
/// [`f_residual`]. Nodes without a residual stencil carry `None`.
#[derive(Debug, Clone)]
pub struct PartitionedProfile<T> {
    pub r: Vec<T>,
    pub delta: Vec<T>,
    pub alpha: Vec<T>,
    pub residual: Vec<Option<T>>,
}

pub fn partitioned_profile<T: Real>(
    dtrace: &PhaseFunctionTrace<T>,
    ctx: &ScatteringContext<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<PartitionedProfile<T>> {
    let (dense, amp, f) = dense_reconstruction(dtrace, ctx, cfg)?;
    let scale = f.max_abs().max(T::min_positive_value());
    let residual = node_residuals(&f, &ctx.breakpoints(), |r, v, d2| d2 + ctx.w(r) * v)
        .into_iter()
        .map(|x| x.map(|x| x / scale))
        .collect();
    let r = f.nodes().to_vec();
    let delta = r.iter().map(|&x| dense.delta.eval(x)).collect::<Result<_>>()?;
    let alpha = r.iter().map(|&x| amp.alpha.eval(x)).collect::<Result<_>>()?;
    Ok(PartitionedProfile { r, delta, alpha, residual })
}

fn dense_reconstruction<T: Real>(
    dtrace: &PhaseFunctionTrace<T>,
    ctx: &ScatteringContext<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<(PhaseFunctionTrace<T>, AmplitudeTrace<T>, Trace<T>)> {
    let (a, b) = (dtrace.delta.lo(), dtrace.delta.hi());
    let h = T::lit(0.02).min(T::PI() / (T::lit(50.0) * ctx.k()));
    let n = ((b - a) / h).ceil().to_usize().unwrap_or(2).clamp(2, 400_000) + 1;
    let bps = ctx.breakpoints_within(a, b);
    let spacing = (b - a) / T::from_usize(n - 1).unwrap();
    let mut grid: Vec<T> = Trace::uniform_nodes(a, b, n)
        .into_iter()
        .filter(|&x| bps.iter().all(|&p| (x - p).abs() > T::lit(0.25) * spacing))
        .collect();
    grid = union_nodes(&grid, &bps);
    let dense = partitioned_on(ctx, dtrace.pair.clone(), dtrace.coupling, &grid, cfg)?;
    let amp = amplitude_on(&dense, ctx, &grid, cfg)?;
    let f = reconstruction_on(&dense, &amp, &grid)?;
    Ok((dense, amp, f))
}

/// `δ(r0)`: the phase shift of the short-range potential truncated beyond `r0`.
pub fn truncation_phase<T: Real>(dtrace: &PhaseFunctionTrace<T>, r0: T) -> Result<T> {
    dtrace.delta.eval(r0)
}

/// Partitioned phase shift: short-range phase against the reference pair,
/// plus the reference problem's own phase when a long-range part is present.
pub fn vpa_partitioned_phase<T: Real>(
    ctx: &ScatteringContext<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<PhaseShiftResult<T>> {
    Ok(partitioned_result(ctx, cfg)?.0)
}

/// [`vpa_partitioned_phase`] together with the amplitude `α(r_min)` of the
/// partitioned solution (with `α(r_max) = 1`).
pub fn vpa_partitioned_with_amplitude<T: Real>(
    ctx: &ScatteringContext<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<(PhaseShiftResult<T>, T)> {
    let (result, dtrace) = partitioned_result(ctx, cfg)?;
    let amp = amplitude_from_phase(&dtrace, ctx, cfg)?;
    Ok((result, amp.at_origin()))
}

fn partitioned_result<T: Real>(
    ctx: &ScatteringContext<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<(PhaseShiftResult<T>, PhaseFunctionTrace<T>)> {
    let pair = reference_pair(ctx, cfg)?;
    let dtrace = solve_partitioned(ctx, pair, cfg)?;
    let mut delta = dtrace.asymptotic();
    if ctx.spec.long_range.as_ref().is_some_and(|m| !m.is_zero()) {
        delta = delta + milne_phase_shift(&reference_context(ctx)?, cfg)?.delta_continuous;
    }
    let diagnostics = Diagnostics {
        max_residual: f_residual(&dtrace, ctx, cfg)?,
        step_count: dtrace.step_count,
        r_match: ctx.r_max(),
        tolerance: cfg.abs_tol,
    };
    Ok((PhaseShiftResult::from_continuous(delta, Method::VpaPartitioned, diagnostics), dtrace))
}
