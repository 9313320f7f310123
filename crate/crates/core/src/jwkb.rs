//! The JWKB wave `u = w^{-1/4} exp(i∫√w)`, the exact identity it satisfies,
//! `[d²/dr² + w] u = [√k (k^{-1/2})''] u` with `k = √w`, and the phase-excess
//! estimate of the s-wave phase shift.

use num_complex::Complex;

use crate::direct::{Diagnostics, Method, PhaseShiftResult};
use crate::numerics::{cumulative_quadrature, quadrature_with_stops, IntegratorConfig, Trace};
use crate::potentials::ScatteringContext;
use crate::{Error, Real, Result};

/// Number of uniform probes used when scanning for turning points.
const SCAN_POINTS: usize = 4000;

/// JWKB wave sampled on the nodes of its phase quadrature.
#[derive(Debug, Clone)]
pub struct ComplexWaveTrace<T> {
    pub re: Trace<T>,
    pub im: Trace<T>,
    /// `Φ(r) = ∫_{r_a}^r √w`.
    pub phase_integral: Trace<T>,
    /// `w^{-1/4}` with its derivative.
    pub amplitude: Trace<T>,
}

impl<T: Real> ComplexWaveTrace<T> {
    pub fn nodes(&self) -> &[T] {
        self.re.nodes()
    }

    pub fn value(&self, i: usize) -> Complex<T> {
        Complex::new(self.re.values()[i], self.im.values()[i])
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }
}

/// First radius in `[a, b]` where `w ≤ 0`, probing a uniform grid, both sides
/// of every breakpoint and the endpoints.
pub fn find_turning_point<T: Real>(ctx: &ScatteringContext<T>, a: T, b: T) -> Option<T> {
    let mut probes = Trace::uniform_nodes(a, b, SCAN_POINTS);
    for bp in ctx.breakpoints_within(a, b) {
        let eps = T::lit(1e-9) * (T::one() + bp);
        probes.push(bp - eps);
        probes.push(bp + eps);
    }
    probes.sort_by(|x, y| x.partial_cmp(y).unwrap());
    probes.into_iter().find(|&r| !(ctx.w(r) > T::zero()))
}

/// `u = w^{-1/4} exp(+i ∫_{r_a}^r √w dr')` on `span`.
///
/// Nodes come from the adaptive phase quadrature; cap them with
/// `cfg.max_step` when the wave feeds a stencil check.
pub fn jwkb_wave<T: Real>(ctx: &ScatteringContext<T>, span: (T, T), cfg: &IntegratorConfig<T>) -> Result<ComplexWaveTrace<T>> {
    let (a, b) = span;
    if !(b > a) || a < T::zero() {
        return Err(Error::InvalidArgument(format!("invalid span [{a}, {b}]")));
    }
    if let Some(r) = find_turning_point(ctx, a, b) {
        return Err(Error::TurningPointInSpan { r: r.as_f64() });
    }
    let stops = ctx.breakpoints_within(a, b);
    let sol = cumulative_quadrature(|r| ctx.w(r).max(T::zero()).sqrt(), a, b, &stops, cfg)?;
    let phase = sol.component(0);
    build_wave(ctx, phase.nodes().to_vec(), phase.values().to_vec(), &stops)
}

/// [`jwkb_wave`] sampled exactly on the given increasing `nodes`; the phase
/// quadrature lands on every node (it may take extra steps in between).
pub fn jwkb_wave_on<T: Real>(ctx: &ScatteringContext<T>, nodes: &[T], cfg: &IntegratorConfig<T>) -> Result<ComplexWaveTrace<T>> {
    if nodes.len() < 2 || nodes.windows(2).any(|p| !(p[1] > p[0])) || nodes[0] < T::zero() {
        return Err(Error::InvalidArgument("grid must be increasing, non-negative, with at least two nodes".into()));
    }
    let (a, b) = (nodes[0], nodes[nodes.len() - 1]);
    if let Some(r) = find_turning_point(ctx, a, b) {
        return Err(Error::TurningPointInSpan { r: r.as_f64() });
    }
    let stops = ctx.breakpoints_within(a, b);
    let mut landing = stops.clone();
    landing.extend_from_slice(&nodes[1..nodes.len() - 1]);
    let sol = cumulative_quadrature(|r| ctx.w(r).max(T::zero()).sqrt(), a, b, &landing, cfg)?;
    let mut phase = Vec::with_capacity(nodes.len());
    let mut j = 0;
    for (&r, state) in sol.nodes().iter().zip(sol.states()) {
        if j < nodes.len() && r == nodes[j] {
            phase.push(state[0]);
            j += 1;
        }
    }
    if phase.len() != nodes.len() {
        return Err(Error::InvalidArgument("grid nodes too close together to land on".into()));
    }
    build_wave(ctx, nodes.to_vec(), phase, &stops)
}

fn build_wave<T: Real>(ctx: &ScatteringContext<T>, nodes: Vec<T>, phase_values: Vec<T>, stops: &[T]) -> Result<ComplexWaveTrace<T>> {
    let n = nodes.len();
    let quarter = T::lit(0.25);
    let mut amp = Vec::with_capacity(n);
    let mut amp_d = Vec::with_capacity(n);
    let mut amp_dl = Vec::with_capacity(n);
    let (mut re, mut re_d, mut re_dl) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    let (mut im, mut im_d, mut im_dl) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    let mut phase_d = Vec::with_capacity(n);
    for (i, &r) in nodes.iter().enumerate() {
        let (w, dw) = one_sided_w(ctx, r, stops, true);
        let (_, dw_left) = one_sided_w(ctx, r, stops, false);
        if !(w > T::zero()) {
            return Err(Error::TurningPointInSpan { r: r.as_f64() });
        }
        let k = w.sqrt();
        let amplitude = T::one() / k.sqrt();
        let phi = phase_values[i];
        let u = Complex::from_polar(amplitude, phi);
        // u' = (−w'/(4w) + i k) u
        let du = |dw: T| u * Complex::new(-quarter * dw / w, k);
        let (d_right, d_left) = (du(dw), du(dw_left));
        phase_d.push(k);
        amp.push(amplitude);
        amp_d.push(-quarter * dw / w * amplitude);
        amp_dl.push(-quarter * dw_left / w * amplitude);
        re.push(u.re);
        im.push(u.im);
        re_d.push(d_right.re);
        re_dl.push(d_left.re);
        im_d.push(d_right.im);
        im_dl.push(d_left.im);
    }
    Ok(ComplexWaveTrace {
        re: Trace::with_one_sided(nodes.clone(), re, re_d, re_dl)?,
        im: Trace::with_one_sided(nodes.clone(), im, im_d, im_dl)?,
        phase_integral: Trace::new(nodes.clone(), phase_values, phase_d)?,
        amplitude: Trace::with_one_sided(nodes, amp, amp_d, amp_dl)?,
    })
}

/// `(w, w')` with the derivative taken on one side of a breakpoint.
fn one_sided_w<T: Real>(ctx: &ScatteringContext<T>, r: T, stops: &[T], right: bool) -> (T, T) {
    let eps = T::lit(1e-12) * (T::one() + r.abs());
    let at_stop = stops.iter().any(|&s| (s - r).abs() <= eps);
    if !at_stop {
        return ctx.w_with_derivative(r);
    }
    let side = if right { r + eps } else { r - eps };
    let (_, dw) = ctx.w_with_derivative(side);
    (ctx.w(side), dw)
}

/// Residual of the identity `u'' + w u = [√k (k^{-1/2})''] u` on a sampled
/// JWKB wave, both sides from three-node stencils: the maximum over interior
/// nodes of `|LHS − RHS| / max(|LHS|, |RHS|, E)`.
///
/// Fails with `GridTooCoarse` when the stencil's own error estimate, scaled
/// the same way, exceeds `tolerance`.
pub fn jwkb_residual_check<T: Real>(wave: &ComplexWaveTrace<T>, ctx: &ScatteringContext<T>, tolerance: T) -> Result<T> {
    let nodes = wave.nodes();
    let n = nodes.len();
    if n < 3 {
        return Err(Error::GridTooCoarse { estimate: f64::INFINITY, tolerance: tolerance.as_f64() });
    }
    let stops = ctx.breakpoints();
    let mut worst = T::zero();
    let mut worst_estimate = T::zero();
    for c in 1..n - 1 {
        let (lo, hi) = (nodes[c - 1], nodes[c + 1]);
        if stops.iter().any(|&s| s > lo && s < hi) || !wave.amplitude.is_smooth_at(c) {
            continue;
        }
        let r = nodes[c];
        let u = wave.value(c);
        let d2re = wave.re.second_derivative(r)?;
        let d2im = wave.im.second_derivative(r)?;
        let d2a = wave.amplitude.second_derivative(r)?;
        let lhs = Complex::new(d2re.value, d2im.value) + u * ctx.w(r);
        let rhs = u * (d2a.value / wave.amplitude.values()[c]);
        let scale = lhs.norm().max(rhs.norm()).max(ctx.energy);
        worst = worst.max((lhs - rhs).norm() / scale);
        let est = (d2re.error_estimate.hypot(d2im.error_estimate)
            + u.norm() * d2a.error_estimate / wave.amplitude.values()[c])
            / scale;
        worst_estimate = worst_estimate.max(est);
    }
    if worst_estimate > tolerance {
        return Err(Error::GridTooCoarse { estimate: worst_estimate.as_f64(), tolerance: tolerance.as_f64() });
    }
    Ok(worst)
}

/// s-wave phase excess of the JWKB wave over the free wave,
/// `δ_JWKB = ∫₀^{r_max} (√w − k) dr`.
///
/// This convention is a choice; the JWKB approximation itself defines no
/// phase shift. `max_residual` reports the largest neglected term
/// `|(k^{-1/2})''/k^{-1/2}| / w` on the quadrature grid.
pub fn jwkb_phase_estimate<T: Real>(ctx: &ScatteringContext<T>, r_max: T, cfg: &IntegratorConfig<T>) -> Result<PhaseShiftResult<T>> {
    if ctx.ell != 0 {
        return Err(Error::UnsupportedEll(ctx.ell));
    }
    if let Some(r) = find_turning_point(ctx, T::zero(), r_max) {
        return Err(Error::TurningPointInSpan { r: r.as_f64() });
    }
    let k = ctx.k();
    let stops = ctx.breakpoints_within(T::zero(), r_max);
    // √w − k = (w − k²)/(√w + k), free of cancellation where w ≈ E
    let delta = quadrature_with_stops(
        |r| {
            let w = ctx.w(r).max(T::zero());
            (w - ctx.energy) / (w.sqrt() + k)
        },
        T::zero(),
        r_max,
        &stops,
        cfg,
    )?;
    let wave = jwkb_wave(ctx, (T::zero(), r_max), cfg)?;
    let neglected = neglected_term(&wave, ctx);
    let diagnostics = Diagnostics {
        max_residual: neglected,
        step_count: wave.len().saturating_sub(1),
        r_match: r_max,
        tolerance: cfg.abs_tol,
    };
    Ok(PhaseShiftResult::from_continuous(delta, Method::Jwkb, diagnostics))
}

fn neglected_term<T: Real>(wave: &ComplexWaveTrace<T>, ctx: &ScatteringContext<T>) -> T {
    crate::numerics::max_node_residual(&wave.amplitude, &ctx.breakpoints(), |r, a, d2| d2 / a / ctx.w(r))
}
