//! Exact phase-amplitude form of the radial equation: the amplitude obeys
//! `α'' + w α = α⁻³`, the phase `φ' = α⁻²`, and
//! `f = √(2/π) α sin φ`, `g = −√(2/π) α cos φ` are a pair of solutions with
//! `W(f, g) = 2/π`.

use std::cell::Cell;

use crate::direct::{extract_phase, Method, PhaseShiftResult};
use crate::freepair::{riccati_bessel, BasePair, PairValues};
use crate::numerics::{cumulative_quadrature, integrate_ivp_with_stops, IntegratorConfig, Trace};
use crate::potentials::ScatteringContext;
use crate::{Error, Real, Result};

/// Smallest amplitude accepted before a run is declared a numerical failure.
pub const COLLAPSE_THRESHOLD: f64 = 1e-8;

/// Starting data for the amplitude equation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum MilneInit<T> {
    /// `α = w^{-1/4}` with its derivative at the outer end, integrated
    /// inward. Falls back to [`MilneInit::FreeAsymptotic`] when `w ≤ 0` there.
    #[default]
    Jwkb,
    /// The exact nonoscillatory free amplitude `α² = (S_ℓ² + C_ℓ²)/k` at the
    /// outer end, integrated inward. Assumes no long-range potential.
    FreeAsymptotic,
    /// Given `(α, α')` at the outer end, integrated inward.
    Outer { alpha: T, slope: T },
    /// Given `(α, α')` at the inner end, integrated outward.
    Inner { alpha: T, slope: T },
}

/// Where and how the phase was fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseAnchor<T> {
    pub r: T,
    pub phi: T,
    /// `cot φ = α² (y_reg − α'/α)` at the anchor; infinite at `r = 0`.
    pub cot: T,
}

/// Amplitude (and, once anchored, phase) of one Milne run.
#[derive(Debug, Clone)]
pub struct MilneSolution<T> {
    /// `α` with `α'` as slope and one-sided `α''` attached.
    pub alpha: Trace<T>,
    /// `α'` with `α''` as slope and one-sided `α'''` attached.
    pub slope: Trace<T>,
    pub phi: Option<Trace<T>>,
    pub anchor: Option<PhaseAnchor<T>>,
    pub ell: u32,
    /// Asymptotic wavenumber of the problem solved.
    pub k: T,
    pub step_count: usize,
    pub tolerance: T,
}

/// Largest absolute residual and the term magnitude it is compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual<T> {
    pub max_abs: T,
    pub scale: T,
}

impl<T: Real> Residual<T> {
    pub fn relative(&self) -> T {
        if self.scale > T::zero() {
            self.max_abs / self.scale
        } else {
            self.max_abs
        }
    }
}

impl<T: Real> MilneSolution<T> {
    /// `(α, α', α'')` between nodes: `α` from its quintic interpolant,
    /// `α'` and `α''` from the quintic interpolant of `α'`. At interval
    /// midpoints the derivative of a quintic Hermite interpolant is accurate
    /// to `O(h⁶)`, two orders better than its second derivative.
    pub fn alpha_full(&self, r: T) -> Result<(T, T, T)> {
        let (a, _, _) = self.alpha.eval_full(r)?;
        let (da, dda, _) = self.slope.eval_full(r)?;
        Ok((a, da, dda))
    }

    /// `K = α⁻² = dφ/dr` on the amplitude nodes.
    pub fn k_trace(&self) -> Trace<T> {
        let two = T::lit(2.0);
        let a = self.alpha.values();
        let values = a.iter().map(|&x| T::one() / (x * x)).collect();
        let slope = |d: &[T]| a.iter().zip(d).map(|(&x, &dx)| -two * dx / (x * x * x)).collect();
        Trace::with_one_sided(self.alpha.nodes().to_vec(), values, slope(self.alpha.derivs()), slope(self.alpha.derivs_left()))
            .expect("same nodes as alpha")
    }

    pub fn phi(&self) -> Result<&Trace<T>> {
        self.phi
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("phase not yet computed; call milne_phase".into()))
    }
}

/// Integrates the amplitude equation over `span`.
///
/// The integrated state is `(α, α')`; `α''` at every node comes from the
/// right-hand side itself, so the amplitude trace interpolates with quintic
/// Hermite pieces.
pub fn solve_milne<T: Real>(
    ctx: &ScatteringContext<T>,
    span: (T, T),
    init: MilneInit<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<MilneSolution<T>> {
    let (a, b) = span;
    let lower = if ctx.ell == 0 { a >= T::zero() } else { a > T::zero() };
    if !lower || !(b > a) {
        return Err(Error::InvalidArgument(format!("invalid Milne span [{a}, {b}]")));
    }
    let (start, end, y0) = match init {
        MilneInit::Jwkb => {
            let (w, dw) = ctx.w_with_derivative(b);
            if w > T::zero() {
                let alpha = w.powf(T::lit(-0.25));
                (b, a, [alpha, -T::lit(0.25) * dw / w * alpha])
            } else {
                (b, a, free_amplitude(ctx, b)?)
            }
        }
        MilneInit::FreeAsymptotic => (b, a, free_amplitude(ctx, b)?),
        MilneInit::Outer { alpha, slope } => (b, a, [alpha, slope]),
        MilneInit::Inner { alpha, slope } => (a, b, [alpha, slope]),
    };
    if !(y0[0] > T::zero()) || !y0[1].is_finite() {
        return Err(Error::InvalidArgument(format!("initial amplitude must be positive, got {}", y0[0])));
    }

    let threshold = T::lit(COLLAPSE_THRESHOLD);
    let lowest = Cell::new((y0[0], start));
    let rhs = |r: T, y: &[T; 2]| {
        if y[0] < lowest.get().0 {
            lowest.set((y[0], r));
        }
        if !(y[0] > threshold) {
            return [T::nan(), T::nan()];
        }
        [y[1], -ctx.w(r) * y[0] + (y[0] * y[0] * y[0]).recip()]
    };
    let stops = ctx.breakpoints_within(a, b);
    let sol = integrate_ivp_with_stops(rhs, y0, (start, end), &stops, cfg).map_err(|e| {
        let (alpha, r) = lowest.get();
        if alpha <= threshold {
            Error::AmplitudeCollapse { r: r.as_f64(), alpha: alpha.as_f64() }
        } else {
            e
        }
    })?;
    if let Some((i, &alpha)) = sol
        .states()
        .iter()
        .map(|s| &s[0])
        .enumerate()
        .find(|(_, &v)| !(v > threshold))
    {
        return Err(Error::AmplitudeCollapse { r: sol.nodes()[i].as_f64(), alpha: alpha.as_f64() });
    }

    let amp = sol.component(0);
    let slope = sol.component(1);
    let alpha = amp.with_seconds(slope.derivs().to_vec(), slope.derivs_left().to_vec())?;
    let third = |right: bool| -> Vec<T> {
        (0..alpha.len())
            .map(|i| {
                let (r, a, da) = (alpha.nodes()[i], alpha.values()[i], alpha.derivs()[i]);
                let (w, dw) = ctx.w_one_sided(r, right);
                -dw * a - w * da - T::lit(3.0) * da / (a * a * a * a)
            })
            .collect()
    };
    let slope = slope.with_seconds(third(true), third(false))?;
    Ok(MilneSolution {
        alpha,
        slope,
        phi: None,
        anchor: None,
        ell: ctx.ell,
        k: ctx.k(),
        step_count: sol.step_count(),
        tolerance: cfg.abs_tol,
    })
}

/// `(α, α')` of the free nonoscillatory amplitude `α² = (S_ℓ² + C_ℓ²)/k`.
fn free_amplitude<T: Real>(ctx: &ScatteringContext<T>, r: T) -> Result<[T; 2]> {
    let k = ctx.k();
    let rb = riccati_bessel(ctx.ell, k * r)?;
    let alpha = ((rb.s * rb.s + rb.c * rb.c) / k).sqrt();
    let slope = (rb.s * rb.ds + rb.c * rb.dc) / alpha;
    Ok([alpha, slope])
}

/// Fills the phase: `φ(r) = φ(r₀) + ∫_{r₀}^r α⁻²`, integrated outward from
/// the inner end of the amplitude trace, with `φ(r₀)` chosen so that
/// `α sin φ` is the regular solution:
/// `cot φ(r₀) = α²(y_reg − α'/α)`, `y_reg = (ℓ+1)/r₀`.
pub fn milne_phase<T: Real>(
    mut sol: MilneSolution<T>,
    ctx: &ScatteringContext<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<MilneSolution<T>> {
    let alpha = &sol.alpha;
    let r0 = alpha.lo();
    let (a0, da0) = (alpha.first_value(), alpha.derivs()[0]);
    let anchor = if r0 > T::zero() {
        let y_reg = (ctx.ell_f() + T::one()) / r0;
        let cot = a0 * a0 * (y_reg - da0 / a0);
        PhaseAnchor { r: r0, phi: T::one().atan2(cot), cot }
    } else {
        PhaseAnchor { r: r0, phi: T::zero(), cot: T::infinity() }
    };

    // relative accuracy down to the anchor value: for ℓ > 0 the phase near
    // the origin is tiny while α is huge, and f = α sin φ needs both
    let floor = anchor.phi.min(T::one()).max(T::min_positive_value().sqrt());
    let qcfg = IntegratorConfig { abs_tol: cfg.abs_tol * floor, ..*cfg };
    let nodes = alpha.nodes();
    let inv_sq = |r: T| {
        let (v, _) = alpha.eval_clamped(r);
        (v * v).recip()
    };
    let run = cumulative_quadrature(inv_sq, r0, alpha.hi(), &nodes[1..nodes.len() - 1], &qcfg)?;
    let mut values = Vec::with_capacity(nodes.len());
    let mut j = 0;
    for &x in nodes {
        while run.nodes()[j] != x {
            j += 1;
        }
        values.push(anchor.phi + run.states()[j][0]);
    }
    let k = sol.k_trace();
    let seconds = (k.derivs().to_vec(), k.derivs_left().to_vec());
    let phi = Trace::new(nodes.to_vec(), values, k.values().to_vec())?.with_seconds(seconds.0, seconds.1)?;
    sol.phi = Some(phi);
    sol.anchor = Some(anchor);
    Ok(sol)
}

/// The `(f, g)` pair of a phased Milne solution.
#[derive(Debug, Clone)]
pub struct MilnePair<T> {
    alpha: Trace<T>,
    phi: Trace<T>,
    ell: u32,
    k: T,
    breakpoints: Vec<T>,
}

impl<T: Real> MilnePair<T> {
    pub fn alpha(&self) -> &Trace<T> {
        &self.alpha
    }

    pub fn phi(&self) -> &Trace<T> {
        &self.phi
    }

    pub fn span(&self) -> (T, T) {
        (self.alpha.lo(), self.alpha.hi())
    }

    /// Pair values on the amplitude nodes, as `f` and `g` traces.
    pub fn traces(&self) -> Result<(Trace<T>, Trace<T>)> {
        self.traces_on(self.alpha.nodes())
    }

    /// Pair values resampled onto `nodes` inside the solved span.
    pub fn traces_on(&self, nodes: &[T]) -> Result<(Trace<T>, Trace<T>)> {
        let (lo, hi) = self.span();
        if let Some(&r) = nodes.iter().find(|&&r| r < lo || r > hi) {
            return Err(Error::OutOfRange { r: r.as_f64(), lo: lo.as_f64(), hi: hi.as_f64() });
        }
        let nodes = nodes.to_vec();
        let vals: Vec<PairValues<T>> = nodes.iter().map(|&r| self.eval(r)).collect();
        let f = Trace::new(nodes.clone(), vals.iter().map(|p| p.f).collect(), vals.iter().map(|p| p.df).collect())?;
        let g = Trace::new(nodes, vals.iter().map(|p| p.g).collect(), vals.iter().map(|p| p.dg).collect())?;
        Ok((f, g))
    }
}

impl<T: Real> BasePair<T> for MilnePair<T> {
    fn ell(&self) -> u32 {
        self.ell
    }

    fn k(&self) -> T {
        self.k
    }

    /// Clamps `r` into the solved span.
    fn eval(&self, r: T) -> PairValues<T> {
        let (alpha, slope) = self.alpha.eval_clamped(r);
        let (phi, _) = self.phi.eval_clamped(r);
        pair_values(alpha, slope, phi)
    }

    fn breakpoints(&self) -> Vec<T> {
        self.breakpoints.clone()
    }
}

fn pair_values<T: Real>(alpha: T, slope: T, phi: T) -> PairValues<T> {
    let norm = (T::lit(2.0) / T::PI()).sqrt();
    let (s, c) = phi.sin_cos();
    let inv = alpha.recip();
    PairValues {
        f: norm * alpha * s,
        df: norm * (slope * s + inv * c),
        g: -norm * alpha * c,
        dg: -norm * (slope * c - inv * s),
    }
}

/// Builds `f = √(2/π) α sin φ`, `g = −√(2/π) α cos φ`.
pub fn build_fg<T: Real>(sol: &MilneSolution<T>) -> Result<MilnePair<T>> {
    let phi = sol.phi()?.clone();
    let nodes = sol.alpha.nodes();
    // the amplitude trace lands on every discontinuity of w
    let breakpoints = (1..nodes.len() - 1)
        .filter(|&i| {
            sol.alpha.seconds().is_some_and(|(r, l)| (r[i] - l[i]).abs() > T::lit(1e-9) * (T::one() + r[i].abs()))
        })
        .map(|i| nodes[i])
        .collect();
    Ok(MilnePair { alpha: sol.alpha.clone(), phi, ell: sol.ell, k: sol.k, breakpoints })
}

/// Residual of `α'' + w α − α⁻³` at the interval midpoints, with `α` and
/// `α''` from the quintic interpolant. The scale is the largest of the
/// three term magnitudes over the same points.
pub fn milne_residual<T: Real>(sol: &MilneSolution<T>, ctx: &ScatteringContext<T>) -> Result<Residual<T>> {
    let mut max_abs = T::zero();
    let mut scale = T::zero();
    for r in sol.alpha.midpoints() {
        let (a, _, dda) = sol.alpha_full(r)?;
        let wa = ctx.w(r) * a;
        let inv3 = (a * a * a).recip();
        max_abs = max_abs.max((dda + wa - inv3).abs());
        scale = scale.max(dda.abs()).max(wa.abs()).max(inv3.abs());
    }
    Ok(Residual { max_abs, scale })
}

/// Local scaled residual per node (the following interval's midpoint; the
/// last node repeats the previous interval), for tabulation.
pub fn residual_profile<T: Real>(sol: &MilneSolution<T>, ctx: &ScatteringContext<T>) -> Result<Vec<T>> {
    let mids = sol.alpha.midpoints();
    let mut out = Vec::with_capacity(mids.len() + 1);
    for &r in &mids {
        let (a, _, dda) = sol.alpha_full(r)?;
        let wa = ctx.w(r) * a;
        let inv3 = (a * a * a).recip();
        let scale = dda.abs().max(wa.abs()).max(inv3.abs());
        out.push((dda + wa - inv3).abs() / scale);
    }
    out.push(*out.last().unwrap_or(&T::zero()));
    Ok(out)
}

/// Phase shift from the Milne pair: inward amplitude from `r_max`, phase
/// from the origin, then the usual asymptotic match of `f`.
pub fn milne_phase_shift<T: Real>(ctx: &ScatteringContext<T>, cfg: &IntegratorConfig<T>) -> Result<PhaseShiftResult<T>> {
    milne_phase_shift_with(ctx, MilneInit::Jwkb, cfg)
}

/// [`milne_phase_shift`] with explicit amplitude initialization.
pub fn milne_phase_shift_with<T: Real>(
    ctx: &ScatteringContext<T>,
    init: MilneInit<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<PhaseShiftResult<T>> {
    let r_max = ctx.r_max();
    let sol = solve_milne(ctx, (ctx.r_min(), r_max), init, cfg)?;
    let sol = milne_phase(sol, ctx, cfg)?;
    let pair = build_fg(&sol)?;
    let (f, _) = pair.traces()?;
    let mut out = extract_phase(&f, ctx, r_max)?;
    out.method = Method::Milne;
    out.diagnostics.max_residual = milne_residual(&sol, ctx)?.relative();
    out.diagnostics.step_count = sol.step_count;
    out.diagnostics.tolerance = cfg.abs_tol;
    Ok(out)
}
