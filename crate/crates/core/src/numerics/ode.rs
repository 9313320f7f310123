//! Dormand–Prince 5(4) with PI step-size control.

use super::Trace;
use crate::{Error, Real, Result};

/// Tolerances and limits for [`integrate_ivp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_steps: usize,
    pub min_step: T,
    /// Optional cap on the step length; `None` lets the controller decide.
    pub max_step: Option<T>,
    pub norm: ErrorNorm,
}

/// How the relative part of the error scale is formed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ErrorNorm {
    /// Each component against its own magnitude.
    #[default]
    Componentwise,
    /// Every component against the largest component magnitude. Suited to
    /// oscillatory linear systems such as `(u, u')`, where one component
    /// passes through zero while the other peaks.
    Vector,
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-10),
            rel_tol: T::lit(1e-10),
            max_steps: 1_000_000,
            min_step: T::lit(1e-14),
            max_step: None,
            norm: ErrorNorm::Componentwise,
        }
    }
}

impl<T: Real> IntegratorConfig<T> {
    /// Same absolute and relative tolerance.
    pub fn with_tol(tol: T) -> Self {
        Self { abs_tol: tol, rel_tol: tol, ..Self::default() }
    }

    pub fn with_norm(mut self, norm: ErrorNorm) -> Self {
        self.norm = norm;
        self
    }

    pub fn max_step(mut self, h: T) -> Self {
        self.max_step = Some(h);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: T| x > T::zero() && x < T::one();
        if !(self.abs_tol > T::zero() && self.abs_tol.is_finite()) || !unit(self.rel_tol) {
            return Err(Error::InvalidArgument(format!(
                "need abs_tol > 0 and rel_tol in (0, 1): abs {}, rel {}",
                self.abs_tol, self.rel_tol
            )));
        }
        if self.max_steps == 0 || !(self.min_step > T::zero()) {
            return Err(Error::InvalidArgument("max_steps and min_step must be positive".into()));
        }
        if matches!(self.max_step, Some(h) if !(h > T::zero())) {
            return Err(Error::InvalidArgument("max_step must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Accepted nodes of an integration, in integration order.
#[derive(Debug, Clone)]
pub struct OdeSolution<T, const N: usize> {
    nodes: Vec<T>,
    states: Vec<[T; N]>,
    /// Derivative at the start of the step leaving each node.
    deriv_out: Vec<[T; N]>,
    /// Derivative at the end of the step arriving at each node.
    deriv_in: Vec<[T; N]>,
    pub stats: StepStats,
}

impl<T: Real, const N: usize> OdeSolution<T, N> {
    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn states(&self) -> &[[T; N]] {
        &self.states
    }

    pub fn first(&self) -> [T; N] {
        self.states[0]
    }

    pub fn last(&self) -> [T; N] {
        self.states[self.states.len() - 1]
    }

    pub fn last_node(&self) -> T {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn is_forward(&self) -> bool {
        self.nodes[self.nodes.len() - 1] > self.nodes[0]
    }

    /// Component `k` as a trace over increasing radius.
    pub fn component(&self, k: usize) -> Trace<T> {
        let values: Vec<T> = self.states.iter().map(|s| s[k]).collect();
        let out: Vec<T> = self.deriv_out.iter().map(|s| s[k]).collect();
        let inc: Vec<T> = self.deriv_in.iter().map(|s| s[k]).collect();
        let trace = if self.is_forward() {
            Trace::with_one_sided(self.nodes.clone(), values, out, inc)
        } else {
            let rev = |mut v: Vec<T>| {
                v.reverse();
                v
            };
            Trace::with_one_sided(rev(self.nodes.clone()), rev(values), rev(inc), rev(out))
        };
        trace.expect("integrator nodes are strictly monotone")
    }

    pub fn step_count(&self) -> usize {
        self.stats.accepted
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

/// Integrates `y' = rhs(r, y)` from `span.0` to `span.1` (either direction).
pub fn integrate_ivp<T, const N: usize, F>(
    rhs: F,
    y0: [T; N],
    span: (T, T),
    cfg: &IntegratorConfig<T>,
) -> Result<OdeSolution<T, N>>
where
    T: Real,
    F: FnMut(T, &[T; N]) -> [T; N],
{
    integrate_ivp_with_stops(rhs, y0, span, &[], cfg)
}

/// As [`integrate_ivp`], but every radius in `stops` that lies inside the
/// span becomes an accepted node. Stops mark discontinuities of the
/// right-hand side: no stage is evaluated exactly on one, and the derivative
/// is re-evaluated on the far side after crossing it.
pub fn integrate_ivp_with_stops<T, const N: usize, F>(
    mut rhs: F,
    y0: [T; N],
    span: (T, T),
    stops: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<OdeSolution<T, N>>
where
    T: Real,
    F: FnMut(T, &[T; N]) -> [T; N],
{
    cfg.validate()?;
    let (a, b) = span;
    if !(a.is_finite() && b.is_finite()) || a == b {
        return Err(Error::InvalidArgument(format!("degenerate integration span [{a}, {b}]")));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState { r: a.as_f64() });
    }
    let dir = if b > a { T::one() } else { -T::one() };
    let along = |r: T| (r - a) * dir;
    let length = along(b);

    // landing points strictly inside the span, ordered along the direction
    let mut targets: Vec<T> = stops
        .iter()
        .copied()
        .filter(|&s| s.is_finite() && along(s) > T::zero() && along(s) < length)
        .collect();
    targets.sort_by(|x, y| along(*x).partial_cmp(&along(*y)).unwrap());
    targets.dedup_by(|x, y| (*x - *y).abs() <= nudge(*x));
    targets.push(b);

    let c: [T; 7] = C.map(T::lit);
    let acoef: [[T; 6]; 7] = A.map(|row| row.map(T::lit));
    let ecoef: [T; 7] = E.map(T::lit);
    let expo1 = T::lit(0.2 - BETA * 0.75);
    let beta = T::lit(BETA);

    let mut stats = StepStats::default();
    let mut r = a;
    let mut y = y0;
    let mut f = rhs(r, &y);
    stats.rhs_evals += 1;
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState { r: a.as_f64() });
    }

    let mut sol = OdeSolution {
        nodes: vec![a],
        states: vec![y0],
        deriv_out: vec![f],
        deriv_in: vec![f],
        stats,
    };

    let hmax = cfg.max_step.unwrap_or(length).min(length);
    let mut h = initial_step(&mut rhs, r, &y, &f, dir, hmax, cfg, &mut sol.stats);
    let mut facold = T::lit(1e-4);
    let mut last_rejected = false;
    let mut target_idx = 0;

    loop {
        let target = targets[target_idx];
        let remaining = along(target);
        let mut step = h.min(hmax);
        let mut lands = false;
        // stretch by up to 1% rather than leave a sliver before the target
        if step * T::lit(1.01) >= remaining - along(r) - nudge(target) {
            step = remaining - along(r);
            lands = true;
        }
        if sol.stats.accepted + sol.stats.rejected >= cfg.max_steps {
            return Err(Error::MaxStepsExceeded { r: r.as_f64(), max_steps: cfg.max_steps });
        }
        let hs = step * dir;
        let r_end = if lands { target } else { r + hs };

        let mut k = [[T::zero(); N]; 7];
        k[0] = f;
        let mut y_new = y;
        let mut finite = true;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let aij = acoef[s][j];
                if aij != T::zero() {
                    for i in 0..N {
                        ys[i] = ys[i] + hs * aij * kj[i];
                    }
                }
            }
            let rs = if c[s] == T::one() {
                if lands {
                    r_end - dir * nudge(r_end)
                } else {
                    r_end
                }
            } else {
                r + c[s] * hs
            };
            k[s] = rhs(rs, &ys);
            sol.stats.rhs_evals += 1;
            if k[s].iter().any(|v| !v.is_finite()) {
                finite = false;
                break;
            }
            if s == 6 {
                // stage 7 is evaluated at the 5th-order solution (FSAL)
                y_new = ys;
            }
        }

        if !finite {
            sol.stats.rejected += 1;
            h = step * T::lit(0.25);
            last_rejected = true;
            if h < cfg.min_step {
                return Err(Error::NonFiniteState { r: r.as_f64() });
            }
            continue;
        }

        let mut err = T::zero();
        let joint = match cfg.norm {
            ErrorNorm::Componentwise => T::zero(),
            ErrorNorm::Vector => (0..N).fold(T::zero(), |m, i| m.max(y[i].abs()).max(y_new[i].abs())),
        };
        for i in 0..N {
            let mut e = T::zero();
            for s in 0..7 {
                e = e + ecoef[s] * k[s][i];
            }
            let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs()).max(joint);
            err = err.max((e * hs).abs() / sc);
        }

        let fac11 = err.powf(expo1);
        if err <= T::one() {
            sol.stats.accepted += 1;
            let mut fac = fac11 / facold.powf(beta);
            fac = (fac / T::lit(SAFETY)).max(T::one() / T::lit(FAC_MAX)).min(T::one() / T::lit(FAC_MIN));
            let mut h_new = step / fac;
            if last_rejected {
                h_new = h_new.min(step);
            }
            facold = err.max(T::lit(1e-4));
            last_rejected = false;

            r = r_end;
            y = y_new;
            let f_in = k[6];
            if lands && target_idx + 1 < targets.len() {
                f = rhs(r + dir * nudge(r), &y);
                sol.stats.rhs_evals += 1;
                if f.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFiniteState { r: r.as_f64() });
                }
            } else {
                f = f_in;
            }
            sol.nodes.push(r);
            sol.states.push(y);
            sol.deriv_in.push(f_in);
            sol.deriv_out.push(f);

            if lands {
                target_idx += 1;
                if target_idx == targets.len() {
                    break;
                }
                // a clipped landing step says nothing about the natural size
                h = h.max(h_new);
            } else {
                h = h_new;
            }
        } else {
            sol.stats.rejected += 1;
            last_rejected = true;
            h = step / (T::one() / T::lit(FAC_MIN)).min(fac11 / T::lit(SAFETY));
            if h < cfg.min_step {
                return Err(Error::StepUnderflow { r: r.as_f64(), step: h.as_f64() });
            }
        }
    }
    Ok(sol)
}

/// Smallest offset that separates a stage point from a stop.
#[inline]
fn nudge<T: Real>(r: T) -> T {
    T::epsilon() * T::lit(8.0) * (T::one() + r.abs())
}

#[allow(clippy::too_many_arguments)]
fn initial_step<T: Real, const N: usize, F>(
    rhs: &mut F,
    r: T,
    y: &[T; N],
    f: &[T; N],
    dir: T,
    hmax: T,
    cfg: &IntegratorConfig<T>,
    stats: &mut StepStats,
) -> T
where
    F: FnMut(T, &[T; N]) -> [T; N],
{
    let n = T::from_usize(N).unwrap();
    let joint = match cfg.norm {
        ErrorNorm::Componentwise => T::zero(),
        ErrorNorm::Vector => y.iter().fold(T::zero(), |m, v| m.max(v.abs())),
    };
    let sc = |i: usize| cfg.abs_tol + cfg.rel_tol * y[i].abs().max(joint);
    let norm = |v: &[T; N]| {
        let s = (0..N).fold(T::zero(), |acc, i| acc + (v[i] / sc(i)).powi(2));
        (s / n).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f);
    let mut h0 = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) {
        T::lit(1e-6)
    } else {
        T::lit(0.01) * d0 / d1
    };
    h0 = h0.min(hmax);
    let mut y1 = *y;
    for i in 0..N {
        y1[i] = y[i] + h0 * dir * f[i];
    }
    let f1 = rhs(r + h0 * dir, &y1);
    stats.rhs_evals += 1;
    let mut diff = [T::zero(); N];
    for i in 0..N {
        diff[i] = f1[i] - f[i];
    }
    let d2 = norm(&diff) / h0;
    let dm = d1.max(d2);
    let h1 = if !dm.is_finite() {
        h0 * T::lit(1e-3)
    } else if dm <= T::lit(1e-15) {
        T::lit(1e-6).max(h0 * T::lit(1e-3))
    } else {
        (T::lit(0.01) / dm).powf(T::lit(0.2))
    };
    (T::lit(100.0) * h0).min(h1).min(hmax).max(cfg.min_step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn cfg() -> IntegratorConfig<f64> {
        IntegratorConfig::default()
    }

    #[test]
    fn exponential_growth() {
        let sol = integrate_ivp(|_, y: &[f64; 1]| [y[0]], [1.0], (0.0, 1.0), &cfg()).unwrap();
        assert_abs_diff_eq!(sol.last()[0], std::f64::consts::E, epsilon = 1e-9);
        assert_eq!(sol.last_node(), 1.0);
    }

    #[test]
    fn gaussian_decay() {
        let sol = integrate_ivp(|r, y: &[f64; 1]| [-2.0 * r * y[0]], [1.0], (0.0, 2.0), &cfg()).unwrap();
        assert_abs_diff_eq!(sol.last()[0], (-4.0f64).exp(), epsilon = 1e-10);
    }

    #[test]
    fn harmonic_oscillator_to_pi() {
        let sol =
            integrate_ivp(|_, y: &[f64; 2]| [y[1], -y[0]], [0.0, 1.0], (0.0, PI), &cfg()).unwrap();
        assert_abs_diff_eq!(sol.last()[0], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.last()[1], -1.0, epsilon = 1e-9);
    }

    #[test]
    fn inward_integration_and_reversibility() {
        let rhs = |_: f64, y: &[f64; 2]| [y[1], -y[0]];
        let fwd = integrate_ivp(rhs, [0.3, 0.7], (0.0, 5.0), &cfg()).unwrap();
        let back = integrate_ivp(rhs, fwd.last(), (5.0, 0.0), &cfg()).unwrap();
        assert_abs_diff_eq!(back.last()[0], 0.3, epsilon = 1e-9);
        assert_abs_diff_eq!(back.last()[1], 0.7, epsilon = 1e-9);
        let tr = back.component(0);
        assert_eq!(tr.lo(), 0.0);
        assert_eq!(tr.hi(), 5.0);
    }

    #[test]
    fn tighter_tolerance_reduces_error() {
        let err = |tol: f64| {
            let sol = integrate_ivp(
                |_, y: &[f64; 1]| [y[0]],
                [1.0],
                (0.0, 1.0),
                &IntegratorConfig::with_tol(tol),
            )
            .unwrap();
            (sol.last()[0] - std::f64::consts::E).abs()
        };
        assert!(err(1e-9) < err(1e-6));
        assert!(err(1e-6) < err(1e-3));
    }

    #[test]
    fn stops_become_nodes_and_handle_jumps() {
        // y' = 1 for r < 1, 0 beyond
        let rhs = |r: f64, _: &[f64; 1]| [if r < 1.0 { 1.0 } else { 0.0 }];
        let sol = integrate_ivp_with_stops(rhs, [0.0], (0.0, 3.0), &[1.0], &cfg()).unwrap();
        assert!(sol.nodes().contains(&1.0));
        assert_abs_diff_eq!(sol.last()[0], 1.0, epsilon = 1e-14);
        let tr = sol.component(0);
        let i = tr.nodes().iter().position(|&x| x == 1.0).unwrap();
        assert_eq!(tr.derivs_left()[i], 1.0);
        assert_eq!(tr.derivs()[i], 0.0);
        // inward across the same jump
        let back = integrate_ivp_with_stops(rhs, [1.0], (3.0, 0.0), &[1.0], &cfg()).unwrap();
        assert_abs_diff_eq!(back.last()[0], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn nonfinite_rhs_is_reported() {
        let r = integrate_ivp(|r, _: &[f64; 1]| [1.0 / (r - 0.5).max(0.0)], [0.0], (0.0, 1.0), &cfg());
        assert!(matches!(r, Err(Error::NonFiniteState { .. }) | Err(Error::StepUnderflow { .. })));
    }

    #[test]
    fn max_steps_is_enforced() {
        let tight = IntegratorConfig { max_steps: 5, ..cfg() };
        let r = integrate_ivp(|_, y: &[f64; 2]| [y[1], -y[0]], [0.0, 1.0], (0.0, 100.0), &tight);
        assert!(matches!(r, Err(Error::MaxStepsExceeded { .. })));
    }

    #[test]
    fn singularity_underflows() {
        // y' = y^2 blows up at r = 1
        let r = integrate_ivp(|_, y: &[f64; 1]| [y[0] * y[0]], [1.0], (0.0, 2.0), &cfg());
        assert!(r.is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let cfg32 = IntegratorConfig::<f32> { abs_tol: 1e-6, rel_tol: 1e-6, min_step: 1e-6, ..Default::default() };
        let sol = integrate_ivp(|_, y: &[f32; 1]| [y[0]], [1.0f32], (0.0, 1.0), &cfg32).unwrap();
        assert!((sol.last()[0] - std::f32::consts::E).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_config() {
        let bad = IntegratorConfig { abs_tol: 0.0, ..cfg() };
        assert!(integrate_ivp(|_, y: &[f64; 1]| [y[0]], [1.0], (0.0, 1.0), &bad).is_err());
        assert!(integrate_ivp(|_, y: &[f64; 1]| [y[0]], [1.0], (1.0, 1.0), &cfg()).is_err());
    }
}
