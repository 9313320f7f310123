//! Free-particle reference solutions: Riccati–Bessel functions, the
//! energy-normalized regular/irregular pair and closed-form phase oracles.

use crate::numerics::{quadrature_with_stops, IntegratorConfig};
use crate::potentials::{ScatteringContext, MAX_ELL};
use crate::{Error, Real, Result};

/// Values and slopes of the regular (`f`) and irregular (`g`) solutions at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairValues<T> {
    pub f: T,
    pub df: T,
    pub g: T,
    pub dg: T,
}

impl<T: Real> PairValues<T> {
    /// `W(f, g) = f g' − f' g`.
    pub fn wronskian(&self) -> T {
        self.f * self.dg - self.df * self.g
    }
}

/// A regular/irregular pair of solutions of the reference equation
/// `y'' + (E − V_L − ℓ(ℓ+1)/r²) y = 0` normalized to `W(f, g) = 2/π`, with the
/// irregular solution lagging the regular one by π/2 asymptotically.
pub trait BasePair<T: Real> {
    fn ell(&self) -> u32;

    /// Asymptotic wavenumber.
    fn k(&self) -> T;

    fn eval(&self, r: T) -> PairValues<T>;

    /// Nominal Wronskian of the pair.
    fn wronskian(&self) -> T {
        T::lit(2.0) / T::PI()
    }

    /// Radii where the pair's second derivative jumps.
    fn breakpoints(&self) -> Vec<T> {
        Vec::new()
    }
}

/// Riccati–Bessel functions and derivatives at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiBessel<T> {
    /// `x j_ℓ(x)`, behaves like `sin(x − ℓπ/2)` for large `x`.
    pub s: T,
    pub ds: T,
    /// `x y_ℓ(x)`, behaves like `−cos(x − ℓπ/2)` for large `x`.
    pub c: T,
    pub dc: T,
}

/// Riccati–Bessel pair `(S_ℓ, C_ℓ)` with `(S₀, C₀) = (sin x, −cos x)` and
/// `S C' − S' C = 1`.
///
/// `C` comes from upward recurrence, which is stable for the irregular
/// solution. `S` uses upward recurrence for `x > ℓ` and Miller's downward
/// recurrence below that, where upward recurrence loses digits.
pub fn riccati_bessel<T: Real>(ell: u32, x: T) -> Result<RiccatiBessel<T>> {
    if ell > MAX_ELL {
        return Err(Error::UnsupportedEll(ell));
    }
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::NonPositiveArgument(x.as_f64()));
    }
    let l = ell as usize;
    let (sin, cos) = (x.sin(), x.cos());

    let mut c = [T::zero(); (MAX_ELL + 1) as usize];
    c[0] = -cos;
    if l >= 1 {
        c[1] = -cos / x - sin;
    }
    for n in 1..l {
        c[n + 1] = T::from_usize(2 * n + 1).unwrap() / x * c[n] - c[n - 1];
    }

    let mut s = [T::zero(); (MAX_ELL + 1) as usize];
    if x > T::from_u32(ell).unwrap() {
        s[0] = sin;
        if l >= 1 {
            s[1] = sin / x - cos;
        }
        for n in 1..l {
            s[n + 1] = T::from_usize(2 * n + 1).unwrap() / x * s[n] - s[n - 1];
        }
    } else {
        miller_downward(l, x, &mut s);
    }

    let (ds, dc) = if l == 0 {
        (cos, sin)
    } else {
        let lf = T::from_usize(l).unwrap();
        (s[l - 1] - lf / x * s[l], c[l - 1] - lf / x * c[l])
    };
    Ok(RiccatiBessel { s: s[l], ds, c: c[l], dc })
}

/// Fills `out[0..=l]` with `S_n(x)` by downward recurrence normalized to `S₀ = sin x`.
fn miller_downward<T: Real>(l: usize, x: T, out: &mut [T]) {
    let start = l + 40 + x.to_usize().unwrap_or(0);
    let big = T::lit(1e100);
    let (mut above, mut cur) = (T::zero(), T::lit(1e-30));
    for n in (1..=start).rev() {
        // cur = S_n, above = S_{n+1}
        if n <= l {
            out[n] = cur;
        }
        let below = T::from_usize(2 * n + 1).unwrap() / x * cur - above;
        above = cur;
        cur = below;
        if cur.abs() > big {
            let scale = T::one() / big;
            cur = cur * scale;
            above = above * scale;
            for v in out.iter_mut().take(l + 1).skip(n.min(l + 1)) {
                *v = *v * scale;
            }
            if n <= l {
                out[n] = above;
            }
        }
    }
    let norm = x.sin() / cur;
    out[0] = x.sin();
    for v in out.iter_mut().take(l + 1).skip(1) {
        *v = *v * norm;
    }
}

/// Energy-normalized free pair
/// `f = √(2/(πk)) S_ℓ(kr)`, `g = √(2/(πk)) C_ℓ(kr)`; for `ℓ = 0`,
/// `f = √(2/(πk)) sin kr` and `g = −√(2/(πk)) cos kr`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreePair<T> {
    ell: u32,
    k: T,
    norm: T,
}

impl<T: Real> FreePair<T> {
    pub fn new(ell: u32, energy: T) -> Result<Self> {
        if ell > MAX_ELL {
            return Err(Error::UnsupportedEll(ell));
        }
        if !(energy > T::zero()) {
            return Err(Error::NonPositiveEnergy(energy.as_f64()));
        }
        let k = energy.sqrt();
        Ok(Self { ell, k, norm: (T::lit(2.0) / (T::PI() * k)).sqrt() })
    }

    pub fn for_context(ctx: &ScatteringContext<T>) -> Result<Self> {
        Self::new(ctx.ell, ctx.energy)
    }

    pub fn try_eval(&self, r: T) -> Result<PairValues<T>> {
        let rb = riccati_bessel(self.ell, self.k * r)?;
        Ok(PairValues {
            f: self.norm * rb.s,
            df: self.norm * self.k * rb.ds,
            g: self.norm * rb.c,
            dg: self.norm * self.k * rb.dc,
        })
    }
}

/// Shorthand for [`FreePair::new`].
pub fn energy_normalized_pair<T: Real>(ell: u32, energy: T) -> Result<FreePair<T>> {
    FreePair::new(ell, energy)
}

impl<T: Real> BasePair<T> for FreePair<T> {
    fn ell(&self) -> u32 {
        self.ell
    }

    fn k(&self) -> T {
        self.k
    }

    /// Panics for `r <= 0`; use [`FreePair::try_eval`] for checked access.
    fn eval(&self, r: T) -> PairValues<T> {
        self.try_eval(r).expect("free pair evaluated at positive radius")
    }
}

/// s-wave phase shift of the square well `V₀ θ(a − r)`:
/// `δ₀ = arctan[(k/κ) tan κa] − ka`, `k = √E`, `κ = √(E − V₀)`, on the
/// branch that is continuous in `E` and vanishes as `E → ∞`.
pub fn square_well_phase_exact<T: Real>(depth: T, radius: T, energy: T) -> Result<T> {
    if !(energy > T::zero()) || depth > T::zero() || !(energy > depth) || !(radius > T::zero()) {
        return Err(Error::InvalidWell { depth: depth.as_f64(), energy: energy.as_f64() });
    }
    let k = energy.sqrt();
    let kappa = (energy - depth).sqrt();
    let inner = kappa * radius;
    // κa = mπ + t with t in [−π/2, π/2); the outer angle ka + δ tracks κa
    let m = (inner / T::PI() + T::lit(0.5)).floor();
    let t = inner - m * T::PI();
    let theta = m * T::PI() + (k / kappa * t.tan()).atan();
    Ok(theta - k * radius)
}

/// First Born approximation for `ℓ = 0`:
/// `δ_B = −(1/k) ∫₀^{r_max} v_s(r) sin²(kr) dr`.
pub fn born_phase<T: Real>(ctx: &ScatteringContext<T>, r_max: T, cfg: &IntegratorConfig<T>) -> Result<T> {
    if ctx.ell != 0 {
        return Err(Error::UnsupportedEll(ctx.ell));
    }
    if ctx.spec.long_range.as_ref().is_some_and(|m| !m.is_zero()) {
        return Err(Error::InvalidArgument("Born phase assumes the default partition (V_L = 0)".into()));
    }
    let k = ctx.k();
    let stops = ctx.breakpoints_within(T::zero(), r_max);
    let integral = quadrature_with_stops(
        |r| {
            let s = (k * r).sin();
            ctx.spec.short_range(r) * s * s
        },
        T::zero(),
        r_max,
        &stops,
        cfg,
    )?;
    Ok(-integral / k)
}
