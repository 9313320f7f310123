//! Potential models, the effective potential with centrifugal barrier and the
//! local wavenumber `w(r) = E − V_eff(r)`.
//!
//! Units: `ħ²/2m = 1`, so `E` and `V` are inverse lengths squared and the
//! asymptotic wavenumber is `k = √E`.

use std::path::Path;

use crate::numerics::Trace;
use crate::{Error, Real, Result};

/// Largest supported angular momentum.
pub const MAX_ELL: u32 = 6;

/// Relative threshold below which a potential counts as negligible.
pub const NEGLIGIBLE: f64 = 1e-12;

/// Ceiling for automatically chosen outer radii.
pub const R_MAX_CAP: f64 = 1e3;

#[derive(Debug, Clone, PartialEq)]
pub enum Model<T> {
    /// `V₀` for `r < a`, zero beyond.
    SquareWell { depth: T, radius: T },
    /// `V₀ e^{−r/a}`.
    Exponential { strength: T, range: T },
    /// `V₀ e^{−(r/a)²}`.
    Gaussian { strength: T, width: T },
    Zero,
    Tabulated(Tabulated<T>),
}

/// Potential sampled on nodes starting at `r = 0`, interpolated with cubic
/// Hermite and clamped to zero beyond the last node.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated<T> {
    trace: Trace<T>,
}

impl<T: Real> Tabulated<T> {
    pub fn new(nodes: Vec<T>, values: Vec<T>) -> Result<Self> {
        let n = nodes.len();
        if n < 2 || values.len() != n {
            return Err(Error::InvalidPotential(format!(
                "tabulated potential needs >= 2 matching (r, V) rows, got {} radii and {} values",
                n,
                values.len()
            )));
        }
        if nodes[0] != T::zero() {
            return Err(Error::InvalidPotential(format!("tabulated radii must start at 0, got {}", nodes[0])));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPotential("tabulated radii must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential("tabulated values must be finite".into()));
        }
        // three-point slopes for the non-uniform grid, one-sided at the ends
        let mut derivs = vec![T::zero(); n];
        for i in 0..n {
            derivs[i] = if i == 0 {
                (values[1] - values[0]) / (nodes[1] - nodes[0])
            } else if i == n - 1 {
                (values[n - 1] - values[n - 2]) / (nodes[n - 1] - nodes[n - 2])
            } else {
                let (h0, h1) = (nodes[i] - nodes[i - 1], nodes[i + 1] - nodes[i]);
                let s0 = (values[i] - values[i - 1]) / h0;
                let s1 = (values[i + 1] - values[i]) / h1;
                (s0 * h1 + s1 * h0) / (h0 + h1)
            };
        }
        Ok(Self { trace: Trace::new(nodes, values, derivs)? })
    }

    /// Parses two whitespace- or comma-separated columns `r V`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
            if cols.len() != 2 {
                return Err(Error::InvalidPotential(format!(
                    "line {}: expected two columns, found {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::InvalidPotential(format!("line {}: {e}: {s:?}", lineno + 1)))
            };
            nodes.push(T::lit(parse(cols[0])?));
            values.push(T::lit(parse(cols[1])?));
        }
        Self::new(nodes, values)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidPotential(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn last_radius(&self) -> T {
        self.trace.hi()
    }

    pub fn trace(&self) -> &Trace<T> {
        &self.trace
    }

    fn value_and_derivative(&self, r: T) -> (T, T) {
        if r >= self.trace.hi() {
            (T::zero(), T::zero())
        } else {
            self.trace.eval_clamped(r)
        }
    }
}

impl<T: Real> Model<T> {
    pub fn square_well(depth: T, radius: T) -> Self {
        Model::SquareWell { depth, radius }
    }

    pub fn exponential(strength: T, range: T) -> Self {
        Model::Exponential { strength, range }
    }

    pub fn gaussian(strength: T, width: T) -> Self {
        Model::Gaussian { strength, width }
    }

    pub fn validate(&self) -> Result<()> {
        let (v, a, what) = match self {
            Model::SquareWell { depth, radius } => (*depth, *radius, "square_well"),
            Model::Exponential { strength, range } => (*strength, *range, "exponential"),
            Model::Gaussian { strength, width } => (*strength, *width, "gaussian"),
            Model::Zero | Model::Tabulated(_) => return Ok(()),
        };
        if !v.is_finite() || !(a > T::zero()) || !a.is_finite() {
            return Err(Error::InvalidPotential(format!(
                "{what}: strength must be finite and length positive (got {v}, {a})"
            )));
        }
        Ok(())
    }

    /// Characteristic length `a` of the model (1 for models without one).
    pub fn length_scale(&self) -> T {
        match self {
            Model::SquareWell { radius, .. } => *radius,
            Model::Exponential { range, .. } => *range,
            Model::Gaussian { width, .. } => *width,
            Model::Zero => T::one(),
            Model::Tabulated(t) => t.last_radius(),
        }
    }

    pub fn value(&self, r: T) -> T {
        self.value_and_derivative(r).0
    }

    /// `(V(r), V'(r))`; the derivative is one-sided at breakpoints.
    pub fn value_and_derivative(&self, r: T) -> (T, T) {
        match self {
            Model::SquareWell { depth, radius } => {
                if r < *radius {
                    (*depth, T::zero())
                } else {
                    (T::zero(), T::zero())
                }
            }
            Model::Exponential { strength, range } => {
                let v = *strength * (-r / *range).exp();
                (v, -v / *range)
            }
            Model::Gaussian { strength, width } => {
                let x = r / *width;
                let v = *strength * (-x * x).exp();
                (v, -T::lit(2.0) * x * v / *width)
            }
            Model::Zero => (T::zero(), T::zero()),
            Model::Tabulated(t) => t.value_and_derivative(r),
        }
    }

    /// Radii where the model or its derivative jumps.
    pub fn breakpoints(&self) -> Vec<T> {
        match self {
            Model::SquareWell { radius, .. } => vec![*radius],
            Model::Tabulated(t) => vec![t.last_radius()],
            _ => Vec::new(),
        }
    }

    /// Radius beyond which the model vanishes identically, if any.
    pub fn support(&self) -> Option<T> {
        match self {
            Model::SquareWell { radius, .. } => Some(*radius),
            Model::Tabulated(t) => Some(t.last_radius()),
            Model::Zero => Some(T::zero()),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Model::Zero => true,
            Model::SquareWell { depth, .. } => *depth == T::zero(),
            Model::Exponential { strength, .. } => *strength == T::zero(),
            Model::Gaussian { strength, .. } => *strength == T::zero(),
            Model::Tabulated(t) => t.trace().values().iter().all(|v| *v == T::zero()),
        }
    }
}

/// A short-range model plus an optional long-range component and an optional
/// truncation radius applied to the short-range part.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec<T> {
    pub model: Model<T>,
    pub long_range: Option<Model<T>>,
    pub cutoff: Option<T>,
}

impl<T: Real> PotentialSpec<T> {
    pub fn new(model: Model<T>) -> Self {
        Self { model, long_range: None, cutoff: None }
    }

    pub fn zero() -> Self {
        Self::new(Model::Zero)
    }

    pub fn with_long_range(mut self, long: Model<T>) -> Self {
        self.long_range = Some(long);
        self
    }

    /// Short-range part set to zero for `r > r0`.
    pub fn truncated(&self, r0: T) -> Self {
        let cutoff = match self.cutoff {
            Some(c) => c.min(r0),
            None => r0,
        };
        Self { cutoff: Some(cutoff), ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if let Some(l) = &self.long_range {
            l.validate()?;
        }
        if let Some(c) = self.cutoff {
            if c < T::zero() || c.is_nan() {
                return Err(Error::InvalidPotential(format!("cutoff must be non-negative, got {c}")));
            }
        }
        Ok(())
    }

    pub fn length_scale(&self) -> T {
        self.model.length_scale()
    }

    /// `v_s(r)` and its derivative.
    pub fn short_range_with_derivative(&self, r: T) -> (T, T) {
        match self.cutoff {
            Some(c) if r > c => (T::zero(), T::zero()),
            _ => self.model.value_and_derivative(r),
        }
    }

    pub fn short_range(&self, r: T) -> T {
        self.short_range_with_derivative(r).0
    }

    pub fn long_range_with_derivative(&self, r: T) -> (T, T) {
        self.long_range.as_ref().map_or((T::zero(), T::zero()), |m| m.value_and_derivative(r))
    }

    pub fn long_range(&self, r: T) -> T {
        self.long_range_with_derivative(r).0
    }

    /// `V(r) = V_L(r) + v_s(r)` without the barrier.
    pub fn value(&self, r: T) -> T {
        self.long_range(r) + self.short_range(r)
    }

    pub fn breakpoints(&self) -> Vec<T> {
        let mut b = self.model.breakpoints();
        if let Some(l) = &self.long_range {
            b.extend(l.breakpoints());
        }
        if let Some(c) = self.cutoff {
            b.push(c);
        }
        b.retain(|x| *x > T::zero());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.dedup();
        b
    }

    /// Radius beyond which the short-range part vanishes identically.
    pub fn short_range_support(&self) -> Option<T> {
        match (self.model.support(), self.cutoff) {
            (Some(s), Some(c)) => Some(s.min(c)),
            (Some(s), None) => Some(s),
            (None, Some(c)) => Some(c),
            (None, None) => None,
        }
    }

    /// Smallest radius beyond which `|v_s| < 1e-12·E` and
    /// `|r² v_s| < 1e-12·|V(a)|`, the working definition of "decayed".
    pub fn decay_radius(&self, energy: T) -> T {
        if self.model.is_zero() {
            return T::zero();
        }
        if let Some(s) = self.short_range_support() {
            return s;
        }
        let a = self.length_scale();
        let reference = self.model.value(a).abs().max(T::min_positive_value());
        let thresh = T::lit(NEGLIGIBLE);
        let small = |r: T| {
            let v = self.short_range(r).abs();
            v < thresh * energy && r * r * v < thresh * reference
        };
        scan_decay(a, small)
    }

    /// Radius beyond which the long-range part is negligible against `E`.
    pub fn long_range_decay_radius(&self, energy: T) -> T {
        match &self.long_range {
            None => T::zero(),
            Some(m) if m.is_zero() => T::zero(),
            Some(m) => match m.support() {
                Some(s) => s,
                None => scan_decay(m.length_scale(), |r| m.value(r).abs() < T::lit(NEGLIGIBLE) * energy),
            },
        }
    }

    /// Checks the short-range decay requirement at `r_max`.
    pub fn check_decay(&self, r_max: T, energy: T) -> bool {
        if self.model.is_zero() {
            return true;
        }
        let a = self.length_scale();
        let reference = self.model.value(a).abs();
        let v = self.short_range(r_max).abs();
        r_max * r_max * v <= T::lit(NEGLIGIBLE) * reference && v <= T::lit(NEGLIGIBLE) * energy
    }
}

/// First radius on a geometric scan from `a` after which `small` holds.
fn scan_decay<T: Real>(a: T, small: impl Fn(T) -> bool) -> T {
    let cap = T::lit(R_MAX_CAP);
    let factor = T::lit(1.02);
    let mut r = a;
    let mut last_bad = T::zero();
    while r < cap {
        if !small(r) {
            last_bad = r;
        }
        r = r * factor;
    }
    if last_bad == T::zero() {
        return T::zero();
    }
    // bisect between the last failing radius and the next scan point
    let (mut lo, mut hi) = (last_bad, (last_bad * factor).min(cap));
    for _ in 0..60 {
        let mid = T::lit(0.5) * (lo + hi);
        if small(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Potential, angular momentum and energy of one scattering problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringContext<T> {
    pub spec: PotentialSpec<T>,
    pub ell: u32,
    pub energy: T,
    r_max: Option<T>,
}

/// Long-range, centrifugal and short-range pieces of `V_eff`.
#[derive(Debug, Clone, Copy)]
pub struct Partition<'a, T> {
    ctx: &'a ScatteringContext<T>,
}

impl<'a, T: Real> Partition<'a, T> {
    pub fn long(&self, r: T) -> T {
        self.ctx.spec.long_range(r)
    }

    pub fn barrier(&self, r: T) -> T {
        self.ctx.barrier(r)
    }

    pub fn short(&self, r: T) -> T {
        self.ctx.spec.short_range(r)
    }
}

impl<T: Real> ScatteringContext<T> {
    pub fn new(spec: PotentialSpec<T>, ell: u32, energy: T) -> Result<Self> {
        spec.validate()?;
        if ell > MAX_ELL {
            return Err(Error::UnsupportedEll(ell));
        }
        if !(energy > T::zero()) || !energy.is_finite() {
            return Err(Error::NonPositiveEnergy(energy.as_f64()));
        }
        Ok(Self { spec, ell, energy, r_max: None })
    }

    /// Overrides the automatically chosen outer radius.
    pub fn with_r_max(mut self, r_max: T) -> Result<Self> {
        if !(r_max > self.r_min()) {
            return Err(Error::InvalidArgument(format!("r_max {r_max} must exceed r_min {}", self.r_min())));
        }
        self.r_max = Some(r_max);
        Ok(self)
    }

    pub fn with_spec(&self, spec: PotentialSpec<T>) -> Self {
        Self { spec, ..self.clone() }
    }

    pub fn with_energy(&self, energy: T) -> Result<Self> {
        let mut out = Self::new(self.spec.clone(), self.ell, energy)?;
        out.r_max = self.r_max;
        Ok(out)
    }

    /// Same problem with the short-range part truncated beyond `r0`.
    pub fn truncated(&self, r0: T) -> Self {
        self.with_spec(self.spec.truncated(r0))
    }

    /// Asymptotic wavenumber `k = √E`.
    pub fn k(&self) -> T {
        self.energy.sqrt()
    }

    pub fn ell_f(&self) -> T {
        T::from_u32(self.ell).unwrap()
    }

    /// Inner starting radius `1e-6·max(1, a)`.
    pub fn r_min(&self) -> T {
        T::lit(1e-6) * T::one().max(self.spec.length_scale())
    }

    /// Outer radius: explicit override, or twice the larger decay radius of
    /// the short- and long-range parts (at least four length scales), capped
    /// at 10³.
    pub fn r_max(&self) -> T {
        if let Some(r) = self.r_max {
            return r;
        }
        let decay = self
            .spec
            .decay_radius(self.energy)
            .max(self.spec.long_range_decay_radius(self.energy));
        let floor = T::lit(4.0) * self.spec.length_scale();
        (T::lit(2.0) * decay).max(floor).min(T::lit(R_MAX_CAP))
    }

    pub fn has_explicit_r_max(&self) -> bool {
        self.r_max.is_some()
    }

    pub fn barrier(&self, r: T) -> T {
        if self.ell == 0 {
            T::zero()
        } else {
            let l = self.ell_f();
            l * (l + T::one()) / (r * r)
        }
    }

    pub fn partition(&self) -> Partition<'_, T> {
        Partition { ctx: self }
    }

    /// `V(r) + ℓ(ℓ+1)/r²`.
    pub fn effective_potential(&self, r: T) -> Result<T> {
        if !(r > T::zero()) {
            return Err(Error::NonPositiveRadius(r.as_f64()));
        }
        Ok(self.spec.value(r) + self.barrier(r))
    }

    /// `w(r) = E − V_eff(r)`; negative in classically forbidden regions.
    pub fn local_wavenumber_sq(&self, r: T) -> Result<T> {
        Ok(self.energy - self.effective_potential(r)?)
    }

    /// Unchecked `w(r)` for right-hand sides (valid at `r = 0` when `ℓ = 0`).
    pub fn w(&self, r: T) -> T {
        self.energy - self.spec.value(r) - self.barrier(r)
    }

    /// `(w, w')`.
    pub fn w_with_derivative(&self, r: T) -> (T, T) {
        let (vl, dvl) = self.spec.long_range_with_derivative(r);
        let (vs, dvs) = self.spec.short_range_with_derivative(r);
        let (b, db) = if self.ell == 0 {
            (T::zero(), T::zero())
        } else {
            let l = self.ell_f();
            let c = l * (l + T::one());
            (c / (r * r), -T::lit(2.0) * c / (r * r * r))
        };
        (self.energy - vl - vs - b, -dvl - dvs - db)
    }

    /// `(w, w')` on one side of `r`; differs from [`Self::w_with_derivative`]
    /// only at a breakpoint.
    pub fn w_one_sided(&self, r: T, right: bool) -> (T, T) {
        let eps = T::lit(1e-12) * (T::one() + r.abs());
        if !self.breakpoints().iter().any(|&b| (b - r).abs() <= eps) {
            return self.w_with_derivative(r);
        }
        self.w_with_derivative(if right { r + eps } else { r - eps })
    }

    /// `w` for the reference problem `V_L + barrier` (no short-range part).
    pub fn w_long(&self, r: T) -> T {
        self.energy - self.spec.long_range(r) - self.barrier(r)
    }

    pub fn breakpoints(&self) -> Vec<T> {
        self.spec.breakpoints()
    }

    /// Breakpoints strictly inside `(lo, hi)`.
    pub fn breakpoints_within(&self, lo: T, hi: T) -> Vec<T> {
        self.breakpoints().into_iter().filter(|&b| b > lo && b < hi).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ctx(model: Model<f64>, ell: u32, e: f64) -> ScatteringContext<f64> {
        ScatteringContext::new(PotentialSpec::new(model), ell, e).unwrap()
    }

    #[test]
    fn effective_potential_examples() {
        let c = ctx(Model::square_well(-2.0, 1.0), 0, 1.0);
        assert_eq!(c.effective_potential(0.5).unwrap(), -2.0);
        let c = ctx(Model::Zero, 1, 1.0);
        assert_eq!(c.effective_potential(1.0).unwrap(), 2.0);
        let c = ctx(Model::exponential(-1.0, 1.0), 0, 1.0);
        assert_abs_diff_eq!(c.effective_potential(1.0).unwrap(), -(-1.0f64).exp(), epsilon = 1e-15);
        assert!(matches!(c.effective_potential(0.0), Err(Error::NonPositiveRadius(_))));
    }

    #[test]
    fn local_wavenumber_examples() {
        assert_eq!(ctx(Model::Zero, 0, 1.0).local_wavenumber_sq(3.7).unwrap(), 1.0);
        assert_eq!(ctx(Model::square_well(-2.0, 1.0), 0, 1.0).local_wavenumber_sq(0.5).unwrap(), 3.0);
        assert_eq!(ctx(Model::Zero, 1, 1.0).local_wavenumber_sq(1.0).unwrap(), -1.0);
        assert!(ctx(Model::Zero, 1, 1.0).local_wavenumber_sq(-1.0).is_err());
    }

    #[test]
    fn default_partition_puts_everything_short() {
        let c = ctx(Model::square_well(-2.0, 1.0), 0, 1.0);
        let p = c.partition();
        for r in [0.2, 0.9, 1.5] {
            assert_eq!(p.long(r), 0.0);
            assert_eq!(p.short(r), c.spec.model.value(r));
        }
        let z = ctx(Model::Zero, 0, 1.0);
        assert_eq!(z.partition().long(0.3), 0.0);
        assert_eq!(z.partition().short(0.3), 0.0);
    }

    #[test]
    fn long_plus_short_reproduces_effective_potential() {
        use rand::{Rng, SeedableRng};
        let spec = PotentialSpec::new(Model::exponential(-1.5, 0.7)).with_long_range(Model::gaussian(0.8, 2.0));
        let c = ScatteringContext::new(spec, 2, 1.0).unwrap();
        let p = c.partition();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let r: f64 = rng.gen_range(0.01..20.0);
            let direct: f64 = -1.5 * (-r / 0.7).exp() + 0.8 * (-(r / 2.0) * (r / 2.0)).exp() + 6.0 / (r * r);
            let sum = p.long(r) + p.barrier(r) + p.short(r);
            assert_abs_diff_eq!(sum, c.effective_potential(r).unwrap(), epsilon = 1e-14 * direct.abs().max(1.0));
            assert_abs_diff_eq!(sum, direct, epsilon = 1e-13 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn short_range_models_decay_faster_than_inverse_square() {
        for m in [Model::<f64>::exponential(-1.0, 1.0), Model::gaussian(-1.0, 1.0), Model::square_well(-2.0, 1.0)] {
            let a = m.length_scale();
            let mut prev = f64::INFINITY;
            let mut r: f64 = 10.0 * a;
            while r < 200.0 {
                let x = (r * r * m.value(r)).abs();
                assert!(x <= prev, "{m:?} not monotone at {r}");
                prev = x;
                r *= 1.1;
            }
            assert!(prev < 1e-30);
        }
    }

    #[test]
    fn decay_radius_and_default_r_max() {
        let c = ctx(Model::square_well(-2.0, 1.0), 0, 1.0);
        assert_eq!(c.spec.decay_radius(1.0), 1.0);
        assert_eq!(c.r_max(), 4.0);
        let g = ctx(Model::gaussian(-1.0, 1.0), 0, 1.0);
        let d = g.spec.decay_radius(1.0);
        assert!(g.spec.check_decay(d * 1.0001, 1.0));
        assert!(!g.spec.check_decay(d * 0.99, 1.0));
        let e = ctx(Model::exponential(-1.0, 1.0), 0, 1.0);
        assert!(e.r_max() > 60.0 && e.r_max() < 100.0);
        assert_eq!(ctx(Model::Zero, 0, 1.0).r_max(), 4.0);
    }

    #[test]
    fn context_validation() {
        assert!(matches!(
            ScatteringContext::new(PotentialSpec::<f64>::zero(), 7, 1.0),
            Err(Error::UnsupportedEll(7))
        ));
        assert!(matches!(
            ScatteringContext::new(PotentialSpec::<f64>::zero(), 0, -1.0),
            Err(Error::NonPositiveEnergy(_))
        ));
        assert!(ScatteringContext::new(PotentialSpec::new(Model::square_well(-1.0, 0.0)), 0, 1.0).is_err());
    }

    #[test]
    fn truncation_zeroes_the_tail() {
        let spec = PotentialSpec::new(Model::gaussian(-1.0, 1.0)).truncated(0.5);
        assert_eq!(spec.short_range(0.6), 0.0);
        assert_eq!(spec.short_range(0.4), -(-0.16f64).exp());
        assert_eq!(spec.breakpoints(), vec![0.5]);
        assert_eq!(spec.decay_radius(1.0), 0.5);
    }

    #[test]
    fn tabulated_parse_and_clamp() {
        let text = "# r V\n0 -1\n0.5, -0.5  # inline\n1.0 -0.25\n\n2.0 0.0\n";
        let t = Tabulated::<f64>::parse(text).unwrap();
        let m = Model::Tabulated(t);
        assert_eq!(m.value(0.5), -0.5);
        assert_eq!(m.value(2.5), 0.0);
        assert_eq!(m.breakpoints(), vec![2.0]);
        assert!(Tabulated::<f64>::parse("0 1\n0 2\n").is_err());
        assert!(Tabulated::<f64>::parse("0.1 1\n0.2 2\n").is_err());
        assert!(Tabulated::<f64>::parse("0 1 3\n").is_err());
    }

    proptest! {
        #[test]
        fn partition_is_additive(r in 1e-3f64..50.0, v0 in -5.0f64..5.0, a in 0.2f64..3.0, ell in 0u32..=6) {
            let spec = PotentialSpec::new(Model::gaussian(v0, a)).with_long_range(Model::exponential(-v0 / 2.0, a));
            let c = ScatteringContext::new(spec, ell, 1.0).unwrap();
            let p = c.partition();
            let veff = c.effective_potential(r).unwrap();
            prop_assert!((p.long(r) + p.barrier(r) + p.short(r) - veff).abs() <= 1e-14 * veff.abs().max(1.0));
        }
    }
}
