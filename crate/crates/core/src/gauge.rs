//! The gauge family `ψ_β = α e^{iθ}`, `θ' = β`, with connection
//! `A_β = 1/α² − β`.
//!
//! Every member satisfies `[(d/dr + iA_β)² + w] ψ_β = 0`. `β = 0` gives the
//! amplitude equation and `β = 1/α²` the radial equation for the travelling
//! wave `α e^{iφ}`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use crate::milne::MilneSolution;
use crate::numerics::{cumulative_quadrature, IntegratorConfig};
use crate::potentials::ScatteringContext;
use crate::{Error, Real, Result};

type BetaFn<T> = Arc<dyn Fn(T) -> (T, T) + Send + Sync>;

/// A choice of `β(r)`.
#[derive(Clone)]
pub enum GaugeFunction<T> {
    Zero,
    /// `β = 1/α²`.
    MilneInverseSquare,
    /// `β = c/α²`.
    Scaled(T),
    /// `β = e^{−r} sin r`.
    DampedSine,
    /// Any `r ↦ (β, β')`.
    Custom { tag: String, beta: BetaFn<T> },
}

impl<T: Real> GaugeFunction<T> {
    pub fn custom(tag: impl Into<String>, beta: impl Fn(T) -> (T, T) + Send + Sync + 'static) -> Self {
        GaugeFunction::Custom { tag: tag.into(), beta: Arc::new(beta) }
    }

    pub fn tag(&self) -> String {
        match self {
            GaugeFunction::Zero => "zero".into(),
            GaugeFunction::MilneInverseSquare => "milne-inverse-square".into(),
            GaugeFunction::Scaled(c) => format!("scaled:{c}"),
            GaugeFunction::DampedSine => "damped-sine".into(),
            GaugeFunction::Custom { tag, .. } => tag.clone(),
        }
    }

    /// `(β, β')` at `r` given the amplitude and its slope there.
    pub fn eval(&self, r: T, alpha: T, dalpha: T) -> (T, T) {
        let inv_sq = |c: T| (c / (alpha * alpha), -T::lit(2.0) * c * dalpha / (alpha * alpha * alpha));
        match self {
            GaugeFunction::Zero => (T::zero(), T::zero()),
            GaugeFunction::MilneInverseSquare => inv_sq(T::one()),
            GaugeFunction::Scaled(c) => inv_sq(*c),
            GaugeFunction::DampedSine => {
                let e = (-r).exp();
                let (s, c) = r.sin_cos();
                (e * s, e * (c - s))
            }
            GaugeFunction::Custom { beta, .. } => beta(r),
        }
    }
}

impl<T: Real> fmt::Debug for GaugeFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GaugeFunction({})", self.tag())
    }
}

impl<T: Real> std::str::FromStr for GaugeFunction<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(GaugeFunction::Zero),
            "milne-inverse-square" => Ok(GaugeFunction::MilneInverseSquare),
            "damped-sine" => Ok(GaugeFunction::DampedSine),
            _ => {
                let c = s
                    .strip_prefix("scaled:")
                    .and_then(|c| c.parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown gauge '{s}'")))?;
                Ok(GaugeFunction::Scaled(T::lit(c)))
            }
        }
    }
}

/// `ψ_β` on the amplitude nodes with `θ(r_min) = 0`.
#[derive(Debug, Clone)]
pub struct ComplexWaveTrace<T> {
    pub nodes: Vec<T>,
    pub theta: Vec<T>,
    pub psi: Vec<Complex<T>>,
    /// `A_β = 1/α² − β`.
    pub connection: Vec<T>,
    pub beta_tag: String,
}

pub fn gauge_transform<T: Real>(
    sol: &MilneSolution<T>,
    gf: &GaugeFunction<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<ComplexWaveTrace<T>> {
    let alpha = &sol.alpha;
    let nodes = alpha.nodes();
    let beta = |r: T| {
        let (a, da) = alpha.eval_clamped(r);
        gf.eval(r, a, da).0
    };
    let run = cumulative_quadrature(beta, alpha.lo(), alpha.hi(), &nodes[1..nodes.len() - 1], cfg)?;
    let mut theta = Vec::with_capacity(nodes.len());
    let mut j = 0;
    for &x in nodes {
        while run.nodes()[j] != x {
            j += 1;
        }
        theta.push(run.states()[j][0]);
    }
    let mut psi = Vec::with_capacity(nodes.len());
    let mut connection = Vec::with_capacity(nodes.len());
    for ((&r, &a), (&da, &t)) in nodes.iter().zip(alpha.values()).zip(alpha.derivs().iter().zip(&theta)) {
        psi.push(Complex::from_polar(a, t));
        connection.push((a * a).recip() - gf.eval(r, a, da).0);
    }
    Ok(ComplexWaveTrace { nodes: nodes.to_vec(), theta, psi, connection, beta_tag: gf.tag() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaugeResidualReport<T> {
    pub max_abs_residual: T,
    pub max_imag_residual: T,
    /// Largest individual operator term.
    pub scale: T,
    pub beta_tag: String,
}

impl<T: Real> GaugeResidualReport<T> {
    pub fn relative(&self) -> T {
        if self.scale > T::zero() {
            self.max_abs_residual / self.scale
        } else {
            self.max_abs_residual
        }
    }
}

/// `e^{−iθ} [(d/dr + iA_β)² + w] ψ_β`, expanded:
/// `α'' + wα − (β+A)²α + i(2(β+A)α' + (β'+A')α)`, evaluated at the interval
/// midpoints of the amplitude trace.
pub fn gauge_residual<T: Real>(
    sol: &MilneSolution<T>,
    gf: &GaugeFunction<T>,
    ctx: &ScatteringContext<T>,
) -> Result<GaugeResidualReport<T>> {
    let two = T::lit(2.0);
    let mut max_abs = T::zero();
    let mut max_imag = T::zero();
    let mut scale = T::zero();
    for r in sol.alpha.midpoints() {
        let (a, da, dda) = sol.alpha_full(r)?;
        let (b, db) = gf.eval(r, a, da);
        let conn = (a * a).recip() - b;
        let dconn = -two * da / (a * a * a) - db;
        let k = b + conn;
        let wa = ctx.w(r) * a;
        let quad = k * k * a;
        let re = dda + wa - quad;
        let lin = two * k * da;
        let drift = (db + dconn) * a;
        let im = lin + drift;
        max_abs = max_abs.max(re.hypot(im));
        max_imag = max_imag.max(im.abs());
        scale = scale.max(dda.abs()).max(wa.abs()).max(quad.abs()).max(lin.abs()).max(drift.abs());
    }
    Ok(GaugeResidualReport { max_abs_residual: max_abs, max_imag_residual: max_imag, scale, beta_tag: gf.tag() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CancellationReport<T> {
    pub max_abs: T,
    /// `max |2Aα'|`.
    pub scale: T,
}

/// `max |2Aα' + A'α|` over the amplitude nodes with `A = c/α²`.
pub fn imaginary_cancellation_check<T: Real>(sol: &MilneSolution<T>, scale_c: T) -> Result<CancellationReport<T>> {
    cancellation_with_power(sol, scale_c, T::lit(2.0))
}

/// As [`imaginary_cancellation_check`] with `A = c/α^p`; only `p = 2`
/// cancels.
pub fn cancellation_with_power<T: Real>(sol: &MilneSolution<T>, scale_c: T, p: T) -> Result<CancellationReport<T>> {
    if scale_c == T::zero() {
        return Err(Error::InvalidArgument("connection scale must be nonzero".into()));
    }
    let two = T::lit(2.0);
    let mut max_abs = T::zero();
    let mut scale = T::zero();
    for (&a, &da) in sol.alpha.values().iter().zip(sol.alpha.derivs()) {
        let conn = scale_c / a.powf(p);
        let dconn = -p * scale_c * da / a.powf(p + T::one());
        let lin = two * conn * da;
        max_abs = max_abs.max((lin + dconn * a).abs());
        scale = scale.max(lin.abs());
    }
    Ok(CancellationReport { max_abs, scale })
}
