use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures reported by the solvers. Radii and step sizes are carried as
/// `f64` regardless of the scalar type in use.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("step size underflow at r = {r}: h = {step} below minimum")]
    StepUnderflow { r: f64, step: f64 },
    #[error("maximum number of steps ({max_steps}) exceeded at r = {r}")]
    MaxStepsExceeded { r: f64, max_steps: usize },
    #[error("non-finite state encountered at r = {r}")]
    NonFiniteState { r: f64 },
    #[error("radius {r} outside the sampled range [{lo}, {hi}]")]
    OutOfRange { r: f64, lo: f64, hi: f64 },
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("angular momentum {0} unsupported (allowed 0..=6)")]
    UnsupportedEll(u32),
    #[error("argument must be positive, got {0}")]
    NonPositiveArgument(f64),
    #[error("energy must be positive, got {0}")]
    NonPositiveEnergy(f64),
    #[error("invalid square well: depth {depth}, energy {energy}")]
    InvalidWell { depth: f64, energy: f64 },
    #[error("classical turning point (w <= 0) inside the span near r = {r}")]
    TurningPointInSpan { r: f64 },
    #[error("grid too coarse: stencil error {estimate:e} exceeds tolerance {tolerance:e}")]
    GridTooCoarse { estimate: f64, tolerance: f64 },
    #[error("amplitude collapsed to {alpha:e} at r = {r}")]
    AmplitudeCollapse { r: f64, alpha: f64 },
    #[error("wave function vanishes at every attempted matching radius (last r = {r})")]
    NodeAtMatch { r: f64 },
    #[error("matching radius {r} still inside the potential (V = {potential:e})")]
    MatchRadiusTooSmall { r: f64, potential: f64 },
    #[error("short-range potential is not integrable against the regular solution at the origin")]
    SingularShortRange,
    #[error("trial phase must vanish at the inner radius, got {0:e}")]
    TrialBoundaryViolation(f64),
    #[error("perturbation errors all below the noise floor {floor:e}")]
    DegeneratePerturbation { floor: f64 },
    #[error("the adjoint is fixed at the outer radius; an origin anchor was requested")]
    AdjointAnchoredAtOrigin,
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
