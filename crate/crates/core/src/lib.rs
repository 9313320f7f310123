//! Phase-amplitude methods for the radial Schrödinger equation
//! `u'' + (E - V_eff(r)) u = 0`.
//!
//! The crate computes scattering phase shifts and wave functions several
//! independent ways:
//!
//! * [`direct`]: outward integration of the linear equation plus asymptotic matching.
//! * [`milne`]: the nonlinear amplitude equation `α'' + w α = α⁻³` and its
//!   quadrature phase `φ' = α⁻²`.
//! * [`vpa`]: variable-phase functions, both the local-wavenumber form and the
//!   form partitioned against a reference pair `(f, g)`.
//! * [`variational`]: the adjoint-corrected estimate of the asymptotic phase
//!   built from an arbitrary trial phase function.
//! * [`jwkb`]: the semiclassical wave and its exact residual identity.
//! * [`gauge`]: numerical checks of the gauge family `α e^{i∫β}`.
//!
//! All numerics are generic over [`Real`]; `f64` aliases live at the crate root.

pub mod direct;
pub mod error;
pub mod freepair;
pub mod gauge;
pub mod jwkb;
pub mod milne;
pub mod numerics;
pub mod phase;
pub mod potentials;
pub mod variational;
pub mod vpa;

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub use error::{Error, Result};

/// Scalar type accepted by every solver in the crate.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Lossy conversion used for diagnostics and error payloads.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}



pub type Context64 = potentials::ScatteringContext<f64>;
pub type Context32 = potentials::ScatteringContext<f32>;
pub type Potential64 = potentials::PotentialSpec<f64>;
pub type Potential32 = potentials::PotentialSpec<f32>;
pub type Config64 = numerics::IntegratorConfig<f64>;
pub type Config32 = numerics::IntegratorConfig<f32>;
pub type Trace64 = numerics::Trace<f64>;
pub type Trace32 = numerics::Trace<f32>;
pub type PhaseShift64 = direct::PhaseShiftResult<f64>;
pub type PhaseShift32 = direct::PhaseShiftResult<f32>;
pub type Milne64 = milne::MilneSolution<f64>;
pub type Milne32 = milne::MilneSolution<f32>;
pub type PhaseFunction64 = vpa::PhaseFunctionTrace<f64>;
pub type PhaseFunction32 = vpa::PhaseFunctionTrace<f32>;
pub type Gauge64 = gauge::GaugeFunction<f64>;
pub type Gauge32 = gauge::GaugeFunction<f32>;
