//! Adaptive initial-value integration, augmented-state quadrature and sampled traces.

mod ode;
mod quad;
mod trace;

pub use ode::{integrate_ivp, ErrorNorm, integrate_ivp_with_stops, IntegratorConfig, OdeSolution, StepStats};
pub use quad::{cumulative_quadrature, quadrature, quadrature_with_stops};
pub use trace::{max_node_residual, node_residuals, union_nodes, SecondDerivative, Trace};
