use super::{integrate_ivp_with_stops, IntegratorConfig, OdeSolution};
use crate::{Error, Real, Result};

/// `∫_a^b f(r) dr`, carried as an extra integrator state so the result
/// obeys the same tolerance control as the solvers.
pub fn quadrature<T: Real>(f: impl Fn(T) -> T, a: T, b: T, cfg: &IntegratorConfig<T>) -> Result<T> {
    quadrature_with_stops(f, a, b, &[], cfg)
}

/// [`quadrature`] with declared discontinuities of the integrand.
pub fn quadrature_with_stops<T: Real>(
    f: impl Fn(T) -> T,
    a: T,
    b: T,
    stops: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<T> {
    if a > b {
        return Err(Error::InvalidArgument(format!("quadrature bounds reversed: [{a}, {b}]")));
    }
    if a == b {
        return Ok(T::zero());
    }
    Ok(cumulative_quadrature(f, a, b, stops, cfg)?.last()[0])
}

/// Running integral `I(r) = ∫_a^r f`, in either direction.
///
/// The per-step tolerances are a tenth of the configured ones so that the
/// accumulated (global) error of the integral stays within the configured
/// tolerance.
pub fn cumulative_quadrature<T: Real>(
    f: impl Fn(T) -> T,
    a: T,
    b: T,
    stops: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<OdeSolution<T, 1>> {
    let tenth = T::lit(0.1);
    let local = IntegratorConfig { abs_tol: cfg.abs_tol * tenth, rel_tol: cfg.rel_tol * tenth, ..*cfg };
    integrate_ivp_with_stops(|r, _: &[T; 1]| [f(r)], [T::zero()], (a, b), stops, &local)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn sine_over_half_period() {
        let v = quadrature(f64::sin, 0.0, PI, &IntegratorConfig::default()).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn constant_integrand() {
        let v = quadrature(|_| 1.0, 0.0, 1.0, &IntegratorConfig::default()).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn truncated_exponential_tail() {
        let v = quadrature(|r: f64| (-r).exp(), 0.0, 40.0, &IntegratorConfig::default()).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn empty_interval_and_reversed_bounds() {
        let cfg = IntegratorConfig::default();
        assert_eq!(quadrature(|r: f64| r, 2.0, 2.0, &cfg).unwrap(), 0.0);
        assert!(quadrature(|r: f64| r, 2.0, 1.0, &cfg).is_err());
    }

    #[test]
    fn step_function_with_stop() {
        let v = quadrature_with_stops(
            |r: f64| if r < 0.3 { 2.0 } else { -1.0 },
            0.0,
            1.0,
            &[0.3],
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(v, 0.6 - 0.7, epsilon = 1e-14);
    }
}
