//! Branch handling for phase shifts, which are defined modulo π.

use crate::Real;

/// Reduces a phase to the principal interval `(−π/2, π/2]`.
pub fn principal<T: Real>(delta: T) -> T {
    let pi = T::PI();
    let half = pi / T::lit(2.0);
    let mut d = delta - (delta / pi).round() * pi;
    if d <= -half {
        d = d + pi;
    } else if d > half {
        d = d - pi;
    }
    d
}

/// Signed distance between two phases modulo π, in `(−π/2, π/2]`.
pub fn diff_mod_pi<T: Real>(a: T, b: T) -> T {
    principal(a - b)
}

/// Shifts each value by a multiple of π so that neighbours differ by at most
/// π/2, anchored at `values[anchor]`.
pub fn unwrap_from<T: Real>(values: &[T], anchor: usize) -> Vec<T> {
    let mut out = values.to_vec();
    if values.is_empty() {
        return out;
    }
    for i in anchor + 1..out.len() {
        out[i] = out[i - 1] + diff_mod_pi(values[i], out[i - 1]);
    }
    for i in (0..anchor).rev() {
        out[i] = out[i + 1] + diff_mod_pi(values[i], out[i + 1]);
    }
    out
}
