//! Recurrence output against exact power-series sums in rational arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use phasekit::freepair::riccati_bessel;
use rand::{rngs::StdRng, Rng, SeedableRng};

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn pow(x: &BigRational, p: i32) -> BigRational {
    if p >= 0 {
        num_traits::pow(x.clone(), p as usize)
    } else {
        num_traits::pow(x.recip(), (-p) as usize)
    }
}

/// `Σ_k c_k x^{p+2k}` and its derivative, where `c_k = (−1/2)^k / (k! ∏_{j≤k} d(j))`.
fn series(x: &BigRational, p: i32, lead: BigRational, d: impl Fn(i64) -> i64) -> (BigRational, BigRational) {
    let tiny = BigRational::new(BigInt::one(), BigInt::from(10).pow(40));
    let x2 = x * x;
    let xinv = x.recip();
    let min_terms = x.to_f64().unwrap();
    let mut coeff = lead;
    let mut xp = pow(x, p);
    let mut value = BigRational::zero();
    let mut deriv = BigRational::zero();
    let mut k: i64 = 0;
    loop {
        let e = p + 2 * k as i32;
        let term = &coeff * &xp;
        deriv += &term * rat(e as i64) * &xinv;
        value += &term;
        k += 1;
        coeff = coeff * rat(-1) / (rat(2) * rat(k) * rat(d(k)));
        xp *= &x2;
        if (k as f64) > min_terms && term.abs() < tiny {
            break;
        }
    }
    (value, deriv)
}

fn double_factorial(n: i64) -> i64 {
    (1..=n).rev().step_by(2).product::<i64>().max(1)
}

/// Exact `(S, S', C, C')` from the power series of `x j_ℓ` and `x y_ℓ`.
fn oracle(ell: i64, x: &BigRational) -> [f64; 4] {
    let (s, ds) = series(x, ell as i32 + 1, BigRational::new(BigInt::one(), BigInt::from(double_factorial(2 * ell + 1))), |j| {
        2 * ell + 2 * j + 1
    });
    let (c, dc) = series(x, -(ell as i32), rat(-double_factorial(2 * ell - 1)), |j| 2 * j - 1 - 2 * ell);
    [s, ds, c, dc].map(|v| v.to_f64().unwrap())
}

#[test]
fn recurrence_matches_exact_series() {
    let mut rng = StdRng::seed_from_u64(7);
    for ell in 2..=6u32 {
        for _ in 0..50 {
            // dyadic points so the f64 argument is exactly the rational one
            let n: i64 = rng.gen_range(103..51_200);
            let x = n as f64 / 1024.0;
            let exact = oracle(ell as i64, &BigRational::new(BigInt::from(n), BigInt::from(1024)));
            let rb = riccati_bessel(ell, x).unwrap();
            for (got, want) in [rb.s, rb.ds, rb.c, rb.dc].into_iter().zip(exact) {
                let scale = want.abs().max(if x > ell as f64 + 1.0 { 1.0 } else { 0.0 });
                assert!(
                    (got - want).abs() <= 1e-10 * scale,
                    "ell {ell} x {x}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn series_oracle_reproduces_closed_forms() {
    let x = BigRational::new(BigInt::from(3), BigInt::from(2));
    let [s, ds, c, dc] = oracle(0, &x);
    assert!((s - 1.5f64.sin()).abs() < 1e-15);
    assert!((ds - 1.5f64.cos()).abs() < 1e-15);
    assert!((c + 1.5f64.cos()).abs() < 1e-15);
    assert!((dc - 1.5f64.sin()).abs() < 1e-15);
    let [s1, ..] = oracle(1, &x);
    assert!((s1 - (1.5f64.sin() / 1.5 - 1.5f64.cos())).abs() < 1e-15);
}
