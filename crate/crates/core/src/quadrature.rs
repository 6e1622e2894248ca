//! Adaptive Simpson quadrature with interval bisection.

use crate::error::{Error, Result};
use crate::scalar::Real;

fn simpson<T: Real>(f: &impl Fn(T) -> T, a: T, b: T) -> T {
    let half = T::from_f64_lossy(0.5);
    let sixth = T::from_f64_lossy(1.0 / 6.0);
    let m = (a + b) * half;
    (b - a) * sixth * (f(a) + T::from_f64_lossy(4.0) * f(m) + f(b))
}

fn adaptive<T: Real>(
    f: &impl Fn(T) -> T,
    a: T,
    b: T,
    whole: T,
    tol: T,
    depth: usize,
) -> Result<T> {
    if depth == 0 {
        return Err(Error::QuadratureNonConvergence {
            a: a.to_f64().unwrap_or(f64::NAN),
            b: b.to_f64().unwrap_or(f64::NAN),
        });
    }
    let half = T::from_f64_lossy(0.5);
    let m = (a + b) * half;
    let left = simpson(f, a, m);
    let right = simpson(f, m, b);
    let err = left + right - whole;
    if err.abs() <= T::from_f64_lossy(15.0) * tol {
        // Richardson correction term.
        return Ok(left + right + err / T::from_f64_lossy(15.0));
    }
    let half_tol = tol * half;
    Ok(adaptive(f, a, m, left, half_tol, depth - 1)?
        + adaptive(f, m, b, right, half_tol, depth - 1)?)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<T: Real>(f: impl Fn(T) -> T, a: T, b: T, tol: T) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let whole = simpson(&f, a, b);
    adaptive(&f, a, b, whole, tol, 60)
}
