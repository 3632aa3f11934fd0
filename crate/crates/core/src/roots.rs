//! Bracketed root finding and one-dimensional maximization.

use crate::error::{Error, Result};

/// Bisection on a sign-changing bracket, stopping at width `tol`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::NoBracket(format!("f({a})={fa}, f({b})={fb}")));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m == a || m == b {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Newton steps guarded by a bracket; falls back to bisection when a step
/// leaves the bracket. `fd` returns `(f, f')`.
pub fn safeguarded_newton<F: FnMut(f64) -> (f64, f64)>(mut fd: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let (fa, _) = fd(a);
    let (fb, _) = fd(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoBracket(format!("f({a})={fa}, f({b})={fb}")));
    }
    let rising = fb > fa;
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let (fx, dx) = fd(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx > 0.0) == rising {
            b = x;
        } else {
            a = x;
        }
        let mut next = x - fx / dx;
        if !next.is_finite() || next <= a.min(b) || next >= a.max(b) {
            next = 0.5 * (a + b);
        }
        if (next - x).abs() <= tol {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Golden-section search for the maximum of a unimodal function.
pub fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol * (1.0 + c.abs()) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
