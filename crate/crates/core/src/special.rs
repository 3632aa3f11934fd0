//! Airy function, GOE edge density, semicircle law and log-gamma.
//!
//! Ai and Ai' use a Taylor continuation of `y'' = x y` from integer anchors on
//! `[-10, 8]` and the standard asymptotic expansions outside that window. The
//! anchors are seeded from the Maclaurin data at zero on the oscillatory side
//! and from the decaying asymptotic series at `x = 8` on the other side, so
//! every stepping direction is numerically stable.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{domain, finite, Result};
use crate::quad;
use crate::roots;

pub const AI0: f64 = 0.355_028_053_887_817_24;
pub const AIP0: f64 = -0.258_819_403_792_806_8;

const ANCHOR_LO: i32 = -10;
const ANCHOR_HI: i32 = 8;

fn taylor(x0: f64, y: f64, yp: f64, h: f64) -> (f64, f64) {
    // a_{k+2} (k+2)(k+1) = x0 a_k + a_{k-1}
    let mut a_km1 = 0.0;
    let mut a_k = y;
    let mut a_k1 = yp;
    let mut val = y + yp * h;
    let mut der = yp;
    let mut hp = h; // h^(k+1) for k = 0
    let mut small = 0;
    for k in 0..120 {
        let kf = k as f64;
        let a_k2 = (x0 * a_k + a_km1) / ((kf + 2.0) * (kf + 1.0));
        let dv = a_k2 * hp * h;
        let dd = (kf + 2.0) * a_k2 * hp;
        val += dv;
        der += dd;
        hp *= h;
        a_km1 = a_k;
        a_k = a_k1;
        a_k1 = a_k2;
        if dv.abs() <= 1e-18 * (val.abs() + 1e-300) && dd.abs() <= 1e-18 * (der.abs() + 1e-300) {
            small += 1;
            if small > 3 {
                break;
            }
        } else {
            small = 0;
        }
    }
    (val, der)
}

fn anchors() -> &'static Vec<(f64, f64)> {
    static A: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    A.get_or_init(|| {
        let len = (ANCHOR_HI - ANCHOR_LO + 1) as usize;
        let mut out = vec![(0.0, 0.0); len];
        let idx = |j: i32| (j - ANCHOR_LO) as usize;
        out[idx(0)] = (AI0, AIP0);
        let mut cur = (AI0, AIP0);
        for j in (ANCHOR_LO..0).rev() {
            cur = taylor(j as f64 + 1.0, cur.0, cur.1, -1.0);
            out[idx(j)] = cur;
        }
        let mut cur = asymptotic_pos(ANCHOR_HI as f64);
        out[idx(ANCHOR_HI)] = cur;
        for j in (1..ANCHOR_HI).rev() {
            cur = taylor(j as f64 + 1.0, cur.0, cur.1, -1.0);
            out[idx(j)] = cur;
        }
        out
    })
}

fn u_coeffs() -> &'static Vec<f64> {
    static U: OnceLock<Vec<f64>> = OnceLock::new();
    U.get_or_init(|| {
        let mut u = vec![1.0];
        for k in 1..40 {
            let kf = k as f64;
            let prev = u[k - 1];
            u.push(prev * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf));
        }
        u
    })
}

fn v_coeff(k: usize) -> f64 {
    let kf = k as f64;
    -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u_coeffs()[k]
}

/// Sum an alternating-sign asymptotic series until the terms stop shrinking.
fn asym_sum(coef: impl Fn(usize) -> f64, zeta: f64, start: usize, stride: usize) -> f64 {
    let mut s = 0.0;
    let mut last = f64::INFINITY;
    let mut sign = 1.0;
    let mut k = start;
    while k < u_coeffs().len() {
        let t = coef(k) / zeta.powi(k as i32);
        if t.abs() > last {
            break;
        }
        s += sign * t;
        last = t.abs();
        if last < 1e-17 * s.abs() {
            break;
        }
        sign = -sign;
        k += stride;
    }
    s
}

fn asymptotic_pos(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    let su = asym_sum(|k| u_coeffs()[k], zeta, 0, 1);
    let sv = asym_sum(|k| if k == 0 { 1.0 } else { v_coeff(k) }, zeta, 0, 1);
    (e / x.powf(0.25) * su, -e * x.powf(0.25) * sv)
}

fn asymptotic_neg(x: f64) -> (f64, f64) {
    let t = -x;
    let zeta = 2.0 / 3.0 * t.powf(1.5);
    let ph = zeta - PI / 4.0;
    let (s, c) = ph.sin_cos();
    let u = |k: usize| u_coeffs()[k];
    let v = |k: usize| if k == 0 { 1.0 } else { v_coeff(k) };
    let ue = asym_sum(u, zeta, 0, 2);
    let uo = asym_sum(u, zeta, 1, 2);
    let ve = asym_sum(v, zeta, 0, 2);
    let vo = asym_sum(v, zeta, 1, 2);
    let amp = 1.0 / PI.sqrt();
    let ai = amp / t.powf(0.25) * (c * ue + s * uo);
    let aip = amp * t.powf(0.25) * (s * ve - c * vo);
    (ai, aip)
}

/// `(Ai(x), Ai'(x))` without input validation.
pub(crate) fn airy_pair(x: f64) -> (f64, f64) {
    if x > ANCHOR_HI as f64 + 0.5 {
        if x > 110.0 {
            return (0.0, 0.0);
        }
        return asymptotic_pos(x);
    }
    if x < ANCHOR_LO as f64 - 0.5 {
        return asymptotic_neg(x);
    }
    let j = (x.round() as i32).clamp(ANCHOR_LO, ANCHOR_HI);
    let (y, yp) = anchors()[(j - ANCHOR_LO) as usize];
    taylor(j as f64, y, yp, x - j as f64)
}

/// Airy function Ai(x).
pub fn airy_ai(x: f64) -> Result<f64> {
    finite(x, "x")?;
    Ok(airy_pair(x).0)
}

/// Derivative Ai'(x).
pub fn airy_ai_prime(x: f64) -> Result<f64> {
    finite(x, "x")?;
    Ok(airy_pair(x).1)
}

pub(crate) fn tail_integral_raw(x: f64) -> f64 {
    if x < 0.0 {
        // ∫_0^∞ Ai = 1/3 (checked against the quadrature path in tests)
        let head = quad::adaptive(|t| airy_pair(t).0, x, 0.0, 1e-15, 1e-14).unwrap_or_else(|_| quad::integrate_panels(|t| airy_pair(t).0, x, 0.0, 400));
        return 1.0 / 3.0 + head;
    }
    if x > 40.0 {
        return asymptotic_tail(x);
    }
    let upper = x + 12.0;
    let body = quad::integrate_panels(|t| airy_pair(t).0, x, upper, 24);
    body + asymptotic_tail(upper)
}

fn asymptotic_tail(x: f64) -> f64 {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    (-zeta).exp() / (2.0 * PI.sqrt() * x.powf(0.75)) * (1.0 - 41.0 / (72.0 * zeta))
}

/// `∫_x^∞ Ai(t) dt`.
pub fn airy_ai_tail_integral(x: f64) -> Result<f64> {
    finite(x, "x")?;
    Ok(tail_integral_raw(x))
}

/// GOE edge density `Ai'² − λAi² + ½Ai(1 − ∫_λ^∞ Ai)`.
pub fn rho_edge(lambda: f64) -> Result<f64> {
    finite(lambda, "lambda")?;
    Ok(rho_edge_raw(lambda))
}

pub(crate) fn rho_edge_raw(lambda: f64) -> f64 {
    let (ai, aip) = airy_pair(lambda);
    let v = aip * aip - lambda * ai * ai + 0.5 * ai * (1.0 - tail_integral_raw(lambda));
    v.max(0.0)
}

/// Semicircle density on [-1, 1].
pub fn rho_sc(lambda: f64) -> Result<f64> {
    finite(lambda, "lambda")?;
    if lambda.abs() > 1.0 {
        return domain(format!("rho_sc needs |lambda| <= 1, got {lambda}"));
    }
    Ok(2.0 / PI * (1.0 - lambda * lambda).sqrt())
}

/// Mass of the semicircle law above `lambda`.
pub fn semicircle_cdf(lambda: f64) -> Result<f64> {
    finite(lambda, "lambda")?;
    if lambda.abs() > 1.0 {
        return domain(format!("semicircle_cdf needs |lambda| <= 1, got {lambda}"));
    }
    Ok(semicircle_cdf_raw(lambda))
}

pub(crate) fn semicircle_cdf_raw(lambda: f64) -> f64 {
    (lambda.acos() - lambda * (1.0 - lambda * lambda).sqrt()) / PI
}

/// Inverse of [`semicircle_cdf`]: the point with mass `x` above it.
pub fn semicircle_quantile(x: f64) -> Result<f64> {
    finite(x, "x")?;
    if !(0.0..=1.0).contains(&x) {
        return domain(format!("quantile level must lie in [0, 1], got {x}"));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x == 1.0 {
        return Ok(-1.0);
    }
    if x == 0.5 {
        return Ok(0.0);
    }
    roots::safeguarded_newton(
        |q| (semicircle_cdf_raw(q) - x, -2.0 / PI * (1.0 - q * q).max(0.0).sqrt()),
        -1.0,
        1.0,
        1e-15,
    )
}

/// Natural log of the gamma function.
pub fn ln_gamma(x: f64) -> Result<f64> {
    finite(x, "x")?;
    if x <= 0.0 {
        return domain(format!("ln_gamma needs x > 0, got {x}"));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}
