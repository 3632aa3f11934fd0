//! Gauss-Legendre quadrature, adaptive bisection and log-space helpers.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    if n == 1 {
        p0 = 1.0;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

pub(crate) fn gl20() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(20))
}

pub(crate) fn gl10() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(10))
}

/// Fixed-order rule on `[a, b]` split into `panels` equal panels.
pub fn integrate_panels<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gl20();
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let c = lo + 0.5 * h;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(w) {
            s += wi * f(c + 0.5 * h * xi);
        }
        total += 0.5 * h * s;
    }
    total
}

fn panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    panel_abs(f, a, b, rule).0
}

fn panel_abs<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    let mut m = 0.0;
    for (xi, wi) in rule.0.iter().zip(&rule.1) {
        let v = wi * f(c + h * xi);
        s += v;
        m += v.abs();
    }
    (s * h, m * h.abs())
}

/// Adaptive bisection with a 10/20-point comparison on each panel.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let scale = panel(&mut f, a, b, gl20()).abs();
    let tol = abs_tol.max(rel_tol * scale);
    let mut stack = vec![(a, b, 0u32)];
    let mut total = 0.0;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (fine, magnitude) = panel_abs(&mut f, lo, hi, gl20());
        let coarse = panel(&mut f, lo, hi, gl10());
        let err = (fine - coarse).abs();
        if err <= tol * ((hi - lo) / (b - a)).abs() || err <= 100.0 * f64::EPSILON * magnitude {
            total += fine;
        } else if depth >= 120 {
            return Err(Error::Convergence(format!("adaptive quadrature on [{a}, {b}] near {lo}")));
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    Ok(total)
}

/// `ln(sum(exp(v)))`, returning `-inf` for empty or all-`-inf` input.
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `ln ∫_a^b exp(phi(x)) dx` by panelled Gauss-Legendre, shifting by the
/// largest node value so nothing overflows.
pub fn log_integrate<F: FnMut(f64) -> f64>(mut phi: F, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gl20();
    let h = (b - a) / panels as f64;
    let mut terms = Vec::with_capacity(panels * x.len());
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(w) {
            terms.push(phi(c + 0.5 * h * xi) + (0.5 * h * wi).ln());
        }
    }
    log_sum_exp(&terms)
}

/// `ln ∫ exp(phi(x)) dx` for a unimodal log-integrand on `(lo, hi)`.
///
/// Locates the peak, widens the window until `phi` has dropped by 60 on both
/// sides (or the interval ends), then doubles panels until stable.
pub fn log_integrate_peaked<F: Fn(f64) -> f64>(phi: F, lo: f64, hi: f64) -> Result<f64> {
    let peak = crate::roots::golden_max(&phi, lo, hi, 1e-10);
    let top = phi(peak);
    if !top.is_finite() {
        return Err(Error::Convergence(format!("log integrand not finite at peak {peak}")));
    }
    let mut step = 1e-3 * (1.0 + peak.abs());
    let mut left = peak;
    while left > lo && phi(left) > top - 60.0 {
        left = (left - step).max(lo);
        step *= 1.6;
    }
    let mut step = 1e-3 * (1.0 + peak.abs());
    let mut right = peak;
    while right < hi && phi(right) > top - 60.0 {
        right = (right + step).min(hi);
        step *= 1.6;
    }
    let mut panels = 8;
    let mut prev = log_integrate(&phi, left, right, panels);
    for _ in 0..10 {
        panels *= 2;
        let next = log_integrate(&phi, left, right, panels);
        if (next - prev).abs() < 1e-12 {
            return Ok(next);
        }
        prev = next;
    }
    Ok(prev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(7);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((s - 2.0 / 13.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let v = adaptive(|x| x.sqrt(), 0.0, 1.0, 1e-13, 1e-13).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn log_integrate_matches_gaussian() {
        let v = log_integrate_peaked(|x| -500.0 * (x - 3.0) * (x - 3.0) + 700.0, -10.0, 10.0).unwrap();
        let exact = 700.0 + (std::f64::consts::PI / 500.0).sqrt().ln();
        assert!((v - exact).abs() < 1e-10);
    }

    #[test]
    fn lse_of_empty() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert!((log_sum_exp(&[0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
    }
}
