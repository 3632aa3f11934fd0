//! Fixed-energy variant of the landscape: stationary points restricted to
//! the energy level `E_0 = N sqrt(f_0) eps0`.
//!
//! Only `q > 1` is accepted; the geometric prefactor carries `sqrt(q^2 - 1)`.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

use crate::error::{domain, Error, Result};
use crate::landscape::{self, edge_constant, f_exponent, log_c_n, CountingSample, DensitySource};
use crate::{quad, roots, special, LogEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedParams {
    pub m: f64,
    pub eps0: f64,
    pub q: f64,
    pub n: usize,
}

impl ConstrainedParams {
    pub fn new(m: f64, eps0: f64, q: f64, n: usize) -> Result<Self> {
        check_m(m)?;
        check_q(q)?;
        crate::error::finite(eps0, "eps0")?;
        if n == 0 {
            return domain("dimension n must be at least 1");
        }
        Ok(Self { m, eps0, q, n })
    }
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 1.0 && q.is_finite()) {
        return domain(format!("q must exceed 1, got {q}"));
    }
    Ok(())
}

fn check_m(m: f64) -> Result<()> {
    if !(m > 0.0 && m.is_finite()) {
        return domain(format!("m must be positive, got {m}"));
    }
    Ok(())
}

/// `g(R; m) = m^2 R^2 / 2 - ln R`.
pub fn g_radial(r: f64, m: f64) -> f64 {
    0.5 * m * m * r * r - r.ln()
}

/// `h = (sqrt2 s - m + q eps0 - m R^2 / 2)^2 / (2 (q^2 - 1))`.
pub fn h_energy(s: f64, r: f64, m: f64, eps0: f64, q: f64) -> f64 {
    (SQRT_2 * s - m + q * eps0 - 0.5 * m * r * r).powi(2) / (2.0 * (q * q - 1.0))
}

/// `F = f + g + h`.
pub fn big_f(s: f64, r: f64, m: f64, eps0: f64, q: f64) -> f64 {
    f_exponent(s, m) + g_radial(r, m) + h_energy(s, r, m, eps0, q)
}

/// Saddle `(s_sp, R_sp, Delta)` of `F`.
pub fn saddle_points(m: f64, eps0: f64, q: f64) -> Result<(f64, f64, f64)> {
    check_m(m)?;
    let a = m * q - eps0;
    let delta = (2.0 * (1.0 + q * q) + q * q * a * a).sqrt();
    let s = (delta + q * a) / (SQRT_2 * (1.0 + q * q));
    let r = ((delta - q * a).max(0.0) / m).sqrt();
    Ok((s, r, delta))
}

/// Saddle `(s', R')` of `F + phi` on the branch beyond the spectral edge.
pub fn saddle_points_edge(m: f64, eps0: f64, q: f64) -> Result<(f64, f64)> {
    check_m(m)?;
    let a = m * q - eps0;
    if a * a < 2.0 || a < 0.0 {
        return Err(Error::Branch(format!("(mq - eps0) = {a} is below sqrt 2; no saddle beyond the edge")));
    }
    let b = (a * a - 2.0).sqrt();
    let s = (a * (1.0 + 2.0 * q * q) + (1.0 - 2.0 * q * q) * b) / (2.0 * SQRT_2 * q);
    let r = (q / m).sqrt() * (a - b).sqrt();
    Ok((s, r))
}

pub fn m_c(eps0: f64, q: f64) -> Result<f64> {
    check_q(q)?;
    Ok(1.0 + (1.0 + 2.0 * q * eps0) / (2.0 * q * q))
}

pub fn eps_threshold(q: f64) -> Result<f64> {
    check_q(q)?;
    Ok(-(1.0 + 2.0 * q * q) / (2.0 * q))
}

/// Energy at which `m_c(eps0) = m`.
pub fn eps_at_m_c(m: f64, q: f64) -> f64 {
    (2.0 * q * q * (m - 1.0) - 1.0) / (2.0 * q)
}

/// Edge large-deviation rate `phi(s)`, `s > sqrt 2`.
pub fn phi_edge(s: f64) -> Result<f64> {
    if !(s > SQRT_2) {
        return Err(Error::Branch(format!("phi needs s > sqrt 2, got {s}")));
    }
    Ok(landscape::edge_cost(s))
}

/// `Sigma^<_eq = -F(s_sp, R_sp)` (saddle inside the bulk).
pub fn sigma_less(m: f64, eps0: f64, q: f64) -> Result<f64> {
    check_q(q)?;
    let (s, r, _) = saddle_points(m, eps0, q)?;
    if !(r > 0.0) {
        return Err(Error::Branch(format!("degenerate radial saddle at m={m}, eps0={eps0}")));
    }
    Ok(-big_f(s, r, m, eps0, q))
}

/// `Sigma^>_eq = -F(s', R') - phi(s')` (saddle beyond the edge).
pub fn sigma_greater(m: f64, eps0: f64, q: f64) -> Result<f64> {
    check_q(q)?;
    let (s, r) = saddle_points_edge(m, eps0, q)?;
    // at m = m_c the saddle sits on the edge up to rounding
    if !(s > SQRT_2 * (1.0 - 1e-12)) {
        return Err(Error::Branch(format!("s' = {s} is not beyond the edge; use the m < m_c branch")));
    }
    Ok(-big_f(s, r, m, eps0, q) - landscape::edge_cost(s))
}

/// Complexity exponent, `Sigma^<` for `m < m_c(eps0)` and `Sigma^>` above.
pub fn sigma_eq_constrained(m: f64, eps0: f64, q: f64) -> Result<f64> {
    check_m(m)?;
    if m < m_c(eps0, q)? {
        sigma_less(m, eps0, q)
    } else if m == m_c(eps0, q)? {
        // both branches meet here; the bulk saddle sits exactly at the edge
        sigma_less(m, eps0, q)
    } else {
        sigma_greater(m, eps0, q)
    }
}

/// `d Sigma_eq / d eps0` by the envelope theorem: only `h` depends on `eps0`.
pub fn dsigma_deps(m: f64, eps0: f64, q: f64) -> Result<f64> {
    let (s, r) = if m <= m_c(eps0, q)? {
        let (s, r, _) = saddle_points(m, eps0, q)?;
        (s, r)
    } else {
        saddle_points_edge(m, eps0, q)?
    };
    Ok(-q * (SQRT_2 * s - m + q * eps0 - 0.5 * m * r * r) / (q * q - 1.0))
}

/// Leading exponent along `m = m_c`, negative except at `m_c = 1`.
pub fn delta0(m_c: f64, q: f64) -> f64 {
    -0.5 * m_c.ln() - 0.5 * (1.0 - m_c) * (1.0 + q * q * (1.0 - m_c))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub q: f64,
    /// `(m, eps_-(m))`.
    pub curve_minus: Vec<(f64, f64)>,
    /// `(m, eps_+(m))`; `None` where no upper root exists.
    pub curve_plus: Vec<(f64, Option<f64>)>,
    pub line_level: f64,
    pub critical_point: (f64, f64),
    pub threshold: f64,
    /// Slope of the toppling boundary `eps = q delta`.
    pub toppling_slope: f64,
    /// Slopes of the cone lines `eps'_± = delta (-3/(2q) ± sqrt(3 + 2q^2)/q)`.
    pub cone_slopes: (f64, f64),
}

const PHASE_TOL: f64 = 1e-12;

fn sigma_or_neg(m: f64, q: f64) -> impl Fn(f64) -> f64 {
    move |e: f64| sigma_eq_constrained(m, e, q).unwrap_or(f64::NEG_INFINITY)
}

/// Roots `eps_-(m) <= eps_+(m)` of `Sigma_eq(m, .)` around its maximiser.
///
/// Brackets start at the maximiser and widen geometrically until the sign
/// flips; the upper root is `None` if no flip occurs before `eps0 = 1e3`.
pub fn phase_roots(m: f64, q: f64) -> Result<(f64, Option<f64>)> {
    check_m(m)?;
    check_q(q)?;
    if m > 1.0 {
        return domain(format!("phase curves live on m in (0, 1], got {m}"));
    }
    let sig = sigma_or_neg(m, q);
    let th = eps_threshold(q)?;
    let mut lo = th - 1.0;
    let mut hi = 1.0;
    // the maximiser lies between the threshold and the critical level for m <= 1
    lo = lo.min(eps_at_m_c(m, q) - 1.0);
    let slope = |e: f64| dsigma_deps(m, e, q).unwrap_or(f64::NAN);
    let peak = match roots::bisect(slope, lo, hi, 1e-15) {
        Ok(p) => p,
        Err(_) => roots::golden_max(&sig, lo, hi, 1e-13),
    };
    let top = sig(peak);
    if top <= PHASE_TOL {
        // the curves touch (m = 1)
        return Ok((peak, Some(peak)));
    }
    let mut step = 0.05;
    lo = peak - step;
    while sig(lo) > 0.0 {
        step *= 2.0;
        lo = peak - step;
        if step > 1e6 {
            return Err(Error::NoBracket(format!("no lower root of Sigma_eq scanned down to eps0 = {lo} at m={m}")));
        }
    }
    let minus = roots::bisect(&sig, lo, peak, PHASE_TOL)?;
    step = 0.05;
    hi = peak + step;
    while sig(hi) > 0.0 {
        step *= 2.0;
        hi = peak + step;
        if hi > 1e3 {
            return Ok((minus, None));
        }
    }
    let plus = roots::bisect(&sig, peak, hi, PHASE_TOL)?;
    Ok((minus, Some(plus)))
}

pub fn phase_curves(q: f64, m_grid: &[f64]) -> Result<PhaseDiagram> {
    check_q(q)?;
    let mut minus = Vec::new();
    let mut plus = Vec::new();
    for &m in m_grid {
        if !(m > 0.0 && m <= 1.0) {
            return domain(format!("m grid must lie in (0, 1], got {m}"));
        }
        let (a, b) = phase_roots(m, q)?;
        minus.push((m, a));
        plus.push((m, b));
    }
    let level = -1.0 / (2.0 * q);
    let root = (3.0 + 2.0 * q * q).sqrt() / q;
    Ok(PhaseDiagram {
        q,
        curve_minus: minus,
        curve_plus: plus,
        line_level: level,
        critical_point: (1.0, level),
        threshold: eps_threshold(q)?,
        toppling_slope: q,
        cone_slopes: (-1.5 / q - root, -1.5 / q + root),
    })
}

impl PhaseDiagram {
    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "# q={} critical_point=({},{}) threshold={} line_level={} toppling_slope={} cone_slopes=({},{})\n",
            self.q, self.critical_point.0, self.critical_point.1, self.threshold, self.line_level, self.toppling_slope, self.cone_slopes.0, self.cone_slopes.1
        );
        s.push_str("m,eps_minus,eps_plus\n");
        for (a, b) in self.curve_minus.iter().zip(&self.curve_plus) {
            let p = b.1.map(|x| x.to_string()).unwrap_or_default();
            s.push_str(&format!("{},{},{}\n", a.0, a.1, p));
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("plain data");
        v["schema_version"] = 1.into();
        v
    }
}

/// Microscopic constants `(a1, a2)` near the critical point.
pub fn toppling_coefficients(delta: f64, eps: f64, q: f64) -> Result<(f64, f64)> {
    check_q(q)?;
    let d = 2.0 * q * q - 1.0;
    Ok((2.0 * SQRT_2 * q * (q * delta - eps) / d, (2.0 * q * q + 3.0) / (2.0 * d)))
}

/// `(Delta, C2)` with `Delta = a1 / sqrt(2 a2)` and `C2 = sqrt(2 a2) c2`.
pub fn toppling_shape(delta: f64, eps: f64, q: f64) -> Result<(f64, f64)> {
    let (a1, a2) = toppling_coefficients(delta, eps, q)?;
    let c2 = SQRT_2 * edge_constant();
    Ok((a1 / (2.0 * a2).sqrt(), (2.0 * a2).sqrt() * c2))
}

/// Main-text variants `(Delta_q, c_q)`; kept for comparison only.
pub fn toppling_shape_summary(delta: f64, eps: f64, q: f64) -> Result<(f64, f64)> {
    check_q(q)?;
    let dq = 2.0 * SQRT_2 * q * q / ((2.0 * q * q - 1.0) * (q * q + 2.0)).sqrt() * (delta - eps / q);
    let cq = ((2.0 * q * q + 3.0) / (2.0 * q * q - 1.0)).sqrt() * edge_constant();
    Ok((dq, cq))
}

/// Main-text mode `(-Delta_q / (2 c_q))^{3/2}`.
pub fn kappa_max_summary(delta: f64, eps: f64, q: f64) -> Result<f64> {
    let (dq, cq) = toppling_shape_summary(delta, eps, q)?;
    Ok(if dq < 0.0 { (-dq / (2.0 * cq)).powf(1.5) } else { 0.0 })
}

fn sigma_kernel(delta: f64, v: f64) -> f64 {
    // ln(sqrt(sigma) e^{-sigma^2/2 - Delta sigma}) with sigma = v^2
    // (the substitution absorbs the square-root endpoint: dsigma = 2 v dv)
    (2.0 * v * v).ln() - 0.5 * v.powi(4) - delta * v * v
}

fn sigma_upper(delta: f64) -> f64 {
    let s = (-delta).max(0.0) + 40.0;
    s.sqrt()
}

/// `P(kappa) = ∫_0^{C2 kappa^{2/3}} sqrt(s) e^{-s^2/2 - Delta s} ds / (same over [0, inf))`.
pub fn toppling_cdf_constrained(delta: f64, eps: f64, q: f64, kappa: f64) -> Result<f64> {
    if !(kappa >= 0.0) {
        return domain(format!("rescaled index must be non-negative, got {kappa}"));
    }
    let (d, c2) = toppling_shape(delta, eps, q)?;
    let upper = sigma_upper(d);
    let log_z = quad::log_integrate_peaked(|v| sigma_kernel(d, v), 0.0, upper)?;
    let u = (c2 * kappa.powf(2.0 / 3.0)).sqrt().min(upper);
    if u == 0.0 {
        return Ok(0.0);
    }
    let f = |v: f64| (sigma_kernel(d, v) - log_z).exp();
    let left = quad::adaptive(f, 0.0, u, 1e-15, 1e-13)?;
    let right = quad::adaptive(f, u, upper, 1e-15, 1e-13)?;
    Ok((left / (left + right)).clamp(0.0, 1.0))
}

/// Unnormalized log density of `kappa` implied by the constrained toppling cdf.
pub fn toppling_log_density_constrained(delta: f64, eps: f64, q: f64, kappa: f64) -> Result<f64> {
    if !(kappa >= 0.0) {
        return domain(format!("rescaled index must be non-negative, got {kappa}"));
    }
    let (d, c2) = toppling_shape(delta, eps, q)?;
    let s = c2 * kappa.powf(2.0 / 3.0);
    Ok(-0.5 * s * s - d * s)
}

/// Normalized density `dP/dkappa` of the constrained toppling cdf.
pub fn toppling_density_constrained(delta: f64, eps: f64, q: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return domain(format!("rescaled index must be positive, got {kappa}"));
    }
    let (d, c2) = toppling_shape(delta, eps, q)?;
    let log_z = quad::log_integrate_peaked(|v| sigma_kernel(d, v), 0.0, sigma_upper(d))?;
    let s = c2 * kappa.powf(2.0 / 3.0);
    let jac = 2.0 / 3.0 * c2 * kappa.powf(-1.0 / 3.0);
    Ok((0.5 * s.ln() - 0.5 * s * s - d * s - log_z).exp() * jac)
}

/// Mode of the constrained toppling density, `(-Delta / C2)^{3/2}` for `Delta < 0`.
pub fn kappa_max_constrained(delta: f64, eps: f64, q: f64) -> Result<f64> {
    let (d, c2) = toppling_shape(delta, eps, q)?;
    Ok(if d < 0.0 { (-d / c2).powf(1.5) } else { 0.0 })
}

/// Atom location `t(s_sp / sqrt 2)` in the complexity region.
pub fn complexity_atom_constrained(m: f64, eps0: f64, q: f64) -> Result<f64> {
    let mc = m_c(eps0, q)?;
    if !(m > 0.0 && m < mc) {
        return domain(format!("complexity region needs 0 < m < m_c = {mc}, got m={m}"));
    }
    let (s, _, _) = saddle_points(m, eps0, q)?;
    special::semicircle_cdf((s / SQRT_2).clamp(-1.0, 1.0))
}

pub fn complexity_cdf_constrained(m: f64, eps0: f64, q: f64, kappa: f64) -> Result<f64> {
    let t = complexity_atom_constrained(m, eps0, q)?;
    if !(0.0..=1.0).contains(&kappa) {
        return domain(format!("kappa must lie in [0, 1], got {kappa}"));
    }
    Ok(if kappa >= t { 1.0 } else { 0.0 })
}

/// `ln` of the geometric prefactor per unit `eps0`:
/// `sqrt(2N/pi) q / sqrt(q^2 - 1) (N m^2 / 2)^{N/2} / Gamma(N/2)`.
pub fn log_geometric_prefactor(n: usize, m: f64, q: f64) -> f64 {
    let nf = n as f64;
    0.5 * (2.0 * nf / PI).ln() + q.ln() - 0.5 * (q * q - 1.0).ln() + 0.5 * nf * (0.5 * nf * m * m).ln()
        - special::ln_gamma(0.5 * nf).expect("positive argument")
}

/// `ln ∫_0^∞ dR/R e^{-N (g + h)}` at fixed `s`, integrated in `u = ln R`.
pub fn log_radial_integral(s: f64, p: &ConstrainedParams) -> Result<f64> {
    let nf = p.n as f64;
    let phi = |u: f64| {
        let r = u.exp();
        -nf * (g_radial(r, p.m) + h_energy(s, r, p.m, p.eps0, p.q))
    };
    quad::log_integrate_peaked(phi, -40.0, 10.0)
}

/// `ln G_N` times the energy Jacobian, so that it integrates to 1 over `eps0`.
pub fn log_geometric(s: f64, p: &ConstrainedParams) -> Result<f64> {
    Ok(log_geometric_prefactor(p.n, p.m, p.q) + log_radial_integral(s, p)?)
}

/// Mean counts per unit `eps0`, with a warning when the total count
/// decays exponentially and ratios lose their meaning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedCount {
    pub estimate: LogEstimate,
    pub warning: Option<String>,
}

fn decay_warning(p: &ConstrainedParams) -> Option<String> {
    match sigma_eq_constrained(p.m, p.eps0, p.q) {
        Ok(s) if s < 0.0 => Some(format!("complexity exponent {s:.4} < 0: counts vanish exponentially, index probabilities are not meaningful")),
        _ => None,
    }
}

fn log_weight(p: ConstrainedParams) -> impl Fn(f64) -> f64 {
    let nf = p.n as f64;
    let pre = log_c_n(p.n) - nf * p.m.ln();
    let sn = nf.sqrt();
    move |lambda: f64| {
        let s = lambda / sn;
        match log_geometric(s, &p) {
            Ok(lg) => pre - nf * f_exponent(s, p.m) + lg,
            Err(_) => f64::NEG_INFINITY,
        }
    }
}

/// `<n_k(eps0)>` per unit `eps0` from the exact two-dimensional integral.
pub fn mean_nk_exact_constrained(p: ConstrainedParams, k: usize, src: DensitySource) -> Result<ConstrainedCount> {
    if k > p.n {
        return domain(format!("index k={k} exceeds n={}", p.n));
    }
    let estimate = landscape::integrate_source(src, p.n + 1, Some(k), log_weight(p))?;
    Ok(ConstrainedCount { estimate, warning: decay_warning(&p) })
}

pub fn mean_neq_exact_constrained(p: ConstrainedParams, src: DensitySource) -> Result<ConstrainedCount> {
    let estimate = landscape::integrate_source(src, p.n + 1, None, log_weight(p))?;
    Ok(ConstrainedCount { estimate, warning: decay_warning(&p) })
}

/// Densities suited to the constrained integrals at these parameters.
pub fn constrained_sample(p: ConstrainedParams, ks: &[usize], full: bool, n_samples: u64, seed: u64) -> Result<CountingSample> {
    let nf = p.n as f64;
    let w = move |s: f64| f_exponent(s, p.m) - log_geometric(s, &p).unwrap_or(f64::NEG_INFINITY) / nf;
    let dw = move |s: f64| {
        let h = 1e-5;
        (w(s + h) - w(s - h)) / (2.0 * h)
    };
    let mut target_ks: Vec<usize> = ks.to_vec();
    if full {
        target_ks.extend([0, 1]);
    }
    target_ks.sort();
    target_ks.dedup();
    target_ks.retain(|&k| k <= p.n);
    let targets = landscape::tilt_targets(p.n, &target_ks, dw, None);
    landscape::counting_sample(p.n + 1, ks, full, &targets, 0.1, n_samples, seed)
}
