//! Spherical p-spin model. After the reduction everything depends on the
//! single parameter `B`; `n` is the number of free dimensions on the sphere,
//! so indices run over `0..=n` and the matrix is `GOE_{n+1}`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::goe::{self, BinSpec, DensityRequest, GoeSampler, Transform};
use crate::landscape::{self, CountingSample, DensitySource, IndexDistribution};
use crate::{quad, special, Estimate, LogEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PSpinParams {
    pub j: f64,
    pub sigma: f64,
    pub p: u32,
    pub n: usize,
    pub b: f64,
}

impl PSpinParams {
    pub fn new(j: f64, sigma: f64, p: u32, n: usize) -> Result<Self> {
        let b = b_param(j, sigma, p)?;
        if n == 0 {
            return domain("dimension n must be at least 1");
        }
        Ok(Self { j, sigma, p, n, b })
    }
}

/// `B = (J^2 (p - 2) - sigma^2) / (J^2 p + sigma^2)`.
pub fn b_param(j: f64, sigma: f64, p: u32) -> Result<f64> {
    if !(j > 0.0 && j.is_finite()) {
        return domain(format!("coupling J must be positive, got {j}"));
    }
    if !(sigma >= 0.0) {
        return domain(format!("field scale sigma must be non-negative, got {sigma}"));
    }
    if p < 2 {
        return domain(format!("p must be at least 2, got {p}"));
    }
    let (j2, s2, pf) = (j * j, sigma * sigma, p as f64);
    if s2.is_infinite() {
        return Ok(-1.0);
    }
    Ok((j2 * (pf - 2.0) - s2) / (j2 * pf + s2))
}

fn check_b(b: f64) -> Result<()> {
    if !(b > -1.0 && b < 1.0) {
        return domain(format!("B must lie in (-1, 1), got {b}"));
    }
    Ok(())
}

/// `ln c'_N` with `c'_N = 2 sqrt(N) ((1+B)/(1-B))^{(N+1)/2} sqrt(1-B)`.
pub fn log_c_prime(b: f64, n: usize) -> f64 {
    let nf = n as f64;
    2f64.ln() + 0.5 * nf.ln() + 0.5 * (nf + 1.0) * ((1.0 + b) / (1.0 - b)).ln() + 0.5 * (1.0 - b).ln()
}

fn log_weight(b: f64, n: usize) -> impl Fn(f64) -> f64 {
    // c'_N ∫ ds e^{-N B s^2/2} rho(sqrt(N) s), written in lambda = sqrt(N) s
    let pre = log_c_prime(b, n) - 0.5 * (n as f64).ln();
    move |lambda: f64| pre - 0.5 * b * lambda * lambda
}

pub fn mean_nk_pspin(b: f64, n: usize, k: usize, src: DensitySource) -> Result<LogEstimate> {
    check_b(b)?;
    if k > n {
        return domain(format!("index k={k} exceeds n={n}"));
    }
    landscape::integrate_source(src, n + 1, Some(k), log_weight(b, n))
}

pub fn mean_neq_pspin(b: f64, n: usize, src: DensitySource) -> Result<LogEstimate> {
    check_b(b)?;
    landscape::integrate_source(src, n + 1, None, log_weight(b, n))
}

/// Densities for the p-spin integrals; for `B < 0` both edge blocks are pushed outward.
pub fn pspin_sample(b: f64, n: usize, ks: &[usize], full: bool, n_samples: u64, seed: u64) -> Result<CountingSample> {
    check_b(b)?;
    // blocks are pushed from whichever edge is closer to the index
    let mut top_ks: Vec<usize> = ks.iter().copied().filter(|&k| 2 * k <= n).collect();
    let mut bottom_ks: Vec<usize> = ks.iter().filter(|&&k| 2 * k > n && k <= n).map(|&k| n - k).collect();
    if full {
        top_ks.push(0);
        bottom_ks.push(0);
    }
    let dw = move |s: f64| b * s;
    let mut targets = landscape::tilt_targets(n, &top_ks, dw, None);
    targets.extend(landscape::tilt_targets(n, &bottom_ks, dw, Some(&dw)).into_iter().filter(|t| !t.2));
    targets.sort_by(|x, y| (x.0, x.2).cmp(&(y.0, y.2)));
    targets.dedup_by(|x, y| x.0 == y.0 && x.2 == y.2);
    landscape::counting_sample(n + 1, ks, full, &targets, 0.1, n_samples, seed)
}

/// Region a: `p_k = p_{n-k} = delta_{k,0} / 2`.
pub fn pk_region_a(k: usize, n: usize) -> Result<f64> {
    if k > n {
        return domain(format!("index k={k} exceeds n={n}"));
    }
    Ok(if k == 0 || k == n { 0.5 } else { 0.0 })
}

pub fn neq_region_a() -> f64 {
    2.0
}

/// Region b, lower end: `p_k = (1/2) ∫ e^{beta l} dF_k / ∫ e^{beta l} rho_edge`.
pub fn pk_region_b(beta: f64, edge_density: &goe::EmpiricalDensity) -> Result<Estimate> {
    let e = landscape::pk_hierarchy(beta, edge_density)?;
    Ok(Estimate::new(0.5 * e.value, 0.5 * e.stderr))
}

pub fn neq_region_b(beta: f64) -> Result<f64> {
    Ok(4.0 * (-beta.powi(3) / 3.0).exp() * landscape::edge_laplace(beta)?)
}

/// Edge-rescaled densities of the top and bottom `count` eigenvalues of `GOE_n`,
/// the bottom ones mirrored so both read like top-edge statistics.
pub fn dual_edge_densities(n: usize, count: usize, grid: BinSpec, n_samples: u64, seed: u64) -> Result<(goe::DensitySet, goe::DensitySet)> {
    let sampler = GoeSampler::standard(n, seed)?;
    let top_req = DensityRequest { ks: (0..count).collect(), full: false, grid, transform: Transform::edge(n), n_samples, tilt: None };
    let bottom_req = DensityRequest { ks: (0..count).map(|j| n - 1 - j).collect(), transform: Transform::edge_bottom(n), ..top_req.clone() };
    Ok((goe::sample_densities(&sampler, &top_req)?, goe::sample_densities(&sampler, &bottom_req)?))
}

/// Importance-sampled version of [`dual_edge_densities`] for the weight
/// `e^{beta sigma}` on both edges.
pub fn dual_edge_densities_tilted(beta: f64, n: usize, count: usize, width: f64, n_samples: u64, seed: u64) -> Result<(goe::DensitySet, goe::DensitySet)> {
    let top = landscape::tilted_edge_densities(beta, n, count, width, n_samples, seed, true)?;
    let bottom = landscape::tilted_edge_densities(beta, n, count, width, n_samples, seed, false)?;
    Ok((top, bottom))
}

/// Region b distribution over `k` in `0..count` and `n-count+1..=n`.
pub fn region_b_distribution(beta: f64, n: usize, top: &goe::DensitySet, bottom: &goe::DensitySet) -> Result<IndexDistribution> {
    let count = top.by_k.len();
    let mut support = Vec::new();
    let mut prob = Vec::new();
    let mut se = Vec::new();
    for (j, d) in top.by_k.iter().enumerate() {
        let e = pk_region_b(beta, d)?;
        support.push(j as f64);
        prob.push(e.value);
        se.push(e.stderr);
    }
    let mut upper = Vec::new();
    for (j, d) in bottom.by_k.iter().enumerate().take(count) {
        let e = pk_region_b(beta, d)?;
        upper.push(((n - j) as f64, e.value, e.stderr));
    }
    upper.reverse();
    for (k, p, s) in upper {
        support.push(k);
        prob.push(p);
        se.push(s);
    }
    let mut d = IndexDistribution::discrete(prob, se);
    d.support = support;
    d.normalized = false;
    Ok(d.with_meta("model", "pspin").with_meta("regime", "b").with_meta("beta", beta))
}

/// `∫_{-1}^{1} e^{beta l^2} rho_sc(l) dl`, via `l = sin(theta)`.
pub fn region_c_norm(beta: f64) -> Result<f64> {
    crate::error::finite(beta, "beta")?;
    let f = |t: f64| {
        let (s, c) = t.sin_cos();
        (beta * s * s).exp() * 2.0 / PI * c * c
    };
    Ok(quad::integrate_panels(f, -PI / 2.0, PI / 2.0, 64))
}

/// Region c density `e^{beta Q_x^2} / ∫ e^{beta l^2} rho_sc` on `x in [0, 1]`.
pub fn density_region_c(beta: f64, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return domain(format!("x must lie in [0, 1], got {x}"));
    }
    let q = special::semicircle_quantile(x)?;
    Ok((beta * q * q).exp() / region_c_norm(beta)?)
}

/// `2 N e^{-beta} ∫ e^{beta l^2} rho_sc`.
pub fn neq_region_c(beta: f64, n: usize) -> Result<f64> {
    Ok(2.0 * n as f64 * (-beta).exp() * region_c_norm(beta)?)
}

pub fn region_c_distribution(beta: f64, points: usize) -> Result<IndexDistribution> {
    let support: Vec<f64> = (0..points).map(|i| i as f64 / (points - 1) as f64).collect();
    let prob = support.iter().map(|&x| density_region_c(beta, x)).collect::<Result<Vec<_>>>()?;
    Ok(IndexDistribution::continuous("1", support, prob, true).with_meta("model", "pspin").with_meta("regime", "c").with_meta("beta", beta))
}

fn check_region_d(b: f64) -> Result<()> {
    if !(b > 0.0 && b < 1.0) {
        return domain(format!("region d needs 0 < B < 1 (and B <= (p-2)/p), got {b}"));
    }
    Ok(())
}

/// Region d: step at `kappa = 1/2`.
pub fn cdf_region_d(b: f64, kappa: f64) -> Result<f64> {
    check_region_d(b)?;
    if !(0.0..=1.0).contains(&kappa) {
        return domain(format!("kappa must lie in [0, 1], got {kappa}"));
    }
    Ok(if kappa >= 0.5 { 1.0 } else { 0.0 })
}

/// `ln <N_eq> = (n/2) ln((1+B)/(1-B)) + ln(4 sqrt(n) sqrt((1+B)/(pi B)))`.
pub fn log_neq_region_d(b: f64, n: usize) -> Result<f64> {
    check_region_d(b)?;
    let nf = n as f64;
    Ok(0.5 * nf * ((1.0 + b) / (1.0 - b)).ln() + (4.0 * nf.sqrt() * ((1.0 + b) / (PI * b)).sqrt()).ln())
}

pub fn region_d_distribution(b: f64) -> Result<IndexDistribution> {
    check_region_d(b)?;
    let mut d = IndexDistribution::continuous("1", vec![], vec![], true).with_meta("model", "pspin").with_meta("regime", "d").with_meta("B", b);
    d.atom = Some((0.5, 1.0));
    Ok(d)
}
