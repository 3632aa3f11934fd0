//! Unconstrained landscape: exact finite-`N` counts from GOE order-statistic
//! densities and the asymptotic laws of the four scaling regions.
//!
//! Counting integrals are written in the spectral variable `lambda = sqrt(N) s`
//! of `GOE_{N+1}` with unit-variance diagonal, so the bulk edge is at
//! `sqrt(2(N+1))` and the asymptotic formulas use `sqrt(2N)`.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

use crate::error::{domain, Error, Result};
use crate::goe::{self, BinSpec, Branch, DensityRequest, EmpiricalDensity, GoeSampler, SpectrumTilt, Transform};
use crate::{quad, roots, special, Estimate, LogEstimate};

/// `c = (3 pi / (4 sqrt 2))^{2/3}` from the edge counting function.
pub fn edge_constant() -> f64 {
    (3.0 * PI / (4.0 * SQRT_2)).powf(2.0 / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandscapeParams {
    pub m: f64,
    pub n: usize,
}

impl LandscapeParams {
    pub fn new(m: f64, n: usize) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return domain(format!("coupling m must be positive, got {m}"));
        }
        if n == 0 {
            return domain("dimension n must be at least 1");
        }
        Ok(Self { m, n })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "region", rename_all = "lowercase")]
pub enum RegimeSpec {
    Simplicity { m: f64 },
    Hierarchy { delta: f64 },
    Toppling { delta: f64 },
    Complexity { m: f64 },
}

impl RegimeSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RegimeSpec::Simplicity { m } if !(m > 1.0) => domain(format!("simplicity region needs m > 1, got {m}")),
            RegimeSpec::Hierarchy { delta } if !(delta > 0.0) => domain(format!("hierarchy region needs delta > 0, got {delta}")),
            RegimeSpec::Toppling { delta } if !delta.is_finite() => domain("toppling region needs a finite delta"),
            RegimeSpec::Complexity { m } if !(m > 0.0 && m < 1.0) => domain(format!("complexity region needs 0 < m < 1, got {m}")),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RegimeSpec::Simplicity { .. } => "simplicity",
            RegimeSpec::Hierarchy { .. } => "hierarchy",
            RegimeSpec::Toppling { .. } => "toppling",
            RegimeSpec::Complexity { .. } => "complexity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexKind {
    Discrete,
    Continuous,
}

/// Distribution over the instability index, discrete in `k` or a density in
/// a rescaled index `kappa = k / N^{scale_exponent}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexDistribution {
    pub kind: IndexKind,
    /// Written as a fraction, e.g. "0", "1/4", "1".
    pub scale_exponent: String,
    pub support: Vec<f64>,
    pub prob: Vec<f64>,
    pub stderr: Vec<f64>,
    pub normalized: bool,
    /// A point mass `(location, mass)` that replaces a numeric spike.
    pub atom: Option<(f64, f64)>,
    pub metadata: Vec<(String, String)>,
}

impl IndexDistribution {
    pub fn discrete(prob: Vec<f64>, stderr: Vec<f64>) -> Self {
        let support = (0..prob.len()).map(|k| k as f64).collect();
        let normalized = (prob.iter().sum::<f64>() - 1.0).abs() < 1e-8;
        Self { kind: IndexKind::Discrete, scale_exponent: "0".into(), support, prob, stderr, normalized, atom: None, metadata: vec![] }
    }

    pub fn continuous(scale_exponent: &str, support: Vec<f64>, prob: Vec<f64>, normalized: bool) -> Self {
        let stderr = vec![0.0; prob.len()];
        Self { kind: IndexKind::Continuous, scale_exponent: scale_exponent.into(), support, prob, stderr, normalized, atom: None, metadata: vec![] }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.push((key.into(), value.to_string()));
        self
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.metadata {
            s.push_str(&format!("# {k}={v}\n"));
        }
        s.push_str(&format!("# kind={:?} scale_exponent={} normalized={}\n", self.kind, self.scale_exponent, self.normalized).to_lowercase());
        if let Some((loc, mass)) = self.atom {
            s.push_str(&format!("# atom_location={loc} atom_mass={mass}\n"));
        }
        s.push_str("index_or_kappa,prob_or_density,stderr\n");
        for i in 0..self.prob.len() {
            s.push_str(&format!("{},{},{}\n", self.support[i], self.prob[i], self.stderr[i]));
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("plain data");
        v["schema_version"] = 1.into();
        v
    }
}

/// `f(s; m) = (s - m/sqrt 2)^2 - s^2/2`.
pub fn f_exponent(s: f64, m: f64) -> f64 {
    (s - m / SQRT_2).powi(2) - 0.5 * s * s
}

/// `ln c_N` with `c_N = sqrt(2/pi) (2/N)^{N/2} Gamma((N+1)/2)`.
pub fn log_c_n(n: usize) -> f64 {
    let nf = n as f64;
    0.5 * (2.0 / PI).ln() + 0.5 * nf * (2.0 / nf).ln() + special::ln_gamma(0.5 * (nf + 1.0)).expect("positive argument")
}

/// Where the counting integrals take the order-statistic densities from.
#[derive(Debug, Clone, Copy)]
pub enum DensitySource<'a> {
    /// Binned Monte Carlo density (of one order statistic or the whole spectrum).
    Empirical(&'a EmpiricalDensity),
    /// Normal law with the mean and width of the Gaussian approximation.
    Gaussian(Branch),
}

impl DensitySource<'_> {
    pub fn tag(&self) -> &'static str {
        match self {
            DensitySource::Empirical(d) if d.weighted => "monte-carlo (importance weighted)",
            DensitySource::Empirical(_) => "monte-carlo",
            DensitySource::Gaussian(Branch::Edge) => "gaussian-edge",
            DensitySource::Gaussian(Branch::Bulk) => "gaussian-bulk",
        }
    }
}

/// `ln ∫ exp(log_g(lambda)) rho(lambda) dlambda` for the `(k+1)`-th largest
/// eigenvalue of `GOE_{n_matrix}` (`k = None` for the whole spectrum).
pub fn integrate_source<G: Fn(f64) -> f64>(src: DensitySource, n_matrix: usize, k: Option<usize>, log_g: G) -> Result<LogEstimate> {
    match src {
        DensitySource::Empirical(d) => {
            if d.n != n_matrix {
                return domain(format!("density was sampled at matrix size {}, need {n_matrix}", d.n));
            }
            if d.k != k {
                return domain(format!("density is for order index {:?}, need {:?}", d.k, k));
            }
            let t = d.transform.clone();
            d.integrate_against(|y| log_g(t.invert(y)))
        }
        DensitySource::Gaussian(branch) => {
            let k = k.ok_or_else(|| Error::Domain("the Gaussian source describes single order statistics only".into()))?;
            let (mu, sigma) = goe::gaussian_approx(n_matrix, k, branch)?;
            if !(sigma > 0.0) {
                return domain(format!("Gaussian approximation has zero width at k={k}"));
            }
            let ln_norm = -(sigma * (2.0 * PI).sqrt()).ln();
            let phi = |x: f64| log_g(x) + ln_norm - 0.5 * ((x - mu) / sigma).powi(2);
            let span = 60.0 * sigma + 20.0;
            let v = quad::log_integrate_peaked(phi, mu - span, mu + span)?;
            Ok(LogEstimate { log_value: v, rel_stderr: 0.0 })
        }
    }
}

/// Large-deviation cost rate of pushing the top eigenvalue to `sqrt(N) s`
/// beyond the edge `s = sqrt 2`.
pub fn edge_cost(s: f64) -> f64 {
    if s <= SQRT_2 {
        return 0.0;
    }
    let r = (s * s - 2.0).sqrt();
    0.5 * s * r - ((s + r) / SQRT_2).ln()
}

/// Location `s > sqrt 2` minimising `w(s) + c * edge_cost(s)` for a convex
/// weight exponent with derivative `dw`, when the weight pulls past the edge.
fn pulled_block(dw: impl Fn(f64) -> f64, c: f64) -> Option<f64> {
    let grad = |s: f64| dw(s) + c * (s * s - 2.0).max(0.0).sqrt();
    if grad(SQRT_2 + 1e-12) >= 0.0 {
        return None;
    }
    let mut hi = 2.0;
    while grad(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return None;
        }
    }
    roots::bisect(grad, SQRT_2, hi, 1e-12).ok()
}

/// Importance-sampling targets `(k, lambda, top)` for a weight
/// `exp(-N w(lambda/sqrt N))` when it outweighs the spectrum near an edge.
pub fn tilt_targets(n: usize, ks: &[usize], dw_top: impl Fn(f64) -> f64, dw_bottom: Option<&dyn Fn(f64) -> f64>) -> Vec<(usize, f64, bool)> {
    let sn = (n as f64).sqrt();
    let mut out = Vec::new();
    for &k in ks {
        let c = (k + 1) as f64;
        if let Some(s) = pulled_block(&dw_top, c) {
            out.push((k, s * sn, true));
        }
        if let Some(dwb) = dw_bottom {
            if let Some(s) = pulled_block(|s| -dwb(-s), c) {
                out.push((k, -s * sn, false));
            }
        }
    }
    out
}

/// Order-statistic densities of `GOE_{n+1}` suited to a counting integral.
#[derive(Debug, Clone)]
pub struct CountingSample {
    pub set: goe::DensitySet,
    pub n_samples: u64,
    pub seed: u64,
}

/// Samples `GOE_{n_matrix}` densities on a lambda grid of the given width,
/// pushing edge blocks towards `targets` by importance sampling.
pub fn counting_sample(n_matrix: usize, ks: &[usize], full: bool, targets: &[(usize, f64, bool)], width: f64, n_samples: u64, seed: u64) -> Result<CountingSample> {
    let sampler = GoeSampler::standard(n_matrix, seed)?;
    let edge = (2.0 * n_matrix as f64).sqrt();
    let mut lo = -edge - 8.0;
    let mut hi = edge + 8.0;
    for &(_, y, _) in targets {
        lo = lo.min(y - 8.0);
        hi = hi.max(y + 8.0);
    }
    let grid = BinSpec::with_width(lo, hi, width)?;
    let tilt = if targets.is_empty() { None } else { Some(SpectrumTilt::edges(n_matrix, 0.5, targets)?) };
    let req = DensityRequest { ks: ks.to_vec(), full, grid, transform: Transform::identity(), n_samples, tilt };
    let set = goe::sample_densities(&sampler, &req)?;
    Ok(CountingSample { set, n_samples, seed })
}

/// Log weight of the landscape counting integral in `lambda`, prefactors included.
pub fn log_weight(params: LandscapeParams) -> impl Fn(f64) -> f64 {
    let nf = params.n as f64;
    let pre = log_c_n(params.n) - nf * params.m.ln();
    let sn = nf.sqrt();
    move |lambda: f64| pre - nf * f_exponent(lambda / sn, params.m)
}

/// Sampling plan for the landscape counts: which blocks to push and where.
pub fn landscape_targets(params: LandscapeParams, ks: &[usize]) -> Vec<(usize, f64, bool)> {
    let m = params.m;
    tilt_targets(params.n, ks, move |s| s - SQRT_2 * m, None)
}

/// Densities for `mean_nk_exact` / `mean_neq_exact` at the given parameters.
pub fn landscape_sample(params: LandscapeParams, ks: &[usize], full: bool, n_samples: u64, seed: u64) -> Result<CountingSample> {
    let mut target_ks: Vec<usize> = ks.to_vec();
    if full {
        target_ks.extend([0, 1]);
    }
    target_ks.sort();
    target_ks.dedup();
    target_ks.retain(|&k| k <= params.n);
    let targets = landscape_targets(params, &target_ks);
    counting_sample(params.n + 1, ks, full, &targets, 0.1, n_samples, seed)
}

/// `<N_k>` from the exact counting integral.
pub fn mean_nk_exact(params: LandscapeParams, k: usize, src: DensitySource) -> Result<LogEstimate> {
    if k > params.n {
        return domain(format!("index k={k} exceeds n={}", params.n));
    }
    integrate_source(src, params.n + 1, Some(k), log_weight(params))
}

/// `<N_eq>` from the exact counting integral with the total density.
pub fn mean_neq_exact(params: LandscapeParams, src: DensitySource) -> Result<LogEstimate> {
    integrate_source(src, params.n + 1, None, log_weight(params))
}

fn check_unit_interval(m: f64) -> Result<()> {
    if !(m > 0.0 && m < 1.0) {
        return domain(format!("m must lie in (0, 1), got {m}"));
    }
    Ok(())
}

/// `Sigma_eq(m) = (m^2 - 1)/2 - ln m`.
pub fn sigma_eq(m: f64) -> Result<f64> {
    check_unit_interval(m)?;
    Ok(0.5 * (m * m - 1.0) - m.ln())
}

/// `Sigma_0(m) = Sigma_eq(m) - (1 - m)^2`.
pub fn sigma_0(m: f64) -> Result<f64> {
    Ok(sigma_eq(m)? - (1.0 - m).powi(2))
}

pub fn pk_simplicity(k: usize) -> f64 {
    if k == 0 {
        1.0
    } else {
        0.0
    }
}

/// `∫ e^{delta lambda} rho_edge(lambda) dlambda`, truncated at `-l` where the
/// bulk law `sqrt(-lambda)/pi` takes over in closed form.
pub fn edge_laplace(delta: f64) -> Result<f64> {
    Ok(edge_laplace_scaled(delta)? * (delta.powi(3) / 3.0).exp())
}

/// `e^{-delta^3/3} ∫ e^{delta lambda} rho_edge`, finite for large `delta`.
fn edge_laplace_scaled(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return domain(format!("delta must be positive, got {delta} (the bulk tail diverges otherwise)"));
    }
    if delta > 8.0 {
        return domain(format!("delta = {delta} is beyond the tabulated range (0, 8]; the count equals 1 to double precision there"));
    }
    let l = 40.0;
    let shift = delta.powi(3) / 3.0;
    let f = |x: f64| (delta * x - shift).exp() * special::rho_edge(x).expect("finite");
    let mut body = 0.0;
    // the upper tail e^{delta x - (2/3) x^{3/2}} peaks at x = delta^2 with width ~ sqrt(2 delta)
    let top = (delta * delta + 12.0 * (2.0 * delta).sqrt() + 10.0).clamp(14.0, 95.0);
    let mut cuts = vec![-l, -20.0, -10.0, -4.0, 0.0, 4.0];
    let mut x = 4.0;
    while x < top {
        x = (x + 4.0).min(top);
        cuts.push(x);
    }
    for w in cuts.windows(2) {
        body += quad::adaptive(f, w[0], w[1], 1e-15, 1e-11)?;
    }
    let tail = statrs::function::gamma::gamma_ur(1.5, delta * l) * statrs::function::gamma::gamma(1.5) / (PI * delta.powf(1.5));
    Ok(body + tail * (-shift).exp())
}

/// `2 e^{-delta^3/3} ∫ e^{delta lambda} rho_edge`.
pub fn neq_hierarchy(delta: f64) -> Result<f64> {
    Ok(2.0 * edge_laplace_scaled(delta)?)
}

/// `p_k` in the hierarchy region from an edge-rescaled MC density of the
/// `(k+1)`-th largest eigenvalue.
pub fn pk_hierarchy(delta: f64, edge_density: &EmpiricalDensity) -> Result<Estimate> {
    let denom = edge_laplace(delta)?;
    if edge_density.k.is_none() {
        return domain("hierarchy probabilities need a single order-statistic density");
    }
    if !edge_density.transform.label.starts_with("edge") {
        return domain("hierarchy probabilities need an edge-rescaled density");
    }
    let num = edge_density.integrate_against(|s| delta * s)?;
    Ok(Estimate::new(num.value() / denom, num.value() * num.rel_stderr / denom))
}

/// Edge-rescaled densities of the top `count` eigenvalues of `GOE_n`.
pub fn edge_densities(n: usize, count: usize, grid: BinSpec, n_samples: u64, seed: u64) -> Result<goe::DensitySet> {
    let sampler = GoeSampler::standard(n, seed)?;
    let req = DensityRequest { ks: (0..count).collect(), full: false, grid, transform: Transform::edge(n), n_samples, tilt: None };
    goe::sample_densities(&sampler, &req)
}

/// Edge densities of the top `count` eigenvalues importance sampled towards
/// the peaks of `e^{delta sigma}`. A pilot run pushes the top `k+1`
/// eigenvalues to `sigma = (delta/(k+1))^2`; the final run centres each push
/// on the pilot's weighted mean. Mixture shares fall off like `1/(k+1)`. The grid spans `[-14, delta^2 + 8 sqrt(2 delta) + 6]`.
pub fn hierarchy_densities(delta: f64, n: usize, count: usize, width: f64, n_samples: u64, seed: u64) -> Result<goe::DensitySet> {
    tilted_edge_densities(delta, n, count, width, n_samples, seed, true)
}

/// As [`hierarchy_densities`] on either edge; bottom statistics are binned
/// mirrored (`Transform::edge_bottom`) and listed from the lowest eigenvalue up.
pub fn tilted_edge_densities(delta: f64, n: usize, count: usize, width: f64, n_samples: u64, seed: u64, top: bool) -> Result<goe::DensitySet> {
    RegimeSpec::Hierarchy { delta }.validate()?;
    if count > n {
        return domain(format!("count {count} exceeds n={n}"));
    }
    let tr = if top { Transform::edge(n) } else { Transform::edge_bottom(n) };
    let grid = BinSpec::with_width(-14.0, delta * delta + 8.0 * (2.0 * delta).sqrt() + 6.0, width)?;
    let sampler = GoeSampler::standard(n, seed)?;
    let run = |sigmas: &[f64], sampler: &GoeSampler, n_samples: u64| {
        let targets: Vec<(usize, f64, bool)> = sigmas.iter().enumerate().map(|(k, &s)| (k, tr.invert(s), top)).collect();
        let shares: Vec<f64> = (0..count).map(|k| 1.0 / (k + 1) as f64).collect();
        let tilt = SpectrumTilt::edges_weighted(n, 0.5, &targets, &shares)?;
        let ks = (0..count).map(|k| if top { k } else { n - 1 - k }).collect();
        let req = DensityRequest { ks, full: false, grid, transform: tr.clone(), n_samples, tilt: Some(tilt) };
        goe::sample_densities(sampler, &req)
    };
    let first: Vec<f64> = (0..count).map(|k| (delta / (k + 1) as f64).powi(2)).collect();
    let pilot = run(&first, &GoeSampler::standard(n, seed ^ 0x9e37_79b9_7f4a_7c15)?, (n_samples / 5).max(2000))?;
    let refined: Vec<f64> = pilot.by_k.iter().zip(&first).map(|(d, &fallback)| weighted_mean(d, delta).unwrap_or(fallback)).collect();
    run(&refined, &sampler, n_samples)
}

/// Mean of `sigma` under `e^{delta sigma}` times the binned density.
fn weighted_mean(d: &EmpiricalDensity, delta: f64) -> Option<f64> {
    let c: Vec<f64> = d.bin_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let logs: Vec<f64> = (0..c.len()).map(|b| d.density(b).ln() + delta * c[b]).collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return None;
    }
    let (num, den) = logs.iter().zip(&c).fold((0.0, 0.0), |(a, b), (&l, &x)| {
        let w = (l - top).exp();
        (a + w * x, b + w)
    });
    Some(num / den)
}

/// Hierarchy-region distribution `p_0 .. p_{K-1}`.
pub fn hierarchy_distribution(delta: f64, set: &goe::DensitySet) -> Result<IndexDistribution> {
    let mut p = Vec::new();
    let mut se = Vec::new();
    for d in &set.by_k {
        let e = pk_hierarchy(delta, d)?;
        p.push(e.value);
        se.push(e.stderr);
    }
    let mut dist = IndexDistribution::discrete(p, se);
    dist.normalized = false;
    Ok(dist.with_meta("regime", "hierarchy").with_meta("delta", delta))
}

fn toppling_exponent(delta: f64, u: f64) -> f64 {
    // ln of 3u^2 e^{-(delta + c u^2)^2} after x = u^3, shifted by delta^2
    let c = edge_constant();
    (3.0 * u * u).ln() - 2.0 * delta * c * u * u - c * c * u.powi(4)
}

fn toppling_upper(delta: f64) -> f64 {
    let c = edge_constant();
    // (delta + c u^2)^2 grows past 900 beyond this point
    ((30.0 + delta.abs()) / c).sqrt() * 1.5 + 1.0
}

/// `ln(e^{delta^2} ∫_0^∞ e^{-(delta + c x^{2/3})^2} dx)`.
pub fn toppling_log_norm(delta: f64) -> Result<f64> {
    crate::error::finite(delta, "delta")?;
    quad::log_integrate_peaked(|u| toppling_exponent(delta, u), 0.0, toppling_upper(delta))
}

/// Normalized toppling density on `x >= 0`.
pub fn toppling_density(delta: f64, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return domain(format!("rescaled index must be non-negative, got {x}"));
    }
    let c = edge_constant();
    let log_z = toppling_log_norm(delta)?;
    Ok((delta * delta - (delta + c * x.powf(2.0 / 3.0)).powi(2) - log_z).exp())
}

/// Toppling cdf `P(kappa)`.
pub fn toppling_cdf(delta: f64, kappa: f64) -> Result<f64> {
    if !(kappa >= 0.0) {
        return domain(format!("rescaled index must be non-negative, got {kappa}"));
    }
    let log_z = toppling_log_norm(delta)?;
    let upper = toppling_upper(delta);
    let u = kappa.cbrt().min(upper);
    if u == 0.0 {
        return Ok(0.0);
    }
    let f = |v: f64| (toppling_exponent(delta, v) - log_z).exp();
    let left = quad::adaptive(f, 0.0, u, 1e-15, 1e-13)?;
    let right = quad::adaptive(f, u, upper, 1e-15, 1e-13)?;
    Ok((left / (left + right)).clamp(0.0, 1.0))
}

/// `2 N^{1/4} e^{delta^2} ∫_0^∞ e^{-(delta + c x^{2/3})^2} dx`.
pub fn neq_toppling(delta: f64, n: usize) -> Result<f64> {
    Ok(2.0 * (n as f64).powf(0.25) * toppling_log_norm(delta)?.exp())
}

/// Mode of the toppling density: `(4 sqrt 2 / (3 pi)) (-delta)^{3/2}` for `delta < 0`.
pub fn kappa_max_toppling(delta: f64) -> f64 {
    if delta < 0.0 {
        4.0 * SQRT_2 / (3.0 * PI) * (-delta).powf(1.5)
    } else {
        0.0
    }
}

/// Toppling density on a uniform grid `[0, hi]`.
pub fn toppling_distribution(delta: f64, hi: f64, points: usize) -> Result<IndexDistribution> {
    let support: Vec<f64> = (0..points).map(|i| hi * i as f64 / (points - 1) as f64).collect();
    let prob = support.iter().map(|&x| toppling_density(delta, x)).collect::<Result<Vec<_>>>()?;
    Ok(IndexDistribution::continuous("1/4", support, prob, true).with_meta("regime", "toppling").with_meta("delta", delta))
}

/// Atom location `t(m)` of the complexity region.
pub fn kappa_max_complexity(m: f64) -> Result<f64> {
    check_unit_interval(m)?;
    Ok((m.acos() - m * (1.0 - m * m).sqrt()) / PI)
}

/// Step cdf `theta(kappa - t(m))`.
pub fn complexity_cdf(m: f64, kappa: f64) -> Result<f64> {
    let t = kappa_max_complexity(m)?;
    if !(0.0..=1.0).contains(&kappa) {
        return domain(format!("kappa must lie in [0, 1], got {kappa}"));
    }
    Ok(if kappa >= t { 1.0 } else { 0.0 })
}

/// `ln <N_eq> = N Sigma_eq(m) + ln(4 sqrt(N/pi) sqrt(1 - m^2))`.
pub fn log_neq_complexity(m: f64, n: usize) -> Result<f64> {
    let nf = n as f64;
    Ok(nf * sigma_eq(m)? + (4.0 * (nf / PI).sqrt() * (1.0 - m * m).sqrt()).ln())
}

pub fn complexity_distribution(m: f64) -> Result<IndexDistribution> {
    let t = kappa_max_complexity(m)?;
    let mut d = IndexDistribution::continuous("1", vec![], vec![], true).with_meta("regime", "complexity").with_meta("m", m);
    d.atom = Some((t, 1.0));
    Ok(d)
}

pub fn simplicity_distribution(m: f64) -> Result<IndexDistribution> {
    RegimeSpec::Simplicity { m }.validate()?;
    Ok(IndexDistribution::discrete(vec![1.0], vec![0.0]).with_meta("regime", "simplicity").with_meta("m", m))
}
