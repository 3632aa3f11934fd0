//! Monte Carlo checks of the counting identity and of the approximations
//! built on it. Every check returns a [`CheckReport`] that can be replayed
//! from its embedded seed and parameters.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{domain, Error, Result};
use crate::goe::{self, Branch, GoeSampler, Method, SpectrumTilt, Transform};
use crate::landscape::{self, DensitySource, LandscapeParams};
use crate::{pspin, quad, special, Estimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub stderr_lhs: f64,
    pub stderr_rhs: f64,
    pub z_score: f64,
    /// `|z|` bound used for the verdict.
    pub threshold: f64,
    pub pass: bool,
    pub status: Status,
    pub details: Vec<(String, f64)>,
    pub metadata: Vec<(String, String)>,
}

impl CheckReport {
    fn new(name: &str, lhs: Estimate, rhs: Estimate, threshold: f64) -> Self {
        let z = lhs.z_against(&rhs);
        let pass = z.abs() <= threshold;
        Self {
            check_name: name.into(),
            lhs: lhs.value,
            rhs: rhs.value,
            stderr_lhs: lhs.stderr,
            stderr_rhs: rhs.stderr,
            z_score: z,
            threshold,
            pass,
            status: if pass { Status::Pass } else { Status::Fail },
            details: vec![],
            metadata: vec![],
        }
    }

    fn set_pass(&mut self, pass: bool) {
        self.pass = pass;
        self.status = if pass { Status::Pass } else { Status::Fail };
    }

    fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.push((key.into(), value.to_string()));
        self
    }

    fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.push((key.into(), value));
        self
    }

    pub fn get_detail(&self, key: &str) -> Option<f64> {
        self.details.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("plain data");
        v["schema_version"] = 1.into();
        v
    }

    pub fn to_json_line(&self) -> String {
        self.to_json().to_string()
    }
}

/// One line per report: name, status, both sides and the z-score.
pub fn summary_table(reports: &[CheckReport]) -> String {
    let mut s = format!("{:<28} {:<12} {:>14} {:>14} {:>9}\n", "check", "status", "lhs", "rhs", "z");
    for r in reports {
        let status = format!("{:?}", r.status).to_lowercase();
        s.push_str(&format!("{:<28} {:<12} {:>14.6e} {:>14.6e} {:>9.3}\n", r.check_name, status, r.lhs, r.rhs, r.z_score));
    }
    s
}

/// Two-sided `|z|` bound for `m` simultaneous comparisons: 3 up to ten,
/// Bonferroni-widened at the 3-sigma level beyond.
pub fn bonferroni_z(m: usize) -> f64 {
    if m <= 10 {
        return 3.0;
    }
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    normal.inverse_cdf(1.0 - 0.0027 / (2.0 * m as f64))
}

/// Density estimate at a point with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointDensity {
    pub kde: Estimate,
    pub bin: Estimate,
    pub bandwidth: f64,
    /// Samples within one bandwidth of the point.
    pub support: usize,
}

/// Gaussian KDE with Silverman's bandwidth and a histogram bin of one
/// bandwidth centred on `y`.
pub fn point_density(samples: &[f64], y: f64) -> Result<PointDensity> {
    let w: Vec<(f64, f64)> = samples.iter().map(|&x| (x, 1.0)).collect();
    point_density_weighted(&w, y)
}

/// As [`point_density`] for importance-weighted samples `(x, w)`; the
/// bandwidth uses weighted moments and Kish's effective sample size.
pub fn point_density_weighted(samples: &[(f64, f64)], y: f64) -> Result<PointDensity> {
    let n = samples.len();
    if n < 2 {
        return domain("need at least two samples for a density estimate");
    }
    let nf = n as f64;
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let sw: f64 = sorted.iter().map(|p| p.1).sum();
    let sw2: f64 = sorted.iter().map(|p| p.1 * p.1).sum();
    if !(sw > 0.0) {
        return domain("all sample weights vanish");
    }
    let mean = sorted.iter().map(|p| p.0 * p.1).sum::<f64>() / sw;
    let sd = (sorted.iter().map(|p| p.1 * (p.0 - mean).powi(2)).sum::<f64>() / sw).sqrt();
    let quantile = |q: f64| {
        let mut acc = 0.0;
        for p in &sorted {
            acc += p.1;
            if acc >= q * sw {
                return p.0;
            }
        }
        sorted[n - 1].0
    };
    let iqr = quantile(0.75) - quantile(0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    let ess = sw * sw / sw2;
    let h = 0.9 * spread * ess.powf(-0.2);
    if !(h > 0.0) {
        return domain("samples are degenerate");
    }
    let xs: Vec<f64> = sorted.iter().map(|p| p.0).collect();
    let range = |a: f64, b: f64| xs.partition_point(|&x| x < a)..xs.partition_point(|&x| x <= b);
    let norm = 1.0 / (h * (2.0 * std::f64::consts::PI).sqrt());
    let (mut k1, mut k2) = (0.0, 0.0);
    for &(x, w) in &sorted[range(y - 8.0 * h, y + 8.0 * h)] {
        let v = w * norm * (-0.5 * ((y - x) / h).powi(2)).exp();
        k1 += v;
        k2 += v * v;
    }
    let (mut b1, mut b2) = (0.0, 0.0);
    for &(_, w) in &sorted[range(y - 0.5 * h, y + 0.5 * h)] {
        b1 += w / h;
        b2 += (w / h).powi(2);
    }
    let est = |s1: f64, s2: f64| {
        let m = s1 / nf;
        Estimate::new(m, ((s2 / nf - m * m).max(0.0) / (nf - 1.0)).sqrt())
    };
    Ok(PointDensity { kde: est(k1, k2), bin: est(b1, b2), bandwidth: h, support: range(y - h, y + h).len() })
}

/// `ln C_N` with `C_N = sqrt 2 (2/N)^{N/2} mu_c^N Gamma((N+1)/2)`.
pub fn log_relation_constant(n: usize, mu_c: f64) -> f64 {
    let nf = n as f64;
    0.5 * 2f64.ln() + 0.5 * nf * (2.0 / nf).ln() + nf * mu_c.ln() + special::ln_gamma(0.5 * (nf + 1.0)).expect("positive argument")
}

/// Dual Monte Carlo check of
/// `<|det(z - M)| Theta_k(z - M)>_{GOE_n} = C_N e^{N z^2/(4 mu_c^2)} rho^{(k+1)}_{N+1}(z sqrt(N/(2 mu_c^2)))`
/// with `P(M) ∝ exp(-N Tr M^2 / (4 mu_c^2))` on the left. The two sides use
/// independent streams (`seed` and `seed + 1`); both are importance sampled
/// towards the evaluation point when it lies beyond the typical spectrum.
pub fn check_relation(n: usize, k: usize, z: f64, mu_c: f64, n_samples: u64, seed: u64) -> Result<CheckReport> {
    if n == 0 || k > n {
        return domain(format!("need n >= 1 and 0 <= k <= n, got n={n}, k={k}"));
    }
    if !(mu_c > 0.0) || !z.is_finite() {
        return domain(format!("need mu_c > 0 and finite z, got mu_c={mu_c}, z={z}"));
    }
    if n_samples < 2 {
        return domain("need at least two samples");
    }
    let nf = n as f64;
    // off-diagonal variance mu_c^2 / N, diagonal twice that
    let v_left = mu_c * mu_c / nf;
    let left = GoeSampler::new(n, v_left, Method::Dense, seed)?;
    // rare configurations are reached by pushing the top block past z
    let tilt_left = if k >= 1 { SpectrumTilt::edges(n, v_left, &[(k - 1, z, true)])? } else { SpectrumTilt::new(1.0, vec![])? };
    let (s1, s2, hits) = goe::par_samples(
        n_samples,
        || (0.0f64, 0.0f64, 0u64),
        |acc, i| {
            let (ev, w) = tilt_left.sample(&left, i)?;
            if ev.iter().filter(|&&x| x > z).count() == k {
                let v: f64 = w * ev.iter().map(|x| (z - x).abs()).product::<f64>();
                acc.0 += v;
                acc.1 += v * v;
                acc.2 += 1;
            }
            Ok(())
        },
        |a, b| {
            a.0 += b.0;
            a.1 += b.1;
            a.2 += b.2;
        },
    )?;
    let ns = n_samples as f64;
    let lhs_mean = s1 / ns;
    let lhs = Estimate::new(lhs_mean, ((s2 / ns - lhs_mean * lhs_mean).max(0.0) / (ns - 1.0)).sqrt());

    let y = z * (nf / (2.0 * mu_c * mu_c)).sqrt();
    let right = GoeSampler::standard(n + 1, seed.wrapping_add(1))?;
    let tilt_right = SpectrumTilt::edges(n + 1, right.variance_scale, &[(k, y, true)])?;
    let kth = goe::par_samples(
        n_samples,
        Vec::new,
        |acc: &mut Vec<(f64, f64)>, i| {
            let (ev, w) = tilt_right.sample(&right, i)?;
            acc.push((ev[k], w));
            Ok(())
        },
        |a, b| a.extend(b),
    )?;
    let pd = point_density_weighted(&kth, y)?;
    if pd.support == 0 {
        return Err(Error::Coverage(format!("no samples of the {}-th eigenvalue within one bandwidth of y={y}", k + 1)));
    }
    let scale = (log_relation_constant(n, mu_c) + nf * z * z / (4.0 * mu_c * mu_c)).exp();
    let rhs = Estimate::new(scale * pd.kde.value, scale * pd.kde.stderr);
    let rhs_bin = Estimate::new(scale * pd.bin.value, scale * pd.bin.stderr);
    let mut r = CheckReport::new("relation", lhs, rhs, 3.0);
    // the two estimators share samples, so this z is conservative
    let z_est = rhs.z_against(&rhs_bin);
    let z_bin = lhs.z_against(&rhs_bin);
    let agree = z_est.abs() <= 3.0;
    let pass = r.pass && agree;
    r.set_pass(pass);
    Ok(r.detail("rhs_bin", rhs_bin.value)
        .detail("stderr_rhs_bin", rhs_bin.stderr)
        .detail("z_bin", z_bin)
        .detail("z_estimators", z_est)
        .detail("bandwidth", pd.bandwidth)
        .detail("lhs_hits", hits as f64)
        .detail("rhs_support", pd.support as f64)
        .meta("n", n)
        .meta("k", k)
        .meta("z", z)
        .meta("mu_c", mu_c)
        .meta("samples_per_side", n_samples)
        .meta("seed", seed))
}

/// Mode of a binned density: least-squares parabola through the bins within
/// `half_width` of the peak of a 5-bin moving average.
pub fn smoothed_mode(centers: &[f64], dens: &[f64], half_width: f64) -> f64 {
    let nb = dens.len();
    let smooth: Vec<f64> = (0..nb)
        .map(|b| {
            let lo = b.saturating_sub(2);
            let hi = (b + 3).min(nb);
            dens[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect();
    let peak = (0..nb).max_by(|&a, &b| smooth[a].total_cmp(&smooth[b])).unwrap_or(0);
    let x0 = centers[peak];
    let pts: Vec<(f64, f64)> = (0..nb).filter(|&b| (centers[b] - x0).abs() <= half_width).map(|b| (centers[b] - x0, dens[b])).collect();
    if pts.len() < 3 {
        return x0;
    }
    let m = nalgebra::DMatrix::from_fn(pts.len(), 3, |i, j| pts[i].0.powi(j as i32));
    let v = nalgebra::DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
    match (m.transpose() * &m).lu().solve(&(m.transpose() * v)) {
        Some(c) if c[2] < 0.0 => x0 - c[1] / (2.0 * c[2]),
        _ => x0,
    }
}

pub fn density_mode(d: &goe::EmpiricalDensity, half_width: f64) -> f64 {
    let centers: Vec<f64> = (0..d.bins()).map(|b| d.center(b)).collect();
    let dens: Vec<f64> = (0..d.bins()).map(|b| d.density(b)).collect();
    smoothed_mode(&centers, &dens, half_width)
}

fn edge_samples(n: usize, k: usize, n_samples: u64, seed: u64) -> Result<Vec<f64>> {
    let sampler = GoeSampler::standard(n, seed)?.with_method(Method::Tridiagonal);
    let t = Transform::edge(n);
    goe::par_samples(
        n_samples,
        Vec::new,
        |acc: &mut Vec<f64>, i| {
            acc.push(t.apply(sampler.sample_top(i, k + 1)[k]));
            Ok(())
        },
        |a, b| a.extend(b),
    )
}

/// Two-scale self-consistency of the edge law: edge-rescaled samples of the
/// `(k+1)`-th largest eigenvalue at `n` and `2n` should share one limit.
/// The KS distance is reported as `lhs` against the critical value as `rhs`.
pub fn check_tw_approx(n: usize, k: usize, n_samples: u64, seed: u64) -> Result<CheckReport> {
    if n < 500 || k > 4 {
        return domain(format!("edge-law check needs n >= 500 and k <= 4, got n={n}, k={k}"));
    }
    let a = edge_samples(n, k, n_samples, seed)?;
    let b = edge_samples(2 * n, k, n_samples, seed.wrapping_add(1))?;
    let d = goe::ks_distance(&a, &b);
    let crit = goe::ks_critical(a.len(), b.len(), 0.0027);
    let grid = goe::BinSpec::with_width(-12.0, 6.0, 0.05)?;
    let mode_of = |v: &[f64]| {
        let mut h = vec![0.0; grid.bins];
        for &x in v {
            if let Ok(i) = grid.locate(x) {
                h[i] += 1.0;
            }
        }
        let centers: Vec<f64> = (0..grid.bins).map(|i| grid.lo + grid.width() * (i as f64 + 0.5)).collect();
        smoothed_mode(&centers, &h, 0.6)
    };
    let mut r = CheckReport::new("tw_approx", Estimate::exact(d), Estimate::exact(crit), 3.0);
    r.z_score = 3.0 * d / crit;
    r.set_pass(d <= crit);
    if n_samples < 2000 {
        r.status = Status::Inconclusive;
        r.pass = false;
    }
    Ok(r.detail("mode_n", mode_of(&a)).detail("mode_2n", mode_of(&b)).meta("n", n).meta("k", k).meta("samples", n_samples).meta("seed", seed))
}

/// Per-bin comparison of the summed edge-rescaled densities of the top
/// `count` eigenvalues of `GOE_n` with `rho_edge` on `[lo, hi]`.
pub fn check_edge_partition(n: usize, count: usize, lo: f64, hi: f64, width: f64, n_samples: u64, seed: u64) -> Result<CheckReport> {
    let grid = goe::BinSpec::with_width(lo, hi, width)?;
    let sampler = GoeSampler::standard(n, seed)?.with_method(Method::Tridiagonal);
    let t = Transform::edge(n);
    let nb = grid.bins;
    let (c1, c2) = goe::par_samples(
        n_samples,
        || (vec![0.0f64; nb], vec![0.0f64; nb]),
        |acc, i| {
            let mut hit = vec![0u32; 0];
            for x in sampler.sample_top(i, count) {
                if let Ok(b) = grid.locate(t.apply(x)) {
                    hit.push(b as u32);
                }
            }
            hit.sort();
            let mut j = 0;
            while j < hit.len() {
                let b = hit[j];
                let mut c = 0.0;
                while j < hit.len() && hit[j] == b {
                    c += 1.0;
                    j += 1;
                }
                acc.0[b as usize] += c;
                acc.1[b as usize] += c * c;
            }
            Ok(())
        },
        |a, b| {
            a.0.iter_mut().zip(&b.0).for_each(|(x, y)| *x += y);
            a.1.iter_mut().zip(&b.1).for_each(|(x, y)| *x += y);
        },
    )?;
    let ns = n_samples as f64;
    let w = grid.width();
    let threshold = bonferroni_z(nb);
    let mut worst = (0.0f64, 0usize, Estimate::exact(0.0), 0.0);
    for b in 0..nb {
        let a = grid.lo + w * b as f64;
        let mean = c1[b] / ns;
        let se = ((c2[b] / ns - mean * mean).max(0.0) / (ns - 1.0)).sqrt() / w;
        let mc = Estimate::new(mean / w, se);
        let exact = quad::adaptive(special::rho_edge_raw, a, a + w, 1e-14, 1e-11)? / w;
        let z = mc.z_against(&Estimate::exact(exact));
        if z.abs() > worst.0.abs() || b == 0 {
            worst = (z, b, mc, exact);
        }
    }
    let (z, b, mc, exact) = worst;
    let mut r = CheckReport::new("edge_partition", mc, Estimate::exact(exact), threshold);
    r.z_score = z;
    r.set_pass(z.abs() <= threshold);
    Ok(r.detail("worst_bin_center", grid.lo + w * (b as f64 + 0.5))
        .detail("bins", nb as f64)
        .meta("n", n)
        .meta("count", count)
        .meta("window", format!("[{lo}, {hi}]"))
        .meta("width", width)
        .meta("samples", n_samples)
        .meta("seed", seed))
}

/// MC mean and variance of the `(k+1)`-th largest eigenvalue of `GOE_n`
/// against the Gaussian approximation; the verdict uses the mean.
pub fn check_gaussian_approx(n: usize, k: usize, branch: Branch, n_samples: u64, seed: u64) -> Result<CheckReport> {
    let (mu, sigma) = goe::gaussian_approx(n, k, branch)?;
    let sampler = GoeSampler::standard(n, seed)?.with_method(Method::Tridiagonal);
    let (mean, var) = goe::order_statistic_moments(&sampler, k, n_samples)?;
    let r = CheckReport::new("gaussian_approx", mean, Estimate::exact(mu), 3.0);
    let z_var = var.z_against(&Estimate::exact(sigma * sigma));
    Ok(r.detail("var_mc", var.value)
        .detail("stderr_var_mc", var.stderr)
        .detail("var_approx", sigma * sigma)
        .detail("z_var", z_var)
        .meta("n", n)
        .meta("k", k)
        .meta("branch", format!("{branch:?}").to_lowercase())
        .meta("samples", n_samples)
        .meta("seed", seed))
}

/// Exact quantity whose approach to an asymptotic value is tracked along `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum ConvergenceCase {
    /// Cumulative `P_k` at `k = floor(kappa n^{1/4})`, `m = 1 + delta/sqrt(n)`, against `toppling_cdf`.
    LandscapeToppling { delta: f64, kappa: f64 },
    /// `p_0` at fixed `m > 1`, against 1.
    LandscapeSimplicityP0 { m: f64 },
    /// `<N_eq>` at fixed `m > 1`, against 1.
    LandscapeSimplicityNeq { m: f64 },
    /// p-spin `<N_eq>` at fixed `B < 0`, against 2.
    PSpinRegionA { b: f64 },
}

impl ConvergenceCase {
    pub fn name(&self) -> &'static str {
        match self {
            ConvergenceCase::LandscapeToppling { .. } => "landscape/toppling",
            ConvergenceCase::LandscapeSimplicityP0 { .. } => "landscape/simplicity-p0",
            ConvergenceCase::LandscapeSimplicityNeq { .. } => "landscape/simplicity-neq",
            ConvergenceCase::PSpinRegionA { .. } => "pspin/a",
        }
    }

    fn target(&self) -> Result<f64> {
        match *self {
            ConvergenceCase::LandscapeToppling { delta, kappa } => landscape::toppling_cdf(delta, kappa),
            ConvergenceCase::LandscapeSimplicityP0 { m } | ConvergenceCase::LandscapeSimplicityNeq { m } => {
                landscape::RegimeSpec::Simplicity { m }.validate()?;
                Ok(1.0)
            }
            ConvergenceCase::PSpinRegionA { b } => {
                if !(b > -1.0 && b < 0.0) {
                    return domain(format!("region a needs -1 < B < 0, got {b}"));
                }
                Ok(pspin::neq_region_a())
            }
        }
    }

    /// Exact MC-quadrature value at dimension `n`.
    pub fn exact(&self, n: usize, n_samples: u64, seed: u64) -> Result<Estimate> {
        match *self {
            ConvergenceCase::LandscapeToppling { delta, kappa } => {
                let nf = n as f64;
                let m = 1.0 + delta / nf.sqrt();
                let params = LandscapeParams::new(m, n)?;
                let kmax = ((kappa * nf.powf(0.25)).floor() as usize).min(n);
                let ks: Vec<usize> = (0..=kmax).collect();
                let cs = landscape::landscape_sample(params, &ks, true, n_samples, seed)?;
                ratio(params, &ks, &cs.set)
            }
            ConvergenceCase::LandscapeSimplicityP0 { m } => {
                let params = LandscapeParams::new(m, n)?;
                let cs = landscape::landscape_sample(params, &[0], true, n_samples, seed)?;
                ratio(params, &[0], &cs.set)
            }
            ConvergenceCase::LandscapeSimplicityNeq { m } => {
                let params = LandscapeParams::new(m, n)?;
                let cs = landscape::landscape_sample(params, &[], true, n_samples, seed)?;
                let full = cs.set.full.as_ref().expect("requested");
                Ok(landscape::mean_neq_exact(params, DensitySource::Empirical(full))?.estimate())
            }
            ConvergenceCase::PSpinRegionA { b } => {
                let cs = pspin::pspin_sample(b, n, &[], true, n_samples, seed)?;
                let full = cs.set.full.as_ref().expect("requested");
                Ok(pspin::mean_neq_pspin(b, n, DensitySource::Empirical(full))?.estimate())
            }
        }
    }
}

/// `sum_{k in ks} <N_k> / <N_eq>` from one sample; relative errors are
/// added in quadrature, which overstates the error of a positively
/// correlated ratio.
fn ratio(params: LandscapeParams, ks: &[usize], set: &goe::DensitySet) -> Result<Estimate> {
    let full = set.full.as_ref().expect("requested");
    let neq = landscape::mean_neq_exact(params, DensitySource::Empirical(full))?;
    let mut num = 0.0;
    let mut var = 0.0;
    for &k in ks {
        let d = set.get(k).ok_or_else(|| Error::Domain(format!("no density for k={k}")))?;
        let e = landscape::mean_nk_exact(params, k, DensitySource::Empirical(d))?.estimate();
        num += e.value;
        var += e.stderr * e.stderr;
    }
    let r = num / neq.value();
    let rel = ((var.sqrt() / num).powi(2) + neq.rel_stderr.powi(2)).sqrt();
    Ok(Estimate::new(r, r * rel))
}

/// Tracks `|exact(n) - target|` along ascending `n_list`. Passes when no step
/// increases the discrepancy by more than 3 combined standard errors.
pub fn check_regime_convergence(case: ConvergenceCase, n_list: &[usize], n_samples: u64, seed: u64) -> Result<CheckReport> {
    if n_list.len() < 2 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return domain("n_list must hold at least two ascending dimensions");
    }
    let target = case.target()?;
    let mut seq = Vec::new();
    for (i, &n) in n_list.iter().enumerate() {
        seq.push(case.exact(n, n_samples, seed.wrapping_add(i as u64))?);
    }
    let monotone = seq.windows(2).all(|w| {
        let (a, b) = ((w[0].value - target).abs(), (w[1].value - target).abs());
        b <= a + 3.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt()
    });
    let last = *seq.last().expect("non-empty");
    let mut r = CheckReport::new("regime_convergence", last, Estimate::exact(target), 3.0);
    r.set_pass(monotone);
    for (n, e) in n_list.iter().zip(&seq) {
        r = r.detail(&format!("exact_n{n}"), e.value).detail(&format!("stderr_n{n}"), e.stderr);
    }
    let list = n_list.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",");
    Ok(r.meta("case", case.name())
        .meta("params", serde_json::to_string(&case).expect("plain data"))
        .meta("n_list", list)
        .meta("samples", n_samples)
        .meta("seed", seed))
}
