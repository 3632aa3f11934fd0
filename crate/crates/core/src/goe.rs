//! GOE eigenvalue sampling and binned order-statistic densities.
//!
//! A sampler with `variance_scale = v` draws symmetric matrices with
//! off-diagonal variance `v` and diagonal variance `2v`. With `v = 1/2` the
//! spectral edge of `GOE_n` sits at `sqrt(2n)`; that is the convention used by
//! every model module.
//!
//! Sample `i` always draws from a ChaCha8 stream keyed by `(seed, i)`, and
//! samples are processed in fixed-size chunks merged in chunk order, so every
//! estimate is bit-identical for any number of worker threads.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad;
use crate::special;
use crate::{Estimate, LogEstimate};

pub const CHUNK: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Tridiagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoeSampler {
    pub n: usize,
    pub variance_scale: f64,
    pub method: Method,
    pub seed: u64,
}

/// Symmetric tridiagonal matrix: diagonal `d`, off-diagonal `e` (`e[i]` couples `i` and `i+1`).
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

impl GoeSampler {
    pub fn new(n: usize, variance_scale: f64, method: Method, seed: u64) -> Result<Self> {
        if n == 0 {
            return domain("matrix size must be positive");
        }
        if !(variance_scale > 0.0 && variance_scale.is_finite()) {
            return domain(format!("variance_scale must be positive, got {variance_scale}"));
        }
        Ok(Self { n, variance_scale, method, seed })
    }

    /// Edge at `sqrt(2n)`; dense for small fixtures, tridiagonal otherwise.
    pub fn standard(n: usize, seed: u64) -> Result<Self> {
        let method = if n <= 64 { Method::Dense } else { Method::Tridiagonal };
        Self::new(n, 0.5, method, seed)
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// Draws the leading `len` rows of the tridiagonal model.
    pub fn tridiagonal<R: Rng>(&self, rng: &mut R, len: usize) -> Tridiagonal {
        let len = len.min(self.n);
        let sd = (2.0 * self.variance_scale).sqrt();
        let so = self.variance_scale.sqrt();
        let mut d = Vec::with_capacity(len);
        let mut e = Vec::with_capacity(len.saturating_sub(1));
        for i in 0..len {
            let z: f64 = rng.sample(StandardNormal);
            d.push(sd * z);
            if i + 1 < len {
                let dof = (self.n - 1 - i) as f64;
                let chi2 = ChiSquared::new(dof).expect("positive degrees of freedom").sample(rng);
                e.push(so * chi2.sqrt());
            }
        }
        Tridiagonal { d, e }
    }

    fn dense_spectrum<R: Rng>(&self, rng: &mut R) -> Option<Vec<f64>> {
        let n = self.n;
        let sd = (2.0 * self.variance_scale).sqrt();
        let so = self.variance_scale.sqrt();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            m[(i, i)] = sd * z;
            for j in (i + 1)..n {
                let z: f64 = rng.sample(StandardNormal);
                m[(i, j)] = so * z;
                m[(j, i)] = so * z;
            }
        }
        let eig = nalgebra::SymmetricEigen::try_new(m, f64::EPSILON, 10_000)?;
        let mut ev: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        Some(ev)
    }

    /// Descending spectrum of draw `index`.
    pub fn sample_spectrum(&self, index: u64) -> Result<Vec<f64>> {
        let mut rng = self.rng(index);
        self.spectrum_from(&mut rng)
    }

    fn spectrum_from<R: Rng>(&self, rng: &mut R) -> Result<Vec<f64>> {
        for attempt in 0..8 {
            let out = match self.method {
                Method::Dense => self.dense_spectrum(rng),
                Method::Tridiagonal => {
                    let t = self.tridiagonal(rng, self.n);
                    tridiagonal_eigenvalues(t).ok()
                }
            };
            match out {
                Some(ev) => {
                    if attempt > 0 {
                        log::warn!("eigen-solver recovered after {attempt} redraws");
                    }
                    return Ok(ev);
                }
                None => log::warn!("eigen-solver did not converge; redrawing"),
            }
        }
        Err(Error::Sampling("eigen-solver failed on 8 consecutive draws".into()))
    }

    /// Top `count` eigenvalues of draw `index` (descending), from a truncated
    /// leading block of the tridiagonal model and Sturm bisection.
    pub fn sample_top(&self, index: u64, count: usize) -> Vec<f64> {
        let mut rng = self.rng(index);
        let t = self.tridiagonal(&mut rng, truncation_length(self.n, count));
        let count = count.min(t.d.len());
        let e2: Vec<f64> = t.e.iter().map(|x| x * x).collect();
        let (lo, hi) = gershgorin(&t);
        top_eigenvalues(&t.d, &e2, count, lo, hi)
    }

    /// Top `top` and bottom `bottom` eigenvalues of draw `index` from one
    /// truncated block (both edges live on the leading rows). The bottom
    /// values come in ascending order.
    pub fn sample_edges(&self, index: u64, top: usize, bottom: usize) -> (Vec<f64>, Vec<f64>) {
        let mut rng = self.rng(index);
        let t = self.tridiagonal(&mut rng, truncation_length(self.n, top.max(bottom)));
        let e2: Vec<f64> = t.e.iter().map(|x| x * x).collect();
        let (lo, hi) = gershgorin(&t);
        let up = top_eigenvalues(&t.d, &e2, top.min(t.d.len()), lo, hi);
        let neg: Vec<f64> = t.d.iter().map(|x| -x).collect();
        let down = top_eigenvalues(&neg, &e2, bottom.min(t.d.len()), -hi, -lo).into_iter().map(|x| -x).collect();
        (up, down)
    }

    /// The `(k+1)`-th largest eigenvalue of draw `index` from the full tridiagonal model.
    pub fn sample_kth(&self, index: u64, k: usize) -> Result<f64> {
        if k >= self.n {
            return domain(format!("order index {k} out of range for n={}", self.n));
        }
        let mut rng = self.rng(index);
        let t = self.tridiagonal(&mut rng, self.n);
        let e2: Vec<f64> = t.e.iter().map(|x| x * x).collect();
        let (lo, hi) = gershgorin(&t);
        Ok(kth_largest(&t.d, &e2, k, lo, hi))
    }
}

/// Rows of the tridiagonal model that carry the top `count` eigenvalues.
///
/// The `j`-th edge eigenvector lives on the first `|a_j| n^{1/3}` rows, with
/// `a_j` the `j`-th Airy zero, and decays like an Airy tail beyond; eight
/// more units of `n^{1/3}` leave an error far below double precision.
pub fn truncation_length(n: usize, count: usize) -> usize {
    let c = count.max(1) as f64;
    let zero = (3.0 * std::f64::consts::PI * (c - 0.25) / 2.0).powf(2.0 / 3.0);
    let l = ((zero + 8.0) * (n as f64).cbrt()).ceil() as usize + 20;
    l.min(n)
}

fn gershgorin(t: &Tridiagonal) -> (f64, f64) {
    let n = t.d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { t.e[i - 1].abs() } else { 0.0 } + if i + 1 < n { t.e[i].abs() } else { 0.0 };
        lo = lo.min(t.d[i] - r);
        hi = hi.max(t.d[i] + r);
    }
    (lo - 1e-9, hi + 1e-9)
}

/// Number of eigenvalues strictly below `x`.
pub fn sturm_count(d: &[f64], e2: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        let denom = if q == 0.0 { f64::MIN_POSITIVE } else { q };
        q = d[i] - x - e2[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn kth_largest(d: &[f64], e2: &[f64], k: usize, lo: f64, hi: f64) -> f64 {
    let n = d.len();
    let need = n - k; // eigenvalues below any point above the target
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > 1e-12 * (1.0 + lo.abs().max(hi.abs())) {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if sturm_count(d, e2, mid) >= need {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sturm counts at several points in one sweep; the independent recurrences
/// interleave, which keeps the divider busy.
fn sturm_counts(d: &[f64], e2: &[f64], xs: &[f64], out: &mut [usize]) {
    let m = xs.len();
    let mut q: Vec<f64> = xs.iter().map(|x| d[0] - x).collect();
    for j in 0..m {
        out[j] = (q[j] < 0.0) as usize;
    }
    for i in 1..d.len() {
        let (di, ei) = (d[i], e2[i - 1]);
        for j in 0..m {
            let denom = if q[j] == 0.0 { f64::MIN_POSITIVE } else { q[j] };
            q[j] = di - xs[j] - ei / denom;
            out[j] += (q[j] < 0.0) as usize;
        }
    }
}

/// Largest `count` eigenvalues, bisecting all targets together.
fn top_eigenvalues(d: &[f64], e2: &[f64], count: usize, lo: f64, hi: f64) -> Vec<f64> {
    let n = d.len();
    let mut lows = vec![lo; count];
    let mut highs = vec![hi; count];
    let mut mids = Vec::with_capacity(count);
    let mut idx = Vec::with_capacity(count);
    let mut counts = vec![0usize; count];
    loop {
        mids.clear();
        idx.clear();
        for k in 0..count {
            let mid = 0.5 * (lows[k] + highs[k]);
            let open = highs[k] - lows[k] > 1e-12 * (1.0 + lows[k].abs().max(highs[k].abs()));
            if open && mid != lows[k] && mid != highs[k] {
                mids.push(mid);
                idx.push(k);
            }
        }
        if idx.is_empty() {
            break;
        }
        sturm_counts(d, e2, &mids, &mut counts[..idx.len()]);
        for (j, &k) in idx.iter().enumerate() {
            if counts[j] >= n - k {
                highs[k] = mids[j];
            } else {
                lows[k] = mids[j];
            }
        }
    }
    (0..count).map(|k| 0.5 * (lows[k] + highs[k])).collect()
}

/// All eigenvalues of a symmetric tridiagonal matrix (implicit QL), descending.
pub fn tridiagonal_eigenvalues(t: Tridiagonal) -> Result<Vec<f64>> {
    let Tridiagonal { mut d, e } = t;
    let n = d.len();
    let mut e: Vec<f64> = e;
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Sampling("tridiagonal QL did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| b.total_cmp(a));
    Ok(d)
}

/// Runs `body` over sample indices `0..n_samples` in fixed chunks and merges
/// chunk accumulators in index order.
pub fn par_samples<A, I, F, M>(n_samples: u64, init: I, body: F, merge: M) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, u64) -> Result<()> + Sync,
    M: Fn(&mut A, A),
{
    let chunks = n_samples.div_ceil(CHUNK);
    let parts: Vec<Result<A>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            let end = ((c + 1) * CHUNK).min(n_samples);
            for i in c * CHUNK..end {
                body(&mut acc, i)?;
            }
            Ok(acc)
        })
        .collect();
    let mut total = init();
    for p in parts {
        merge(&mut total, p?);
    }
    Ok(total)
}

/// Affine map `y = (lambda - shift) * scale` applied before binning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub label: String,
    pub shift: f64,
    pub scale: f64,
}

impl Transform {
    pub fn identity() -> Self {
        Self { label: "identity".into(), shift: 0.0, scale: 1.0 }
    }

    /// Edge scaling `sigma = (lambda - sqrt(2n)) sqrt(2) n^{1/6}`.
    pub fn edge(n: usize) -> Self {
        let nf = n as f64;
        Self { label: format!("edge(n={n})"), shift: (2.0 * nf).sqrt(), scale: 2f64.sqrt() * nf.powf(1.0 / 6.0) }
    }

    /// Mirror image at the lower edge: `sigma = -(lambda + sqrt(2n)) sqrt(2) n^{1/6}`.
    pub fn edge_bottom(n: usize) -> Self {
        let nf = n as f64;
        Self { label: format!("edge-bottom(n={n})"), shift: -(2.0 * nf).sqrt(), scale: -(2f64.sqrt() * nf.powf(1.0 / 6.0)) }
    }

    pub fn apply(&self, lambda: f64) -> f64 {
        (lambda - self.shift) * self.scale
    }

    pub fn invert(&self, y: f64) -> f64 {
        y / self.scale + self.shift
    }
}

/// `sigma` with `lambda = sqrt(2n) + sigma / (sqrt(2) n^{1/6})`.
pub fn edge_rescale(lambda: f64, n: usize) -> Result<f64> {
    crate::error::finite(lambda, "lambda")?;
    if n == 0 {
        return domain("n must be positive");
    }
    Ok(Transform::edge(n).apply(lambda))
}

pub fn edge_unscale(sigma: f64, n: usize) -> Result<f64> {
    crate::error::finite(sigma, "sigma")?;
    if n == 0 {
        return domain("n must be positive");
    }
    Ok(Transform::edge(n).invert(sigma))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Edge,
    Bulk,
}

/// Gaussian approximation `(mu_k, sigma_k)` for the `(k+1)`-th largest
/// eigenvalue of `GOE_n` with edge at `sqrt(2n)`.
pub fn gaussian_approx(n: usize, k: usize, branch: Branch) -> Result<(f64, f64)> {
    if n == 0 {
        return domain("n must be positive");
    }
    let nf = n as f64;
    let kf = k as f64;
    match branch {
        Branch::Edge => {
            if k == 0 {
                return domain("edge branch needs k >= 1 (log k)");
            }
            let pi = std::f64::consts::PI;
            let mu = (2.0 * nf).sqrt() * (1.0 - (3.0 * pi * kf / (4.0 * 2f64.sqrt() * nf)).powf(2.0 / 3.0));
            let var = 2.0 * kf.ln() / (nf.cbrt() * (12.0 * pi * kf).powf(2.0 / 3.0));
            Ok((mu, var.sqrt()))
        }
        Branch::Bulk => {
            if k == 0 || k >= n {
                return domain(format!("bulk branch needs 0 < k/n < 1, got k={k}, n={n}"));
            }
            let q = special::semicircle_quantile(kf / nf)?;
            let var = nf.ln() / (2.0 * nf * (1.0 - q * q));
            Ok((q * (2.0 * nf).sqrt(), var.sqrt()))
        }
    }
}

/// Uniform histogram grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl BinSpec {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return domain(format!("empty bin grid [{lo}, {hi}] x {bins}"));
        }
        Ok(Self { lo, hi, bins })
    }

    /// Default width `(hi - lo) / ceil(n_samples^{1/3})`.
    pub fn auto(lo: f64, hi: f64, n_samples: u64) -> Result<Self> {
        Self::new(lo, hi, (n_samples as f64).cbrt().ceil().max(1.0) as usize)
    }

    /// Bins of (at most) the given width.
    pub fn with_width(lo: f64, hi: f64, width: f64) -> Result<Self> {
        Self::new(lo, hi, ((hi - lo) / width).ceil().max(1.0) as usize)
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.bins).map(|i| self.lo + self.width() * i as f64).collect()
    }

    /// Bin index, or `Err(true)` above and `Err(false)` below the grid.
    pub fn locate(&self, y: f64) -> std::result::Result<usize, bool> {
        if y < self.lo {
            return Err(false);
        }
        let b = ((y - self.lo) / self.width()).floor();
        if b >= self.bins as f64 {
            if y <= self.hi {
                return Ok(self.bins - 1);
            }
            return Err(true);
        }
        Ok(b as usize)
    }
}

/// Binned Monte Carlo density of one or more eigenvalue statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDensity {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Per-bin sum over samples of the (importance-weighted) hit count.
    pub weight_sum: Vec<f64>,
    /// Per-bin sum over samples of the squared per-sample contribution.
    pub weight_sq_sum: Vec<f64>,
    pub underflow: f64,
    pub overflow: f64,
    pub n_samples: u64,
    /// Statistics tracked per sample (1 for one order statistic, n for the full spectrum).
    pub multiplicity: usize,
    pub transform: Transform,
    pub n: usize,
    pub k: Option<usize>,
    pub seed: u64,
    pub weighted: bool,
    /// Per-chunk `(n_samples, weight_sum)`, for batch-means errors when one
    /// sample lands in several bins.
    #[serde(skip)]
    pub batches: Vec<(u64, Vec<f64>)>,
}

impl EmpiricalDensity {
    fn empty(grid: &BinSpec, n: usize, k: Option<usize>, seed: u64, transform: Transform, multiplicity: usize, weighted: bool) -> Self {
        Self {
            bin_edges: grid.edges(),
            counts: vec![0; grid.bins],
            weight_sum: vec![0.0; grid.bins],
            weight_sq_sum: vec![0.0; grid.bins],
            underflow: 0.0,
            overflow: 0.0,
            n_samples: 0,
            multiplicity,
            transform,
            n,
            k,
            seed,
            weighted,
            batches: Vec::new(),
        }
    }

    fn merge(&mut self, other: &EmpiricalDensity) {
        for b in 0..self.counts.len() {
            self.counts[b] += other.counts[b];
            self.weight_sum[b] += other.weight_sum[b];
            self.weight_sq_sum[b] += other.weight_sq_sum[b];
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        self.n_samples += other.n_samples;
        if other.batches.is_empty() {
            self.batches.push((other.n_samples, other.weight_sum.clone()));
        } else {
            self.batches.extend(other.batches.iter().cloned());
        }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self, b: usize) -> f64 {
        self.bin_edges[b + 1] - self.bin_edges[b]
    }

    pub fn center(&self, b: usize) -> f64 {
        0.5 * (self.bin_edges[b] + self.bin_edges[b + 1])
    }

    pub fn density(&self, b: usize) -> f64 {
        self.weight_sum[b] / (self.n_samples as f64 * self.width(b))
    }

    pub fn stderr(&self, b: usize) -> f64 {
        let n = self.n_samples as f64;
        if n < 2.0 {
            return f64::INFINITY;
        }
        let mean = self.weight_sum[b] / n;
        let var = ((self.weight_sq_sum[b] / n - mean * mean) * n / (n - 1.0)).max(0.0);
        (var / n).sqrt() / self.width(b)
    }

    /// Total mass on the grid plus under/overflow, per sample.
    pub fn total_mass(&self) -> f64 {
        let n = self.n_samples as f64;
        (self.weight_sum.iter().sum::<f64>() + self.underflow + self.overflow) / n
    }

    pub fn grid_mass(&self) -> f64 {
        self.weight_sum.iter().sum::<f64>() / self.n_samples as f64
    }

    /// `∫ exp(log_g(y)) rho(y) dy` with the density piecewise constant on bins
    /// and `exp(log_g)` integrated exactly on each bin.
    ///
    /// Fails with a coverage error when poorly sampled bins or mass outside
    /// the grid carry a noticeable share of the integral.
    pub fn integrate_against<G: Fn(f64) -> f64>(&self, log_g: G) -> Result<LogEstimate> {
        let nb = self.bins();
        let n = self.n_samples as f64;
        let mut log_c = vec![f64::NEG_INFINITY; nb];
        for b in 0..nb {
            if self.weight_sum[b] > 0.0 {
                let lo = self.bin_edges[b];
                let hi = self.bin_edges[b + 1];
                log_c[b] = quad::log_integrate(&log_g, lo, hi, 1) - (hi - lo).ln();
            }
        }
        let shift = log_c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if shift == f64::NEG_INFINITY {
            return Err(Error::Coverage("no samples fell on the grid".into()));
        }
        let mut mean = 0.0;
        let mut second = 0.0;
        let mut sparse = 0.0;
        for b in 0..nb {
            if log_c[b] == f64::NEG_INFINITY {
                continue;
            }
            let c = (log_c[b] - shift).exp();
            let term = c * self.weight_sum[b] / n;
            mean += term;
            second += c * c * self.weight_sq_sum[b] / n;
            if self.counts[b] <= 5 {
                sparse += term;
            }
        }
        if !(mean > 0.0) {
            return Err(Error::Coverage("integrand vanishes on all occupied bins".into()));
        }
        if sparse > 0.1 * mean {
            return Err(Error::Coverage(format!(
                "{:.1}% of the integral comes from bins with at most 5 samples; integrand support is not covered",
                100.0 * sparse / mean
            )));
        }
        let lo = self.bin_edges[0];
        let hi = self.bin_edges[nb];
        for (mass, edge, inward) in [(self.underflow, lo, lo + 1e-3 * (hi - lo)), (self.overflow, hi, hi - 1e-3 * (hi - lo))] {
            if mass > 0.0 {
                let outside = mass / n * (log_g(edge) - shift).exp();
                if outside > 1e-6 * mean && log_g(edge) >= log_g(inward) {
                    return Err(Error::Coverage(format!("mass outside the grid near {edge} carries a share {:.2e} of the integral", outside / mean)));
                }
            }
        }
        let var = if self.multiplicity == 1 {
            (second - mean * mean).max(0.0) / (n - 1.0).max(1.0)
        } else {
            // bins are correlated within a sample; fall back to batch means
            let nb = self.batches.len() as f64;
            if nb < 2.0 {
                f64::INFINITY
            } else {
                let sq: f64 = self
                    .batches
                    .iter()
                    .map(|(m, ws)| {
                        let part: f64 = (0..ws.len()).filter(|&b| log_c[b].is_finite()).map(|b| (log_c[b] - shift).exp() * ws[b]).sum();
                        let m = *m as f64;
                        (part - m * mean).powi(2)
                    })
                    .sum();
                sq / (n * n) * nb / (nb - 1.0)
            }
        };
        Ok(LogEstimate { log_value: shift + mean.ln(), rel_stderr: var.sqrt() / mean })
    }

    /// Weighted mean of the binned variable (bin centers).
    pub fn mean(&self) -> f64 {
        let m: f64 = self.weight_sum.iter().sum();
        (0..self.bins()).map(|b| self.center(b) * self.weight_sum[b]).sum::<f64>() / m
    }

    /// Center of the bin with the largest density.
    pub fn mode(&self) -> f64 {
        let mut best = 0;
        for b in 0..self.bins() {
            if self.density(b) > self.density(best) {
                best = b;
            }
        }
        self.center(best)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("# n={} k={} n_samples={} seed={} transform={} shift={} scale={}\n",
            self.n,
            self.k.map(|k| k.to_string()).unwrap_or_else(|| "all".into()),
            self.n_samples,
            self.seed,
            self.transform.label,
            self.transform.shift,
            self.transform.scale));
        s.push_str("bin_left,bin_right,density,stderr\n");
        for b in 0..self.bins() {
            s.push_str(&format!("{},{},{},{}\n", self.bin_edges[b], self.bin_edges[b + 1], self.density(b), self.stderr(b)));
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let bins: Vec<_> = (0..self.bins())
            .map(|b| {
                serde_json::json!({
                    "left": self.bin_edges[b],
                    "right": self.bin_edges[b + 1],
                    "density": self.density(b),
                    "stderr": self.stderr(b),
                    "count": self.counts[b],
                })
            })
            .collect();
        serde_json::json!({
            "schema_version": 1,
            "n": self.n,
            "k": self.k,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "transform": self.transform,
            "multiplicity": self.multiplicity,
            "weighted": self.weighted,
            "underflow": self.underflow / self.n_samples as f64,
            "overflow": self.overflow / self.n_samples as f64,
            "bins": bins,
        })
    }
}

/// Defensive mixture of the GOE spectrum law and shifted copies of it.
///
/// A draw picks the base law with probability `base_prob`, otherwise the
/// ordered spectrum is translated by one of the shift vectors. Weights use
/// the exact joint eigenvalue density, so the normalizing constant cancels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTilt {
    pub base_prob: f64,
    pub components: Vec<(f64, Vec<f64>)>,
}

const FRACS: &[f64] = &[0.4, 0.55, 0.7, 0.85, 1.0, 1.15, 1.3];
const RELAX: usize = 1;

impl SpectrumTilt {
    pub fn new(base_prob: f64, components: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        let total: f64 = base_prob + components.iter().map(|c| c.0).sum::<f64>();
        if !(base_prob > 0.0) || (total - 1.0).abs() > 1e-12 || components.iter().any(|c| c.0 < 0.0) {
            return domain("mixture probabilities must be non-negative, with positive base weight, and sum to 1");
        }
        Ok(Self { base_prob, components })
    }

    /// Pushes whole edge blocks outward. Each target `(k, y, top)` shifts the
    /// top (or bottom) `k+1` eigenvalues so the `(k+1)`-th reaches about `y`;
    /// shifts from 0.4 to 1.3 of that amount enter the mixture, each once as is
    /// and once with the next eigenvalue moved up into the vacated place.
    pub fn edges(n: usize, variance_scale: f64, targets: &[(usize, f64, bool)]) -> Result<Self> {
        Self::edges_weighted(n, variance_scale, targets, &vec![1.0; targets.len()])
    }

    /// As [`SpectrumTilt::edges`], splitting the non-base mixture mass across
    /// targets in proportion to `shares`.
    pub fn edges_weighted(n: usize, variance_scale: f64, targets: &[(usize, f64, bool)], shares: &[f64]) -> Result<Self> {
        if shares.len() != targets.len() || shares.iter().any(|&w| !(w >= 0.0)) {
            return domain("need one non-negative share per tilt target");
        }
        let mut comps = Vec::new();
        for (&(k, y, top), &share) in targets.iter().zip(shares) {
            if k >= n {
                return domain(format!("tilt target index {k} out of range for n={n}"));
            }
            let mu = approx_order_mean(n, variance_scale, if top { k } else { n - 1 - k });
            let amount = if top { (y - mu).max(0.0) } else { (mu - y).max(0.0) };
            if amount == 0.0 || share == 0.0 {
                continue;
            }
            let mean_at = |j: usize| approx_order_mean(n, variance_scale, if top { j } else { n - 1 - j }).abs();
            for &frac in FRACS {
                for relax in [0, RELAX] {
                    // with the block gone, the next eigenvalues can move up into
                    // the places it vacated
                    let mut oriented = vec![frac * amount; k + 1];
                    for j in k + 1..(k + 1 + relax).min(n) {
                        oriented.push((mean_at(j - k - 1) - mean_at(j)).max(0.0).min(frac * amount));
                    }
                    let mut d = vec![0.0; n];
                    for (j, v) in oriented.into_iter().enumerate() {
                        if top {
                            d[j] = v;
                        } else {
                            d[n - 1 - j] = -v;
                        }
                    }
                    comps.push((share, d));
                }
            }
        }
        if comps.is_empty() {
            return Self::new(1.0, vec![]);
        }
        let base = 0.25;
        let total: f64 = comps.iter().map(|c| c.0).sum();
        Self::new(base, comps.into_iter().map(|(w, d)| ((1.0 - base) * w / total, d)).collect())
    }

    pub fn is_trivial(&self) -> bool {
        self.components.is_empty()
    }

    fn draw<R: Rng>(&self, base: &mut [f64], rng: &mut R) {
        let u: f64 = rng.random();
        let mut acc = self.base_prob;
        if u < acc {
            return;
        }
        for (p, d) in &self.components {
            acc += p;
            if u < acc {
                base.iter_mut().zip(d).for_each(|(x, s)| *x += s);
                return;
            }
        }
        let (_, d) = self.components.last().expect("non-trivial mixture");
        base.iter_mut().zip(d).for_each(|(x, s)| *x += s);
    }

    /// `p(lambda) / q(lambda)` for a drawn spectrum.
    pub fn weight(&self, lambda: &[f64], variance_scale: f64) -> f64 {
        if self.is_trivial() {
            return 1.0;
        }
        if !is_descending(lambda) {
            return 0.0;
        }
        let lp = log_joint_density(lambda, variance_scale);
        let mut terms = vec![self.base_prob.ln()];
        let mut shifted = vec![0.0; lambda.len()];
        for (p, d) in &self.components {
            for i in 0..lambda.len() {
                shifted[i] = lambda[i] - d[i];
            }
            if *p > 0.0 && is_descending(&shifted) {
                terms.push(p.ln() + log_joint_density(&shifted, variance_scale) - lp);
            }
        }
        (-quad::log_sum_exp(&terms)).exp()
    }

    /// Draw spectrum `index` from the mixture and return it with its weight.
    pub fn sample(&self, sampler: &GoeSampler, index: u64) -> Result<(Vec<f64>, f64)> {
        let mut rng = sampler.rng(index);
        let mut ev = sampler.spectrum_from(&mut rng)?;
        if self.is_trivial() {
            return Ok((ev, 1.0));
        }
        self.draw(&mut ev, &mut rng);
        let w = self.weight(&ev, sampler.variance_scale);
        Ok((ev, w))
    }
}

impl SpectrumTilt {
    /// Components as shift vectors on a leading window of one edge, oriented
    /// outward (bottom shifts negated and listed from the lowest eigenvalue),
    /// when every component moves only that edge and windows stay below 64.
    pub fn edge_windows(&self, n: usize) -> Option<(bool, Vec<(f64, Vec<f64>)>)> {
        let mut side = None;
        let mut out = Vec::new();
        for (p, d) in &self.components {
            if d.len() != n {
                return None;
            }
            let top = if d[0] != 0.0 {
                true
            } else if d[n - 1] != 0.0 {
                false
            } else {
                return None;
            };
            let oriented: Vec<f64> = if top { d.clone() } else { d.iter().rev().map(|x| -x).collect() };
            let b = oriented.iter().rposition(|&x| x != 0.0).map_or(0, |i| i + 1);
            if b > 64 || *side.get_or_insert(top) != top {
                return None;
            }
            out.push((*p, oriented[..b].to_vec()));
        }
        Some((side.unwrap_or(true), out))
    }

    /// Draw `index` with only the `count` outermost eigenvalues on one edge
    /// resolved; interactions with the rest of the spectrum enter the weight
    /// through the characteristic polynomial of the full tridiagonal model.
    fn sample_edge(&self, sampler: &GoeSampler, index: u64, count: usize, top: bool, windows: &[(f64, Vec<f64>)]) -> (Vec<f64>, f64) {
        let n = sampler.n;
        let mut rng = sampler.rng(index);
        let mut t = sampler.tridiagonal(&mut rng, n);
        if !top {
            t.d.iter_mut().for_each(|x| *x = -*x);
        }
        let e2: Vec<f64> = t.e.iter().map(|x| x * x).collect();
        let window = windows.iter().map(|w| w.1.len()).max().unwrap_or(0).min(n - 1);
        let big_k = (window + 1).max(count).min(n);
        let len = truncation_length(n, big_k);
        let lead = Tridiagonal { d: t.d[..len].to_vec(), e: t.e[..len - 1].to_vec() };
        let (lo, hi) = gershgorin(&lead);
        let lam = top_eigenvalues(&lead.d, &e2[..len - 1], big_k, lo, hi);

        let u: f64 = rng.random();
        let mut acc = self.base_prob;
        let mut drawn: &[f64] = &[];
        if u >= acc {
            drawn = &windows.last().expect("non-trivial").1;
            for (p, d) in windows {
                acc += p;
                if u < acc {
                    drawn = d;
                    break;
                }
            }
        }
        let x: Vec<f64> = (0..big_k).map(|i| lam[i] + drawn.get(i).copied().unwrap_or(0.0)).collect();
        let out: Vec<f64> = x[..count].iter().map(|&v| if top { v } else { -v }).collect();
        if self.is_trivial() {
            return (out, 1.0);
        }
        if x.windows(2).any(|p| !(p[0] > p[1])) {
            return (out, 0.0);
        }

        // sum over j >= window of ln|z - lambda_j|; z = lambda_i exactly uses p'
        let far = |z: f64, exact: Option<usize>| -> f64 {
            match exact {
                Some(i) => log_char_poly(&t.d, &e2, z).1 - (0..window).filter(|&j| j != i).map(|j| (z - lam[j]).abs().ln()).sum::<f64>(),
                None => log_char_poly(&t.d, &e2, z).0 - (0..window).map(|j| (z - lam[j]).abs().ln()).sum::<f64>(),
            }
        };
        let shift = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        let far_x: Vec<f64> = (0..window).map(|i| far(x[i], (shift(drawn, i) == 0.0).then_some(i))).collect();
        let four_v = 4.0 * sampler.variance_scale;
        let mut terms = vec![self.base_prob.ln()];
        let mut y = vec![0.0; window];
        let mut moved = vec![false; window];
        for (p, d) in windows {
            if *p <= 0.0 {
                continue;
            }
            for i in 0..window {
                y[i] = lam[i] + (shift(drawn, i) - shift(d, i));
                moved[i] = shift(d, i) != 0.0;
            }
            if y.windows(2).any(|q| !(q[0] > q[1])) || (window > 0 && !(y[window - 1] > x[window])) {
                continue;
            }
            let mut r = 0.0;
            for i in 0..window {
                if moved[i] {
                    r -= (y[i] * y[i] - x[i] * x[i]) / four_v;
                    r += far(y[i], (shift(drawn, i) == shift(d, i)).then_some(i)) - far_x[i];
                }
                for j in 0..i {
                    if moved[i] || moved[j] {
                        r += (y[j] - y[i]).abs().ln() - (x[j] - x[i]).abs().ln();
                    }
                }
            }
            terms.push(p.ln() + r);
        }
        (out, (-quad::log_sum_exp(&terms)).exp())
    }
}

/// `(ln|p(x)|, ln|p'(x)|)` for `p(x) = det(x - T)`, via the three-term
/// recurrence with running rescaling.
fn log_char_poly(d: &[f64], e2: &[f64], x: f64) -> (f64, f64) {
    let (mut p_prev, mut p) = (1.0, x - d[0]);
    let (mut q_prev, mut q) = (0.0, 1.0);
    let mut scale = 0.0;
    for i in 1..d.len() {
        let a = x - d[i];
        let p_next = a * p - e2[i - 1] * p_prev;
        let q_next = p + a * q - e2[i - 1] * q_prev;
        p_prev = p;
        q_prev = q;
        p = p_next;
        q = q_next;
        let m = p.abs().max(q.abs());
        if m > 1e100 || (m < 1e-100 && m > 0.0) {
            let f = 1.0 / m;
            p *= f;
            q *= f;
            p_prev *= f;
            q_prev *= f;
            scale -= f.ln();
        }
    }
    (p.abs().ln() + scale, q.abs().ln() + scale)
}

fn is_descending(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] > w[1])
}

/// Unnormalized log joint density of an ordered GOE spectrum.
pub fn log_joint_density(lambda: &[f64], variance_scale: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..lambda.len() {
        s -= lambda[i] * lambda[i] / (4.0 * variance_scale);
        for j in (i + 1)..lambda.len() {
            s += (lambda[i] - lambda[j]).abs().ln();
        }
    }
    s
}

/// Semicircle estimate of the mean of the `(k+1)`-th largest eigenvalue.
pub fn approx_order_mean(n: usize, variance_scale: f64, k: usize) -> f64 {
    let x = ((k as f64 + 0.5) / n as f64).clamp(0.0, 1.0);
    let q = special::semicircle_quantile(x).unwrap_or(0.0);
    q * (2.0 * n as f64).sqrt() * (2.0 * variance_scale).sqrt()
}

/// Which statistics a sampling pass should bin.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityRequest {
    pub ks: Vec<usize>,
    pub full: bool,
    pub grid: BinSpec,
    pub transform: Transform,
    pub n_samples: u64,
    pub tilt: Option<SpectrumTilt>,
}

/// Densities of several order statistics (and optionally the whole spectrum)
/// built from the same draws.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySet {
    pub by_k: Vec<EmpiricalDensity>,
    pub full: Option<EmpiricalDensity>,
}

impl DensitySet {
    pub fn get(&self, k: usize) -> Option<&EmpiricalDensity> {
        self.by_k.iter().find(|d| d.k == Some(k))
    }
}

/// One sampling pass binning every requested statistic.
pub fn sample_densities(sampler: &GoeSampler, req: &DensityRequest) -> Result<DensitySet> {
    if req.n_samples == 0 {
        return domain("n_samples must be positive");
    }
    for &k in &req.ks {
        if k >= sampler.n {
            return domain(format!("order index {k} out of range for n={}", sampler.n));
        }
    }
    let weighted = req.tilt.as_ref().is_some_and(|t| !t.is_trivial());
    // edge-block tilts on large tridiagonal draws resolve only the outer eigenvalues
    let edge_tilt = match &req.tilt {
        Some(t) if weighted && !req.full && sampler.n > 64 && sampler.method == Method::Tridiagonal => t.edge_windows(sampler.n).filter(|(top, _)| {
            req.ks.iter().all(|&k| if *top { k < 32 } else { sampler.n - 1 - k < 32 })
        }),
        _ => None,
    };
    // order statistics within 32 of either edge come from a truncated block
    let n = sampler.n;
    let top_count = req.ks.iter().filter(|&&k| k < 32).map(|&k| k + 1).max().unwrap_or(0);
    let bottom_count = req.ks.iter().filter(|&&k| k >= 32 && n - 1 - k < 32).map(|&k| n - k).max().unwrap_or(0);
    let edge_only = req.ks.iter().all(|&k| k < 32 || n - 1 - k < 32);
    let top_only = !req.full && !weighted && n > 64 && edge_only && sampler.method == Method::Tridiagonal;
    let grid = req.grid;
    let init = || {
        let by_k: Vec<EmpiricalDensity> = req
            .ks
            .iter()
            .map(|&k| EmpiricalDensity::empty(&grid, sampler.n, Some(k), sampler.seed, req.transform.clone(), 1, weighted))
            .collect();
        let full = req
            .full
            .then(|| EmpiricalDensity::empty(&grid, sampler.n, None, sampler.seed, req.transform.clone(), sampler.n, weighted));
        DensitySet { by_k, full }
    };
    // Whole-spectrum histograms need only eigenvalue counts at the bin edges.
    let counts_only = req.ks.is_empty() && req.full && !weighted && sampler.method == Method::Tridiagonal;
    let lambda_edges: Vec<f64> = grid.edges().iter().map(|&y| req.transform.invert(y)).collect();
    let body = |acc: &mut DensitySet, i: u64| -> Result<()> {
        if counts_only {
            let d = acc.full.as_mut().expect("requested");
            let t = sampler.tridiagonal(&mut sampler.rng(i), sampler.n);
            let e2: Vec<f64> = t.e.iter().map(|x| x * x).collect();
            let mut below = vec![0usize; lambda_edges.len()];
            sturm_counts(&t.d, &e2, &lambda_edges, &mut below);
            d.n_samples += 1;
            d.underflow += below[0] as f64;
            d.overflow += (sampler.n - below[grid.bins]) as f64;
            for b in 0..grid.bins {
                let c = (below[b + 1] - below[b]) as u64;
                if c > 0 {
                    d.counts[b] += c;
                    d.weight_sum[b] += c as f64;
                    d.weight_sq_sum[b] += (c * c) as f64;
                }
            }
            return Ok(());
        }
        let (ev, w) = if let (Some((top, blocks)), Some(t)) = (&edge_tilt, &req.tilt) {
            let count = req.ks.iter().map(|&k| if *top { k + 1 } else { n - k }).max().unwrap_or(0);
            let (vals, w) = t.sample_edge(sampler, i, count, *top, blocks);
            let mut ev = vec![f64::NAN; n];
            for (j, x) in vals.into_iter().enumerate() {
                ev[if *top { j } else { n - 1 - j }] = x;
            }
            (ev, w)
        } else if top_only {
            let (up, down) = sampler.sample_edges(i, top_count, bottom_count);
            let mut ev = vec![f64::NAN; n];
            ev[..up.len()].copy_from_slice(&up);
            for (j, x) in down.into_iter().enumerate() {
                ev[n - 1 - j] = x;
            }
            (ev, 1.0)
        } else if let Some(t) = &req.tilt {
            t.sample(sampler, i)?
        } else {
            (sampler.sample_spectrum(i)?, 1.0)
        };
        for d in acc.by_k.iter_mut() {
            let k = d.k.expect("order statistic");
            d.n_samples += 1;
            let y = req.transform.apply(ev[k]);
            match grid.locate(y) {
                Ok(b) => {
                    d.counts[b] += 1;
                    d.weight_sum[b] += w;
                    d.weight_sq_sum[b] += w * w;
                }
                Err(true) => d.overflow += w,
                Err(false) => d.underflow += w,
            }
        }
        if let Some(d) = acc.full.as_mut() {
            d.n_samples += 1;
            let mut run: Option<(usize, u64)> = None;
            let flush = |d: &mut EmpiricalDensity, r: Option<(usize, u64)>| {
                if let Some((b, c)) = r {
                    let x = c as f64 * w;
                    d.counts[b] += c;
                    d.weight_sum[b] += x;
                    d.weight_sq_sum[b] += x * x;
                }
            };
            for &lam in &ev {
                match grid.locate(req.transform.apply(lam)) {
                    Ok(b) => match run {
                        Some((rb, c)) if rb == b => run = Some((rb, c + 1)),
                        other => {
                            flush(d, other);
                            run = Some((b, 1));
                        }
                    },
                    Err(true) => d.overflow += w,
                    Err(false) => d.underflow += w,
                }
            }
            flush(d, run);
        }
        Ok(())
    };
    let merge = |a: &mut DensitySet, b: DensitySet| {
        for (x, y) in a.by_k.iter_mut().zip(&b.by_k) {
            x.merge(y);
        }
        if let (Some(x), Some(y)) = (a.full.as_mut(), b.full.as_ref()) {
            x.merge(y);
        }
    };
    par_samples(req.n_samples, init, body, merge)
}

/// Binned density of the `(k+1)`-th largest eigenvalue.
pub fn order_statistic_density(sampler: &GoeSampler, k: usize, grid: &BinSpec, n_samples: u64) -> Result<EmpiricalDensity> {
    order_statistic_density_with(sampler, k, grid, n_samples, Transform::identity())
}

pub fn order_statistic_density_with(sampler: &GoeSampler, k: usize, grid: &BinSpec, n_samples: u64, transform: Transform) -> Result<EmpiricalDensity> {
    let req = DensityRequest { ks: vec![k], full: false, grid: *grid, transform, n_samples, tilt: None };
    Ok(sample_densities(sampler, &req)?.by_k.remove(0))
}

/// Binned mean density of all eigenvalues (integrates to n).
pub fn spectral_density(sampler: &GoeSampler, grid: &BinSpec, n_samples: u64, transform: Transform) -> Result<EmpiricalDensity> {
    let req = DensityRequest { ks: vec![], full: true, grid: *grid, transform, n_samples, tilt: None };
    Ok(sample_densities(sampler, &req)?.full.expect("requested"))
}

/// Sample mean and variance of the `(k+1)`-th largest eigenvalue, with the
/// standard errors of both.
pub fn order_statistic_moments(sampler: &GoeSampler, k: usize, n_samples: u64) -> Result<(Estimate, Estimate)> {
    if k >= sampler.n {
        return domain(format!("order index {k} out of range for n={}", sampler.n));
    }
    let use_top = sampler.method == Method::Tridiagonal && k < 32;
    let vals = par_samples(
        n_samples,
        Vec::new,
        |acc: &mut Vec<f64>, i| {
            let v = if use_top {
                sampler.sample_top(i, k + 1)[k]
            } else if sampler.method == Method::Tridiagonal {
                sampler.sample_kth(i, k)?
            } else {
                sampler.sample_spectrum(i)?[k]
            };
            acc.push(v);
            Ok(())
        },
        |a, b| a.extend(b),
    )?;
    Ok(moments(&vals))
}

/// Mean and variance estimates (with standard errors) of a sample.
pub fn moments(v: &[f64]) -> (Estimate, Estimate) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let m2 = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = v.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let var = m2 * n / (n - 1.0);
    let var_se = ((m4 - m2 * m2) / n).max(0.0).sqrt();
    (Estimate::new(mean, (var / n).sqrt()), Estimate::new(var, var_se))
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic two-sample KS critical value at level `alpha`.
pub fn ks_critical(n1: usize, n2: usize, alpha: f64) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    c * ((n1 + n2) as f64 / (n1 as f64 * n2 as f64)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_tilt_matches_full_spectrum_weights() {
        let n = 100;
        let s = GoeSampler::standard(n, 7).unwrap();
        let tr = Transform::edge(n);
        for top in [true, false] {
            let sign = if top { 1.0 } else { -1.0 };
            let targets = [(0, sign * tr.invert(2.5), top), (1, sign * tr.invert(1.5), top)];
            let tilt = SpectrumTilt::edges(n, 0.5, &targets).unwrap();
            let (side, blocks) = tilt.edge_windows(n).unwrap();
            assert_eq!(side, top);
            for i in 0..1000 {
                let (ev, w) = tilt.sample(&s, i).unwrap();
                let (vals, w2) = tilt.sample_edge(&s, i, 2, top, &blocks);
                for j in 0..2 {
                    let full = if top { ev[j] } else { ev[n - 1 - j] };
                    assert!((vals[j] - full).abs() < 1e-8, "draw {i} value {j}: {} vs {full}", vals[j]);
                }
                assert!((w2 / w - 1.0).abs() < 1e-6, "draw {i}: {w2} vs {w}");
            }
        }
    }

    #[test]
    fn ql_matches_dense_solver() {
        let s = GoeSampler::new(30, 0.5, Method::Tridiagonal, 7).unwrap();
        let mut rng = s.rng(3);
        let t = s.tridiagonal(&mut rng, 30);
        let mut m = DMatrix::<f64>::zeros(30, 30);
        for i in 0..30 {
            m[(i, i)] = t.d[i];
            if i + 1 < 30 {
                m[(i, i + 1)] = t.e[i];
                m[(i + 1, i)] = t.e[i];
            }
        }
        let mut dense: Vec<f64> = nalgebra::SymmetricEigen::new(m).eigenvalues.iter().cloned().collect();
        dense.sort_by(|a, b| b.total_cmp(a));
        let ql = tridiagonal_eigenvalues(t.clone()).unwrap();
        let e2: Vec<f64> = t.e.iter().map(|x| x * x).collect();
        let (lo, hi) = gershgorin(&t);
        for k in 0..30 {
            assert!((ql[k] - dense[k]).abs() < 1e-11);
            assert!((kth_largest(&t.d, &e2, k, lo, hi) - dense[k]).abs() < 1e-11);
        }
    }

    #[test]
    fn truncation_keeps_top_of_spectrum() {
        for (n, count) in [(600, 13), (2000, 4), (2000, 13)] {
            let s = GoeSampler::new(n, 0.5, Method::Tridiagonal, 11).unwrap();
            for i in 0..3 {
                let top = s.sample_top(i, count);
                let full = tridiagonal_eigenvalues(s.tridiagonal(&mut s.rng(i), n)).unwrap();
                for k in 0..count {
                    assert!((top[k] - full[k]).abs() < 1e-9, "n {n} sample {i} k {k}");
                }
            }
        }
    }
}
