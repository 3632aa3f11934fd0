use saddlestat::goe::*;
use saddlestat::special;
use saddlestat::Estimate;
use statrs::distribution::{ContinuousCDF, Normal};

fn bonferroni(m: usize) -> f64 {
    let alpha = 0.0027 / (2.0 * m as f64);
    Normal::standard().inverse_cdf(1.0 - alpha)
}

fn z_bins(a: &EmpiricalDensity, b: &EmpiricalDensity, pairs: &[(usize, usize)]) -> Vec<f64> {
    pairs
        .iter()
        .map(|&(i, j)| {
            let x = Estimate::new(a.density(i), a.stderr(i));
            let y = Estimate::new(b.density(j), b.stderr(j));
            x.z_against(&y)
        })
        .collect()
}

#[test]
fn single_entry_has_variance_two_v() {
    let v = 0.7;
    let s = GoeSampler::new(1, v, Method::Dense, 1).unwrap();
    let draws: Vec<f64> = (0..100_000).map(|i| s.sample_spectrum(i).unwrap()[0]).collect();
    let (mean, var) = moments(&draws);
    assert!(mean.z_against(&Estimate::exact(0.0)).abs() < 3.0);
    assert!(var.z_against(&Estimate::exact(2.0 * v)).abs() < 3.0, "{var:?}");
}

#[test]
fn two_by_two_mean_spacing() {
    // the gap is 2 sqrt(v) times a chi variable with two degrees of freedom
    let v = 0.5;
    let s = GoeSampler::new(2, v, Method::Dense, 2).unwrap();
    let gaps: Vec<f64> = (0..100_000)
        .map(|i| {
            let ev = s.sample_spectrum(i).unwrap();
            ev[0] - ev[1]
        })
        .collect();
    let (mean, _) = moments(&gaps);
    let exact = (2.0 * std::f64::consts::PI * v).sqrt();
    assert!(mean.z_against(&Estimate::exact(exact)).abs() < 3.0, "{mean:?} vs {exact}");
}

#[test]
fn dense_and_tridiagonal_agree_in_distribution() {
    let dense = GoeSampler::new(32, 0.5, Method::Dense, 3).unwrap();
    let tri = GoeSampler::new(32, 0.5, Method::Tridiagonal, 4).unwrap();
    let a: Vec<f64> = (0..10_000).map(|i| dense.sample_spectrum(i).unwrap()[0]).collect();
    let b: Vec<f64> = (0..10_000).map(|i| tri.sample_spectrum(i).unwrap()[0]).collect();
    let d = ks_distance(&a, &b);
    assert!(d < ks_critical(a.len(), b.len(), 0.01), "ks distance {d}");
}

#[test]
fn spectra_are_descending_and_deterministic() {
    let s = GoeSampler::standard(20, 9).unwrap();
    let a = s.sample_spectrum(17).unwrap();
    assert!(a.windows(2).all(|w| w[0] >= w[1]));
    assert_eq!(a, s.sample_spectrum(17).unwrap());
    assert_ne!(a, s.sample_spectrum(18).unwrap());
}

#[test]
fn smallest_is_mirror_of_largest() {
    let n = 8;
    let s = GoeSampler::standard(n, 5).unwrap();
    let grid = BinSpec::new(-6.0, 6.0, 48).unwrap();
    let top = order_statistic_density(&s, 0, &grid, 40_000).unwrap();
    let bottom = order_statistic_density(&s, n - 1, &grid, 40_000).unwrap();
    let pairs: Vec<(usize, usize)> = (0..48).filter(|&b| top.counts[b] > 20).map(|b| (b, 47 - b)).collect();
    let z = z_bins(&top, &bottom, &pairs);
    let lim = bonferroni(pairs.len());
    assert!(z.iter().all(|x| x.abs() < lim), "{z:?}");
}

#[test]
fn order_statistics_partition_the_spectrum() {
    let n = 6;
    let s = GoeSampler::standard(n, 6).unwrap();
    let grid = BinSpec::new(-5.0, 5.0, 40).unwrap();
    let req = DensityRequest { ks: (0..n).collect(), full: true, grid, transform: Transform::identity(), n_samples: 5000, tilt: None };
    let set = sample_densities(&s, &req).unwrap();
    let full = set.full.unwrap();
    for b in 0..grid.bins {
        let sum: f64 = set.by_k.iter().map(|d| d.density(b)).sum();
        assert!((sum - full.density(b)).abs() <= 1e-12 * (1.0 + sum), "bin {b}");
    }
    assert!((full.total_mass() - n as f64).abs() < 1e-9);
    for d in &set.by_k {
        assert!((d.total_mass() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn full_density_is_symmetric() {
    let n = 10;
    let s = GoeSampler::standard(n, 8).unwrap();
    let grid = BinSpec::new(-6.0, 6.0, 40).unwrap();
    let full = spectral_density(&s, &grid, 20_000, Transform::identity()).unwrap();
    let pairs: Vec<(usize, usize)> = (0..20).map(|b| (b, 39 - b)).filter(|&(b, _)| full.counts[b] > 20).collect();
    let z = z_bins(&full, &full, &pairs);
    let lim = bonferroni(pairs.len());
    assert!(z.iter().all(|x| x.abs() < lim), "{z:?}");
}

fn smoothed_mode(d: &EmpiricalDensity) -> f64 {
    // least-squares parabola through the bins within 0.6 of the 5-bin moving-average peak
    let nb = d.bins();
    let avg: Vec<f64> = (0..nb).map(|b| (b.saturating_sub(2)..(b + 3).min(nb)).map(|j| d.density(j)).sum::<f64>()).collect();
    let peak = d.center((0..nb).max_by(|&i, &j| avg[i].total_cmp(&avg[j])).unwrap());
    let pts: Vec<(f64, f64)> = (0..nb).filter(|&b| (d.center(b) - peak).abs() <= 0.6).map(|b| (d.center(b) - peak, d.density(b))).collect();
    let m = nalgebra::DMatrix::from_fn(pts.len(), 3, |i, j| pts[i].0.powi(j as i32));
    let y = nalgebra::DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
    let c = m.svd(true, true).solve(&y, 1e-12).unwrap();
    peak - c[1] / (2.0 * c[2])
}

#[test]
fn edge_mode_is_reproducible_across_seeds() {
    let grid = BinSpec::new(-5.0, 2.0, 70).unwrap();
    let modes: Vec<f64> = [21, 22]
        .iter()
        .map(|&seed| {
            let s = GoeSampler::standard(2000, seed).unwrap();
            let d = order_statistic_density_with(&s, 0, &grid, 100_000, Transform::edge(2000)).unwrap();
            smoothed_mode(&d)
        })
        .collect();
    assert!((modes[0] - modes[1]).abs() < 0.1, "{modes:?}");
}

#[test]
fn edge_rescale_examples() {
    let n = 1000;
    let edge = (2.0 * n as f64).sqrt();
    assert_eq!(edge_rescale(edge, n).unwrap(), 0.0);
    let lam = edge - 2.0 / (2f64.sqrt() * 1000f64.powf(1.0 / 6.0));
    assert!((edge_unscale(-2.0, n).unwrap() - lam).abs() < 1e-12);
    assert!((edge_rescale(lam, n).unwrap() + 2.0).abs() < 1e-12);
    for x in [-3.3, 0.1, 44.0] {
        assert!((edge_unscale(edge_rescale(x, n).unwrap(), n).unwrap() - x).abs() < 1e-12);
    }
    assert!(edge_rescale(f64::NAN, n).is_err());
    assert!(edge_rescale(1.0, 0).is_err());
}

#[test]
fn gaussian_approx_examples() {
    let (mu, _) = gaussian_approx(1000, 500, Branch::Bulk).unwrap();
    assert!(mu.abs() < 1e-12);
    let (mu, sigma) = gaussian_approx(1000, 1, Branch::Edge).unwrap();
    let expect = 2000f64.sqrt() * (1.0 - (3.0 * std::f64::consts::PI / (4.0 * 2f64.sqrt() * 1000.0)).powf(2.0 / 3.0));
    assert!((mu - expect).abs() < 1e-12);
    assert!((mu - 44.092_849_215_183_72).abs() < 1e-11, "{mu}");
    assert_eq!(sigma, 0.0);
    let (mu, sigma) = gaussian_approx(1000, 250, Branch::Bulk).unwrap();
    let q = special::semicircle_quantile(0.25).unwrap();
    assert!((mu - q * 2000f64.sqrt()).abs() < 1e-12);
    assert!((sigma * sigma - 1000f64.ln() / (2000.0 * (1.0 - q * q))).abs() < 1e-15);
    assert!(gaussian_approx(100, 0, Branch::Edge).is_err());
    assert!(gaussian_approx(100, 0, Branch::Bulk).is_err());
    assert!(gaussian_approx(100, 100, Branch::Bulk).is_err());
}

#[test]
fn bulk_order_statistic_sits_near_its_semicircle_position() {
    // mean of the (k+1)-th largest tracks the quantile at (k + 1/2)/n
    let n = 400;
    let s = GoeSampler::standard(n, 31).unwrap();
    let (mean, _) = order_statistic_moments(&s, 100, 2000).unwrap();
    let target = approx_order_mean(n, 0.5, 100);
    assert!((mean.value - target).abs() < 0.02, "{mean:?} vs {target}");
}

#[test]
fn density_is_independent_of_thread_count() {
    let s = GoeSampler::standard(300, 12).unwrap();
    let grid = BinSpec::new(-6.0, 3.0, 30).unwrap();
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| order_statistic_density_with(&s, 1, &grid, 5000, Transform::edge(300)).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn bulk_matches_semicircle() {
    let n = 2000;
    let s = GoeSampler::standard(n, 13).unwrap();
    let scale = (2.0 * n as f64).sqrt();
    let t = Transform { label: "bulk".into(), shift: 0.0, scale: 1.0 / scale };
    let grid = BinSpec::new(-0.9, 0.9, 36).unwrap();
    let d = spectral_density(&s, &grid, 100, t).unwrap();
    let lim = bonferroni(grid.bins);
    for b in 0..grid.bins {
        let (lo, hi) = (d.bin_edges[b], d.bin_edges[b + 1]);
        let exact = n as f64 * (special::semicircle_cdf(lo).unwrap() - special::semicircle_cdf(hi).unwrap()) / (hi - lo);
        let z = (d.density(b) - exact) / d.stderr(b);
        assert!(z.abs() < lim, "bin {b}: {} vs {exact}, z {z}", d.density(b));
    }
}

#[test]
fn top_block_matches_edge_density() {
    let n = 2000;
    let top = 12;
    let s = GoeSampler::standard(n, 14).unwrap();
    let t = Transform::edge(n);
    let grid = BinSpec::new(-6.0, 3.0, 36).unwrap();
    let samples = 20_000u64;
    let (sum, sq) = par_samples(
        samples,
        || (vec![0.0; grid.bins], vec![0.0; grid.bins]),
        |acc: &mut (Vec<f64>, Vec<f64>), i| {
            let mut c = vec![0.0; grid.bins];
            for lam in s.sample_top(i, top) {
                if let Ok(b) = grid.locate(t.apply(lam)) {
                    c[b] += 1.0;
                }
            }
            for b in 0..grid.bins {
                acc.0[b] += c[b];
                acc.1[b] += c[b] * c[b];
            }
            Ok(())
        },
        |a, b| {
            for i in 0..a.0.len() {
                a.0[i] += b.0[i];
                a.1[i] += b.1[i];
            }
        },
    )
    .unwrap();
    let lim = bonferroni(grid.bins);
    let w = grid.width();
    let m = samples as f64;
    for b in 0..grid.bins {
        let lo = grid.lo + w * b as f64;
        let exact = saddlestat::quad::adaptive(|x| special::rho_edge(x).unwrap(), lo, lo + w, 1e-12, 1e-10).unwrap() / w;
        let mean = sum[b] / m;
        let se = ((sq[b] / m - mean * mean) / (m - 1.0)).sqrt();
        let z = (mean / w - exact) / (se / w);
        assert!(z.abs() < lim, "bin at {lo}: {} vs {exact}, z {z}", mean / w);
    }
}

#[test]
fn tilted_sampling_is_unbiased() {
    let n = 6;
    let s = GoeSampler::standard(n, 15).unwrap();
    let grid = BinSpec::new(0.0, 7.0, 28).unwrap();
    let tilt = SpectrumTilt::edges(n, 0.5, &[(0, 5.0, true)]).unwrap();
    assert!(!tilt.is_trivial());
    let req = DensityRequest { ks: vec![0], full: false, grid, transform: Transform::identity(), n_samples: 40_000, tilt: Some(tilt) };
    let weighted = sample_densities(&s, &req).unwrap().by_k.remove(0);
    assert!(weighted.weighted);
    let plain = order_statistic_density(&s, 0, &grid, 40_000).unwrap();
    let mass = Estimate::new(weighted.total_mass(), 0.0);
    assert!((mass.value - 1.0).abs() < 0.05, "{mass:?}");
    let pairs: Vec<(usize, usize)> = (0..28).filter(|&b| plain.counts[b] > 50 && weighted.counts[b] > 50).map(|b| (b, b)).collect();
    let z = z_bins(&weighted, &plain, &pairs);
    let lim = bonferroni(pairs.len());
    assert!(z.iter().all(|x| x.abs() < lim), "{z:?}");
    // the tilt reaches far further into the tail than plain sampling
    let last = |d: &EmpiricalDensity| (0..28).rev().find(|&b| d.counts[b] > 0).unwrap();
    assert!(last(&weighted) > last(&plain));
}

#[test]
fn bad_requests_are_rejected() {
    let s = GoeSampler::standard(5, 0).unwrap();
    let grid = BinSpec::new(-1.0, 1.0, 4).unwrap();
    assert!(order_statistic_density(&s, 5, &grid, 10).is_err());
    assert!(BinSpec::new(1.0, 1.0, 4).is_err());
    assert!(BinSpec::new(0.0, 1.0, 0).is_err());
    assert!(GoeSampler::new(0, 0.5, Method::Dense, 0).is_err());
    assert!(GoeSampler::new(3, -1.0, Method::Dense, 0).is_err());
}

#[test]
fn serializations_carry_metadata() {
    let s = GoeSampler::standard(30, 3).unwrap();
    let grid = BinSpec::auto(-9.0, 9.0, 1000).unwrap();
    assert_eq!(grid.bins, 10);
    let d = order_statistic_density(&s, 0, &grid, 1000).unwrap();
    let csv = d.to_csv();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# n=30 k=0 n_samples=1000 seed=3"));
    assert_eq!(lines.next().unwrap(), "bin_left,bin_right,density,stderr");
    assert_eq!(lines.count(), 10);
    let j = d.to_json();
    assert_eq!(j["n"], 30);
    assert_eq!(j["bins"].as_array().unwrap().len(), 10);
    assert_eq!(j["seed"], 3);
}
