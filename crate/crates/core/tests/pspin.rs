use proptest::prelude::*;
use saddlestat::landscape::{self, DensitySource};
use saddlestat::pspin::*;
use saddlestat::{quad, Error};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn b_param_values() {
    assert_eq!(b_param(1.0, 0.0, 2).unwrap(), 0.0);
    assert!(close(b_param(1.0, 0.0, 3).unwrap(), 1.0 / 3.0, 1e-15));
    assert!(close(b_param(1.0, 1e8, 3).unwrap(), -1.0, 1e-12));
    assert_eq!(b_param(1.0, f64::INFINITY, 4).unwrap(), -1.0);
    assert!(matches!(b_param(0.0, 1.0, 3), Err(Error::Domain(_))));
    assert!(matches!(b_param(1.0, 1.0, 1), Err(Error::Domain(_))));
    assert!(b_param(1.0, -0.5, 3).is_err());
    let p = PSpinParams::new(2.0, 1.0, 4, 10).unwrap();
    assert!(close(p.b, (4.0 * 2.0 - 1.0) / (4.0 * 4.0 + 1.0), 1e-15));
}

#[test]
fn region_a_closed_form() {
    let n = 9;
    let p: Vec<f64> = (0..=n).map(|k| pk_region_a(k, n).unwrap()).collect();
    assert_eq!(p[0], 0.5);
    assert_eq!(p[n], 0.5);
    assert_eq!(p.iter().sum::<f64>(), 1.0);
    for k in 0..=n {
        assert_eq!(p[k], p[n - k]);
    }
    assert!(pk_region_a(n + 1, n).is_err());
    assert_eq!(neq_region_a(), 2.0);
}

#[test]
fn region_a_exact_count_near_two() {
    let (b, n) = (-0.5, 20);
    let cs = pspin_sample(b, n, &[], true, 40_000, 5).unwrap();
    let v = mean_neq_pspin(b, n, DensitySource::Empirical(cs.set.full.as_ref().unwrap())).unwrap();
    assert!(close(v.value(), 2.0, 0.2), "{}", v.value());
}

#[test]
fn exact_counts_index_symmetric() {
    let (b, n) = (0.2, 10);
    for k in [0, 2, 4] {
        let cs = pspin_sample(b, n, &[k, n - k], false, 40_000, 7 + k as u64).unwrap();
        let lo = mean_nk_pspin(b, n, k, DensitySource::Empirical(cs.set.get(k).unwrap())).unwrap().estimate();
        let hi = mean_nk_pspin(b, n, n - k, DensitySource::Empirical(cs.set.get(n - k).unwrap())).unwrap().estimate();
        assert!(lo.z_against(&hi).abs() < 3.0, "k={k}: {lo:?} vs {hi:?}");
    }
}

#[test]
fn zero_b_counts_all_eigenvalues() {
    let n = 200;
    let cs = pspin_sample(0.0, n, &[], true, 2000, 1).unwrap();
    let v = mean_neq_pspin(0.0, n, DensitySource::Empirical(cs.set.full.as_ref().unwrap())).unwrap();
    assert!(close(v.value() / (2.0 * n as f64), 1.0, 0.15), "{}", v.value());
    assert!(close(neq_region_c(0.0, n).unwrap(), 2.0 * n as f64, 1e-9));
}

#[test]
fn region_b_count_formula() {
    for beta in [0.5, 1.0, 3.0] {
        assert!(close(neq_region_b(beta).unwrap(), 2.0 * landscape::neq_hierarchy(beta).unwrap(), 1e-12));
    }
    assert!(neq_region_b(-0.5).is_err());
}

#[test]
fn region_b_index_symmetry() {
    let (beta, n) = (0.8, 300);
    let (top, bottom) = dual_edge_densities_tilted(beta, n + 1, 3, 0.05, 20_000, 13).unwrap();
    let d = region_b_distribution(beta, n, &top, &bottom).unwrap();
    assert_eq!(d.support, vec![0.0, 1.0, 2.0, (n - 2) as f64, (n - 1) as f64, n as f64]);
    for j in 0..3 {
        let (a, b) = (d.prob[j], d.prob[5 - j]);
        let se = (d.stderr[j].powi(2) + d.stderr[5 - j].powi(2)).sqrt();
        assert!((a - b).abs() < 3.0 * se, "k={j}: {a} vs {b} (se {se})");
    }
    assert!(d.prob[0] > d.prob[1] && d.prob[1] > d.prob[2]);
    assert!(d.metadata.iter().any(|(k, v)| k == "model" && v == "pspin"));
}

#[test]
fn region_b_untilted_agrees() {
    let (beta, n) = (0.8, 200);
    let grid = saddlestat::goe::BinSpec::with_width(-14.0, 6.0, 0.05).unwrap();
    let (top, bottom) = dual_edge_densities(n + 1, 2, grid, 40_000, 3).unwrap();
    let plain = region_b_distribution(beta, n, &top, &bottom).unwrap();
    let (top, bottom) = dual_edge_densities_tilted(beta, n + 1, 2, 0.05, 40_000, 4).unwrap();
    let tilted = region_b_distribution(beta, n, &top, &bottom).unwrap();
    for i in 0..4 {
        let se = (plain.stderr[i].powi(2) + tilted.stderr[i].powi(2)).sqrt();
        assert!((plain.prob[i] - tilted.prob[i]).abs() < 3.5 * se, "{i}: {} vs {}", plain.prob[i], tilted.prob[i]);
    }
}

#[test]
fn region_c_symmetry_and_normalization() {
    for beta in [6.0, -4.0, 0.7] {
        for x in [0.1, 0.3] {
            let a = density_region_c(beta, x).unwrap();
            let b = density_region_c(beta, 1.0 - x).unwrap();
            assert!(close(a, b, 1e-12 * a.max(1.0)), "beta={beta} x={x}: {a} {b}");
        }
        // x = u^2 (3 - 2u) clusters nodes at both ends, where Q_x moves fastest
        let mass = quad::integrate_panels(|u: f64| density_region_c(beta, u * u * (3.0 - 2.0 * u)).unwrap() * 6.0 * u * (1.0 - u), 0.0, 1.0, 200);
        assert!(close(mass, 1.0, 1e-8), "beta={beta}: {mass}");
    }
    for x in [0.0, 0.1, 0.25, 0.5, 0.77, 1.0] {
        assert!(close(density_region_c(0.0, x).unwrap(), 1.0, 1e-12));
    }
    assert!(density_region_c(1.0, 1.2).is_err());
}

#[test]
fn region_c_shape() {
    let xs: Vec<f64> = (0..=50).map(|i| i as f64 / 100.0).collect();
    let up: Vec<f64> = xs.iter().map(|&x| density_region_c(6.0, x).unwrap()).collect();
    let down: Vec<f64> = xs.iter().map(|&x| density_region_c(-4.0, x).unwrap()).collect();
    // on [0, 1/2]: beta > 0 falls towards the middle, beta < 0 rises
    assert!(up.windows(2).all(|w| w[1] < w[0]));
    assert!(down.windows(2).all(|w| w[1] > w[0]));
    let d = region_c_distribution(6.0, 1001).unwrap();
    assert!(close(d.prob[500], d.prob.iter().cloned().fold(f64::INFINITY, f64::min), 0.0));
    assert!(close(d.prob[0], d.prob[1000], 1e-12 * d.prob[0]));
}

#[test]
fn region_c_count_against_exact() {
    // B = -beta/n: the exact count approaches the region c formula as n grows
    let beta = 2.0;
    let mut gaps = Vec::new();
    for (i, n) in [20usize, 80].into_iter().enumerate() {
        let b = -beta / n as f64;
        let cs = pspin_sample(b, n, &[], true, 20_000, 40 + i as u64).unwrap();
        let v = mean_neq_pspin(b, n, DensitySource::Empirical(cs.set.full.as_ref().unwrap())).unwrap();
        gaps.push((v.value() / neq_region_c(beta, n).unwrap() - 1.0).abs());
    }
    assert!(gaps[1] < gaps[0], "{gaps:?}");
    assert!(gaps[1] < 0.05, "{gaps:?}");
}

#[test]
fn region_d_closed_form() {
    let b = 1.0 / 3.0;
    let n = 100;
    let nf = n as f64;
    let expected = 0.5 * nf * 2f64.ln() + (4.0 * nf.sqrt() * ((4.0 / 3.0) / (std::f64::consts::PI / 3.0)).sqrt()).ln();
    assert!(close(log_neq_region_d(b, n).unwrap(), expected, 1e-12));
    assert_eq!(cdf_region_d(b, 0.49).unwrap(), 0.0);
    assert_eq!(cdf_region_d(b, 0.5).unwrap(), 1.0);
    assert!(cdf_region_d(-0.1, 0.5).is_err());
    assert!(cdf_region_d(b, 1.5).is_err());
    assert_eq!(region_d_distribution(b).unwrap().atom, Some((0.5, 1.0)));
}

#[test]
fn region_d_against_exact() {
    let (b, n) = (1.0 / 3.0, 30);
    let cs = pspin_sample(b, n, &[], true, 20_000, 8).unwrap();
    let v = mean_neq_pspin(b, n, DensitySource::Empirical(cs.set.full.as_ref().unwrap())).unwrap();
    let formula = log_neq_region_d(b, n).unwrap().exp();
    assert!(close(v.value() / formula, 1.0, 0.15), "{} vs {formula}", v.value());
}

#[test]
fn out_of_range_parameters() {
    let cs = pspin_sample(0.2, 5, &[0], false, 500, 1).unwrap();
    let src = DensitySource::Empirical(cs.set.get(0).unwrap());
    assert!(mean_nk_pspin(0.2, 5, 6, src).is_err());
    assert!(mean_nk_pspin(1.0, 5, 0, src).is_err());
    assert!(mean_neq_pspin(-1.0, 5, src).is_err());
}

proptest! {
    #[test]
    fn b_param_range(j in 0.1f64..5.0, s in 0.0f64..5.0, p in 2u32..8) {
        let b = b_param(j, s, p).unwrap();
        prop_assert!(b > -1.0 && b <= (p as f64 - 2.0) / p as f64 + 1e-15);
    }

    #[test]
    fn region_c_reflection(beta in -8.0f64..8.0, x in 0.0f64..1.0) {
        let a = density_region_c(beta, x).unwrap();
        let b = density_region_c(beta, 1.0 - x).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0));
    }

    #[test]
    fn region_a_symmetric(n in 1usize..60, k in 0usize..60) {
        prop_assume!(k <= n);
        prop_assert_eq!(pk_region_a(k, n).unwrap(), pk_region_a(n - k, n).unwrap());
    }
}
