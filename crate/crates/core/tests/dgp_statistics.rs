//! Large-sample checks of the simulation designs.

mod common;

use l2boost_core::dgp::*;
use l2boost_core::linalg::cholesky;
use l2boost_core::matrix::dot;
use l2boost_core::rng::{replication_stream, seeded};
use l2boost_core::Matrix;

fn sample_cov(x: &Matrix, a: usize, b: usize) -> f64 {
    let n = x.nrows() as f64;
    let ma = x.col(a).iter().sum::<f64>() / n;
    let mb = x.col(b).iter().sum::<f64>() / n;
    x.col(a).iter().zip(x.col(b)).map(|(u, v)| (u - ma) * (v - mb)).sum::<f64>() / n
}

fn corr(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let c: f64 = a.iter().zip(b).map(|(u, v)| (u - ma) * (v - mb)).sum();
    let va: f64 = a.iter().map(|u| (u - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|v| (v - mb).powi(2)).sum();
    c / (va * vb).sqrt()
}

fn var(a: &[f64]) -> f64 {
    let n = a.len() as f64;
    let m = a.iter().sum::<f64>() / n;
    a.iter().map(|u| (u - m).powi(2)).sum::<f64>() / n
}

#[test]
fn identity_factor_gives_standard_normal_rows() {
    let x = chol_sample(&Matrix::identity(3), 50_000, &mut seeded(1));
    for a in 0..3 {
        for b in 0..3 {
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((sample_cov(&x, a, b) - want).abs() < 0.05, "({a},{b})");
        }
    }
}

#[test]
fn ar1_pair_has_half_correlation() {
    let l = cholesky(&ar1_covariance(2, 0.5)).unwrap();
    let x = chol_sample(&l, 50_000, &mut seeded(2));
    assert!((corr(x.col(0), x.col(1)) - 0.5).abs() < 0.02);
}

#[test]
fn structural_errors_have_target_correlation() {
    // 1000 pooled samples of 100 draws each
    let cfg = DgpConfigIv { p: 10, s: 5, ..Default::default() };
    let (mut e, mut v, mut d) = (vec![], vec![], vec![]);
    for r in 0..1000 {
        let s = gen_iv(&cfg, &mut replication_stream(3, r)).unwrap();
        e.extend(s.e);
        v.extend(s.v);
        d.extend(s.d);
    }
    assert_eq!(e.len(), 100_000);
    assert!((corr(&e, &v) - 0.6).abs() < 0.01);
    assert!((var(&d) - 1.0).abs() < 0.02);
    let fs = calibrate_first_stage(&cfg).unwrap();
    assert!((var(&v) - fs.sigma_v2).abs() < 0.01);
}

#[test]
fn treatment_variance_matches_quadratic_form() {
    let cfg = DgpConfigTe { p: 30, ..Default::default() };
    let theta = decaying_coefficients(cfg.p, cfg.decay_exponent);
    let sigma = ar1_covariance(cfg.p, cfg.rho);
    // theta' Sigma theta by explicit double sum
    let mut quad = 0.0;
    for h in 0..cfg.p {
        for j in 0..cfg.p {
            quad += theta[h] * theta[j] * 0.5f64.powi((h as i32 - j as i32).abs());
        }
    }
    assert!((quad - dot(&theta, &sigma.matvec(&theta).unwrap())).abs() < 1e-12);
    let mut d = vec![];
    for r in 0..1000 {
        d.extend(gen_te(&cfg, &mut replication_stream(4, r)).unwrap().d);
    }
    assert!((var(&d) - (1.0 + quad)).abs() < 0.05, "{} vs {}", var(&d), 1.0 + quad);
}

#[test]
fn covariances_are_unit_diagonal_and_factorizable() {
    for (p, rho) in [(1, 0.0), (5, 0.5), (100, 0.5), (200, -0.9), (50, 0.99)] {
        let s = ar1_covariance(p, rho);
        for i in 0..p {
            assert_eq!(s.get(i, i), 1.0);
            for j in 0..p {
                assert_eq!(s.get(i, j), s.get(j, i));
            }
        }
        assert!(cholesky(&s).is_ok());
    }
}
