#![allow(dead_code)]

use l2boost_core::rng::seeded;
use l2boost_core::Matrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Centered, mutually orthogonal columns with `E_n[x^2] = 1`.
pub fn orthonormal_design(n: usize, p: usize) -> Matrix {
    assert!(p < n);
    let mut x = Matrix::zeros(n, p);
    for k in 0..p {
        let len = k + 1;
        let scale = (n as f64).sqrt() / ((len * len + len) as f64).sqrt();
        for i in 0..len {
            x.set(i, k, scale);
        }
        x.set(len, k, -(len as f64) * scale);
    }
    x
}

pub fn gaussian_matrix(n: usize, p: usize, seed: u64) -> Matrix {
    let mut rng = seeded(seed);
    let mut x = Matrix::zeros(n, p);
    for j in 0..p {
        for i in 0..n {
            x.set(i, j, StandardNormal.sample(&mut rng));
        }
    }
    x
}

/// Gaussian design with a shared factor, so columns are correlated.
pub fn correlated_matrix(n: usize, p: usize, seed: u64) -> Matrix {
    let mut rng = seeded(seed ^ 0x5eed);
    let f: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut x = gaussian_matrix(n, p, seed);
    for j in 0..p {
        let load: f64 = rng.random_range(0.0..0.9);
        for i in 0..n {
            x.set(i, j, x.get(i, j) + load * f[i]);
        }
    }
    x
}

pub fn gaussian_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed.wrapping_add(1_000_003));
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// OLS of `y` on `[1, cols...]` by Gauss-Jordan elimination on the normal
/// equations; returns `(intercept, slopes)`.
pub fn normal_equations(cols: &[Vec<f64>], y: &[f64]) -> (f64, Vec<f64>) {
    let n = y.len();
    let mut design: Vec<Vec<f64>> = vec![vec![1.0; n]];
    design.extend(cols.iter().cloned());
    let k = design.len();
    let mut a = vec![vec![0.0; k + 1]; k];
    for r in 0..k {
        for c in 0..k {
            a[r][c] = (0..n).map(|i| design[r][i] * design[c][i]).sum();
        }
        a[r][k] = (0..n).map(|i| design[r][i] * y[i]).sum();
    }
    for c in 0..k {
        let piv = (c..k)
            .max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap())
            .unwrap();
        a.swap(c, piv);
        for r in 0..k {
            if r != c {
                let f = a[r][c] / a[c][c];
                for cc in c..=k {
                    a[r][cc] -= f * a[c][cc];
                }
            }
        }
    }
    let sol: Vec<f64> = (0..k).map(|r| a[r][k] / a[r][r]).collect();
    (sol[0], sol[1..].to_vec())
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
