//! Simulation designs: a linear IV model with many Gaussian instruments, and
//! a partially linear treatment model with many Gaussian controls.
//!
//! Draw order (fixed, since bit-level reproducibility depends on it): the
//! design matrix first, row by row, `p` standard normals per row; then the
//! first error vector for all `n` observations; then the second.

use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::cholesky;
use crate::matrix::{dot, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DgpConfigIv {
    pub n: usize,
    pub p: usize,
    /// Number of leading instruments with a non-zero first-stage coefficient.
    pub s: usize,
    /// Target concentration parameter `n Pi' Sigma_z Pi / sigma_v^2`.
    pub mu: f64,
    /// AR(1) correlation between instruments.
    pub rho: f64,
    pub corr_ev: f64,
    pub beta_true: f64,
    pub sigma_e: f64,
}

impl Default for DgpConfigIv {
    fn default() -> Self {
        Self {
            n: 100,
            p: 100,
            s: 5,
            mu: 180.0,
            rho: 0.5,
            corr_ev: 0.6,
            beta_true: 1.0,
            sigma_e: 1.0,
        }
    }
}

impl DgpConfigIv {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.n < 2 {
            return bad("iv.n must be at least 2");
        }
        if self.p < 1 {
            return bad("iv.p must be at least 1");
        }
        if self.s < 1 || self.s > self.p {
            return bad("iv.s must satisfy 1 <= s <= p");
        }
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return bad("iv.mu must be positive and finite");
        }
        if !(self.rho.abs() < 1.0) {
            return bad("iv.rho must satisfy |rho| < 1");
        }
        if !(self.corr_ev.abs() < 1.0) {
            return bad("iv.corr_ev must satisfy |corr_ev| < 1");
        }
        if !(self.sigma_e > 0.0) || !self.sigma_e.is_finite() {
            return bad("iv.sigma_e must be positive and finite");
        }
        if !self.beta_true.is_finite() {
            return bad("iv.beta_true must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DgpConfigTe {
    pub n: usize,
    pub p: usize,
    pub alpha0: f64,
    pub rho: f64,
    /// Coefficients decay as `1 / j^decay_exponent`.
    pub decay_exponent: f64,
}

impl Default for DgpConfigTe {
    fn default() -> Self {
        Self {
            n: 100,
            p: 200,
            alpha0: 0.5,
            rho: 0.5,
            decay_exponent: 2.0,
        }
    }
}

impl DgpConfigTe {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.n < 2 {
            return bad("te.n must be at least 2");
        }
        if self.p < 1 {
            return bad("te.p must be at least 1");
        }
        if !self.alpha0.is_finite() {
            return bad("te.alpha0 must be finite");
        }
        if !(self.rho.abs() < 1.0) {
            return bad("te.rho must satisfy |rho| < 1");
        }
        if !(self.decay_exponent > 0.0) || !self.decay_exponent.is_finite() {
            return bad("te.decay_exponent must be positive and finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IvSample {
    pub y: Vec<f64>,
    /// Endogenous regressor.
    pub d: Vec<f64>,
    pub z: Matrix,
    /// Structural error.
    pub e: Vec<f64>,
    /// First-stage error.
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeSample {
    pub y: Vec<f64>,
    /// Treatment.
    pub d: Vec<f64>,
    pub x: Matrix,
    /// Outcome-equation error.
    pub xi: Vec<f64>,
    /// Treatment-equation error.
    pub nu: Vec<f64>,
}

/// `Sigma[h][j] = rho^|j - h|`.
pub fn ar1_covariance(p: usize, rho: f64) -> Matrix {
    let mut s = Matrix::zeros(p, p);
    for h in 0..p {
        for j in 0..p {
            s.set(h, j, libm::pow(rho, h.abs_diff(j) as f64));
        }
    }
    s
}

/// `n` rows `L eps` with `eps ~ N(0, I)`, i.e. rows distributed `N(0, L L')`.
pub fn chol_sample<R: Rng + ?Sized>(l: &Matrix, n: usize, rng: &mut R) -> Matrix {
    let p = l.nrows();
    let mut out = Matrix::zeros(n, p);
    let mut eps = alloc::vec![0.0; p];
    for i in 0..n {
        for e in &mut eps {
            *e = StandardNormal.sample(rng);
        }
        for h in 0..p {
            let mut acc = 0.0;
            for (j, e) in eps.iter().enumerate().take(h + 1) {
                acc += l.get(h, j) * e;
            }
            out.set(i, h, acc);
        }
    }
    out
}

fn standard_normals<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            scale * z
        })
        .collect()
}

/// First-stage coefficients hitting the target concentration parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstStage {
    pub c: f64,
    pub sigma_v2: f64,
    pub pi: Vec<f64>,
    /// `q = Pi~' Sigma_z Pi~` for the unscaled 0/1 pattern.
    pub q: f64,
}

impl FirstStage {
    /// `Pi' Sigma_z Pi`.
    pub fn signal_variance(&self) -> f64 {
        self.c * self.c * self.q
    }
}

/// Solves for `C` so that `Pi = C (1,..,1,0,..,0)` gives concentration
/// parameter `mu` while `Var(d) = Pi' Sigma_z Pi + sigma_v^2 = 1`.
///
/// With `q = Pi~' Sigma_z Pi~`: `C^2 q = mu / (n + mu)` and
/// `sigma_v^2 = 1 - C^2 q`.
pub fn calibrate_first_stage(cfg: &DgpConfigIv) -> Result<FirstStage> {
    cfg.validate()?;
    let sigma = ar1_covariance(cfg.p, cfg.rho);
    let mut q = 0.0;
    for h in 0..cfg.s {
        for j in 0..cfg.s {
            q += sigma.get(h, j);
        }
    }
    let n = cfg.n as f64;
    let c2 = (cfg.mu / (n + cfg.mu)) / q;
    let sigma_v2 = 1.0 - c2 * q;
    if !(sigma_v2 > 0.0) {
        return Err(Error::CalibrationInfeasible { sigma_v2 });
    }
    let c = libm::sqrt(c2);
    let pi = (0..cfg.p).map(|j| if j < cfg.s { c } else { 0.0 }).collect();
    Ok(FirstStage { c, sigma_v2, pi, q })
}

/// `n Pi' Sigma Pi / sigma_v^2`, evaluated directly from a coefficient vector.
pub fn concentration_parameter(n: usize, pi: &[f64], sigma: &Matrix, sigma_v2: f64) -> f64 {
    let s_pi = sigma.matvec(pi).expect("pi length matches sigma");
    n as f64 * dot(pi, &s_pi) / sigma_v2
}

/// `y = beta d + e`, `d = Z Pi + v`, `Z ~ N(0, Sigma_z)`, `(e, v)` jointly
/// normal with correlation `corr_ev`.
///
/// `v` is built as `(sigma_ev / sigma_e^2) e + w` with
/// `w ~ N(0, sigma_v^2 - sigma_ev^2 / sigma_e^2)`.
pub fn gen_iv<R: Rng + ?Sized>(cfg: &DgpConfigIv, rng: &mut R) -> Result<IvSample> {
    let fs = calibrate_first_stage(cfg)?;
    let l = cholesky(&ar1_covariance(cfg.p, cfg.rho))?;
    let z = chol_sample(&l, cfg.n, rng);
    let sigma_v = libm::sqrt(fs.sigma_v2);
    let sigma_ev = cfg.corr_ev * cfg.sigma_e * sigma_v;
    let slope = sigma_ev / (cfg.sigma_e * cfg.sigma_e);
    let w_sd = libm::sqrt(fs.sigma_v2 * (1.0 - cfg.corr_ev * cfg.corr_ev));

    let e = standard_normals(cfg.n, cfg.sigma_e, rng);
    let w = standard_normals(cfg.n, w_sd, rng);
    let v: Vec<f64> = e.iter().zip(&w).map(|(ei, wi)| slope * ei + wi).collect();
    let mut d = z.matvec(&fs.pi)?;
    for (di, vi) in d.iter_mut().zip(&v) {
        *di += vi;
    }
    let y = d.iter().zip(&e).map(|(di, ei)| cfg.beta_true * di + ei).collect();
    Ok(IvSample { y, d, z, e, v })
}

/// `(1 / j^exponent)` for `j = 1..=p`.
pub fn decaying_coefficients(p: usize, exponent: f64) -> Vec<f64> {
    (1..=p).map(|j| 1.0 / libm::pow(j as f64, exponent)).collect()
}

/// `y = alpha0 d + X theta_g + xi`, `d = X theta_m + nu`, `X ~ N(0, Sigma)`,
/// `(xi, nu) ~ N(0, I_2)` independent of `X`; both coefficient vectors decay
/// as `1 / j^decay_exponent`.
pub fn gen_te<R: Rng + ?Sized>(cfg: &DgpConfigTe, rng: &mut R) -> Result<TeSample> {
    cfg.validate()?;
    let theta = decaying_coefficients(cfg.p, cfg.decay_exponent);
    gen_te_with(cfg, &theta, &theta, rng)
}

/// [`gen_te`] with explicit outcome and treatment coefficients.
pub fn gen_te_with<R: Rng + ?Sized>(
    cfg: &DgpConfigTe,
    theta_g: &[f64],
    theta_m: &[f64],
    rng: &mut R,
) -> Result<TeSample> {
    cfg.validate()?;
    for theta in [theta_g, theta_m] {
        if theta.len() != cfg.p {
            return Err(Error::DimensionMismatch {
                what: "control coefficients",
                expected: cfg.p,
                found: theta.len(),
            });
        }
    }
    let l = cholesky(&ar1_covariance(cfg.p, cfg.rho))?;
    let x = chol_sample(&l, cfg.n, rng);
    let nu = standard_normals(cfg.n, 1.0, rng);
    let xi = standard_normals(cfg.n, 1.0, rng);
    let mut d = x.matvec(theta_m)?;
    for (di, ni) in d.iter_mut().zip(&nu) {
        *di += ni;
    }
    let xg = x.matvec(theta_g)?;
    let y = (0..cfg.n)
        .map(|i| cfg.alpha0 * d[i] + xg[i] + xi[i])
        .collect();
    Ok(TeSample { y, d, x, xi, nu })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn ar1_small_cases() {
        let s = ar1_covariance(2, 0.5);
        assert_eq!(s, Matrix::from_row_major(2, 2, &[1.0, 0.5, 0.5, 1.0]).unwrap());
        assert_eq!(ar1_covariance(4, 0.0), Matrix::identity(4));
        let s = ar1_covariance(3, 0.5);
        assert_eq!(s.get(0, 2), 0.25);
        let l = cholesky(&s).unwrap();
        let llt = l.matmul(&l.transpose()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((llt.get(i, j) - s.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn q_matches_brute_force_double_sum() {
        let mut brute = 0.0;
        for i in 1..=5i32 {
            for j in 1..=5i32 {
                brute += 0.5f64.powi((i - j).abs());
            }
        }
        assert_eq!(brute, 11.125);
        let fs = calibrate_first_stage(&DgpConfigIv::default()).unwrap();
        assert_eq!(fs.q, brute);
    }

    #[test]
    fn calibration_round_trips_mu_and_unit_variance() {
        let cfg = DgpConfigIv::default();
        let fs = calibrate_first_stage(&cfg).unwrap();
        let c2q = fs.c * fs.c * fs.q;
        assert!((100.0 * c2q / (1.0 - c2q) - 180.0).abs() < 1e-8);
        let sigma = ar1_covariance(cfg.p, cfg.rho);
        let mu = concentration_parameter(cfg.n, &fs.pi, &sigma, fs.sigma_v2);
        assert!((mu - 180.0).abs() < 1e-8);
        assert!((fs.signal_variance() + fs.sigma_v2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_uncorrelated_instrument_closed_form() {
        let cfg = DgpConfigIv {
            s: 1,
            rho: 0.0,
            ..DgpConfigIv::default()
        };
        let fs = calibrate_first_stage(&cfg).unwrap();
        assert_eq!(fs.q, 1.0);
        assert!((fs.c - (180.0f64 / 280.0).sqrt()).abs() < 1e-15);
        assert!((fs.sigma_v2 - 100.0 / 280.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_iv_configs() {
        for cfg in [
            DgpConfigIv { s: 0, ..Default::default() },
            DgpConfigIv { s: 101, ..Default::default() },
            DgpConfigIv { mu: 0.0, ..Default::default() },
            DgpConfigIv { rho: 1.0, ..Default::default() },
            DgpConfigIv { corr_ev: -1.0, ..Default::default() },
        ] {
            assert!(matches!(calibrate_first_stage(&cfg), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let cfg = DgpConfigIv { n: 20, p: 10, ..Default::default() };
        assert_eq!(gen_iv(&cfg, &mut seeded(4)).unwrap(), gen_iv(&cfg, &mut seeded(4)).unwrap());
        assert_ne!(gen_iv(&cfg, &mut seeded(4)).unwrap(), gen_iv(&cfg, &mut seeded(5)).unwrap());
        let cfg = DgpConfigTe { n: 20, p: 10, ..Default::default() };
        assert_eq!(gen_te(&cfg, &mut seeded(4)).unwrap(), gen_te(&cfg, &mut seeded(4)).unwrap());
        let l = cholesky(&ar1_covariance(3, 0.5)).unwrap();
        assert_eq!(chol_sample(&l, 5, &mut seeded(1)), chol_sample(&l, 5, &mut seeded(1)));
    }

    #[test]
    fn iv_structural_identities() {
        let cfg = DgpConfigIv { beta_true: 0.0, ..Default::default() };
        let s = gen_iv(&cfg, &mut seeded(11)).unwrap();
        assert_eq!(s.y, s.e);
        let cfg = DgpConfigIv::default();
        let s = gen_iv(&cfg, &mut seeded(11)).unwrap();
        let fs = calibrate_first_stage(&cfg).unwrap();
        let zpi = s.z.matvec(&fs.pi).unwrap();
        for i in 0..cfg.n {
            assert!((s.d[i] - zpi[i] - s.v[i]).abs() < 1e-12);
            assert!((s.y[i] - s.d[i] - s.e[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn te_coefficients_decay_as_inverse_square() {
        let t = decaying_coefficients(4, 2.0);
        assert_eq!(t[0], 1.0);
        assert_eq!(t[1], 0.25);
        assert!((t[2] - 1.0 / 9.0).abs() < 1e-16);
    }

    #[test]
    fn te_single_coefficient_leaves_pure_noise() {
        let cfg = DgpConfigTe { n: 50, p: 5, ..Default::default() };
        let theta = [1.0, 0.0, 0.0, 0.0, 0.0];
        let s = gen_te_with(&cfg, &theta, &theta, &mut seeded(2)).unwrap();
        for i in 0..cfg.n {
            assert!((s.d[i] - s.x.get(i, 0) - s.nu[i]).abs() < 1e-12);
        }
        assert!(gen_te_with(&cfg, &theta[..4], &theta, &mut seeded(2)).is_err());
    }
}
