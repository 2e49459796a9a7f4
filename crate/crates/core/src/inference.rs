//! Post-selection inference with boosting as the selection device.
//!
//! * [`iv_estimate`]: instrumental variables with a boosted first stage. The
//!   first-stage fitted values serve as the single constructed instrument.
//! * [`double_selection`]: treatment effect among many controls. Controls are
//!   selected separately for the outcome and for the treatment, and the
//!   final OLS uses their union.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::boosting::{fit, BoostingConfig};
use crate::design::standardize;
use crate::error::{Error, Result};
use crate::linalg::PivotedQr;
use crate::matrix::{centered, dot, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IvEstimate {
    pub beta_hat: f64,
    pub se: f64,
    pub first_stage_support: Vec<usize>,
    pub m_star: usize,
}

impl IvEstimate {
    pub fn t_stat(&self, null_value: f64) -> f64 {
        (self.beta_hat - null_value) / self.se
    }

    pub fn reject(&self, null_value: f64, level: f64) -> bool {
        reject_null(self.beta_hat, self.se, null_value, level)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeEstimate {
    pub alpha_hat: f64,
    pub se: f64,
    /// Controls selected when boosting the outcome.
    pub support_y: Vec<usize>,
    /// Controls selected when boosting the treatment.
    pub support_d: Vec<usize>,
    pub support_union: Vec<usize>,
    pub m_star_y: usize,
    pub m_star_d: usize,
}

impl TeEstimate {
    pub fn reject(&self, null_value: f64, level: f64) -> bool {
        reject_null(self.alpha_hat, self.se, null_value, level)
    }
}

fn check_len(what: &'static str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            what,
            expected: n,
            found: v.len(),
        });
    }
    Ok(())
}

/// IV estimate from given first-stage predictions:
/// `beta = <d_hat, y> / <d_hat, d>`, `se = sqrt(sigma_e^2 / <d_hat, d_hat>)`
/// with `sigma_e^2 = (1/n) sum (y - beta d)^2`, all on centered variables.
///
/// Returns `(beta_hat, se)`.
pub fn iv_from_predictions(y: &[f64], d: &[f64], d_hat: &[f64]) -> Result<(f64, f64)> {
    let n = y.len();
    check_len("endogenous regressor", d, n)?;
    check_len("first-stage predictions", d_hat, n)?;
    if n < 2 {
        return Err(Error::TooFewObservations { n });
    }
    let yc = centered(y);
    let dc = centered(d);
    let hc = centered(d_hat);
    let denom = dot(&hc, &dc);
    let hh = dot(&hc, &hc);
    if !(denom > 0.0) || !(hh > 0.0) {
        return Err(Error::WeakFirstStage { support_size: 0 });
    }
    let beta = dot(&hc, &yc) / denom;
    let sigma2 = yc
        .iter()
        .zip(&dc)
        .map(|(yi, di)| {
            let r = yi - beta * di;
            r * r
        })
        .sum::<f64>()
        / n as f64;
    Ok((beta, libm::sqrt(sigma2 / hh)))
}

/// Two-stage least squares with the first stage `d ~ Z` fit by boosting.
pub fn iv_estimate(y: &[f64], d: &[f64], z: &Matrix, cfg: &BoostingConfig) -> Result<IvEstimate> {
    let n = z.nrows();
    check_len("outcome", y, n)?;
    check_len("endogenous regressor", d, n)?;
    let data = standardize(d, z)?;
    let first = fit(&data, cfg)?;
    if first.support.is_empty() {
        return Err(Error::WeakFirstStage { support_size: 0 });
    }
    let d_hat = first.fitted(&data);
    let (beta_hat, se) = iv_from_predictions(y, d, &d_hat).map_err(|e| match e {
        Error::WeakFirstStage { .. } => Error::WeakFirstStage {
            support_size: first.support.len(),
        },
        other => other,
    })?;
    Ok(IvEstimate {
        beta_hat,
        se,
        first_stage_support: first.support,
        m_star: first.m_star,
    })
}

/// OLS of `y` on `(1, d, X[:, controls])`; returns the coefficient on `d`
/// and its HC1 standard error.
///
/// HC1: `Var = n/(n-k) * sum_i a_i^2 u_i^2`, where `a` is the row of
/// `(W'W)^{-1} W'` belonging to `d` and `u` the OLS residuals.
pub fn treatment_ols_hc1(y: &[f64], d: &[f64], x: &Matrix, controls: &[usize]) -> Result<(f64, f64)> {
    let n = x.nrows();
    check_len("outcome", y, n)?;
    check_len("treatment", d, n)?;
    let k = controls.len() + 2;
    if k > n {
        return Err(Error::UnionTooLarge {
            union: controls.len(),
            n,
        });
    }
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    cols.push(alloc::vec![1.0; n]);
    cols.push(d.to_vec());
    for &j in controls {
        if j >= x.ncols() {
            return Err(Error::ColumnOutOfRange { index: j, p: x.ncols() });
        }
        cols.push(x.col(j).to_vec());
    }
    let w = Matrix::from_columns(n, &cols)?;
    let qr = PivotedQr::new(&w);
    let coef = qr.solve(y).map_err(|e| match e {
        Error::RankDeficient { columns } => {
            let named: Vec<usize> = columns.iter().filter(|&&c| c >= 2).map(|&c| controls[c - 2]).collect();
            Error::RankDeficient {
                columns: if named.is_empty() { controls.to_vec() } else { named },
            }
        }
        other => other,
    })?;
    let fitted = w.matvec(&coef)?;
    let a = qr.influence_row(1)?;
    let meat: f64 = (0..n)
        .map(|i| {
            let u = y[i] - fitted[i];
            a[i] * a[i] * u * u
        })
        .sum();
    let dof = if n > k { n as f64 / (n - k) as f64 } else { f64::INFINITY };
    Ok((coef[1], libm::sqrt(dof * meat)))
}

/// Double selection: boost `y ~ X` and `d ~ X`, then OLS of `y` on
/// `(1, d, X_union)` with an HC1 standard error for the coefficient on `d`.
pub fn double_selection(y: &[f64], d: &[f64], x: &Matrix, cfg: &BoostingConfig) -> Result<TeEstimate> {
    let n = x.nrows();
    check_len("outcome", y, n)?;
    check_len("treatment", d, n)?;
    let fit_y = fit(&standardize(y, x)?, cfg)?;
    let fit_d = fit(&standardize(d, x)?, cfg)?;
    let mut union: Vec<usize> = fit_y.support.iter().chain(&fit_d.support).copied().collect();
    union.sort_unstable();
    union.dedup();
    if union.len() + 2 > n {
        return Err(Error::UnionTooLarge { union: union.len(), n });
    }
    let (alpha_hat, se) = treatment_ols_hc1(y, d, x, &union)?;
    Ok(TeEstimate {
        alpha_hat,
        se,
        support_y: fit_y.support,
        support_d: fit_d.support,
        support_union: union,
        m_star_y: fit_y.m_star,
        m_star_d: fit_d.m_star,
    })
}

/// Two-sided Wald test: `|estimate - null| / se > z_{1 - level/2}`.
pub fn reject_null(estimate_value: f64, se: f64, null_value: f64, level: f64) -> bool {
    let crit = normal_quantile(1.0 - level / 2.0);
    ((estimate_value - null_value) / se).abs() > crit
}

/// Standard normal quantile function (Wichura's AS 241, `PPND16`), accurate
/// to about 1e-16 relative.
pub fn normal_quantile(p: f64) -> f64 {
    if !(p > 0.0 && p < 1.0) {
        return if p == 0.0 {
            f64::NEG_INFINITY
        } else if p == 1.0 {
            f64::INFINITY
        } else {
            f64::NAN
        };
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = (((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_813e4) * r
            + 6.726_577_092_700_87e4)
            * r
            + 4.592_195_393_154_987e4)
            * r
            + 1.373_169_376_550_946e4)
            * r
            + 1.971_590_950_306_551_3e3)
            * r
            + 1.331_416_678_917_843_8e2)
            * r
            + 3.387_132_872_796_366_5)
            * q;
        let den = ((((((5.226_495_278_852_545e3 * r + 2.872_908_573_572_194_3e4) * r
            + 3.930_789_580_009_271e4)
            * r
            + 2.121_379_430_158_659_7e4)
            * r
            + 5.394_196_021_424_751e3)
            * r
            + 6.871_870_074_920_579e2)
            * r
            + 4.231_333_070_160_091e1)
            * r
            + 1.0;
        return num / den;
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = libm::sqrt(-libm::log(tail));
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r
            + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_545)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((1.050_750_071_644_416_8e-9 * r + 5.475_938_084_995_345e-4) * r
            + 1.519_866_656_361_645_7e-2)
            * r
            + 1.481_039_764_274_800_8e-1)
            * r
            + 6.897_673_349_851e-1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_759)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_049e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = ((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
            + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_133e-4)
            * r
            + 1.487_536_129_085_061_5e-2)
            * r
            + 1.369_298_809_227_358e-1)
            * r
            + 5.998_322_065_558_88e-1)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}
