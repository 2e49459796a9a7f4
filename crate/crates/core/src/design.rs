//! Standardized response/design pairs.
//!
//! Columns are centered and scaled to unit empirical second moment using the
//! divisor `n`, so `E_n[x_j] = 0` and `E_n[x_j^2] = 1`. The response is only
//! centered. Constant columns stay in place (so indices keep matching the raw
//! design) but are zeroed and flagged, and never offered to selection.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{mean, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignData {
    /// Centered response.
    pub y: Vec<f64>,
    /// Standardized design; constant columns are all zero.
    pub x: Matrix,
    pub col_means: Vec<f64>,
    /// Population (divisor `n`) standard deviations; `0.0` for constant columns.
    pub col_scales: Vec<f64>,
    pub y_mean: f64,
    /// `true` for columns excluded from selection because they are constant.
    pub constant: Vec<bool>,
    pub n: usize,
    pub p: usize,
}

impl DesignData {
    pub fn is_selectable(&self, j: usize) -> bool {
        !self.constant[j]
    }

    pub fn selectable_count(&self) -> usize {
        self.constant.iter().filter(|c| !**c).count()
    }

    /// Maps standardized coefficients back to the raw scale, returning
    /// `(coefficients, intercept)`.
    pub fn to_original_scale(&self, beta_std: &[f64]) -> (Vec<f64>, f64) {
        let beta: Vec<f64> = beta_std
            .iter()
            .zip(&self.col_scales)
            .map(|(&b, &s)| if b == 0.0 || s == 0.0 { 0.0 } else { b / s })
            .collect();
        let shift: f64 = beta.iter().zip(&self.col_means).map(|(b, m)| b * m).sum();
        (beta, self.y_mean - shift)
    }

    /// In-sample fitted values on the raw response scale.
    pub fn fitted(&self, beta_std: &[f64]) -> Vec<f64> {
        let mut f = self.x.matvec(beta_std).expect("coefficient length matches p");
        for v in &mut f {
            *v += self.y_mean;
        }
        f
    }
}

/// Centers `y_raw` and standardizes the columns of `x_raw`.
pub fn standardize(y_raw: &[f64], x_raw: &Matrix) -> Result<DesignData> {
    let n = x_raw.nrows();
    let p = x_raw.ncols();
    if y_raw.len() != n {
        return Err(Error::DimensionMismatch {
            what: "response length vs design rows",
            expected: n,
            found: y_raw.len(),
        });
    }
    if n < 2 {
        return Err(Error::TooFewObservations { n });
    }
    if !x_raw.is_finite() {
        return Err(Error::NonFinite { what: "design" });
    }
    if y_raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "response" });
    }

    let y_mean = mean(y_raw);
    let y = y_raw.iter().map(|v| v - y_mean).collect();

    let mut x = Matrix::zeros(n, p);
    let mut col_means = Vec::with_capacity(p);
    let mut col_scales = Vec::with_capacity(p);
    let mut constant = Vec::with_capacity(p);
    for j in 0..p {
        let col = x_raw.col(j);
        let m = mean(col);
        let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
        let sd = libm::sqrt(var);
        col_means.push(m);
        if sd <= 1e-12 * m.abs().max(1.0) {
            col_scales.push(0.0);
            constant.push(true);
            continue;
        }
        col_scales.push(sd);
        constant.push(false);
        for (dst, v) in x.col_mut(j).iter_mut().zip(col) {
            *dst = (v - m) / sd;
        }
    }
    if p > 0 && constant.iter().all(|c| *c) {
        return Err(Error::AllColumnsConstant);
    }

    Ok(DesignData {
        y,
        x,
        col_means,
        col_scales,
        y_mean,
        constant,
        n,
        p,
    })
}
