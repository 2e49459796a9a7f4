//! L2Boosting with componentwise least squares.
//!
//! Three variants share one selection rule (the column most correlated with
//! the current residual, lowest index on ties):
//!
//! * [`Variant::Pga`] steps along the selected column by its univariate
//!   least-squares coefficient (times `shrinkage`). A column may be picked
//!   again later.
//! * [`Variant::PostPga`] runs the same path, then refits OLS on the columns
//!   it touched.
//! * [`Variant::Oga`] replaces the update by the projection of the response
//!   onto every column selected so far, so no column is selected twice.
//!
//! All fitting happens on a [`DesignData`]; coefficients are reported on both
//! the standardized and the raw scale.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::design::DesignData;
use crate::error::{Error, Result};
use crate::linalg::{IncrementalQr, PivotedQr};
use crate::matrix::{axpy, dot, norm_sq, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Variant {
    /// Plain L2Boosting (pure greedy algorithm).
    #[default]
    #[serde(rename = "ba")]
    Pga,
    /// OLS refit on the support selected by plain L2Boosting.
    #[serde(rename = "post-ba")]
    PostPga,
    /// Orthogonal L2Boosting (orthogonal greedy algorithm).
    #[serde(rename = "oba")]
    Oga,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Pga, Variant::PostPga, Variant::Oga];

    /// Short column label used in result tables.
    pub fn label(self) -> &'static str {
        match self {
            Variant::Pga => "BA",
            Variant::PostPga => "post-BA",
            Variant::Oga => "oBA",
        }
    }

    /// Command-line / config spelling.
    pub fn key(self) -> &'static str {
        match self {
            Variant::Pga => "ba",
            Variant::PostPga => "post-ba",
            Variant::Oga => "oba",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.key() == key)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum StopRule {
    /// Run exactly `m_max` steps (or until no descent is possible).
    #[serde(rename = "fixed")]
    FixedM,
    /// Stop at the first local minimum of the corrected AIC.
    #[default]
    #[serde(rename = "aicc")]
    Aicc,
    /// Stop once a step improves the RSS by less than `residual_tol` (relative).
    #[serde(rename = "tol")]
    ResidualTol,
}

impl StopRule {
    pub fn key(self) -> &'static str {
        match self {
            StopRule::FixedM => "fixed",
            StopRule::Aicc => "aicc",
            StopRule::ResidualTol => "tol",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        [StopRule::FixedM, StopRule::Aicc, StopRule::ResidualTol]
            .into_iter()
            .find(|r| r.key() == key)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoostingConfig {
    pub variant: Variant,
    pub m_max: usize,
    pub shrinkage: f64,
    pub stop_rule: StopRule,
    pub residual_tol: f64,
}

impl Default for BoostingConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Pga,
            m_max: 100,
            shrinkage: 1.0,
            stop_rule: StopRule::Aicc,
            residual_tol: 0.01,
        }
    }
}

impl BoostingConfig {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            ..Self::default()
        }
    }

    pub fn with_stop(mut self, stop_rule: StopRule, m_max: usize) -> Self {
        self.stop_rule = stop_rule;
        self.m_max = m_max;
        self
    }

    pub fn with_shrinkage(mut self, shrinkage: f64) -> Self {
        self.shrinkage = shrinkage;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_max < 1 {
            return Err(Error::InvalidConfig("m_max must be at least 1".into()));
        }
        if !(self.shrinkage > 0.0 && self.shrinkage <= 1.0) {
            return Err(Error::InvalidConfig(alloc::format!(
                "shrinkage must lie in (0, 1], got {}",
                self.shrinkage
            )));
        }
        if !(self.residual_tol >= 0.0) || !self.residual_tol.is_finite() {
            return Err(Error::InvalidConfig(alloc::format!(
                "residual_tol must be a nonnegative number, got {}",
                self.residual_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostingFit {
    pub variant: Variant,
    /// Selected column per step.
    pub path: Vec<usize>,
    /// Univariate least-squares coefficient of each step, before shrinkage
    /// (empty for the orthogonal variant).
    pub gammas: Vec<f64>,
    pub beta_std: Vec<f64>,
    pub beta_orig: Vec<f64>,
    pub intercept: f64,
    /// `||U^m||^2` for `m = 0..=m_star`.
    pub residual_norms: Vec<f64>,
    pub m_star: usize,
    /// Distinct entries of `path`, ascending.
    pub support: Vec<usize>,
}

impl BoostingFit {
    fn finish(
        data: &DesignData,
        variant: Variant,
        path: Vec<usize>,
        gammas: Vec<f64>,
        beta_std: Vec<f64>,
        residual_norms: Vec<f64>,
    ) -> Self {
        let (beta_orig, intercept) = data.to_original_scale(&beta_std);
        let support = distinct_sorted(&path);
        Self {
            variant,
            m_star: path.len(),
            path,
            gammas,
            beta_std,
            beta_orig,
            intercept,
            residual_norms,
            support,
        }
    }

    /// In-sample fitted values on the raw response scale.
    pub fn fitted(&self, data: &DesignData) -> Vec<f64> {
        data.fitted(&self.beta_std)
    }
}

fn distinct_sorted(idx: &[usize]) -> Vec<usize> {
    let mut s = idx.to_vec();
    s.sort_unstable();
    s.dedup();
    s
}

fn column_norms(x: &Matrix) -> Vec<f64> {
    x.columns().map(|c| libm::sqrt(norm_sq(c))).collect()
}

/// Argmax of `|<u, x_j>| / ||x_j||` over non-zero, non-excluded columns.
fn select_column(
    u: &[f64],
    x: &Matrix,
    norms: &[f64],
    exclude: Option<&[bool]>,
) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64, f64)> = None;
    for (j, col) in x.columns().enumerate() {
        if norms[j] == 0.0 || exclude.is_some_and(|e| e[j]) {
            continue;
        }
        let ip = dot(u, col);
        let score = ip.abs() / norms[j];
        // strict comparison keeps the lowest index on ties
        if best.is_none_or(|(_, s, _)| score > s) {
            best = Some((j, score, ip));
        }
    }
    let u_norm = libm::sqrt(norm_sq(u));
    match best {
        Some((j, score, ip)) if u_norm > 0.0 && score > 1e-12 * u_norm => {
            Ok((j, ip / (norms[j] * norms[j])))
        }
        _ => Err(Error::NoDescentDirection),
    }
}

/// One componentwise least-squares step: the column `j` most correlated with
/// the residual `u`, and `gamma = <u, x_j> / <x_j, x_j>`.
///
/// Fails with [`Error::NoDescentDirection`] when `u` is orthogonal (to
/// `1e-12` relative precision) to every non-zero column.
pub fn pga_step(u: &[f64], x: &Matrix) -> Result<(usize, f64)> {
    if u.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            what: "residual length vs design rows",
            expected: x.nrows(),
            found: u.len(),
        });
    }
    select_column(u, x, &column_norms(x), None)
}

/// Corrected AIC: `n log(rss/n) + 2 k n / (n - k - 1)`, infinite when
/// `n - k - 1 <= 0`.
pub fn aicc_score(rss: f64, k: usize, n: usize) -> f64 {
    if k + 1 >= n {
        return f64::INFINITY;
    }
    let nf = n as f64;
    let kf = k as f64;
    nf * libm::log(rss / nf) + 2.0 * kf * nf / (nf - kf - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stop {
    /// Keep the last step and stop.
    Cap,
    /// The last step is rejected by the criterion; undo it and stop.
    Reject,
}

fn stop_kind(residual_norms: &[f64], path: &[usize], cfg: &BoostingConfig, n: usize) -> Option<Stop> {
    let m = path.len();
    let criterion_rejects = m >= 1
        && residual_norms.len() > m
        && match cfg.stop_rule {
            StopRule::FixedM => false,
            StopRule::ResidualTol => {
                let prev = residual_norms[m - 1];
                let cur = residual_norms[m];
                !(prev > 0.0 && (prev - cur) / prev >= cfg.residual_tol)
            }
            StopRule::Aicc => {
                let k_prev = distinct_sorted(&path[..m - 1]).len() + 1;
                let k_cur = distinct_sorted(path).len() + 1;
                let prev = aicc_score(residual_norms[m - 1], k_prev, n);
                let cur = aicc_score(residual_norms[m], k_cur, n);
                !(cur <= prev)
            }
        };
    if criterion_rejects {
        Some(Stop::Reject)
    } else if m >= cfg.m_max {
        Some(Stop::Cap)
    } else {
        None
    }
}

/// Whether boosting should stop after the step that produced the last entry
/// of `residual_norms`.
///
/// `residual_norms` holds `||U^0||^2 ..= ||U^m||^2` and `path` the `m` columns
/// selected so far. `FixedM` fires once `m = m_max`; `ResidualTol` once the
/// relative RSS improvement of step `m` falls below `residual_tol`; `Aicc`
/// once [`aicc_score`] increases, with `k(m)` = distinct columns in the path
/// plus one. Every rule also fires at `m_max`. When `ResidualTol` or `Aicc`
/// fires, the fitters discard step `m`, so the realized stopping iteration is
/// the local minimum `m - 1`.
pub fn stop_decision(residual_norms: &[f64], path: &[usize], cfg: &BoostingConfig, n: usize) -> bool {
    stop_kind(residual_norms, path, cfg, n).is_some()
}

/// `rss <= EXACT_FIT^2 * rss0` counts as a perfect fit.
const EXACT_FIT: f64 = 1e-12;

/// A step must lower the RSS by more than `MIN_DECREASE * rss0`; smaller
/// decreases are rounding noise and end the fit like a zero gradient.
const MIN_DECREASE: f64 = 1e-12;

/// Plain L2Boosting; for [`Variant::PostPga`] the coefficients are then
/// replaced by the OLS refit on the selected support.
pub fn fit_pga(data: &DesignData, cfg: &BoostingConfig) -> Result<BoostingFit> {
    cfg.validate()?;
    if cfg.variant == Variant::Oga {
        return Err(Error::InvalidConfig("fit_pga called with the orthogonal variant".into()));
    }
    let x = &data.x;
    let norms = column_norms(x);
    let mut u = data.y.clone();
    let rss0 = norm_sq(&u);
    let mut residual_norms = vec![rss0];
    let mut path = Vec::new();
    let mut gammas = Vec::new();
    let mut beta = vec![0.0; data.p];

    loop {
        if rss0 == 0.0 {
            break;
        }
        let (j, gamma) = match select_column(&u, x, &norms, None) {
            Ok(s) => s,
            Err(Error::NoDescentDirection) => break,
            Err(e) => return Err(e),
        };
        let step = cfg.shrinkage * gamma;
        let prev_beta = beta[j];
        axpy(-step, x.col(j), &mut u);
        let rss = norm_sq(&u);
        if !(rss < *residual_norms.last().unwrap() - MIN_DECREASE * rss0) {
            break;
        }
        beta[j] += step;
        path.push(j);
        gammas.push(gamma);
        residual_norms.push(rss);
        if rss <= EXACT_FIT * EXACT_FIT * rss0 {
            break;
        }
        match stop_kind(&residual_norms, &path, cfg, data.n) {
            None => {}
            Some(Stop::Cap) => break,
            Some(Stop::Reject) => {
                beta[j] = prev_beta;
                path.pop();
                gammas.pop();
                residual_norms.pop();
                break;
            }
        }
    }

    if cfg.variant == Variant::PostPga {
        beta = post_ols_std(data, &distinct_sorted(&path))?;
    }
    Ok(BoostingFit::finish(data, cfg.variant, path, gammas, beta, residual_norms))
}

/// Orthogonal L2Boosting: after each selection the fit is the projection of
/// `y` onto all selected columns.
pub fn fit_oga(data: &DesignData, cfg: &BoostingConfig) -> Result<BoostingFit> {
    cfg.validate()?;
    if cfg.variant != Variant::Oga {
        return Err(Error::InvalidConfig("fit_oga requires the orthogonal variant".into()));
    }
    let x = &data.x;
    let norms = column_norms(x);
    let mut u = data.y.clone();
    let rss0 = norm_sq(&u);
    let mut residual_norms = vec![rss0];
    let mut path = Vec::new();
    let mut selected = vec![false; data.p];
    let mut qr = IncrementalQr::new();
    let mut qty = Vec::new();

    loop {
        if rss0 == 0.0 {
            break;
        }
        let (j, _) = match select_column(&u, x, &norms, Some(&selected)) {
            Ok(s) => s,
            Err(Error::NoDescentDirection) => break,
            Err(e) => return Err(e),
        };
        if !qr.push(x.col(j)) {
            return Err(Error::DegenerateSelection { column: j });
        }
        let q = qr.q(qr.len() - 1);
        let c = dot(q, &u);
        axpy(-c, q, &mut u);
        let rss = norm_sq(&u);
        if !(rss < *residual_norms.last().unwrap() - MIN_DECREASE * rss0) {
            qr.pop();
            break;
        }
        qty.push(dot(q, &data.y));
        selected[j] = true;
        path.push(j);
        residual_norms.push(rss);
        if rss <= EXACT_FIT * EXACT_FIT * rss0 {
            break;
        }
        match stop_kind(&residual_norms, &path, cfg, data.n) {
            None => {}
            Some(Stop::Cap) => break,
            Some(Stop::Reject) => {
                qr.pop();
                qty.pop();
                path.pop();
                residual_norms.pop();
                break;
            }
        }
    }

    let mut beta = vec![0.0; data.p];
    for (&j, b) in path.iter().zip(qr.solve(&qty)) {
        beta[j] = b;
    }
    Ok(BoostingFit::finish(data, Variant::Oga, path, Vec::new(), beta, residual_norms))
}

/// Runs the variant named in `cfg`.
pub fn fit(data: &DesignData, cfg: &BoostingConfig) -> Result<BoostingFit> {
    match cfg.variant {
        Variant::Pga | Variant::PostPga => fit_pga(data, cfg),
        Variant::Oga => fit_oga(data, cfg),
    }
}

/// OLS restricted to `support`, on the standardized scale (length `p`,
/// zero off support).
pub fn post_ols_std(data: &DesignData, support: &[usize]) -> Result<Vec<f64>> {
    let support = distinct_sorted(support);
    if let Some(&j) = support.iter().find(|&&j| j >= data.p) {
        return Err(Error::ColumnOutOfRange { index: j, p: data.p });
    }
    let mut beta = vec![0.0; data.p];
    if support.is_empty() {
        return Ok(beta);
    }
    if support.len() > data.n {
        return Err(Error::SupportTooLarge {
            support: support.len(),
            n: data.n,
        });
    }
    let xs = data.x.select_columns(&support)?;
    let qr = PivotedQr::new(&xs);
    let coef = qr.solve(&data.y).map_err(|e| match e {
        Error::RankDeficient { columns } => Error::RankDeficient {
            columns: columns.into_iter().map(|c| support[c]).collect(),
        },
        other => other,
    })?;
    for (&j, b) in support.iter().zip(coef) {
        beta[j] = b;
    }
    Ok(beta)
}

/// OLS of `y` on an intercept and the columns in `support`, everything else
/// held at zero. Returns raw-scale `(coefficients, intercept)`.
pub fn post_ols(data: &DesignData, support: &[usize]) -> Result<(Vec<f64>, f64)> {
    let beta_std = post_ols_std(data, support)?;
    Ok(data.to_original_scale(&beta_std))
}

/// `intercept + x_new * beta_orig` for raw-scale rows.
pub fn predict(fit: &BoostingFit, x_new: &Matrix) -> Result<Vec<f64>> {
    if x_new.ncols() != fit.beta_orig.len() {
        return Err(Error::DimensionMismatch {
            what: "prediction design columns",
            expected: fit.beta_orig.len(),
            found: x_new.ncols(),
        });
    }
    if !x_new.is_finite() {
        return Err(Error::NonFinite { what: "prediction design" });
    }
    let mut out = x_new.matvec(&fit.beta_orig)?;
    for v in &mut out {
        *v += fit.intercept;
    }
    Ok(out)
}
