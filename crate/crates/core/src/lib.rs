//! Componentwise L2Boosting for sparse high-dimensional regression, and its
//! use for post-selection inference.
//!
//! * [`boosting`]: plain, post-OLS and orthogonal L2Boosting with stopping
//!   rules and prediction.
//! * [`dgp`]: seeded generators for an IV design with many instruments and a
//!   treatment-effect design with many controls.
//! * [`inference`]: 2SLS with a boosted first stage, and double selection
//!   with HC1 standard errors.
//! * [`montecarlo`]: single replications, aggregation and comparison tables.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the command
//! line and parallel execution live in the `l2boost` crate.

#![cfg_attr(not(test), no_std)]
// `!(a < b)` is used deliberately so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod boosting;
pub mod design;
pub mod dgp;
pub mod error;
pub mod inference;
pub mod linalg;
pub mod matrix;
pub mod montecarlo;
pub mod rng;

pub use boosting::{
    aicc_score, fit, fit_oga, fit_pga, pga_step, post_ols, post_ols_std, predict, stop_decision, BoostingConfig,
    BoostingFit, StopRule, Variant,
};
pub use design::{standardize, DesignData};
pub use error::{Error, Result};
pub use matrix::Matrix;
