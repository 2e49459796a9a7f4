//! Parallel Monte Carlo executor.

use l2boost_core::montecarlo::{run_replication, summarize, McConfig, McSummary, Replication};
use l2boost_core::Result;
use rayon::prelude::*;

/// Runs every replication of `cfg` on `workers` threads (0 picks the number
/// of available cores). Outcomes are collected in replication order before
/// aggregation, so the summary does not depend on `workers`.
pub fn run_mc(cfg: &McConfig, workers: usize) -> Result<McSummary> {
    cfg.validate()?;
    let outcomes = run_outcomes(cfg, workers);
    summarize(cfg.dgp.truth(), &outcomes)
}

pub fn run_outcomes(cfg: &McConfig, workers: usize) -> Vec<Result<Replication>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    pool.install(|| {
        (0..cfg.replications)
            .into_par_iter()
            .map(|r| run_replication(cfg, r))
            .collect()
    })
}
