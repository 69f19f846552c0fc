//! Noiseless group-testing experiments on the cover decoder.

use crate::detect::{build_factor_graph, cover_decode, oracle_load_state, LoadState};
use crate::phy::ActivityVector;
use crate::seqmat::SpreadingMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Monte-Carlo false-alarm ratio with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfaEstimate {
    /// Total false alarms over total active users, across all trials.
    pub rfa: f64,
    /// Linearized standard error of the ratio estimator.
    pub std_err: f64,
    pub trials: usize,
}

/// Estimates the cover decoder's false-alarm ratio with perfect load-state
/// knowledge: false alarms per active user, averaged over activity draws.
///
/// Each user wakes up independently with probability `lambda` — the ensemble
/// in which the closed-form ratio is exact for girth-6 regular matrices, so
/// estimates are directly comparable to the model at any matrix size.
pub fn cover_only_rfa(
    matrix: &SpreadingMatrix,
    lambda: f64,
    trials: usize,
    seed: u64,
) -> RfaEstimate {
    assert!((0.0..=1.0).contains(&lambda), "lambda must be in [0, 1]");
    assert!(trials >= 2, "need at least two trials");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let users = matrix.cols();
    let mut false_alarms = Vec::with_capacity(trials);
    let mut actives = Vec::with_capacity(trials);
    let mut loaded = vec![false; matrix.rows()];
    for _ in 0..trials {
        loaded.fill(false);
        let mut active = vec![false; users];
        let mut active_count = 0u64;
        for (u, flag) in active.iter_mut().enumerate() {
            if rng.gen::<f64>() < lambda {
                *flag = true;
                active_count += 1;
                for &l in matrix.col_support(u) {
                    loaded[l] = true;
                }
            }
        }
        let load = LoadState::from_flags(loaded.clone());
        let estimated = cover_decode(matrix, &load);
        let fa = estimated.iter().filter(|&&u| !active[u]).count() as u64;
        false_alarms.push(fa);
        actives.push(active_count);
    }

    let total_fa: u64 = false_alarms.iter().sum();
    let total_active: u64 = actives.iter().sum();
    if total_active == 0 {
        return RfaEstimate {
            rfa: 0.0,
            std_err: 0.0,
            trials,
        };
    }
    let rfa = total_fa as f64 / total_active as f64;
    // Ratio-of-sums linearization: residuals fa_t - rfa * a_t are zero-mean.
    let mean_active = total_active as f64 / trials as f64;
    let residual_sq: f64 = false_alarms
        .iter()
        .zip(&actives)
        .map(|(&fa, &a)| {
            let e = fa as f64 - rfa * a as f64;
            e * e
        })
        .sum();
    let std_err =
        (residual_sq / (trials as f64 * (trials as f64 - 1.0))).sqrt() / mean_active;
    RfaEstimate {
        rfa,
        std_err,
        trials,
    }
}

/// Check-degree histogram of the pruned factor graph, accumulated over
/// `trials` activity draws of exactly `round(lambda N)` users (oracle load
/// states, cover-decoded candidate set, zero rows removed).
pub fn empirical_check_degree_histogram(
    matrix: &SpreadingMatrix,
    lambda: f64,
    trials: usize,
    seed: u64,
) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hist = Vec::new();
    for _ in 0..trials {
        let activity = ActivityVector::draw(matrix.cols(), lambda, &mut rng);
        let load = oracle_load_state(matrix, &activity);
        let candidates = cover_decode(matrix, &load);
        let graph = build_factor_graph(matrix, &load, &candidates);
        for (degree, &count) in graph.check_degree_histogram().iter().enumerate() {
            if hist.len() <= degree {
                hist.resize(degree + 1, 0);
            }
            hist[degree] += count;
        }
    }
    hist
}
