//! Metric aggregation and the CSV record format.

use super::trial::TrialReport;
use serde::{Deserialize, Serialize};

/// CSV header written by sweeps, one row per (lambda, SNR) point.
pub const CSV_HEADER: &str =
    "lambda,snr_db,trials,rfa,pf,pm,aer,ser,bler,ser_stderr,mean_ops";

/// Aggregated rates of one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub lambda: f64,
    pub snr_db: f64,
    pub trials: usize,
    /// False alarms per truly active user.
    pub rfa: f64,
    /// False-detection probability (per inactive user).
    pub pf: f64,
    /// Missed-detection probability (per active user).
    pub pm: f64,
    /// Activity error rate `pf + pm`.
    pub aer: f64,
    /// Symbol error rate over truly active users' symbols; a missed user's
    /// whole packet counts as errors.
    pub ser: f64,
    /// Fraction of active users with any symbol or activity error.
    pub bler: f64,
    /// Standard error of the per-trial SER mean.
    pub ser_stderr: f64,
    /// Mean Gaussian-kernel evaluations per trial.
    pub mean_ops: f64,
}

impl MetricsRecord {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.lambda,
            self.snr_db,
            self.trials,
            self.rfa,
            self.pf,
            self.pm,
            self.aer,
            self.ser,
            self.bler,
            self.ser_stderr,
            self.mean_ops
        )
    }
}

/// Reduces trial reports into one record. All rates come from integer count
/// sums, so the result does not depend on report order.
pub fn compute_metrics(
    reports: &[TrialReport],
    users: usize,
    packet_len: usize,
    lambda: f64,
    snr_db: f64,
) -> MetricsRecord {
    assert!(!reports.is_empty(), "metrics need at least one trial");
    let trials = reports.len();
    let active = (lambda * users as f64).round() as usize;
    let inactive = users - active;

    let mut fa = 0u64;
    let mut misses = 0u64;
    let mut sym = 0u64;
    let mut sym_sq = 0u64;
    let mut blocks = 0u64;
    let mut ops = 0u64;
    for r in reports {
        fa += r.false_alarms;
        misses += r.misses;
        sym += r.symbol_errors;
        sym_sq += r.symbol_errors * r.symbol_errors;
        blocks += r.block_errors;
        ops += r.kernel_ops;
    }

    let t = trials as f64;
    let per_active = |num: u64| {
        if active == 0 {
            0.0
        } else {
            num as f64 / (active as f64 * t)
        }
    };
    let pf = if inactive == 0 {
        0.0
    } else {
        fa as f64 / (inactive as f64 * t)
    };
    let pm = per_active(misses);
    let symbol_slots = active as f64 * packet_len as f64;
    let ser = if active == 0 {
        0.0
    } else {
        sym as f64 / (symbol_slots * t)
    };
    let ser_stderr = if active == 0 || trials < 2 {
        0.0
    } else {
        let mean = sym as f64 / t;
        let var = (sym_sq as f64 - t * mean * mean) / (t - 1.0);
        (var.max(0.0) / t).sqrt() / symbol_slots
    };

    MetricsRecord {
        lambda,
        snr_db,
        trials,
        rfa: per_active(fa),
        pf,
        pm,
        aer: pf + pm,
        ser,
        bler: per_active(blocks),
        ser_stderr,
        mean_ops: ops as f64 / t,
    }
}
