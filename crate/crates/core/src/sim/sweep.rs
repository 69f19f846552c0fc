//! Sweep execution: Cartesian (lambda, SNR) grid with incremental CSV output.

use super::config::ScenarioConfig;
use super::metrics::{compute_metrics, MetricsRecord, CSV_HEADER};
use super::trial::{run_trial, PointParams, TrialReport};
use super::SimError;
use crate::phy::build_all_alphabets;
use rayon::prelude::*;
use std::io::Write;
use std::path::Path;

/// SplitMix64 step: derives decorrelated child seeds from a master seed and
/// a stream index. Stable across platforms.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Runs the full grid and appends one CSV row per point to `out`.
///
/// Results are reproducible: per-trial seeds depend only on the master seed
/// and the (point, trial) counters, and aggregation uses integer sums, so
/// worker scheduling cannot change the output bytes.
pub fn sweep_to_writer(
    cfg: &ScenarioConfig,
    mut out: Option<&mut dyn Write>,
) -> Result<Vec<MetricsRecord>, SimError> {
    cfg.validate()?;
    let matrix = cfg.resolve_matrix()?;
    let alphabets = build_all_alphabets::<f64>(cfg.psk_order, cfg.users);
    let pool = build_pool()?;

    if let Some(w) = out.as_deref_mut() {
        writeln!(w, "{CSV_HEADER}").map_err(|source| SimError::Io {
            path: "<csv output>".into(),
            source,
        })?;
    }

    let mut records = Vec::with_capacity(cfg.lambdas.len() * cfg.snrs_db.len());
    for (li, &lambda) in cfg.lambdas.iter().enumerate() {
        for (si, &snr_db) in cfg.snrs_db.iter().enumerate() {
            let point = PointParams {
                lambda,
                noise_var: cfg.noise_var(snr_db),
            };
            let point_index = (li * cfg.snrs_db.len() + si) as u64;
            let reports: Result<Vec<TrialReport>, SimError> = pool.install(|| {
                (0..cfg.trials)
                    .into_par_iter()
                    .map(|t| {
                        let trial_seed =
                            derive_seed(cfg.seed, point_index * cfg.trials as u64 + t as u64);
                        run_trial(cfg, &matrix, &alphabets, point, trial_seed)
                    })
                    .collect()
            });
            let record =
                compute_metrics(&reports?, cfg.users, cfg.packet_len, lambda, snr_db);
            if let Some(w) = out.as_deref_mut() {
                writeln!(w, "{}", record.to_csv_row()).map_err(|source| SimError::Io {
                    path: "<csv output>".into(),
                    source,
                })?;
                w.flush().map_err(|source| SimError::Io {
                    path: "<csv output>".into(),
                    source,
                })?;
            }
            records.push(record);
        }
    }
    Ok(records)
}

/// Runs the grid and writes the CSV to `out_path`.
pub fn sweep(cfg: &ScenarioConfig, out_path: &Path) -> Result<Vec<MetricsRecord>, SimError> {
    let mut file = std::fs::File::create(out_path).map_err(|source| SimError::Io {
        path: out_path.display().to_string(),
        source,
    })?;
    let records = sweep_to_writer(cfg, Some(&mut file))?;
    Ok(records)
}

/// Worker pool sized by `GFSIM_THREADS` when set, default otherwise.
fn build_pool() -> Result<rayon::ThreadPool, SimError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var("GFSIM_THREADS") {
        let threads: usize = value
            .parse()
            .map_err(|_| SimError::Config(format!("GFSIM_THREADS={value} is not a count")))?;
        builder = builder.num_threads(threads.max(1));
    }
    builder
        .build()
        .map_err(|e| SimError::Config(format!("worker pool: {e}")))
}
