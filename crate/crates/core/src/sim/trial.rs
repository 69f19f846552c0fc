//! Single Monte-Carlo trial: draw, transmit, detect, score.

use super::config::{BaselineMode, LoadModeConfig, ScenarioConfig};
use super::SimError;
use crate::detect::{
    cover_mpa_detect, oracle_load_state, two_stage_detect, DetectionResult, LoadMode,
    TwoStageParams,
};
use crate::phy::{spread_packet, superpose_with_rng, ActivityVector, UserAlphabet};
use crate::seqmat::SpreadingMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One (sparsity, SNR) operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointParams {
    pub lambda: f64,
    pub noise_var: f64,
}

/// Ground truth, estimates and error counts of one trial.
#[derive(Debug, Clone)]
pub struct TrialReport {
    pub truth_active: Vec<usize>,
    pub estimated_active: Vec<usize>,
    pub false_alarms: u64,
    pub misses: u64,
    pub symbol_errors: u64,
    pub block_errors: u64,
    pub kernel_ops: u64,
}

/// Draws exactly `round(lambda N)` active users and their payloads, runs the
/// configured receiver, and scores activity and symbol decisions.
///
/// A missed user contributes all `K` of its symbols as errors and one block
/// error; false-alarmed users are charged to the activity metrics only.
pub fn run_trial(
    cfg: &ScenarioConfig,
    matrix: &SpreadingMatrix,
    alphabets: &[UserAlphabet<f64>],
    point: PointParams,
    trial_seed: u64,
) -> Result<TrialReport, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    let activity = ActivityVector::draw(cfg.users, point.lambda, &mut rng);
    let truth_active = activity.active_set();
    let truth_symbols: Vec<Vec<usize>> = truth_active
        .iter()
        .map(|_| {
            (0..cfg.packet_len)
                .map(|_| rng.gen_range(1..=cfg.psk_order))
                .collect()
        })
        .collect();

    let packets: Vec<Vec<num_complex::Complex<f64>>> = truth_active
        .iter()
        .zip(&truth_symbols)
        .map(|(&u, ms)| {
            let points: Vec<_> = ms.iter().map(|&m| alphabets[u].point(m)).collect();
            spread_packet(&points, matrix.col_support(u), cfg.slots)
        })
        .collect::<Result<_, _>>()?;
    let frame = superpose_with_rng(
        &packets,
        cfg.packet_len,
        cfg.slots,
        point.noise_var,
        &mut rng,
    )?;

    let params = TwoStageParams::<f64> {
        t_mpa: cfg.t_mpa,
        t_bp: cfg.t_bp,
        t_outer: cfg.t_outer,
        ..TwoStageParams::default()
    };
    let tau_e = cfg.tau_e_multiplier * cfg.packet_len as f64 * point.noise_var;
    let oracle = oracle_load_state(matrix, &activity);
    let configured_load = || match cfg.load_mode {
        LoadModeConfig::EnergyDetect => LoadMode::EnergyDetect { threshold: tau_e },
        LoadModeConfig::Oracle => LoadMode::Oracle(&oracle),
    };
    let result: DetectionResult = match cfg.baseline_mode {
        BaselineMode::Full => two_stage_detect(
            &frame,
            matrix,
            point.noise_var,
            alphabets,
            &params,
            configured_load(),
        )?,
        BaselineMode::NoOuterIteration => cover_mpa_detect(
            &frame,
            matrix,
            point.noise_var,
            alphabets,
            &params,
            configured_load(),
        )?,
        BaselineMode::OracleLoad => two_stage_detect(
            &frame,
            matrix,
            point.noise_var,
            alphabets,
            &params,
            LoadMode::Oracle(&oracle),
        )?,
    };

    let mut false_alarms = 0;
    for &u in &result.active {
        if !activity.is_active(u) {
            false_alarms += 1;
        }
    }
    let mut misses = 0;
    let mut symbol_errors = 0;
    let mut block_errors = 0;
    for (&u, truth) in truth_active.iter().zip(&truth_symbols) {
        match result.symbols_of(u) {
            None => {
                misses += 1;
                symbol_errors += cfg.packet_len as u64;
                block_errors += 1;
            }
            Some(decoded) => {
                let wrong = decoded
                    .iter()
                    .zip(truth)
                    .filter(|(d, t)| d != t)
                    .count() as u64;
                symbol_errors += wrong;
                if wrong > 0 {
                    block_errors += 1;
                }
            }
        }
    }

    Ok(TrialReport {
        truth_active,
        estimated_active: result.active,
        false_alarms,
        misses,
        symbol_errors,
        block_errors,
        kernel_ops: result.kernel_ops,
    })
}
