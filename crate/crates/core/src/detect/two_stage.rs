//! Outer loop of the two-stage iterative detector.
//!
//! Per outer pass: run MPA on every symbol slot (uniform initial messages on
//! the first pass, activity-seeded ones afterwards), convert averaged
//! zero-symbol posteriors into activity priors, run BP, prune every variable
//! with a negative activity LLR, rebuild the graph. Hard decisions come from
//! the last pass's posteriors, restricted to the variables that survived the
//! final pruning.

use super::{
    activity_llr_from_mpa, bp_activity, build_factor_graph, cover_decode, energy_detect,
    hard_decision, mpa_decode, mpa_init_from_bp, DetectError, LoadState, SymbolPosterior,
    LLR_MAX,
};
use super::mpa::uniform_init;
use crate::float::Float;
use crate::phy::{subvector, Frame, UserAlphabet};
use crate::seqmat::SpreadingMatrix;
use num_complex::Complex;

/// Iteration counts and numeric guards of the detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStageParams<F> {
    /// Inner MPA iterations per symbol slot.
    pub t_mpa: usize,
    /// BP iterations per outer pass.
    pub t_bp: usize,
    /// Outer passes.
    pub t_outer: usize,
    /// Clamp for LLRs and log-domain messages.
    pub llr_max: F,
    /// Lower bound substituted for the noise variance.
    pub noise_floor: F,
}

impl<F: Float> Default for TwoStageParams<F> {
    fn default() -> Self {
        Self {
            t_mpa: 5,
            t_bp: 5,
            t_outer: 3,
            llr_max: F::from_f64_lossy(LLR_MAX),
            noise_floor: F::from_f64_lossy(1e-12),
        }
    }
}

/// Source of the initial slot load state.
#[derive(Debug, Clone)]
pub enum LoadMode<'a, F> {
    /// Threshold the per-slot received energy.
    EnergyDetect { threshold: F },
    /// Use a known load state (simulation only).
    Oracle(&'a LoadState),
}

/// Telemetry of one outer pass.
#[derive(Debug, Clone)]
pub struct OuterIterationStats {
    pub vars_before: usize,
    /// Users removed by this pass's pruning.
    pub pruned: Vec<usize>,
    /// Users still considered active after this pass.
    pub active_after: Vec<usize>,
    /// Largest LLR magnitude observed in this pass.
    pub max_abs_llr: f64,
}

/// Output of the detector: the surviving user set and its decoded symbols.
#[derive(Debug, Clone)]
pub struct DetectionResult {
    /// Estimated active users, ascending.
    pub active: Vec<usize>,
    /// Symbol indices per user in `active`, one entry per symbol slot;
    /// index 0 is the zero symbol.
    pub symbols: Vec<Vec<usize>>,
    /// Load state the detector started from.
    pub load_state: LoadState,
    /// Per-outer-pass telemetry (empty for the single-pass decoder).
    pub trace: Vec<OuterIterationStats>,
    /// Gaussian-kernel evaluations spent in MPA check updates.
    pub kernel_ops: u64,
}

impl DetectionResult {
    /// Decoded symbols of `user`, if it survived.
    pub fn symbols_of(&self, user: usize) -> Option<&[usize]> {
        let pos = self.active.iter().position(|&u| u == user)?;
        Some(&self.symbols[pos])
    }

    /// Decoded constellation points of every surviving user.
    pub fn decoded_points<F: Float>(
        &self,
        alphabets: &[UserAlphabet<F>],
    ) -> Vec<Vec<Complex<F>>> {
        self.active
            .iter()
            .zip(&self.symbols)
            .map(|(&u, ms)| ms.iter().map(|&m| alphabets[u].point(m)).collect())
            .collect()
    }
}

/// Full two-stage iterative detection.
pub fn two_stage_detect<F: Float>(
    frame: &Frame<F>,
    matrix: &SpreadingMatrix,
    noise_var: F,
    alphabets: &[UserAlphabet<F>],
    params: &TwoStageParams<F>,
    load_mode: LoadMode<'_, F>,
) -> Result<DetectionResult, DetectError> {
    assert!(
        params.t_mpa >= 1 && params.t_outer >= 1 && params.t_bp >= 1,
        "iteration counts must be positive"
    );
    let noise_var = noise_var.max(params.noise_floor);
    let load = resolve_load(frame, load_mode);
    let mut active = cover_decode(matrix, &load);
    let mut graph = build_factor_graph(matrix, &load, &active);
    let psk_order = alphabets[0].psk_order();
    let packet_len = frame.packet_len();
    let subvectors = all_subvectors(frame)?;

    let mut trace = Vec::with_capacity(params.t_outer);
    let mut kernel_ops = 0u64;
    let mut activity_llr: Vec<F> = Vec::new();
    let mut last_posteriors: Vec<SymbolPosterior<F>> = Vec::new();
    let mut survivors: Vec<usize> = Vec::new();

    for t in 0..params.t_outer {
        if graph.is_empty() {
            active.clear();
            last_posteriors.clear();
            survivors.clear();
            break;
        }
        let init = if t == 0 {
            uniform_init(graph.vars().len(), psk_order)
        } else {
            mpa_init_from_bp(&activity_llr, psk_order)
        };
        last_posteriors = subvectors
            .iter()
            .map(|y| mpa_decode(&graph, y, noise_var, alphabets, &init, params.t_mpa))
            .collect::<Result<_, _>>()?;
        kernel_ops +=
            (params.t_mpa * packet_len) as u64 * graph.mpa_kernel_ops(psk_order);

        let priors = activity_llr_from_mpa(&last_posteriors, params.llr_max);
        let posterior_llr = bp_activity(&graph, &priors, params.t_bp, params.llr_max);

        // Asleep iff the activity LLR went strictly negative.
        let keep: Vec<usize> = (0..graph.vars().len())
            .filter(|&v| posterior_llr[v] >= F::zero())
            .collect();
        let pruned: Vec<usize> = graph
            .vars()
            .iter()
            .enumerate()
            .filter(|&(v, _)| posterior_llr[v] < F::zero())
            .map(|(_, &u)| u)
            .collect();
        let new_active: Vec<usize> = keep.iter().map(|&v| graph.vars()[v]).collect();
        let max_abs_llr = posterior_llr
            .iter()
            .chain(priors.iter())
            .fold(0.0f64, |acc, &x| acc.max(x.to_f64_lossy().abs()));
        trace.push(OuterIterationStats {
            vars_before: graph.vars().len(),
            pruned,
            active_after: new_active.clone(),
            max_abs_llr,
        });

        activity_llr = keep.iter().map(|&v| posterior_llr[v]).collect();
        survivors = keep;
        if new_active.len() != graph.vars().len() {
            graph = build_factor_graph(matrix, &load, &new_active);
        }
        active = new_active;
    }

    let symbols = collect_symbols(&last_posteriors, &survivors, packet_len);
    Ok(DetectionResult {
        active,
        symbols,
        load_state: load,
        trace,
        kernel_ops,
    })
}

/// Single-pass baseline: cover decoder followed by one MPA round and hard
/// decisions, with no activity feedback and no pruning.
pub fn cover_mpa_detect<F: Float>(
    frame: &Frame<F>,
    matrix: &SpreadingMatrix,
    noise_var: F,
    alphabets: &[UserAlphabet<F>],
    params: &TwoStageParams<F>,
    load_mode: LoadMode<'_, F>,
) -> Result<DetectionResult, DetectError> {
    assert!(params.t_mpa >= 1, "iteration counts must be positive");
    let noise_var = noise_var.max(params.noise_floor);
    let load = resolve_load(frame, load_mode);
    let active = cover_decode(matrix, &load);
    let graph = build_factor_graph(matrix, &load, &active);
    if graph.is_empty() {
        return Ok(DetectionResult {
            active: Vec::new(),
            symbols: Vec::new(),
            load_state: load,
            trace: Vec::new(),
            kernel_ops: 0,
        });
    }
    let psk_order = alphabets[0].psk_order();
    let packet_len = frame.packet_len();
    let init = uniform_init(graph.vars().len(), psk_order);
    let posteriors: Vec<SymbolPosterior<F>> = all_subvectors(frame)?
        .iter()
        .map(|y| mpa_decode(&graph, y, noise_var, alphabets, &init, params.t_mpa))
        .collect::<Result<_, _>>()?;
    let kernel_ops = (params.t_mpa * packet_len) as u64 * graph.mpa_kernel_ops(psk_order);
    let survivors: Vec<usize> = (0..graph.vars().len()).collect();
    let symbols = collect_symbols(&posteriors, &survivors, packet_len);
    Ok(DetectionResult {
        active,
        symbols,
        load_state: load,
        trace: Vec::new(),
        kernel_ops,
    })
}

fn resolve_load<F: Float>(frame: &Frame<F>, load_mode: LoadMode<'_, F>) -> LoadState {
    match load_mode {
        LoadMode::EnergyDetect { threshold } => energy_detect(frame, threshold),
        LoadMode::Oracle(load) => load.clone(),
    }
}

fn all_subvectors<F: Float>(frame: &Frame<F>) -> Result<Vec<Vec<Complex<F>>>, DetectError> {
    (0..frame.packet_len())
        .map(|k| subvector(frame, k).map_err(DetectError::from))
        .collect()
}

fn collect_symbols<F: Float>(
    posteriors: &[SymbolPosterior<F>],
    survivors: &[usize],
    packet_len: usize,
) -> Vec<Vec<usize>> {
    let mut symbols = vec![Vec::with_capacity(packet_len); survivors.len()];
    for posterior in posteriors {
        let decisions = hard_decision(posterior);
        for (i, &pos) in survivors.iter().enumerate() {
            symbols[i].push(decisions[pos]);
        }
    }
    symbols
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::oracle_load_state;
    use crate::phy::{
        build_all_alphabets, spread_packet, superpose_with_rng, ActivityVector,
    };
    use crate::seqmat::tests::demo_matrix;
    use crate::seqmat::construct_peg;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn transmit<F: Float>(
        matrix: &SpreadingMatrix,
        alphabets: &[UserAlphabet<F>],
        symbols: &[(usize, Vec<usize>)],
        packet_len: usize,
        noise_var: F,
        rng: &mut ChaCha8Rng,
    ) -> Frame<F> {
        let packets: Vec<_> = symbols
            .iter()
            .map(|(u, ms)| {
                let points: Vec<_> = ms.iter().map(|&m| alphabets[*u].point(m)).collect();
                spread_packet(&points, matrix.col_support(*u), matrix.rows()).unwrap()
            })
            .collect();
        superpose_with_rng(&packets, packet_len, matrix.rows(), noise_var, rng).unwrap()
    }

    #[test]
    fn silence_detects_nothing() {
        let matrix = demo_matrix();
        let alphabets = build_all_alphabets::<f64>(2, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let frame = transmit(&matrix, &alphabets, &[], 4, 0.0, &mut rng);
        let result = two_stage_detect(
            &frame,
            &matrix,
            0.0,
            &alphabets,
            &TwoStageParams::default(),
            LoadMode::EnergyDetect { threshold: 1.0 },
        )
        .unwrap();
        assert!(result.active.is_empty());
        assert!(result.symbols.is_empty());
    }

    #[test]
    fn false_alarm_is_pruned_at_high_snr_in_most_trials() {
        // Users 0 and 3 active; the cover decoder also admits user 4.
        let matrix = demo_matrix();
        let alphabets = build_all_alphabets::<f64>(2, 6);
        let noise_var = 0.1; // 10 dB
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut exact = 0;
        let trials = 200;
        for _ in 0..trials {
            let symbols: Vec<(usize, Vec<usize>)> = [0usize, 3]
                .iter()
                .map(|&u| (u, (0..8).map(|_| rng.gen_range(1..=2)).collect()))
                .collect();
            let frame = transmit(&matrix, &alphabets, &symbols, 8, noise_var, &mut rng);
            let truth = ActivityVector::from_active_set(6, &[0, 3]);
            let load = oracle_load_state(&matrix, &truth);
            assert_eq!(cover_decode(&matrix, &load), vec![0, 3, 4]);
            let result = two_stage_detect(
                &frame,
                &matrix,
                noise_var,
                &alphabets,
                &TwoStageParams::default(),
                LoadMode::Oracle(&load),
            )
            .unwrap();
            if result.active == vec![0, 3] {
                exact += 1;
            }
        }
        assert!(
            exact * 2 > trials,
            "false alarm survived in most trials: {exact}/{trials}"
        );
    }

    #[test]
    fn noiseless_single_user_is_recovered_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let rows = rng.gen_range(5..20);
            let cols = rng.gen_range(rows + 1..2 * rows + 2);
            let matrix = construct_peg(rows, cols, 2, 0).unwrap();
            let alphabets = build_all_alphabets::<f64>(2, cols);
            let user = rng.gen_range(0..cols);
            let packet_len = 6;
            let ms: Vec<usize> = (0..packet_len).map(|_| rng.gen_range(1..=2)).collect();
            let frame = transmit(
                &matrix,
                &alphabets,
                &[(user, ms.clone())],
                packet_len,
                0.0,
                &mut rng,
            );
            let result = two_stage_detect(
                &frame,
                &matrix,
                0.0,
                &alphabets,
                &TwoStageParams::default(),
                LoadMode::EnergyDetect { threshold: 1.0 },
            )
            .unwrap();
            assert_eq!(result.active, vec![user]);
            assert_eq!(result.symbols_of(user).unwrap(), &ms[..]);
        }
    }

    #[test]
    fn pruning_is_monotone_across_outer_passes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let matrix = construct_peg(20, 40, 2, 0).unwrap();
        let alphabets = build_all_alphabets::<f64>(2, 40);
        for _ in 0..30 {
            let activity = ActivityVector::draw(40, 0.15, &mut rng);
            let symbols: Vec<(usize, Vec<usize>)> = activity
                .active_set()
                .into_iter()
                .map(|u| (u, (0..4).map(|_| rng.gen_range(1..=2)).collect()))
                .collect();
            let noise_var = 0.2;
            let frame = transmit(&matrix, &alphabets, &symbols, 4, noise_var, &mut rng);
            let load = oracle_load_state(&matrix, &activity);
            let result = two_stage_detect(
                &frame,
                &matrix,
                noise_var,
                &alphabets,
                &TwoStageParams::default(),
                LoadMode::Oracle(&load),
            )
            .unwrap();
            let mut previous: Option<&Vec<usize>> = None;
            for stats in &result.trace {
                if let Some(prev) = previous {
                    assert!(
                        stats.active_after.iter().all(|u| prev.contains(u)),
                        "candidate set grew across passes"
                    );
                }
                assert!(stats.max_abs_llr <= LLR_MAX + 1e-9);
                previous = Some(&stats.active_after);
            }
        }
    }

    #[test]
    fn marginal_argmax_matches_exhaustive_map_on_small_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut agree = 0u32;
        let mut total = 0u32;
        let noise_var = 0.1;
        for _ in 0..1000 {
            let rows = rng.gen_range(2..=4);
            let cols = rng.gen_range(2..=3);
            let supports: Vec<Vec<usize>> = (0..cols)
                .map(|_| {
                    let w = rng.gen_range(1..=rows);
                    rand::seq::index::sample(&mut rng, rows, w).into_vec()
                })
                .collect();
            let Ok(matrix) = SpreadingMatrix::from_columns(rows, cols, supports) else {
                continue;
            };
            if (0..rows).any(|l| (0..cols).all(|u| !matrix.entry(l, u))) {
                continue;
            }
            let alphabets = build_all_alphabets::<f64>(2, cols);
            let truth: Vec<usize> = (0..cols).map(|_| rng.gen_range(0..=2)).collect();
            let mut observation = vec![Complex::new(0.0, 0.0); rows];
            for l in 0..rows {
                for u in 0..cols {
                    if matrix.entry(l, u) {
                        observation[l] += alphabets[u].point(truth[u]);
                    }
                }
                let sigma = (noise_var / 2.0_f64).sqrt();
                observation[l] += Complex::new(
                    sigma * rng.sample::<f64, _>(rand_distr::StandardNormal),
                    sigma * rng.sample::<f64, _>(rand_distr::StandardNormal),
                );
            }

            let candidates: Vec<usize> = (0..cols).collect();
            let load = LoadState::from_flags(vec![true; rows]);
            let graph = build_factor_graph(&matrix, &load, &candidates);
            let posterior = mpa_decode(
                &graph,
                &observation,
                noise_var,
                &alphabets,
                &uniform_init(cols, 2),
                20,
            )
            .unwrap();
            let mpa_pick = hard_decision(&posterior);

            // Exhaustive joint MAP over all symbol vectors.
            let mut best = (f64::NEG_INFINITY, vec![0usize; cols]);
            let mut assignment = vec![0usize; cols];
            loop {
                let mut log_lik = 0.0;
                for l in 0..rows {
                    let mut s = Complex::new(0.0, 0.0);
                    for u in 0..cols {
                        if matrix.entry(l, u) {
                            s += alphabets[u].point(assignment[u]);
                        }
                    }
                    log_lik -= (observation[l] - s).norm_sqr() / (2.0 * noise_var);
                }
                if log_lik > best.0 {
                    best = (log_lik, assignment.clone());
                }
                let mut i = 0;
                loop {
                    if i == cols {
                        break;
                    }
                    assignment[i] += 1;
                    if assignment[i] <= 2 {
                        break;
                    }
                    assignment[i] = 0;
                    i += 1;
                }
                if i == cols {
                    break;
                }
            }

            total += 1;
            if mpa_pick == best.1 {
                agree += 1;
            }
        }
        let rate = agree as f64 / total as f64;
        assert!(
            rate >= 0.95,
            "marginal argmax agreed with joint MAP in only {rate:.3} of {total} draws"
        );
    }

    #[test]
    fn single_pass_baseline_keeps_all_cover_candidates() {
        let matrix = demo_matrix();
        let alphabets = build_all_alphabets::<f64>(2, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let symbols = vec![(0usize, vec![1, 2]), (3usize, vec![2, 2])];
        let frame = transmit(&matrix, &alphabets, &symbols, 2, 0.01, &mut rng);
        let truth = ActivityVector::from_active_set(6, &[0, 3]);
        let load = oracle_load_state(&matrix, &truth);
        let result = cover_mpa_detect(
            &frame,
            &matrix,
            0.01,
            &alphabets,
            &TwoStageParams::default(),
            LoadMode::Oracle(&load),
        )
        .unwrap();
        assert_eq!(result.active, vec![0, 3, 4]);
        assert_eq!(result.symbols.len(), 3);
        assert_eq!(result.symbols_of(0).unwrap(), &[1, 2]);
        // The decoded-point view maps indices through each user's alphabet.
        let points = result.decoded_points(&alphabets);
        assert_eq!(points[0][0], alphabets[0].point(1));
    }
}
