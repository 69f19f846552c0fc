//! Two-stage iterative receiver.
//!
//! Stage one is group testing: an energy detector marks loaded slots, the
//! cover decoder keeps every user whose slots are all loaded (no misses,
//! some false alarms), and belief propagation over the pruned factor graph
//! converts zero-symbol probabilities into activity decisions. Stage two is
//! payload decoding: a message passing algorithm marginalizes Gaussian
//! likelihoods over the (M+1)-ary alphabets, the zero symbol exposing false
//! alarms back to stage one. The outer loop alternates the two stages and
//! shrinks the graph after each pass.

mod bp;
mod mpa;
mod two_stage;

pub use bp::bp_activity;
pub use mpa::{
    activity_llr_from_mpa, hard_decision, mpa_decode, mpa_init_from_bp, uniform_init,
    SymbolPosterior,
};
pub use two_stage::{
    cover_mpa_detect, two_stage_detect, DetectionResult, LoadMode, OuterIterationStats,
    TwoStageParams,
};

use crate::float::Float;
use crate::phy::{ActivityVector, Frame, PhyError};
use crate::seqmat::SpreadingMatrix;
use thiserror::Error;

/// Default clamp for activity log-likelihood ratios and messages.
pub const LLR_MAX: f64 = 50.0;

/// Errors from the receiver chain.
#[derive(Debug, Error)]
pub enum DetectError {
    /// The Gaussian likelihood kernel is undefined without noise.
    #[error("noise variance {0} is not positive; clamp it to a small floor first")]
    DegenerateNoise(f64),
    /// Message passing needs at least one check and one variable.
    #[error("factor graph is empty")]
    EmptyGraph,
    #[error(transparent)]
    Phy(#[from] PhyError),
}

/// Per-slot load indicator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadState {
    loaded: Vec<bool>,
}

impl LoadState {
    pub fn from_flags(loaded: Vec<bool>) -> Self {
        Self { loaded }
    }

    pub fn slots(&self) -> usize {
        self.loaded.len()
    }

    pub fn is_loaded(&self, slot: usize) -> bool {
        self.loaded[slot]
    }

    pub fn flags(&self) -> &[bool] {
        &self.loaded
    }
}

/// True load state of an activity pattern: the Boolean OR of the active
/// users' protocol sequences.
pub fn oracle_load_state(matrix: &SpreadingMatrix, activity: &ActivityVector) -> LoadState {
    let mut loaded = vec![false; matrix.rows()];
    for u in activity.active_set() {
        for &l in matrix.col_support(u) {
            loaded[l] = true;
        }
    }
    LoadState { loaded }
}

/// Marks slot `l` loaded when its received energy `sum_k |y[l*K + k]|^2`
/// reaches `threshold`.
pub fn energy_detect<F: Float>(frame: &Frame<F>, threshold: F) -> LoadState {
    let packet_len = frame.packet_len();
    let loaded = (0..frame.slots())
        .map(|l| {
            let energy: F = frame.samples()[l * packet_len..(l + 1) * packet_len]
                .iter()
                .map(|s| s.norm_sqr())
                .sum();
            energy >= threshold
        })
        .collect();
    LoadState { loaded }
}

/// Cover decoder: a user stays a candidate iff every slot of its protocol
/// sequence is loaded. Returns the estimated active set in ascending order.
pub fn cover_decode(matrix: &SpreadingMatrix, load: &LoadState) -> Vec<usize> {
    (0..matrix.cols())
        .filter(|&u| matrix.col_support(u).iter().all(|&l| load.is_loaded(l)))
        .collect()
}

/// Bipartite graph over loaded slots (checks) and candidate users
/// (variables), with all-zero rows removed.
#[derive(Debug, Clone)]
pub struct FactorGraph {
    /// Slot index of each check.
    checks: Vec<usize>,
    /// User (column) index of each variable.
    vars: Vec<usize>,
    /// Edge endpoints as (check position, var position).
    edges: Vec<(usize, usize)>,
    check_edges: Vec<Vec<usize>>,
    var_edges: Vec<Vec<usize>>,
}

impl FactorGraph {
    pub fn checks(&self) -> &[usize] {
        &self.checks
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty() || self.checks.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub(crate) fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub(crate) fn check_edge_ids(&self, check_pos: usize) -> &[usize] {
        &self.check_edges[check_pos]
    }

    pub(crate) fn var_edge_ids(&self, var_pos: usize) -> &[usize] {
        &self.var_edges[var_pos]
    }

    pub fn check_degree(&self, check_pos: usize) -> usize {
        self.check_edges[check_pos].len()
    }

    /// Histogram of check degrees, indexed by degree.
    pub fn check_degree_histogram(&self) -> Vec<u64> {
        let max = self
            .check_edges
            .iter()
            .map(|e| e.len())
            .max()
            .unwrap_or(0);
        let mut hist = vec![0u64; max + 1];
        for e in &self.check_edges {
            hist[e.len()] += 1;
        }
        hist
    }

    /// Gaussian-kernel evaluations of one full MPA check update: each check
    /// of degree `d` costs `d * (M+1)^d`.
    pub fn mpa_kernel_ops(&self, psk_order: usize) -> u64 {
        self.check_edges
            .iter()
            .map(|e| {
                let d = e.len() as u64;
                d * (psk_order as u64 + 1).pow(e.len() as u32)
            })
            .sum()
    }
}

/// Builds the factor graph over `candidates` (ascending user ids): checks
/// are loaded slots covered by at least one candidate, variables are the
/// candidates themselves.
pub fn build_factor_graph(
    matrix: &SpreadingMatrix,
    load: &LoadState,
    candidates: &[usize],
) -> FactorGraph {
    let mut check_pos = vec![usize::MAX; matrix.rows()];
    let mut checks = Vec::new();
    for &u in candidates {
        for &l in matrix.col_support(u) {
            if load.is_loaded(l) && check_pos[l] == usize::MAX {
                check_pos[l] = 0; // provisional; renumbered below
                checks.push(l);
            }
        }
    }
    checks.sort_unstable();
    for (i, &l) in checks.iter().enumerate() {
        check_pos[l] = i;
    }

    let vars = candidates.to_vec();
    let mut edges = Vec::new();
    let mut check_edges = vec![Vec::new(); checks.len()];
    let mut var_edges = vec![Vec::new(); vars.len()];
    for (v, &u) in vars.iter().enumerate() {
        for &l in matrix.col_support(u) {
            if load.is_loaded(l) {
                let c = check_pos[l];
                let id = edges.len();
                edges.push((c, v));
                check_edges[c].push(id);
                var_edges[v].push(id);
            }
        }
    }
    FactorGraph {
        checks,
        vars,
        edges,
        check_edges,
        var_edges,
    }
}

pub(crate) fn clamp_llr<F: Float>(x: F, llr_max: F) -> F {
    if x > llr_max {
        llr_max
    } else if x < -llr_max {
        -llr_max
    } else {
        x
    }
}
