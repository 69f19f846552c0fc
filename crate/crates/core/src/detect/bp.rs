//! Belief propagation over activity states.
//!
//! Checks are loaded slots; a loaded slot must be explained by at least one
//! active neighbor, so check-to-variable messages are never negative. The
//! check rule is `E = -ln(1 - prod_{v'} (1 + exp(E_{v'->c}))^{-1})`,
//! evaluated in the log domain to survive saturated inputs; an empty product
//! (degree-1 check) saturates the message at the positive clamp.

use super::{clamp_llr, FactorGraph};
use crate::float::Float;

/// Runs `t_bp` flooding iterations and returns the activity LLR per
/// variable: prior plus all incoming check messages, clamped to `llr_max`.
pub fn bp_activity<F: Float>(
    graph: &FactorGraph,
    priors: &[F],
    t_bp: usize,
    llr_max: F,
) -> Vec<F> {
    assert_eq!(priors.len(), graph.vars().len(), "one prior per variable");
    let edges = graph.edges();
    let mut var_to_check: Vec<F> = edges.iter().map(|&(_, v)| priors[v]).collect();
    let mut check_to_var: Vec<F> = vec![F::zero(); edges.len()];

    for _ in 0..t_bp {
        for c in 0..graph.checks().len() {
            let ids = graph.check_edge_ids(c);
            for &e in ids {
                let neg_log_all_idle: F = ids
                    .iter()
                    .filter(|&&other| other != e)
                    .map(|&other| softplus(var_to_check[other]))
                    .sum();
                check_to_var[e] = if neg_log_all_idle <= F::zero() {
                    llr_max
                } else {
                    // -ln(1 - exp(-s)) for s = sum of softplus terms.
                    clamp_llr(-(-(-neg_log_all_idle).exp_m1()).ln(), llr_max)
                };
            }
        }
        for v in 0..graph.vars().len() {
            let ids = graph.var_edge_ids(v);
            for &e in ids {
                let extrinsic: F = ids
                    .iter()
                    .filter(|&&other| other != e)
                    .map(|&other| check_to_var[other])
                    .sum();
                var_to_check[e] = clamp_llr(priors[v] + extrinsic, llr_max);
            }
        }
    }

    (0..graph.vars().len())
        .map(|v| {
            let total: F = graph
                .var_edge_ids(v)
                .iter()
                .map(|&e| check_to_var[e])
                .sum();
            clamp_llr(priors[v] + total, llr_max)
        })
        .collect()
}

/// `ln(1 + exp(x))`, stable across the clamp range.
fn softplus<F: Float>(x: F) -> F {
    let threshold = F::from_f64_lossy(30.0);
    if x > threshold {
        x
    } else {
        x.exp().ln_1p()
    }
}
