//! Message passing over symbol alphabets on the factor graph.
//!
//! Messages live in the probability domain. Check-to-variable updates
//! marginalize the Gaussian likelihood of the slot observation over all
//! symbol combinations of the other neighbors; variable-to-check updates
//! multiply the other incoming messages and renormalize, which keeps the
//! products away from underflow across iterations.

use super::{clamp_llr, DetectError, FactorGraph};
use crate::float::Float;
use crate::phy::UserAlphabet;
use num_complex::Complex;

/// Posterior symbol probabilities, one column per graph variable.
#[derive(Debug, Clone)]
pub struct SymbolPosterior<F> {
    /// Row-major `[var][symbol]`, columns normalized to sum 1.
    probs: Vec<F>,
    points: usize,
    vars: usize,
}

impl<F: Float> SymbolPosterior<F> {
    /// Number of alphabet points `M + 1`.
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    /// Posterior column of variable `v`.
    pub fn column(&self, v: usize) -> &[F] {
        &self.probs[v * self.points..(v + 1) * self.points]
    }

    /// Zero-symbol mass of variable `v`.
    pub fn zero_mass(&self, v: usize) -> F {
        self.probs[v * self.points]
    }
}

/// Runs `t_mpa` message passing iterations for one symbol slot and returns
/// the per-variable symbol posteriors.
///
/// `observation` is the length-`L` sub-vector for this symbol slot, indexed
/// by absolute slot id; `alphabets` is indexed by absolute user id;
/// `init` holds one (M+1)-point prior per graph variable and seeds the
/// variable-to-check messages.
pub fn mpa_decode<F: Float>(
    graph: &FactorGraph,
    observation: &[Complex<F>],
    noise_var: F,
    alphabets: &[UserAlphabet<F>],
    init: &[Vec<F>],
    t_mpa: usize,
) -> Result<SymbolPosterior<F>, DetectError> {
    if noise_var <= F::zero() {
        return Err(DetectError::DegenerateNoise(noise_var.to_f64_lossy()));
    }
    if graph.is_empty() {
        return Err(DetectError::EmptyGraph);
    }
    let points = alphabets[graph.vars()[0]].points().len();
    debug_assert!(graph
        .vars()
        .iter()
        .all(|&u| alphabets[u].points().len() == points));
    debug_assert_eq!(init.len(), graph.vars().len());

    let edges = graph.edges();
    let mut var_to_check: Vec<F> = Vec::with_capacity(edges.len() * points);
    for &(_, v) in edges {
        var_to_check.extend_from_slice(&init[v]);
    }
    let mut check_to_var: Vec<F> = vec![F::zero(); edges.len() * points];

    let half_inv_var = F::one() / (F::from_f64_lossy(2.0) * noise_var);
    let mut scratch = vec![F::zero(); points];

    for _ in 0..t_mpa {
        update_checks(
            graph,
            observation,
            alphabets,
            &var_to_check,
            &mut check_to_var,
            points,
            half_inv_var,
            &mut scratch,
        );
        update_vars(graph, &check_to_var, &mut var_to_check, points);
    }

    // Final posterior: product of all incoming check messages, normalized.
    let mut probs = vec![F::zero(); graph.vars().len() * points];
    for v in 0..graph.vars().len() {
        let col = &mut probs[v * points..(v + 1) * points];
        col.fill(F::one());
        for &e in graph.var_edge_ids(v) {
            for (m, p) in col.iter_mut().enumerate() {
                *p *= check_to_var[e * points + m];
            }
        }
        normalize_or_uniform(col);
        debug_assert!(
            (col.iter().copied().sum::<F>() - F::one()).abs()
                < F::from_f64_lossy(1e-9),
            "posterior column must stay normalized"
        );
    }
    Ok(SymbolPosterior {
        probs,
        points,
        vars: graph.vars().len(),
    })
}

/// Check update: for every outgoing edge, sum the Gaussian kernel of the
/// residual over all symbol assignments of the other neighbors, weighted by
/// their incoming messages.
#[allow(clippy::too_many_arguments)]
fn update_checks<F: Float>(
    graph: &FactorGraph,
    observation: &[Complex<F>],
    alphabets: &[UserAlphabet<F>],
    var_to_check: &[F],
    check_to_var: &mut [F],
    points: usize,
    half_inv_var: F,
    acc: &mut [F],
) {
    for (c, &slot) in graph.checks().iter().enumerate() {
        let y = observation[slot];
        let ids = graph.check_edge_ids(c);
        for &e in ids {
            let (_, v) = graph.edges()[e];
            let target = alphabets[graph.vars()[v]].points();
            let others: Vec<usize> = ids.iter().copied().filter(|&o| o != e).collect();
            acc.fill(F::zero());
            marginalize(
                &others,
                0,
                Complex::new(F::zero(), F::zero()),
                F::one(),
                graph,
                alphabets,
                var_to_check,
                points,
                y,
                half_inv_var,
                target,
                acc,
            );
            let out = &mut check_to_var[e * points..(e + 1) * points];
            out.copy_from_slice(acc);
            if out.iter().copied().sum::<F>() <= F::zero() {
                // Full underflow carries no information.
                out.fill(F::one() / F::from_usize(points).unwrap());
            }
        }
    }
}

/// Depth-first sum over the other neighbors' symbol assignments.
#[allow(clippy::too_many_arguments)]
fn marginalize<F: Float>(
    others: &[usize],
    depth: usize,
    interference: Complex<F>,
    weight: F,
    graph: &FactorGraph,
    alphabets: &[UserAlphabet<F>],
    var_to_check: &[F],
    points: usize,
    y: Complex<F>,
    half_inv_var: F,
    target: &[Complex<F>],
    acc: &mut [F],
) {
    if depth == others.len() {
        for (m, &point) in target.iter().enumerate() {
            let residual = y - interference - point;
            acc[m] += weight * (-half_inv_var * residual.norm_sqr()).exp();
        }
        return;
    }
    let e = others[depth];
    let (_, v) = graph.edges()[e];
    let neighbor = alphabets[graph.vars()[v]].points();
    for (m, &point) in neighbor.iter().enumerate() {
        let p = var_to_check[e * points + m];
        if p <= F::zero() {
            continue;
        }
        marginalize(
            others,
            depth + 1,
            interference + point,
            weight * p,
            graph,
            alphabets,
            var_to_check,
            points,
            y,
            half_inv_var,
            target,
            acc,
        );
    }
}

/// Variable update: product of the other incoming check messages,
/// renormalized per edge.
fn update_vars<F: Float>(
    graph: &FactorGraph,
    check_to_var: &[F],
    var_to_check: &mut [F],
    points: usize,
) {
    for v in 0..graph.vars().len() {
        let ids = graph.var_edge_ids(v);
        for &e in ids {
            let out = &mut var_to_check[e * points..(e + 1) * points];
            out.fill(F::one());
            for &other in ids.iter().filter(|&&o| o != e) {
                for (m, p) in out.iter_mut().enumerate() {
                    *p *= check_to_var[other * points + m];
                }
            }
            normalize_or_uniform(out);
        }
    }
}

fn normalize_or_uniform<F: Float>(probs: &mut [F]) {
    let total: F = probs.iter().copied().sum();
    if total > F::zero() {
        for p in probs.iter_mut() {
            *p /= total;
        }
    } else {
        probs.fill(F::one() / F::from_usize(probs.len()).unwrap());
    }
}

/// Converts averaged zero-symbol posteriors into activity LLRs:
/// `l = ln((1 - zbar) / zbar)` with `zbar` the zero mass averaged over the
/// packet, clamped to `llr_max`.
pub fn activity_llr_from_mpa<F: Float>(
    posteriors: &[SymbolPosterior<F>],
    llr_max: F,
) -> Vec<F> {
    let vars = posteriors[0].vars;
    let k = F::from_usize(posteriors.len()).unwrap();
    (0..vars)
        .map(|v| {
            let zbar: F = posteriors.iter().map(|p| p.zero_mass(v)).sum::<F>() / k;
            if zbar <= F::zero() {
                llr_max
            } else if zbar >= F::one() {
                -llr_max
            } else {
                clamp_llr(((F::one() - zbar) / zbar).ln(), llr_max)
            }
        })
        .collect()
}

/// Seeds the next round's variable-to-check messages from activity LLRs:
/// the zero symbol gets `1/(1 + exp(l))`, the `M` PSK points split the rest.
pub fn mpa_init_from_bp<F: Float>(activity_llr: &[F], psk_order: usize) -> Vec<Vec<F>> {
    let m = F::from_usize(psk_order).unwrap();
    activity_llr
        .iter()
        .map(|&l| {
            let zero = F::one() / (F::one() + l.exp());
            let each = (F::one() - zero) / m;
            let mut msg = vec![each; psk_order + 1];
            msg[0] = zero;
            msg
        })
        .collect()
}

/// Uniform `1/(M+1)` initial messages for every variable.
pub fn uniform_init<F: Float>(vars: usize, psk_order: usize) -> Vec<Vec<F>> {
    let p = F::one() / F::from_usize(psk_order + 1).unwrap();
    vec![vec![p; psk_order + 1]; vars]
}

/// Hard decision: the symbol index with maximal posterior per variable,
/// lowest index on ties.
pub fn hard_decision<F: Float>(posterior: &SymbolPosterior<F>) -> Vec<usize> {
    (0..posterior.vars)
        .map(|v| {
            let col = posterior.column(v);
            let mut best = 0;
            for (m, &p) in col.iter().enumerate() {
                if p > col[best] {
                    best = m;
                }
            }
            best
        })
        .collect()
}
