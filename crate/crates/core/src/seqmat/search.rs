//! Randomized short-cycle profile search by degree-preserving edge swaps.

use super::{cycle_census, construct_peg, CycleCensus, SeqmatError, SpreadingMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TEMPERATURE: f64 = 0.25;
const RESTART_AFTER_STALL: usize = 4_000;

/// Searches for a matrix whose 4/6/8-cycle counts equal `target` exactly.
///
/// Starts from the progressive-edge-growth matrix and proposes double-edge
/// swaps (two columns exchange one row each, preserving both column and row
/// weights). Acceptance is annealing-style on the L1 distance to the target
/// census: improving and neutral swaps are kept, worsening ones survive with
/// probability `exp(-delta / T)` at a small fixed temperature, and a long
/// stall rewinds to the best state seen. When the census calls for more
/// duplicate column pairs than present, swaps that clone an existing
/// weight-2 column are proposed preferentially.
pub fn construct_with_cycle_profile(
    rows: usize,
    cols: usize,
    col_weight: usize,
    target: CycleCensus,
    seed: u64,
    max_attempts: usize,
) -> Result<SpreadingMatrix, SeqmatError> {
    let mut matrix = construct_peg(rows, cols, col_weight, seed)?;
    let mut census = cycle_census(&matrix);
    let mut dist = census.distance(&target);
    if dist == 0 {
        return Ok(matrix);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = (matrix.clone(), census, dist);
    let mut stalled = 0usize;
    for _ in 0..max_attempts {
        if stalled >= RESTART_AFTER_STALL {
            (matrix, census, dist) = best.clone();
            stalled = 0;
        }
        let proposal = propose_swap(&matrix, col_weight, &census, &target, &mut rng);
        let Some(swap) = proposal else { continue };
        apply_swap(&mut matrix, &swap);
        let new_census = cycle_census(&matrix);
        let new_dist = new_census.distance(&target);
        let accept = new_dist <= dist
            || rng.gen::<f64>() < (-((new_dist - dist) as f64) / TEMPERATURE).exp();
        if accept {
            census = new_census;
            dist = new_dist;
            if dist < best.2 {
                best = (matrix.clone(), census, dist);
                stalled = 0;
            } else {
                stalled += 1;
            }
            if dist == 0 {
                return Ok(matrix);
            }
        } else {
            apply_swap(&mut matrix, &swap.inverse());
            stalled += 1;
        }
    }

    Err(SeqmatError::ProfileUnreachable {
        attempts: max_attempts,
        target,
        best: best.1,
    })
}

/// One double-edge swap: column `col_a` trades row `row_a` for `row_b`,
/// column `col_b` trades `row_b` for `row_a`.
struct Swap {
    col_a: usize,
    row_a: usize,
    col_b: usize,
    row_b: usize,
}

impl Swap {
    fn inverse(&self) -> Swap {
        Swap {
            col_a: self.col_a,
            row_a: self.row_b,
            col_b: self.col_b,
            row_b: self.row_a,
        }
    }
}

fn apply_swap(matrix: &mut SpreadingMatrix, swap: &Swap) {
    let supports = matrix.col_support_mut();
    replace_row(&mut supports[swap.col_a], swap.row_a, swap.row_b);
    replace_row(&mut supports[swap.col_b], swap.row_b, swap.row_a);
}

fn replace_row(support: &mut Vec<usize>, old: usize, new: usize) {
    let pos = support.binary_search(&old).expect("swap row present");
    support.remove(pos);
    let pos = support.binary_search(&new).unwrap_err();
    support.insert(pos, new);
}

fn propose_swap(
    matrix: &SpreadingMatrix,
    col_weight: usize,
    census: &CycleCensus,
    target: &CycleCensus,
    rng: &mut ChaCha8Rng,
) -> Option<Swap> {
    if col_weight == 2 && census.count_len4 < target.count_len4 && rng.gen_bool(0.5) {
        if let Some(swap) = propose_clone_column(matrix, rng) {
            return Some(swap);
        }
    }
    propose_uniform(matrix, rng)
}

/// Uniform double-edge swap between two random columns; rejected when it
/// would duplicate a row inside either column.
fn propose_uniform(matrix: &SpreadingMatrix, rng: &mut ChaCha8Rng) -> Option<Swap> {
    let cols = matrix.cols();
    for _ in 0..16 {
        let col_a = rng.gen_range(0..cols);
        let col_b = rng.gen_range(0..cols);
        if col_a == col_b {
            continue;
        }
        let sup_a = matrix.col_support(col_a);
        let sup_b = matrix.col_support(col_b);
        let row_a = sup_a[rng.gen_range(0..sup_a.len())];
        let row_b = sup_b[rng.gen_range(0..sup_b.len())];
        if row_a == row_b || sup_a.contains(&row_b) || sup_b.contains(&row_a) {
            continue;
        }
        return Some(Swap {
            col_a,
            row_a,
            col_b,
            row_b,
        });
    }
    None
}

/// Swap that turns some column into an exact copy of a weight-2 template
/// column, creating one additional length-4 cycle.
fn propose_clone_column(matrix: &SpreadingMatrix, rng: &mut ChaCha8Rng) -> Option<Swap> {
    let cols = matrix.cols();
    for _ in 0..16 {
        let template = rng.gen_range(0..cols);
        let &[x, y] = matrix.col_support(template) else {
            return None;
        };
        // Column holding x but not y becomes the clone.
        let start = rng.gen_range(0..cols);
        let clone = (0..cols)
            .map(|k| (start + k) % cols)
            .find(|&u| u != template && matrix.entry(x, u) && !matrix.entry(y, u))?;
        let &other = matrix.col_support(clone).iter().find(|&&l| l != x)?;
        // Partner donates its y entry and absorbs `other`.
        let start = rng.gen_range(0..cols);
        let partner = (0..cols).map(|k| (start + k) % cols).find(|&v| {
            v != template && v != clone && matrix.entry(y, v) && !matrix.entry(other, v)
        })?;
        return Some(Swap {
            col_a: clone,
            row_a: other,
            col_b: partner,
            row_b: y,
        });
    }
    None
}
