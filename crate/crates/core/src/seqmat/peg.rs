//! Progressive edge growth construction of regular spreading matrices.

use super::{SeqmatError, SpreadingMatrix};

/// Builds a column-regular `rows x cols` matrix by progressive edge growth.
///
/// Each new edge connects its column to a check node at maximal depth in the
/// column's BFS subtree (an unreached check counts as infinitely deep), with
/// ties broken by lowest current check degree, then lowest check index.
/// Candidates are additionally restricted to checks below the row-weight cap
/// so the finished matrix stays row-regular within 1.
///
/// The procedure is fully deterministic given the tie-break rules; `seed` is
/// accepted for interface uniformity with the randomized constructors.
pub fn construct_peg(
    rows: usize,
    cols: usize,
    col_weight: usize,
    seed: u64,
) -> Result<SpreadingMatrix, SeqmatError> {
    let _ = seed;
    if col_weight < 2 || col_weight >= rows || rows >= cols {
        return Err(SeqmatError::InfeasibleDimensions {
            rows,
            cols,
            col_weight,
        });
    }

    let total_edges = cols * col_weight;
    let floor_cap = total_edges / rows;
    let ceil_cap = total_edges.div_ceil(rows);

    let mut col_adj: Vec<Vec<usize>> = vec![Vec::with_capacity(col_weight); cols];
    let mut check_adj: Vec<Vec<usize>> = vec![Vec::new(); rows];
    let mut check_deg = vec![0usize; rows];

    let mut check_dist: Vec<Option<u32>> = vec![None; rows];
    let mut var_visited = vec![false; cols];

    for col in 0..cols {
        for _ in 0..col_weight {
            bfs_check_distances(
                col,
                &col_adj,
                &check_adj,
                &mut check_dist,
                &mut var_visited,
            );
            let adjacent = &col_adj[col];
            let selected = [floor_cap, ceil_cap, usize::MAX]
                .iter()
                .find_map(|&cap| select_check(&check_dist, &check_deg, adjacent, cap))
                .expect("a non-adjacent check always exists while col_weight < rows");
            col_adj[col].push(selected);
            check_adj[selected].push(col);
            check_deg[selected] += 1;
        }
    }

    SpreadingMatrix::from_columns(rows, cols, col_adj)
}

/// BFS over the partial Tanner graph, filling 1-based odd distances from
/// `col` to every reachable check. Scratch buffers are reset on entry.
fn bfs_check_distances(
    col: usize,
    col_adj: &[Vec<usize>],
    check_adj: &[Vec<usize>],
    check_dist: &mut [Option<u32>],
    var_visited: &mut [bool],
) {
    check_dist.fill(None);
    var_visited.fill(false);
    var_visited[col] = true;
    let mut var_frontier = vec![col];
    let mut depth = 0u32;
    while !var_frontier.is_empty() {
        let mut check_frontier = Vec::new();
        for &v in &var_frontier {
            for &c in &col_adj[v] {
                if check_dist[c].is_none() {
                    check_dist[c] = Some(2 * depth + 1);
                    check_frontier.push(c);
                }
            }
        }
        let mut next_vars = Vec::new();
        for &c in &check_frontier {
            for &v in &check_adj[c] {
                if !var_visited[v] {
                    var_visited[v] = true;
                    next_vars.push(v);
                }
            }
        }
        var_frontier = next_vars;
        depth += 1;
    }
}

/// Picks the PEG target check among candidates with degree below `cap`:
/// unreached checks first (min degree, min index), otherwise the reached
/// check at maximal distance >= 3 (min degree, min index on ties).
fn select_check(
    check_dist: &[Option<u32>],
    check_deg: &[usize],
    adjacent: &[usize],
    cap: usize,
) -> Option<usize> {
    let mut best_unreached: Option<(usize, usize)> = None;
    let mut best_reached: Option<(std::cmp::Reverse<u32>, usize, usize)> = None;
    for c in 0..check_dist.len() {
        if check_deg[c] >= cap || adjacent.contains(&c) {
            continue;
        }
        match check_dist[c] {
            None => {
                let key = (check_deg[c], c);
                if best_unreached.is_none_or(|b| key < b) {
                    best_unreached = Some(key);
                }
            }
            Some(d) if d >= 3 => {
                let key = (std::cmp::Reverse(d), check_deg[c], c);
                if best_reached.is_none_or(|b| key < b) {
                    best_reached = Some(key);
                }
            }
            Some(_) => {}
        }
    }
    best_unreached
        .map(|(_, c)| c)
        .or(best_reached.map(|(_, _, c)| c))
}
