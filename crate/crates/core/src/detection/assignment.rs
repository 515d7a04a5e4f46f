//! Maximum-weight bipartite assignment (Hungarian method with potentials).

/// Solves a maximum-weight assignment over a rectangular matrix where `None`
/// marks a forbidden pair. Allowed weights must be positive; the result maps
/// each row to its column, or `None` when the row stays unmatched.
///
/// Runs in `O(n^2 m)` for `n = min(rows, cols)`, `m = max(rows, cols)`.
pub fn max_weight_assignment(weights: &[Vec<Option<f64>>]) -> Vec<Option<usize>> {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return vec![None; rows];
    }
    debug_assert!(weights.iter().all(|r| r.len() == cols));

    let transposed = rows > cols;
    let (n, m) = if transposed { (cols, rows) } else { (rows, cols) };
    // Minimize cost = -weight; forbidden pairs cost 0 and are dropped afterwards.
    let cost = |i: usize, j: usize| -> f64 {
        let w = if transposed { weights[j][i] } else { weights[i][j] };
        -w.unwrap_or(0.0)
    };

    // 1-based potentials and matching, column 0 is the virtual source.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut result = vec![None; rows];
    for j in 1..=m {
        let i = owner[j];
        if i == 0 {
            continue;
        }
        let (r, c) = if transposed { (j - 1, i - 1) } else { (i - 1, j - 1) };
        if weights[r][c].is_some() {
            result[r] = Some(c);
        }
    }
    result
}
