//! Minimum-cost perfect matching on a dense square cost matrix
//! (Hungarian method with row/column potentials, O(k^3)).

use crate::model::Matrix;

/// Returns `col_of[row]` minimizing the total cost.
pub fn min_cost_assignment(costs: &Matrix) -> Vec<usize> {
    let k = costs.rows();
    assert_eq!(k, costs.cols(), "cost matrix must be square");
    if k == 0 {
        return Vec::new();
    }

    // 1-based potentials; row_of[0] is the row being inserted
    let mut u = vec![0.0f64; k + 1];
    let mut v = vec![0.0f64; k + 1];
    let mut row_of = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];

    for i in 1..=k {
        row_of[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=k {
                if used[j] {
                    continue;
                }
                let cur = costs.get(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut col_of = vec![0usize; k];
    for j in 1..=k {
        col_of[row_of[j] - 1] = j - 1;
    }
    col_of
}
