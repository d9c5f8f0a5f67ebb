//! Minimum-cost rectangular assignment via the Hungarian algorithm with
//! row/column potentials. Runs in O(n^2 m) for an n x m cost matrix with
//! n <= m. All scans break ties on the first index visited, so equal-cost
//! optima resolve deterministically.

/// Assign each row to a distinct column minimizing total cost.
/// `cost` must be rectangular with `rows <= cols`; returns the chosen column
/// per row.
///
/// # Panics
/// Panics if the matrix is empty, ragged, or has more rows than columns.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    assert!(n > 0, "assignment needs at least one row");
    let m = cost[0].len();
    assert!(cost.iter().all(|r| r.len() == m), "cost matrix must be rectangular");
    assert!(n <= m, "assignment needs at least as many columns as rows");

    // 1-indexed potentials; p[j] = row matched to column j (0 = unmatched).
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
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
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        // Augment along the alternating path back to the virtual column 0.
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![usize::MAX; n];
    for j in 1..=m {
        if p[j] != 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    debug_assert!(assignment.iter().all(|&j| j != usize::MAX));
    assignment
}

/// Total cost of an assignment under a cost matrix.
pub fn assignment_cost(cost: &[Vec<f64>], assignment: &[usize]) -> f64 {
    assignment.iter().enumerate().map(|(i, &j)| cost[i][j]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(cost: &[Vec<f64>]) -> f64 {
        let n = cost.len();
        let m = cost[0].len();
        let mut best = f64::INFINITY;
        let mut cols: Vec<usize> = Vec::new();
        fn rec(cost: &[Vec<f64>], n: usize, m: usize, cols: &mut Vec<usize>, best: &mut f64) {
            if cols.len() == n {
                let total: f64 =
                    cols.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
                if total < *best {
                    *best = total;
                }
                return;
            }
            for j in 0..m {
                if !cols.contains(&j) {
                    cols.push(j);
                    rec(cost, n, m, cols, best);
                    cols.pop();
                }
            }
        }
        rec(cost, n, m, &mut cols, &mut best);
        best
    }

    #[test]
    fn identity_is_optimal() {
        let cost = vec![
            vec![0.0, 5.0, 5.0],
            vec![5.0, 0.0, 5.0],
            vec![5.0, 5.0, 0.0],
        ];
        assert_eq!(min_cost_assignment(&cost), vec![0, 1, 2]);
    }

    #[test]
    fn picks_cheap_permutation() {
        let cost = vec![vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0], vec![3.0, 2.0, 2.0]];
        let a = min_cost_assignment(&cost);
        assert_eq!(assignment_cost(&cost, &a), 5.0);
    }

    #[test]
    fn rectangular_uses_spare_columns() {
        let cost = vec![vec![10.0, 1.0, 10.0, 2.0], vec![1.0, 10.0, 10.0, 10.0]];
        let a = min_cost_assignment(&cost);
        assert_eq!(a, vec![1, 0]);
    }

    #[test]
    fn matches_brute_force_on_random_matrices() {
        // Small deterministic pseudo-random matrices, square and rectangular.
        let mut state = 0x12345678u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) % 1000) as f64 / 10.0
        };
        for (n, m) in [(5, 5), (4, 6), (3, 8), (6, 6)] {
            let cost: Vec<Vec<f64>> =
                (0..n).map(|_| (0..m).map(|_| next()).collect()).collect();
            let a = min_cost_assignment(&cost);
            let mut seen = a.clone();
            seen.sort_unstable();
            seen.dedup();
            assert_eq!(seen.len(), n, "columns must be distinct");
            let got = assignment_cost(&cost, &a);
            let want = brute_force(&cost);
            assert!((got - want).abs() < 1e-9, "got {got}, optimal {want}");
        }
    }

    #[test]
    fn equal_costs_stay_deterministic() {
        let cost = vec![vec![1.0, 1.0, 1.0], vec![1.0, 1.0, 1.0]];
        let first = min_cost_assignment(&cost);
        assert_eq!(assignment_cost(&cost, &first), 2.0);
        for _ in 0..5 {
            assert_eq!(min_cost_assignment(&cost), first);
        }
    }
}
