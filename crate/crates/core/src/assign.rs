//! Minimum-cost perfect matching on a square cost matrix (Hungarian method).

/// Returns `assignment` with row `i` matched to column `assignment[i]`.
pub(crate) fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return vec![];
    }
    // 1-based potentials formulation
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
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
            }
            for j in 0..=n {
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
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=n {
        out[p[j] - 1] = j - 1;
    }
    out
}

/// Smallest cost increase obtainable by swapping the partners of two rows.
pub(crate) fn min_swap_gap(cost: &[Vec<f64>], assignment: &[usize]) -> f64 {
    let n = cost.len();
    let mut gap = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (assignment[i], assignment[j]);
            let d = cost[i][b] + cost[j][a] - cost[i][a] - cost[j][b];
            gap = gap.min(d);
        }
    }
    gap
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total(cost: &[Vec<f64>], a: &[usize]) -> f64 {
        a.iter().enumerate().map(|(i, &j)| cost[i][j]).sum()
    }

    #[test]
    fn small_examples() {
        let c = vec![vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0], vec![3.0, 2.0, 2.0]];
        let a = hungarian(&c);
        assert_eq!(total(&c, &a), 5.0);
        let id = vec![vec![0.0, 9.0], vec![9.0, 0.0]];
        assert_eq!(hungarian(&id), vec![0, 1]);
        assert_eq!(min_swap_gap(&id, &[0, 1]), 18.0);
    }

    #[test]
    fn matches_brute_force_on_4x4() {
        let c: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|j| (((i * 7 + j * 13) % 11) as f64).sqrt()).collect())
            .collect();
        let a = hungarian(&c);
        let mut best = f64::INFINITY;
        let mut perm = [0, 1, 2, 3];
        fn permute(k: usize, p: &mut [usize; 4], c: &[Vec<f64>], best: &mut f64) {
            if k == 4 {
                *best = best.min(p.iter().enumerate().map(|(i, &j)| c[i][j]).sum());
                return;
            }
            for i in k..4 {
                p.swap(k, i);
                permute(k + 1, p, c, best);
                p.swap(k, i);
            }
        }
        permute(0, &mut perm, &c, &mut best);
        assert!((total(&c, &a) - best).abs() < 1e-12);
    }
}
