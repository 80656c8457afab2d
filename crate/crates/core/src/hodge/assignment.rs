//! Exact min-cost bipartite assignment (Hungarian method with potentials).
//!
//! Kept independent of the greedy construction so it can serve as ground
//! truth for it.

use super::{Assignment, Frobenius, HodgeError};
use crate::lattice::Point;

/// Minimum-cost perfect matching on a square integer matrix; returns
/// `row -> column`.
pub fn hungarian(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    const INF: i64 = i64::MAX / 4;
    // 1-based arrays; column 0 is a virtual sink.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=n {
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
            for j in 0..=n {
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
    let mut map = vec![0usize; n];
    for j in 1..=n {
        map[owner[j] - 1] = j - 1;
    }
    map
}

/// Global minimum of `Σ ceil(w(pτ(P) - P))` over bijections `s1 -> s2`.
pub fn assignment_oracle(frob: &Frobenius<'_>, s1: &[Point], s2: &[Point]) -> Result<Assignment, HodgeError> {
    if s1.len() != s2.len() {
        return Err(HodgeError::SizeMismatch(s1.len(), s2.len()));
    }
    let cost: Vec<Vec<i64>> = s1.iter().map(|&a| s2.iter().map(|&b| frob.cost(a, b)).collect()).collect();
    Assignment::new(s1.to_vec(), s2.to_vec(), hungarian(&cost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Triangle;

    fn brute(cost: &[Vec<i64>]) -> i64 {
        fn rec(cost: &[Vec<i64>], row: usize, used: &mut Vec<bool>) -> i64 {
            if row == cost.len() {
                return 0;
            }
            let mut best = i64::MAX;
            for j in 0..cost.len() {
                if !used[j] {
                    used[j] = true;
                    best = best.min(cost[row][j] + rec(cost, row + 1, used));
                    used[j] = false;
                }
            }
            best
        }
        rec(cost, 0, &mut vec![false; cost.len()])
    }

    #[test]
    fn matches_brute_force_on_small_matrices() {
        let mats = vec![
            vec![vec![4, 1, 3], vec![2, 0, 5], vec![3, 2, 2]],
            vec![vec![7]],
            vec![vec![1, 2], vec![2, -5]],
            vec![vec![9, 2, 7, 8], vec![6, 4, 3, 7], vec![5, 8, 1, 8], vec![7, 6, 9, 4]],
        ];
        for m in mats {
            let map = hungarian(&m);
            let total: i64 = map.iter().enumerate().map(|(i, &j)| m[i][j]).sum();
            assert_eq!(total, brute(&m));
        }
    }

    #[test]
    fn oracle_on_t1_at_7_17() {
        let tri = Triangle::isosceles(7).unwrap();
        let frob = Frobenius::new(&tri, 17);
        let t1 = tri.points_below(1, false);
        assert_eq!(assignment_oracle(&frob, &t1, &t1).unwrap().score(&frob).h, 259);
    }

    #[test]
    fn oracle_rejects_size_mismatch() {
        let tri = Triangle::isosceles(3).unwrap();
        let frob = Frobenius::new(&tri, 7);
        assert!(assignment_oracle(&frob, &[Point::ORIGIN], &[]).is_err());
    }
}
