//! The Dwork matrix of `ψ_p ∘ E_f` on a finite weight window, its
//! characteristic series `det(I - sψ^n)`, and related minors.

use rayon::prelude::*;
use serde::Serialize;

use super::ef::EfExpansion;
use super::ring::CoeffRing;
use super::series::{TruncSeries, Valuation};
use super::DworkError;
use crate::lattice::{Point, Triangle};
use crate::polygon::{PolygonHull, Q64};

/// Weight numerator cap of the window: all `P` with `(p-1) w(P) <= N + 2`.
pub fn truncation_cap(tri: &Triangle, p: u64, n: usize) -> i64 {
    ((n as i64 + 2) * tri.det()) / (p as i64 - 1)
}

/// Rows and columns indexed by `window`; entry `(Q, P)` is `e_{pQ-P}`.
#[derive(Clone, Debug)]
pub struct DworkMatrix<E> {
    pub n: usize,
    pub window: Vec<Point>,
    pub entries: Vec<Vec<TruncSeries<E>>>,
    /// `v_T` of each entry, with `n` standing for "zero below `T^n`".
    pub vals: Vec<Vec<usize>>,
}

impl<E: Clone + PartialEq + Send + Sync> DworkMatrix<E> {
    /// Entries whose exponent lies beyond the expansion are zero modulo
    /// `T^n` by the valuation bound, provided `ex.w_cap >= n`.
    pub fn build<R: CoeffRing<Elem = E>>(
        tri: &Triangle,
        p: u64,
        ex: &EfExpansion<E>,
        ring: &R,
        window_cap: i64,
    ) -> Result<Self, DworkError> {
        if (ex.w_cap as usize) < ex.n {
            return Err(DworkError::Precision(format!(
                "expansion weight cap {} is below the T-precision {}",
                ex.w_cap, ex.n
            )));
        }
        let n = ex.n;
        let window = tri.cone_points_up_to(window_cap);
        let p = p as i64;
        let entries: Vec<Vec<TruncSeries<E>>> = window
            .iter()
            .map(|&q| {
                window
                    .iter()
                    .map(|&c| ex.get(p * q - c).cloned().unwrap_or_else(|| TruncSeries::zero(ring, n)))
                    .collect()
            })
            .collect();
        Ok(Self::from_entries(ring, n, window, entries))
    }

    fn from_entries<R: CoeffRing<Elem = E>>(
        ring: &R,
        n: usize,
        window: Vec<Point>,
        entries: Vec<Vec<TruncSeries<E>>>,
    ) -> Self {
        let vals = entries
            .iter()
            .map(|row| row.iter().map(|s| s.first_nonzero(ring).unwrap_or(n)).collect())
            .collect();
        DworkMatrix { n, window, entries, vals }
    }

    pub fn dim(&self) -> usize {
        self.window.len()
    }

    pub fn mul<R: CoeffRing<Elem = E>>(&self, ring: &R, o: &Self) -> Self {
        let m = self.dim();
        let rows: Vec<Vec<TruncSeries<E>>> = (0..m)
            .into_par_iter()
            .map(|i| {
                (0..m)
                    .map(|j| {
                        let mut acc = TruncSeries::zero(ring, self.n);
                        for k in 0..m {
                            if self.vals[i][k] + o.vals[k][j] < self.n {
                                acc.add_assign(ring, &self.entries[i][k].mul(ring, &o.entries[k][j]));
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        Self::from_entries(ring, self.n, self.window.clone(), rows)
    }

    pub fn frob<R: CoeffRing<Elem = E>>(&self, ring: &R) -> Self {
        let rows = self.entries.iter().map(|r| r.iter().map(|s| s.frob(ring)).collect()).collect();
        Self::from_entries(ring, self.n, self.window.clone(), rows)
    }

    /// Matrix of `ψ^deg`: `σ^{deg-1}(N) ⋯ σ(N) N`.
    pub fn psi_power<R: CoeffRing<Elem = E>>(&self, ring: &R) -> Self {
        let mut acc = self.clone();
        let mut twisted = self.clone();
        for _ in 1..ring.degree() {
            twisted = twisted.frob(ring);
            acc = twisted.mul(ring, &acc);
        }
        acc
    }

    pub fn trace<R: CoeffRing<Elem = E>>(&self, ring: &R) -> TruncSeries<E> {
        (0..self.dim()).fold(TruncSeries::zero(ring, self.n), |acc, i| acc.add(ring, &self.entries[i][i]))
    }

    pub fn index_of(&self, q: Point) -> Option<usize> {
        self.window.iter().position(|&w| w == q)
    }

    /// `det` of the principal submatrix on `idx`, by a pruned expansion over
    /// permutations.
    pub fn principal_minor<R: CoeffRing<Elem = E>>(&self, ring: &R, idx: &[usize]) -> TruncSeries<E> {
        let l = idx.len();
        let n = self.n;
        if l == 0 {
            return TruncSeries::one(ring, n);
        }
        // suffix_min[c]: Σ over columns c.. of the least entry valuation in that column.
        let mut suffix_min = vec![0usize; l + 1];
        for c in (0..l).rev() {
            let m = idx.iter().map(|&r| self.vals[r][idx[c]]).min().unwrap_or(n);
            suffix_min[c] = (suffix_min[c + 1] + m).min(n);
        }
        let mut acc = TruncSeries::zero(ring, n);
        let mut used = vec![false; l];
        let mut rows = vec![0usize; l];
        let start = TruncSeries::one(ring, n);
        self.minor_dfs(ring, idx, 0, 0, &start, &mut used, &mut rows, &suffix_min, &mut acc);
        acc
    }

    #[allow(clippy::too_many_arguments)]
    fn minor_dfs<R: CoeffRing<Elem = E>>(
        &self,
        ring: &R,
        idx: &[usize],
        col: usize,
        val: usize,
        partial: &TruncSeries<E>,
        used: &mut [bool],
        rows: &mut [usize],
        suffix_min: &[usize],
        acc: &mut TruncSeries<E>,
    ) {
        let l = idx.len();
        let n = self.n;
        if col == l {
            let mut inv = 0;
            for a in 0..l {
                for b in a + 1..l {
                    if rows[a] > rows[b] {
                        inv += 1;
                    }
                }
            }
            if inv % 2 == 0 {
                acc.add_assign(ring, partial);
            } else {
                *acc = acc.sub(ring, partial);
            }
            return;
        }
        for r in 0..l {
            if used[r] {
                continue;
            }
            let v = self.vals[idx[r]][idx[col]];
            if val + v + suffix_min[col + 1] >= n {
                continue;
            }
            let cut = n - suffix_min[col + 1];
            let next = partial.mul_trunc(ring, &self.entries[idx[r]][idx[col]], cut);
            let Some(nv) = next.first_nonzero(ring) else { continue };
            used[r] = true;
            rows[col] = r;
            self.minor_dfs(ring, idx, col + 1, nv, &next, used, rows, suffix_min, acc);
            used[r] = false;
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CharSeries<E> {
    pub n: usize,
    /// Extension degree of the coefficient ring.
    pub degree: usize,
    pub window_len: usize,
    #[serde(skip)]
    pub u: Vec<TruncSeries<E>>,
    pub valuations: Vec<Valuation>,
    pub subsets_visited: usize,
}

/// `u_0 .. u_L` of `det(I - s ψ^deg)` modulo `T^n`, with `u_ℓ` the literal
/// coefficient of `s^ℓ`.
pub fn char_series<R: CoeffRing>(
    tri: &Triangle,
    p: u64,
    mat: &DworkMatrix<R::Elem>,
    ring: &R,
    l_max: usize,
) -> CharSeries<R::Elem> {
    let a = mat.psi_power(ring);
    let n = mat.n;
    let det = tri.det();
    let weights: Vec<i64> = a.window.iter().map(|&q| tri.weight_num(q)).collect();
    // Prune on h1(S) = (p-1) Σ w(S): v_T(minor) >= ceil(h1).
    let budget = n as i64 * det;
    let scale = p as i64 - 1;
    let m = a.dim();

    let branch = |first: usize| -> (Vec<TruncSeries<R::Elem>>, usize) {
        let mut sums = vec![TruncSeries::zero(ring, n); l_max + 1];
        let mut visited = 0usize;
        let mut stack = vec![first];
        subset_dfs(&a, ring, &weights, scale, budget, l_max, &mut stack, weights[first], &mut sums, &mut visited);
        (sums, visited)
    };
    let firsts: Vec<usize> = (0..m).filter(|&i| scale * weights[i] < budget).collect();
    let parts: Vec<(Vec<TruncSeries<R::Elem>>, usize)> =
        if l_max == 0 { Vec::new() } else { firsts.par_iter().map(|&i| branch(i)).collect() };

    let mut u = vec![TruncSeries::zero(ring, n); l_max + 1];
    u[0] = TruncSeries::one(ring, n);
    let mut visited = 1;
    for (sums, v) in parts {
        visited += v;
        for (l, s) in sums.iter().enumerate() {
            u[l].add_assign(ring, s);
        }
    }
    for (l, s) in u.iter_mut().enumerate() {
        if l % 2 == 1 {
            *s = s.neg(ring);
        }
    }
    let valuations = u.iter().map(|s| s.valuation(ring)).collect();
    CharSeries { n, degree: ring.degree(), window_len: m, u, valuations, subsets_visited: visited }
}

#[allow(clippy::too_many_arguments)]
fn subset_dfs<R: CoeffRing>(
    a: &DworkMatrix<R::Elem>,
    ring: &R,
    weights: &[i64],
    scale: i64,
    budget: i64,
    l_max: usize,
    stack: &mut Vec<usize>,
    wsum: i64,
    sums: &mut [TruncSeries<R::Elem>],
    visited: &mut usize,
) {
    *visited += 1;
    let minor = a.principal_minor(ring, stack);
    sums[stack.len()].add_assign(ring, &minor);
    if stack.len() == l_max {
        return;
    }
    let last = *stack.last().unwrap();
    for j in last + 1..a.dim() {
        let w = wsum + weights[j];
        // The window is sorted by weight, so later points only cost more.
        if scale * w >= budget {
            break;
        }
        stack.push(j);
        subset_dfs(a, ring, weights, scale, budget, l_max, stack, w, sums, visited);
        stack.pop();
    }
}

/// Lower convex hull of `(i, v_T(u_i)/deg)` over finite valuations; the
/// indices with only a lower bound are returned separately.
pub fn newton_polygon_c(valuations: &[Valuation], degree: usize) -> (PolygonHull, Vec<usize>) {
    let mut pts = Vec::new();
    let mut flagged = Vec::new();
    for (i, v) in valuations.iter().enumerate() {
        match v {
            Valuation::Finite(x) => pts.push((i as i64, Q64::new(*x, degree as i64), true)),
            Valuation::AtLeast(_) => flagged.push(i),
        }
    }
    (PolygonHull::lower_hull(&pts), flagged)
}

/// `det` of the `T_1 × T_1` block of the Dwork matrix, with its coefficient
/// at `T^h` where `h = h(T_1)`.
pub fn det_t1<R: CoeffRing>(
    tri: &Triangle,
    mat: &DworkMatrix<R::Elem>,
    ring: &R,
    h_t1: i64,
) -> Result<(TruncSeries<R::Elem>, R::Elem), DworkError> {
    if (mat.n as i64) <= h_t1 {
        return Err(DworkError::Precision(format!("T-precision {} must exceed h(T_1) = {h_t1}", mat.n)));
    }
    let idx: Vec<usize> = tri
        .points_below(1, false)
        .iter()
        .map(|&q| mat.index_of(q).ok_or(DworkError::Precision(format!("window misses {q}"))))
        .collect::<Result<_, _>>()?;
    let d = mat.principal_minor(ring, &idx);
    let lead = d.coeffs[h_t1 as usize].clone();
    Ok((d, lead))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dwork::ef::expand_poly;
    use crate::dwork::ring::ZpM;
    use crate::dwork::PolyF;
    use crate::hodge::{ihp, Frobenius};

    fn setup(d: i64, p: u64, n: usize, seed: u64) -> (Triangle, ZpM, DworkMatrix<u64>) {
        let tri = Triangle::isosceles(d).unwrap();
        let r = ZpM::new(p, 2).unwrap();
        let f = PolyF::random_family(&tri, p, seed, 1).remove(0);
        let ex = expand_poly(&tri, &f, &r, n, n as i64).unwrap();
        let mat = DworkMatrix::build(&tri, p, &ex, &r, truncation_cap(&tri, p, n)).unwrap();
        (tri, r, mat)
    }

    #[test]
    fn minor_matches_leibniz_on_small_block() {
        let (_, r, mat) = setup(2, 7, 8, 3);
        let idx = [0usize, 1, 2];
        let got = mat.principal_minor(&r, &idx);
        let perms = [[0, 1, 2, 0], [0, 2, 1, 1], [1, 0, 2, 1], [1, 2, 0, 0], [2, 0, 1, 0], [2, 1, 0, 1]];
        let mut want = TruncSeries::zero(&r, 8);
        for pm in perms {
            let mut prod = TruncSeries::one(&r, 8);
            for c in 0..3 {
                prod = prod.mul(&r, &mat.entries[idx[pm[c]]][idx[c]]);
            }
            want = if pm[3] == 0 { want.add(&r, &prod) } else { want.sub(&r, &prod) };
        }
        assert_eq!(got, want);
    }

    #[test]
    fn char_series_respects_ihp() {
        let (tri, r, mat) = setup(3, 7, 20, 5);
        let cs = char_series(&tri, 7, &mat, &r, 8);
        assert_eq!(cs.u[0], TruncSeries::one(&r, 20));
        let frob = Frobenius::new(&tri, 7);
        let ih = ihp(&frob, 8);
        for (l, v) in cs.valuations.iter().enumerate() {
            if let Some(x) = v.finite() {
                assert!(x >= ih.prefix_h[l], "u_{l}: {x} < {}", ih.prefix_h[l]);
            }
        }
        let (hull, flagged) = newton_polygon_c(&cs.valuations, 1);
        assert_eq!(hull.vertices[0], (0, Q64::from_integer(0)));
        assert!(flagged.len() + hull.vertices.len() <= 9);
    }

    #[test]
    fn wider_window_changes_nothing() {
        let (tri, r, mat) = setup(2, 7, 10, 9);
        let f = PolyF::random_family(&tri, 7, 9, 1).remove(0);
        let ex = expand_poly(&tri, &f, &r, 10, 10).unwrap();
        let wide = DworkMatrix::build(&tri, 7, &ex, &r, truncation_cap(&tri, 7, 10) + tri.det()).unwrap();
        let a = char_series(&tri, 7, &mat, &r, 6);
        let b = char_series(&tri, 7, &wide, &r, 6);
        assert_eq!(a.u, b.u);
    }

    #[test]
    fn det_t1_lower_bound() {
        let (tri, r, mat) = setup(3, 7, 20, 5);
        let (d, _) = det_t1(&tri, &mat, &r, 16).unwrap();
        assert!(d.valuation(&r).lower_bound() >= 16);
        assert!(det_t1(&tri, &mat, &r, 25).is_err());
    }
}
