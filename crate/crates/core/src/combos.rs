//! Combos and special bijections for the isosceles triangle.
//!
//! A combo pairs a permutation `τ` of `T_1` with an expansion of every
//! arrow `pτ(P) - P` over the labelled points of `T'_1`.  The special ones
//! are in one-to-one correspondence with bijections `β: Y_0 -> m(Y_0)`
//! whose difference vectors lie in `T'_1`, and the leading monomials they
//! produce are grouped by the multiset of those vectors.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dwork::artin_hasse::artin_hasse;
use crate::dwork::ef::expand_poly;
use crate::dwork::{det_t1, truncation_cap, CoeffRing, DworkError, DworkMatrix, PolyF, ZpM};
use crate::hodge::{h_min, Assignment, Frobenius, HodgeError};
use crate::lattice::iso::{anti_diagonal, hypothesis_holds, mirror, FundamentalCell, RegionSpec, ResidueData, SplitT1};
use crate::lattice::{LatticeError, Point, Triangle};
use crate::polygon::qser;

#[derive(Debug, Error)]
pub enum CombosError {
    #[error("enumeration refused: permanent bound {bound:.3e} exceeds the budget {budget}")]
    Budget { bound: f64, budget: u64 },
    #[error("not a special bijection: {0}")]
    NotSpecial(String),
    #[error("combo expansion does not sum to the arrow at source {0}")]
    Infeasible(Point),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Hodge(#[from] HodgeError),
    #[error(transparent)]
    Dwork(#[from] DworkError),
}

/// `T'_1` labelled `Q_1 = (d,0)`, `Q_2 = (0,d)`, then the rest in canonical order.
pub fn label_t1prime(tri: &Triangle) -> Result<Vec<Point>, LatticeError> {
    let d = tri.require_isosceles()?;
    let (q1, q2) = (Point::new(d, 0), Point::new(0, d));
    let mut labels = vec![q1, q2];
    labels.extend(tri.points_below(1, true).into_iter().filter(|&q| q != q1 && q != q2));
    Ok(labels)
}

/// Parity of a permutation given as an index map.
pub fn permutation_sign(map: &[usize]) -> i8 {
    let mut seen = vec![false; map.len()];
    let mut sign = 1i8;
    for start in 0..map.len() {
        let mut len = 0;
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            j = map[j];
            len += 1;
        }
        if len > 0 && len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// A combo `(τ, b)`: `tau` maps `sources[i]` to `targets[map[i]]`, and
/// `b[i]` holds the label exponents expanding `p τ(P) - P` for `P = sources[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Combo {
    pub tau: Assignment,
    pub b: Vec<Vec<u32>>,
}

impl Combo {
    pub fn degree(&self) -> i64 {
        self.b.iter().flatten().map(|&x| x as i64).sum()
    }

    pub fn sign(&self) -> i8 {
        permutation_sign(&self.tau.map)
    }

    /// Total exponent of each label.
    pub fn exponents(&self) -> Vec<u32> {
        let len = self.b.first().map_or(0, Vec::len);
        let mut e = vec![0u32; len];
        for row in &self.b {
            for (acc, &x) in e.iter_mut().zip(row) {
                *acc += x;
            }
        }
        e
    }

    /// The first source whose expansion misses its arrow, if any.
    pub fn first_infeasible(&self, p: i64, labels: &[Point]) -> Option<Point> {
        self.tau.pairs().zip(&self.b).find_map(|((src, dst), row)| {
            let sum = row.iter().zip(labels).fold(Point::ORIGIN, |acc, (&c, &q)| acc + (c as i64) * q);
            (sum != p * dst - src).then_some(src)
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonomialTerm {
    pub exponents: Vec<u32>,
    #[serde(serialize_with = "qser::big")]
    pub coefficient: BigRational,
}

/// A bijection `β: Y_0 -> m(Y_0)`, stored as `map[i]` = index in `m(Y_0)` of `β(y0[i])`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpecialBijection {
    pub pairs: Vec<(Point, Point)>,
    #[serde(skip)]
    pub map: Vec<usize>,
    pub sign: i8,
    /// The multiset `{P - β(P)}`, sorted.
    pub vectors: Vec<Point>,
}

/// Everything the special-bijection machinery needs at a fixed `(d, p)`.
#[derive(Clone, Debug)]
pub struct SpecialSetup {
    pub tri: Triangle,
    pub d: i64,
    pub p: i64,
    pub split: SplitT1,
    pub labels: Vec<Point>,
    pub t1: Vec<Point>,
    label_index: HashMap<Point, usize>,
    t1_index: HashMap<Point, usize>,
    y0_index: HashMap<Point, usize>,
    my0_index: HashMap<Point, usize>,
    /// For each `y0[i]`, the point `Q` of `T_{1,2}` with `(pQ)% = y0[i]`.
    y0_source: Vec<Point>,
    candidates: Vec<Vec<usize>>,
}

fn index_of(pts: &[Point]) -> HashMap<Point, usize> {
    pts.iter().enumerate().map(|(i, &q)| (q, i)).collect()
}

impl SpecialSetup {
    pub fn new(d: i64, p: i64) -> Result<Self, CombosError> {
        let tri = Triangle::isosceles(d)?;
        let split = SplitT1::new(&tri, p)?;
        let labels = label_t1prime(&tri)?;
        let t1 = tri.points_below(1, false);
        let y0_index = index_of(&split.y0);
        let mut y0_source = vec![Point::ORIGIN; split.y0.len()];
        for &q in &split.t12 {
            y0_source[y0_index[&tri.residue(p * q)]] = q;
        }
        let candidates = split
            .y0
            .iter()
            .map(|&a| (0..split.my0.len()).filter(|&j| Self::in_t1prime_d(d, a - split.my0[j])).collect())
            .collect();
        Ok(SpecialSetup {
            label_index: index_of(&labels),
            t1_index: index_of(&t1),
            my0_index: index_of(&split.my0),
            y0_index,
            tri,
            d,
            p,
            split,
            labels,
            t1,
            y0_source,
            candidates,
        })
    }

    fn in_t1prime_d(d: i64, v: Point) -> bool {
        v.x >= 0 && v.y >= 0 && v.x + v.y <= d
    }

    pub fn in_t1prime(&self, v: Point) -> bool {
        Self::in_t1prime_d(self.d, v)
    }

    pub fn y0(&self) -> &[Point] {
        &self.split.y0
    }

    pub fn my0(&self) -> &[Point] {
        &self.split.my0
    }

    pub fn y0_position(&self, q: Point) -> Option<usize> {
        self.y0_index.get(&q).copied()
    }

    pub fn my0_position(&self, q: Point) -> Option<usize> {
        self.my0_index.get(&q).copied()
    }

    /// Upper bounds for the `Q_1` and `Q_2` exponent sums over `T_1`.
    pub fn max_q_exponents(&self) -> (u32, u32) {
        let (p, d) = (self.p, self.d);
        let sx: i64 = self.t1.iter().map(|q| p * q.x / d).sum();
        let sy: i64 = self.t1.iter().map(|q| p * q.y / d).sum();
        (sx as u32, sy as u32)
    }

    /// `∏ floor(pP_x/d)! floor(pP_y/d)!` over `T_1`: the common denominator of special monomials.
    pub fn factorial_denominator(&self) -> BigInt {
        let (p, d) = (self.p, self.d);
        self.t1
            .iter()
            .map(|q| factorial((p * q.x / d) as u32) * factorial((p * q.y / d) as u32))
            .product()
    }

    pub fn h_t1(&self) -> i64 {
        h_min(&Frobenius::new(&self.tri, self.p), &self.t1)
    }

    /// Validate an index map and wrap it with its sign and vectors.
    pub fn bijection(&self, map: Vec<usize>) -> Result<SpecialBijection, CombosError> {
        let (y0, my0) = (self.y0(), self.my0());
        if map.len() != y0.len() {
            return Err(CombosError::NotSpecial(format!("{} images for {} points", map.len(), y0.len())));
        }
        let mut hit = vec![false; my0.len()];
        for (i, &j) in map.iter().enumerate() {
            if j >= my0.len() || std::mem::replace(&mut hit[j], true) {
                return Err(CombosError::NotSpecial(format!("image of {} repeats or is out of range", y0[i])));
            }
            if !self.in_t1prime(y0[i] - my0[j]) {
                return Err(CombosError::NotSpecial(format!("{} - {} is not in T'_1", y0[i], my0[j])));
            }
        }
        let pairs: Vec<(Point, Point)> = map.iter().enumerate().map(|(i, &j)| (y0[i], my0[j])).collect();
        let mut vectors: Vec<Point> = pairs.iter().map(|&(a, b)| a - b).collect();
        vectors.sort();
        let sign = self.sign_of(&map);
        Ok(SpecialBijection { pairs, map, sign, vectors })
    }

    pub fn from_pairs(&self, pairs: &[(Point, Point)]) -> Result<SpecialBijection, CombosError> {
        let mut map = vec![usize::MAX; self.y0().len()];
        for &(a, b) in pairs {
            let i = self.y0_position(a).ok_or_else(|| CombosError::NotSpecial(format!("{a} is not in Y_0")))?;
            let j = self.my0_position(b).ok_or_else(|| CombosError::NotSpecial(format!("{b} is not in m(Y_0)")))?;
            map[i] = j;
        }
        self.bijection(map)
    }

    /// Sign of `m∘β` as a permutation of `Y_0`.
    pub fn sign_of(&self, map: &[usize]) -> i8 {
        let perm: Vec<usize> = map.iter().map(|&j| self.y0_index[&mirror(self.d, self.my0()[j])]).collect();
        permutation_sign(&perm)
    }

    /// `β ↦ m∘β^{-1}∘m`; it preserves the vector multiset.
    pub fn conjugate(&self, b: &SpecialBijection) -> Result<SpecialBijection, CombosError> {
        let mut inverse = vec![0usize; b.map.len()];
        for (i, &j) in b.map.iter().enumerate() {
            inverse[j] = i;
        }
        let map = (0..b.map.len())
            .map(|i| {
                let mp = mirror(self.d, self.y0()[i]);
                let src = self.y0()[inverse[self.my0_index[&mp]]];
                self.my0_index[&mirror(self.d, src)]
            })
            .collect();
        self.bijection(map)
    }

    /// Bregman's bound on the number of perfect matchings.
    pub fn permanent_bound(&self) -> f64 {
        self.candidates
            .iter()
            .map(|c| {
                let r = c.len();
                if r == 0 {
                    f64::NEG_INFINITY
                } else {
                    (1..=r).map(|k| (k as f64).ln()).sum::<f64>() / r as f64
                }
            })
            .sum::<f64>()
            .exp()
    }

    fn search_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.y0().len()).collect();
        order.sort_by_key(|&i| (self.candidates[i].len(), i));
        order
    }

    /// Every special bijection, or a refusal when the permanent bound exceeds `budget`.
    pub fn special_bijections(&self, budget: u64) -> Result<Vec<SpecialBijection>, CombosError> {
        let n = self.y0().len();
        if n == 0 {
            return Ok(vec![self.bijection(Vec::new())?]);
        }
        let bound = self.permanent_bound();
        if bound > budget as f64 {
            return Err(CombosError::Budget { bound, budget });
        }
        let order = self.search_order();
        let words = self.my0().len().div_ceil(64);
        let first = order[0];
        let branches: Vec<Vec<Vec<usize>>> = self.candidates[first]
            .par_iter()
            .map(|&t| {
                let mut search = MatchingSearch {
                    order: &order,
                    candidates: &self.candidates,
                    used: vec![0u64; words],
                    current: vec![usize::MAX; n],
                    dead: HashSet::new(),
                    out: Vec::new(),
                };
                search.used[t / 64] |= 1 << (t % 64);
                search.current[first] = t;
                search.run(1);
                search.out
            })
            .collect();
        let mut maps: Vec<Vec<usize>> = branches.into_iter().flatten().collect();
        maps.sort();
        maps.into_iter().map(|m| self.bijection(m)).collect()
    }

    /// All bijections whose vector multiset equals `vectors`.
    pub fn related(&self, vectors: &[Point]) -> Result<Vec<SpecialBijection>, CombosError> {
        let mut remaining: BTreeMap<Point, usize> = BTreeMap::new();
        for &v in vectors {
            *remaining.entry(v).or_default() += 1;
        }
        let kinds: Vec<Point> = remaining.keys().copied().collect();
        let mut counts: Vec<usize> = remaining.values().copied().collect();
        let order = self.search_order();
        let mut used = vec![false; self.my0().len()];
        let mut current = vec![usize::MAX; self.y0().len()];
        let mut out = Vec::new();
        self.related_step(&order, 0, &kinds, &mut counts, &mut used, &mut current, &mut out);
        out.sort();
        out.into_iter().map(|m| self.bijection(m)).collect()
    }

    #[allow(clippy::too_many_arguments)]
    fn related_step(
        &self,
        order: &[usize],
        depth: usize,
        kinds: &[Point],
        counts: &mut [usize],
        used: &mut [bool],
        current: &mut [usize],
        out: &mut Vec<Vec<usize>>,
    ) {
        if depth == order.len() {
            out.push(current.to_vec());
            return;
        }
        let i = order[depth];
        for (k, &v) in kinds.iter().enumerate() {
            if counts[k] == 0 {
                continue;
            }
            let Some(j) = self.my0_position(self.y0()[i] - v) else { continue };
            if used[j] {
                continue;
            }
            counts[k] -= 1;
            used[j] = true;
            current[i] = j;
            self.related_step(order, depth + 1, kinds, counts, used, current, out);
            counts[k] += 1;
            used[j] = false;
        }
    }

    /// The special combo of `β`: `τ^{-1}(P) = (pP)%` on `T_{1,1}` and
    /// `τ^{-1}(P) = β((pP)%)` on `T_{1,2}`.
    pub fn combo_of(&self, b: &SpecialBijection) -> Result<Combo, CombosError> {
        let (p, d) = (self.p, self.d);
        let n = self.t1.len();
        let mut map = vec![usize::MAX; n];
        let mut rows = vec![vec![0u32; self.labels.len()]; n];
        for (pi, &q) in self.t1.iter().enumerate() {
            let r = self.tri.residue(p * q);
            let src = match self.y0_position(r) {
                Some(i) => self.my0()[b.map[i]],
                None => r,
            };
            let si = self.t1_index[&src];
            map[si] = pi;
            rows[si][0] = (p * q.x / d) as u32;
            rows[si][1] = (p * q.y / d) as u32;
            let v = r - src;
            if v != Point::ORIGIN {
                rows[si][self.label_index[&v]] += 1;
            }
        }
        let tau = Assignment::new(self.t1.clone(), self.t1.clone(), map)?;
        Ok(Combo { tau, b: rows })
    }

    /// Inverse of [`Self::combo_of`]: `β(P) = τ^{-1}(Q)` where `(pQ)% = P`.
    pub fn bijection_of(&self, c: &Combo) -> Result<SpecialBijection, CombosError> {
        if let Some(src) = c.first_infeasible(self.p, &self.labels) {
            return Err(CombosError::Infeasible(src));
        }
        let e = c.exponents();
        if (e[0], e[1]) != self.max_q_exponents() {
            return Err(CombosError::NotSpecial(format!(
                "Q_1, Q_2 exponents {:?} are not maximal {:?}",
                (e[0], e[1]),
                self.max_q_exponents()
            )));
        }
        let mut tau_inv = vec![0usize; c.tau.map.len()];
        for (i, &j) in c.tau.map.iter().enumerate() {
            tau_inv[j] = i;
        }
        let map = self
            .y0_source
            .iter()
            .map(|q| {
                let src = c.tau.sources[tau_inv[self.t1_index[q]]];
                self.my0_position(src)
                    .ok_or_else(|| CombosError::NotSpecial(format!("τ^-1({q}) = {src} is not in m(Y_0)")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.bijection(map)
    }

    /// `sgn(τ) ∏ Q_i^{E_i} / ∏ b!`.
    pub fn monomial(&self, c: &Combo) -> MonomialTerm {
        let denom: BigInt = c.b.iter().flatten().map(|&x| factorial(x)).product();
        let coefficient = BigRational::new(BigInt::from(c.sign()), denom);
        MonomialTerm { exponents: c.exponents(), coefficient }
    }
}

struct MatchingSearch<'a> {
    order: &'a [usize],
    candidates: &'a [Vec<usize>],
    used: Vec<u64>,
    current: Vec<usize>,
    /// Used-target sets from which no completion exists.
    dead: HashSet<Vec<u64>>,
    out: Vec<Vec<usize>>,
}

impl MatchingSearch<'_> {
    fn run(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            self.out.push(self.current.clone());
            return true;
        }
        if self.dead.contains(&self.used) {
            return false;
        }
        let i = self.order[depth];
        let mut found = false;
        for &t in &self.candidates[i] {
            let (w, bit) = (t / 64, 1u64 << (t % 64));
            if self.used[w] & bit != 0 {
                continue;
            }
            self.used[w] |= bit;
            self.current[i] = t;
            found |= self.run(depth + 1);
            self.used[w] &= !bit;
        }
        if !found {
            self.dead.insert(self.used.clone());
        }
        found
    }
}

/// One monomial of `ṽ^sp` with the number of bijections producing it.
#[derive(Clone, Debug, Serialize)]
pub struct SpecialTerm {
    pub exponents: Vec<u32>,
    #[serde(serialize_with = "qser::big")]
    pub coefficient: BigRational,
    pub contributors: usize,
    pub plus: usize,
    pub minus: usize,
}

/// Sum the monomials of the special combos of `bijections`.
pub fn v_special(setup: &SpecialSetup, bijections: &[SpecialBijection]) -> Result<Vec<SpecialTerm>, CombosError> {
    let mut terms: BTreeMap<Vec<u32>, SpecialTerm> = BTreeMap::new();
    for b in bijections {
        let m = setup.monomial(&setup.combo_of(b)?);
        let t = terms.entry(m.exponents.clone()).or_insert_with(|| SpecialTerm {
            exponents: m.exponents,
            coefficient: BigRational::zero(),
            contributors: 0,
            plus: 0,
            minus: 0,
        });
        t.coefficient += m.coefficient;
        t.contributors += 1;
        if b.sign > 0 {
            t.plus += 1;
        } else {
            t.minus += 1;
        }
    }
    Ok(terms.into_values().collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct RelatednessClass {
    pub vector_multiset: Vec<[i64; 2]>,
    pub size: usize,
    pub sign_balance: i64,
    #[serde(serialize_with = "qser::big")]
    pub coefficient: BigRational,
    /// Positions of the members in the input list.
    #[serde(skip)]
    pub members: Vec<usize>,
}

/// Partition by vector multiset; the coefficient is the sum of the members' monomial coefficients.
pub fn relatedness_classes(
    setup: &SpecialSetup,
    bijections: &[SpecialBijection],
) -> Result<Vec<RelatednessClass>, CombosError> {
    let mut classes: BTreeMap<Vec<Point>, RelatednessClass> = BTreeMap::new();
    for (idx, b) in bijections.iter().enumerate() {
        let coeff = setup.monomial(&setup.combo_of(b)?).coefficient;
        let c = classes.entry(b.vectors.clone()).or_insert_with(|| RelatednessClass {
            vector_multiset: b.vectors.iter().map(|v| [v.x, v.y]).collect(),
            size: 0,
            sign_balance: 0,
            coefficient: BigRational::zero(),
            members: Vec::new(),
        });
        c.size += 1;
        c.sign_balance += b.sign as i64;
        c.coefficient += coeff;
        c.members.push(idx);
    }
    Ok(classes.into_values().collect())
}

/// Every permutation of `pts` attaining the minimal `h`, as index maps.
pub fn optimal_permutations(frob: &Frobenius<'_>, pts: &[Point]) -> Vec<Vec<usize>> {
    let n = pts.len();
    let cost: Vec<Vec<i64>> = pts.iter().map(|&a| pts.iter().map(|&b| frob.cost(a, b)).collect()).collect();
    let target = h_min(frob, pts);
    let row_min: Vec<i64> = cost.iter().map(|r| *r.iter().min().unwrap_or(&0)).collect();
    let mut suffix = vec![0i64; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + row_min[i];
    }
    fn step(
        i: usize,
        acc: i64,
        target: i64,
        cost: &[Vec<i64>],
        suffix: &[i64],
        used: &mut [bool],
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if acc + suffix[i] > target {
            return;
        }
        if i == cost.len() {
            out.push(cur.clone());
            return;
        }
        for j in 0..cost.len() {
            if !used[j] {
                used[j] = true;
                cur.push(j);
                step(i + 1, acc + cost[i][j], target, cost, suffix, used, cur, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    step(0, 0, target, &cost, &suffix, &mut vec![false; n], &mut Vec::new(), &mut out);
    out
}

/// Nonnegative `b` over `labels` with `Σ b_i Q_i = r` and `Σ b_i = count`.
pub fn expansions(labels: &[Point], r: Point, count: u32) -> Vec<Vec<u32>> {
    fn step(labels: &[Point], k: usize, r: Point, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k == labels.len() {
            if r == Point::ORIGIN && left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let q = labels[k];
        let mut t = 0u32;
        loop {
            let rest = r - (t as i64) * q;
            if rest.x < 0 || rest.y < 0 || t > left {
                break;
            }
            cur[k] = t;
            step(labels, k + 1, rest, left - t, cur, out);
            if q == Point::ORIGIN {
                break;
            }
            t += 1;
        }
        cur[k] = 0;
    }
    let mut out = Vec::new();
    step(labels, 0, r, count, &mut vec![0; labels.len()], &mut out);
    out
}

/// The combo-sum side of the leading coefficient.
#[derive(Clone, Debug)]
pub struct ComboFormula<E> {
    pub value: E,
    pub permutations: usize,
    pub combos: u128,
}

/// `Σ sgn(τ) ∏_P Σ_b ∏_i E_{b_i} â_i^{b_i}` over optimal combos, where `E_j`
/// are the Artin–Hasse coefficients.  This equals the `T^{h(T_1)}` coefficient
/// of `det` on the `T_1` block.
pub fn combo_formula_value<R: CoeffRing>(tri: &Triangle, f: &PolyF, ring: &R) -> Result<ComboFormula<R::Elem>, CombosError> {
    let p = ring.p() as i64;
    f.check_hull(tri)?;
    let labels: Vec<Point> = label_t1prime(tri)?.into_iter().filter(|&q| q != Point::ORIGIN).collect();
    let lifted = f.lift(ring);
    let coeff: Vec<R::Elem> = labels.iter().map(|q| lifted.get(q).cloned().unwrap_or_else(|| ring.zero())).collect();
    let t1 = tri.points_below(1, false);
    let frob = Frobenius::new(tri, p);
    let perms = optimal_permutations(&frob, &t1);
    let ah = artin_hasse(&ZpM::new(ring.p(), ring.precision())?, (p as usize) * 4)?;
    let mut cache: HashMap<Point, (R::Elem, u128)> = HashMap::new();
    let mut leading = |r: Point| -> Result<(R::Elem, u128), CombosError> {
        if let Some(v) = cache.get(&r) {
            return Ok(v.clone());
        }
        let count = tri.weight(r).ceil() as u32;
        let exps = expansions(&labels, r, count);
        let mut acc = ring.zero();
        for b in &exps {
            let mut term = ring.one();
            for (i, &e) in b.iter().enumerate() {
                if e > 0 {
                    let c = *ah.coeffs.get(e as usize).ok_or(DworkError::Precision("Artin–Hasse length".into()))?;
                    term = ring.mul(&term, &ring.mul(&ring.from_int(c as i64), &ring.pow(&coeff[i], e as u64)));
                }
            }
            acc = ring.add(&acc, &term);
        }
        let v = (acc, exps.len() as u128);
        cache.insert(r, v.clone());
        Ok(v)
    };
    let mut value = ring.zero();
    let mut combos = 0u128;
    for map in &perms {
        let mut term = if permutation_sign(map) > 0 { ring.one() } else { ring.from_int(-1) };
        let mut count = 1u128;
        for (i, &j) in map.iter().enumerate() {
            let (l, c) = leading(frob.arrow(t1[i], t1[j]))?;
            term = ring.mul(&term, &l);
            count *= c;
        }
        value = ring.add(&value, &term);
        combos += count;
    }
    Ok(ComboFormula { value, permutations: perms.len(), combos })
}

/// Polynomial coefficients as `[[x, y], coords]` pairs, for JSON.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub trial: usize,
    pub coefficients: Vec<([i64; 2], Vec<u64>)>,
    pub leading_mod_p: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoincidenceReport {
    pub d: i64,
    pub p: i64,
    pub seed: u64,
    pub trials: usize,
    pub h_t1: i64,
    pub t_precision: usize,
    pub nonzero: usize,
    pub rate: String,
    pub witness: Option<Witness>,
    /// Probability bound `deg/p` for a nonzero polynomial to vanish at a random point.
    pub schwartz_zippel: String,
    pub verdict: String,
}

/// Sample `f` over `F_p` and look for a nonzero `T^{h(T_1)}` coefficient of `det` on `T_1`, mod `p`.
pub fn generic_coincidence_test(d: i64, p: i64, trials: usize, seed: u64) -> Result<CoincidenceReport, CombosError> {
    let tri = Triangle::isosceles(d)?;
    tri.check_prime(p)?;
    let h = h_min(&Frobenius::new(&tri, p), &tri.points_below(1, false));
    let n = (h + 2) as usize;
    let ring = ZpM::new(p as u64, 2)?;
    let family = PolyF::random_family(&tri, p as u64, seed, trials);
    let leads: Vec<u64> = family
        .par_iter()
        .map(|f| -> Result<u64, CombosError> {
            let ex = expand_poly(&tri, f, &ring, n, n as i64)?;
            let mat = DworkMatrix::build(&tri, p as u64, &ex, &ring, truncation_cap(&tri, p as u64, n))?;
            let (_, lead) = det_t1(&tri, &mat, &ring, h)?;
            Ok(lead % p as u64)
        })
        .collect::<Result<_, _>>()?;
    let nonzero = leads.iter().filter(|&&c| c != 0).count();
    let witness = leads.iter().position(|&c| c != 0).map(|i| Witness {
        trial: i,
        coefficients: family[i].coeffs.iter().map(|(q, c)| ([q.x, q.y], c.clone())).collect(),
        leading_mod_p: leads[i],
    });
    let verdict = if witness.is_some() { "nonvanishing" } else { "inconclusive" };
    let sz = if h < p { format!("{h}/{p}") } else { format!("{h}/{p} (vacuous, degree exceeds p)") };
    Ok(CoincidenceReport {
        d,
        p,
        seed,
        trials,
        h_t1: h,
        t_precision: n,
        nonzero,
        rate: format!("{nonzero}/{trials}"),
        witness,
        schwartz_zippel: sz,
        verdict: verdict.into(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CountRow {
    pub index: i64,
    pub enumerated: i64,
    pub formula: i64,
    pub points: Vec<Point>,
    pub matches: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaCheck {
    pub pairs: Vec<(Point, Option<Point>)>,
    pub bijective: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct C0Distribution {
    pub d: i64,
    pub p: i64,
    pub residue: ResidueData,
    pub in_hypothesis: bool,
    pub cell_size_matches: bool,
    pub rows: Vec<CountRow>,
    pub gamma: GammaCheck,
}

impl C0Distribution {
    pub fn all_match(&self) -> bool {
        self.rows.iter().all(|r| r.matches)
    }
}

/// `#((W_{2d-k} ∪ W_{2d-p0-k}) ∩ C_0)` for `0 < k <= p0`, against `p0-1` if
/// `k = p0` and `(k d2 % p0) - 1` otherwise; plus the map `γ: A -> C_0`.
pub fn c0_distribution_counts(d: i64, p: i64) -> Result<C0Distribution, CombosError> {
    let tri = Triangle::isosceles(d)?;
    let split = SplitT1::new(&tri, p)?;
    let res = ResidueData::new(d, p);
    let p0 = res.p0;
    if p0 < 2 {
        return Err(LatticeError::Range(format!("p mod d = {p0} < 2")).into());
    }
    let cell = FundamentalCell::new(&tri, &split);
    let rows = (1..=p0)
        .map(|k| {
            let points: Vec<Point> = cell
                .c0
                .iter()
                .copied()
                .filter(|&q| anti_diagonal(q) == 2 * d - k || anti_diagonal(q) == 2 * d - p0 - k)
                .collect();
            let formula = if k == p0 { p0 - 1 } else { (k * res.d2) % p0 - 1 };
            let enumerated = points.len() as i64;
            CountRow { index: k, enumerated, formula, points, matches: enumerated == formula }
        })
        .collect();

    let mut pairs = Vec::new();
    for i in 1..p0 {
        for j in 1..=p0 - i {
            let a = Point::new(i * res.d1, j * res.d1);
            let r = tri.residue(p * a);
            let hits: Vec<Point> = cell
                .c0
                .iter()
                .copied()
                .filter(|&c| {
                    let v = c - r;
                    v.x >= 0 && v.y >= 0 && v.x % p0 == 0 && v.y % p0 == 0
                })
                .collect();
            pairs.push((a, if hits.len() == 1 { Some(hits[0]) } else { None }));
        }
    }
    let mut images: Vec<Point> = pairs.iter().filter_map(|&(_, g)| g).collect();
    images.sort();
    images.dedup();
    let mut c0_sorted = cell.c0.clone();
    c0_sorted.sort();
    let bijective = pairs.iter().all(|(_, g)| g.is_some()) && images == c0_sorted;
    Ok(C0Distribution {
        d,
        p,
        residue: res,
        in_hypothesis: hypothesis_holds(d, p),
        cell_size_matches: cell.size_matches,
        rows,
        gamma: GammaCheck { pairs, bijective },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct K2Distribution {
    pub d: i64,
    pub p: i64,
    pub residue: ResidueData,
    pub in_hypothesis: bool,
    pub rows: Vec<CountRow>,
}

impl K2Distribution {
    pub fn all_match(&self) -> bool {
        self.rows.iter().all(|r| r.matches)
    }
}

/// `#(K_2^0 ∩ W_{d-i})` for `1 <= i < p0`, against `p0-1` if `i ≡ d0` and
/// `(i(p0-d2)) % p0` otherwise.  Rows are computed even outside the
/// hypothesis; `in_hypothesis` says whether the formula is claimed there.
pub fn k2_distribution_counts(d: i64, p: i64) -> Result<K2Distribution, CombosError> {
    let tri = Triangle::isosceles(d)?;
    let split = SplitT1::new(&tri, p)?;
    let res = ResidueData::new(d, p);
    let p0 = res.p0;
    let regions = RegionSpec::new(d, p);
    let k20: Vec<Point> = split.my0.iter().copied().filter(|&q| regions.in_k2(q)).collect();
    let rows = if p0 < 2 {
        Vec::new()
    } else {
        (1..p0)
            .map(|i| {
                let points: Vec<Point> = k20.iter().copied().filter(|&q| anti_diagonal(q) == d - i).collect();
                let formula = if i % p0 == res.d0 % p0 { p0 - 1 } else { (i * (p0 - res.d2)) % p0 };
                let enumerated = points.len() as i64;
                CountRow { index: i, enumerated, formula, points, matches: enumerated == formula }
            })
            .collect()
    };
    Ok(K2Distribution { d, p, residue: res, in_hypothesis: hypothesis_holds(d, p), rows })
}

#[cfg(test)]
mod tests {
    use num_traits::Signed;

    use super::*;

    fn pt(x: i64, y: i64) -> Point {
        Point::new(x, y)
    }

    fn example_beta() -> Vec<(Point, Point)> {
        [
            ((2, 6), (1, 2)),
            ((3, 5), (1, 1)),
            ((3, 6), (2, 1)),
            ((5, 3), (4, 2)),
            ((5, 6), (1, 5)),
            ((6, 2), (5, 1)),
            ((6, 3), (4, 1)),
            ((6, 5), (1, 4)),
            ((6, 6), (2, 4)),
        ]
        .iter()
        .map(|&((a, b), (c, e))| (pt(a, b), pt(c, e)))
        .collect()
    }

    #[test]
    fn labels() {
        let t2 = Triangle::isosceles(2).unwrap();
        assert_eq!(label_t1prime(&t2).unwrap().len(), 6);
        let t7 = Triangle::isosceles(7).unwrap();
        let l = label_t1prime(&t7).unwrap();
        assert_eq!((l.len(), l[0], l[1]), (36, pt(7, 0), pt(0, 7)));
        assert_eq!(l, label_t1prime(&t7).unwrap());
    }

    #[test]
    fn ordinary_case_has_one_empty_bijection() {
        let s = SpecialSetup::new(5, 11).unwrap();
        let all = s.special_bijections(1000).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].sign, 1);
        let terms = v_special(&s, &all).unwrap();
        assert_eq!(terms.len(), 1);
        let t = &terms[0];
        assert!(t.exponents[2..].iter().all(|&e| e == 0));
        let (q1, q2) = s.max_q_exponents();
        assert_eq!((t.exponents[0], t.exponents[1]), (q1, q2));
        assert_eq!(t.coefficient.abs(), BigRational::new(BigInt::one(), s.factorial_denominator()));
        let classes = relatedness_classes(&s, &all).unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].size, 1);
    }

    #[test]
    fn example_bijection_is_enumerated() {
        let s = SpecialSetup::new(7, 17).unwrap();
        let ex = s.from_pairs(&example_beta()).unwrap();
        let all = s.special_bijections(1 << 20).unwrap();
        assert!(all.iter().any(|b| b.map == ex.map));
        for b in &all {
            assert!(b.vectors.iter().all(|v| v.x >= 0 && v.y >= 0 && v.x + v.y <= 7));
        }
    }

    #[test]
    fn correspondence_is_involutive_and_signs_agree() {
        let s = SpecialSetup::new(7, 17).unwrap();
        let h = s.h_t1();
        let (q1, q2) = s.max_q_exponents();
        for b in s.special_bijections(1 << 20).unwrap() {
            let c = s.combo_of(&b).unwrap();
            assert_eq!(c.first_infeasible(s.p, &s.labels), None);
            assert_eq!(c.degree(), h);
            let e = c.exponents();
            assert_eq!((e[0], e[1]), (q1, q2));
            assert!(c.b.iter().flatten().all(|&x| (x as i64) < s.p));
            assert_eq!(s.bijection_of(&c).unwrap(), b);
            assert_eq!(c.sign(), b.sign);
        }
    }

    #[test]
    fn classes_are_closed_under_mirror_conjugation() {
        let s = SpecialSetup::new(7, 17).unwrap();
        let all = s.special_bijections(1 << 20).unwrap();
        let classes = relatedness_classes(&s, &all).unwrap();
        for b in &all {
            let c = s.conjugate(b).unwrap();
            let mut reflected: Vec<Point> = b.vectors.iter().map(|v| v.swapped()).collect();
            reflected.sort();
            assert_eq!(c.vectors, reflected);
            assert!(all.contains(&c));
        }
        let total: usize = classes.iter().map(|c| c.size).sum();
        assert_eq!(total, all.len());
        for c in &classes {
            let members = s.related(&all[c.members[0]].vectors).unwrap();
            assert_eq!(members.len(), c.size);
        }
    }

    #[test]
    fn monomial_groups_are_relatedness_classes() {
        let s = SpecialSetup::new(7, 17).unwrap();
        let all = s.special_bijections(1 << 20).unwrap();
        let terms = v_special(&s, &all).unwrap();
        let classes = relatedness_classes(&s, &all).unwrap();
        assert_eq!(terms.len(), classes.len());
        let mut a: Vec<usize> = terms.iter().map(|t| t.contributors).collect();
        let mut b: Vec<usize> = classes.iter().map(|c| c.size).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn example_bijection_class() {
        let s = SpecialSetup::new(7, 17).unwrap();
        let all = s.special_bijections(1 << 20).unwrap();
        assert_eq!(all.len(), 12096);
        let classes = relatedness_classes(&s, &all).unwrap();
        assert_eq!(classes.len(), 3251);
        // Class sizes are not all powers of two at these parameters.
        assert!(classes.iter().any(|c| c.size == 40 && c.sign_balance == 40));
        let ex = s.from_pairs(&example_beta()).unwrap();
        let c = classes.iter().find(|c| all[c.members[0]].vectors == ex.vectors).unwrap();
        assert_eq!((ex.sign, c.size, c.sign_balance), (-1, 20, -20));
        let expected = BigRational::new(BigInt::from(-20), s.factorial_denominator());
        assert_eq!(c.coefficient, expected);
        assert!((c.coefficient.denom() % BigInt::from(17)).is_positive());
    }

    #[test]
    fn budget_is_all_or_nothing() {
        let s = SpecialSetup::new(7, 17).unwrap();
        assert!(matches!(s.special_bijections(1), Err(CombosError::Budget { .. })));
    }

    #[test]
    fn expansions_of_small_arrows() {
        let tri = Triangle::isosceles(2).unwrap();
        let labels: Vec<Point> = label_t1prime(&tri).unwrap().into_iter().filter(|&q| q != Point::ORIGIN).collect();
        // (2,2) of weight 2 splits as (2,0)+(0,2) or (1,1)+(1,1).
        let e = expansions(&labels, pt(2, 2), 2);
        assert_eq!(e.len(), 2);
    }

    #[test]
    fn combo_formula_matches_det_t1() {
        let tri = Triangle::isosceles(3).unwrap();
        let ring = ZpM::new(7, 2).unwrap();
        let f = PolyF::random_family(&tri, 7, 11, 1).remove(0);
        let h = 16;
        let ex = expand_poly(&tri, &f, &ring, 18, 18).unwrap();
        let mat = DworkMatrix::build(&tri, 7, &ex, &ring, truncation_cap(&tri, 7, 18)).unwrap();
        let (_, lead) = det_t1(&tri, &mat, &ring, h).unwrap();
        let combo = combo_formula_value(&tri, &f, &ring).unwrap();
        assert_eq!(combo.value, lead);
        assert!(combo.permutations > 0);
    }

    #[test]
    fn c0_counts() {
        let t = c0_distribution_counts(7, 17).unwrap();
        let got: Vec<(i64, i64)> = t.rows.iter().map(|r| (r.enumerated, r.formula)).collect();
        assert_eq!(got, vec![(0, 0), (1, 1), (2, 2)]);
        assert_eq!(t.rows[1].points, vec![pt(6, 6)]);
        let mut third = t.rows[2].points.clone();
        third.sort();
        assert_eq!(third, vec![pt(5, 6), pt(6, 5)]);
        assert!(t.gamma.bijective);
        let t = c0_distribution_counts(13, 41).unwrap();
        assert_eq!(t.rows[1].enumerated, 1);
        assert!(t.all_match() && t.gamma.bijective);
    }

    #[test]
    fn c0_counts_outside_hypothesis() {
        let t = c0_distribution_counts(11, 41).unwrap();
        assert!(!t.in_hypothesis && !t.cell_size_matches);
        let bad: Vec<i64> = t.rows.iter().filter(|r| !r.matches).map(|r| r.index).collect();
        assert_eq!(bad, vec![4, 5]);
    }

    #[test]
    fn k2_counts() {
        let t = k2_distribution_counts(13, 41).unwrap();
        assert!(t.in_hypothesis);
        assert_eq!(t.rows.len(), 1);
        assert_eq!((t.rows[0].enumerated, t.rows[0].formula), (1, 1));
        assert!(k2_distribution_counts(7, 29).unwrap().rows.is_empty());
        let out = k2_distribution_counts(7, 17).unwrap();
        assert!(!out.in_hypothesis);
        assert_eq!(out.rows.len(), 2);
    }

    #[test]
    fn coincidence_in_the_ordinary_case() {
        let r = generic_coincidence_test(2, 7, 3, 5).unwrap();
        assert_eq!(r.nonzero, 3);
        assert_eq!(r.verdict, "nonvanishing");
    }
}
