//! The explicit special bijection `β̃ = β̃_1 ∪ s(β̃_2) ∪ β̃_3`.
//!
//! `β̃_1` is a greedy diagonal matching, `β̃_2` sends the leftover heavy
//! points `L_2` into disjoint shifted copies of the region `K_2`, and the
//! rest is completed symmetrically.  Every stage records its own
//! diagnostics; the stated size conditions are reported, never assumed.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::combos::{relatedness_classes, CombosError, SpecialBijection, SpecialSetup};
use crate::lattice::iso::{anti_diagonal, diagonal, hypothesis_holds, mirror, upper_region, RegionSpec, ResidueData};
use crate::lattice::Point;
use crate::polygon::qser;

#[derive(Debug, Error)]
pub enum BetaError {
    #[error("hypothesis p > 2d+1 and p0 < d/6 fails at (d, p) = ({d}, {p}) with L_2 nonempty")]
    Hypothesis { d: i64, p: i64 },
    #[error("construction stuck: {0}")]
    Stuck(String),
    #[error("validation failed at {point}: {reason}")]
    Validation { point: Point, reason: String },
    #[error(transparent)]
    Combos(#[from] CombosError),
}

fn is_diagonal(v: Point) -> bool {
    v.x == v.y
}

/// A pair list `P -> Q` sorted by `P`.
pub type PairList = Vec<(Point, Point)>;

fn sorted_pairs(m: &BTreeMap<Point, Point>) -> PairList {
    m.iter().map(|(&a, &b)| (a, b)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Partition123 {
    pub l1: Vec<Point>,
    pub l2: Vec<Point>,
    pub l3: Vec<Point>,
    /// `L_2 ⊆ K_1`.
    pub l2_in_k1: bool,
    /// `D_k ∩ L_2 = ∅` for `|k| >= p0`.
    pub far_diagonals_clear: bool,
    /// `W[d, 2d-3p0] ∩ L_2 = ∅`.
    pub middle_band_clear: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Beta1 {
    pub pairs: PairList,
    /// `V*(β̃_1)`, sorted.
    pub vstar: Vec<Point>,
    pub partition: Partition123,
    pub symmetric: bool,
    pub eligible: bool,
}

fn eligible(d: i64, a: Point, b: Point) -> bool {
    let v = a - b;
    is_diagonal(v) && v.x > 0 && 2 * anti_diagonal(v) <= 2 * d && (2 * anti_diagonal(a) > 3 * d || 2 * anti_diagonal(b) < d)
}

/// Greedy diagonal stage: repeatedly take an eligible pair of largest
/// `w(P - Q)`, ties by canonical order (reversed when `reverse_ties`).
pub fn build_beta1(setup: &SpecialSetup, reverse_ties: bool) -> Beta1 {
    let (d, p) = (setup.d, setup.p);
    let tri = &setup.tri;
    let mut y0 = setup.y0().to_vec();
    let mut my0 = setup.my0().to_vec();
    if reverse_ties {
        y0.reverse();
        my0.reverse();
    }
    let mut beta: BTreeMap<Point, Point> = BTreeMap::new();
    let mut used: HashSet<Point> = HashSet::new();
    loop {
        let mut best: Option<(i64, Point, Point)> = None;
        for &a in y0.iter().filter(|a| !beta.contains_key(a)) {
            for &b in my0.iter().filter(|b| !used.contains(b)) {
                if eligible(d, a, b) && best.is_none_or(|(w, _, _)| anti_diagonal(a - b) > w) {
                    best = Some((anti_diagonal(a - b), a, b));
                }
            }
        }
        let Some((_, a, b)) = best else { break };
        beta.insert(a, b);
        used.insert(b);
    }
    let symmetric = beta.iter().all(|(&a, &b)| beta.get(&mirror(d, b)) == Some(&mirror(d, a)));
    let eligible_all = beta.iter().all(|(&a, &b)| eligible(d, a, b));
    let mut vstar: Vec<Point> = beta.iter().map(|(&a, &b)| a - b).collect();
    vstar.sort();

    let regions = RegionSpec::new(d, p);
    let p0 = p % d;
    let mut l1: Vec<Point> = beta.keys().copied().collect();
    tri.sort_canonical(&mut l1);
    let rest = setup.y0().iter().copied().filter(|a| !beta.contains_key(a));
    let (l2, l3): (Vec<Point>, Vec<Point>) = rest.partition(|&a| 2 * anti_diagonal(a) > 3 * d);
    let partition = Partition123 {
        l2_in_k1: l2.iter().all(|&a| regions.in_k1(a)),
        far_diagonals_clear: l2.iter().all(|&a| diagonal(a).abs() < p0),
        middle_band_clear: l2.iter().all(|&a| !(d..=2 * d - 3 * p0).contains(&anti_diagonal(a))),
        l1,
        l2,
        l3,
    };
    Beta1 { pairs: sorted_pairs(&beta), vstar, partition, symmetric, eligible: eligible_all }
}

/// Every run of `p0` consecutive points of `Y` on a diagonal holds exactly
/// `floor(p0/2)` points of `Y_0`.  Returns the number of violating runs.
pub fn pigeonhole_violations(setup: &SpecialSetup) -> usize {
    let d = setup.d;
    let p0 = (setup.p % d) as usize;
    if p0 < 2 {
        return 0;
    }
    let y0: HashSet<Point> = setup.y0().iter().copied().collect();
    let mut bad = 0;
    for k in -(d - 1)..d {
        let line: Vec<bool> = (0..d)
            .map(|x| Point::new(x, x + k))
            .filter(|&q| upper_region(d, q))
            .map(|q| y0.contains(&q))
            .collect();
        for w in line.windows(p0) {
            if w.iter().filter(|&&b| b).count() != p0 / 2 {
                bad += 1;
            }
        }
    }
    bad
}

pub fn g1(n: i64, p0: i64) -> i64 {
    let (i, j) = (n / (2 * p0), n % (2 * p0));
    if j <= p0 {
        i * (p0 / 2)
    } else {
        i * (p0 / 2) + j / 2 - (p0 + 1) / 2
    }
}

pub fn g2(n: i64, p0: i64) -> i64 {
    let (i, j) = (n / (2 * p0), n % (2 * p0));
    if j <= p0 {
        i * (p0 / 2) + j / 2
    } else {
        (i + 1) * (p0 / 2)
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct GBoundReport {
    pub g1_windows: usize,
    pub g1_violations: usize,
    pub g2_windows: usize,
    pub g2_violations: usize,
    pub g1_dominates_g2: bool,
}

/// Check the lower bound `g_1` on `m(Y_0)` windows and the upper bound `g_2`
/// on `Y_0` windows along every diagonal.
pub fn g_bound_report(setup: &SpecialSetup) -> GBoundReport {
    let d = setup.d;
    let p0 = setup.p % d;
    let mut r = GBoundReport { g1_dominates_g2: (1..4 * d).all(|k| g1(k + p0, p0) >= g2(k, p0)), ..Default::default() };
    if p0 < 2 {
        return r;
    }
    let y0: HashSet<Point> = setup.y0().iter().copied().collect();
    let my0: HashSet<Point> = setup.my0().iter().copied().collect();
    let on = |set: &HashSet<Point>, k: i64, b1: i64, b2: i64| {
        set.iter().filter(|&&q| diagonal(q) == k && (b1..=b2).contains(&anti_diagonal(q))).count() as i64
    };
    for k in -(d - 1)..d {
        for b1 in 1..d {
            for b2 in b1 + 1..d {
                if k.abs() <= b1 {
                    r.g1_windows += 1;
                    if on(&my0, k, b1, b2) < g1(b2 - b1, p0) {
                        r.g1_violations += 1;
                    }
                }
            }
        }
        for b1 in d + 1..2 * d {
            for b2 in b1 + 1..2 * d {
                r.g2_windows += 1;
                if on(&y0, k, b1, b2) > g2(b2 - b1, p0) {
                    r.g2_violations += 1;
                }
            }
        }
    }
    r
}

/// `G(h, u) = max(2(u-h), 1-u, u)`.
pub fn g_value(h: f64, u: f64) -> f64 {
    (2.0 * (u - h)).max(1.0 - u).max(u)
}

/// The optimizer of `G(h, ·)`: `1/2` for `h >= 1/4`, else `(1+2h)/3`.
pub fn choose_u(h: f64) -> (f64, &'static str) {
    if h >= 0.25 {
        (0.5, "case 1")
    } else {
        ((1.0 + 2.0 * h) / 3.0, "case 2")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UChoice {
    /// `log_{p0}(p0 - d2)`, used by the construction.
    pub h_d2: f64,
    /// `log_{p0}(p0 - d0)`, the variant in the theorem statement.
    pub h_d0: f64,
    pub u: f64,
    pub case: String,
    pub g: f64,
}

pub fn u_choice(d: i64, p: i64) -> UChoice {
    let r = ResidueData::new(d, p);
    let lg = |x: i64| if r.p0 >= 2 && x > 0 { (x as f64).ln() / (r.p0 as f64).ln() } else { 0.0 };
    let (h_d2, h_d0) = (lg(r.p0 - r.d2), lg(r.p0 - r.d0));
    let (u, case) = choose_u(h_d2);
    UChoice { h_d2, h_d0, u, case: case.into(), g: g_value(h_d2, u) }
}

/// One shifted copy `K_2 + s·SHIFT` and the points of `L_2` sent there.
#[derive(Clone, Debug, Serialize)]
pub struct ShiftGroup {
    pub step: u8,
    pub residue: i64,
    pub offset: i64,
    pub members: Vec<Point>,
    pub vector: Point,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundChain {
    pub t1_bound: f64,
    pub t1_ok: bool,
    pub t2_bound: f64,
    pub t2_ok: bool,
    pub t3_bound: i64,
    pub t3_ok: bool,
    pub d_bound: i64,
    pub d_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Beta2Bar {
    pub pairs: PairList,
    pub groups: Vec<ShiftGroup>,
    /// Direction of the copies; `-SHIFT` only when the compact search needed it.
    pub shift: Point,
    pub u: UChoice,
    pub k2_diagonal_start: i64,
    pub theta: Point,
    pub j1: Vec<i64>,
    pub j2: Vec<i64>,
    pub j3: Vec<i64>,
    pub d3: Option<i64>,
    pub t1: usize,
    pub t2: usize,
    pub t3: usize,
    pub s3: usize,
    pub n_shifts: usize,
    /// `"stated"` when the stated shift formulas pass validation, else `"compact"`.
    pub schedule: String,
    pub schedule_note: String,
    pub bounds: Option<BoundChain>,
    pub copies_disjoint: bool,
    pub injective: bool,
    pub images_in_m_l3: bool,
}

/// Direction of the shifted copies of `K_2`.  With `D_k` the line
/// `y = x + k`, `K_2` lies above the main diagonal, so copies move up-left,
/// away from the images of `β̃_1`.
pub const SHIFT: Point = Point::new(-1, 1);

/// Greedy cover of `targets` by residues `r ∈ 1..=p0`, where `R` is covered
/// by `r` when `R + r·SHIFT` falls on the residue pattern of `m(Y_0)`.
fn cover(targets: &[Point], p0: i64, on_pattern: &dyn Fn(Point) -> bool) -> Option<Vec<i64>> {
    let mut left: Vec<Point> = targets.to_vec();
    let mut seq = Vec::new();
    while !left.is_empty() {
        let (best, hits) = (1..=p0)
            .map(|r| (r, left.iter().filter(|&&q| on_pattern(q + r * SHIFT)).count()))
            .max_by_key(|&(r, c)| (c, -r))?;
        if hits == 0 {
            return None;
        }
        left.retain(|&q| !on_pattern(q + best * SHIFT));
        seq.push(best);
    }
    seq.sort();
    Some(seq)
}

struct Plan {
    point: Point,
    base: Point,
    residue: i64,
    key: (u8, i64, usize),
    stated_offset: i64,
}

/// The three-step map `β̄_2: L_2 -> m(L_3)`.
pub fn build_beta2(setup: &SpecialSetup, beta1: &Beta1) -> Result<Beta2Bar, BetaError> {
    let (d, p) = (setup.d, setup.p);
    let p0 = p % d;
    let l2 = &beta1.partition.l2;
    let u = u_choice(d, p);
    let empty = |note: &str| Beta2Bar {
        pairs: Vec::new(),
        groups: Vec::new(),
        shift: SHIFT,
        u: u.clone(),
        k2_diagonal_start: (d + 1) / 2,
        theta: Point::ORIGIN,
        j1: Vec::new(),
        j2: Vec::new(),
        j3: Vec::new(),
        d3: None,
        t1: 0,
        t2: 0,
        t3: 0,
        s3: 0,
        n_shifts: 0,
        schedule: "stated".into(),
        schedule_note: note.into(),
        bounds: None,
        copies_disjoint: true,
        injective: true,
        images_in_m_l3: true,
    };
    if l2.is_empty() {
        return Ok(empty("L_2 is empty"));
    }
    if !hypothesis_holds(d, p) {
        return Err(BetaError::Hypothesis { d, p });
    }

    // θ translates K_1 onto K_2: W_{j+d} -> W_j and D_k -> D_{k+c+p0}.
    // It is integral only when -d + c + p0 is even.
    let c = [(d + 1) / 2, d / 2, (d + 1) / 2 + 1].into_iter().find(|&c| (c + p0 - d) % 2 == 0).unwrap();
    let s = c + p0;
    let theta = Point::new((-d - s) / 2, (s - d) / 2);
    let regions = RegionSpec { d, p0, k2_diagonal_start: c };

    let my0: HashSet<Point> = setup.my0().iter().copied().collect();
    let pattern: HashSet<(i64, i64)> = setup.my0().iter().map(|q| (q.x.rem_euclid(p0), q.y.rem_euclid(p0))).collect();
    let on_pattern = |q: Point| pattern.contains(&(q.x.rem_euclid(p0), q.y.rem_euclid(p0)));
    let k20: Vec<Point> = setup.my0().iter().copied().filter(|&q| regions.in_k2(q)).collect();
    let count_on = |j: i64| k20.iter().filter(|&&q| anti_diagonal(q) == j).count();
    let k2_on = |j: i64| -> Vec<Point> {
        (0..=j).map(|x| Point::new(x, j - x)).filter(|&q| regions.in_k2(q)).collect()
    };

    let jt: Vec<i64> = (d - 3 * p0..d).collect();
    let pu = (p0 as f64).powf(u.u);
    let p0_minus_d2 = (p0 - ResidueData::new(d, p).d2) as f64;
    let j1: Vec<i64> = jt.iter().copied().filter(|&j| (j as f64) > d as f64 - pu / p0_minus_d2).collect();
    let j2: Vec<i64> = jt.iter().copied().filter(|j| !j1.contains(j) && count_on(*j) as f64 >= pu).collect();
    let j3: Vec<i64> = jt.iter().copied().filter(|j| !j1.contains(j) && !j2.contains(j)).collect();
    let d3 = jt.iter().copied().filter(|&j| 2 * count_on(j) >= p0 as usize).max();

    let mut plans: Vec<Plan> = Vec::new();
    let by_w = |js: &[i64]| -> Vec<Point> {
        let mut v: Vec<Point> = l2.iter().copied().filter(|&q| js.contains(&(anti_diagonal(q) - d))).collect();
        setup.tri.sort_canonical(&mut v);
        v
    };

    // Step 1: heavy points near the top corner go to shifts of one point Q_1.
    let step1 = by_w(&j1);
    let t1 = step1.len();
    if t1 > 0 {
        let mut w1: Vec<Point> = k20.iter().copied().filter(|&q| anti_diagonal(q) == d - 1).collect();
        setup.tri.sort_canonical(&mut w1);
        let q1 = *w1.first().ok_or_else(|| BetaError::Stuck("K_2^0 ∩ W_{d-1} is empty".into()))?;
        for (i, &a) in step1.iter().enumerate() {
            plans.push(Plan { point: a, base: q1, residue: 0, key: (1, 0, i), stated_offset: p0 * i as i64 });
        }
    }

    // Step 2: θ then a covering sequence of residues over W_{J_2} ∩ K_2.
    let step2 = by_w(&j2);
    let mut t2 = 0;
    if !j2.is_empty() {
        let targets: Vec<Point> = j2.iter().flat_map(|&j| k2_on(j)).collect();
        let seq = cover(&targets, p0, &on_pattern).ok_or_else(|| BetaError::Stuck("no cover of W_{J_2} ∩ K_2".into()))?;
        t2 = seq.len();
        for &a in &step2 {
            let b = a + theta;
            let k = seq
                .iter()
                .position(|&r| on_pattern(b + r * SHIFT))
                .ok_or_else(|| BetaError::Stuck(format!("θ({a}) is not covered")))?;
            let off = t1 as i64 * p0 + seq[k] + (k as i64 + 1) * p0;
            plans.push(Plan { point: a, base: b, residue: seq[k], key: (2, 0, k), stated_offset: off });
        }
    }

    // Step 3: lift θ(P) to W_{d_3} and use the cover of W_{d_3} ∩ K_2.
    let step3 = by_w(&j3);
    let mut t3 = 0;
    if let Some(d3) = d3 {
        let seq = cover(&k2_on(d3), p0, &on_pattern).ok_or_else(|| BetaError::Stuck("no cover of W_{d_3} ∩ K_2".into()))?;
        t3 = seq.len();
        for &a in &step3 {
            let j = anti_diagonal(a) - d;
            let l = j3.iter().position(|&x| x == j).unwrap() as i64 + 1;
            let dl = d3 - j;
            let b = a + theta + Point::new(dl / 2, dl - dl / 2);
            let k = seq
                .iter()
                .position(|&r| on_pattern(b + r * SHIFT))
                .ok_or_else(|| BetaError::Stuck(format!("lifted θ({a}) is not covered")))?;
            let off = p0 * ((k as i64 + 1) + (l - 1) * (t3 as i64 + 2) + t1 as i64 + t2 as i64 + 2) + seq[k];
            plans.push(Plan { point: a, base: b, residue: seq[k], key: (3, j, k), stated_offset: off });
        }
    } else if !step3.is_empty() {
        return Err(BetaError::Stuck("no index d_3 with enough K_2^0 points".into()));
    }
    let s3 = j3.len();

    let forbidden: HashSet<Point> = beta1.pairs.iter().map(|&(_, b)| b).collect();
    let m_l3: HashSet<Point> = beta1.partition.l3.iter().map(|&q| mirror(d, q)).collect();
    let image_ok = |pl: &Plan, img: Point| -> Result<(), String> {
        if !my0.contains(&img) {
            return Err(format!("image {img} of {} is not in m(Y_0)", pl.point));
        }
        if forbidden.contains(&img) {
            return Err(format!("image {img} of {} is already used by β̃_1", pl.point));
        }
        if !setup.in_t1prime(pl.point - img) {
            return Err(format!("{} - {img} is not in T'_1", pl.point));
        }
        Ok(())
    };
    let realize = |dir: Point, offset_of: &dyn Fn(usize) -> i64| -> Result<(PairList, Vec<ShiftGroup>), String> {
        let mut groups: Vec<ShiftGroup> = Vec::new();
        let mut index: BTreeMap<(u8, i64, usize), usize> = BTreeMap::new();
        let mut pairs = Vec::new();
        for (idx, pl) in plans.iter().enumerate() {
            let off = offset_of(idx);
            let img = pl.base + off * dir;
            image_ok(pl, img)?;
            let g = *index.entry(pl.key).or_insert_with(|| {
                groups.push(ShiftGroup {
                    step: pl.key.0,
                    residue: pl.residue,
                    offset: off,
                    members: Vec::new(),
                    vector: pl.point - img,
                });
                groups.len() - 1
            });
            if groups[g].vector != pl.point - img {
                return Err(format!("group of {} mixes vectors", pl.point));
            }
            groups[g].members.push(pl.point);
            pairs.push((pl.point, img));
        }
        let offsets: Vec<i64> = groups.iter().map(|g| g.offset).collect();
        for (i, a) in offsets.iter().enumerate() {
            for b in &offsets[i + 1..] {
                if (a - b).abs() < p0 {
                    return Err(format!("copies at offsets {a} and {b} overlap"));
                }
            }
        }
        let images: BTreeSet<Point> = pairs.iter().map(|&(_, b)| b).collect();
        if images.len() != pairs.len() {
            return Err("β̄_2 is not injective".into());
        }
        pairs.sort();
        Ok((pairs, groups))
    };

    // Compact schedule: groups in construction order, each at the smallest
    // offset with its residue whose copy avoids the earlier copies and whose
    // images all pass `image_ok`.
    let compact = |dir: Point| -> Option<BTreeMap<(u8, i64, usize), i64>> {
        let mut keys: Vec<(u8, i64, usize)> = Vec::new();
        for pl in &plans {
            if !keys.contains(&pl.key) {
                keys.push(pl.key);
            }
        }
        let mut offsets: BTreeMap<(u8, i64, usize), i64> = BTreeMap::new();
        let mut images: HashSet<Point> = HashSet::new();
        for key in &keys {
            let members: Vec<&Plan> = plans.iter().filter(|pl| pl.key == *key).collect();
            let r = members[0].residue.rem_euclid(p0);
            let off = (0..=2 * d).map(|i| r + i * p0).find(|&off| {
                offsets.values().all(|&o| (o - off).abs() >= p0)
                    && members.iter().all(|pl| {
                        let img = pl.base + off * dir;
                        image_ok(pl, img).is_ok() && !images.contains(&img)
                    })
            })?;
            images.extend(members.iter().map(|pl| pl.base + off * dir));
            offsets.insert(*key, off);
        }
        Some(offsets)
    };

    let stated = |i: usize| plans[i].stated_offset;
    let (pairs, groups, shift, schedule, note) = match realize(SHIFT, &stated) {
        Ok((pairs, groups)) => (pairs, groups, SHIFT, "stated", String::new()),
        Err(why) => {
            let attempt = [SHIFT, -1 * SHIFT].into_iter().find_map(|dir| {
                let offsets = compact(dir)?;
                realize(dir, &|i| offsets[&plans[i].key]).ok().map(|(pairs, groups)| (pairs, groups, dir))
            });
            let (pairs, groups, dir) =
                attempt.ok_or_else(|| BetaError::Stuck(format!("no shift schedule fits in the square; stated schedule: {why}")))?;
            (pairs, groups, dir, "compact", format!("stated schedule rejected: {why}"))
        }
    };

    let n_shifts = t1 + t2 + t3 * s3;
    let pw = |e: f64| (p0 as f64).powf(e);
    let t1_bound = 0.5 * (pw(2.0 * (u.u - u.h_d2)) + pw(u.u - u.h_d2));
    let t2_bound = if pw(u.u - 1.0) < 1.0 { (-(3.0 * (p0 * p0) as f64).ln() / (1.0 - pw(u.u - 1.0)).ln()).floor() } else { 0.0 };
    let t3_bound = (p0 as f64).log2().floor() as i64;
    let d_bound = 4 * p0 * (n_shifts as i64 + 2 * s3 as i64 + 3);
    let bounds = BoundChain {
        t1_bound,
        t1_ok: t1 as f64 <= t1_bound + 1e-9,
        t2_bound,
        t2_ok: t2 as f64 <= t2_bound + 1e-9,
        t3_bound,
        t3_ok: t3 as i64 <= t3_bound,
        d_bound,
        d_ok: d >= d_bound,
    };
    let images_in_m_l3 = pairs.iter().all(|(_, b)| m_l3.contains(b));
    Ok(Beta2Bar {
        pairs,
        groups,
        shift,
        u,
        k2_diagonal_start: c,
        theta,
        j1,
        j2,
        j3,
        d3,
        t1,
        t2,
        t3,
        s3,
        n_shifts,
        schedule: schedule.into(),
        schedule_note: note,
        bounds: Some(bounds),
        copies_disjoint: true,
        injective: true,
        images_in_m_l3,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Beta2Max {
    pub pairs: PairList,
    /// The vector sequence `v_1, ..., v_N` in construction order.
    pub sequence: Vec<Point>,
    pub rank: Vec<usize>,
    pub rank_history: Vec<Vec<usize>>,
    /// `dom ∩ m(ran) = ∅`, so the symmetric closure exists.
    pub closure_exists: bool,
}

fn rank_of(pairs: &[(Point, Point)], seq: &[Point]) -> Vec<usize> {
    seq.iter()
        .map(|&v| pairs.iter().filter(|&&(a, b)| a - b == v || a - b == v.swapped()).count())
        .collect()
}

/// Local improvement inside `E_2` (injections `L_2 -> m(Y_0)` with vectors
/// from `V(β̄_2) ∪ V(β̄_2)^∨`): single reassignments and two-point swaps are
/// applied while they raise the `≺_2` rank.
pub fn maximize_beta2(setup: &SpecialSetup, beta1: &Beta1, start: &[(Point, Point)], sequence: &[Point]) -> Beta2Max {
    let d = setup.d;
    let my0: HashSet<Point> = setup.my0().iter().copied().collect();
    let forbidden: HashSet<Point> = beta1.pairs.iter().map(|&(_, b)| b).collect();
    let mut allowed: Vec<Point> = Vec::new();
    for &v in sequence {
        for w in [v, v.swapped()] {
            if !allowed.contains(&w) {
                allowed.push(w);
            }
        }
    }
    let mut cur: PairList = start.to_vec();
    let mut rank = rank_of(&cur, sequence);
    let mut history = vec![rank.clone()];
    loop {
        let mut improved: Option<(PairList, Vec<usize>)> = None;
        let used: HashSet<Point> = cur.iter().map(|&(_, b)| b).collect();
        'moves: for i in 0..cur.len() {
            let a = cur[i].0;
            for &v in &allowed {
                let t = a - v;
                if t == cur[i].1 || !my0.contains(&t) || forbidden.contains(&t) {
                    continue;
                }
                let mut next = cur.clone();
                if used.contains(&t) {
                    let j = cur.iter().position(|&(_, b)| b == t).unwrap();
                    let back = cur[j].0 - cur[i].1;
                    if !allowed.contains(&back) {
                        continue;
                    }
                    next[j].1 = cur[i].1;
                }
                next[i].1 = t;
                let r = rank_of(&next, sequence);
                if r > rank {
                    improved = Some((next, r));
                    break 'moves;
                }
            }
        }
        match improved {
            Some((next, r)) => {
                cur = next;
                rank = r;
                history.push(rank.clone());
            }
            None => break,
        }
    }
    let dom: HashSet<Point> = cur.iter().map(|&(a, _)| a).collect();
    let closure_exists = cur.iter().all(|&(_, b)| !dom.contains(&mirror(d, b)));
    Beta2Max { pairs: cur, sequence: sequence.to_vec(), rank, rank_history: history, closure_exists }
}

/// `s(β)`: `β` on its domain and `m∘β^{-1}∘m` on `m(ran β)`.
pub fn symmetric_closure(d: i64, pairs: &[(Point, Point)]) -> Option<PairList> {
    let dom: HashSet<Point> = pairs.iter().map(|&(a, _)| a).collect();
    if pairs.iter().any(|&(_, b)| dom.contains(&mirror(d, b))) {
        return None;
    }
    let mut out: BTreeMap<Point, Point> = pairs.iter().copied().collect();
    for &(a, b) in pairs {
        out.insert(mirror(d, b), mirror(d, a));
    }
    Some(sorted_pairs(&out))
}

fn has_perfect_matching(setup: &SpecialSetup, dom: &[Point], cod: &[Point]) -> bool {
    fn augment(setup: &SpecialSetup, a: usize, dom: &[Point], cod: &[Point], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for j in 0..cod.len() {
            if seen[j] || !setup.in_t1prime(dom[a] - cod[j]) {
                continue;
            }
            seen[j] = true;
            if owner[j].is_none_or(|o| augment(setup, o, dom, cod, seen, owner)) {
                owner[j] = Some(a);
                return true;
            }
        }
        false
    }
    if dom.len() != cod.len() {
        return false;
    }
    let mut owner = vec![None; cod.len()];
    (0..dom.len()).all(|a| augment(setup, a, dom, cod, &mut vec![false; cod.len()], &mut owner))
}

/// Symmetric completion of the remaining points: pairs `P -> Q` together
/// with `m(Q) -> m(P)`, preferring diagonal vectors and then heavier ones,
/// with backtracking.
pub fn symmetric_completion(setup: &SpecialSetup, dom: &[Point], cod: &[Point]) -> Option<PairList> {
    let d = setup.d;
    if dom.is_empty() {
        return Some(Vec::new());
    }
    if !has_perfect_matching(setup, dom, cod) {
        return None;
    }
    let mut cands: Vec<(bool, i64, Point, Point)> = Vec::new();
    for &a in dom {
        for &b in cod {
            let v = a - b;
            if setup.in_t1prime(v) && dom.contains(&mirror(d, b)) && cod.contains(&mirror(d, a)) {
                cands.push((!is_diagonal(v), -anti_diagonal(v), a, b));
            }
        }
    }
    cands.sort();
    for (_, _, a, b) in cands {
        let (a2, b2) = (mirror(d, b), mirror(d, a));
        let nd: Vec<Point> = dom.iter().copied().filter(|&x| x != a && x != a2).collect();
        let nc: Vec<Point> = cod.iter().copied().filter(|&x| x != b && x != b2).collect();
        if let Some(mut rest) = symmetric_completion(setup, &nd, &nc) {
            rest.push((a, b));
            if a2 != a {
                rest.push((a2, b2));
            }
            rest.sort();
            return Some(rest);
        }
    }
    None
}

#[derive(Clone, Debug, Serialize)]
pub struct BetaAssembly {
    pub d: i64,
    pub p: i64,
    pub beta1: Beta1,
    pub beta2bar: Beta2Bar,
    pub beta2: Beta2Max,
    pub sbeta2: PairList,
    pub beta3: PairList,
    /// `"mirror"` when `P -> m(P)` is special on the remainder, else `"repaired"`.
    pub beta3_mode: String,
    /// Remainder points where `P - m(P)` leaves `T'_1`.
    pub mirror_failures: Vec<Point>,
    pub beta: PairList,
    pub sign: i8,
    pub k_exponent: usize,
    pub symmetric: bool,
}

/// The remainder map: the mirror when it is special, else the preferred symmetric completion.
fn complete_rest(setup: &SpecialSetup, taken: &BTreeMap<Point, Point>) -> Result<(PairList, String, Vec<Point>), BetaError> {
    let d = setup.d;
    let used: HashSet<Point> = taken.values().copied().collect();
    let dom: Vec<Point> = setup.y0().iter().copied().filter(|a| !taken.contains_key(a)).collect();
    let cod: Vec<Point> = setup.my0().iter().copied().filter(|b| !used.contains(b)).collect();
    let failures: Vec<Point> = dom
        .iter()
        .copied()
        .filter(|&a| !setup.in_t1prime(a - mirror(d, a)) || !cod.contains(&mirror(d, a)))
        .collect();
    if failures.is_empty() {
        return Ok((dom.iter().map(|&a| (a, mirror(d, a))).collect(), "mirror".into(), failures));
    }
    let rest = symmetric_completion(setup, &dom, &cod).ok_or_else(|| BetaError::Stuck("no symmetric completion of the remainder".into()))?;
    Ok((rest, "repaired".into(), failures))
}

fn distinct_in_order(pairs: &[(Point, Point)]) -> Vec<Point> {
    let mut seq = Vec::new();
    for &(a, b) in pairs {
        if !seq.contains(&(a - b)) {
            seq.push(a - b);
        }
    }
    seq
}

pub fn assemble_beta(setup: &SpecialSetup) -> Result<BetaAssembly, BetaError> {
    let d = setup.d;
    let beta1 = build_beta1(setup, false);
    let beta2bar = build_beta2(setup, &beta1)?;
    let order: Vec<(Point, Point)> = beta2bar
        .groups
        .iter()
        .flat_map(|g| g.members.iter().map(move |&a| (a, a - g.vector)))
        .collect();
    let sequence = distinct_in_order(&order);
    let beta2 = maximize_beta2(setup, &beta1, &beta2bar.pairs, &sequence);
    let sbeta2 = symmetric_closure(d, &beta2.pairs).ok_or_else(|| BetaError::Stuck("dom(β̃_2) meets m(ran β̃_2)".into()))?;

    let mut taken: BTreeMap<Point, Point> = beta1.pairs.iter().copied().collect();
    for &(a, b) in &sbeta2 {
        if taken.insert(a, b).is_some() {
            return Err(BetaError::Validation { point: a, reason: "s(β̃_2) overlaps L_1".into() });
        }
    }
    let (beta3, mode, failures) = complete_rest(setup, &taken)?;
    for &(a, b) in &beta3 {
        taken.insert(a, b);
    }
    let beta = sorted_pairs(&taken);
    let bij = setup.from_pairs(&beta).map_err(|e| BetaError::Validation { point: Point::ORIGIN, reason: e.to_string() })?;
    let my0: HashSet<Point> = setup.my0().iter().copied().collect();
    let k_exponent = beta2.pairs.iter().filter(|&&(a, b)| my0.contains(&(a - (a - b).swapped()))).count();
    let symmetric = taken.iter().all(|(&a, &b)| taken.get(&mirror(d, b)) == Some(&mirror(d, a)));
    Ok(BetaAssembly {
        d,
        p: setup.p,
        beta1,
        beta2bar,
        beta2,
        sbeta2,
        beta3,
        beta3_mode: mode,
        mirror_failures: failures,
        beta,
        sign: bij.sign,
        k_exponent,
        symmetric,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RelatedCandidate {
    pub toggled: Vec<Point>,
    pub beta: Option<PairList>,
    pub special: bool,
    pub related: bool,
    pub sign: i8,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelatedReport {
    pub k_exponent: usize,
    pub expected_size: usize,
    pub candidates: Vec<RelatedCandidate>,
    pub valid_candidates: usize,
    /// Size of the exhaustive class of `β̃`, when enumerated.
    pub class_size: Option<usize>,
    pub class_signs_positive: Option<bool>,
    #[serde(serialize_with = "qser_big_opt")]
    pub class_coefficient: Option<BigRational>,
    /// `2^k sgn(τ) / ∏ b!` from the combo of `β̃`, the predicted coefficient.
    #[serde(serialize_with = "qser_big_opt")]
    pub predicted_coefficient: Option<BigRational>,
    pub denominator_prime_to_p: bool,
    /// `sgn(β̃)` as the parity of `m∘β̃`, and the sign of its minimal permutation.
    pub beta_sign: i8,
    pub tau_sign: i8,
    pub candidates_match_class: Option<bool>,
}

fn qser_big_opt<S: serde::Serializer>(q: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match q {
        Some(q) => qser::big(q, s),
        None => s.serialize_none(),
    }
}

/// Toggle each eligible `P ∈ L_2` between its vector and the reflected one,
/// close symmetrically, complete, and compare with the exhaustive class.
pub fn related_class_characterization(
    setup: &SpecialSetup,
    asm: &BetaAssembly,
    enumerate_class: bool,
) -> Result<RelatedReport, BetaError> {
    let d = setup.d;
    let my0: HashSet<Point> = setup.my0().iter().copied().collect();
    let target = setup.from_pairs(&asm.beta)?;
    let eligible: Vec<usize> = asm
        .beta2
        .pairs
        .iter()
        .enumerate()
        .filter(|(_, &(a, b))| my0.contains(&(a - (a - b).swapped())))
        .map(|(i, _)| i)
        .collect();
    let k = eligible.len();
    let mut candidates = Vec::new();
    for mask in 0u64..(1u64 << k) {
        let mut b2 = asm.beta2.pairs.clone();
        let mut toggled = Vec::new();
        for (bit, &i) in eligible.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                let (a, b) = b2[i];
                b2[i] = (a, a - (a - b).swapped());
                toggled.push(a);
            }
        }
        let mut taken: BTreeMap<Point, Point> = asm.beta1.pairs.iter().copied().collect();
        let built = symmetric_closure(d, &b2).and_then(|s| {
            let before = taken.len();
            taken.extend(s.iter().copied());
            let images: HashSet<Point> = taken.values().copied().collect();
            (taken.len() == before + s.len() && images.len() == taken.len()).then_some(())
        });
        let beta = match built {
            Some(()) => complete_rest(setup, &taken).ok().map(|(rest, _, _)| {
                taken.extend(rest);
                sorted_pairs(&taken)
            }),
            None => None,
        };
        let bij: Option<SpecialBijection> = beta.as_ref().and_then(|b| setup.from_pairs(b).ok());
        candidates.push(RelatedCandidate {
            toggled,
            special: bij.is_some(),
            related: bij.as_ref().is_some_and(|b| b.vectors == target.vectors),
            sign: bij.as_ref().map_or(0, |b| b.sign),
            beta,
        });
    }
    let valid_candidates = candidates.iter().filter(|c| c.special && c.related && c.sign == 1).count();

    let combo = setup.combo_of(&target)?;
    let tau_sign = combo.sign();
    let leading = setup.monomial(&combo).coefficient;
    let predicted = BigRational::from_integer(BigInt::from(1u64 << k)) * &leading;
    let p = BigInt::from(setup.p);
    let (class_size, signs, coeff, matches) = if enumerate_class {
        let class = setup.related(&target.vectors)?;
        let classes = relatedness_classes(setup, &class)?;
        let coeff = classes.first().map(|c| c.coefficient.clone());
        let from_candidates: BTreeSet<PairList> =
            candidates.iter().filter(|c| c.special && c.related).filter_map(|c| c.beta.clone()).collect();
        let exhaustive: BTreeSet<PairList> = class
            .iter()
            .map(|b| {
                let mut pairs = b.pairs.clone();
                pairs.sort();
                pairs
            })
            .collect();
        (Some(class.len()), Some(class.iter().all(|b| b.sign == 1)), coeff, Some(from_candidates == exhaustive))
    } else {
        (None, None, None, None)
    };
    Ok(RelatedReport {
        k_exponent: k,
        expected_size: 1 << k,
        candidates,
        valid_candidates,
        class_size,
        class_signs_positive: signs,
        class_coefficient: coeff,
        predicted_coefficient: Some(predicted),
        denominator_prime_to_p: leading.denom() % &p != BigInt::from(0),
        beta_sign: target.sign,
        tau_sign,
        candidates_match_class: matches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordinary_case_is_empty() {
        let s = SpecialSetup::new(5, 11).unwrap();
        let asm = assemble_beta(&s).unwrap();
        assert!(asm.beta.is_empty() && asm.beta1.pairs.is_empty());
        assert_eq!(asm.k_exponent, 0);
        let rel = related_class_characterization(&s, &asm, true).unwrap();
        assert_eq!((rel.class_size, rel.valid_candidates), (Some(1), 1));
    }

    #[test]
    fn beta1_at_13_41() {
        let s = SpecialSetup::new(13, 41).unwrap();
        let b = build_beta1(&s, false);
        let r = build_beta1(&s, true);
        assert_eq!(b.vstar, r.vstar);
        assert!(b.symmetric && b.eligible);
        assert_eq!(b.pairs.len(), 10);
        let part = &b.partition;
        assert_eq!(part.l2, vec![Point::new(12, 12)]);
        assert!(part.l2_in_k1 && part.far_diagonals_clear && part.middle_band_clear);
        assert_eq!(part.l1.len() + part.l2.len() + part.l3.len(), s.y0().len());
    }

    #[test]
    fn u_optimizer() {
        assert_eq!(choose_u(0.25), (0.5, "case 1"));
        let (u, case) = choose_u(0.125);
        assert!((u - 5.0 / 12.0).abs() < 1e-12 && case == "case 2");
        let c = u_choice(13, 41);
        assert_eq!((c.h_d2, c.h_d0), (0.0, 0.0));
    }

    #[test]
    fn pigeonhole_holds_for_odd_p0() {
        for (d, p) in [(19, 41), (7, 17), (31, 67)] {
            let s = SpecialSetup::new(d, p).unwrap();
            assert_eq!(pigeonhole_violations(&s), 0, "({d},{p})");
            assert_eq!(g_bound_report(&s).g1_violations, 0, "({d},{p})");
        }
        // With p0 even a period holds p0(p0-1)/2 points, fewer than p0 * p0/2.
        let s = SpecialSetup::new(13, 41).unwrap();
        assert!(pigeonhole_violations(&s) > 0);
    }

    #[test]
    fn g2_undercounts_short_windows() {
        assert_eq!(g2(1, 3), 0);
        assert!(g1(2 + 3, 3) < g2(2, 3));
        let s = SpecialSetup::new(7, 17).unwrap();
        let r = g_bound_report(&s);
        assert!(r.g2_violations > 0 && !r.g1_dominates_g2);
    }

    #[test]
    fn beta2_at_13_41() {
        let s = SpecialSetup::new(13, 41).unwrap();
        let b1 = build_beta1(&s, false);
        let b2 = build_beta2(&s, &b1).unwrap();
        assert_eq!(b2.theta, Point::new(-11, -2));
        assert_eq!(b2.pairs.len(), 1);
        for &(a, b) in &b2.pairs {
            assert!(s.in_t1prime(a - b));
        }
        let bounds = b2.bounds.as_ref().unwrap();
        assert!(!bounds.d_ok);
    }

    #[test]
    fn maximize_is_monotone_and_idempotent() {
        let s = SpecialSetup::new(13, 41).unwrap();
        let b1 = build_beta1(&s, false);
        let b2 = build_beta2(&s, &b1).unwrap();
        let seq = distinct_in_order(&b2.pairs);
        let m = maximize_beta2(&s, &b1, &b2.pairs, &seq);
        assert!(m.rank_history.windows(2).all(|w| w[0] < w[1]));
        let again = maximize_beta2(&s, &b1, &m.pairs, &seq);
        assert_eq!(again.rank, m.rank);
        assert!(m.closure_exists);
    }

    #[test]
    fn assembly_at_13_41() {
        let s = SpecialSetup::new(13, 41).unwrap();
        let asm = assemble_beta(&s).unwrap();
        assert!(asm.symmetric);
        assert_eq!(asm.beta.len(), s.y0().len());
        assert_eq!(asm.beta3_mode, "mirror");
        assert!(asm.mirror_failures.is_empty());
        assert_eq!(asm.k_exponent, 1);
        let l1: BTreeMap<Point, Point> = asm.beta1.pairs.iter().copied().collect();
        for &(a, b) in &asm.beta {
            if let Some(&q) = l1.get(&a) {
                assert_eq!(q, b);
            }
        }
        for &(a, b) in &asm.beta3 {
            assert_eq!(b, mirror(s.d, a));
        }
    }

    #[test]
    fn class_of_beta_at_13_41() {
        let s = SpecialSetup::new(13, 41).unwrap();
        let asm = assemble_beta(&s).unwrap();
        let r = related_class_characterization(&s, &asm, true).unwrap();
        assert_eq!((r.expected_size, r.valid_candidates, r.class_size), (2, 2, Some(2)));
        assert_eq!(r.class_signs_positive, Some(true));
        assert_eq!(r.candidates_match_class, Some(true));
        assert_eq!(r.class_coefficient, r.predicted_coefficient);
        assert!(r.denominator_prime_to_p);
        assert_eq!(r.beta_sign, r.tau_sign);
    }

    #[test]
    fn out_of_hypothesis_is_refused() {
        let s = SpecialSetup::new(7, 17).unwrap();
        let b1 = build_beta1(&s, false);
        if b1.partition.l2.is_empty() {
            assert!(assemble_beta(&s).is_ok());
        } else {
            assert!(matches!(build_beta2(&s, &b1), Err(BetaError::Hypothesis { .. })));
        }
    }

    #[test]
    fn closure_needs_disjointness() {
        let d = 7;
        let a = Point::new(6, 6);
        assert!(symmetric_closure(d, &[(a, mirror(d, a))]).is_none());
        let c = symmetric_closure(d, &[(Point::new(6, 5), Point::new(2, 4))]).unwrap();
        assert_eq!(c, vec![(Point::new(3, 5), Point::new(2, 1)), (Point::new(6, 5), Point::new(2, 4))]);
    }
}
