//! One function per subcommand; each returns a serializable result.

use std::path::PathBuf;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use tpoly_core::beta::{
    assemble_beta, g_bound_report, pigeonhole_violations, related_class_characterization, u_choice, BetaAssembly, GBoundReport,
    RelatedReport, UChoice,
};
use tpoly_core::combos::{
    combo_formula_value, relatedness_classes, v_special, RelatednessClass, SpecialSetup, SpecialTerm,
};
use tpoly_core::dwork::ef::expand_poly;
use tpoly_core::dwork::{char_series, det_t1, newton_polygon_c, truncation_cap, CoeffRing, DworkMatrix, PolyF, ZpM, ZqM};
use tpoly_core::hodge::{
    assignment_oracle, closed_form_vertices, gnp_slope_bands, greedy_minimal_permutation, h_min, ihp, Frobenius,
    ImprovedHodge, Scores, SlopeBandReport, VertexFormulas,
};
use tpoly_core::lattice::iso::hypothesis_holds;
use tpoly_core::lattice::{Point, Triangle};
use tpoly_core::polygon::{qser, PolygonHull, Q64};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::svg;

/// `T_k` with `w < k`; the vertices of the improved Hodge polygon sit at `|T_k|`.
fn level(tri: &Triangle, k: i64) -> Vec<Point> {
    tri.points_below(k, false)
}

fn oracle_h(frob: &Frobenius<'_>, s: &[Point]) -> Result<Scores, CliError> {
    Ok(assignment_oracle(frob, s, s)?.score(frob))
}

// ---------------------------------------------------------------- ihp

#[derive(Clone, Debug, Serialize)]
pub struct VertexOnHull {
    pub k: i64,
    pub x: i64,
    #[serde(serialize_with = "qser::one")]
    pub h: Q64,
    pub on_hull: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IhpResult {
    pub lmax: usize,
    pub ihp: ImprovedHodge,
    /// `(x_k, h(T_k))` and `(x'_k, h(T'_k))` in range, from the closed forms.
    pub vertices: Vec<VertexOnHull>,
}

/// `x'_2 = x_2 + 2 gap + 1`, far enough to see both level-two vertices.
pub fn default_lmax(tri: &Triangle) -> usize {
    (level(tri, 2).len() as i64 + 2 * tri.weight_gap() + 1) as usize
}

pub fn ihp_vertices(frob: &Frobenius<'_>, ih: &ImprovedHodge, lmax: usize) -> Vec<VertexOnHull> {
    let h1 = h_min(frob, &level(frob.tri, 1));
    let mut out = Vec::new();
    for k in 1.. {
        let f = closed_form_vertices(frob, k, h1);
        if f.x_k as usize > lmax {
            break;
        }
        out.push(VertexOnHull { k, x: f.x_k, h: f.h_derived, on_hull: ih.hull.has_vertex(f.x_k, f.h_derived) });
        if f.x_prime_k as usize <= lmax {
            out.push(VertexOnHull { k, x: f.x_prime_k, h: f.h_prime_derived, on_hull: ih.hull.has_vertex(f.x_prime_k, f.h_prime_derived) });
        }
    }
    out
}

pub fn cmd_ihp(cfg: &RunConfig) -> Result<IhpResult, CliError> {
    let tri = cfg.triangle()?;
    let frob = Frobenius::new(&tri, cfg.p);
    let lmax = cfg.lmax.unwrap_or_else(|| default_lmax(&tri));
    let ih = ihp(&frob, lmax);
    let vertices = ihp_vertices(&frob, &ih, lmax);
    Ok(IhpResult { lmax, ihp: ih, vertices })
}

// ---------------------------------------------------------------- gnp-vertices

#[derive(Clone, Debug, Serialize)]
pub struct VertexRow {
    pub formulas: VertexFormulas,
    pub points_counted: usize,
    pub oracle_h: i64,
    #[serde(serialize_with = "qser::one")]
    pub oracle_h2: Q64,
    pub derived_matches_oracle: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GnpResult {
    pub rows: Vec<VertexRow>,
    pub h2_linear: bool,
    pub slope_bands: Option<SlopeBandReport>,
}

pub fn cmd_gnp_vertices(cfg: &RunConfig, band_m: u32) -> Result<GnpResult, CliError> {
    let tri = cfg.triangle()?;
    let frob = Frobenius::new(&tri, cfg.p);
    let h1 = h_min(&frob, &level(&tri, 1));
    let mut rows = Vec::new();
    for k in 1..=cfg.kmax {
        let t = level(&tri, k);
        let oracle = oracle_h(&frob, &t)?;
        let formulas = closed_form_vertices(&frob, k, h1);
        let derived_matches_oracle = formulas.h_derived == Q64::from_integer(oracle.h);
        rows.push(VertexRow { formulas, points_counted: t.len(), oracle_h: oracle.h, oracle_h2: oracle.h2, derived_matches_oracle });
    }
    let h2_linear = rows.iter().all(|r| r.oracle_h2 == rows[0].oracle_h2 * r.formulas.k);
    let slope_bands = cfg.side().map(|d| gnp_slope_bands(d, cfg.p, band_m));
    Ok(GnpResult { rows, h2_linear, slope_bands })
}

// ---------------------------------------------------------------- hodge-h

#[derive(Clone, Debug, Serialize)]
pub struct HodgeHResult {
    pub points: Vec<Point>,
    pub greedy: Scores,
    pub greedy_pairs: Vec<(Point, Point)>,
    pub oracle: Scores,
    pub agree: bool,
}

pub fn parse_points(s: &str) -> Result<Vec<Point>, CliError> {
    s.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let (a, b) = t.split_once(',').ok_or_else(|| CliError::Config(format!("point `{t}` is not `x,y`")))?;
            let num = |u: &str| u.trim().parse::<i64>().map_err(|e| CliError::Config(format!("`{u}`: {e}")));
            Ok(Point::new(num(a)?, num(b)?))
        })
        .collect()
}

pub fn cmd_hodge_h(cfg: &RunConfig, k: i64, points: Option<&str>) -> Result<HodgeHResult, CliError> {
    let tri = cfg.triangle()?;
    let frob = Frobenius::new(&tri, cfg.p);
    let pts = match points {
        Some(s) => parse_points(s)?,
        None => level(&tri, k),
    };
    if let Some(q) = pts.iter().find(|q| !tri.in_cone(**q)) {
        return Err(CliError::Config(format!("{q} lies outside the cone")));
    }
    let g = greedy_minimal_permutation(&frob, &pts);
    let greedy = g.score(&frob);
    let oracle = oracle_h(&frob, &pts)?;
    let agree = greedy.h == oracle.h;
    Ok(HodgeHResult { points: pts, greedy_pairs: g.pairs().collect(), greedy, oracle, agree })
}

// ---------------------------------------------------------------- dwork-np

/// Seeded random polynomials with coefficients in `F_{p^n}`; `n = 1` uses the core sampler.
pub fn random_polys(tri: &Triangle, p: u64, n: usize, seed: u64, count: usize) -> Vec<PolyF> {
    if n == 1 {
        return PolyF::random_family(tri, p, seed, count);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut f = PolyF::new(p, n);
            for q in tri.points_below(1, true).into_iter().filter(|&q| q != Point::ORIGIN) {
                let vertex = q == tri.p1() || q == tri.p2();
                loop {
                    let c: Vec<u64> = (0..n).map(|_| rng.gen_range(0..p)).collect();
                    if !vertex || c.iter().any(|&x| x != 0) {
                        f.set(q, &c);
                        break;
                    }
                }
            }
            f
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundFailure {
    pub point: Point,
    pub valuation: String,
    pub bound: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NpRow {
    pub trial: usize,
    pub f: PolyF,
    pub window: usize,
    pub subsets_visited: usize,
    pub expanded_coefficients: usize,
    /// Expanded `e_Q` with `v_T(e_Q) < ceil(w(Q))`.
    pub bound_failures: Vec<BoundFailure>,
    /// `v_T(u_ℓ)`, or `>=N` when every coefficient below `T^N` vanishes.
    pub valuations: Vec<String>,
    pub np: PolygonHull,
    pub uncertified: Vec<usize>,
    /// `ℓ` with a certified ordinate strictly below the improved Hodge polygon.
    pub below_ihp: Vec<usize>,
    pub certified_compared: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DworkNpResult {
    pub n_t: usize,
    pub lmax: usize,
    #[serde(serialize_with = "qser::many")]
    pub ihp_ordinates: Vec<Q64>,
    pub rows: Vec<NpRow>,
}

fn np_row<R: CoeffRing>(
    tri: &Triangle,
    p: u64,
    f: &PolyF,
    ring: &R,
    n_t: usize,
    lmax: usize,
    ihp_at: &[Q64],
    trial: usize,
) -> Result<NpRow, CliError> {
    let ex = expand_poly(tri, f, ring, n_t, n_t as i64)?;
    let bound_failures = ex
        .bound_violations(ring, tri)
        .into_iter()
        .map(|b| BoundFailure { point: b.point, valuation: b.valuation.describe(), bound: b.bound })
        .collect();
    let mat = DworkMatrix::build(tri, p, &ex, ring, truncation_cap(tri, p, n_t))?;
    let cs = char_series(tri, p, &mat, ring, lmax);
    let deg = cs.degree as i64;
    let (np, uncertified) = newton_polygon_c(&cs.valuations, cs.degree);
    let mut below_ihp = Vec::new();
    let mut certified_compared = 0;
    for (l, v) in cs.valuations.iter().enumerate() {
        if let Some(x) = v.finite() {
            certified_compared += 1;
            if Q64::new(x, deg) < ihp_at[l] {
                below_ihp.push(l);
            }
        }
    }
    Ok(NpRow {
        trial,
        f: f.clone(),
        window: cs.window_len,
        subsets_visited: cs.subsets_visited,
        expanded_coefficients: ex.points.len(),
        bound_failures,
        valuations: cs.valuations.iter().map(|v| v.describe()).collect(),
        np,
        uncertified,
        below_ihp,
        certified_compared,
    })
}

/// Compare certified `v_T(u_ℓ)` with the improved Hodge polygon for `count` random `f`.
pub fn dwork_np(tri: &Triangle, p: i64, ext_n: usize, ring_m: u32, n_t: usize, lmax: usize, seed: u64, count: usize) -> Result<DworkNpResult, CliError> {
    let frob = Frobenius::new(tri, p);
    let ih = ihp(&frob, lmax);
    let ihp_at: Vec<Q64> = (0..=lmax).map(|l| ih.hull.value_at(l as i64).unwrap_or(Q64::from_integer(0))).collect();
    let up = p as u64;
    let polys = random_polys(tri, up, ext_n, seed, count);
    let rows = if ext_n == 1 {
        let ring = ZpM::new(up, ring_m)?;
        polys.iter().enumerate().map(|(i, f)| np_row(tri, up, f, &ring, n_t, lmax, &ihp_at, i)).collect::<Result<Vec<_>, _>>()?
    } else {
        let ring = ZqM::new(up, ring_m, ext_n)?;
        polys.iter().enumerate().map(|(i, f)| np_row(tri, up, f, &ring, n_t, lmax, &ihp_at, i)).collect::<Result<Vec<_>, _>>()?
    };
    Ok(DworkNpResult { n_t, lmax, ihp_ordinates: ihp_at, rows })
}

pub fn cmd_dwork_np(cfg: &RunConfig) -> Result<DworkNpResult, CliError> {
    let tri = cfg.triangle()?;
    let lmax = cfg.lmax.unwrap_or_else(|| level(&tri, 2).len());
    dwork_np(&tri, cfg.p, cfg.ext_n, cfg.ring_m, cfg.tprec, lmax, cfg.seed, cfg.trials)
}

// ---------------------------------------------------------------- leading-coeff

/// Largest `h(T_1)` for which the Dwork-matrix side is attempted.
pub const DESK_H_LIMIT: i64 = 60;

#[derive(Clone, Debug, Serialize)]
pub struct LeadRow {
    pub trial: usize,
    pub f: PolyF,
    /// `T^{h(T_1)}` coefficient of `det` on the `T_1` block, mod `p^M`.
    pub det_coefficient: u64,
    pub combo_value: u64,
    pub agree: bool,
    pub unit: bool,
    /// `v_T(u_{x_1})` of the characteristic series.
    pub u_x1_valuation: String,
    pub u_x1_coefficient: u64,
    pub u_x1_matches: bool,
    pub optimal_permutations: usize,
    pub combos: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct LeadResult {
    pub h_t1: i64,
    pub x1: usize,
    pub n_t: usize,
    pub modulus: u64,
    pub rows: Vec<LeadRow>,
    pub witness: Option<usize>,
}

pub fn leading_coefficients(tri: &Triangle, p: i64, ring_m: u32, seed: u64, count: usize) -> Result<LeadResult, CliError> {
    let frob = Frobenius::new(tri, p);
    let t1 = level(tri, 1);
    let h = h_min(&frob, &t1);
    if h > DESK_H_LIMIT {
        return Err(CliError::Config(format!("h(T_1) = {h} needs T-precision {} beyond the desk limit", h + 2)));
    }
    let n_t = (h + 2) as usize;
    let up = p as u64;
    let ring = ZpM::new(up, ring_m)?;
    let mut rows = Vec::new();
    for (trial, f) in PolyF::random_family(tri, up, seed, count).into_iter().enumerate() {
        let ex = expand_poly(tri, &f, &ring, n_t, n_t as i64)?;
        let mat = DworkMatrix::build(tri, up, &ex, &ring, truncation_cap(tri, up, n_t))?;
        let (_, lead) = det_t1(tri, &mat, &ring, h)?;
        let combo = combo_formula_value(tri, &f, &ring)?;
        let cs = char_series(tri, up, &mat, &ring, t1.len());
        let u = &cs.u[t1.len()];
        let u_coeff = u.coeffs[h as usize];
        rows.push(LeadRow {
            trial,
            det_coefficient: lead,
            combo_value: combo.value,
            agree: lead == combo.value,
            unit: ring.is_unit(&lead),
            u_x1_valuation: cs.valuations[t1.len()].describe(),
            u_x1_coefficient: u_coeff,
            u_x1_matches: u_coeff == ring.neg_if(t1.len(), lead),
            optimal_permutations: combo.permutations,
            combos: combo.combos.to_string(),
            f,
        });
    }
    let witness = rows.iter().position(|r| r.unit && r.u_x1_valuation == h.to_string());
    Ok(LeadResult { h_t1: h, x1: t1.len(), n_t, modulus: ring.modulus(), rows, witness })
}

/// Sign helper: `u_ℓ` carries `(-1)^ℓ` against the sum of principal minors.
trait NegIf {
    fn neg_if(&self, l: usize, a: u64) -> u64;
}

impl NegIf for ZpM {
    fn neg_if(&self, l: usize, a: u64) -> u64 {
        if l % 2 == 1 {
            self.neg(&a)
        } else {
            a
        }
    }
}

pub fn cmd_leading_coeff(cfg: &RunConfig) -> Result<LeadResult, CliError> {
    leading_coefficients(&cfg.triangle()?, cfg.p, cfg.ring_m, cfg.seed, cfg.trials)
}

// ---------------------------------------------------------------- special

#[derive(Clone, Debug, Serialize)]
pub struct SpecialResult {
    pub y0_size: usize,
    pub permanent_bound: String,
    pub count: usize,
    /// Bijections with `sgn(β) = sgn(τ(β))`.
    pub sign_identity: usize,
    pub terms: Vec<SpecialTerm>,
    pub classes: Option<Vec<RelatednessClass>>,
}

pub fn cmd_special(cfg: &RunConfig, emit_classes: bool) -> Result<SpecialResult, CliError> {
    let setup = SpecialSetup::new(cfg.require_side()?, cfg.p)?;
    let all = setup.special_bijections(cfg.budget)?;
    let mut sign_identity = 0;
    for b in &all {
        if setup.combo_of(b)?.sign() == b.sign {
            sign_identity += 1;
        }
    }
    Ok(SpecialResult {
        y0_size: setup.y0().len(),
        permanent_bound: format!("{:.6e}", setup.permanent_bound()),
        count: all.len(),
        sign_identity,
        terms: v_special(&setup, &all)?,
        classes: if emit_classes { Some(relatedness_classes(&setup, &all)?) } else { None },
    })
}

// ---------------------------------------------------------------- beta

#[derive(Clone, Debug, Serialize)]
pub struct BetaResult {
    pub in_hypothesis: bool,
    pub u_choice: UChoice,
    pub pigeonhole_violations: usize,
    pub g_bounds: GBoundReport,
    pub assembly: Option<BetaAssembly>,
    pub error: Option<String>,
    pub related: Option<RelatedReport>,
}

pub fn beta_pipeline(d: i64, p: i64, enumerate_class: bool) -> Result<BetaResult, CliError> {
    let setup = SpecialSetup::new(d, p)?;
    let (assembly, error, related) = match assemble_beta(&setup) {
        Ok(asm) => {
            let rel = related_class_characterization(&setup, &asm, enumerate_class)?;
            (Some(asm), None, Some(rel))
        }
        Err(e) => (None, Some(e.to_string()), None),
    };
    Ok(BetaResult {
        in_hypothesis: hypothesis_holds(d, p),
        u_choice: u_choice(d, p),
        pigeonhole_violations: pigeonhole_violations(&setup),
        g_bounds: g_bound_report(&setup),
        assembly,
        error,
        related,
    })
}

pub fn cmd_beta(cfg: &RunConfig, enumerate_class: bool, svg_out: Option<&PathBuf>) -> Result<BetaResult, CliError> {
    let r = beta_pipeline(cfg.require_side()?, cfg.p, enumerate_class)?;
    if let (Some(path), Some(asm)) = (svg_out, &r.assembly) {
        std::fs::write(path, svg::render_beta(asm))?;
    }
    Ok(r)
}

/// `Some(i)` when `q = ±2^i / n` with `p ∤ n`.
pub fn power_of_two_over_prime_to_p(q: &BigRational, p: i64) -> Option<u32> {
    use num_bigint::BigInt;
    use num_traits::{One, Signed, Zero};
    let mut num = q.numer().abs();
    let den = q.denom();
    if num.is_zero() || (den % BigInt::from(p)).is_zero() {
        return None;
    }
    let two = BigInt::from(2);
    let mut i = 0;
    while (&num % &two).is_zero() {
        num /= &two;
        i += 1;
    }
    num.is_one().then_some(i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_parse() {
        assert_eq!(parse_points("1,2; 3,4;").unwrap(), vec![Point::new(1, 2), Point::new(3, 4)]);
        assert!(parse_points("1;2").is_err());
    }

    #[test]
    fn power_of_two_shape() {
        use num_bigint::BigInt;
        let q = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
        assert_eq!(power_of_two_over_prime_to_p(&q(-8, 15), 41), Some(3));
        assert_eq!(power_of_two_over_prime_to_p(&q(3, 14), 41), None);
        assert_eq!(power_of_two_over_prime_to_p(&q(2, 41), 41), None);
    }

    #[test]
    fn extension_polys_have_vertex_terms() {
        let tri = Triangle::isosceles(2).unwrap();
        for f in random_polys(&tri, 5, 2, 3, 4) {
            assert!(f.check_hull(&tri).is_ok());
            assert!(f.coeffs.values().all(|c| c.len() == 2));
        }
        assert_eq!(random_polys(&tri, 5, 2, 3, 2), random_polys(&tri, 5, 2, 3, 2));
    }

    #[test]
    fn hodge_h_on_t1_at_7_17() {
        let cfg = RunConfig::isosceles(7, 17).unwrap();
        let r = cmd_hodge_h(&cfg, 1, None).unwrap();
        assert!(r.agree);
        assert_eq!(r.oracle.h, 259);
    }
}
