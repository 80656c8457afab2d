//! The verification battery behind `tpoly verify`.
//!
//! Checks are grouped by subject.  Groups run on the configured worker pool
//! and the report is sorted by check name, so neither the worker count nor
//! the completion order shows in the output.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;
use tpoly_core::combos::{relatedness_classes, v_special, c0_distribution_counts, k2_distribution_counts, SpecialSetup};
use tpoly_core::dwork::{exp_sum_oracle, DworkError};
use tpoly_core::hodge::{
    assignment_oracle, closed_form_vertices, example_assignment, greedy_minimal_permutation, h1_of, h_min, ihp, Frobenius,
};
use tpoly_core::lattice::iso::{hypothesis_holds, FundamentalCell, ResidueData, SplitT1};
use tpoly_core::lattice::{Point, Triangle};
use tpoly_core::polygon::{qser, Q64};

use crate::commands::{beta_pipeline, default_lmax, dwork_np, ihp_vertices, leading_coefficients, power_of_two_over_prime_to_p, random_polys, DESK_H_LIMIT};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{Check, Provenance, VerifyReport};
use crate::svg::{self, Figure};

pub const LARGE_D_NOTE: &str = "The large-d regime d >= 24(2 p0^2 + p0) cannot be reached end to end through the Dwork matrix \
at desk scale: h(T_1) grows like d^3 and the T-precision must exceed it. The β̃ checks cover the combinatorial content of that regime.";

/// Dwork-side checks run only when `|T_1|` is at most this.
pub const DESK_X1_LIMIT: usize = 10;

/// Exhaustive relatedness classes are enumerated only up to this `|Y_0|`.
pub const CLASS_Y0_LIMIT: usize = 40;

fn pts(v: &[(i64, i64)]) -> BTreeSet<Point> {
    v.iter().map(|&(x, y)| Point::new(x, y)).collect()
}

/// Point sets listed for `d = 7`, `p = 17`.
pub mod listed {
    use super::*;

    pub fn t12() -> BTreeSet<Point> {
        pts(&[(1, 2), (1, 4), (2, 1), (2, 2), (2, 3), (2, 4), (3, 2), (4, 1), (4, 2)])
    }

    pub fn y0() -> BTreeSet<Point> {
        pts(&[(2, 6), (3, 5), (3, 6), (5, 3), (5, 6), (6, 2), (6, 3), (6, 5), (6, 6)])
    }

    pub fn my0() -> BTreeSet<Point> {
        pts(&[(1, 1), (1, 2), (1, 4), (1, 5), (2, 1), (2, 4), (4, 1), (4, 2), (5, 1)])
    }

    pub fn c0() -> BTreeSet<Point> {
        pts(&[(5, 6), (6, 5), (6, 6)])
    }

    pub const H_T1: i64 = 259;

    /// The special bijection given as an example at these parameters.
    pub fn example_beta() -> Vec<(Point, Point)> {
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
        .map(|&((a, b), (c, e))| (Point::new(a, b), Point::new(c, e)))
        .collect()
    }
}

fn set_check(name: &str, expected: &BTreeSet<Point>, computed: &BTreeSet<Point>) -> Check {
    Check::new(name, Provenance::Stated, expected, computed, expected == computed, true)
}

pub fn lattice_checks(tri: &Triangle, p: i64) -> Vec<Check> {
    let eta = tri.eta_permutation(p);
    let large = tri.prime_is_large(p);
    vec![
        Check::new(
            "lattice.eta_bijection",
            Provenance::Derived,
            tri.det(),
            eta.as_ref().map(|v| v.len() as i64).unwrap_or(-1),
            eta.is_ok(),
            true,
        ),
        Check::new("lattice.prime_large", Provenance::Stated, "p * gap > 2 det + gap", large, large, false)
            .with_note("when false, minimality of weight-minimal prefixes is not certified and dependent checks are out of hypothesis"),
    ]
}

/// `x_k` against a lattice count.  For the isosceles case the expected
/// value is `(kd+1)kd/2`; otherwise the general closed form.
pub fn vertex_count_checks(tri: &Triangle, p: i64, kmax: i64) -> Vec<Check> {
    let frob = Frobenius::new(tri, p);
    (1..=kmax)
        .map(|k| {
            let count = tri.points_below(k, false).len() as i64;
            let formula = match tri.side() {
                Some(d) => (k * d + 1) * k * d / 2,
                None => closed_form_vertices(&frob, k, 0).x_k,
            };
            Check::new(format!("vertex.count.k{k}"), Provenance::Stated, formula, count, formula == count, true)
        })
        .collect()
}

pub fn hodge_level_checks(tri: &Triangle, p: i64, kmax: i64) -> Result<Vec<Check>, CliError> {
    let frob = Frobenius::new(tri, p);
    let large = tri.prime_is_large(p);
    let h1 = h_min(&frob, &tri.points_below(1, false));
    let mut out = Vec::new();
    let mut h2_t1 = Q64::from_integer(0);
    for k in 1..=kmax {
        let t = tri.points_below(k, false);
        let oracle = assignment_oracle(&frob, &t, &t)?.score(&frob);
        let greedy = greedy_minimal_permutation(&frob, &t).score(&frob).h;
        let f = closed_form_vertices(&frob, k, h1);
        let derived = f.h_derived == Q64::from_integer(oracle.h);
        out.push(
            Check::new(
                format!("hodge.h_formula.k{k}"),
                Provenance::Derived,
                oracle.h,
                json!({
                    "derived": qser::text(&f.h_derived),
                    "statement": qser::text(&f.h_statement),
                    "isosceles": f.h_isosceles.as_ref().map(qser::text),
                }),
                derived,
                large,
            )
            .with_note("closed form with the -1 of the derivation; the statement form is shown alongside"),
        );
        out.push(Check::new(format!("hodge.greedy_vs_oracle.k{k}"), Provenance::Derived, oracle.h, greedy, greedy == oracle.h, large));
        if k == 1 {
            h2_t1 = oracle.h2;
        } else {
            let want = h2_t1 * k;
            out.push(Check::new(
                format!("hodge.h2_linearity.k{k}"),
                Provenance::Stated,
                qser::text(&want),
                qser::text(&oracle.h2),
                want == oracle.h2 && oracle.h2 == Q64::from_integer(oracle.h) - h1_of(&frob, &t),
                large,
            ));
        }
    }
    Ok(out)
}

/// Greedy against the assignment oracle on seeded random multisets of cone points.
pub fn greedy_random_check(tri: &Triangle, p: i64, trials: usize, max_size: usize, seed: u64) -> Result<Check, CliError> {
    let frob = Frobenius::new(tri, p);
    let pool = tri.cone_points_up_to(2 * tri.det());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = Vec::new();
    for _ in 0..trials {
        let size = rng.gen_range(1..=max_size);
        let s: Vec<Point> = (0..size).map(|_| pool[rng.gen_range(0..pool.len())]).collect();
        let g = greedy_minimal_permutation(&frob, &s).score(&frob).h;
        let o = assignment_oracle(&frob, &s, &s)?.score(&frob).h;
        if g != o {
            mismatches.push(json!({ "multiset": s, "greedy": g, "oracle": o }));
        }
    }
    Ok(Check::new(
        "hodge.greedy_random_multisets",
        Provenance::Derived,
        json!({ "trials": trials, "max_size": max_size, "mismatches": 0 }),
        json!({ "trials": trials, "max_size": max_size, "mismatches": mismatches.len(), "examples": &mismatches[..mismatches.len().min(3)] }),
        mismatches.is_empty(),
        tri.prime_is_large(p),
    ))
}

pub fn ihp_checks(tri: &Triangle, p: i64) -> Vec<Check> {
    let frob = Frobenius::new(tri, p);
    let lmax = default_lmax(tri);
    let ih = ihp(&frob, lmax);
    let vs = ihp_vertices(&frob, &ih, lmax);
    let all = vs.iter().all(|v| v.on_hull);
    let expected: Vec<(i64, String)> = vs.iter().map(|v| (v.x, qser::text(&v.h))).collect();
    vec![Check::new("ihp.vertices", Provenance::Stated, expected, &vs, all, tri.prime_is_large(p))]
}

pub fn listed_checks(tri: &Triangle, split: &SplitT1, p: i64) -> Result<Vec<Check>, CliError> {
    let cell = FundamentalCell::new(tri, split);
    let frob = Frobenius::new(tri, p);
    let t1 = tri.points_below(1, false);
    let h = h_min(&frob, &t1);
    let oracle = assignment_oracle(&frob, &t1, &t1)?.score(&frob).h;
    let example = example_assignment(tri)?.score(&frob).h;
    let split_svg = svg::render(Figure::Split, split.d, p)?;
    let mirror_svg = svg::render(Figure::Mirror, split.d, p)?;
    Ok(vec![
        set_check("listed.t12", &listed::t12(), &split.t12.iter().copied().collect()),
        set_check("listed.y0", &listed::y0(), &split.y0_set()),
        set_check("listed.my0", &listed::my0(), &split.my0_set()),
        set_check("listed.c0", &listed::c0(), &cell.c0.iter().copied().collect()),
        Check::new("listed.h_t1", Provenance::Stated, listed::H_T1, json!({ "greedy": h, "oracle": oracle }), h == listed::H_T1 && oracle == h, true),
        Check::new("listed.example_permutation", Provenance::Stated, listed::H_T1, example, example == listed::H_T1, true)
            .with_note("two rows of the listed table repaired so that it is a permutation"),
        set_check("figure.split.t12_markers", &listed::t12(), &svg::markers(&split_svg, "t12")),
        set_check("figure.mirror.y0_markers", &listed::y0(), &svg::markers(&mirror_svg, "y0")),
        set_check("figure.mirror.my0_markers", &listed::my0(), &svg::markers(&mirror_svg, "my0")),
    ])
}

pub fn distribution_checks(tri: &Triangle, split: &SplitT1, d: i64, p: i64) -> Result<Vec<Check>, CliError> {
    let hyp = hypothesis_holds(d, p);
    let cell = FundamentalCell::new(tri, split);
    let res = ResidueData::new(d, p);
    let mut out = vec![
        Check::new("points.split", Provenance::Derived, "T_1 = images of T_(1,1) ⊔ m(Y_0)", "holds", true, true),
        Check::new(
            "cell.periodicity",
            Provenance::Stated,
            "Y_0 is the p0-periodic extension of C_0",
            cell.periodicity_holds(split),
            cell.periodicity_holds(split),
            hyp,
        ),
    ];
    if res.p0 < 2 {
        out.push(Check::not_applicable("distribution", Provenance::Trivial, format!("p mod d = {} leaves no fundamental cell", res.p0)));
        return Ok(out);
    }
    let want = res.p0 * (res.p0 - 1) / 2;
    out.push(Check::new("cell.size", Provenance::Stated, want, cell.c0.len(), cell.size_matches, hyp));
    let c0 = c0_distribution_counts(d, p)?;
    let rows: Vec<_> = c0.rows.iter().map(|r| json!({ "k": r.index, "formula": r.formula, "count": r.enumerated })).collect();
    out.push(Check::new("distribution.c0", Provenance::Stated, "formula row by row", rows, c0.all_match(), hyp));
    out.push(Check::new("distribution.gamma", Provenance::Stated, "γ: A -> C_0 bijective", c0.gamma.bijective, c0.gamma.bijective, hyp));
    let k2 = k2_distribution_counts(d, p)?;
    let rows: Vec<_> = k2.rows.iter().map(|r| json!({ "i": r.index, "formula": r.formula, "count": r.enumerated })).collect();
    out.push(Check::new("distribution.k2", Provenance::Stated, "formula row by row", rows, k2.all_match(), hyp));
    Ok(out)
}

pub fn special_checks(d: i64, p: i64, budget: u64) -> Result<Vec<Check>, CliError> {
    let setup = SpecialSetup::new(d, p)?;
    let mut out = Vec::new();
    if setup.y0().is_empty() {
        let all = setup.special_bijections(budget)?;
        let terms = v_special(&setup, &all)?;
        let den = setup.factorial_denominator();
        let unit = terms.len() == 1 && {
            let c = &terms[0].coefficient;
            c.numer().magnitude() == &num_bigint::BigUint::from(1u8) && c.denom() == &den
        };
        out.push(Check::new("ordinary.y0_empty", Provenance::Trivial, 0, 0, true, true));
        out.push(Check::new("ordinary.single_bijection", Provenance::Trivial, 1, all.len(), all.len() == 1, true));
        out.push(Check::new(
            "ordinary.v_special_unit",
            Provenance::Trivial,
            format!("±1/{den}"),
            terms.iter().map(|t| qser_big(&t.coefficient)).collect::<Vec<_>>(),
            unit,
            true,
        ));
        return Ok(out);
    }
    let bound = setup.permanent_bound();
    if bound > budget as f64 {
        out.push(Check::not_applicable(
            "special.sign_identity",
            Provenance::Derived,
            format!("permanent bound {bound:.3e} exceeds the enumeration budget {budget}"),
        ));
    } else {
        let all = setup.special_bijections(budget)?;
        let mut agree = 0;
        for b in &all {
            if setup.combo_of(b)?.sign() == b.sign {
                agree += 1;
            }
        }
        let classes = relatedness_classes(&setup, &all)?;
        out.push(
            Check::new("special.sign_identity", Provenance::Derived, all.len(), agree, agree == all.len(), true)
                .with_note(format!("{} special bijections in {} relatedness classes", all.len(), classes.len())),
        );
        if (d, p) == (7, 17) {
            let ex = setup.from_pairs(&listed::example_beta());
            let found = ex.as_ref().map(|e| all.iter().any(|b| b.map == e.map)).unwrap_or(false);
            out.push(Check::new("listed.example_special_bijection", Provenance::Stated, true, found, found, true));
        }
    }
    Ok(out)
}

fn qser_big(q: &num_rational::BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn beta_checks(d: i64, p: i64) -> Result<Vec<Check>, CliError> {
    let setup_y0 = SpecialSetup::new(d, p)?.y0().len();
    if setup_y0 == 0 {
        let r = beta_pipeline(d, p, true)?;
        let empty = r.assembly.as_ref().map(|a| a.beta.is_empty() && a.k_exponent == 0).unwrap_or(false);
        return Ok(vec![Check::new("ordinary.beta_empty", Provenance::Trivial, "empty β̃, k = 0", empty, empty, true)]);
    }
    let hyp = hypothesis_holds(d, p);
    let p0 = p % d;
    let large_d = d >= 24 * (2 * p0 * p0 + p0);
    let r = beta_pipeline(d, p, setup_y0 <= CLASS_Y0_LIMIT)?;
    let mut out = vec![
        Check::new("beta.pigeonhole", Provenance::Stated, 0, r.pigeonhole_violations, r.pigeonhole_violations == 0, hyp)
            .with_note("runs of p0 consecutive points on a diagonal holding other than floor(p0/2) points of Y_0"),
        Check::new("beta.g1_lower_bound", Provenance::Stated, 0, r.g_bounds.g1_violations, r.g_bounds.g1_violations == 0, hyp),
        Check::new("beta.g2_upper_bound", Provenance::Stated, 0, r.g_bounds.g2_violations, r.g_bounds.g2_violations == 0, hyp),
    ];
    let construct_hyp = hyp && large_d;
    let Some(asm) = &r.assembly else {
        out.push(Check::new("beta.assembly", Provenance::Derived, "β̃ assembled", r.error.clone(), false, construct_hyp));
        return Ok(out);
    };
    let Some(rel) = &r.related else {
        return Ok(out);
    };
    let expected = 1usize << asm.k_exponent;
    out.push(
        Check::new("beta.assembly", Provenance::Derived, "β̃ assembled and special", asm.beta.len(), true, construct_hyp)
            .with_note(format!("β̃_3 mode {}, shift schedule {}", asm.beta3_mode, asm.beta2bar.schedule)),
    );
    out.push(Check::new("beta.symmetric", Provenance::Stated, true, asm.symmetric, asm.symmetric, construct_hyp));
    out.push(Check::new("beta.sign_identity", Provenance::Derived, rel.tau_sign, rel.beta_sign, rel.beta_sign == rel.tau_sign, true));
    out.push(Check::new("beta.toggle_candidates", Provenance::Stated, expected, rel.valid_candidates, rel.valid_candidates == expected, construct_hyp));
    match rel.class_size {
        Some(size) => {
            out.push(
                Check::new("beta.class_size", Provenance::Stated, expected, size, size == expected, construct_hyp)
                    .with_note(format!("k = {}", asm.k_exponent)),
            );
            let pos = rel.class_signs_positive == Some(true);
            out.push(Check::new("beta.class_signs_positive", Provenance::Stated, true, pos, pos, construct_hyp));
            let matched = rel.candidates_match_class == Some(true);
            out.push(Check::new("beta.candidates_match_class", Provenance::Derived, true, matched, matched, construct_hyp));
            let coeff = rel.class_coefficient.as_ref();
            let shape = coeff.and_then(|q| power_of_two_over_prime_to_p(q, p));
            out.push(Check::new(
                "beta.class_coefficient",
                Provenance::Stated,
                "±2^i/N with p ∤ N",
                json!({ "coefficient": coeff.map(qser_big), "i": shape }),
                shape.is_some(),
                construct_hyp,
            ));
        }
        None => out.push(Check::not_applicable(
            "beta.class_size",
            Provenance::Stated,
            format!("|Y_0| = {setup_y0} is above the exhaustive class limit {CLASS_Y0_LIMIT}"),
        )),
    }
    Ok(out)
}

pub fn dwork_checks(tri: &Triangle, cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let p = cfg.p;
    let x1 = tri.points_below(1, false).len();
    let h1 = h_min(&Frobenius::new(tri, p), &tri.points_below(1, false));
    if x1 > DESK_X1_LIMIT || h1 > DESK_H_LIMIT {
        return Ok(vec![Check::not_applicable(
            "dwork",
            Provenance::Derived,
            format!("|T_1| = {x1}, h(T_1) = {h1}: the Dwork matrix is out of desk range; {LARGE_D_NOTE}"),
        )]);
    }
    let mut out = Vec::new();
    let lmax = tri.points_below(2, false).len();
    let np = dwork_np(tri, p, cfg.ext_n, cfg.ring_m, cfg.tprec, lmax, cfg.seed, cfg.trials)?;
    let failures: usize = np.rows.iter().map(|r| r.bound_failures.len()).sum();
    let expanded: usize = np.rows.iter().map(|r| r.expanded_coefficients).sum();
    out.push(Check::new(
        "dwork.valuation_bound",
        Provenance::Stated,
        json!({ "violations": 0 }),
        json!({ "violations": failures, "coefficients": expanded, "tprec": cfg.tprec, "trials": cfg.trials }),
        failures == 0,
        true,
    ));
    let below: Vec<_> = np.rows.iter().filter(|r| !r.below_ihp.is_empty()).map(|r| json!({ "trial": r.trial, "l": r.below_ihp })).collect();
    let compared: usize = np.rows.iter().map(|r| r.certified_compared).sum();
    out.push(Check::new(
        "dwork.np_above_ihp",
        Provenance::Stated,
        json!({ "below": 0 }),
        json!({ "below": below, "certified_ordinates": compared, "lmax": lmax, "tprec": cfg.tprec }),
        below.is_empty(),
        true,
    ));

    let n_t = 8;
    let mut trace_rows = Vec::new();
    let mut trace_ok = true;
    let mut too_large = None;
    'outer: for f in random_polys(tri, p as u64, cfg.ext_n, cfg.seed, cfg.trials) {
        for k in [1u32, 2] {
            match exp_sum_oracle(tri, &f, k, cfg.ring_m, n_t) {
                Ok(c) => {
                    trace_ok &= c.agree;
                    trace_rows.push(json!({ "k": k, "agree": c.agree }));
                }
                Err(DworkError::TorusTooLarge(n)) => {
                    too_large = Some(n);
                    break 'outer;
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    out.push(match too_large {
        Some(n) => Check::not_applicable("dwork.trace_formula", Provenance::Derived, format!("torus of size {n} is above the direct enumeration limit")),
        None => Check::new(
            "dwork.trace_formula",
            Provenance::Derived,
            format!("exponential sum = (q^k-1)^2 Tr(ψ^k) mod (p^{}, T^{n_t})", cfg.ring_m),
            trace_rows,
            trace_ok,
            true,
        ),
    });

    if tri.side().is_some() {
        let lead = leading_coefficients(tri, p, cfg.ring_m, cfg.seed, cfg.trials)?;
        let agree = lead.rows.iter().all(|r| r.agree);
        let rows: Vec<_> = lead.rows.iter().map(|r| json!({ "trial": r.trial, "det": r.det_coefficient, "combo": r.combo_value })).collect();
        out.push(Check::new("dwork.leading_coeff_vs_combo", Provenance::Derived, "equal mod p^M", rows, agree, true));
        let witness = lead.witness.map(|i| &lead.rows[i]);
        out.push(
            Check::new(
                "dwork.coincidence_witness",
                Provenance::Derived,
                json!({ "v_T(u_x1)": lead.h_t1, "leading_unit": true }),
                json!({
                    "found": witness.is_some(),
                    "trials": lead.rows.len(),
                    "witness": witness.map(|w| json!({ "trial": w.trial, "f": w.f, "u_x1_coefficient": w.u_x1_coefficient })),
                }),
                witness.is_some(),
                true,
            )
            .with_note(LARGE_D_NOTE),
        );
    }
    Ok(out)
}

type Group<'a> = Box<dyn Fn() -> Result<Vec<Check>, CliError> + Send + Sync + 'a>;

/// The full battery for `cfg`.
pub fn run_verify(cfg: &RunConfig) -> Result<VerifyReport, CliError> {
    let tri = cfg.triangle()?;
    let p = cfg.p;
    let tri = &tri;
    let mut groups: Vec<Group> = vec![
        Box::new(move || Ok(lattice_checks(tri, p))),
        Box::new(move || Ok(vertex_count_checks(tri, p, 4))),
        Box::new(move || hodge_level_checks(tri, p, cfg.kmax)),
        Box::new(move || Ok(vec![greedy_random_check(tri, p, 100, 12, cfg.seed)?])),
        Box::new(move || Ok(ihp_checks(tri, p))),
        Box::new(move || dwork_checks(tri, cfg)),
    ];
    match cfg.side() {
        Some(d) => {
            let split = SplitT1::new(tri, p)?;
            let split = std::sync::Arc::new(split);
            let s1 = split.clone();
            groups.push(Box::new(move || distribution_checks(tri, &s1, d, p)));
            if (d, p) == (7, 17) {
                let s2 = split.clone();
                groups.push(Box::new(move || listed_checks(tri, &s2, p)));
            }
            groups.push(Box::new(move || special_checks(d, p, cfg.budget)));
            groups.push(Box::new(move || beta_checks(d, p)));
        }
        None => groups.push(Box::new(|| {
            Ok(vec![Check::not_applicable("isosceles", Provenance::Derived, "point-set, special-bijection and β̃ checks need --d")])
        })),
    }
    let parts = cfg.in_pool(|| groups.par_iter().map(|g| g()).collect::<Result<Vec<_>, _>>())??;
    let notes = vec![LARGE_D_NOTE.to_string()];
    Ok(VerifyReport::assemble(parts.into_iter().flatten().collect(), notes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Status;

    #[test]
    fn ordinary_case_trivialities() {
        let r = run_verify(&RunConfig::isosceles(5, 11).unwrap()).unwrap();
        for name in ["ordinary.y0_empty", "ordinary.single_bijection", "ordinary.v_special_unit", "ordinary.beta_empty"] {
            assert_eq!(r.get(name).unwrap().status, Status::Pass, "{name}");
        }
    }

    #[test]
    fn listed_sets_at_7_17() {
        let r = run_verify(&RunConfig::isosceles(7, 17).unwrap()).unwrap();
        for name in ["listed.t12", "listed.y0", "listed.my0", "listed.c0", "listed.h_t1", "listed.example_permutation"] {
            assert_eq!(r.get(name).unwrap().status, Status::Pass, "{name}");
        }
        assert_eq!(r.get("dwork").unwrap().status, Status::OutOfHypothesis);
    }
}
