//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//!
//! Runs without the libtest harness so the lines always reach stdout.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use tpoly_tool::commands::{beta_pipeline, dwork_np, leading_coefficients, power_of_two_over_prime_to_p};
use tpoly_tool::svg::{self, Figure};
use tpoly_tool::verify::{self, listed};
use tpoly_tool::Status;
use tpoly_core::combos::{c0_distribution_counts, k2_distribution_counts, SpecialSetup};
use tpoly_core::dwork::ef::expand_poly;
use tpoly_core::dwork::{exp_sum_oracle, PolyF, ZpM};
use tpoly_core::hodge::{example_assignment, h_min, Frobenius};
use tpoly_core::lattice::iso::{FundamentalCell, SplitT1};
use tpoly_core::lattice::{Point, Triangle};

const SEED: u64 = 20261014;
const CONFIGS: [(i64, i64); 3] = [(3, 7), (5, 11), (7, 17)];

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn within(limit: Duration, start: Instant, o: Outcome) -> Outcome {
    let t = start.elapsed();
    if t > limit {
        outcome(false, format!("{}; took {t:.2?}, limit {limit:?}", o.detail))
    } else {
        outcome(o.ok, format!("{}; {t:.2?}", o.detail))
    }
}

fn iso(d: i64) -> Triangle {
    Triangle::isosceles(d).unwrap()
}

fn point_sets() -> Outcome {
    let t = Instant::now();
    let tri = iso(7);
    let split = SplitT1::new(&tri, 17).unwrap();
    let cell = FundamentalCell::new(&tri, &split);
    let t12: BTreeSet<Point> = split.t12.iter().copied().collect();
    let c0: BTreeSet<Point> = cell.c0.iter().copied().collect();
    let sets_ok = t12 == listed::t12() && split.y0_set() == listed::y0() && split.my0_set() == listed::my0() && c0 == listed::c0();
    let s2 = svg::render(Figure::Split, 7, 17).unwrap();
    let s3 = svg::render(Figure::Mirror, 7, 17).unwrap();
    let figures_ok =
        svg::markers(&s2, "t12") == listed::t12() && svg::markers(&s3, "y0") == listed::y0() && svg::markers(&s3, "my0") == listed::my0();
    within(
        Duration::from_secs(1),
        t,
        outcome(sets_ok && figures_ok, format!("T_(1,2), Y_0, m(Y_0), C_0 equal: {sets_ok}; SVG markers equal: {figures_ok}")),
    )
}

fn all_pass(checks: &[tpoly_tool::Check], prefix: &str) -> (bool, Vec<String>) {
    let bad: Vec<String> = checks
        .iter()
        .filter(|c| c.name.starts_with(prefix) && c.status != Status::Pass)
        .map(|c| format!("{} {:?} expected {} computed {}", c.name, c.status, c.expected, c.computed))
        .collect();
    (bad.is_empty(), bad)
}

fn vertex_formulas() -> Outcome {
    let t = Instant::now();
    let mut bad = Vec::new();
    for d in [3, 5, 7] {
        let p = CONFIGS.iter().find(|c| c.0 == d).unwrap().1;
        let (_, b) = all_pass(&verify::vertex_count_checks(&iso(d), p, 4), "vertex.count");
        bad.extend(b);
    }
    for (d, p) in CONFIGS {
        let checks = verify::hodge_level_checks(&iso(d), p, 3).unwrap();
        let (_, b) = all_pass(&checks, "hodge.h_formula");
        bad.extend(b.into_iter().map(|s| format!("({d},{p}) {s}")));
    }
    let h = h_min(&Frobenius::new(&iso(7), 17), &iso(7).points_below(1, false));
    if h != listed::H_T1 {
        bad.push(format!("h(T_1) at (7,17) is {h}"));
    }
    within(Duration::from_secs(10), t, outcome(bad.is_empty(), format!("x_k for d in 3,5,7, k<=4; h(T_k) k<=3; h(T_1)={h} {bad:?}")))
}

fn greedy_optimality() -> Outcome {
    let t = Instant::now();
    let mut bad = Vec::new();
    for (d, p) in CONFIGS {
        let c = verify::greedy_random_check(&iso(d), p, 100, 12, SEED).unwrap();
        if !c.passed() {
            bad.push(format!("({d},{p}) {}", c.computed));
        }
    }
    within(Duration::from_secs(30), t, outcome(bad.is_empty(), format!("100 multisets of size <= 12 per configuration {bad:?}")))
}

fn h2_linearity() -> Outcome {
    let mut bad = Vec::new();
    for (d, p) in CONFIGS {
        let (_, b) = all_pass(&verify::hodge_level_checks(&iso(d), p, 3).unwrap(), "hodge.h2_linearity");
        bad.extend(b.into_iter().map(|s| format!("({d},{p}) {s}")));
    }
    outcome(bad.is_empty(), format!("h2(T_k) = k h2(T_1), k = 2, 3 {bad:?}"))
}

fn example_permutation() -> Outcome {
    let tri = iso(7);
    let frob = Frobenius::new(&tri, 17);
    let score = example_assignment(&tri).unwrap().score(&frob).h;
    let h = h_min(&frob, &tri.points_below(1, false));
    outcome(score == h && h == listed::H_T1, format!("score {score}, h(T_1) {h}"))
}

fn valuation_bound() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for d in [3, 2] {
        let tri = iso(d);
        let ring = ZpM::new(7, 2).unwrap();
        for f in PolyF::random_family(&tri, 7, SEED, 3) {
            let ex = expand_poly(&tri, &f, &ring, 40, 40).unwrap();
            checked += ex.points.len();
            bad.extend(ex.bound_violations(&ring, &tri).into_iter().map(|v| format!("d={d} {}", v.point)));
        }
    }
    outcome(bad.is_empty(), format!("{checked} coefficients at N=40 over 3 f each for d=3,2; violations {bad:?}"))
}

fn trace_formula() -> Outcome {
    let t = Instant::now();
    let tri = iso(2);
    let mut runs = 0;
    let mut bad = Vec::new();
    for (i, f) in PolyF::random_family(&tri, 7, SEED, 3).iter().enumerate() {
        for k in [1u32, 2] {
            let c = exp_sum_oracle(&tri, f, k, 2, 8).unwrap();
            runs += 1;
            if !c.agree {
                bad.push(format!("f#{i} k={k}"));
            }
        }
    }
    within(Duration::from_secs(60), t, outcome(bad.is_empty(), format!("{runs} comparisons mod (7^2, T^8) {bad:?}")))
}

fn np_above_ihp() -> Outcome {
    let tri = iso(3);
    let x2 = tri.points_below(2, false).len();
    let r = dwork_np(&tri, 7, 1, 2, 30, x2, SEED, 20).unwrap();
    let compared: usize = r.rows.iter().map(|r| r.certified_compared).sum();
    let below: Vec<_> = r.rows.iter().filter(|r| !r.below_ihp.is_empty()).map(|r| (r.trial, r.below_ihp.clone())).collect();
    outcome(
        below.is_empty() && compared > 0,
        format!("20 f, l <= x_2 = {x2}, N = 30: {compared} certified ordinates, below IHP {below:?}"),
    )
}

fn coincidence_witness() -> Outcome {
    let t = Instant::now();
    let tri = iso(3);
    let r = leading_coefficients(&tri, 7, 2, SEED, 5).unwrap();
    let detail = match r.witness {
        Some(i) => {
            let w = &r.rows[i];
            format!(
                "witness f#{i} = {} with v_T(u_{}) = {} = h(T_1), leading coefficient {} mod {}",
                serde_json::to_string(&w.f.coeffs.iter().collect::<Vec<_>>()).unwrap(),
                r.x1,
                w.u_x1_valuation,
                w.u_x1_coefficient,
                r.modulus
            )
        }
        None => "no witness among 5 trials".into(),
    };
    let o = outcome(r.witness.is_some(), format!("{detail}. {}", verify::LARGE_D_NOTE));
    within(Duration::from_secs(300), t, o)
}

fn leading_vs_combo() -> Outcome {
    let tri = iso(3);
    let r = leading_coefficients(&tri, 7, 2, SEED, 1).unwrap();
    let row = &r.rows[0];
    outcome(
        row.agree,
        format!("T^{} coefficient of det on T_1: {} vs combo formula {} mod {}", r.h_t1, row.det_coefficient, row.combo_value, r.modulus),
    )
}

fn distributions() -> Outcome {
    let mut bad = Vec::new();
    for (d, p) in [(7, 17), (13, 41), (11, 41)] {
        let c = c0_distribution_counts(d, p).unwrap();
        for row in c.rows.iter().filter(|r| !r.matches) {
            bad.push(format!("C_0 ({d},{p}) k={}: count {} formula {}", row.index, row.enumerated, row.formula));
        }
    }
    let k2 = k2_distribution_counts(13, 41).unwrap();
    for row in k2.rows.iter().filter(|r| !r.matches) {
        bad.push(format!("K_2 (13,41) i={}: count {} formula {}", row.index, row.enumerated, row.formula));
    }
    outcome(bad.is_empty(), format!("C_0 at (7,17), (13,41), (11,41), K_2 at (13,41) {bad:?}"))
}

fn beta_pipeline_13_41() -> Outcome {
    let t = Instant::now();
    let r = beta_pipeline(13, 41, true).unwrap();
    let Some(asm) = &r.assembly else {
        return outcome(false, format!("assembly failed: {:?}", r.error));
    };
    let rel = r.related.as_ref().unwrap();
    let setup = SpecialSetup::new(13, 41).unwrap();
    let special = setup.from_pairs(&asm.beta).is_ok();
    let size = rel.class_size.unwrap_or(0);
    let expected = 1usize << asm.k_exponent;
    let signs = rel.class_signs_positive == Some(true);
    let shape = rel.class_coefficient.as_ref().and_then(|q| power_of_two_over_prime_to_p(q, 41));
    let ok = special && size == expected && signs && shape.is_some();
    let o = outcome(
        ok,
        format!(
            "special {special}; class size {size} vs 2^{} = {expected}; all signs +1 {signs}; coefficient {} with 41 ∤ N",
            asm.k_exponent,
            shape.map_or("not of the form ±2^i/N".to_string(), |i| format!("±2^{i}/N")),
        ),
    );
    within(Duration::from_secs(300), t, o)
}

fn run_verify(d: i64, p: i64, workers: &str) -> (Vec<u8>, Option<i32>) {
    let out = Command::new(env!("CARGO_BIN_EXE_tpoly"))
        .args(["verify", "--d", &d.to_string(), "--p", &p.to_string(), "--seed", "11"])
        .env("TPOLY_WORKERS", workers)
        .output()
        .unwrap();
    (out.stdout, out.status.code())
}

fn determinism() -> Outcome {
    let mut bad = Vec::new();
    for (d, p) in [(3, 7), (7, 17)] {
        let a = run_verify(d, p, "1");
        let b = run_verify(d, p, "1");
        let c = run_verify(d, p, "8");
        if a.0.is_empty() || a != b || a != c {
            bad.push(format!("({d},{p})"));
        }
    }
    outcome(bad.is_empty(), format!("verify at (3,7), (7,17), twice with 1 worker and once with 8: differing {bad:?}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("point-set reproduction at (7,17)", point_sets),
        ("vertex formulas and h(T_k) against the oracle", vertex_formulas),
        ("greedy optimality on random multisets", greedy_optimality),
        ("h2 linearity", h2_linearity),
        ("example permutation optimality", example_permutation),
        ("valuation bound v_T(e_Q) >= ceil(w(Q))", valuation_bound),
        ("Dwork trace formula at d=2, p=7", trace_formula),
        ("NP on or above IHP at d=3, p=7", np_above_ihp),
        ("generic coincidence witness at d=3, p=7", coincidence_witness),
        ("leading coefficient equals the combo formula", leading_vs_combo),
        ("distribution formulas", distributions),
        ("β̃ pipeline at (13,41)", beta_pipeline_13_41),
        ("determinism across runs and worker counts", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        if !o.ok {
            failed += 1;
        }
        println!("criterion {:>2} {}: {} ({})", i + 1, if o.ok { "PASS" } else { "FAIL" }, name, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
