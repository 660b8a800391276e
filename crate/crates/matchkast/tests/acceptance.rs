//! Acceptance gate: one test, and so one pass/fail line, per release
//! criterion. Every bound, tolerance, and time limit is pinned as a
//! constant here; the shared corpus is generated once from a fixed seed.

use matchkast::ciucu::{ciucu_sign_function, verify_ciucu_lemma, verify_factorization, AxisKind};
use matchkast::compound::{
    check_odd_leaves, compose_sign_function, family, reduced_graph, verify_divisibility,
    verify_zero_sum,
};
use matchkast::corpus::{gen_corpus, Corpus};
use matchkast::oracle::oracle_count;
use matchkast::regions::{
    aztec_pillow, decompose_rectangle, pillow_divisibility_scan, pillow_vertex_id,
    product_formula_count, rect_divisibility_scan, rectangle, EdgeWeights, PillowSpec,
    RectangleSpec, DEFAULT_FORMULA_BITS,
};
use matchkast::ring::RingElement;
use matchkast::sign::{construct_sign_function, count_matchings, verify_sign_function};
use num_bigint::BigInt;
use std::collections::BTreeSet;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

const CORPUS_SEED: u64 = 0;
const CORPUS_BUDGET: usize = 12;
const MIN_CORPUS_GRAPHS: usize = 500;
const MIN_CORPUS_COMPOUNDS: usize = 50;
const MIN_CORPUS_SYMMETRIC: usize = 30;

/// Criterion 1: corpus graphs stay within this order, and the whole
/// determinant-versus-enumeration sweep stays within this time.
const MAX_CORPUS_ORDER: usize = 14;
const MAX_ORACLE_RECT_AREA: usize = 36;
const ORACLE_SWEEP_LIMIT: Duration = Duration::from_secs(60);

/// Criterion 2: the closed-form product is evaluated at this precision.
const FORMULA_MAX_SIDE: usize = 8;
const FORMULA_BITS: usize = DEFAULT_FORMULA_BITS;

/// Criterion 3: two-row counts follow the shifted Fibonacci numbers.
const FIB_PREFIX: usize = 20;

/// Criterion 6: every small rectangle against every admissible larger one.
const DIV_MAX_SMALL_SIDE: usize = 3;
const DIV_MAX_BIG_SIDE: usize = 11;

/// Criterion 7: every admissible even-area block decomposition.
const DECOMP_MAX_SIDE: usize = 7;

/// Criterion 9: divisibility across pillows, within this time.
const PILLOW_MAX_ORDER: usize = 13;
const PILLOW_SCAN_LIMIT: Duration = Duration::from_secs(600);

/// Criterion 10: graphs up to this order have every simple cycle checked;
/// larger ones are sampled up to the budget.
const ALL_CYCLES_MAX_ORDER: usize = 12;
const SAMPLED_CYCLE_BUDGET: usize = 1_000;

fn corpus() -> &'static Corpus {
    static CORPUS: OnceLock<Corpus> = OnceLock::new();
    CORPUS.get_or_init(|| gen_corpus(CORPUS_SEED, CORPUS_BUDGET))
}

fn unit_rectangle(m: usize, n: usize) -> matchkast::graph::PlanarBipartiteGraph {
    rectangle(RectangleSpec::new(m, n).expect("valid rectangle"), EdgeWeights::Unit)
}

#[test]
fn criterion_01_determinant_matches_exhaustive_enumeration() {
    let c = corpus();
    assert!(c.graphs.len() >= MIN_CORPUS_GRAPHS, "corpus quota");
    let start = Instant::now();
    for (name, g) in &c.graphs {
        assert!(g.vertices().len() <= MAX_CORPUS_ORDER, "{name} too large");
        assert_eq!(
            count_matchings(g),
            oracle_count(g).expect("within oracle budget"),
            "determinant disagrees with enumeration on {name}"
        );
    }
    let mut rects = 0;
    for m in 1..=MAX_ORACLE_RECT_AREA {
        for n in 1..=(MAX_ORACLE_RECT_AREA / m) {
            let g = unit_rectangle(m, n);
            assert_eq!(
                count_matchings(&g),
                oracle_count(&g).expect("within oracle budget"),
                "determinant disagrees with enumeration on R({m},{n})"
            );
            rects += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed <= ORACLE_SWEEP_LIMIT, "sweep took {elapsed:?}");
    println!(
        "criterion 1: pass ({} corpus graphs, {rects} rectangles, {elapsed:?})",
        c.graphs.len()
    );
}

#[test]
fn criterion_02_product_formula_matches_determinant() {
    let mut pairs = 0;
    for m in 1..=FORMULA_MAX_SIDE {
        for n in 1..=FORMULA_MAX_SIDE {
            if (m * n) % 2 != 0 {
                continue;
            }
            let formula =
                product_formula_count(m, n, FORMULA_BITS).expect("precision suffices");
            let det = count_matchings(&unit_rectangle(m, n))
                .as_integer()
                .expect("integer count");
            assert_eq!(formula, det, "R({m},{n})");
            pairs += 1;
        }
    }
    println!("criterion 2: pass ({pairs} side pairs at {FORMULA_BITS} bits)");
}

#[test]
fn criterion_03_two_row_counts_are_shifted_fibonacci() {
    let (mut prev, mut cur) = (BigInt::from(1), BigInt::from(1));
    for n in 1..=FIB_PREFIX {
        // cur runs 1, 2, 3, 5, ... starting at R(2,1) = 1
        let got = count_matchings(&unit_rectangle(2, n))
            .as_integer()
            .expect("integer count");
        assert_eq!(got, cur, "R(2,{n})");
        let next = &prev + &cur;
        prev = std::mem::replace(&mut cur, next);
    }
    println!("criterion 3: pass (prefix of length {FIB_PREFIX})");
}

#[test]
fn criterion_04_zero_sum_over_every_leaf_family() {
    let c = corpus();
    assert!(c.compounds.len() >= MIN_CORPUS_COMPOUNDS, "corpus quota");
    let mut families = 0;
    for (name, h) in &c.compounds {
        for leaf in h.leaves() {
            let fam = family(h, leaf).expect("leaf families exist");
            let report = verify_zero_sum(&fam).expect("family is checkable");
            assert!(report.passed(), "{name}/{leaf}: {report:?}");
            families += 1;
        }
    }
    println!(
        "criterion 4: pass ({families} families over {} compounds)",
        c.compounds.len()
    );
}

#[test]
fn criterion_05_base_count_divides_compound_count() {
    let c = corpus();
    assert!(c.compounds.len() >= MIN_CORPUS_COMPOUNDS, "corpus quota");
    for (name, h) in &c.compounds {
        let base = count_matchings(h.base());
        let whole = count_matchings(h.graph());
        let quotient = whole.exact_div(&base).expect("division is exact");
        assert_eq!(quotient.mul(&base), whole, "{name}: quotient identity");
        let report = verify_divisibility(h).expect("compound is checkable");
        assert!(report.passed(), "{name}: {report:?}");
    }
    println!("criterion 5: pass ({} compounds)", c.compounds.len());
}

#[test]
fn criterion_06_small_rectangles_divide_admissible_large_ones() {
    let mut checked = 0;
    for a in 1..=DIV_MAX_SMALL_SIDE {
        for b in 1..=DIV_MAX_SMALL_SIDE {
            let reports = rect_divisibility_scan(a, b, DIV_MAX_BIG_SIDE, DIV_MAX_BIG_SIDE, None);
            for r in &reports {
                assert!(r.passed(), "R({a},{b}): {r:?}");
            }
            checked += reports.len();
        }
    }
    println!("criterion 6: pass ({checked} reports)");
}

#[test]
fn criterion_07_decomposition_counts_sum_to_the_rectangle() {
    let mut instances = 0;
    for big_m in 1..=DECOMP_MAX_SIDE {
        for big_n in 1..=DECOMP_MAX_SIDE {
            if (big_m * big_n) % 2 != 0 {
                continue;
            }
            let whole = count_matchings(&unit_rectangle(big_m, big_n));
            for a in (1..=big_m).filter(|a| (big_m + 1) % (a + 1) == 0) {
                for b in (1..=big_n).filter(|b| (big_n + 1) % (b + 1) == 0) {
                    let pieces =
                        decompose_rectangle(big_m, big_n, a, b).expect("admissible");
                    let mut sum = RingElement::zero();
                    for piece in pieces {
                        for (k, part) in piece.parts.iter().enumerate() {
                            assert!(
                                check_odd_leaves(part).expect("part is checkable"),
                                "({big_m},{big_n},{a},{b}): part {k} has an even face"
                            );
                        }
                        sum = sum.add(&piece.count());
                    }
                    assert_eq!(sum, whole, "({big_m},{big_n},{a},{b}): sum identity");
                    instances += 1;
                }
            }
        }
    }
    println!("criterion 7: pass ({instances} instances)");
}

#[test]
fn criterion_08_symmetric_lemma_and_factorization() {
    let c = corpus();
    assert!(c.symmetric.len() >= MIN_CORPUS_SYMMETRIC, "corpus quota");
    let mut variable_weighted = 0;
    for (name, sc) in &c.symmetric {
        if sc.half().edges().iter().any(|e| !e.weight.is_constant()) {
            variable_weighted += 1;
        }
        let leaves: Vec<&str> = sc
            .axis()
            .iter()
            .filter(|v| matches!(v.kind, AxisKind::Leaf(_)))
            .map(|v| v.id.as_str())
            .collect();
        if leaves.is_empty() {
            let report = verify_factorization(sc);
            assert!(report.passed(), "{name}: {report:?}");
        } else {
            for leaf in leaves {
                let report = verify_ciucu_lemma(sc, leaf);
                assert!(report.passed(), "{name}/{leaf}: {report:?}");
            }
        }
    }
    assert!(variable_weighted > 0, "no variable-weighted instance exercised");
    println!(
        "criterion 8: pass ({} instances, {variable_weighted} variable-weighted)",
        c.symmetric.len()
    );
}

#[test]
fn criterion_09_pillow_divisibility_and_reference_outline() {
    let start = Instant::now();
    let reports = pillow_divisibility_scan(PILLOW_MAX_ORDER);
    let elapsed = start.elapsed();
    assert!(!reports.is_empty());
    for r in &reports {
        assert!(r.passed(), "{r:?}");
    }
    assert!(elapsed <= PILLOW_SCAN_LIMIT, "scan took {elapsed:?}");

    // The order-9 pillow is pinned to the reference outline: exactly the
    // lattice points on or inside this 52-corner rectilinear boundary.
    const OUTLINE: [(i64, i64); 52] = [
        (0, 0), (0, 1), (1, 1), (2, 1), (3, 1), (3, 2), (4, 2), (5, 2), (6, 2), (6, 3),
        (7, 3), (8, 3), (9, 3), (9, 4), (10, 4), (11, 4), (12, 4), (12, 5), (13, 5),
        (13, 4), (14, 4), (14, 3), (15, 3), (15, 2), (16, 2), (16, 1), (17, 1), (17, 0),
        (16, 0), (15, 0), (14, 0), (14, -1), (13, -1), (12, -1), (11, -1), (11, -2),
        (10, -2), (9, -2), (8, -2), (8, -3), (7, -3), (6, -3), (5, -3), (5, -4), (4, -4),
        (4, -3), (3, -3), (3, -2), (2, -2), (2, -1), (1, -1), (1, 0),
    ];
    let on_boundary = |px: i64, py: i64| {
        OUTLINE.iter().enumerate().any(|(i, &(x0, y0))| {
            let (x1, y1) = OUTLINE[(i + 1) % OUTLINE.len()];
            if x0 == x1 {
                px == x0 && (y0.min(y1)..=y0.max(y1)).contains(&py)
            } else {
                py == y0 && (x0.min(x1)..=x0.max(x1)).contains(&px)
            }
        })
    };
    let strictly_inside = |px: i64, py: i64| {
        let crossings = OUTLINE
            .iter()
            .enumerate()
            .filter(|&(i, &(x0, y0))| {
                let (x1, y1) = OUTLINE[(i + 1) % OUTLINE.len()];
                x0 == x1 && x0 > px && (y0.min(y1) <= py && py < y0.max(y1))
            })
            .count();
        crossings % 2 == 1
    };
    let mut expected = BTreeSet::new();
    for x in -1..=18 {
        for y in -5..=6 {
            if on_boundary(x, y) || strictly_inside(x, y) {
                expected.insert(pillow_vertex_id(x, y));
            }
        }
    }
    let got: BTreeSet<String> = aztec_pillow(PillowSpec::new(9).expect("valid order"))
        .vertices()
        .iter()
        .map(|v| v.id.clone())
        .collect();
    assert_eq!(got, expected, "order-9 vertex set");
    println!(
        "criterion 9: pass ({} divisibility pairs in {elapsed:?}, outline of {} vertices)",
        reports.len(),
        expected.len()
    );
}

#[test]
fn criterion_10_sign_functions_verify_on_the_full_corpus() {
    let c = corpus();
    let budget_for = |order: usize| {
        if order <= ALL_CYCLES_MAX_ORDER {
            usize::MAX // every simple cycle
        } else {
            SAMPLED_CYCLE_BUDGET
        }
    };
    for (name, g) in &c.graphs {
        let sf = construct_sign_function(g);
        let report = verify_sign_function(g, &sf, budget_for(g.vertices().len()));
        assert!(report.passed(), "{name}: {report:?}");
    }
    for (name, h) in &c.compounds {
        let reduced = reduced_graph(h).expect("reduced graph exists");
        let sf = compose_sign_function(
            h,
            &construct_sign_function(h.base()),
            &construct_sign_function(&reduced),
        )
        .expect("composition is defined");
        let g = h.graph();
        let report = verify_sign_function(g, &sf, budget_for(g.vertices().len()));
        assert!(report.passed(), "{name}: {report:?}");
    }
    for (name, sc) in &c.symmetric {
        let sf = ciucu_sign_function(sc);
        let g = sc.graph();
        let report = verify_sign_function(g, &sf, budget_for(g.vertices().len()));
        assert!(report.passed(), "{name}: {report:?}");
    }
    println!(
        "criterion 10: pass ({} constructed, {} composed, {} symmetric)",
        c.graphs.len(),
        c.compounds.len(),
        c.symmetric.len()
    );
}
