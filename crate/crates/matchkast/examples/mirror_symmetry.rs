//! Join a graph with its mirror image along an axis of stems and leaves.
//! With leaves present, flipping a leaf to the other copy preserves the
//! count; with stems only, the count factors as 2^w times the counts of
//! two vertex-deleted halves.

use matchkast::ciucu::{
    build_symmetric, parse_axis, split_even_odd, verify_ciucu_lemma, verify_factorization,
};
use matchkast::regions::{rectangle, EdgeWeights, RectangleSpec};
use matchkast::sign::count_matchings;

fn main() {
    let half = rectangle(RectangleSpec::new(3, 4).unwrap(), EdgeWeights::Unit);

    // A stem-only axis: both attachments sit on the right edge of the grid.
    let stems = parse_axis("axis v1\nstem s0 v3_4\nstem s1 v2_4\n").unwrap();
    let sc = build_symmetric(&half, &stems).unwrap();
    println!(
        "stem-only: {} vertices, count {}",
        sc.graph().vertices().len(),
        count_matchings(sc.graph())
    );
    let (first, second) = split_even_odd(&sc).unwrap();
    println!(
        "factors: 2^{} * {} * {}",
        sc.w() / 2,
        count_matchings(&first),
        count_matchings(&second)
    );
    let report = verify_factorization(&sc);
    println!("{}", report.tsv_line());
    assert!(report.passed());

    // A mixed axis alternates stems and leaves; each leaf picks a copy.
    let mixed = parse_axis("axis v1\nstem s0 v3_4\nleaf f0 v2_4 L\n").unwrap();
    let sc = build_symmetric(&half, &mixed).unwrap();
    println!(
        "\nmixed axis: {} vertices, count {}",
        sc.graph().vertices().len(),
        count_matchings(sc.graph())
    );
    let report = verify_ciucu_lemma(&sc, "f0");
    println!("{}", report.tsv_line());
    assert!(report.passed());
}
