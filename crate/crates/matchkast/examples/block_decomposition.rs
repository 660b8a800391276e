//! Cut a rectangle into a grid of smaller blocks separated by one-vertex
//! streets, and enumerate every way to resolve the street vertices into
//! deleted dominoes, stems, and leaves. The resulting piece counts sum back
//! to the rectangle's count, which is how the divisibility theorem for
//! nested rectangles is proved.

use matchkast::regions::{decompose_rectangle, rectangle, EdgeWeights, RectangleSpec};
use matchkast::ring::RingElement;
use matchkast::sign::count_matchings;

fn main() {
    // R(1,4) blocks tile R(3,4): row 2 becomes a street.
    let (big_m, big_n, a, b) = (3, 4, 1, 4);
    let pieces = decompose_rectangle(big_m, big_n, a, b).unwrap();
    println!("R({a},{b}) blocks inside R({big_m},{big_n}), block grid {:?}:", pieces.grid());

    let mut sum = RingElement::zero();
    let mut rows = 0;
    for piece in pieces {
        let count = piece.count();
        println!(
            "  {} deleted dominoes, {} parts, count {count}",
            piece.dominoes.len(),
            piece.parts.len(),
        );
        sum = sum.add(&count);
        rows += 1;
    }

    let whole = count_matchings(&rectangle(
        RectangleSpec::new(big_m, big_n).unwrap(),
        EdgeWeights::Unit,
    ));
    println!("{rows} pieces, total {sum}, rectangle count {whole}");
    assert_eq!(sum, whole);
}
