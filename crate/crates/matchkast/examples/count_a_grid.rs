//! Count perfect matchings of grid graphs, both through the determinant
//! and by exhaustive enumeration, and check the two agree.

use matchkast::graph::parse_pbg;
use matchkast::oracle::oracle_count;
use matchkast::regions::{rectangle, EdgeWeights, RectangleSpec};
use matchkast::sign::count_matchings;

fn main() {
    // Grids of any size come from the region builder.
    for (m, n) in [(2, 2), (3, 4), (4, 4), (6, 6), (8, 8)] {
        let g = rectangle(RectangleSpec::new(m, n).unwrap(), EdgeWeights::Unit);
        println!("R({m},{n}) has {} perfect matchings", count_matchings(&g));
    }

    // The same count works on any plane bipartite graph given in pbg form;
    // the rotation lines fix the embedding. This hexagon has two matchings.
    let hexagon = "\
pbg v1
vertex a b
vertex b w
vertex c b
vertex d w
vertex e b
vertex f w
edge e0 a b 1
edge e1 b c 1
edge e2 c d 1
edge e3 d e 1
edge e4 e f 1
edge e5 f a 1
rot a e5 e0
rot b e0 e1
rot c e1 e2
rot d e2 e3
rot e e3 e4
rot f e4 e5
outer e0 a
";
    let g = parse_pbg(hexagon).unwrap();
    let fast = count_matchings(&g);
    let slow = oracle_count(&g).unwrap();
    assert_eq!(fast, slow);
    println!("hexagon: determinant {fast}, enumeration {slow}");

    // Two-row grids follow the Fibonacci numbers shifted by one.
    let row: Vec<String> = (1..=10)
        .map(|n| {
            let g = rectangle(RectangleSpec::new(2, n).unwrap(), EdgeWeights::Unit);
            count_matchings(&g).to_string()
        })
        .collect();
    println!("R(2,n) for n = 1..10: {}", row.join(", "));
}
