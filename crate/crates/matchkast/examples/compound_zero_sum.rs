//! Build a compound graph: copies of a base graph, one per vertex of a
//! supergraph, joined by stems along super edges and decorated with leaves.
//! Moving one leaf around its attachment class yields a family of graphs
//! whose counts admit a signed zero sum, which forces the base count to
//! divide the compound count.

use matchkast::compound::{
    build_compound, family, verify_divisibility, verify_zero_sum, CompoundScript, LeafSpec,
    StemSpec,
};
use matchkast::graph::parse_pbg;
use matchkast::regions::{rectangle, EdgeWeights, RectangleSpec};
use matchkast::sign::count_matchings;

fn main() {
    // Base: a 2x2 grid. Supergraph: a single edge u0 -- u1, so the compound
    // is two base copies joined by one stem, plus one leaf to balance it.
    let base = rectangle(RectangleSpec::new(2, 2).unwrap(), EdgeWeights::Unit);
    let supergraph = parse_pbg(
        "pbg v1
vertex u0 b
vertex u1 w
edge f0 u0 u1 1
rot u0 f0
rot u1 f0
outer f0 u0
",
    )
    .unwrap();
    let script = CompoundScript {
        stems: vec![StemSpec {
            super_edge: "f0".into(),
            base_vertex: "v1_2".into(),
            gap: 0,
            slot: 0,
        }],
        leaves: vec![LeafSpec {
            super_vertex: "u0".into(),
            base_vertex: "v1_1".into(),
            gap: 0,
            slot: 0,
        }],
    };
    let h = build_compound(&base, &supergraph, &script).unwrap();
    println!(
        "compound: {} vertices, stems {:?}, leaves {:?}",
        h.graph().vertices().len(),
        h.stems(),
        h.leaves()
    );
    println!("base count {}, compound count {}", count_matchings(h.base()), count_matchings(h.graph()));

    // The family of the one leaf: every way to reattach it within its class.
    let fam = family(&h, "lf0").unwrap();
    println!("family of lf0 has {} members with counts:", fam.members.len());
    for member in &fam.members {
        println!("  {}", count_matchings(member.graph()));
    }
    let zero_sum = verify_zero_sum(&fam).unwrap();
    println!("{}", zero_sum.tsv_line());
    assert!(zero_sum.passed());

    let divides = verify_divisibility(&h).unwrap();
    println!("{}", divides.tsv_line());
    assert!(divides.passed());
}
