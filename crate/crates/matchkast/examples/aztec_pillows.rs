//! Aztec pillows: a family of jagged lattice regions whose matching counts
//! divide each other whenever the orders line up. The scan checks every
//! admissible pair up to a bound.

use matchkast::regions::{aztec_pillow, pillow_divisibility_scan, PillowSpec};
use matchkast::sign::count_matchings;

fn main() {
    for order in 1..=9 {
        let g = aztec_pillow(PillowSpec::new(order).unwrap());
        println!(
            "pillow {order}: {} vertices, count {}",
            g.vertices().len(),
            count_matchings(&g)
        );
    }

    println!();
    for report in pillow_divisibility_scan(13) {
        println!("{}", report.tsv_line());
        assert!(report.passed());
    }
}
