//! Counts live in a polynomial ring: give each edge its own variable and
//! the matching count becomes the generating polynomial, one monomial per
//! matching. Division of counts is exact in that ring.

use matchkast::oracle::oracle_count;
use matchkast::regions::{rectangle, EdgeWeights, RectangleSpec};
use matchkast::ring::RingElement;
use matchkast::sign::count_matchings;

fn main() {
    let g = rectangle(RectangleSpec::new(2, 3).unwrap(), EdgeWeights::Variables);
    let count = count_matchings(&g);
    println!("R(2,3) with edge variables:");
    println!("  {count}");
    println!("  {} matchings, one monomial each", count.term_count());
    assert_eq!(count, oracle_count(&g).unwrap());

    // Ring arithmetic: build (x + y)^2 and divide it back down.
    let x = RingElement::var("x");
    let y = RingElement::var("y");
    let sum = x.add(&y);
    let square = sum.mul(&sum);
    println!("(x + y)^2 = {square}");
    let back = square.exact_div(&sum).unwrap();
    println!("(x + y)^2 / (x + y) = {back}");
    assert_eq!(back, sum);

    // Division fails cleanly when nothing exact exists.
    let err = square.exact_div(&x.sub(&y)).unwrap_err();
    println!("(x + y)^2 / (x - y): {err}");
}
