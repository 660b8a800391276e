//! The three text formats round-trip: pbg for embedded graphs, cpd for
//! compound construction scripts, and axis for mirror assemblies. All are
//! line-oriented with `#` comments, so they diff and grep cleanly.

use matchkast::ciucu::{parse_axis, write_axis};
use matchkast::compound::{parse_cpd, write_cpd};
use matchkast::graph::{parse_pbg, write_pbg};
use matchkast::regions::{rectangle, EdgeWeights, RectangleSpec};

fn main() {
    let g = rectangle(RectangleSpec::new(2, 2).unwrap(), EdgeWeights::Variables);
    let text = write_pbg(&g).unwrap();
    println!("--- pbg v1 ---\n{text}");
    assert_eq!(parse_pbg(&text).unwrap(), g);

    let cpd = "\
cpd v1
base base.pbg
super super.pbg
stem f0 v1_2 0    # super edge, attachment, outer-walk gap
leaf u0 v1_1 0
";
    let parsed = parse_cpd(cpd).unwrap();
    let rewritten = write_cpd(&parsed.base_path, &parsed.super_path, &parsed.script);
    println!("--- cpd v1 ---\n{rewritten}");
    assert_eq!(parse_cpd(&rewritten).unwrap(), parsed);

    let axis = parse_axis("axis v1\nstem s0 v1_1\nleaf f0 v1_2 R\n").unwrap();
    let rewritten = write_axis(&axis);
    println!("--- axis v1 ---\n{rewritten}");
    assert_eq!(parse_axis(&rewritten).unwrap(), axis);

    // Parse errors carry line numbers.
    let err = parse_pbg("pbg v1\nvertex a purple\n").unwrap_err();
    println!("bad vertex line: {err}");
}
