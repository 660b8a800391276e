use std::collections::BTreeMap;
use std::fs;

use matchkast::compound::{
    build_compound, compose_sign_function, parse_cpd, reduced_graph,
};
use matchkast::graph::parse_pbg;
use matchkast::sign::{construct_sign_function, verify_sign_function};

fn main() {
    let dir = std::env::args().nth(1).unwrap();
    let name = std::env::args().nth(2).unwrap();
    let base = parse_pbg(&fs::read_to_string(format!("{dir}/{name}.base.pbg")).unwrap()).unwrap();
    let sup = parse_pbg(&fs::read_to_string(format!("{dir}/{name}.super.pbg")).unwrap()).unwrap();
    let cpd = parse_cpd(&fs::read_to_string(format!("{dir}/{name}.cpd")).unwrap()).unwrap();
    let h = build_compound(&base, &sup, &cpd.script).unwrap();
    let r = reduced_graph(&h).unwrap();

    println!("== supergraph vertices");
    for v in sup.vertices() {
        println!("  {} {:?}", v.id, v.color);
    }

    println!("== H faces touching stems/leaves");
    for w in h.graph().trace_faces() {
        let seq: Vec<String> =
            w.darts.iter().map(|d| format!("{}<{}", d.edge, d.tail)).collect();
        if seq.iter().any(|s| s.starts_with("st") || s.starts_with("lf")) {
            println!(
                "  {} {} darts: {}",
                if w.is_outer { "outer" } else { "inner" },
                w.darts.len(),
                seq.join(" ")
            );
        }
    }

    println!("== R faces");
    for w in r.trace_faces() {
        let seq: Vec<String> =
            w.darts.iter().map(|d| format!("{}<{}", d.edge, d.tail)).collect();
        println!(
            "  {} {} darts: {}",
            if w.is_outer { "outer" } else { "inner" },
            w.darts.len(),
            seq.join(" ")
        );
    }

    let sf_base = construct_sign_function(&base);
    let sf_red = construct_sign_function(&r);
    println!("== sf_red values");
    let mut vals = BTreeMap::new();
    for e in r.edges() {
        vals.insert(e.id.clone(), sf_red.get(&e.id).unwrap());
        println!("  {} {}", e.id, sf_red.get(&e.id).unwrap());
    }
    let _ = vals;

    let sf = compose_sign_function(&h, &sf_base, &sf_red).unwrap();
    let report = verify_sign_function(h.graph(), &sf, 200);
    println!("== composed verify: {:?} / {:?}", report.status, report.witness);
}
