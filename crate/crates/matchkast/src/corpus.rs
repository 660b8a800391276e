//! Deterministic pseudo-random test corpus: plain maps, compound graphs, and
//! symmetric compounds, shared by the property suites and exported by the
//! command line. All randomness flows from one seed through a counter-mode
//! generator, so equal calls yield byte-identical corpora.

use crate::ciucu::{build_symmetric, AxisEntry, AxisKind, AxisSpec, Side, SymmetricCompound};
use crate::compound::{build_compound, outer_visits, CompoundGraph, CompoundScript, LeafSpec, StemSpec};
use crate::graph::{Color, Dart, Edge, PlanarBipartiteGraph, Vertex};
use crate::regions::{rectangle, EdgeWeights, RectangleSpec};
use crate::ring::RingElement;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

/// Named instances for the property suites. Plain graphs stay within the
/// vertex budget so the enumeration oracle answers in well under a second;
/// compounds and symmetric compounds are built from small bases and stay
/// determinant-friendly.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub graphs: Vec<(String, PlanarBipartiteGraph)>,
    pub compounds: Vec<(String, CompoundGraph)>,
    pub symmetric: Vec<(String, SymmetricCompound)>,
}

const GRAPH_QUOTA: usize = 520;
const COMPOUND_QUOTA: usize = 56;
const SYMMETRIC_QUOTA: usize = 36;
const ATTEMPT_CAP: usize = 20_000;

fn weight_for(edge_id: &str, vars: bool) -> RingElement {
    if vars {
        RingElement::var(edge_id)
    } else {
        RingElement::one()
    }
}

/// A uniformly random labeled tree with alternating colors; each child is
/// spliced into its parent's rotation at a random position.
fn random_tree(rng: &mut ChaCha8Rng, n: usize, vars: bool) -> PlanarBipartiteGraph {
    assert!(n >= 2);
    let mut vertices = vec![Vertex { id: "t0".to_string(), color: Color::Black }];
    let mut edges = Vec::new();
    let mut rotation: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for k in 1..n {
        let parent = rng.gen_range(0..k);
        let id = format!("t{k}");
        let eid = format!("e{}", k - 1);
        vertices.push(Vertex {
            id: id.clone(),
            color: vertices[parent].color.flip(),
        });
        edges.push(Edge {
            id: eid.clone(),
            u: format!("t{parent}"),
            v: id.clone(),
            weight: weight_for(&eid, vars),
        });
        let order = rotation.entry(format!("t{parent}")).or_default();
        let at = rng.gen_range(0..=order.len());
        order.insert(at, eid.clone());
        rotation.insert(id, vec![eid]);
    }
    PlanarBipartiteGraph::new(vertices, edges, rotation, Some(Dart::new("e0", "t0")))
        .expect("trees embed in the plane")
}

/// An even cycle; rotations at degree-two vertices admit a single cyclic
/// order, so any labeling embeds.
fn even_cycle(len: usize, vars: bool) -> PlanarBipartiteGraph {
    assert!(len >= 4 && len % 2 == 0);
    let vertices = (0..len)
        .map(|i| Vertex {
            id: format!("c{i}"),
            color: if i % 2 == 0 { Color::Black } else { Color::White },
        })
        .collect();
    let edges = (0..len)
        .map(|i| Edge {
            id: format!("z{i}"),
            u: format!("c{i}"),
            v: format!("c{}", (i + 1) % len),
            weight: weight_for(&format!("z{i}"), vars),
        })
        .collect();
    let rotation = (0..len)
        .map(|i| {
            (
                format!("c{i}"),
                vec![format!("z{}", (i + len - 1) % len), format!("z{i}")],
            )
        })
        .collect();
    PlanarBipartiteGraph::new(vertices, edges, rotation, Some(Dart::new("z0", "c0")))
        .expect("cycles embed in the plane")
}

/// A random induced submap of a small grid, shrunk to the vertex budget.
fn random_grid_subgraph(
    rng: &mut ChaCha8Rng,
    budget: usize,
    vars: bool,
) -> Option<PlanarBipartiteGraph> {
    let m = rng.gen_range(2..=4usize);
    let n = rng.gen_range(2..=5usize);
    let spec = RectangleSpec::new(m, n).expect("positive sides");
    let g = rectangle(spec, if vars { EdgeWeights::Variables } else { EdgeWeights::Unit });
    let drop_prob = rng.gen_range(0.1..0.5);
    let mut removed: BTreeSet<String> = g
        .vertices()
        .iter()
        .filter(|_| rng.gen_bool(drop_prob))
        .map(|v| v.id.clone())
        .collect();
    let mut sub = g.delete_vertices(&removed);
    while sub.vertices().len() > budget {
        let i = rng.gen_range(0..sub.vertices().len());
        removed.insert(sub.vertices()[i].id.clone());
        sub = g.delete_vertices(&removed);
    }
    (!sub.vertices().is_empty()).then_some(sub)
}

/// Boundary vertices in outer-walk order, split by color.
fn boundary_palette(g: &PlanarBipartiteGraph) -> (Vec<String>, Vec<String>) {
    let (_, visits) = outer_visits(g).expect("corpus bases have outer walks");
    let mut order: Vec<(usize, &String)> =
        visits.iter().map(|(v, ps)| (ps[0], v)).collect();
    order.sort();
    let mut whites = Vec::new();
    let mut blacks = Vec::new();
    for (_, v) in order {
        match g.vertex(v).expect("walk vertex").color {
            Color::White => whites.push(v.clone()),
            Color::Black => blacks.push(v.clone()),
        }
    }
    (whites, blacks)
}

fn path_supergraph(n: usize) -> PlanarBipartiteGraph {
    let vertices = (0..n)
        .map(|i| Vertex {
            id: format!("u{i}"),
            color: if i % 2 == 0 { Color::Black } else { Color::White },
        })
        .collect();
    let edges = (0..n - 1)
        .map(|i| Edge {
            id: format!("f{i}"),
            u: format!("u{i}"),
            v: format!("u{}", i + 1),
            weight: RingElement::one(),
        })
        .collect();
    let mut rotation: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for i in 0..n - 1 {
        rotation.entry(format!("u{i}")).or_default().push(format!("f{i}"));
        rotation.entry(format!("u{}", i + 1)).or_default().push(format!("f{i}"));
    }
    PlanarBipartiteGraph::new(vertices, edges, rotation, Some(Dart::new("f0", "u0")))
        .expect("paths embed in the plane")
}

fn cycle_supergraph(len: usize) -> PlanarBipartiteGraph {
    even_cycle(len, false)
}

fn star_supergraph(arms: usize) -> PlanarBipartiteGraph {
    let mut vertices = vec![Vertex { id: "u0".to_string(), color: Color::Black }];
    let mut edges = Vec::new();
    let mut rotation: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for i in 0..arms {
        let id = format!("u{}", i + 1);
        vertices.push(Vertex { id: id.clone(), color: Color::White });
        edges.push(Edge {
            id: format!("f{i}"),
            u: "u0".to_string(),
            v: id.clone(),
            weight: RingElement::one(),
        });
        rotation.entry("u0".to_string()).or_default().push(format!("f{i}"));
        rotation.insert(id, vec![format!("f{i}")]);
    }
    PlanarBipartiteGraph::new(vertices, edges, rotation, Some(Dart::new("f0", "u0")))
        .expect("stars embed in the plane")
}

/// One seeded attempt at a compound script over the given base and super.
/// Stems sit on white boundary vertices, leaves on black ones, one leaf per
/// stem; per-copy attachment vertices stay distinct. None when the greedy
/// assignment runs out of room.
fn compound_attempt(
    rng: &mut ChaCha8Rng,
    base: &PlanarBipartiteGraph,
    sup: &PlanarBipartiteGraph,
) -> Option<CompoundScript> {
    let (whites, blacks) = boundary_palette(base);
    let mut stem_used: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    let mut stems = Vec::new();
    for e in sup.edges() {
        let mut candidates = whites.clone();
        candidates.shuffle(rng);
        let q = candidates.into_iter().find(|q| {
            !stem_used.get(e.u.as_str()).is_some_and(|s| s.contains(q))
                && !stem_used.get(e.v.as_str()).is_some_and(|s| s.contains(q))
        })?;
        stem_used.entry(e.u.as_str()).or_default().insert(q.clone());
        stem_used.entry(e.v.as_str()).or_default().insert(q.clone());
        stems.push(StemSpec {
            super_edge: e.id.clone(),
            base_vertex: q,
            gap: 0,
            slot: 0,
        });
    }
    let mut leaf_used: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut leaves = Vec::new();
    for _ in 0..stems.len() {
        let sv = sup.vertices()[rng.gen_range(0..sup.vertices().len())].id.clone();
        let mut candidates = blacks.clone();
        candidates.shuffle(rng);
        let q = candidates
            .into_iter()
            .find(|q| !leaf_used.get(&sv).is_some_and(|s| s.contains(q)))?;
        leaf_used.entry(sv.clone()).or_default().insert(q.clone());
        leaves.push(LeafSpec { super_vertex: sv, base_vertex: q, gap: 0, slot: 0 });
    }
    Some(CompoundScript { stems, leaves })
}

/// One seeded attempt at an axis spec over the half. Attachments are sampled
/// per color so the assembled graph balances, listed in outer-walk order;
/// theorem-form attempts emit stems only, others alternate stems and leaves.
fn symmetric_attempt(
    rng: &mut ChaCha8Rng,
    half: &PlanarBipartiteGraph,
    theorem_form: bool,
) -> Option<AxisSpec> {
    let (whites, blacks) = boundary_palette(half);
    let need = 2 * (half.white_count() as i64 - half.black_count() as i64);
    let k = 2 * rng.gen_range(1..=3i64);
    // black axis vertices sit on white attachments; solve for the split
    let at_white = (k + need) / 2;
    let at_black = k - at_white;
    if (k + need) % 2 != 0
        || !(0..=k).contains(&at_white)
        || at_white as usize > whites.len()
        || at_black as usize > blacks.len()
    {
        return None;
    }
    let mut chosen: BTreeSet<String> = whites
        .choose_multiple(rng, at_white as usize)
        .cloned()
        .collect();
    chosen.extend(blacks.choose_multiple(rng, at_black as usize).cloned());

    let (_, visits) = outer_visits(half).expect("palette came from the walk");
    let mut order: Vec<(usize, &String)> = chosen
        .iter()
        .map(|v| (visits[v][0], v))
        .collect();
    order.sort();
    let lead_stem = rng.gen_bool(0.5);
    let entries = order
        .into_iter()
        .enumerate()
        .map(|(i, (_, q))| {
            let stem = theorem_form || (i % 2 == 0) == lead_stem;
            AxisEntry {
                id: format!("{}{}", if stem { "s" } else { "f" }, i),
                base_vertex: q.clone(),
                kind: if stem {
                    AxisKind::Stem
                } else if rng.gen_bool(0.5) {
                    AxisKind::Leaf(Side::Left)
                } else {
                    AxisKind::Leaf(Side::Right)
                },
            }
        })
        .collect();
    Some(AxisSpec { entries })
}

/// The deterministic corpus for `seed`. `budget` caps plain-graph order and
/// must be at least 8; compounds stay under roughly forty vertices and
/// symmetric compounds under thirty regardless of the budget.
pub fn gen_corpus(seed: u64, budget: usize) -> Corpus {
    assert!(budget >= 8, "budget {budget} leaves no room to generate");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut graphs = Vec::new();
    for m in 1..=budget {
        for n in m..=budget {
            if m * n < 2 || m * n > budget {
                continue;
            }
            let spec = RectangleSpec::new(m, n).expect("positive sides");
            graphs.push((
                format!("g{:03}_rect{m}x{n}", graphs.len()),
                rectangle(spec, EdgeWeights::Unit),
            ));
            graphs.push((
                format!("g{:03}_rectv{m}x{n}", graphs.len()),
                rectangle(spec, EdgeWeights::Variables),
            ));
        }
    }
    let mut i = 0;
    while graphs.len() < GRAPH_QUOTA {
        let vars = i % 5 == 4;
        let (kind, g) = match i % 4 {
            0 => {
                let n = rng.gen_range(2..=budget);
                ("tree", Some(random_tree(&mut rng, n, vars)))
            }
            3 => {
                let len = rng.gen_range(2..=budget / 2) * 2;
                ("cycle", Some(even_cycle(len, vars)))
            }
            _ => ("grid", random_grid_subgraph(&mut rng, budget, vars)),
        };
        i += 1;
        if let Some(g) = g {
            graphs.push((format!("g{:03}_{kind}", graphs.len()), g));
        }
    }

    let base_specs: Vec<(usize, usize)> = vec![(1, 2), (1, 3), (2, 2), (1, 4), (2, 3), (3, 2), (2, 4)];
    let supers = vec![
        ("p2", path_supergraph(2)),
        ("p3", path_supergraph(3)),
        ("p4", path_supergraph(4)),
        ("c4", cycle_supergraph(4)),
        ("star", star_supergraph(3)),
    ];
    let mut compounds: Vec<(String, CompoundGraph)> = Vec::new();
    for attempt in 0..ATTEMPT_CAP {
        if compounds.len() >= COMPOUND_QUOTA {
            break;
        }
        let _ = attempt;
        let (m, n) = base_specs[rng.gen_range(0..base_specs.len())];
        let vars = compounds.len() % 3 == 1;
        let base = rectangle(
            RectangleSpec::new(m, n).expect("positive sides"),
            if vars { EdgeWeights::Variables } else { EdgeWeights::Unit },
        );
        let (sup_name, sup) = &supers[rng.gen_range(0..supers.len())];
        let Some(script) = compound_attempt(&mut rng, &base, sup) else {
            continue;
        };
        if let Ok(h) = build_compound(&base, sup, &script) {
            compounds.push((
                format!("c{:02}_{m}x{n}{}_{sup_name}", compounds.len(), if vars { "v" } else { "" }),
                h,
            ));
        }
    }
    assert!(
        compounds.len() >= COMPOUND_QUOTA,
        "compound generation stalled at {}",
        compounds.len()
    );

    let half_specs: Vec<(usize, usize)> =
        vec![(1, 2), (1, 3), (2, 2), (2, 3), (3, 2), (1, 4), (2, 4), (3, 4)];
    let mut symmetric: Vec<(String, SymmetricCompound)> = Vec::new();
    for attempt in 0..ATTEMPT_CAP {
        if symmetric.len() >= SYMMETRIC_QUOTA {
            break;
        }
        let _ = attempt;
        let theorem_form = symmetric.len() % 3 == 0;
        let vars = symmetric.len() % 2 == 1;
        let (m, n) = half_specs[rng.gen_range(0..half_specs.len())];
        let mut half = rectangle(
            RectangleSpec::new(m, n).expect("positive sides"),
            if vars { EdgeWeights::Variables } else { EdgeWeights::Unit },
        );
        // clip a corner now and then for non-rectangular halves
        if m >= 3 && n >= 3 && rng.gen_bool(0.3) {
            half = half.delete_vertices(&BTreeSet::from(["v1_1".to_string()]));
        }
        let Some(spec) = symmetric_attempt(&mut rng, &half, theorem_form) else {
            continue;
        };
        if let Ok(sc) = build_symmetric(&half, &spec) {
            symmetric.push((
                format!(
                    "s{:02}_{m}x{n}{}_{}",
                    symmetric.len(),
                    if vars { "v" } else { "" },
                    if theorem_form { "stems" } else { "mixed" }
                ),
                sc,
            ));
        }
    }
    assert!(
        symmetric.len() >= SYMMETRIC_QUOTA,
        "symmetric generation stalled at {}",
        symmetric.len()
    );

    Corpus { graphs, compounds, symmetric }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::oracle_count;
    use crate::sign::{construct_sign_function, count_matchings, verify_sign_function};
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn shared() -> &'static Corpus {
        static CORPUS: OnceLock<Corpus> = OnceLock::new();
        CORPUS.get_or_init(|| gen_corpus(0, 12))
    }

    #[test]
    fn corpus_is_deterministic_and_meets_quotas() {
        let c = shared();
        assert_eq!(*c, gen_corpus(0, 12));
        assert_ne!(c.graphs, gen_corpus(1, 12).graphs);

        assert!(c.graphs.len() >= 500);
        assert!(c.compounds.len() >= 50);
        assert!(c.symmetric.len() >= 30);

        let mut names = BTreeSet::new();
        for (name, g) in &c.graphs {
            assert!(names.insert(name.clone()), "duplicate {name}");
            assert!(g.vertices().len() <= 12, "{name} is over budget");
        }
        let has_vars = |g: &PlanarBipartiteGraph| {
            g.edges().iter().any(|e| e.weight.as_integer().is_none())
        };
        assert!(c.graphs.iter().any(|(_, g)| has_vars(g)));
        assert!(c.compounds.iter().any(|(_, h)| has_vars(h.base())));
        assert!(c.symmetric.iter().any(|(_, sc)| has_vars(sc.half())));

        let stem_only = c.symmetric.iter().filter(|(_, sc)| sc.axis().len() == sc.w());
        let with_leaves = c.symmetric.iter().filter(|(_, sc)| sc.axis().len() > sc.w());
        assert!(stem_only.count() >= 8);
        assert!(with_leaves.count() >= 12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        // spot-check the central cross-check on random corpus members; the
        // acceptance suite sweeps the whole corpus
        #[test]
        fn sampled_graphs_count_like_the_oracle(idx in 0usize..10_000) {
            let c = shared();
            let (name, g) = &c.graphs[idx % c.graphs.len()];
            let det = count_matchings(g);
            let oracle = oracle_count(g).unwrap();
            prop_assert_eq!(&det, &oracle, "{}: {} vs {}", name, det, oracle);
        }

        #[test]
        fn sampled_sign_functions_verify(idx in 0usize..10_000) {
            let c = shared();
            let (name, g) = &c.graphs[idx % c.graphs.len()];
            let sf = construct_sign_function(g);
            let report = verify_sign_function(g, &sf, 200);
            prop_assert!(report.passed(), "{}: {:?}", name, report);
        }
    }
}
