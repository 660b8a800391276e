//! Brute-force perfect matching enumeration.
//!
//! Ground truth for everything else in the crate: plain backtracking with no
//! algebraic shortcuts, kept naive enough to trust. Usable to roughly 40
//! vertices; a node budget makes larger inputs fail loudly instead of
//! hanging.

use crate::graph::PlanarBipartiteGraph;
use crate::ring::RingElement;
use std::collections::BTreeSet;
use thiserror::Error;

pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("enumeration exceeded the budget of {budget} search nodes")]
    BudgetExceeded { budget: u64 },
}

/// A perfect matching, as the set of chosen edge ids.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Matching {
    pub edges: BTreeSet<String>,
}

struct Search<'g> {
    g: &'g PlanarBipartiteGraph,
    // vertex index -> incident (edge index, other vertex index)
    incident: Vec<Vec<(usize, usize)>>,
    covered: Vec<bool>,
    chosen: Vec<usize>,
    found: Vec<Matching>,
    nodes_left: u64,
    budget: u64,
}

impl<'g> Search<'g> {
    fn new(g: &'g PlanarBipartiteGraph, budget: u64) -> Self {
        let index_of = |id: &str| {
            g.vertices()
                .binary_search_by(|v| v.id.as_str().cmp(id))
                .expect("endpoint exists")
        };
        let mut incident = vec![Vec::new(); g.vertices().len()];
        for (ei, e) in g.edges().iter().enumerate() {
            let ui = index_of(&e.u);
            let vi = index_of(&e.v);
            incident[ui].push((ei, vi));
            incident[vi].push((ei, ui));
        }
        Search {
            g,
            incident,
            covered: vec![false; g.vertices().len()],
            chosen: Vec::new(),
            found: Vec::new(),
            nodes_left: budget,
            budget,
        }
    }

    fn run(&mut self) -> Result<(), OracleError> {
        if self.nodes_left == 0 {
            return Err(OracleError::BudgetExceeded { budget: self.budget });
        }
        self.nodes_left -= 1;

        // branch on an uncovered vertex of minimum remaining degree
        let mut pick: Option<(usize, usize)> = None;
        for (vi, cov) in self.covered.iter().enumerate() {
            if *cov {
                continue;
            }
            let deg = self.incident[vi]
                .iter()
                .filter(|(_, other)| !self.covered[*other])
                .count();
            if deg == 0 {
                return Ok(()); // dead end, this vertex can never be covered
            }
            if pick.map(|(d, _)| deg < d).unwrap_or(true) {
                pick = Some((deg, vi));
            }
        }
        let Some((_, vi)) = pick else {
            let edges = self
                .chosen
                .iter()
                .map(|&ei| self.g.edges()[ei].id.clone())
                .collect();
            self.found.push(Matching { edges });
            return Ok(());
        };

        for (ei, other) in self.incident[vi].clone() {
            if self.covered[other] {
                continue;
            }
            self.covered[vi] = true;
            self.covered[other] = true;
            self.chosen.push(ei);
            self.run()?;
            self.chosen.pop();
            self.covered[vi] = false;
            self.covered[other] = false;
        }
        Ok(())
    }
}

/// Every perfect matching exactly once, sorted by edge-id set.
pub fn enumerate_matchings(g: &PlanarBipartiteGraph) -> Result<Vec<Matching>, OracleError> {
    enumerate_matchings_with_budget(g, DEFAULT_NODE_BUDGET)
}

pub fn enumerate_matchings_with_budget(
    g: &PlanarBipartiteGraph,
    budget: u64,
) -> Result<Vec<Matching>, OracleError> {
    let mut search = Search::new(g, budget);
    search.run()?;
    let mut found = std::mem::take(&mut search.found);
    found.sort();
    debug_assert!(found.windows(2).all(|w| w[0] < w[1]));
    Ok(found)
}

/// Sum over perfect matchings of the product of edge weights.
pub fn oracle_count(g: &PlanarBipartiteGraph) -> Result<RingElement, OracleError> {
    oracle_count_with_budget(g, DEFAULT_NODE_BUDGET)
}

pub fn oracle_count_with_budget(
    g: &PlanarBipartiteGraph,
    budget: u64,
) -> Result<RingElement, OracleError> {
    let matchings = enumerate_matchings_with_budget(g, budget)?;
    let mut sum = RingElement::zero();
    for m in &matchings {
        let mut prod = RingElement::one();
        for id in &m.edges {
            prod = prod.mul(&g.edge(id).expect("matching edge").weight);
        }
        sum = sum.add(&prod);
    }
    Ok(sum)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::graph::{Color, Dart, Edge, PlanarBipartiteGraph, Vertex};
    use num_bigint::BigInt;
    use std::collections::BTreeMap;

    /// m×n grid graph, rows 1..=m top to bottom, columns 1..=n left to
    /// right. Vertex (1,1) is black, rotations are clockwise, the outer dart
    /// runs west along the top edge.
    pub(crate) fn grid(m: usize, n: usize) -> PlanarBipartiteGraph {
        let vid = |i: usize, j: usize| format!("v{i}_{j}");
        let hid = |i: usize, j: usize| format!("h{i}_{j}");
        let sid = |i: usize, j: usize| format!("s{i}_{j}");
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        let mut rotation: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for i in 1..=m {
            for j in 1..=n {
                let color = if (i + j) % 2 == 0 { Color::Black } else { Color::White };
                vertices.push(Vertex { id: vid(i, j), color });
                let mut order = Vec::new();
                if i > 1 {
                    order.push(sid(i - 1, j)); // north
                }
                if j < n {
                    order.push(hid(i, j)); // east
                }
                if i < m {
                    order.push(sid(i, j)); // south
                }
                if j > 1 {
                    order.push(hid(i, j - 1)); // west
                }
                rotation.insert(vid(i, j), order);
            }
        }
        for i in 1..=m {
            for j in 1..n {
                edges.push(Edge {
                    id: hid(i, j),
                    u: vid(i, j),
                    v: vid(i, j + 1),
                    weight: RingElement::one(),
                });
            }
        }
        for i in 1..m {
            for j in 1..=n {
                edges.push(Edge {
                    id: sid(i, j),
                    u: vid(i, j),
                    v: vid(i + 1, j),
                    weight: RingElement::one(),
                });
            }
        }
        let outer = if n >= 2 {
            Some(Dart::new(hid(1, 1), vid(1, 2)))
        } else if m >= 2 {
            Some(Dart::new(sid(1, 1), vid(1, 1)))
        } else {
            None
        };
        PlanarBipartiteGraph::new(vertices, edges, rotation, outer).unwrap()
    }

    fn four_cycle() -> PlanarBipartiteGraph {
        // square with variable weights: a top, b right, c bottom, d left
        let v = |id: &str, c| Vertex { id: id.to_string(), color: c };
        let e = |id: &str, u: &str, vv: &str| Edge {
            id: id.to_string(),
            u: u.to_string(),
            v: vv.to_string(),
            weight: RingElement::var(id),
        };
        let rotation: BTreeMap<String, Vec<String>> = [
            ("nw", vec!["a", "d"]),
            ("ne", vec!["b", "a"]),
            ("se", vec!["b", "c"]),
            ("sw", vec!["c", "d"]),
        ]
        .into_iter()
        .map(|(v, es)| (v.to_string(), es.into_iter().map(String::from).collect()))
        .collect();
        PlanarBipartiteGraph::new(
            vec![
                v("nw", Color::Black),
                v("ne", Color::White),
                v("se", Color::Black),
                v("sw", Color::White),
            ],
            vec![e("a", "nw", "ne"), e("b", "ne", "se"), e("c", "se", "sw"), e("d", "sw", "nw")],
            rotation,
            Some(Dart::new("a", "ne")),
        )
        .unwrap()
    }

    #[test]
    fn single_edge_has_one_matching() {
        let g = PlanarBipartiteGraph::new(
            vec![
                Vertex { id: "a".into(), color: Color::Black },
                Vertex { id: "b".into(), color: Color::White },
            ],
            vec![Edge {
                id: "e".into(),
                u: "a".into(),
                v: "b".into(),
                weight: RingElement::var("x"),
            }],
            [("a".to_string(), vec!["e".to_string()]), ("b".to_string(), vec!["e".to_string()])]
                .into_iter()
                .collect(),
            Some(Dart::new("e", "a")),
        )
        .unwrap();
        let ms = enumerate_matchings(&g).unwrap();
        assert_eq!(ms.len(), 1);
        assert_eq!(oracle_count(&g).unwrap(), RingElement::var("x"));
    }

    #[test]
    fn small_grids_match_known_counts() {
        assert_eq!(enumerate_matchings(&grid(2, 2)).unwrap().len(), 2);
        assert_eq!(enumerate_matchings(&grid(2, 3)).unwrap().len(), 3);
        assert_eq!(enumerate_matchings(&grid(3, 4)).unwrap().len(), 11);
    }

    #[test]
    fn four_cycle_counts_opposite_pairs() {
        let g = four_cycle();
        let want: RingElement = "a*c + b*d".parse().unwrap();
        assert_eq!(oracle_count(&g).unwrap(), want);
    }

    #[test]
    fn odd_graph_has_no_matchings() {
        assert_eq!(enumerate_matchings(&grid(1, 3)).unwrap().len(), 0);
        assert_eq!(oracle_count(&grid(3, 3)).unwrap(), RingElement::zero());
    }

    #[test]
    fn empty_graph_has_the_empty_matching() {
        let g = PlanarBipartiteGraph::new(vec![], vec![], BTreeMap::new(), None).unwrap();
        let ms = enumerate_matchings(&g).unwrap();
        assert_eq!(ms.len(), 1);
        assert!(ms[0].edges.is_empty());
        assert_eq!(oracle_count(&g).unwrap(), RingElement::one());
    }

    #[test]
    fn isolated_vertex_kills_all_matchings() {
        let g = PlanarBipartiteGraph::new(
            vec![Vertex { id: "a".into(), color: Color::Black }],
            vec![],
            BTreeMap::new(),
            None,
        )
        .unwrap();
        assert_eq!(enumerate_matchings(&g).unwrap().len(), 0);
    }

    #[test]
    fn enumeration_agrees_with_all_ones_evaluation() {
        for (m, n) in [(2, 2), (2, 4), (3, 4), (4, 4)] {
            let g = grid(m, n);
            let count = enumerate_matchings(&g).unwrap().len();
            let poly = oracle_count(&g).unwrap();
            assert_eq!(
                poly.evaluate_all_ones(),
                BigInt::from(count),
                "grid {m}x{n}"
            );
        }
    }

    #[test]
    fn budget_exhaustion_is_loud() {
        let err = enumerate_matchings_with_budget(&grid(3, 4), 3).unwrap_err();
        assert_eq!(err, OracleError::BudgetExceeded { budget: 3 });
    }

    #[test]
    fn matchings_are_distinct_and_sorted() {
        let ms = enumerate_matchings(&grid(4, 4)).unwrap();
        assert_eq!(ms.len(), 36);
        assert!(ms.windows(2).all(|w| w[0] < w[1]));
        for m in &ms {
            assert_eq!(m.edges.len(), 8);
        }
    }
}
