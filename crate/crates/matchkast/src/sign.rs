//! Sign functions and determinant-based matching counts.
//!
//! A sign function assigns each edge +1 or -1 so that around every inner
//! face with 2m edge traversals the product of signs is (-1)^(m-1). With
//! such signs, the bipartite adjacency matrix with entries sign * weight has
//! determinant equal, up to one global sign, to the weighted sum over all
//! perfect matchings: the signs make every matching's permutation term point
//! the same way.
//!
//! The stronger cycle identity, with A the number of vertices strictly
//! inside a simple cycle C, reads prod(C) = (-1)^(|C|/2 + A - 1); the
//! verifier samples cycles against it.

use crate::graph::{Dart, FaceWalk, GraphError, PlanarBipartiteGraph};
use crate::report::VerificationReport;
use crate::ring::{RingElement, RingMatrix};
use num_traits::Signed;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SignError {
    #[error("sign value for edge {0} is not +1 or -1")]
    BadValue(String),
    #[error("sign function domain does not match the edge set (first difference: {0})")]
    DomainMismatch(String),
    #[error("face walk is the outer face")]
    OuterFaceGiven,
    #[error("graph has {black} black and {white} white vertices")]
    UnbalancedColors { black: usize, white: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Edge id -> +1 or -1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignFunction {
    values: BTreeMap<String, i8>,
}

impl SignFunction {
    pub fn from_map(values: BTreeMap<String, i8>) -> Result<Self, SignError> {
        for (e, v) in &values {
            if *v != 1 && *v != -1 {
                return Err(SignError::BadValue(e.clone()));
            }
        }
        Ok(SignFunction { values })
    }

    pub fn all_plus(g: &PlanarBipartiteGraph) -> Self {
        SignFunction {
            values: g.edges().iter().map(|e| (e.id.clone(), 1)).collect(),
        }
    }

    pub fn get(&self, edge: &str) -> Option<i8> {
        self.values.get(edge).copied()
    }

    pub fn set(&mut self, edge: &str, value: i8) {
        assert!(value == 1 || value == -1);
        self.values.insert(edge.to_string(), value);
    }

    pub fn flip(&mut self, edge: &str) {
        let v = self.values.get_mut(edge).expect("edge in domain");
        *v = -*v;
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, i8)> {
        self.values.iter().map(|(e, v)| (e.as_str(), *v))
    }

    pub fn check_domain(&self, g: &PlanarBipartiteGraph) -> Result<(), SignError> {
        for e in g.edges() {
            if !self.values.contains_key(&e.id) {
                return Err(SignError::DomainMismatch(e.id.clone()));
            }
        }
        if self.values.len() != g.edges().len() {
            let extra = self
                .values
                .keys()
                .find(|k| g.edge(k).is_none())
                .expect("extra key");
            return Err(SignError::DomainMismatch(extra.clone()));
        }
        Ok(())
    }
}

impl fmt::Display for SignFunction {
    /// One `<edge-id> <+1|-1>` line per edge, sorted by edge id.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (e, v) in &self.values {
            writeln!(f, "{} {}", e, if *v > 0 { "+1" } else { "-1" })?;
        }
        Ok(())
    }
}

fn parity_sign(k: usize) -> i8 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Product of signs over a face walk's darts (doubled edges count twice),
/// plus whether the face is positive: product = (-1)^(m-1) for 2m darts.
pub fn face_sign_product(
    g: &PlanarBipartiteGraph,
    sf: &SignFunction,
    face: &FaceWalk,
) -> Result<(i8, bool), SignError> {
    if face.is_outer {
        return Err(SignError::OuterFaceGiven);
    }
    sf.check_domain(g)?;
    let mut product = 1i8;
    for d in &face.darts {
        product *= sf.get(&d.edge).expect("domain checked");
    }
    debug_assert_eq!(face.len() % 2, 0, "bipartite walks have even length");
    let m = face.len() / 2;
    Ok((product, product == parity_sign(m - 1)))
}

/// All simple cycles of `g` as dart sequences, deterministic order, at most
/// `max` of them. Each cycle appears once: it starts at its least vertex and
/// its first edge id is smaller than its last.
pub fn enumerate_simple_cycles(g: &PlanarBipartiteGraph, max: usize) -> Vec<Vec<Dart>> {
    let mut cycles = Vec::new();
    if max == 0 {
        return cycles;
    }
    let ids: Vec<&str> = g.vertices().iter().map(|v| v.id.as_str()).collect();
    for (si, start) in ids.iter().enumerate() {
        let mut path: Vec<Dart> = Vec::new();
        let mut visited: BTreeSet<&str> = BTreeSet::new();
        dfs(g, &ids[..si], start, start, &mut path, &mut visited, &mut cycles, max);
        if cycles.len() >= max {
            break;
        }
    }
    return cycles;

    #[allow(clippy::too_many_arguments)]
    fn dfs<'g>(
        g: &'g PlanarBipartiteGraph,
        forbidden: &[&str],
        start: &'g str,
        at: &'g str,
        path: &mut Vec<Dart>,
        visited: &mut BTreeSet<&'g str>,
        cycles: &mut Vec<Vec<Dart>>,
        max: usize,
    ) {
        if cycles.len() >= max {
            return;
        }
        visited.insert(at);
        for eid in g.rotation(at) {
            if Some(eid.as_str()) == path.last().map(|d| d.edge.as_str()) {
                continue;
            }
            let head = g.edge(eid).expect("rotation edge").other(at);
            if head == start && !path.is_empty() {
                // close the cycle; direction dedupe: first edge < last edge
                if path[0].edge.as_str() < eid.as_str() {
                    let mut cycle = path.clone();
                    cycle.push(Dart::new(eid.clone(), at.to_string()));
                    cycles.push(cycle);
                    if cycles.len() >= max {
                        break;
                    }
                }
                continue;
            }
            if visited.contains(head) || forbidden.contains(&head) {
                continue;
            }
            path.push(Dart::new(eid.clone(), at.to_string()));
            dfs(g, forbidden, start, head, path, visited, cycles, max);
            path.pop();
            if cycles.len() >= max {
                break;
            }
        }
        visited.remove(at);
    }
}

/// Indices of walks that are inner faces: everything except each
/// component's designated unbounded walk.
pub fn inner_walk_indices(g: &PlanarBipartiteGraph, faces: &[FaceWalk]) -> Vec<usize> {
    let boundary = g.boundary_walks(faces);
    (0..faces.len()).filter(|i| !boundary.contains(i)).collect()
}

fn sign_reproducer(g: &PlanarBipartiteGraph, sf: &SignFunction) -> String {
    let pbg = crate::graph::write_pbg(g)
        .unwrap_or_else(|_| "# graph weights not serializable".to_string());
    format!("{pbg}# signs\n{sf}")
}

/// Check every inner face for positivity, then sample up to `cycle_budget`
/// simple cycles against the enclosure identity. The report's witness names
/// the first violation.
pub fn verify_sign_function(
    g: &PlanarBipartiteGraph,
    sf: &SignFunction,
    cycle_budget: usize,
) -> VerificationReport {
    let subject = format!(
        "graph[{}v/{}e]",
        g.vertices().len(),
        g.edges().len()
    );
    let claim = "inner faces positive; sampled cycles satisfy the enclosure identity";
    if let Err(e) = sf.check_domain(g) {
        return VerificationReport::fail(
            subject,
            claim,
            format!("domain mismatch: {e}"),
            sign_reproducer(g, sf),
        );
    }
    let faces = g.trace_faces();
    let inner = inner_walk_indices(g, &faces);
    for &i in &inner {
        let (product, positive) =
            face_sign_product(g, sf, &faces[i]).expect("inner face, domain checked");
        if !positive {
            return VerificationReport::fail(
                subject,
                claim,
                format!(
                    "inner face starting at {} has sign product {product:+}",
                    faces[i].darts[0]
                ),
                sign_reproducer(g, sf),
            );
        }
    }
    let cycles = enumerate_simple_cycles(g, cycle_budget);
    for cycle in &cycles {
        let product: i8 = cycle
            .iter()
            .map(|d| sf.get(&d.edge).expect("domain checked"))
            .product();
        let enclosed = g.enclosed_vertices(cycle).expect("enumerated cycles are simple");
        let want = parity_sign(cycle.len() / 2 + enclosed + 1);
        if product != want {
            return VerificationReport::fail(
                subject,
                claim,
                format!(
                    "cycle at {} of length {} enclosing {enclosed} has product {product:+}, expected {want:+}",
                    cycle[0],
                    cycle.len()
                ),
                sign_reproducer(g, sf),
            );
        }
    }
    VerificationReport::pass_with(
        subject,
        claim,
        format!("{} inner faces, {} cycles checked", inner.len(), cycles.len()),
    )
}

/// Build a sign function: all +1, then walk the dual spanning forest (inner
/// faces rooted at each component's unbounded walk) from the deepest faces
/// up, flipping a face's parent edge whenever the face is negative. Each
/// flip fixes its face and only touches faces not yet processed, so one
/// sweep suffices.
pub fn construct_sign_function(g: &PlanarBipartiteGraph) -> SignFunction {
    let faces = g.trace_faces();
    let mut sf = SignFunction::all_plus(g);
    if faces.is_empty() {
        return sf;
    }
    // edge -> the one or two walks its darts lie on
    let mut edge_walks: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, f) in faces.iter().enumerate() {
        for d in &f.darts {
            edge_walks.entry(d.edge.as_str()).or_default().push(i);
        }
    }
    let roots = g.boundary_walks(&faces);
    let mut depth: Vec<Option<usize>> = vec![None; faces.len()];
    let mut parent_edge: Vec<Option<&str>> = vec![None; faces.len()];
    let mut queue: std::collections::VecDeque<usize> = roots.iter().copied().collect();
    for &r in &roots {
        depth[r] = Some(0);
    }
    while let Some(i) = queue.pop_front() {
        for d in &faces[i].darts {
            let walks = &edge_walks[d.edge.as_str()];
            if walks[0] == walks[walks.len() - 1] {
                continue; // bridge, borders this walk on both sides
            }
            for &j in walks {
                if depth[j].is_none() {
                    depth[j] = Some(depth[i].unwrap() + 1);
                    parent_edge[j] = Some(d.edge.as_str());
                    queue.push_back(j);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..faces.len()).filter(|i| !roots.contains(i)).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(depth[i].expect("dual forest spans all walks")));
    for i in order {
        let mut product = 1i8;
        for d in &faces[i].darts {
            product *= sf.get(&d.edge).expect("domain");
        }
        let m = faces[i].len() / 2;
        if product != parity_sign(m - 1) {
            let e = parent_edge[i].expect("non-root walk has a parent").to_string();
            sf.flip(&e);
        }
    }
    sf
}

/// The signed bipartite adjacency matrix: rows are black vertices, columns
/// white, both sorted by id; entry = sum of sign * weight over the parallel
/// edges joining the pair.
pub fn kasteleyn_matrix(
    g: &PlanarBipartiteGraph,
    sf: &SignFunction,
) -> Result<RingMatrix, SignError> {
    sf.check_domain(g)?;
    let black: Vec<String> = g
        .vertices()
        .iter()
        .filter(|v| v.color == crate::graph::Color::Black)
        .map(|v| v.id.clone())
        .collect();
    let white: Vec<String> = g
        .vertices()
        .iter()
        .filter(|v| v.color == crate::graph::Color::White)
        .map(|v| v.id.clone())
        .collect();
    if black.len() != white.len() {
        return Err(SignError::UnbalancedColors {
            black: black.len(),
            white: white.len(),
        });
    }
    let row_of: BTreeMap<&str, usize> =
        black.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let col_of: BTreeMap<&str, usize> =
        white.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let mut m = RingMatrix::zero(black.clone(), white.clone());
    for e in g.edges() {
        let (b, w) = if row_of.contains_key(e.u.as_str()) {
            (e.u.as_str(), e.v.as_str())
        } else {
            (e.v.as_str(), e.u.as_str())
        };
        let (i, j) = (row_of[b], col_of[w]);
        let signed = if sf.get(&e.id).expect("domain checked") > 0 {
            e.weight.clone()
        } else {
            e.weight.neg()
        };
        m.set(i, j, m.get(i, j).add(&signed));
    }
    Ok(m)
}

/// Normalize a determinant to the weighted matching count: at all-ones the
/// count is nonnegative, and when that evaluation is 0 the leading
/// coefficient is made positive instead.
fn normalize_count(det: RingElement) -> RingElement {
    if det.is_zero() {
        return det;
    }
    let at_ones = det.evaluate_all_ones();
    if at_ones.is_negative() {
        return det.neg();
    }
    if at_ones.is_positive() {
        return det;
    }
    match det.leading_term() {
        Some((_, c)) if c.is_negative() => det.neg(),
        _ => det,
    }
}

/// Weighted perfect-matching count via the determinant. Unbalanced colors
/// mean no matchings, so 0 without building a matrix.
pub fn count_matchings(g: &PlanarBipartiteGraph) -> RingElement {
    if g.black_count() != g.white_count() {
        return RingElement::zero();
    }
    let sf = construct_sign_function(g);
    let k = kasteleyn_matrix(g, &sf).expect("balanced and domain-complete");
    let det = k.determinant().expect("square by construction");
    normalize_count(det)
}
