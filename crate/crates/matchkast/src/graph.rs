//! Plane bipartite multigraphs as combinatorial maps.
//!
//! A graph is stored as vertices, weighted edges, and a rotation system: the
//! clockwise cyclic order of edge ends around each vertex. Faces are not
//! stored; they are traced from the rotations. The designated outer dart
//! pins down which face walk is the unbounded one.
//!
//! Face-tracing convention: arriving at a vertex along edge `e`, the walk
//! leaves along the predecessor of `e` in the stored clockwise order (the
//! successor counterclockwise). Under this convention the outer walk runs
//! counterclockwise along the boundary and inner walks run clockwise.
//!
//! Parallel edges are allowed, loops are not. Disconnected graphs are
//! allowed; components are treated as drawn outside one another, and each
//! component with edges must separately satisfy Euler's formula.

use crate::ring::RingElement;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("id {0:?} is empty or contains non-printable or whitespace characters")]
    InvalidId(String),
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("{kind} {id} references missing {missing}")]
    DanglingReference {
        kind: &'static str,
        id: String,
        missing: String,
    },
    #[error("edge {0} joins two vertices of the same color")]
    NotBipartite(String),
    #[error("bad rotation at vertex {vertex}: {reason}")]
    BadRotation { vertex: String, reason: String },
    #[error("graph has edges but no outer dart")]
    MissingOuter,
    #[error("outer dart ({edge}, {tail}): {reason}")]
    BadOuterDart {
        edge: String,
        tail: String,
        reason: String,
    },
    #[error("component containing {vertex} does not satisfy Euler's formula (V-E+F = {got}, expected 2)")]
    NotGenusZero { vertex: String, got: i64 },
    #[error("not a simple cycle: {0}")]
    NotASimpleCycle(String),
    #[error("edge {0} has a weight the text format cannot carry")]
    UnserializableWeight(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Color {
    Black,
    White,
}

impl Color {
    pub fn flip(self) -> Color {
        match self {
            Color::Black => Color::White,
            Color::White => Color::Black,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Color::Black => 'b',
            Color::White => 'w',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: String,
    pub color: Color,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub u: String,
    pub v: String,
    pub weight: RingElement,
}

impl Edge {
    /// The endpoint other than `at`. Panics if `at` is not an endpoint.
    pub fn other(&self, at: &str) -> &str {
        if self.u == at {
            &self.v
        } else {
            debug_assert_eq!(self.v, at);
            &self.u
        }
    }
}

/// A directed edge end: `edge` traversed away from `tail`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dart {
    pub edge: String,
    pub tail: String,
}

impl Dart {
    pub fn new(edge: impl Into<String>, tail: impl Into<String>) -> Self {
        Dart { edge: edge.into(), tail: tail.into() }
    }
}

impl fmt::Display for Dart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.edge, self.tail)
    }
}

/// One closed face walk, listed from its least dart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceWalk {
    pub darts: Vec<Dart>,
    pub is_outer: bool,
}

impl FaceWalk {
    /// Number of edge traversals; an edge on both sides of the walk counts twice.
    pub fn len(&self) -> usize {
        self.darts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.darts.is_empty()
    }

    pub fn contains_edge(&self, edge: &str) -> bool {
        self.darts.iter().any(|d| d.edge == edge)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanarBipartiteGraph {
    vertices: Vec<Vertex>, // sorted by id
    edges: Vec<Edge>,      // sorted by id
    // cyclic clockwise edge order per vertex, normalized to start at the
    // least edge id; vertices of degree zero are omitted
    rotation: BTreeMap<String, Vec<String>>,
    outer: Option<Dart>, // None exactly when the graph has no edges
}

fn check_id(id: &str) -> Result<(), GraphError> {
    if id.is_empty() || !id.bytes().all(|b| b.is_ascii_graphic() && b != b'#') {
        return Err(GraphError::InvalidId(id.to_string()));
    }
    Ok(())
}

impl PlanarBipartiteGraph {
    /// Validates and builds a graph. The rotation map must list, for every
    /// vertex with incident edges, exactly its incident edge ids in clockwise
    /// cyclic order. `outer` must name a dart on the unbounded face.
    pub fn new(
        vertices: Vec<Vertex>,
        edges: Vec<Edge>,
        rotation: BTreeMap<String, Vec<String>>,
        outer: Option<Dart>,
    ) -> Result<Self, GraphError> {
        let mut vertices = vertices;
        vertices.sort_by(|a, b| a.id.cmp(&b.id));
        let mut edges = edges;
        edges.sort_by(|a, b| a.id.cmp(&b.id));

        let mut vertex_ids = BTreeSet::new();
        for v in &vertices {
            check_id(&v.id)?;
            if !vertex_ids.insert(v.id.clone()) {
                return Err(GraphError::DuplicateId(v.id.clone()));
            }
        }
        let mut edge_ids = BTreeSet::new();
        let color_of: BTreeMap<&str, Color> =
            vertices.iter().map(|v| (v.id.as_str(), v.color)).collect();
        let mut incident: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for e in &edges {
            check_id(&e.id)?;
            if !edge_ids.insert(e.id.clone()) {
                return Err(GraphError::DuplicateId(e.id.clone()));
            }
            for end in [&e.u, &e.v] {
                if !vertex_ids.contains(end) {
                    return Err(GraphError::DanglingReference {
                        kind: "edge",
                        id: e.id.clone(),
                        missing: end.clone(),
                    });
                }
            }
            if e.u == e.v {
                return Err(GraphError::BadRotation {
                    vertex: e.u.clone(),
                    reason: format!("edge {} is a loop", e.id),
                });
            }
            if color_of[e.u.as_str()] == color_of[e.v.as_str()] {
                return Err(GraphError::NotBipartite(e.id.clone()));
            }
            incident.entry(e.u.as_str()).or_default().insert(&e.id);
            incident.entry(e.v.as_str()).or_default().insert(&e.id);
        }

        // rotation exactness: one entry per incident edge, nothing else
        let mut norm_rotation: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (v, order) in &rotation {
            if !vertex_ids.contains(v) {
                return Err(GraphError::DanglingReference {
                    kind: "rotation",
                    id: v.clone(),
                    missing: v.clone(),
                });
            }
            let want = incident.get(v.as_str()).cloned().unwrap_or_default();
            let mut seen = BTreeSet::new();
            for e in order {
                if !edge_ids.contains(e) {
                    return Err(GraphError::DanglingReference {
                        kind: "rotation",
                        id: v.clone(),
                        missing: e.clone(),
                    });
                }
                if !want.contains(e.as_str()) {
                    return Err(GraphError::BadRotation {
                        vertex: v.clone(),
                        reason: format!("edge {e} is not incident"),
                    });
                }
                if !seen.insert(e.clone()) {
                    return Err(GraphError::BadRotation {
                        vertex: v.clone(),
                        reason: format!("edge {e} listed twice"),
                    });
                }
            }
            if seen.len() != want.len() {
                let missing = want.iter().find(|e| !seen.contains(**e)).unwrap();
                return Err(GraphError::BadRotation {
                    vertex: v.clone(),
                    reason: format!("incident edge {missing} missing from rotation"),
                });
            }
            if !order.is_empty() {
                norm_rotation.insert(v.clone(), normalize_cyclic(order));
            }
        }
        for (v, inc) in &incident {
            if !inc.is_empty() && !norm_rotation.contains_key(*v) {
                return Err(GraphError::BadRotation {
                    vertex: v.to_string(),
                    reason: "vertex has incident edges but no rotation".to_string(),
                });
            }
        }

        match (&outer, edges.is_empty()) {
            (None, true) => {}
            (None, false) => return Err(GraphError::MissingOuter),
            (Some(d), _) => {
                let Some(e) = edges.iter().find(|e| e.id == d.edge) else {
                    return Err(GraphError::BadOuterDart {
                        edge: d.edge.clone(),
                        tail: d.tail.clone(),
                        reason: "no such edge".to_string(),
                    });
                };
                if e.u != d.tail && e.v != d.tail {
                    return Err(GraphError::BadOuterDart {
                        edge: d.edge.clone(),
                        tail: d.tail.clone(),
                        reason: "tail is not an endpoint".to_string(),
                    });
                }
            }
        }

        let g = PlanarBipartiteGraph { vertices, edges, rotation: norm_rotation, outer };
        g.check_genus()?;
        Ok(g)
    }

    fn check_genus(&self) -> Result<(), GraphError> {
        let comp = self.component_map();
        let faces = self.trace_faces();
        let mut v_count: BTreeMap<usize, i64> = BTreeMap::new();
        let mut e_count: BTreeMap<usize, i64> = BTreeMap::new();
        let mut f_count: BTreeMap<usize, i64> = BTreeMap::new();
        let mut rep: BTreeMap<usize, &str> = BTreeMap::new();
        for v in &self.vertices {
            let c = comp[v.id.as_str()];
            *v_count.entry(c).or_insert(0) += 1;
            rep.entry(c).or_insert(v.id.as_str());
        }
        for e in &self.edges {
            *e_count.entry(comp[e.u.as_str()]).or_insert(0) += 1;
        }
        for f in &faces {
            *f_count.entry(comp[f.darts[0].tail.as_str()]).or_insert(0) += 1;
        }
        for (c, &e) in &e_count {
            let got = v_count[c] - e + f_count.get(c).copied().unwrap_or(0);
            if got != 2 {
                return Err(GraphError::NotGenusZero {
                    vertex: rep[c].to_string(),
                    got,
                });
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn outer_dart(&self) -> Option<&Dart> {
        self.outer.as_ref()
    }

    pub fn vertex(&self, id: &str) -> Option<&Vertex> {
        self.vertices
            .binary_search_by(|v| v.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.vertices[i])
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edges
            .binary_search_by(|e| e.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.edges[i])
    }

    /// Clockwise cyclic edge order at a vertex (empty for isolated vertices).
    pub fn rotation(&self, vertex: &str) -> &[String] {
        self.rotation.get(vertex).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn degree(&self, vertex: &str) -> usize {
        self.rotation(vertex).len()
    }

    pub fn head(&self, d: &Dart) -> &str {
        self.edge(&d.edge).expect("dart edge").other(&d.tail)
    }

    /// The dart after `d` on its face walk.
    pub fn next_dart(&self, d: &Dart) -> Dart {
        let head = self.head(d).to_string();
        let rot = self.rotation(&head);
        let i = rot
            .iter()
            .position(|e| *e == d.edge)
            .expect("dart edge in head rotation");
        let prev = &rot[(i + rot.len() - 1) % rot.len()];
        Dart::new(prev.clone(), head)
    }

    /// All face walks, sorted by least contained dart; each walk is listed
    /// starting from its least dart. The walk containing the outer dart is
    /// flagged.
    pub fn trace_faces(&self) -> Vec<FaceWalk> {
        let mut all: Vec<Dart> = Vec::with_capacity(self.edges.len() * 2);
        for e in &self.edges {
            all.push(Dart::new(e.id.clone(), e.u.clone()));
            all.push(Dart::new(e.id.clone(), e.v.clone()));
        }
        all.sort();
        let mut seen: BTreeSet<Dart> = BTreeSet::new();
        let mut walks = Vec::new();
        for start in all {
            if seen.contains(&start) {
                continue;
            }
            let mut walk = vec![start.clone()];
            seen.insert(start.clone());
            let mut cur = self.next_dart(&start);
            while cur != start {
                seen.insert(cur.clone());
                walk.push(cur.clone());
                cur = self.next_dart(&cur);
            }
            let is_outer = self
                .outer
                .as_ref()
                .map(|d| walk.contains(d))
                .unwrap_or(false);
            walks.push(FaceWalk { darts: walk, is_outer });
        }
        walks
    }

    /// Connected component index per vertex id, numbered in vertex id order.
    pub fn component_map(&self) -> BTreeMap<&str, usize> {
        let mut parent: BTreeMap<&str, &str> =
            self.vertices.iter().map(|v| (v.id.as_str(), v.id.as_str())).collect();
        fn find<'a>(parent: &mut BTreeMap<&'a str, &'a str>, mut x: &'a str) -> &'a str {
            while parent[x] != x {
                let up = parent[parent[x]];
                parent.insert(x, up);
                x = up;
            }
            x
        }
        for e in &self.edges {
            let ru = find(&mut parent, e.u.as_str());
            let rv = find(&mut parent, e.v.as_str());
            if ru != rv {
                parent.insert(ru, rv);
            }
        }
        let mut index: BTreeMap<&str, usize> = BTreeMap::new();
        let mut out = BTreeMap::new();
        for v in &self.vertices {
            let root = find(&mut parent, v.id.as_str());
            let n = index.len();
            let i = *index.entry(root).or_insert(n);
            out.insert(v.id.as_str(), i);
        }
        out
    }

    /// Indices into `faces` of each component's unbounded walk: the walk
    /// holding the outer dart for its component, and for every other
    /// component the walk holding that component's least dart. Components
    /// are drawn outside one another, so all of these border the one
    /// topological outer region.
    pub fn boundary_walks(&self, faces: &[FaceWalk]) -> BTreeSet<usize> {
        let comp = self.component_map();
        let mut walk_comp: Vec<usize> = Vec::with_capacity(faces.len());
        for f in faces {
            walk_comp.push(comp[f.darts[0].tail.as_str()]);
        }
        let mut chosen: BTreeMap<usize, usize> = BTreeMap::new();
        // faces are sorted by least dart, so the first walk seen per
        // component is the one holding that component's least dart
        for (i, f) in faces.iter().enumerate() {
            let c = walk_comp[i];
            chosen.entry(c).or_insert(i);
            if f.is_outer {
                chosen.insert(c, i);
            }
        }
        chosen.into_values().collect()
    }

    /// Validates that `cycle` is a simple closed dart walk: consecutive
    /// darts chain head to tail, vertices and edges are pairwise distinct.
    pub fn check_simple_cycle(&self, cycle: &[Dart]) -> Result<(), GraphError> {
        if cycle.len() < 2 {
            return Err(GraphError::NotASimpleCycle(
                "fewer than two darts".to_string(),
            ));
        }
        let mut tails = BTreeSet::new();
        let mut edges = BTreeSet::new();
        for (i, d) in cycle.iter().enumerate() {
            let Some(e) = self.edge(&d.edge) else {
                return Err(GraphError::NotASimpleCycle(format!(
                    "unknown edge {}",
                    d.edge
                )));
            };
            if e.u != d.tail && e.v != d.tail {
                return Err(GraphError::NotASimpleCycle(format!(
                    "dart {d} tail is not an endpoint"
                )));
            }
            let next = &cycle[(i + 1) % cycle.len()];
            if self.head(d) != next.tail {
                return Err(GraphError::NotASimpleCycle(format!(
                    "dart {d} does not chain into {next}"
                )));
            }
            if !tails.insert(d.tail.clone()) {
                return Err(GraphError::NotASimpleCycle(format!(
                    "vertex {} visited twice",
                    d.tail
                )));
            }
            if !edges.insert(d.edge.clone()) {
                return Err(GraphError::NotASimpleCycle(format!(
                    "edge {} used twice",
                    d.edge
                )));
            }
        }
        Ok(())
    }

    /// Number of vertices strictly inside a simple cycle, computed without
    /// coordinates: faces inside are those the outer region cannot reach in
    /// the dual without crossing the cycle, and the vertex count follows from
    /// Euler's formula on the enclosed disk.
    pub fn enclosed_vertices(&self, cycle: &[Dart]) -> Result<usize, GraphError> {
        self.check_simple_cycle(cycle)?;
        let faces = self.trace_faces();
        let walls: BTreeSet<&str> = cycle.iter().map(|d| d.edge.as_str()).collect();
        // dual adjacency: walk index -> walk index across each non-wall edge
        let mut edge_walks: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, f) in faces.iter().enumerate() {
            for d in &f.darts {
                edge_walks.entry(d.edge.as_str()).or_default().push(i);
            }
        }
        let mut reached = vec![false; faces.len()];
        let mut queue: Vec<usize> = self.boundary_walks(&faces).into_iter().collect();
        for &i in &queue {
            reached[i] = true;
        }
        while let Some(i) = queue.pop() {
            for d in &faces[i].darts {
                if walls.contains(d.edge.as_str()) {
                    continue;
                }
                for &j in &edge_walks[d.edge.as_str()] {
                    if !reached[j] {
                        reached[j] = true;
                        queue.push(j);
                    }
                }
            }
        }
        let enclosed_faces = reached.iter().filter(|r| !**r).count();
        let inner_edges = self
            .edges
            .iter()
            .filter(|e| {
                !walls.contains(e.id.as_str())
                    && !reached[edge_walks[e.id.as_str()][0]]
            })
            .count();
        // Euler on the closed disk: (|C| + A) - (|C| + E_in) + (F_in + 1) = 2
        let a = inner_edges as i64 - enclosed_faces as i64 + 1;
        debug_assert!(a >= 0, "enclosure count went negative");
        Ok(a.max(0) as usize)
    }

    /// The induced submap on the vertices outside `removed`: surviving edges
    /// keep their weights and rotation order. The outer designation carries
    /// over when its dart survives, otherwise it moves to another surviving
    /// dart of the old outer walk (deletion only enlarges the outer face),
    /// and only as a last resort to the least dart overall.
    pub fn delete_vertices(&self, removed: &BTreeSet<String>) -> PlanarBipartiteGraph {
        let vertices: Vec<Vertex> = self
            .vertices
            .iter()
            .filter(|v| !removed.contains(&v.id))
            .cloned()
            .collect();
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .filter(|e| !removed.contains(&e.u) && !removed.contains(&e.v))
            .cloned()
            .collect();
        let kept: BTreeSet<&str> = edges.iter().map(|e| e.id.as_str()).collect();
        let rotation: BTreeMap<String, Vec<String>> = self
            .rotation
            .iter()
            .filter(|(v, _)| !removed.contains(*v))
            .filter_map(|(v, order)| {
                let order: Vec<String> = order
                    .iter()
                    .filter(|e| kept.contains(e.as_str()))
                    .cloned()
                    .collect();
                (!order.is_empty()).then(|| (v.clone(), order))
            })
            .collect();
        let outer = self
            .outer
            .as_ref()
            .filter(|d| kept.contains(d.edge.as_str()) && !removed.contains(&d.tail))
            .cloned()
            .or_else(|| {
                self.trace_faces()
                    .into_iter()
                    .find(|f| f.is_outer)?
                    .darts
                    .into_iter()
                    .filter(|d| kept.contains(d.edge.as_str()))
                    .min()
            })
            .or_else(|| {
                edges
                    .first()
                    .map(|e| Dart::new(e.id.clone(), e.u.clone().min(e.v.clone())))
            });
        PlanarBipartiteGraph::new(vertices, edges, rotation, outer)
            .expect("submaps of plane maps embed")
    }

    /// The reflected map: every rotation reversed. An involution.
    pub fn mirror(&self) -> PlanarBipartiteGraph {
        let rotation = self
            .rotation
            .iter()
            .map(|(v, order)| {
                let mut r: Vec<String> = order.iter().rev().cloned().collect();
                r = normalize_cyclic(&r);
                (v.clone(), r)
            })
            .collect();
        PlanarBipartiteGraph {
            vertices: self.vertices.clone(),
            edges: self.edges.clone(),
            rotation,
            outer: self.outer.clone(),
        }
    }

    pub fn black_count(&self) -> usize {
        self.vertices.iter().filter(|v| v.color == Color::Black).count()
    }

    pub fn white_count(&self) -> usize {
        self.vertices.iter().filter(|v| v.color == Color::White).count()
    }
}

/// Rotate a cyclic list so its least element comes first.
fn normalize_cyclic(order: &[String]) -> Vec<String> {
    let min = order
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut out = Vec::with_capacity(order.len());
    out.extend_from_slice(&order[min..]);
    out.extend_from_slice(&order[..min]);
    out
}

// ---------------------------------------------------------------------------
// pbg text format
// ---------------------------------------------------------------------------

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct PbgError {
    pub line: usize,
    pub msg: String,
}

fn pbg_err<T>(line: usize, msg: impl Into<String>) -> Result<T, PbgError> {
    Err(PbgError { line, msg: msg.into() })
}

/// Parse the `pbg v1` text format. `#` starts a comment, blank lines are
/// skipped, errors carry 1-based line numbers.
pub fn parse_pbg(input: &str) -> Result<PlanarBipartiteGraph, PbgError> {
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    let mut rotation: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut outer: Option<Dart> = None;
    let mut saw_header = false;
    let mut outer_line = 0;
    for (i, raw) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_ascii_whitespace().collect();
        if !saw_header {
            if tokens == ["pbg", "v1"] {
                saw_header = true;
                continue;
            }
            return pbg_err(line_no, "expected header 'pbg v1'");
        }
        match tokens[0] {
            "vertex" => {
                if tokens.len() != 3 {
                    return pbg_err(line_no, "expected: vertex <id> <b|w>");
                }
                let color = match tokens[2] {
                    "b" => Color::Black,
                    "w" => Color::White,
                    other => return pbg_err(line_no, format!("bad color {other:?}")),
                };
                vertices.push(Vertex { id: tokens[1].to_string(), color });
            }
            "edge" => {
                if tokens.len() != 5 {
                    return pbg_err(line_no, "expected: edge <id> <u> <v> <weight>");
                }
                let weight = parse_weight(tokens[4])
                    .ok_or_else(|| PbgError {
                        line: line_no,
                        msg: format!("bad weight {:?}", tokens[4]),
                    })?;
                edges.push(Edge {
                    id: tokens[1].to_string(),
                    u: tokens[2].to_string(),
                    v: tokens[3].to_string(),
                    weight,
                });
            }
            "rot" => {
                if tokens.len() < 2 {
                    return pbg_err(line_no, "expected: rot <vertex> <edge>...");
                }
                let v = tokens[1].to_string();
                if rotation.contains_key(&v) {
                    return pbg_err(line_no, format!("second rot line for {v}"));
                }
                rotation.insert(v, tokens[2..].iter().map(|s| s.to_string()).collect());
            }
            "outer" => {
                if tokens.len() != 3 {
                    return pbg_err(line_no, "expected: outer <edge> <tail>");
                }
                if outer.is_some() {
                    return pbg_err(line_no, "second outer line");
                }
                outer = Some(Dart::new(tokens[1], tokens[2]));
                outer_line = line_no;
            }
            other => return pbg_err(line_no, format!("unknown directive {other:?}")),
        }
    }
    if !saw_header {
        return pbg_err(1, "expected header 'pbg v1'");
    }
    PlanarBipartiteGraph::new(vertices, edges, rotation, outer).map_err(|e| PbgError {
        line: if outer_line > 0 { outer_line } else { 1 },
        msg: e.to_string(),
    })
}

/// Weights in files are a decimal integer or a single variable identifier.
fn parse_weight(s: &str) -> Option<RingElement> {
    let body = s.strip_prefix('-').unwrap_or(s);
    if !body.is_empty() && body.bytes().all(|b| b.is_ascii_digit()) {
        return s.parse::<num_bigint::BigInt>().ok().map(RingElement::from_bigint);
    }
    let mut bytes = s.bytes();
    let first = bytes.next()?;
    if first.is_ascii_alphabetic() && bytes.all(|b| b.is_ascii_alphanumeric() || b == b'_') {
        return Some(RingElement::var(s));
    }
    None
}

fn write_weight(w: &RingElement) -> Option<String> {
    if let Some(n) = w.as_integer() {
        return Some(n.to_string());
    }
    let (m, c) = w.leading_term()?;
    if w.term_count() == 1 && c == &num_bigint::BigInt::from(1) {
        let vars: Vec<(&str, u32)> = m.vars().collect();
        if let [(name, 1)] = vars.as_slice() {
            return Some(name.to_string());
        }
    }
    None
}

/// Canonical `pbg v1` text: stable under a parse and re-write round trip.
pub fn write_pbg(g: &PlanarBipartiteGraph) -> Result<String, GraphError> {
    let mut out = String::from("pbg v1\n");
    for v in g.vertices() {
        out.push_str(&format!("vertex {} {}\n", v.id, v.color.letter()));
    }
    for e in g.edges() {
        let w = write_weight(&e.weight)
            .ok_or_else(|| GraphError::UnserializableWeight(e.id.clone()))?;
        out.push_str(&format!("edge {} {} {} {}\n", e.id, e.u, e.v, w));
    }
    for v in g.vertices() {
        let rot = g.rotation(&v.id);
        if !rot.is_empty() {
            out.push_str(&format!("rot {} {}\n", v.id, rot.join(" ")));
        }
    }
    if let Some(d) = g.outer_dart() {
        out.push_str(&format!("outer {} {}\n", d.edge, d.tail));
    }
    Ok(out)
}
