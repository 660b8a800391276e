//! Compound graphs: copies of a base graph glued together along stems and
//! leaves, following the shape of a supergraph.
//!
//! A compound graph H is assembled from a balanced base graph G and an
//! abstract supergraph S. One copy of G is placed at each vertex of S,
//! mirrored at white supergraph vertices so that facing boundaries nest
//! consistently. For every edge of S, one or more black degree-2 vertices
//! (stems) join equivalent white boundary vertices of the two copies, and an
//! equal number of white degree-1 vertices (leaves) hang off black boundary
//! vertices. Collapsing every copy to a point yields the reduced graph R.
//!
//! Sign functions on H that assign equivalent edges equal values correspond
//! exactly to pairs of sign functions on G and on R; [`compose_sign_function`]
//! and the two restriction maps realize the correspondence. Sign-weighting
//! flips the weights of negatively-signed stem and leaf edges, and
//! [`verify_divisibility`] checks that the base count divides the
//! sign-weighted compound count. [`family`] moves one leaf around its
//! equivalence class and [`verify_zero_sum`] searches for a vanishing signed
//! combination of the member counts.
//!
//! Placements are given in class coordinates: `gap` is the visit index of the
//! attachment vertex along the base graph's outer walk (in the base's own
//! orientation, for mirrored copies too), and `slot` orders multiple
//! attachments at the same visit. Scripts serialize as `cpd v1` text; built
//! compounds can emit a `cpdmap v1` sidecar naming every vertex's origin.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::graph::{Color, Dart, Edge, FaceWalk, GraphError, PlanarBipartiteGraph, Vertex};
use crate::report::VerificationReport;
use crate::ring::RingElement;
use crate::sign::{construct_sign_function, count_matchings, SignFunction};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompoundError {
    #[error("base graph has no edges")]
    EmptyBase,
    #[error("base graph has {black} black and {white} white vertices")]
    UnbalancedBase { black: usize, white: usize },
    #[error("base graph is disconnected")]
    DisconnectedBase,
    #[error("supergraph is disconnected")]
    DisconnectedSupergraph,
    #[error("supergraph has no vertices")]
    EmptySupergraph,
    #[error("{kind} {id} does not exist")]
    UnknownReference { kind: &'static str, id: String },
    #[error("stem attachment {vertex} is not a white vertex")]
    StemColorViolation { vertex: String },
    #[error("leaf attachment {vertex} is not a black vertex")]
    LeafColorViolation { vertex: String },
    #[error("vertex {vertex} does not lie on the base outer walk")]
    NotOuterFaceVertex { vertex: String },
    #[error("bad placement: {detail}")]
    BadPlacement { detail: String },
    #[error("supergraph edge {super_edge} has no stem")]
    MissingStem { super_edge: String },
    #[error("{stems} stems but {leaves} leaves")]
    CountMismatch { stems: usize, leaves: usize },
    #[error("stem {stem} joins two inequivalent vertices")]
    InequivalentStemEndpoints { stem: String },
    #[error("placement does not embed in the plane: {detail}")]
    NotGenusZero { detail: String },
    #[error("no admissible placement at {vertex}")]
    PlacementImpossible { vertex: String },
    #[error("input sign function rejected: {detail}")]
    InvalidInputSign { detail: String },
    #[error("compound structure violated: {detail}")]
    InvalidStructure { detail: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// One stem line of a construction script. The stem joins the two copies at
/// the ends of `super_edge`, attaching to `base_vertex` on both, at the given
/// outer-walk visit (`gap`) and stacking position (`slot`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StemSpec {
    pub super_edge: String,
    pub base_vertex: String,
    pub gap: usize,
    pub slot: usize,
}

/// One leaf line: a pendant white vertex on copy `super_vertex`, attached to
/// `base_vertex` at the given gap and slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafSpec {
    pub super_vertex: String,
    pub base_vertex: String,
    pub gap: usize,
    pub slot: usize,
}

/// Stem and leaf placements, in order. Stem k becomes vertex `st{k}` with
/// edges `st{k}:0` (toward the super edge's first endpoint) and `st{k}:1`;
/// leaf k becomes `lf{k}` with edge `lf{k}:e`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CompoundScript {
    pub stems: Vec<StemSpec>,
    pub leaves: Vec<LeafSpec>,
}

/// A validated compound graph together with its construction data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompoundGraph {
    graph: PlanarBipartiteGraph,
    base: PlanarBipartiteGraph,
    supergraph: PlanarBipartiteGraph,
    copy_of: BTreeMap<String, (String, String)>,
    parity: BTreeMap<String, i8>,
    stems: BTreeSet<String>,
    leaves: BTreeSet<String>,
    script: CompoundScript,
}

/// A compound graph and its siblings under moving one leaf around its class.
#[derive(Debug, Clone)]
pub struct Family {
    pub members: Vec<CompoundGraph>,
    pub moving_leaf: String,
    pub anchor_class: String,
}

fn copy_vertex_id(super_vertex: &str, base_vertex: &str) -> String {
    format!("{super_vertex}:{base_vertex}")
}

fn copy_edge_id(super_vertex: &str, base_edge: &str) -> String {
    format!("{super_vertex}:{base_edge}")
}

fn stem_vertex_id(k: usize) -> String {
    format!("st{k}")
}

fn stem_edge_id(k: usize, side: usize) -> String {
    format!("st{k}:{side}")
}

fn leaf_vertex_id(k: usize) -> String {
    format!("lf{k}")
}

fn leaf_edge_id(k: usize) -> String {
    format!("lf{k}:e")
}

fn reduced_copy_id(super_vertex: &str) -> String {
    format!("c:{super_vertex}")
}

fn is_connected(g: &PlanarBipartiteGraph) -> bool {
    let components = g.component_map();
    components.values().max().map_or(true, |&m| m == 0)
}

/// The designated outer walk of `g` and, per vertex, the walk indices at
/// which it is visited. Index i visits the head of the i-th walk dart; the
/// departure edge of that visit is the edge of the next dart.
pub(crate) fn outer_visits(
    g: &PlanarBipartiteGraph,
) -> Result<(Vec<Dart>, BTreeMap<String, Vec<usize>>), CompoundError> {
    let faces = g.trace_faces();
    let walk = faces
        .into_iter()
        .find(|w| w.is_outer)
        .ok_or(CompoundError::Graph(GraphError::MissingOuter))?;
    let mut visits: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, d) in walk.darts.iter().enumerate() {
        visits.entry(g.head(d).to_string()).or_default().push(i);
    }
    Ok((walk.darts, visits))
}

fn check_plain_id(id: &str, what: &str) -> Result<(), CompoundError> {
    if id.contains(':') {
        return Err(CompoundError::InvalidStructure {
            detail: format!("{what} id {id} contains ':'"),
        });
    }
    Ok(())
}

fn looks_reserved(id: &str) -> bool {
    for prefix in ["st", "lf"] {
        if let Some(rest) = id.strip_prefix(prefix) {
            if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                return true;
            }
        }
    }
    false
}

/// Builds and validates the compound graph of `base` and `supergraph`
/// described by `script`.
pub fn build_compound(
    base: &PlanarBipartiteGraph,
    supergraph: &PlanarBipartiteGraph,
    script: &CompoundScript,
) -> Result<CompoundGraph, CompoundError> {
    if base.edges().is_empty() {
        return Err(CompoundError::EmptyBase);
    }
    let (black, white) = (base.black_count(), base.white_count());
    if black != white {
        return Err(CompoundError::UnbalancedBase { black, white });
    }
    if !is_connected(base) {
        return Err(CompoundError::DisconnectedBase);
    }
    if supergraph.vertices().is_empty() {
        return Err(CompoundError::EmptySupergraph);
    }
    if !is_connected(supergraph) {
        return Err(CompoundError::DisconnectedSupergraph);
    }
    for v in base.vertices() {
        check_plain_id(&v.id, "base vertex")?;
    }
    for e in base.edges() {
        check_plain_id(&e.id, "base edge")?;
    }
    for v in supergraph.vertices() {
        check_plain_id(&v.id, "supergraph vertex")?;
        if looks_reserved(&v.id) {
            return Err(CompoundError::InvalidStructure {
                detail: format!("supergraph vertex id {} is reserved for stems and leaves", v.id),
            });
        }
    }
    for e in supergraph.edges() {
        check_plain_id(&e.id, "supergraph edge")?;
    }

    let (walk, visits) = outer_visits(base)?;

    // Per copy and gap vertex, the event edges to splice in after the gap's
    // departure edge, collected as (slot, edge id). Higher slots sit closer
    // to the departure edge, so the outer walk meets slots in ascending
    // order. Keyed by vertex as well: an edge can depart visits of both its
    // endpoints.
    let mut splices: BTreeMap<(String, String, String), Vec<(usize, String)>> = BTreeMap::new();
    let mut occupied: BTreeSet<(String, String, usize, usize)> = BTreeSet::new();
    let mut stems_per_edge: BTreeMap<&str, usize> = BTreeMap::new();

    let mut place = |super_vertex: &str,
                     base_vertex: &str,
                     gap: usize,
                     slot: usize,
                     event_edge: String|
     -> Result<(), CompoundError> {
        let vis = visits.get(base_vertex).ok_or_else(|| CompoundError::NotOuterFaceVertex {
            vertex: base_vertex.to_string(),
        })?;
        if gap >= vis.len() {
            return Err(CompoundError::BadPlacement {
                detail: format!(
                    "gap {gap} at {base_vertex}: the outer walk visits it {} time(s)",
                    vis.len()
                ),
            });
        }
        let key = (super_vertex.to_string(), base_vertex.to_string(), gap, slot);
        if !occupied.insert(key) {
            return Err(CompoundError::BadPlacement {
                detail: format!("slot {gap}.{slot} at {super_vertex}:{base_vertex} used twice"),
            });
        }
        let departure = walk[(vis[gap] + 1) % walk.len()].edge.clone();
        splices
            .entry((super_vertex.to_string(), base_vertex.to_string(), departure))
            .or_default()
            .push((slot, event_edge));
        Ok(())
    };

    for (k, s) in script.stems.iter().enumerate() {
        let f = supergraph.edge(&s.super_edge).ok_or_else(|| CompoundError::UnknownReference {
            kind: "supergraph edge",
            id: s.super_edge.clone(),
        })?;
        let q = base.vertex(&s.base_vertex).ok_or_else(|| CompoundError::UnknownReference {
            kind: "base vertex",
            id: s.base_vertex.clone(),
        })?;
        if q.color != Color::White {
            return Err(CompoundError::StemColorViolation { vertex: q.id.clone() });
        }
        let f = f.clone();
        place(&f.u, &q.id, s.gap, s.slot, stem_edge_id(k, 0))?;
        place(&f.v, &q.id, s.gap, s.slot, stem_edge_id(k, 1))?;
        *stems_per_edge.entry(&s.super_edge).or_insert(0) += 1;
    }
    for e in supergraph.edges() {
        if !stems_per_edge.contains_key(e.id.as_str()) {
            return Err(CompoundError::MissingStem { super_edge: e.id.clone() });
        }
    }
    for (k, l) in script.leaves.iter().enumerate() {
        supergraph.vertex(&l.super_vertex).ok_or_else(|| CompoundError::UnknownReference {
            kind: "supergraph vertex",
            id: l.super_vertex.clone(),
        })?;
        let q = base.vertex(&l.base_vertex).ok_or_else(|| CompoundError::UnknownReference {
            kind: "base vertex",
            id: l.base_vertex.clone(),
        })?;
        if q.color != Color::Black {
            return Err(CompoundError::LeafColorViolation { vertex: q.id.clone() });
        }
        place(&l.super_vertex, &q.id, l.gap, l.slot, leaf_edge_id(k))?;
    }
    if script.stems.len() != script.leaves.len() {
        return Err(CompoundError::CountMismatch {
            stems: script.stems.len(),
            leaves: script.leaves.len(),
        });
    }

    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    let mut rotation: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut copy_of = BTreeMap::new();
    let mut parity = BTreeMap::new();

    for sv in supergraph.vertices() {
        parity.insert(sv.id.clone(), if sv.color == Color::Black { 1i8 } else { -1 });
        for b in base.vertices() {
            let id = copy_vertex_id(&sv.id, &b.id);
            vertices.push(Vertex { id: id.clone(), color: b.color });
            copy_of.insert(id, (sv.id.clone(), b.id.clone()));
        }
        for e in base.edges() {
            edges.push(Edge {
                id: copy_edge_id(&sv.id, &e.id),
                u: copy_vertex_id(&sv.id, &e.u),
                v: copy_vertex_id(&sv.id, &e.v),
                weight: e.weight.clone(),
            });
        }
        for b in base.vertices() {
            let mut rot = Vec::new();
            for e in base.rotation(&b.id) {
                rot.push(copy_edge_id(&sv.id, e));
                if let Some(events) = splices.get(&(sv.id.clone(), b.id.clone(), e.clone())) {
                    let mut events = events.clone();
                    events.sort_by(|a, b| b.0.cmp(&a.0));
                    rot.extend(events.into_iter().map(|(_, id)| id));
                }
            }
            if parity[&sv.id] < 0 {
                rot.reverse();
            }
            rotation.insert(copy_vertex_id(&sv.id, &b.id), rot);
        }
    }

    let mut stems = BTreeSet::new();
    let mut event_darts: Vec<Dart> = Vec::new();
    for (k, s) in script.stems.iter().enumerate() {
        let f = supergraph.edge(&s.super_edge).unwrap();
        let sid = stem_vertex_id(k);
        vertices.push(Vertex { id: sid.clone(), color: Color::Black });
        for (side, end) in [(0, &f.u), (1, &f.v)] {
            let eid = stem_edge_id(k, side);
            edges.push(Edge {
                id: eid.clone(),
                u: sid.clone(),
                v: copy_vertex_id(end, &s.base_vertex),
                weight: RingElement::one(),
            });
            event_darts.push(Dart::new(eid, sid.clone()));
        }
        rotation.insert(sid.clone(), vec![stem_edge_id(k, 0), stem_edge_id(k, 1)]);
        stems.insert(sid);
    }
    let mut leaves = BTreeSet::new();
    for (k, l) in script.leaves.iter().enumerate() {
        let lid = leaf_vertex_id(k);
        let eid = leaf_edge_id(k);
        vertices.push(Vertex { id: lid.clone(), color: Color::White });
        edges.push(Edge {
            id: eid.clone(),
            u: lid.clone(),
            v: copy_vertex_id(&l.super_vertex, &l.base_vertex),
            weight: RingElement::one(),
        });
        event_darts.push(Dart::new(eid.clone(), lid.clone()));
        rotation.insert(lid.clone(), vec![eid]);
        leaves.insert(lid);
    }

    // Any stem or leaf dart lies on a face that survives copy contraction,
    // so designating its walk as the outer face keeps the compound and the
    // reduced graph consistent. Without events (K1 supergraph) the single
    // copy keeps the base designation.
    event_darts.sort();
    let outer = match event_darts.into_iter().next() {
        Some(d) => Some(d),
        None => {
            let sv = &supergraph.vertices()[0].id;
            base.outer_dart().map(|d| {
                Dart::new(copy_edge_id(sv, &d.edge), copy_vertex_id(sv, &d.tail))
            })
        }
    };

    let graph = PlanarBipartiteGraph::new(vertices, edges, rotation, outer).map_err(|e| match e
    {
        e @ GraphError::NotGenusZero { .. } => CompoundError::NotGenusZero { detail: e.to_string() },
        other => CompoundError::Graph(other),
    })?;

    let compound = CompoundGraph {
        graph,
        base: base.clone(),
        supergraph: supergraph.clone(),
        copy_of,
        parity,
        stems,
        leaves,
        script: script.clone(),
    };
    compound.validate()?;
    Ok(compound)
}

impl CompoundGraph {
    pub fn graph(&self) -> &PlanarBipartiteGraph {
        &self.graph
    }

    pub fn base(&self) -> &PlanarBipartiteGraph {
        &self.base
    }

    pub fn supergraph(&self) -> &PlanarBipartiteGraph {
        &self.supergraph
    }

    /// Copy vertex -> (supergraph vertex, base vertex). Two vertices are
    /// equivalent exactly when their base components agree.
    pub fn copy_of(&self) -> &BTreeMap<String, (String, String)> {
        &self.copy_of
    }

    /// Supergraph vertex -> +1 (base embedding) or -1 (mirrored).
    pub fn parity(&self) -> &BTreeMap<String, i8> {
        &self.parity
    }

    pub fn stems(&self) -> &BTreeSet<String> {
        &self.stems
    }

    pub fn leaves(&self) -> &BTreeSet<String> {
        &self.leaves
    }

    pub fn script(&self) -> &CompoundScript {
        &self.script
    }

    /// Re-checks every structural invariant of the compound construction.
    pub fn validate(&self) -> Result<(), CompoundError> {
        let mut incident: BTreeMap<&str, Vec<&Edge>> = BTreeMap::new();
        for e in self.graph.edges() {
            incident.entry(e.u.as_str()).or_default().push(e);
            incident.entry(e.v.as_str()).or_default().push(e);
        }

        for (id, (sv, bv)) in &self.copy_of {
            let got = self.graph.vertex(id).ok_or_else(|| CompoundError::InvalidStructure {
                detail: format!("copy vertex {id} missing from the graph"),
            })?;
            let want = self.base.vertex(bv).ok_or_else(|| CompoundError::InvalidStructure {
                detail: format!("copy vertex {id} maps to unknown base vertex {bv}"),
            })?;
            if got.color != want.color {
                return Err(CompoundError::InvalidStructure {
                    detail: format!("copy vertex {id} changed color"),
                });
            }
            if !self.parity.contains_key(sv) {
                return Err(CompoundError::InvalidStructure {
                    detail: format!("copy vertex {id} maps to unknown supergraph vertex {sv}"),
                });
            }
        }
        for v in self.graph.vertices() {
            let known = self.copy_of.contains_key(&v.id)
                || self.stems.contains(&v.id)
                || self.leaves.contains(&v.id);
            if !known {
                return Err(CompoundError::InvalidStructure {
                    detail: format!("vertex {} is neither copy, stem, nor leaf", v.id),
                });
            }
        }
        for (sv, &p) in &self.parity {
            let want = match self.supergraph.vertex(sv) {
                Some(v) if v.color == Color::Black => 1,
                Some(_) => -1,
                None => {
                    return Err(CompoundError::InvalidStructure {
                        detail: format!("parity lists unknown supergraph vertex {sv}"),
                    })
                }
            };
            if p != want {
                return Err(CompoundError::InvalidStructure {
                    detail: format!("parity of {sv} disagrees with its color"),
                });
            }
        }

        for stem in &self.stems {
            let v = self.graph.vertex(stem).ok_or_else(|| CompoundError::InvalidStructure {
                detail: format!("stem {stem} missing from the graph"),
            })?;
            if v.color != Color::Black {
                return Err(CompoundError::StemColorViolation { vertex: stem.clone() });
            }
            let inc = incident.get(stem.as_str()).map_or(&[][..], |v| &v[..]);
            if inc.len() != 2 {
                return Err(CompoundError::InvalidStructure {
                    detail: format!("stem {stem} has degree {}", inc.len()),
                });
            }
            let mut ends = Vec::new();
            for e in inc {
                let other = e.other(stem);
                let (sv, bv) =
                    self.copy_of.get(other).ok_or_else(|| CompoundError::InvalidStructure {
                        detail: format!("stem {stem} touches non-copy vertex {other}"),
                    })?;
                ends.push((sv.clone(), bv.clone()));
            }
            if ends[0].1 != ends[1].1 {
                return Err(CompoundError::InequivalentStemEndpoints { stem: stem.clone() });
            }
            if self.base.vertex(&ends[0].1).map(|v| v.color) != Some(Color::White) {
                return Err(CompoundError::StemColorViolation { vertex: ends[0].1.clone() });
            }
            let (a, b) = (&ends[0].0, &ends[1].0);
            let joined = self
                .supergraph
                .edges()
                .iter()
                .any(|e| (&e.u == a && &e.v == b) || (&e.u == b && &e.v == a));
            if a == b || !joined {
                return Err(CompoundError::InvalidStructure {
                    detail: format!("stem {stem} joins copies {a} and {b} with no supergraph edge"),
                });
            }
        }
        for leaf in &self.leaves {
            let v = self.graph.vertex(leaf).ok_or_else(|| CompoundError::InvalidStructure {
                detail: format!("leaf {leaf} missing from the graph"),
            })?;
            if v.color != Color::White {
                return Err(CompoundError::LeafColorViolation { vertex: leaf.clone() });
            }
            let inc = incident.get(leaf.as_str()).map_or(&[][..], |v| &v[..]);
            if inc.len() != 1 {
                return Err(CompoundError::InvalidStructure {
                    detail: format!("leaf {leaf} has degree {}", inc.len()),
                });
            }
            let other = inc[0].other(leaf);
            let (_, bv) =
                self.copy_of.get(other).ok_or_else(|| CompoundError::InvalidStructure {
                    detail: format!("leaf {leaf} hangs off non-copy vertex {other}"),
                })?;
            if self.base.vertex(bv).map(|v| v.color) != Some(Color::Black) {
                return Err(CompoundError::LeafColorViolation { vertex: other.to_string() });
            }
        }
        if self.stems.len() != self.leaves.len() {
            return Err(CompoundError::CountMismatch {
                stems: self.stems.len(),
                leaves: self.leaves.len(),
            });
        }

        for (sv, _) in &self.parity {
            for e in self.base.edges() {
                let id = copy_edge_id(sv, &e.id);
                let got = self.graph.edge(&id).ok_or_else(|| CompoundError::InvalidStructure {
                    detail: format!("copy edge {id} missing"),
                })?;
                if got.weight != e.weight {
                    return Err(CompoundError::InvalidStructure {
                        detail: format!("copy edge {id} does not carry the base weight"),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Collapses every copy of the base graph to a single vertex and drops the
/// resulting self-loops, keeping stems and leaves. Copy vertices are white
/// and stems and leaves black in the result; edge ids are shared with the
/// compound graph.
pub fn reduced_graph(h: &CompoundGraph) -> Result<PlanarBipartiteGraph, CompoundError> {
    let (_, visits) = outer_visits(&h.base)?;

    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    let mut rotation: BTreeMap<String, Vec<String>> = BTreeMap::new();
    // Per copy: (walk position, slot, event edge id).
    let mut events: BTreeMap<&str, Vec<(usize, usize, String)>> = BTreeMap::new();
    let mut event_darts: Vec<Dart> = Vec::new();

    for (k, s) in h.script.stems.iter().enumerate() {
        let f = h.supergraph.edge(&s.super_edge).ok_or_else(|| {
            CompoundError::UnknownReference { kind: "supergraph edge", id: s.super_edge.clone() }
        })?;
        let pos = visits[&s.base_vertex][s.gap];
        let sid = stem_vertex_id(k);
        vertices.push(Vertex { id: sid.clone(), color: Color::Black });
        for (side, end) in [(0, &f.u), (1, &f.v)] {
            let eid = stem_edge_id(k, side);
            events.entry(end).or_default().push((pos, s.slot, eid.clone()));
            edges.push(Edge {
                id: eid.clone(),
                u: sid.clone(),
                v: reduced_copy_id(end),
                weight: RingElement::one(),
            });
            event_darts.push(Dart::new(eid, sid.clone()));
        }
        rotation.insert(sid, vec![stem_edge_id(k, 0), stem_edge_id(k, 1)]);
    }
    for (k, l) in h.script.leaves.iter().enumerate() {
        let pos = visits[&l.base_vertex][l.gap];
        let lid = leaf_vertex_id(k);
        let eid = leaf_edge_id(k);
        vertices.push(Vertex { id: lid.clone(), color: Color::Black });
        events.entry(&l.super_vertex).or_default().push((pos, l.slot, eid.clone()));
        edges.push(Edge {
            id: eid.clone(),
            u: lid.clone(),
            v: reduced_copy_id(&l.super_vertex),
            weight: RingElement::one(),
        });
        event_darts.push(Dart::new(eid.clone(), lid.clone()));
        rotation.insert(lid, vec![eid]);
    }

    for (sv, &p) in &h.parity {
        vertices.push(Vertex { id: reduced_copy_id(sv), color: Color::White });
        if let Some(evs) = events.get_mut(sv.as_str()) {
            // The copy boundary walk meets events in ascending (position,
            // slot) order and runs counterclockwise, reversed on mirrored
            // copies; clockwise rotation is the other way around.
            evs.sort();
            let list: Vec<String> = if p > 0 {
                evs.iter().rev().map(|(_, _, e)| e.clone()).collect()
            } else {
                evs.iter().map(|(_, _, e)| e.clone()).collect()
            };
            rotation.insert(reduced_copy_id(sv), list);
        }
    }

    event_darts.sort();
    let outer = event_darts.into_iter().next();

    PlanarBipartiteGraph::new(vertices, edges, rotation, outer).map_err(|e| match e {
        e @ GraphError::NotGenusZero { .. } => CompoundError::NotGenusZero { detail: e.to_string() },
        other => CompoundError::Graph(other),
    })
}

/// Lifts a sign function on the base and one on the reduced graph to the
/// compound graph: copy edges take the base value of their class, stem and
/// leaf edges take the reduced value.
pub fn compose_sign_function(
    h: &CompoundGraph,
    sf_base: &SignFunction,
    sf_red: &SignFunction,
) -> Result<SignFunction, CompoundError> {
    let r = reduced_graph(h)?;
    sf_base
        .check_domain(&h.base)
        .map_err(|e| CompoundError::InvalidInputSign { detail: format!("base: {e}") })?;
    sf_red
        .check_domain(&r)
        .map_err(|e| CompoundError::InvalidInputSign { detail: format!("reduced: {e}") })?;

    let mut values = BTreeMap::new();
    for (sv, _) in &h.parity {
        for e in h.base.edges() {
            values.insert(copy_edge_id(sv, &e.id), sf_base.get(&e.id).unwrap());
        }
    }
    for e in r.edges() {
        values.insert(e.id.clone(), sf_red.get(&e.id).unwrap());
    }
    SignFunction::from_map(values)
        .map_err(|e| CompoundError::InvalidInputSign { detail: e.to_string() })
}

/// Reads the base sign function back off a sign function on the compound
/// graph. Fails unless all copies agree edge by edge.
pub fn restrict_to_base(
    h: &CompoundGraph,
    sf: &SignFunction,
) -> Result<SignFunction, CompoundError> {
    sf.check_domain(&h.graph)
        .map_err(|e| CompoundError::InvalidInputSign { detail: e.to_string() })?;
    let mut values = BTreeMap::new();
    for e in h.base.edges() {
        let mut seen = None;
        for (sv, _) in &h.parity {
            let val = sf.get(&copy_edge_id(sv, &e.id)).unwrap();
            match seen {
                None => seen = Some(val),
                Some(prev) if prev != val => {
                    return Err(CompoundError::InvalidInputSign {
                        detail: format!("copies disagree on base edge {}", e.id),
                    })
                }
                Some(_) => {}
            }
        }
        values.insert(e.id.clone(), seen.unwrap());
    }
    SignFunction::from_map(values)
        .map_err(|e| CompoundError::InvalidInputSign { detail: e.to_string() })
}

/// Reads the reduced sign function back off a sign function on the compound
/// graph.
pub fn restrict_to_reduced(
    h: &CompoundGraph,
    sf: &SignFunction,
) -> Result<SignFunction, CompoundError> {
    sf.check_domain(&h.graph)
        .map_err(|e| CompoundError::InvalidInputSign { detail: e.to_string() })?;
    let mut values = BTreeMap::new();
    for k in 0..h.script.stems.len() {
        for side in 0..2 {
            let id = stem_edge_id(k, side);
            values.insert(id.clone(), sf.get(&id).unwrap());
        }
    }
    for k in 0..h.script.leaves.len() {
        let id = leaf_edge_id(k);
        values.insert(id.clone(), sf.get(&id).unwrap());
    }
    SignFunction::from_map(values)
        .map_err(|e| CompoundError::InvalidInputSign { detail: e.to_string() })
}

/// Multiplies every stem and leaf edge weight by its sign; copy edges keep
/// their weights. Applying the same sign function twice restores the graph.
pub fn sign_weight(
    h: &CompoundGraph,
    sf: &SignFunction,
) -> Result<PlanarBipartiteGraph, CompoundError> {
    sf.check_domain(&h.graph)
        .map_err(|e| CompoundError::InvalidInputSign { detail: e.to_string() })?;
    let vertices = h.graph.vertices().to_vec();
    let mut edges = h.graph.edges().to_vec();
    for e in &mut edges {
        if h.stems.contains(&e.u) || h.leaves.contains(&e.u) {
            let s = sf.get(&e.id).unwrap();
            if s < 0 {
                e.weight = e.weight.scale(&BigInt::from(-1));
            }
        }
    }
    let mut rotation = BTreeMap::new();
    for v in h.graph.vertices() {
        let rot = h.graph.rotation(&v.id);
        if !rot.is_empty() {
            rotation.insert(v.id.clone(), rot.to_vec());
        }
    }
    Ok(PlanarBipartiteGraph::new(vertices, edges, rotation, h.graph.outer_dart().cloned())?)
}

/// Builds the family of `h` with respect to one of its leaves: one member
/// per copy, obtained by re-attaching the leaf to the equivalent vertex.
/// The sibling placement keeps the leaf in the same reduced-graph face when
/// some gap allows it, else falls back to the first gap; either way the slot
/// is the next free one at the chosen gap.
pub fn family(h: &CompoundGraph, leaf_id: &str) -> Result<Family, CompoundError> {
    let k = match h.script.leaves.iter().enumerate().find(|(k, _)| leaf_vertex_id(*k) == leaf_id)
    {
        Some((k, _)) => k,
        None => {
            return Err(CompoundError::UnknownReference {
                kind: "leaf",
                id: leaf_id.to_string(),
            })
        }
    };
    let spec = h.script.leaves[k].clone();
    let q = spec.base_vertex.clone();
    let (_, visits) = outer_visits(&h.base)?;
    let gaps = visits[&q].len();

    // The face the leaf currently occupies, as a dart set of the reduced
    // graph with the leaf removed. Sibling probes compare against it.
    let r = reduced_graph(h)?;
    let leaf_edge = leaf_edge_id(k);
    let home = r
        .trace_faces()
        .into_iter()
        .find(|w| w.contains_edge(&leaf_edge))
        .expect("pendant edge lies on some face walk");
    let home_key: BTreeSet<Dart> =
        home.darts.iter().filter(|d| d.edge != leaf_edge).cloned().collect();

    let r0 = delete_pendant(&r, &leaf_vertex_id(k), &leaf_edge, &home)?;
    let faces0 = r0.trace_faces();

    // Remaining events per copy, keyed the same way reduced rotations are.
    let mut events: BTreeMap<String, Vec<(usize, usize)>> = BTreeMap::new();
    let mut used_slots: BTreeMap<(String, usize), BTreeSet<usize>> = BTreeMap::new();
    let mut event_edge: BTreeMap<(String, usize, usize), String> = BTreeMap::new();
    for (i, s) in h.script.stems.iter().enumerate() {
        let f = h.supergraph.edge(&s.super_edge).unwrap();
        let pos = visits[&s.base_vertex][s.gap];
        for (side, end) in [(0, &f.u), (1, &f.v)] {
            events.entry(end.to_string()).or_default().push((pos, s.slot));
            event_edge.insert((end.to_string(), pos, s.slot), stem_edge_id(i, side));
            if s.base_vertex == q {
                used_slots.entry((end.to_string(), s.gap)).or_default().insert(s.slot);
            }
        }
    }
    for (i, l) in h.script.leaves.iter().enumerate() {
        if i == k {
            continue;
        }
        let pos = visits[&l.base_vertex][l.gap];
        events.entry(l.super_vertex.clone()).or_default().push((pos, l.slot));
        event_edge.insert((l.super_vertex.clone(), pos, l.slot), leaf_edge_id(i));
        if l.base_vertex == q {
            used_slots.entry((l.super_vertex.clone(), l.gap)).or_default().insert(l.slot);
        }
    }

    let mut members = vec![h.clone()];
    for (sv, &p) in &h.parity {
        if *sv == spec.super_vertex {
            continue;
        }
        let copy_events = events.get(sv).cloned().unwrap_or_default();
        if copy_events.is_empty() && gaps == 0 {
            return Err(CompoundError::PlacementImpossible { vertex: q.clone() });
        }
        let next_slot = |gap: usize| -> usize {
            used_slots
                .get(&(sv.clone(), gap))
                .and_then(|s| s.iter().max().map(|m| m + 1))
                .unwrap_or(0)
        };
        let mut chosen = None;
        if !copy_events.is_empty() {
            // Clockwise key order around the contracted copy, as in the
            // reduced rotation.
            let mut cw: Vec<(usize, usize)> = copy_events.clone();
            cw.sort();
            if p > 0 {
                cw.reverse();
            }
            for gap in 0..gaps {
                let slot = next_slot(gap);
                let key = (visits[&q][gap], slot);
                let idx = cw
                    .iter()
                    .position(|&e| if p > 0 { e < key } else { e > key })
                    .unwrap_or(cw.len());
                let before = cw[(idx + cw.len() - 1) % cw.len()];
                let alpha = event_edge[&(sv.clone(), before.0, before.1)].clone();
                let corner = Dart::new(alpha, reduced_copy_id(sv));
                let face = faces0
                    .iter()
                    .find(|w| w.darts.contains(&corner))
                    .expect("every dart lies on a face walk");
                let key_set: BTreeSet<Dart> = face.darts.iter().cloned().collect();
                if key_set == home_key {
                    chosen = Some((gap, slot));
                    break;
                }
            }
        }
        let (gap, slot) = chosen.unwrap_or((0, next_slot(0)));
        let mut script = h.script.clone();
        script.leaves[k] = LeafSpec {
            super_vertex: sv.clone(),
            base_vertex: q.clone(),
            gap,
            slot,
        };
        members.push(build_compound(&h.base, &h.supergraph, &script)?);
    }

    Ok(Family { members, moving_leaf: leaf_id.to_string(), anchor_class: q })
}

/// Removes a pendant vertex and its edge, moving the outer dart off the edge
/// if needed. `home` is the face walk containing the pendant.
fn delete_pendant(
    g: &PlanarBipartiteGraph,
    vertex: &str,
    edge: &str,
    home: &FaceWalk,
) -> Result<PlanarBipartiteGraph, CompoundError> {
    let vertices: Vec<Vertex> =
        g.vertices().iter().filter(|v| v.id != vertex).cloned().collect();
    let edges: Vec<Edge> = g.edges().iter().filter(|e| e.id != edge).cloned().collect();
    let mut rotation = BTreeMap::new();
    for v in &vertices {
        let rot: Vec<String> =
            g.rotation(&v.id).iter().filter(|e| e.as_str() != edge).cloned().collect();
        if !rot.is_empty() {
            rotation.insert(v.id.clone(), rot);
        }
    }
    let outer = match g.outer_dart() {
        Some(d) if d.edge == edge => home.darts.iter().find(|x| x.edge != edge).cloned(),
        other => other.cloned(),
    };
    Ok(PlanarBipartiteGraph::new(vertices, edges, rotation, outer)?)
}

fn count_signed(h: &CompoundGraph, sf_base: &SignFunction) -> Result<RingElement, CompoundError> {
    let r = reduced_graph(h)?;
    let sf_red = construct_sign_function(&r);
    let sf = compose_sign_function(h, sf_base, &sf_red)?;
    let weighted = sign_weight(h, &sf)?;
    Ok(count_matchings(&weighted))
}

/// Searches for signs eps with eps_1 = +1 making the signed sum of the
/// members' sign-weighted matching counts vanish. All members are counted
/// under sign functions sharing one base sign function.
pub fn verify_zero_sum(fam: &Family) -> Result<VerificationReport, CompoundError> {
    let k = fam.members.len();
    assert!(k >= 1 && k <= 63, "family size {k} out of range");
    let sf_base = construct_sign_function(&fam.members[0].base);
    let counts: Vec<RingElement> = fam
        .members
        .iter()
        .map(|m| count_signed(m, &sf_base))
        .collect::<Result<_, _>>()?;

    let subject = format!("family of {k} moving leaf {}", fam.moving_leaf);
    let claim = "some sign choice with first sign +1 zeroes the member counts".to_string();
    for mask in 0u64..(1u64 << (k - 1)) {
        let mut sum = counts[0].clone();
        for i in 1..k {
            if mask >> (i - 1) & 1 == 1 {
                sum = sum.sub(&counts[i]);
            } else {
                sum = sum.add(&counts[i]);
            }
        }
        if sum.is_zero() {
            let eps: Vec<&str> = (0..k)
                .map(|i| {
                    if i == 0 || mask >> (i - 1) & 1 == 0 {
                        "+1"
                    } else {
                        "-1"
                    }
                })
                .collect();
            let witness = format!(
                "eps = ({}); counts = ({})",
                eps.join(", "),
                counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
            );
            return Ok(VerificationReport::pass_with(subject, claim, witness));
        }
    }
    let witness = format!(
        "no vanishing combination; counts = ({})",
        counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
    );
    let reproducer = write_cpd("base.pbg", "super.pbg", &fam.members[0].script);
    Ok(VerificationReport::fail(subject, claim, witness, reproducer))
}

/// Checks that the base count divides the sign-weighted compound count,
/// reporting the quotient. Both counts zero is reported as vacuous.
pub fn verify_divisibility(h: &CompoundGraph) -> Result<VerificationReport, CompoundError> {
    let sf_base = construct_sign_function(&h.base);
    let ch = count_signed(h, &sf_base)?;
    let cg = count_matchings(&h.base);
    let subject = format!("compound of {} copies", h.parity.len());
    let claim = "base matching count divides the sign-weighted compound count".to_string();
    if cg.is_zero() {
        if ch.is_zero() {
            return Ok(VerificationReport::vacuous(subject, claim));
        }
        return Ok(VerificationReport::fail(
            subject,
            claim,
            format!("base count 0, compound count {ch}"),
            write_cpd("base.pbg", "super.pbg", &h.script),
        ));
    }
    match ch.exact_div(&cg) {
        Ok(q) => Ok(VerificationReport::pass_with(subject, claim, format!("quotient {q}"))),
        Err(_) => Ok(VerificationReport::fail(
            subject,
            claim,
            format!("compound count {ch} not divisible by base count {cg}"),
            write_cpd("base.pbg", "super.pbg", &h.script),
        )),
    }
}

/// True when every bounded face of the reduced graph contains an odd number
/// of leaves. In that case sign-weighting with the all-plus reduced sign
/// leaves the weights unchanged, so the divisibility applies to the plain
/// matching count.
pub fn check_odd_leaves(h: &CompoundGraph) -> Result<bool, CompoundError> {
    let r = reduced_graph(h)?;
    let leaf_edges: BTreeSet<String> =
        (0..h.script.leaves.len()).map(leaf_edge_id).collect();
    for walk in r.trace_faces() {
        if walk.is_outer {
            continue;
        }
        let present: BTreeSet<&str> = walk
            .darts
            .iter()
            .filter(|d| leaf_edges.contains(&d.edge))
            .map(|d| d.edge.as_str())
            .collect();
        if present.len() % 2 == 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Line-numbered construction-script error.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct CpdError {
    pub line: usize,
    pub msg: String,
}

/// A parsed `cpd v1` file: the two graph file references plus the script.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CpdFile {
    pub base_path: String,
    pub super_path: String,
    pub script: CompoundScript,
}

fn parse_face_spec(s: &str) -> Option<(usize, usize)> {
    match s.split_once('.') {
        Some((g, sl)) => Some((g.parse().ok()?, sl.parse().ok()?)),
        None => Some((s.parse().ok()?, 0)),
    }
}

fn face_spec(gap: usize, slot: usize) -> String {
    if slot == 0 {
        format!("{gap}")
    } else {
        format!("{gap}.{slot}")
    }
}

/// Parses a `cpd v1` construction script.
pub fn parse_cpd(input: &str) -> Result<CpdFile, CpdError> {
    let err = |line: usize, msg: &str| CpdError { line, msg: msg.to_string() };
    let mut base_path: Option<String> = None;
    let mut super_path: Option<String> = None;
    let mut script = CompoundScript::default();
    let mut saw_header = false;

    for (i, raw) in input.lines().enumerate() {
        let line = i + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        if !saw_header {
            if text != "cpd v1" {
                return Err(err(line, "expected header `cpd v1`"));
            }
            saw_header = true;
            continue;
        }
        let (directive, rest) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
        let rest = rest.trim();
        match directive {
            "base" => {
                if base_path.replace(rest.to_string()).is_some() {
                    return Err(err(line, "duplicate `base` line"));
                }
                if rest.is_empty() {
                    return Err(err(line, "`base` needs a file path"));
                }
            }
            "super" => {
                if super_path.replace(rest.to_string()).is_some() {
                    return Err(err(line, "duplicate `super` line"));
                }
                if rest.is_empty() {
                    return Err(err(line, "`super` needs a file path"));
                }
            }
            "stem" | "leaf" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(err(
                        line,
                        "expected `<id> <base-vertex> <gap>[.<slot>]` after the directive",
                    ));
                }
                let (gap, slot) = parse_face_spec(parts[2])
                    .ok_or_else(|| err(line, "face spec must be `<gap>` or `<gap>.<slot>`"))?;
                if directive == "stem" {
                    script.stems.push(StemSpec {
                        super_edge: parts[0].to_string(),
                        base_vertex: parts[1].to_string(),
                        gap,
                        slot,
                    });
                } else {
                    script.leaves.push(LeafSpec {
                        super_vertex: parts[0].to_string(),
                        base_vertex: parts[1].to_string(),
                        gap,
                        slot,
                    });
                }
            }
            other => return Err(err(line, &format!("unknown directive {other:?}"))),
        }
    }
    if !saw_header {
        return Err(err(1, "empty script; expected header `cpd v1`"));
    }
    let base_path = base_path.ok_or_else(|| err(1, "missing `base` line"))?;
    let super_path = super_path.ok_or_else(|| err(1, "missing `super` line"))?;
    Ok(CpdFile { base_path, super_path, script })
}

/// Serializes a construction script in `cpd v1` form.
pub fn write_cpd(base_path: &str, super_path: &str, script: &CompoundScript) -> String {
    let mut out = String::from("cpd v1\n");
    out.push_str(&format!("base {base_path}\n"));
    out.push_str(&format!("super {super_path}\n"));
    for s in &script.stems {
        out.push_str(&format!(
            "stem {} {} {}\n",
            s.super_edge,
            s.base_vertex,
            face_spec(s.gap, s.slot)
        ));
    }
    for l in &script.leaves {
        out.push_str(&format!(
            "leaf {} {} {}\n",
            l.super_vertex,
            l.base_vertex,
            face_spec(l.gap, l.slot)
        ));
    }
    out
}

/// Serializes the vertex-origin sidecar (`cpdmap v1`) of a compound graph.
pub fn write_cpdmap(h: &CompoundGraph) -> String {
    let mut out = String::from("cpdmap v1\n");
    for (v, (sv, bv)) in &h.copy_of {
        out.push_str(&format!("vmap {v} {sv} {bv}\n"));
    }
    for s in &h.stems {
        out.push_str(&format!("stem {s}\n"));
    }
    for l in &h.leaves {
        out.push_str(&format!("leaf {l}\n"));
    }
    out
}

impl fmt::Display for CompoundGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "compound of {} copies, {} stems, {} leaves",
            self.parity.len(),
            self.stems.len(),
            self.leaves.len()
        )
    }
}
