//! Symmetric compounds: two mirror copies of a half graph joined along an
//! axis line by stems and leaves.
//!
//! A stem sits on the axis and joins a vertex of the left copy to its mirror
//! image on the right; a leaf sits on the axis and attaches to one side of
//! such a pair. When stems and leaves alternate along the axis, moving any
//! leaf to its mirror vertex preserves the matching count, with no sign
//! weighting involved. When the axis carries stems only, the count factors
//! as 2^w times the counts of two vertex-deleted halves.
//!
//! Unlike general compounds, stems here may take either color, so the base
//! vertices they attach to are unrestricted too.

use crate::graph::{Color, Dart, Edge, GraphError, PlanarBipartiteGraph, Vertex};
use crate::report::VerificationReport;
use crate::ring::RingElement;
use crate::sign::{count_matchings, SignFunction};
use num_bigint::BigInt;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CiucuError {
    #[error("axis entries {0} and {1} do not alternate stem and leaf")]
    NonAlternating(usize, usize),
    #[error("assembled graph has {black} black and {white} white vertices")]
    ColorImbalance { black: usize, white: usize },
    #[error("attachment {vertex} does not fit on the outer walk in axis order")]
    NotOuterFace { vertex: String },
    #[error("assembly is not genus zero: {detail}")]
    NotGenusZero { detail: String },
    #[error("bad axis spec: {0}")]
    BadAxis(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Which copy a leaf attaches to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    fn prefix(self) -> &'static str {
        match self {
            Side::Left => "L",
            Side::Right => "R",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    Stem,
    Leaf(Side),
}

/// One requested axis vertex: its id, the half vertex it attaches to (the
/// mirror image is implied for stems), and its kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxisEntry {
    pub id: String,
    pub base_vertex: String,
    pub kind: AxisKind,
}

/// Axis vertices listed in order along the axis line, reading in the
/// direction that matches the half's counterclockwise outer walk.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AxisSpec {
    pub entries: Vec<AxisEntry>,
}

/// An assembled axis vertex; the color is opposite its attachment's.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxisVertex {
    pub id: String,
    pub base_vertex: String,
    pub kind: AxisKind,
    pub color: Color,
}

/// Two mirror copies of `half` joined along the axis. Vertices of the left
/// copy are named `L:v`, of the right copy `R:v`; axis vertices keep their
/// spec ids, and their edges are `<id>:L` and `<id>:R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricCompound {
    half: PlanarBipartiteGraph,
    axis: Vec<AxisVertex>,
    graph: PlanarBipartiteGraph,
    w: usize,
}

impl SymmetricCompound {
    pub fn half(&self) -> &PlanarBipartiteGraph {
        &self.half
    }

    pub fn axis(&self) -> &[AxisVertex] {
        &self.axis
    }

    pub fn graph(&self) -> &PlanarBipartiteGraph {
        &self.graph
    }

    /// Stem count.
    pub fn w(&self) -> usize {
        self.w
    }

    fn spec(&self) -> AxisSpec {
        AxisSpec {
            entries: self
                .axis
                .iter()
                .map(|v| AxisEntry {
                    id: v.id.clone(),
                    base_vertex: v.base_vertex.clone(),
                    kind: v.kind,
                })
                .collect(),
        }
    }
}

impl fmt::Display for SymmetricCompound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "symmetric compound: half {}v/{}e, {} stems, {} leaves",
            self.half.vertices().len(),
            self.half.edges().len(),
            self.w,
            self.axis.len() - self.w,
        )
    }
}

fn stem_count(entries: &[AxisEntry]) -> usize {
    entries.iter().filter(|e| e.kind == AxisKind::Stem).count()
}

/// Positions along the half's outer walk for the attachments, one per axis
/// entry, strictly increasing from some starting visit. Greedy earliest
/// placement per start candidate; None when no rotation of the walk fits.
fn chain_positions(
    entries: &[AxisEntry],
    visits: &BTreeMap<String, Vec<usize>>,
    walk_len: usize,
) -> Option<Vec<usize>> {
    let first = visits.get(&entries[0].base_vertex)?;
    'start: for &start in first {
        let mut positions = vec![start];
        let mut offset = 0usize;
        for entry in &entries[1..] {
            let vis = visits.get(&entry.base_vertex)?;
            let next = vis
                .iter()
                .map(|&p| (p + walk_len - start) % walk_len)
                .filter(|&o| o > offset)
                .min();
            match next {
                Some(o) => {
                    offset = o;
                    positions.push((start + o) % walk_len);
                }
                None => continue 'start,
            }
        }
        return Some(positions);
    }
    None
}

/// Assembles the symmetric compound: the right copy is the mirror image of
/// `half` (reversed rotations, same colors and weights), and axis vertices
/// are stitched into the boundary sectors facing the axis, in spec order.
/// Axis edges carry weight 1.
pub fn build_symmetric(
    half: &PlanarBipartiteGraph,
    spec: &AxisSpec,
) -> Result<SymmetricCompound, CiucuError> {
    let entries = &spec.entries;
    let mut seen = BTreeSet::new();
    for e in entries {
        if e.id.contains(':') || e.id == "L" || e.id == "R" {
            return Err(CiucuError::BadAxis(format!("axis id {} is reserved", e.id)));
        }
        if !seen.insert(e.id.as_str()) {
            return Err(CiucuError::BadAxis(format!("axis id {} repeats", e.id)));
        }
    }
    // alternation is a lemma-form rule: stem-only specs are the theorem form
    if entries.iter().any(|e| e.kind != AxisKind::Stem) {
        for (i, pair) in entries.windows(2).enumerate() {
            let both_stems =
                pair[0].kind == AxisKind::Stem && pair[1].kind == AxisKind::Stem;
            let both_leaves = !matches!(pair[0].kind, AxisKind::Stem)
                && !matches!(pair[1].kind, AxisKind::Stem);
            if both_stems || both_leaves {
                return Err(CiucuError::NonAlternating(i, i + 1));
            }
        }
    }

    let mut axis = Vec::new();
    for e in entries {
        let q = half
            .vertex(&e.base_vertex)
            .ok_or_else(|| CiucuError::NotOuterFace { vertex: e.base_vertex.clone() })?;
        axis.push(AxisVertex {
            id: e.id.clone(),
            base_vertex: e.base_vertex.clone(),
            kind: e.kind,
            color: q.color.flip(),
        });
    }

    let black = 2 * half.black_count()
        + axis.iter().filter(|v| v.color == Color::Black).count();
    let white = 2 * half.white_count()
        + axis.iter().filter(|v| v.color == Color::White).count();
    if black != white {
        return Err(CiucuError::ColorImbalance { black, white });
    }

    let departures: Vec<String> = if entries.is_empty() {
        Vec::new()
    } else {
        let (walk, visits) = crate::compound::outer_visits(half)
            .map_err(|_| CiucuError::Graph(GraphError::MissingOuter))?;
        for e in entries {
            if !visits.contains_key(&e.base_vertex) {
                return Err(CiucuError::NotOuterFace { vertex: e.base_vertex.clone() });
            }
        }
        let positions = chain_positions(entries, &visits, walk.len()).ok_or_else(|| {
            CiucuError::NotOuterFace { vertex: entries[0].base_vertex.clone() }
        })?;
        // the axis edge goes right after each visit's departure edge; two
        // visits of one vertex always depart along different edges
        positions
            .iter()
            .map(|&p| walk[(p + 1) % walk.len()].edge.clone())
            .collect()
    };
    let mut splice: BTreeMap<(&str, &str), Vec<(usize, Side)>> = BTreeMap::new();
    for (i, v) in axis.iter().enumerate() {
        let dep = departures[i].as_str();
        let sides: &[Side] = match v.kind {
            AxisKind::Stem => &[Side::Left, Side::Right],
            AxisKind::Leaf(Side::Left) => &[Side::Left],
            AxisKind::Leaf(Side::Right) => &[Side::Right],
        };
        for &side in sides {
            splice
                .entry((v.base_vertex.as_str(), dep))
                .or_default()
                .push((i, side));
        }
    }

    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    let mut rotation: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for side in [Side::Left, Side::Right] {
        let p = side.prefix();
        for v in half.vertices() {
            vertices.push(Vertex { id: format!("{p}:{}", v.id), color: v.color });
        }
        for e in half.edges() {
            edges.push(Edge {
                id: format!("{p}:{}", e.id),
                u: format!("{p}:{}", e.u),
                v: format!("{p}:{}", e.v),
                weight: e.weight.clone(),
            });
        }
        for v in half.vertices() {
            let base_order = half.rotation(&v.id);
            // splice in base orientation, then reverse for the mirror copy
            let mut order = Vec::new();
            for e in base_order {
                order.push(format!("{p}:{e}"));
                if let Some(events) = splice.get(&(v.id.as_str(), e.as_str())) {
                    for &(i, s) in events {
                        if s == side {
                            order.push(format!("{}:{p}", axis[i].id));
                        }
                    }
                }
            }
            if side == Side::Right {
                order.reverse();
            }
            if !order.is_empty() {
                rotation.insert(format!("{p}:{}", v.id), order);
            }
        }
    }
    for v in &axis {
        vertices.push(Vertex { id: v.id.clone(), color: v.color });
        let mut order = Vec::new();
        let sides: &[Side] = match v.kind {
            AxisKind::Stem => &[Side::Left, Side::Right],
            AxisKind::Leaf(Side::Left) => &[Side::Left],
            AxisKind::Leaf(Side::Right) => &[Side::Right],
        };
        for &side in sides {
            let p = side.prefix();
            let id = format!("{}:{p}", v.id);
            edges.push(Edge {
                id: id.clone(),
                u: v.id.clone(),
                v: format!("{p}:{}", v.base_vertex),
                weight: RingElement::one(),
            });
            order.push(id);
        }
        rotation.insert(v.id.clone(), order);
    }

    // the face that leaves the last attachment along its old departure edge
    // walks the boundary stretch between the last and first axis entries,
    // which the assembly leaves unbounded; with no axis the left copy keeps
    // its own outer face
    let outer = match entries.last() {
        Some(last) => Some(Dart::new(
            format!("L:{}", departures.last().expect("one per entry")),
            format!("L:{}", last.base_vertex),
        )),
        None => half
            .outer_dart()
            .map(|d| Dart::new(format!("L:{}", d.edge), format!("L:{}", d.tail))),
    };

    let graph = PlanarBipartiteGraph::new(vertices, edges, rotation, outer).map_err(
        |e| match e {
            e @ GraphError::NotGenusZero { .. } => {
                CiucuError::NotGenusZero { detail: e.to_string() }
            }
            e => CiucuError::Graph(e),
        },
    )?;
    let w = stem_count(entries);
    Ok(SymmetricCompound { half: half.clone(), axis, graph, w })
}

/// A sign function for the assembled graph: each copy restricts to one
/// constructed base sign, leaf edges are positive, and stem edges are set so
/// every face between neighboring axis vertices closes with the right
/// parity. A stem following a leaf (or opening the axis) takes equal signs
/// when black and opposite when white; the boundary path to the next stem
/// then has the matching parity, and the leaf edge in between enters its
/// face twice. A stem directly following another stem instead chains off its
/// predecessor, flipping the right-hand sign exactly when their colors
/// agree, since the face they bound has two more edges than the leaf case.
pub fn ciucu_sign_function(sc: &SymmetricCompound) -> SignFunction {
    let base = crate::sign::construct_sign_function(&sc.half);
    let mut values = BTreeMap::new();
    for e in sc.half.edges() {
        let s = base.get(&e.id).expect("constructed over the half");
        values.insert(format!("L:{}", e.id), s);
        values.insert(format!("R:{}", e.id), s);
    }
    let mut last_stem: Option<(Color, i8)> = None;
    for v in &sc.axis {
        match v.kind {
            AxisKind::Stem => {
                let s = match last_stem {
                    Some((c, s)) if c == v.color => -s,
                    Some((_, s)) => s,
                    None => {
                        if v.color == Color::Black {
                            1
                        } else {
                            -1
                        }
                    }
                };
                values.insert(format!("{}:L", v.id), 1);
                values.insert(format!("{}:R", v.id), s);
                last_stem = Some((v.color, s));
            }
            AxisKind::Leaf(side) => {
                values.insert(format!("{}:{}", v.id, side.prefix()), 1);
                last_stem = None;
            }
        }
    }
    SignFunction::from_map(values).expect("signs are unit")
}

/// Checks that moving `leaf_id` to the mirror vertex on the other copy
/// preserves the matching count, comparing the two counts exactly (a
/// polynomial identity when the half carries variable weights).
pub fn verify_ciucu_lemma(sc: &SymmetricCompound, leaf_id: &str) -> VerificationReport {
    let subject = format!("leaf {leaf_id} of {sc}");
    let claim = "moving the leaf across the axis preserves the matching count";
    let Some((pos, side)) = sc.axis.iter().enumerate().find_map(|(i, v)| match v.kind {
        AxisKind::Leaf(side) if v.id == leaf_id => Some((i, side)),
        _ => None,
    }) else {
        return VerificationReport::fail(
            subject,
            claim,
            format!("{leaf_id} is not an axis leaf"),
            "ciucu verify-lemma <half.pbg> <axis-spec> <leaf-id>",
        );
    };
    let mut spec = sc.spec();
    spec.entries[pos].kind = AxisKind::Leaf(side.flip());
    let other = match build_symmetric(&sc.half, &spec) {
        Ok(sc2) => sc2,
        Err(e) => {
            return VerificationReport::fail(
                subject,
                claim,
                format!("mirror member failed to build: {e}"),
                "ciucu verify-lemma <half.pbg> <axis-spec> <leaf-id>",
            );
        }
    };
    let c1 = count_matchings(&sc.graph);
    let c2 = count_matchings(&other.graph);
    if c1 == c2 {
        VerificationReport::pass_with(subject, claim, format!("both count {c1}"))
    } else {
        VerificationReport::fail(
            subject,
            claim,
            format!("counts differ: {c1} vs {c2}"),
            "ciucu verify-lemma <half.pbg> <axis-spec> <leaf-id>",
        )
    }
}

/// The two vertex-deleted halves of the factorization. Stems are labeled
/// even and odd alternately along the axis; the first half deletes the
/// attachments of black even and white odd stems, the second those of white
/// even and black odd stems. Requires a leaf-free axis.
pub fn split_even_odd(
    sc: &SymmetricCompound,
) -> Result<(PlanarBipartiteGraph, PlanarBipartiteGraph), CiucuError> {
    if sc.axis.len() != sc.w {
        return Err(CiucuError::BadAxis(
            "the factorization applies to stem-only axes".to_string(),
        ));
    }
    let mut drop_bw = BTreeSet::new();
    let mut drop_wb = BTreeSet::new();
    for (i, v) in sc.axis.iter().enumerate() {
        let even = i % 2 == 0;
        let black = v.color == Color::Black;
        if black == even {
            drop_bw.insert(v.base_vertex.clone());
        } else {
            drop_wb.insert(v.base_vertex.clone());
        }
    }
    Ok((sc.half.delete_vertices(&drop_bw), sc.half.delete_vertices(&drop_wb)))
}

/// Checks the factorization: with 2w stems and no leaves, the count of the
/// assembled graph equals 2^w times the product of the counts of the two
/// vertex-deleted halves, exactly in the weight ring.
pub fn verify_factorization(sc: &SymmetricCompound) -> VerificationReport {
    let subject = format!("{sc}");
    let claim = "count factors as 2^w times the two deleted-half counts";
    let (g_bw, g_wb) = match split_even_odd(sc) {
        Ok(pair) => pair,
        Err(e) => {
            return VerificationReport::fail(
                subject,
                claim,
                e.to_string(),
                "ciucu factorize <half.pbg> <axis-spec>",
            );
        }
    };
    debug_assert_eq!(sc.w % 2, 0, "balance forces an even stem count");
    let w = sc.w / 2;
    let whole = count_matchings(&sc.graph);
    let first = count_matchings(&g_bw);
    let second = count_matchings(&g_wb);
    let product = first
        .mul(&second)
        .scale(&BigInt::from(2).pow(w as u32));
    if whole == product {
        VerificationReport::pass_with(
            subject,
            claim,
            format!("{whole} = 2^{w} * {first} * {second}"),
        )
    } else {
        VerificationReport::fail(
            subject,
            claim,
            format!("{whole} != 2^{w} * {first} * {second}"),
            "ciucu factorize <half.pbg> <axis-spec>",
        )
    }
}

// ---------------------------------------------------------------------------
// axis text format
// ---------------------------------------------------------------------------

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct AxisParseError {
    pub line: usize,
    pub msg: String,
}

/// Parse the `axis v1` format: one entry per line in axis order, either
/// `stem <id> <base-vertex>` or `leaf <id> <base-vertex> <L|R>`. `#` starts
/// a comment and blank lines are skipped.
pub fn parse_axis(input: &str) -> Result<AxisSpec, AxisParseError> {
    let err = |line: usize, msg: &str| AxisParseError { line, msg: msg.to_string() };
    let mut entries = Vec::new();
    let mut saw_header = false;
    for (idx, raw) in input.lines().enumerate() {
        let line = idx + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        if !saw_header {
            if text != "axis v1" {
                return Err(err(line, "expected `axis v1` header"));
            }
            saw_header = true;
            continue;
        }
        let parts: Vec<&str> = text.split_whitespace().collect();
        match parts[0] {
            "stem" => {
                if parts.len() != 3 {
                    return Err(err(line, "expected `stem <id> <base-vertex>`"));
                }
                entries.push(AxisEntry {
                    id: parts[1].to_string(),
                    base_vertex: parts[2].to_string(),
                    kind: AxisKind::Stem,
                });
            }
            "leaf" => {
                if parts.len() != 4 {
                    return Err(err(line, "expected `leaf <id> <base-vertex> <L|R>`"));
                }
                let side = match parts[3] {
                    "L" => Side::Left,
                    "R" => Side::Right,
                    _ => return Err(err(line, "side must be L or R")),
                };
                entries.push(AxisEntry {
                    id: parts[1].to_string(),
                    base_vertex: parts[2].to_string(),
                    kind: AxisKind::Leaf(side),
                });
            }
            other => {
                return Err(err(line, &format!("unknown directive {other}")));
            }
        }
    }
    if !saw_header {
        return Err(err(1, "empty input: expected `axis v1` header"));
    }
    Ok(AxisSpec { entries })
}

/// Serialize an axis spec in the `axis v1` format; inverse of [`parse_axis`].
pub fn write_axis(spec: &AxisSpec) -> String {
    let mut out = String::from("axis v1\n");
    for e in &spec.entries {
        match e.kind {
            AxisKind::Stem => {
                out.push_str(&format!("stem {} {}\n", e.id, e.base_vertex));
            }
            AxisKind::Leaf(side) => {
                out.push_str(&format!(
                    "leaf {} {} {}\n",
                    e.id,
                    e.base_vertex,
                    side.prefix()
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::oracle_count;
    use crate::regions::{rectangle, EdgeWeights, RectangleSpec};
    use crate::sign::verify_sign_function;

    fn rect(m: usize, n: usize) -> PlanarBipartiteGraph {
        rectangle(RectangleSpec::new(m, n).unwrap(), EdgeWeights::Unit)
    }

    fn edge_half(weight: RingElement) -> PlanarBipartiteGraph {
        PlanarBipartiteGraph::new(
            vec![
                Vertex { id: "a".into(), color: Color::Black },
                Vertex { id: "b".into(), color: Color::White },
            ],
            vec![Edge { id: "e0".into(), u: "a".into(), v: "b".into(), weight }],
            BTreeMap::from([
                ("a".to_string(), vec!["e0".to_string()]),
                ("b".to_string(), vec!["e0".to_string()]),
            ]),
            Some(Dart::new("e0", "a")),
        )
        .unwrap()
    }

    fn path3_wbw() -> PlanarBipartiteGraph {
        PlanarBipartiteGraph::new(
            vec![
                Vertex { id: "a".into(), color: Color::White },
                Vertex { id: "m".into(), color: Color::Black },
                Vertex { id: "c".into(), color: Color::White },
            ],
            vec![
                Edge {
                    id: "e0".into(),
                    u: "a".into(),
                    v: "m".into(),
                    weight: RingElement::one(),
                },
                Edge {
                    id: "e1".into(),
                    u: "m".into(),
                    v: "c".into(),
                    weight: RingElement::one(),
                },
            ],
            BTreeMap::from([
                ("a".to_string(), vec!["e0".to_string()]),
                ("m".to_string(), vec!["e0".to_string(), "e1".to_string()]),
                ("c".to_string(), vec!["e1".to_string()]),
            ]),
            Some(Dart::new("e0", "a")),
        )
        .unwrap()
    }

    fn stem(id: &str, at: &str) -> AxisEntry {
        AxisEntry { id: id.into(), base_vertex: at.into(), kind: AxisKind::Stem }
    }

    fn leaf(id: &str, at: &str, side: Side) -> AxisEntry {
        AxisEntry {
            id: id.into(),
            base_vertex: at.into(),
            kind: AxisKind::Leaf(side),
        }
    }

    fn fig8_half() -> PlanarBipartiteGraph {
        rect(8, 5).delete_vertices(&BTreeSet::from(["v1_1".to_string()]))
    }

    fn fig8_spec() -> AxisSpec {
        AxisSpec {
            entries: vec![
                leaf("f0", "v8_5", Side::Left),
                stem("s0", "v6_5"),
                leaf("f1", "v5_5", Side::Left),
                stem("s1", "v4_5"),
                leaf("f2", "v2_5", Side::Right),
                stem("s2", "v1_5"),
            ],
        }
    }

    #[test]
    fn single_edge_axis_compound() {
        let half = edge_half(RingElement::one());
        let spec = AxisSpec {
            entries: vec![stem("s0", "b"), leaf("f0", "a", Side::Left)],
        };
        let sc = build_symmetric(&half, &spec).unwrap();
        assert_eq!(sc.w(), 1);
        assert_eq!(sc.axis().len(), 2);
        assert_eq!(sc.axis()[0].color, Color::Black);
        assert_eq!(sc.axis()[1].color, Color::White);
        let ids: Vec<&str> =
            sc.graph().vertices().iter().map(|v| v.id.as_str()).collect();
        assert_eq!(ids, vec!["L:a", "L:b", "R:a", "R:b", "f0", "s0"]);

        // a six-vertex path has exactly one perfect matching
        assert_eq!(count_matchings(sc.graph()), RingElement::one());
        assert_eq!(oracle_count(sc.graph()).unwrap(), RingElement::one());

        let sf = ciucu_sign_function(&sc);
        assert!(verify_sign_function(sc.graph(), &sf, 1000).passed());

        assert!(verify_ciucu_lemma(&sc, "f0").passed());
        assert!(!verify_ciucu_lemma(&sc, "s0").passed());
        assert!(!verify_ciucu_lemma(&sc, "zzz").passed());
    }

    #[test]
    fn variable_weight_lemma_is_a_polynomial_identity() {
        let half = edge_half(RingElement::var("x"));
        let spec = AxisSpec {
            entries: vec![stem("s0", "b"), leaf("f0", "a", Side::Left)],
        };
        let sc = build_symmetric(&half, &spec).unwrap();
        assert_eq!(count_matchings(sc.graph()), RingElement::var("x"));
        assert!(verify_ciucu_lemma(&sc, "f0").passed());

        let half = rectangle(RectangleSpec::new(3, 2).unwrap(), EdgeWeights::Variables);
        let spec = AxisSpec {
            entries: vec![leaf("f0", "v3_2", Side::Left), stem("s0", "v2_2")],
        };
        let sc = build_symmetric(&half, &spec).unwrap();
        let c = count_matchings(sc.graph());
        assert!(c.as_integer().is_none());
        let report = verify_ciucu_lemma(&sc, "f0");
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn build_rejects_malformed_axes() {
        let half = edge_half(RingElement::one());

        let dup = AxisSpec {
            entries: vec![stem("x", "b"), leaf("x", "a", Side::Left)],
        };
        assert!(matches!(
            build_symmetric(&half, &dup),
            Err(CiucuError::BadAxis(_))
        ));
        for id in ["L", "R", "a:b"] {
            let spec = AxisSpec { entries: vec![stem(id, "b")] };
            assert!(matches!(
                build_symmetric(&half, &spec),
                Err(CiucuError::BadAxis(_))
            ));
        }

        let stems_then_leaf = AxisSpec {
            entries: vec![stem("s0", "a"), stem("s1", "a"), leaf("f0", "b", Side::Left)],
        };
        assert_eq!(
            build_symmetric(&half, &stems_then_leaf).unwrap_err(),
            CiucuError::NonAlternating(0, 1)
        );
        let two_leaves = AxisSpec {
            entries: vec![leaf("f0", "a", Side::Left), leaf("f1", "a", Side::Right)],
        };
        assert_eq!(
            build_symmetric(&half, &two_leaves).unwrap_err(),
            CiucuError::NonAlternating(0, 1)
        );

        let lone_stem = AxisSpec { entries: vec![stem("s0", "b")] };
        assert_eq!(
            build_symmetric(&half, &lone_stem).unwrap_err(),
            CiucuError::ColorImbalance { black: 3, white: 2 }
        );

        let unknown = AxisSpec { entries: vec![stem("s0", "zzz")] };
        assert_eq!(
            build_symmetric(&half, &unknown).unwrap_err(),
            CiucuError::NotOuterFace { vertex: "zzz".to_string() }
        );

        // balanced, but one attachment is interior
        let interior = AxisSpec {
            entries: vec![stem("s0", "v2_2"), stem("s1", "v1_1")],
        };
        assert_eq!(
            build_symmetric(&rect(3, 3), &interior).unwrap_err(),
            CiucuError::NotOuterFace { vertex: "v2_2".to_string() }
        );

        // balanced and alternating, but the entries interleave two boundary
        // visits that a single walk rotation cannot order
        let crossed = AxisSpec {
            entries: vec![
                stem("s0", "b"),
                leaf("f0", "a", Side::Left),
                stem("s1", "b"),
                leaf("f1", "a", Side::Right),
            ],
        };
        assert_eq!(
            build_symmetric(&half, &crossed).unwrap_err(),
            CiucuError::NotOuterFace { vertex: "b".to_string() }
        );
    }

    #[test]
    fn mirror_grid_compound_with_three_stems() {
        let half = fig8_half();
        assert_eq!(half.vertices().len(), 39);
        let sc = build_symmetric(&half, &fig8_spec()).unwrap();
        assert_eq!(sc.graph().vertices().len(), 84);
        assert_eq!(sc.w(), 3);
        assert_eq!(sc.axis().len(), 6);

        let sf = ciucu_sign_function(&sc);
        for e in sc.half().edges() {
            assert_eq!(
                sf.get(&format!("L:{}", e.id)),
                sf.get(&format!("R:{}", e.id))
            );
        }
        for v in sc.axis() {
            match v.kind {
                AxisKind::Stem => {
                    assert_eq!(sf.get(&format!("{}:L", v.id)), Some(1));
                    let expect = if v.color == Color::Black { 1 } else { -1 };
                    assert_eq!(sf.get(&format!("{}:R", v.id)), Some(expect));
                }
                AxisKind::Leaf(side) => {
                    assert_eq!(
                        sf.get(&format!("{}:{}", v.id, side.prefix())),
                        Some(1)
                    );
                }
            }
        }
        let report = verify_sign_function(sc.graph(), &sf, 500);
        assert!(report.passed(), "{report:?}");

        for id in ["f0", "f1", "f2"] {
            let report = verify_ciucu_lemma(&sc, id);
            assert!(report.passed(), "{report:?}");
        }

        // relabeling the copies (every leaf crosses the axis) keeps the count
        let mut flipped = fig8_spec();
        for e in &mut flipped.entries {
            if let AxisKind::Leaf(side) = e.kind {
                e.kind = AxisKind::Leaf(side.flip());
            }
        }
        let swapped = build_symmetric(&half, &flipped).unwrap();
        let c = count_matchings(sc.graph());
        assert_eq!(c, count_matchings(swapped.graph()));
        assert!(c.as_integer().unwrap() > num_bigint::BigInt::from(0));
    }

    #[test]
    fn factorization_on_stem_only_axes() {
        // no stems at all: the compound is two disjoint halves
        let square = rect(2, 2);
        let sc = build_symmetric(&square, &AxisSpec::default()).unwrap();
        assert_eq!(sc.w(), 0);
        assert_eq!(count_matchings(sc.graph()).as_integer().unwrap(), 4.into());
        let (g_bw, g_wb) = split_even_odd(&sc).unwrap();
        assert_eq!(g_bw, square);
        assert_eq!(g_wb, square);
        assert!(verify_factorization(&sc).passed());

        // two white stems on a black-white-black path close an eight-cycle
        let half = rect(1, 3);
        let spec = AxisSpec { entries: vec![stem("s0", "v1_1"), stem("s1", "v1_3")] };
        let sc = build_symmetric(&half, &spec).unwrap();
        assert_eq!(count_matchings(sc.graph()).as_integer().unwrap(), 2.into());
        assert_eq!(oracle_count(sc.graph()).unwrap().as_integer().unwrap(), 2.into());
        let (g_bw, g_wb) = split_even_odd(&sc).unwrap();
        assert!(g_bw.vertex("v1_3").is_none());
        assert!(g_wb.vertex("v1_1").is_none());
        assert!(verify_factorization(&sc).passed());

        // two black stems: the even one is deleted from the first factor
        let half = path3_wbw();
        let spec = AxisSpec { entries: vec![stem("s0", "a"), stem("s1", "c")] };
        let sc = build_symmetric(&half, &spec).unwrap();
        let (g_bw, g_wb) = split_even_odd(&sc).unwrap();
        assert!(g_bw.vertex("a").is_none() && g_bw.vertex("c").is_some());
        assert!(g_wb.vertex("c").is_none() && g_wb.vertex("a").is_some());
        assert!(verify_factorization(&sc).passed());

        // leaves on the axis leave nothing to factor
        let half = edge_half(RingElement::one());
        let leafy = AxisSpec {
            entries: vec![stem("s0", "b"), leaf("f0", "a", Side::Left)],
        };
        let sc = build_symmetric(&half, &leafy).unwrap();
        assert!(matches!(split_even_odd(&sc), Err(CiucuError::BadAxis(_))));
        assert!(!verify_factorization(&sc).passed());
    }

    #[test]
    fn factorization_with_variable_weights() {
        // one black and one white stem around a single edge close a six-cycle;
        // one factor loses both endpoints and counts the empty product
        let half = edge_half(RingElement::var("x"));
        let spec = AxisSpec { entries: vec![stem("s0", "b"), stem("s1", "a")] };
        let sc = build_symmetric(&half, &spec).unwrap();
        let (g_bw, g_wb) = split_even_odd(&sc).unwrap();
        assert!(g_bw.vertices().is_empty());
        assert_eq!(g_wb, half);
        assert_eq!(
            count_matchings(sc.graph()),
            RingElement::var("x").scale(&num_bigint::BigInt::from(2))
        );
        let report = verify_factorization(&sc);
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn grid_factorization_matches_the_oracle() {
        let half = rect(3, 4);
        let spec = AxisSpec { entries: vec![stem("s0", "v3_4"), stem("s1", "v2_4")] };
        let sc = build_symmetric(&half, &spec).unwrap();
        assert_eq!(sc.graph().vertices().len(), 26);
        let report = verify_factorization(&sc);
        assert!(report.passed(), "{report:?}");
        assert_eq!(count_matchings(sc.graph()), oracle_count(sc.graph()).unwrap());

        let sf = ciucu_sign_function(&sc);
        assert!(verify_sign_function(sc.graph(), &sf, 1000).passed());
    }

    #[test]
    fn axis_format_round_trips() {
        let spec = fig8_spec();
        let text = write_axis(&spec);
        assert_eq!(parse_axis(&text).unwrap(), spec);

        let commented = "# symmetric grid\n\naxis v1\nstem s0 v2_2 # middle\n";
        let parsed = parse_axis(commented).unwrap();
        assert_eq!(parsed.entries, vec![stem("s0", "v2_2")]);

        for (input, line) in [
            ("stem a b\n", 1),
            ("axis v1\nstem x\n", 2),
            ("axis v1\nleaf x v Q\n", 2),
            ("axis v1\n\n# c\nfrob x y\n", 4),
            ("", 1),
        ] {
            assert_eq!(parse_axis(input).unwrap_err().line, line, "{input:?}");
        }
    }
}
