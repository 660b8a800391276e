//! Region generators and divisibility scanners.
//!
//! Rectangles R(m,n) are the m-by-n grid graphs; Aztec pillows are the
//! staircase regions whose left and top boundaries climb in (run 3, rise 1)
//! steps while the right boundary climbs in (run 1, rise 1) steps, with the
//! bottom half the 180-degree rotation of the top. Both come out as plane
//! bipartite graphs ready for counting.
//!
//! The trigonometric product formula for rectangle counts is kept as an
//! independent floating-point cross-check on the determinant counts.

use crate::compound::{
    build_compound, outer_visits, CompoundGraph, CompoundScript, LeafSpec, StemSpec,
};
use crate::graph::{Color, Dart, Edge, PlanarBipartiteGraph, Vertex};
use crate::report::VerificationReport;
use crate::ring::RingElement;
use crate::sign::count_matchings;
use astro_float::{BigFloat, Consts, RoundingMode};
use num_bigint::{BigInt, BigUint, Sign as IntSign};
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegionError {
    #[error("bad region spec: {0}")]
    BadSpec(String),
    #[error("rounding residual exceeds 0.25 at {bits} bits")]
    PrecisionInsufficient { bits: usize },
    #[error("divisibility precondition violated: {0}")]
    DivisibilityPreconditionViolated(String),
}

/// An m-row by n-column grid of vertices; (1, 1) is the upper left corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RectangleSpec {
    pub m: usize,
    pub n: usize,
}

impl RectangleSpec {
    pub fn new(m: usize, n: usize) -> Result<Self, RegionError> {
        if m < 1 || n < 1 {
            return Err(RegionError::BadSpec(format!(
                "rectangle needs m, n >= 1, got {m}x{n}"
            )));
        }
        Ok(RectangleSpec { m, n })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PillowSpec {
    pub order: usize,
}

impl PillowSpec {
    pub fn new(order: usize) -> Result<Self, RegionError> {
        if order < 1 {
            return Err(RegionError::BadSpec("pillow order must be >= 1".into()));
        }
        Ok(PillowSpec { order })
    }
}

pub fn rectangle_vertex_id(i: usize, j: usize) -> String {
    format!("v{i}_{j}")
}

/// Horizontal edge from (i, j) to (i, j+1).
pub fn rectangle_h_edge_id(i: usize, j: usize) -> String {
    format!("h{i}_{j}")
}

/// Vertical edge from (i, j) to (i+1, j).
pub fn rectangle_s_edge_id(i: usize, j: usize) -> String {
    format!("s{i}_{j}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeWeights {
    Unit,
    /// A fresh variable per edge, named after the edge id.
    Variables,
}

/// The grid graph of the spec: checkerboard colors with (1,1) black,
/// clockwise rotations, the outer walk counterclockwise around the border.
pub fn rectangle(spec: RectangleSpec, weights: EdgeWeights) -> PlanarBipartiteGraph {
    let (m, n) = (spec.m, spec.n);
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    let mut rotation: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let weight = |id: &str| match weights {
        EdgeWeights::Unit => RingElement::one(),
        EdgeWeights::Variables => RingElement::var(id),
    };
    for i in 1..=m {
        for j in 1..=n {
            let color = if (i + j) % 2 == 0 { Color::Black } else { Color::White };
            vertices.push(Vertex { id: rectangle_vertex_id(i, j), color });
            let mut order = Vec::new();
            if i > 1 {
                order.push(rectangle_s_edge_id(i - 1, j)); // north
            }
            if j < n {
                order.push(rectangle_h_edge_id(i, j)); // east
            }
            if i < m {
                order.push(rectangle_s_edge_id(i, j)); // south
            }
            if j > 1 {
                order.push(rectangle_h_edge_id(i, j - 1)); // west
            }
            rotation.insert(rectangle_vertex_id(i, j), order);
        }
    }
    for i in 1..=m {
        for j in 1..n {
            let id = rectangle_h_edge_id(i, j);
            edges.push(Edge {
                weight: weight(&id),
                id,
                u: rectangle_vertex_id(i, j),
                v: rectangle_vertex_id(i, j + 1),
            });
        }
    }
    for i in 1..m {
        for j in 1..=n {
            let id = rectangle_s_edge_id(i, j);
            edges.push(Edge {
                weight: weight(&id),
                id,
                u: rectangle_vertex_id(i, j),
                v: rectangle_vertex_id(i + 1, j),
            });
        }
    }
    // a westward dart along the top row lies on the outer walk
    let outer = if n >= 2 {
        Some(Dart::new(rectangle_h_edge_id(1, 1), rectangle_vertex_id(1, 2)))
    } else if m >= 2 {
        Some(Dart::new(rectangle_s_edge_id(1, 1), rectangle_vertex_id(1, 1)))
    } else {
        None
    };
    PlanarBipartiteGraph::new(vertices, edges, rotation, outer)
        .expect("generated rectangle is a valid plane map")
}

// ---------------------------------------------------------------------------
// product formula
// ---------------------------------------------------------------------------

/// Exact integer from a BigFloat that holds an integer value: the mantissa
/// is a binary fraction scaled by 2^exponent.
fn bigfloat_to_bigint(f: &BigFloat) -> Option<BigInt> {
    let (words, _, sign, exponent, _) = f.as_raw_parts()?;
    let mut mantissa = BigUint::zero();
    for (i, w) in words.iter().enumerate() {
        mantissa |= BigUint::from(*w) << (astro_float::WORD_BIT_SIZE * i);
    }
    if mantissa.is_zero() {
        return Some(BigInt::zero());
    }
    let nbits = (astro_float::WORD_BIT_SIZE * words.len()) as i64;
    let shift = nbits - exponent as i64;
    let magnitude = if shift >= 0 {
        mantissa >> shift as u64
    } else {
        mantissa << (-shift) as u64
    };
    let int_sign = if sign.is_negative() { IntSign::Minus } else { IntSign::Plus };
    Some(BigInt::from_biguint(int_sign, magnitude))
}

/// Evaluate the double product over j <= m, k <= n of
/// 4cos^2(pi j/(m+1)) + 4cos^2(pi k/(n+1)), then take the fourth root and
/// round to the nearest integer. The rounding residual must stay within
/// 0.25 or the precision is declared insufficient.
pub fn product_formula_count(m: usize, n: usize, bits: usize) -> Result<BigInt, RegionError> {
    if (m * n) % 2 == 1 {
        return Ok(BigInt::zero());
    }
    let p = bits.max(64);
    let rm = RoundingMode::None;
    let mut cc = Consts::new().expect("constants cache");
    let pi = cc.pi(p, rm);
    let four = BigFloat::from_i8(4, p);
    let mut cos_m: Vec<BigFloat> = Vec::with_capacity(m);
    for j in 1..=m {
        let arg = pi
            .mul(&BigFloat::from_u64(j as u64, p), p, rm)
            .div(&BigFloat::from_u64(m as u64 + 1, p), p, rm);
        let c = arg.cos(p, rm, &mut cc);
        cos_m.push(c.mul(&c, p, rm).mul(&four, p, rm));
    }
    let mut cos_n: Vec<BigFloat> = Vec::with_capacity(n);
    for k in 1..=n {
        let arg = pi
            .mul(&BigFloat::from_u64(k as u64, p), p, rm)
            .div(&BigFloat::from_u64(n as u64 + 1, p), p, rm);
        let c = arg.cos(p, rm, &mut cc);
        cos_n.push(c.mul(&c, p, rm).mul(&four, p, rm));
    }
    let mut product = BigFloat::from_i8(1, p);
    for a in &cos_m {
        for b in &cos_n {
            product = product.mul(&a.add(b, p, rm), p, rm);
        }
    }
    let root = product.sqrt(p, rm).sqrt(p, rm);
    let half = BigFloat::from_i8(1, p).div(&BigFloat::from_i8(2, p), p, rm);
    let quarter = half.mul(&half, p, rm);
    let rounded = root.add(&half, p, rm).int();
    let residual = root.sub(&rounded, p, rm).abs();
    if residual > quarter {
        return Err(RegionError::PrecisionInsufficient { bits: p });
    }
    bigfloat_to_bigint(&rounded).ok_or(RegionError::PrecisionInsufficient { bits: p })
}

pub const DEFAULT_FORMULA_BITS: usize = 128;
const MAX_FORMULA_BITS: usize = 1024;

/// Product formula with automatic precision: start at `bits` (or the 128-bit
/// default), double on an excessive residual, give up past 1024 bits.
pub fn product_formula_count_auto(
    m: usize,
    n: usize,
    bits: Option<usize>,
) -> Result<BigInt, RegionError> {
    let mut p = bits.unwrap_or(DEFAULT_FORMULA_BITS);
    loop {
        match product_formula_count(m, n, p) {
            Err(RegionError::PrecisionInsufficient { .. }) if p < MAX_FORMULA_BITS => {
                p = (p * 2).min(MAX_FORMULA_BITS);
            }
            other => return other,
        }
    }
}

// ---------------------------------------------------------------------------
// Aztec pillows
// ---------------------------------------------------------------------------

/// Unit cells of the order-n pillow. The middle row of 2n-1 cells spans
/// x in [0, 2n-2] at y = 0; going up, each row loses 3 cells on the left
/// and 1 on the right; going down, the mirror image.
pub fn pillow_cells(order: usize) -> BTreeSet<(i64, i64)> {
    let w = 2 * order as i64 - 2;
    let mut cells = BTreeSet::new();
    for j in 0..=(w / 4) {
        for x in 3 * j..=(w - j) {
            cells.insert((x, j));
        }
        if j > 0 {
            for x in j..=(w - 3 * j) {
                cells.insert((x, -j));
            }
        }
    }
    cells
}

pub fn pillow_vertex_id(x: i64, y: i64) -> String {
    format!("p{x}_{y}")
}

/// Graph of a union of unit cells: vertices at cell corners, edges along
/// cell sides, colors by coordinate parity, clockwise rotations.
fn cells_to_graph(cells: &BTreeSet<(i64, i64)>) -> PlanarBipartiteGraph {
    let h_id = |x: i64, y: i64| format!("x{x}_{y}"); // (x,y)-(x+1,y)
    let v_id = |x: i64, y: i64| format!("y{x}_{y}"); // (x,y)-(x,y+1)
    let mut corners: BTreeSet<(i64, i64)> = BTreeSet::new();
    let mut h_edges: BTreeSet<(i64, i64)> = BTreeSet::new();
    let mut v_edges: BTreeSet<(i64, i64)> = BTreeSet::new();
    for &(x, y) in cells {
        for c in [(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)] {
            corners.insert(c);
        }
        h_edges.insert((x, y));
        h_edges.insert((x, y + 1));
        v_edges.insert((x, y));
        v_edges.insert((x + 1, y));
    }
    let mut vertices = Vec::new();
    let mut rotation: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for &(x, y) in &corners {
        let color = if (x + y).rem_euclid(2) == 1 { Color::Black } else { Color::White };
        vertices.push(Vertex { id: pillow_vertex_id(x, y), color });
        let mut order = Vec::new();
        if v_edges.contains(&(x, y)) {
            order.push(v_id(x, y)); // north
        }
        if h_edges.contains(&(x, y)) {
            order.push(h_id(x, y)); // east
        }
        if v_edges.contains(&(x, y - 1)) {
            order.push(v_id(x, y - 1)); // south
        }
        if h_edges.contains(&(x - 1, y)) {
            order.push(h_id(x - 1, y)); // west
        }
        rotation.insert(pillow_vertex_id(x, y), order);
    }
    let mut edges = Vec::new();
    for &(x, y) in &h_edges {
        edges.push(Edge {
            id: h_id(x, y),
            u: pillow_vertex_id(x, y),
            v: pillow_vertex_id(x + 1, y),
            weight: RingElement::one(),
        });
    }
    for &(x, y) in &v_edges {
        edges.push(Edge {
            id: v_id(x, y),
            u: pillow_vertex_id(x, y),
            v: pillow_vertex_id(x, y + 1),
            weight: RingElement::one(),
        });
    }
    // westward along the topmost, then leftmost, horizontal edge: the face
    // to the right of that dart is the unbounded one
    let top = h_edges
        .iter()
        .max_by_key(|&&(x, y)| (y, -x))
        .expect("cell region has edges");
    let outer = Some(Dart::new(h_id(top.0, top.1), pillow_vertex_id(top.0 + 1, top.1)));
    PlanarBipartiteGraph::new(vertices, edges, rotation, outer)
        .expect("cell region is a valid plane map")
}

pub fn aztec_pillow(spec: PillowSpec) -> PlanarBipartiteGraph {
    let g = cells_to_graph(&pillow_cells(spec.order));
    assert_eq!(
        g.black_count(),
        g.white_count(),
        "pillow generator produced unbalanced colors at order {}",
        spec.order
    );
    g
}

// ---------------------------------------------------------------------------
// divisibility scanners
// ---------------------------------------------------------------------------

fn divisibility_report(
    subject: String,
    small: &RingElement,
    big: &RingElement,
    reproducer: impl Fn() -> String,
) -> VerificationReport {
    let claim = "smaller region's count divides larger region's count";
    if small.is_zero() {
        return if big.is_zero() {
            VerificationReport::vacuous(subject, claim)
        } else {
            VerificationReport::fail(
                subject,
                claim,
                format!("divisor count is 0 but dividend is {big}"),
                reproducer(),
            )
        };
    }
    match big.exact_div(small) {
        Ok(q) => VerificationReport::pass_with(subject, claim, format!("quotient {q}")),
        Err(_) => VerificationReport::fail(
            subject,
            claim,
            format!("{big} is not a multiple of {small}"),
            reproducer(),
        ),
    }
}

/// For every (A, B) within bounds with a+1 | A+1 and b+1 | B+1, check that
/// the count of R(a,b) divides the count of R(A,B). Counts come from the
/// determinant; each is cross-checked against the product formula first,
/// evaluated at `bits` precision (escalating from the default when `None`).
pub fn rect_divisibility_scan(
    a: usize,
    b: usize,
    max_a: usize,
    max_b: usize,
    bits: Option<usize>,
) -> Vec<VerificationReport> {
    let mut reports = Vec::new();
    let base_spec = match RectangleSpec::new(a, b) {
        Ok(s) => s,
        Err(e) => {
            return vec![VerificationReport::fail(
                format!("R({a},{b})"),
                "scan parameters are a valid rectangle",
                e.to_string(),
                format!("scan-rect --a {a} --b {b}"),
            )];
        }
    };
    let small = count_matchings(&rectangle(base_spec, EdgeWeights::Unit));
    let check_formula = |m: usize, n: usize, count: &RingElement, reports: &mut Vec<_>| {
        let formula = product_formula_count_auto(m, n, bits);
        let ok = formula
            .as_ref()
            .map(|f| count.as_integer().as_ref() == Some(f))
            .unwrap_or(false);
        if !ok {
            reports.push(VerificationReport::fail(
                format!("R({m},{n})"),
                "determinant count equals product-formula count",
                format!("determinant {count}, formula {formula:?}"),
                format!("rect --m {m} --n {n}"),
            ));
        }
    };
    check_formula(a, b, &small, &mut reports);
    let mut big_a = a;
    while big_a <= max_a {
        let mut big_b = b;
        while big_b <= max_b {
            let big = count_matchings(&rectangle(
                RectangleSpec::new(big_a, big_b).expect("bounds checked"),
                EdgeWeights::Unit,
            ));
            check_formula(big_a, big_b, &big, &mut reports);
            reports.push(divisibility_report(
                format!("R({a},{b})|R({big_a},{big_b})"),
                &small,
                &big,
                || format!("scan-rect --a {a} --b {b} --max-A {big_a} --max-B {big_b}"),
            ));
            big_b += b + 1;
        }
        big_a += a + 1;
    }
    reports
}

/// For every m < n <= max_order with m+3 | n+3, check that the pillow count
/// of order m divides the pillow count of order n.
pub fn pillow_divisibility_scan(max_order: usize) -> Vec<VerificationReport> {
    let mut counts: BTreeMap<usize, RingElement> = BTreeMap::new();
    let mut count_of = |order: usize| -> RingElement {
        counts
            .entry(order)
            .or_insert_with(|| {
                count_matchings(&aztec_pillow(PillowSpec::new(order).expect("order >= 1")))
            })
            .clone()
    };
    let mut reports = Vec::new();
    for m in 1..=max_order {
        for n in (m + 1)..=max_order {
            if (n + 3) % (m + 3) != 0 {
                continue;
            }
            let small = count_of(m);
            let big = count_of(n);
            reports.push(divisibility_report(
                format!("AP_{m}|AP_{n}"),
                &small,
                &big,
                || format!("scan-pillow --max-order {n}"),
            ));
        }
    }
    reports
}

/// One outcome of decomposing a rectangle into blocks: the street dominoes
/// that were deleted and the compound graphs the surviving region splits
/// into, one per connected component of the block grid.
#[derive(Debug, Clone)]
pub struct DecompositionPiece {
    /// Deleted street dominoes, as pairs of (row, column) vertex positions.
    pub dominoes: Vec<((usize, usize), (usize, usize))>,
    /// Components of the surviving region, ordered by least block id.
    pub parts: Vec<CompoundGraph>,
}

impl DecompositionPiece {
    /// Matching count of the whole outcome: the product over its parts.
    pub fn count(&self) -> RingElement {
        self.parts
            .iter()
            .fold(RingElement::one(), |acc, part| {
                acc.mul(&count_matchings(part.graph()))
            })
    }
}

/// Where a surviving street vertex meets its flanking blocks: the two block
/// ids, the block-grid edge between them, and the placement on the base
/// block's outer walk (the same in both flanks, by the label maps).
struct RootAttach {
    flanks: [String; 2],
    street_edge: String,
    base_vertex: String,
    gap: usize,
    slot: usize,
}

struct RootSite {
    at: (usize, usize),
    black: bool,
    attach: Option<RootAttach>, // None exactly at street crossings
}

/// Locates outer-walk placements on the base block from base coordinates and
/// a compass direction (N = 90, E = 0, S = 270, W = 180; rows grow downward).
struct BasePlacer {
    walk: Vec<Dart>,
    visits: BTreeMap<String, Vec<usize>>,
    coords: BTreeMap<String, (usize, usize)>,
}

impl BasePlacer {
    fn new(base: &PlanarBipartiteGraph, a: usize, b: usize) -> BasePlacer {
        let (walk, visits) = outer_visits(base).expect("rectangle has an outer walk");
        let mut coords = BTreeMap::new();
        for i in 1..=a {
            for j in 1..=b {
                coords.insert(rectangle_vertex_id(i, j), (i, j));
            }
        }
        BasePlacer { walk, visits, coords }
    }

    fn angle(from: (usize, usize), to: (usize, usize)) -> i64 {
        if to.0 < from.0 {
            90
        } else if to.0 > from.0 {
            270
        } else if to.1 > from.1 {
            0
        } else {
            180
        }
    }

    /// The visit of `q` whose boundary sector contains direction `dir`, and
    /// the rank of `dir` counterclockwise from that visit's arrival edge.
    /// A visit's sector spans clockwise from its departure edge back to its
    /// arrival edge; one visit per vertex contains any given free direction.
    fn place(&self, g: &PlanarBipartiteGraph, q: (usize, usize), dir: i64) -> (usize, usize) {
        let qid = rectangle_vertex_id(q.0, q.1);
        let vis = &self.visits[&qid];
        for (gap, &pos) in vis.iter().enumerate() {
            let arrival = &self.walk[pos];
            let departure = &self.walk[(pos + 1) % self.walk.len()];
            let from = Self::angle(q, self.coords[&arrival.tail]);
            let to = Self::angle(q, self.coords[g.head(departure)]);
            let sweep = (to - from).rem_euclid(360);
            let steps = (to - dir).rem_euclid(360);
            let inside = if sweep == 0 { steps != 0 } else { steps > 0 && steps < sweep };
            if inside {
                let slot = ((dir - from).rem_euclid(360) / 90 - 1) as usize;
                return (gap, slot);
            }
        }
        panic!("no outer sector of {qid} faces {dir}");
    }
}

struct DecompGeometry {
    k: usize,
    l: usize,
    base: PlanarBipartiteGraph,
    blocks: PlanarBipartiteGraph, // R(k,l); block (I,J) is its vertex v{I}_{J}
    roots: Vec<RootSite>,
}

impl DecompGeometry {
    fn new(m: usize, n: usize, a: usize, b: usize) -> DecompGeometry {
        let k = (m + 1) / (a + 1);
        let l = (n + 1) / (b + 1);
        let base = rectangle(RectangleSpec { m: a, n: b }, EdgeWeights::Unit);
        let blocks = rectangle(RectangleSpec { m: k, n: l }, EdgeWeights::Unit);
        let placer = BasePlacer::new(&base, a, b);

        // Street vertices in row-major order. Blocks with even grid row index
        // are flipped upside down relative to the base, and even grid column
        // index flips left to right, so that vertices facing each other
        // across a street carry equal base labels; directions flip likewise.
        let mut roots = Vec::new();
        for r in 1..=m {
            for c in 1..=n {
                let on_row_street = r % (a + 1) == 0;
                let on_col_street = c % (b + 1) == 0;
                if !on_row_street && !on_col_street {
                    continue;
                }
                let attach = if on_row_street && on_col_street {
                    None
                } else if on_row_street {
                    let bi = r / (a + 1);
                    let bj = (c - 1) / (b + 1) + 1;
                    let c_loc = c - (bj - 1) * (b + 1);
                    let q = (
                        if bi % 2 == 1 { a } else { 1 },
                        if bj % 2 == 1 { c_loc } else { b + 1 - c_loc },
                    );
                    let dir = if bi % 2 == 1 { 270 } else { 90 };
                    let (gap, slot) = placer.place(&base, q, dir);
                    Some(RootAttach {
                        flanks: [
                            rectangle_vertex_id(bi, bj),
                            rectangle_vertex_id(bi + 1, bj),
                        ],
                        street_edge: rectangle_s_edge_id(bi, bj),
                        base_vertex: rectangle_vertex_id(q.0, q.1),
                        gap,
                        slot,
                    })
                } else {
                    let bj = c / (b + 1);
                    let bi = (r - 1) / (a + 1) + 1;
                    let r_loc = r - (bi - 1) * (a + 1);
                    let q = (
                        if bi % 2 == 1 { r_loc } else { a + 1 - r_loc },
                        if bj % 2 == 1 { b } else { 1 },
                    );
                    let dir = if bj % 2 == 1 { 0 } else { 180 };
                    let (gap, slot) = placer.place(&base, q, dir);
                    Some(RootAttach {
                        flanks: [
                            rectangle_vertex_id(bi, bj),
                            rectangle_vertex_id(bi, bj + 1),
                        ],
                        street_edge: rectangle_h_edge_id(bi, bj),
                        base_vertex: rectangle_vertex_id(q.0, q.1),
                        gap,
                        slot,
                    })
                };
                roots.push(RootSite { at: (r, c), black: (r + c) % 2 == 0, attach });
            }
        }
        DecompGeometry { k, l, base, blocks, roots }
    }

    fn resolve(&self, pairs: Vec<(usize, usize)>) -> CurrentS {
        let mut deleted = vec![false; self.roots.len()];
        for &(x, y) in &pairs {
            deleted[x] = true;
            deleted[y] = true;
        }
        let mut stems = Vec::new();
        let mut whites = Vec::new();
        for (i, site) in self.roots.iter().enumerate() {
            if deleted[i] {
                continue;
            }
            debug_assert!(site.attach.is_some(), "crossings are always covered");
            if site.black {
                stems.push(i);
            } else {
                whites.push(i);
            }
        }
        CurrentS { dominoes: pairs, stems, whites, next_mask: 0 }
    }

    /// Builds the piece for one direction choice, or None when some block
    /// component ends up with unequal stem and leaf counts: that component
    /// has odd order, the outcome has no matchings, and it is dropped.
    fn piece(&self, cur: &CurrentS, mask: u64) -> Option<DecompositionPiece> {
        let blocks = self.blocks.vertices();
        let block_index: BTreeMap<&str, usize> =
            blocks.iter().enumerate().map(|(i, v)| (v.id.as_str(), i)).collect();
        let mut parent: Vec<usize> = (0..blocks.len()).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut root = x;
            while parent[root] != root {
                root = parent[root];
            }
            let mut cur = x;
            while parent[cur] != root {
                let next = parent[cur];
                parent[cur] = root;
                cur = next;
            }
            root
        }

        let mut witnessed: BTreeSet<&str> = BTreeSet::new();
        for &i in &cur.stems {
            let at = self.roots[i].attach.as_ref().expect("survivor");
            witnessed.insert(at.street_edge.as_str());
            let (x, y) = (block_index[at.flanks[0].as_str()], block_index[at.flanks[1].as_str()]);
            let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
            parent[rx.max(ry)] = rx.min(ry);
        }

        let mut components: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..blocks.len() {
            let rep = find(&mut parent, i);
            components.entry(rep).or_default().push(i);
        }

        let mut comp_stems: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &i in &cur.stems {
            let at = self.roots[i].attach.as_ref().expect("survivor");
            let rep = find(&mut parent, block_index[at.flanks[0].as_str()]);
            comp_stems.entry(rep).or_default().push(i);
        }
        let mut comp_leaves: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for (pos, &i) in cur.whites.iter().enumerate() {
            let at = self.roots[i].attach.as_ref().expect("survivor");
            let side = ((mask >> pos) & 1) as usize;
            let rep = find(&mut parent, block_index[at.flanks[side].as_str()]);
            comp_leaves.entry(rep).or_default().push((i, side));
        }
        for &rep in components.keys() {
            let s = comp_stems.get(&rep).map_or(0, Vec::len);
            let f = comp_leaves.get(&rep).map_or(0, Vec::len);
            if s != f {
                return None;
            }
        }

        let mut parts = Vec::new();
        for (&rep, members) in &components {
            let ids: BTreeSet<&str> = members.iter().map(|&i| blocks[i].id.as_str()).collect();
            let vertices: Vec<Vertex> =
                members.iter().map(|&i| blocks[i].clone()).collect();
            let edges: Vec<Edge> = self
                .blocks
                .edges()
                .iter()
                .filter(|e| witnessed.contains(e.id.as_str()) && ids.contains(e.u.as_str()))
                .cloned()
                .collect();
            let kept: BTreeSet<&str> = edges.iter().map(|e| e.id.as_str()).collect();
            let mut rotation = BTreeMap::new();
            for v in &vertices {
                let order: Vec<String> = self
                    .blocks
                    .rotation(&v.id)
                    .iter()
                    .filter(|e| kept.contains(e.as_str()))
                    .cloned()
                    .collect();
                if !order.is_empty() {
                    rotation.insert(v.id.clone(), order);
                }
            }
            // with blocks cut out of the plane grid, any face may play outer
            let outer = edges
                .first()
                .map(|e| Dart::new(e.id.clone(), e.u.clone().min(e.v.clone())));
            let supergraph = PlanarBipartiteGraph::new(vertices, edges, rotation, outer)
                .expect("block grid subgraphs embed");

            let mut script = CompoundScript::default();
            for &i in comp_stems.get(&rep).map_or(&[][..], Vec::as_slice) {
                let at = self.roots[i].attach.as_ref().expect("survivor");
                script.stems.push(StemSpec {
                    super_edge: at.street_edge.clone(),
                    base_vertex: at.base_vertex.clone(),
                    gap: at.gap,
                    slot: at.slot,
                });
            }
            for &(i, side) in comp_leaves.get(&rep).map_or(&[][..], Vec::as_slice) {
                let at = self.roots[i].attach.as_ref().expect("survivor");
                script.leaves.push(LeafSpec {
                    super_vertex: at.flanks[side].clone(),
                    base_vertex: at.base_vertex.clone(),
                    gap: at.gap,
                    slot: at.slot,
                });
            }
            parts.push(
                build_compound(&self.base, &supergraph, &script)
                    .expect("street placements are consistent"),
            );
        }
        let dominoes = cur
            .dominoes
            .iter()
            .map(|&(x, y)| (self.roots[x].at, self.roots[y].at))
            .collect();
        Some(DecompositionPiece { dominoes, parts })
    }
}

struct CurrentS {
    dominoes: Vec<(usize, usize)>,
    stems: Vec<usize>,
    whites: Vec<usize>,
    next_mask: u64,
}

/// Lazy enumeration of the matchings of the street graph that cover every
/// crossing. Vertices are decided in index order: each undecided vertex is
/// left unmatched (never allowed for crossings) or matched to a higher-index
/// unused neighbor; lower-index neighbors were already decided.
struct MatchingEnum {
    adj_gt: Vec<Vec<usize>>,
    must: Vec<bool>,
    used: Vec<bool>,
    frames: Vec<Frame>,
    state: EnumState,
}

struct Frame {
    v: usize,
    choice: usize, // 0 = unmatched, i > 0 = matched to adj_gt[v][i-1]
}

enum EnumState {
    Fresh,
    Backtracking,
    Done,
}

impl MatchingEnum {
    fn new(adj_gt: Vec<Vec<usize>>, must: Vec<bool>) -> MatchingEnum {
        let n = must.len();
        MatchingEnum { adj_gt, must, used: vec![false; n], frames: Vec::new(), state: EnumState::Fresh }
    }

    fn first_choice(&self, v: usize, from: usize) -> Option<usize> {
        let mut c = from;
        loop {
            if c == 0 {
                if !self.must[v] {
                    return Some(0);
                }
            } else {
                match self.adj_gt[v].get(c - 1) {
                    Some(&u) if !self.used[u] => return Some(c),
                    Some(_) => {}
                    None => return None,
                }
            }
            c += 1;
        }
    }

    fn apply(&mut self, v: usize, choice: usize) {
        if choice > 0 {
            let u = self.adj_gt[v][choice - 1];
            self.used[v] = true;
            self.used[u] = true;
        }
        self.frames.push(Frame { v, choice });
    }

    fn unapply(&mut self, f: &Frame) {
        if f.choice > 0 {
            let u = self.adj_gt[f.v][f.choice - 1];
            self.used[f.v] = false;
            self.used[u] = false;
        }
    }

    /// Extends the current partial assignment over all remaining vertices
    /// with first admissible choices; false on reaching an uncoverable
    /// crossing, leaving the partial frames for the caller to backtrack.
    fn extend(&mut self) -> bool {
        let mut v = self.frames.last().map_or(0, |f| f.v + 1);
        loop {
            while v < self.must.len() && self.used[v] {
                v += 1;
            }
            if v >= self.must.len() {
                return true;
            }
            match self.first_choice(v, 0) {
                Some(c) => {
                    self.apply(v, c);
                    v += 1;
                }
                None => return false,
            }
        }
    }

    fn next_matching(&mut self) -> Option<Vec<(usize, usize)>> {
        let mut advancing = match self.state {
            EnumState::Fresh => true,
            EnumState::Backtracking => false,
            EnumState::Done => return None,
        };
        self.state = EnumState::Backtracking;
        loop {
            if advancing {
                if self.extend() {
                    let pairs = self
                        .frames
                        .iter()
                        .filter(|f| f.choice > 0)
                        .map(|f| (f.v, self.adj_gt[f.v][f.choice - 1]))
                        .collect();
                    return Some(pairs);
                }
                advancing = false;
            }
            let Some(f) = self.frames.pop() else {
                self.state = EnumState::Done;
                return None;
            };
            self.unapply(&f);
            if let Some(c) = self.first_choice(f.v, f.choice + 1) {
                self.apply(f.v, c);
                advancing = true;
            }
        }
    }
}

/// Lazy stream of decomposition outcomes; see [`decompose_rectangle`].
pub struct RectangleDecomposition {
    geom: DecompGeometry,
    s_enum: MatchingEnum,
    current: Option<CurrentS>,
}

impl RectangleDecomposition {
    /// Block grid dimensions: (rows of blocks, columns of blocks).
    pub fn grid(&self) -> (usize, usize) {
        (self.geom.k, self.geom.l)
    }

    /// The base block shared by every part of every piece.
    pub fn base(&self) -> &PlanarBipartiteGraph {
        &self.geom.base
    }
}

impl Iterator for RectangleDecomposition {
    type Item = DecompositionPiece;

    fn next(&mut self) -> Option<DecompositionPiece> {
        loop {
            if self.current.is_none() {
                let pairs = self.s_enum.next_matching()?;
                self.current = Some(self.geom.resolve(pairs));
            }
            let cur = self.current.as_mut().expect("set above");
            if (cur.next_mask >> cur.whites.len()) != 0 {
                self.current = None;
                continue;
            }
            let mask = cur.next_mask;
            cur.next_mask += 1;
            let cur = self.current.as_ref().expect("still set");
            if let Some(piece) = self.geom.piece(cur, mask) {
                return Some(piece);
            }
        }
    }
}

/// Cuts R(m,n) into a grid of R(a,b) blocks separated by one-vertex streets
/// and enumerates every way to resolve the street vertices: a set of disjoint
/// street dominoes covering both endpoints at every street crossing is
/// deleted, each surviving black street vertex becomes a stem joining its two
/// flanking blocks, and each surviving white street vertex becomes a leaf on
/// one flanking block, with both choices enumerated. Summing [`DecompositionPiece::count`]
/// over the stream recovers the matching count of R(m,n), and every emitted
/// part puts an odd number of leaves on each inner face of its street plan.
///
/// Direction choices that strand unequal numbers of stems and leaves in some
/// block component are omitted: such a component has odd order, so the whole
/// outcome has no matchings and contributes nothing to the sum.
///
/// Requires (a+1) | (m+1), (b+1) | (n+1), and m*n even.
pub fn decompose_rectangle(
    m: usize,
    n: usize,
    a: usize,
    b: usize,
) -> Result<RectangleDecomposition, RegionError> {
    RectangleSpec::new(a, b)?;
    RectangleSpec::new(m, n)?;
    if (m + 1) % (a + 1) != 0 || (n + 1) % (b + 1) != 0 {
        return Err(RegionError::DivisibilityPreconditionViolated(format!(
            "R({a},{b}) blocks tile R({m},{n}) only if {} divides {} and {} divides {}",
            a + 1,
            m + 1,
            b + 1,
            n + 1,
        )));
    }
    if (m * n) % 2 != 0 {
        return Err(RegionError::DivisibilityPreconditionViolated(format!(
            "R({m},{n}) has odd area, so there are no matchings to decompose",
        )));
    }
    let geom = DecompGeometry::new(m, n, a, b);
    let index: BTreeMap<(usize, usize), usize> =
        geom.roots.iter().enumerate().map(|(i, s)| (s.at, i)).collect();
    let mut adj_gt = vec![Vec::new(); geom.roots.len()];
    for (i, site) in geom.roots.iter().enumerate() {
        let (r, c) = site.at;
        for nb in [(r, c + 1), (r + 1, c)] {
            if let Some(&j) = index.get(&nb) {
                adj_gt[i].push(j);
            }
        }
    }
    let whites = geom.roots.iter().filter(|s| !s.black && s.attach.is_some()).count();
    if whites >= u64::BITS as usize {
        return Err(RegionError::BadSpec(format!(
            "{whites} free white street vertices is too many direction choices to enumerate"
        )));
    }
    let must: Vec<bool> = geom.roots.iter().map(|s| s.attach.is_none()).collect();
    let s_enum = MatchingEnum::new(adj_gt, must);
    Ok(RectangleDecomposition { geom, s_enum, current: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::oracle_count;

    #[test]
    fn small_rectangles_count_right() {
        let r = |m, n| {
            count_matchings(&rectangle(
                RectangleSpec::new(m, n).unwrap(),
                EdgeWeights::Unit,
            ))
        };
        assert_eq!(r(1, 2), RingElement::one());
        assert_eq!(r(3, 4), RingElement::from_int(11));
        assert_eq!(r(5, 5), RingElement::zero());
    }

    #[test]
    fn variable_weights_match_oracle() {
        let g = rectangle(RectangleSpec::new(2, 3).unwrap(), EdgeWeights::Variables);
        assert_eq!(count_matchings(&g), oracle_count(&g).unwrap());
        assert_eq!(count_matchings(&g).term_count(), 3);
    }

    #[test]
    fn two_row_counts_follow_fibonacci() {
        let mut fib = (BigInt::from(1), BigInt::from(2));
        for n in 1..=20 {
            let g = rectangle(RectangleSpec::new(2, n).unwrap(), EdgeWeights::Unit);
            let got = count_matchings(&g).as_integer().unwrap();
            assert_eq!(got, fib.0, "R(2,{n})");
            fib = (fib.1.clone(), fib.0 + fib.1);
        }
    }

    #[test]
    fn formula_matches_known_counts() {
        assert_eq!(product_formula_count(2, 2, 128).unwrap(), BigInt::from(2));
        assert_eq!(product_formula_count(2, 5, 128).unwrap(), BigInt::from(8));
        assert_eq!(product_formula_count(4, 4, 128).unwrap(), BigInt::from(36));
        assert_eq!(product_formula_count(3, 5, 128).unwrap(), BigInt::zero());
    }

    #[test]
    fn formula_matches_determinant_to_six() {
        for m in 1..=6 {
            for n in 1..=6 {
                let det = count_matchings(&rectangle(
                    RectangleSpec::new(m, n).unwrap(),
                    EdgeWeights::Unit,
                ))
                .as_integer()
                .unwrap();
                let formula = product_formula_count_auto(m, n, None).unwrap();
                assert_eq!(det, formula, "R({m},{n})");
            }
        }
    }

    #[test]
    fn starved_precision_fails_loudly_then_recovers() {
        // 64 bits is the floor; at that floor a large instance still rounds
        // fine, so force failure via the residual by shrinking further is
        // not possible. Instead check the ladder accepts a tight start.
        let from_low = product_formula_count_auto(8, 8, Some(64)).unwrap();
        assert_eq!(from_low, BigInt::from(12988816));
    }

    #[test]
    fn pillow_small_orders() {
        let ap1 = aztec_pillow(PillowSpec::new(1).unwrap());
        assert_eq!(ap1.vertices().len(), 4);
        assert_eq!(count_matchings(&ap1), RingElement::from_int(2));
        let ap2 = aztec_pillow(PillowSpec::new(2).unwrap());
        assert_eq!(count_matchings(&ap2), RingElement::from_int(5));
        for order in 3..=5 {
            let g = aztec_pillow(PillowSpec::new(order).unwrap());
            assert_eq!(
                count_matchings(&g),
                oracle_count(&g).unwrap(),
                "order {order}"
            );
        }
    }

    #[test]
    fn pillow_colors_balance() {
        for order in 1..=10 {
            let g = aztec_pillow(PillowSpec::new(order).unwrap());
            assert_eq!(g.black_count(), g.white_count(), "order {order}");
        }
    }

    /// The order-9 pillow must contain exactly the lattice points on or
    /// inside this 52-corner rectilinear outline.
    #[test]
    fn order_nine_matches_the_reference_outline() {
        const OUTLINE: [(i64, i64); 52] = [
            (0, 0), (0, 1), (1, 1), (2, 1), (3, 1), (3, 2), (4, 2), (5, 2), (6, 2), (6, 3),
            (7, 3), (8, 3), (9, 3), (9, 4), (10, 4), (11, 4), (12, 4), (12, 5), (13, 5),
            (13, 4), (14, 4), (14, 3), (15, 3), (15, 2), (16, 2), (16, 1), (17, 1), (17, 0),
            (16, 0), (15, 0), (14, 0), (14, -1), (13, -1), (12, -1), (11, -1), (11, -2),
            (10, -2), (9, -2), (8, -2), (8, -3), (7, -3), (6, -3), (5, -3), (5, -4), (4, -4),
            (4, -3), (3, -3), (3, -2), (2, -2), (2, -1), (1, -1), (1, 0),
        ];
        let on_boundary = |px: i64, py: i64| {
            OUTLINE.iter().enumerate().any(|(i, &(x0, y0))| {
                let (x1, y1) = OUTLINE[(i + 1) % OUTLINE.len()];
                if x0 == x1 {
                    px == x0 && (y0.min(y1)..=y0.max(y1)).contains(&py)
                } else {
                    py == y0 && (x0.min(x1)..=x0.max(x1)).contains(&px)
                }
            })
        };
        let strictly_inside = |px: i64, py: i64| {
            // ray east, counting vertical segments crossed (half-open in y)
            let crossings = OUTLINE
                .iter()
                .enumerate()
                .filter(|&(i, &(x0, y0))| {
                    let (x1, y1) = OUTLINE[(i + 1) % OUTLINE.len()];
                    x0 == x1 && x0 > px && (y0.min(y1) <= py && py < y0.max(y1))
                })
                .count();
            crossings % 2 == 1
        };
        let mut expected = BTreeSet::new();
        for x in -1..=18 {
            for y in -5..=6 {
                if on_boundary(x, y) || strictly_inside(x, y) {
                    expected.insert(pillow_vertex_id(x, y));
                }
            }
        }
        let g = aztec_pillow(PillowSpec::new(9).unwrap());
        let got: BTreeSet<String> = g.vertices().iter().map(|v| v.id.clone()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn pillow_has_rotation_symmetry() {
        // cells map to cells under (x, y) -> (w - x, -y)
        for order in [3, 6, 9] {
            let cells = pillow_cells(order);
            let w = 2 * order as i64 - 2;
            for &(x, y) in &cells {
                assert!(cells.contains(&(w - x, -y)), "order {order} cell ({x},{y})");
            }
        }
    }

    #[test]
    fn rect_scan_passes_at_desk_scale() {
        let reports = rect_divisibility_scan(2, 2, 5, 5, None);
        assert!(reports.iter().all(|r| r.passed()));
        let quotients: Vec<&str> = reports
            .iter()
            .filter(|r| r.subject.contains('|'))
            .map(|r| r.witness.as_deref().unwrap_or("-"))
            .collect();
        assert!(quotients.contains(&"quotient 4")); // 8 / 2 for R(2,5)
    }

    #[test]
    fn odd_rectangle_divisor_goes_vacuous() {
        let reports = rect_divisibility_scan(1, 1, 3, 3, None);
        assert!(reports.iter().all(|r| r.passed()));
        assert!(reports
            .iter()
            .any(|r| r.status == crate::report::Status::Vacuous));
    }

    #[test]
    fn pillow_scan_small() {
        let reports = pillow_divisibility_scan(5);
        // only the (1, 5) pair is admissible up to order 5
        assert_eq!(reports.len(), 1);
        assert!(reports[0].passed());
        assert!(reports[0].subject.contains("AP_1|AP_5"));
    }

    #[test]
    fn decompose_rejects_bad_parameters() {
        // 2+1 = 3 does not divide 4+1
        assert!(matches!(
            decompose_rectangle(4, 4, 2, 2),
            Err(RegionError::DivisibilityPreconditionViolated(_))
        ));
        // blocks tile, but the area is odd
        assert!(matches!(
            decompose_rectangle(3, 3, 1, 1),
            Err(RegionError::DivisibilityPreconditionViolated(_))
        ));
        assert!(matches!(
            decompose_rectangle(2, 2, 1, 1),
            Err(RegionError::DivisibilityPreconditionViolated(_))
        ));
        assert!(matches!(decompose_rectangle(0, 2, 1, 1), Err(RegionError::BadSpec(_))));
    }

    #[test]
    fn single_block_decomposition_is_the_rectangle_itself() {
        let pieces: Vec<DecompositionPiece> =
            decompose_rectangle(3, 4, 3, 4).unwrap().collect();
        assert_eq!(pieces.len(), 1);
        assert!(pieces[0].dominoes.is_empty());
        assert_eq!(pieces[0].parts.len(), 1);
        let direct = count_matchings(&rectangle(
            RectangleSpec::new(3, 4).unwrap(),
            EdgeWeights::Unit,
        ));
        assert_eq!(pieces[0].count(), direct);
    }

    #[test]
    fn decomposition_counts_sum_to_the_rectangle_count() {
        // l = 1, l = 1 with a wider street row, and k = 3, l = 2 with two
        // crossings and single-vertex street segments
        for &(m, n, a, b) in &[(3, 2, 1, 2), (5, 2, 2, 2), (5, 4, 2, 4), (8, 3, 2, 1)] {
            let total = decompose_rectangle(m, n, a, b)
                .unwrap()
                .fold(RingElement::zero(), |acc, piece| acc.add(&piece.count()));
            let direct = count_matchings(&rectangle(
                RectangleSpec::new(m, n).unwrap(),
                EdgeWeights::Unit,
            ));
            assert_eq!(total, direct, "R({m},{n}) into R({a},{b}) blocks");
        }
    }

    #[test]
    fn decomposition_pieces_validate_and_keep_leaf_counts_odd() {
        let mut pieces = 0;
        let mut multi_part = 0;
        for piece in decompose_rectangle(3, 2, 1, 2).unwrap() {
            pieces += 1;
            multi_part += usize::from(piece.parts.len() > 1);
            for part in &piece.parts {
                part.validate().unwrap();
                assert!(crate::compound::check_odd_leaves(part).unwrap());
            }
        }
        // two direction choices for the empty domino set, plus the piece
        // whose single domino empties the street and splits the block grid
        assert_eq!(pieces, 3);
        assert_eq!(multi_part, 1);
    }

    #[test]
    fn decomposition_scales_to_wide_block_grids() {
        // a 3-by-3 block grid of R(5,4) blocks with four street crossings;
        // check structure on the first few pieces only
        let mut stream = decompose_rectangle(17, 14, 5, 4).unwrap();
        assert_eq!(stream.grid(), (3, 3));
        for piece in stream.by_ref().take(3) {
            assert!(!piece.parts.is_empty());
            for part in &piece.parts {
                part.validate().unwrap();
                assert!(crate::compound::check_odd_leaves(part).unwrap());
            }
            for crossing in [(6, 5), (6, 10), (12, 5), (12, 10)] {
                assert!(piece
                    .dominoes
                    .iter()
                    .any(|&(p, q)| p == crossing || q == crossing));
            }
        }
    }
}
