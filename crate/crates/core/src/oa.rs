//! The point-line orthogonal array OA(q+1, q) of the affine plane AG(2, q),
//! the subarray that models a given Peisert-type graph, and the maps between
//! the two pictures.
//!
//! `F_{q²}` is identified with `AG(2, q)` through `(x, y) ↦ x + y·α` for an
//! `α ∉ F_q`. Symbols (elements of `F_q`) are numbered by their rank in label
//! order, so symbol 0 is the zero element. Column `x·q + y` is the point
//! `(x, y)`. Rows are the field slopes in symbol order followed by ∞.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{CosetIndex, FieldCtx, FieldElement, FieldError};
use crate::graph::{Clique, Coloring, Graph};
use crate::peisert::{default_alpha, PeisertGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OaError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("alpha = {0} lies in the subfield F_q")]
    AlphaInSubfield(FieldElement),
    #[error("alpha = {0} lies in the connection set")]
    AlphaInConnectionSet(FieldElement),
    #[error("rows {r1} and {r2} repeat the symbol pair ({s1}, {s2})")]
    OAVerificationFailed { r1: usize, r2: usize, s1: u32, s2: u32 },
    #[error("array shape is inconsistent: {0}")]
    Shape(String),
    #[error("no coset is free of the connection set")]
    NoFreeCoset,
    #[error("coset {coset} has u = 0 in its plane coordinates")]
    VerticalRepresentative { coset: CosetIndex },
    #[error("cosets {a} and {b} map to the same slope")]
    DuplicateSlope { a: CosetIndex, b: CosetIndex },
    #[error("vertex map is not a bijection")]
    NotBijective,
    #[error("adjacency differs under f at columns ({0}, {1})")]
    NotIsomorphicUnderF(usize, usize),
    #[error("canonical clique of coset {coset} with intercept {intercept} has no matching line")]
    CorrespondenceFailed { coset: CosetIndex, intercept: u32 },
    #[error("every slope is used; no free row to colour with")]
    NoUnusedSlope,
    #[error("selection was built for different coset indices")]
    SelectionMismatch,
    #[error("CSV line {line}: {msg}")]
    Csv { line: usize, msg: String },
}

/// The subfield `F_q ⊂ F_{q²}` with its symbol numbering.
#[derive(Debug, Clone)]
pub struct Subfield {
    elements: Vec<FieldElement>,
    symbol_of: Vec<u32>,
}

impl Subfield {
    pub fn new(ctx: &FieldCtx) -> Result<Self, FieldError> {
        let elements = ctx.subfield_elements()?;
        let mut symbol_of = vec![u32::MAX; ctx.order() as usize];
        for (i, e) in elements.iter().enumerate() {
            symbol_of[e.0 as usize] = i as u32;
        }
        Ok(Subfield { elements, symbol_of })
    }

    pub fn q(&self) -> u32 {
        self.elements.len() as u32
    }

    pub fn element(&self, symbol: u32) -> FieldElement {
        self.elements[symbol as usize]
    }

    pub fn symbol(&self, x: FieldElement) -> Option<u32> {
        self.symbol_of.get(x.0 as usize).copied().filter(|&s| s != u32::MAX)
    }

    pub fn contains(&self, x: FieldElement) -> bool {
        self.symbol(x).is_some()
    }

    pub fn elements(&self) -> &[FieldElement] {
        &self.elements
    }
}

/// Coordinates of `F_{q²}` over `F_q` with respect to the basis `{1, α}`.
#[derive(Debug, Clone)]
pub struct Plane {
    alpha: FieldElement,
    subfield: Subfield,
    /// Point `(x, y)` as symbols, per element label.
    point_of: Vec<(u32, u32)>,
    /// Element label per column `x·q + y`.
    element_of: Vec<u32>,
}

impl Plane {
    pub fn new(ctx: &FieldCtx, alpha: FieldElement) -> Result<Self, OaError> {
        let subfield = Subfield::new(ctx)?;
        if subfield.contains(alpha) {
            return Err(OaError::AlphaInSubfield(alpha));
        }
        let q = subfield.q();
        let n = ctx.order() as usize;
        let mut point_of = vec![(u32::MAX, u32::MAX); n];
        let mut element_of = Vec::with_capacity(n);
        for xs in 0..q {
            for ys in 0..q {
                let z = ctx.add(subfield.element(xs), ctx.mul(subfield.element(ys), alpha));
                debug_assert_eq!(point_of[z.0 as usize].0, u32::MAX, "{{1, α}} is a basis");
                point_of[z.0 as usize] = (xs, ys);
                element_of.push(z.0);
            }
        }
        Ok(Plane { alpha, subfield, point_of, element_of })
    }

    pub fn alpha(&self) -> FieldElement {
        self.alpha
    }

    pub fn subfield(&self) -> &Subfield {
        &self.subfield
    }

    pub fn q(&self) -> u32 {
        self.subfield.q()
    }

    /// `(x, y)` symbols with `z = x + y·α`.
    pub fn point(&self, z: FieldElement) -> (u32, u32) {
        self.point_of[z.0 as usize]
    }

    pub fn column(&self, z: FieldElement) -> usize {
        let (x, y) = self.point(z);
        (x * self.q() + y) as usize
    }

    /// The vertex map `f`: column `(x, y)` to the element `x + y·α`.
    pub fn element(&self, column: usize) -> FieldElement {
        FieldElement(self.element_of[column])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RowLabel {
    /// A slope, given as a symbol of `F_q`.
    Slope(u32),
    Infinity,
}

impl fmt::Display for RowLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowLabel::Slope(s) => write!(f, "{s}"),
            RowLabel::Infinity => f.write_str("inf"),
        }
    }
}

/// An `m × n²` array over symbols `[0, n)`, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthogonalArray {
    n: usize,
    row_labels: Vec<RowLabel>,
    column_labels: Vec<(u32, u32)>,
    entries: Vec<u32>,
}

impl OrthogonalArray {
    pub fn new(
        n: usize,
        row_labels: Vec<RowLabel>,
        column_labels: Vec<(u32, u32)>,
        entries: Vec<u32>,
    ) -> Result<Self, OaError> {
        let cols = n * n;
        if column_labels.len() != cols || entries.len() != row_labels.len() * cols {
            return Err(OaError::Shape(format!(
                "{} rows, {} column labels and {} entries for n = {n}",
                row_labels.len(),
                column_labels.len(),
                entries.len()
            )));
        }
        if let Some(&s) = entries.iter().find(|&&s| s as usize >= n) {
            return Err(OaError::Shape(format!("symbol {s} out of range for n = {n}")));
        }
        Ok(OrthogonalArray { n, row_labels, column_labels, entries })
    }

    pub fn m(&self) -> usize {
        self.row_labels.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn columns(&self) -> usize {
        self.n * self.n
    }

    pub fn row_labels(&self) -> &[RowLabel] {
        &self.row_labels
    }

    pub fn column_labels(&self) -> &[(u32, u32)] {
        &self.column_labels
    }

    pub fn row(&self, r: usize) -> &[u32] {
        let c = self.columns();
        &self.entries[r * c..(r + 1) * c]
    }

    pub fn entry(&self, r: usize, col: usize) -> u32 {
        self.entries[r * self.columns() + col]
    }

    pub fn row_index(&self, label: RowLabel) -> Option<usize> {
        self.row_labels.iter().position(|&l| l == label)
    }

    /// Checks that every pair of rows shows every symbol pair exactly once.
    pub fn verify(&self) -> Result<(), OaError> {
        let n = self.n;
        for r1 in 0..self.m() {
            for r2 in r1 + 1..self.m() {
                let mut seen = vec![false; n * n];
                for (&a, &b) in self.row(r1).iter().zip(self.row(r2)) {
                    let slot = a as usize * n + b as usize;
                    if seen[slot] {
                        return Err(OaError::OAVerificationFailed { r1, r2, s1: a, s2: b });
                    }
                    seen[slot] = true;
                }
            }
        }
        Ok(())
    }

    /// The rows with the given indices, in the given order, over the same columns.
    pub fn subarray(&self, rows: &[usize]) -> Result<OrthogonalArray, OaError> {
        if let Some(&r) = rows.iter().find(|&&r| r >= self.m()) {
            return Err(OaError::Shape(format!("row {r} out of range")));
        }
        let entries = rows.iter().flat_map(|&r| self.row(r).iter().copied()).collect();
        let labels = rows.iter().map(|&r| self.row_labels[r]).collect();
        let sub = OrthogonalArray::new(self.n, labels, self.column_labels.clone(), entries)?;
        sub.verify()?;
        Ok(sub)
    }

    /// Columns with symbol `s` in row `r`.
    pub fn canonical_class(&self, r: usize, s: u32) -> Vec<usize> {
        self.row(r).iter().enumerate().filter(|(_, &e)| e == s).map(|(c, _)| c).collect()
    }

    /// CSV with header `slope,<column labels>` and one line per row.
    /// Column labels are `x:y` symbol pairs.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("slope");
        for (x, y) in &self.column_labels {
            out.push_str(&format!(",{x}:{y}"));
        }
        out.push('\n');
        for r in 0..self.m() {
            out.push_str(&self.row_labels[r].to_string());
            for e in self.row(r) {
                out.push_str(&format!(",{e}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<OrthogonalArray, OaError> {
        let err = |line: usize, msg: String| OaError::Csv { line: line + 1, msg };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hl, header) = lines.next().ok_or_else(|| err(0, "empty input".into()))?;
        let mut fields = header.split(',');
        if fields.next().map(str::trim) != Some("slope") {
            return Err(err(hl, "header must start with `slope`".into()));
        }
        let column_labels = fields
            .map(|f| {
                let (x, y) = f.trim().split_once(':').ok_or_else(|| err(hl, format!("bad column label {f:?}")))?;
                Ok((
                    x.parse().map_err(|_| err(hl, format!("bad column label {f:?}")))?,
                    y.parse().map_err(|_| err(hl, format!("bad column label {f:?}")))?,
                ))
            })
            .collect::<Result<Vec<(u32, u32)>, OaError>>()?;
        let cols = column_labels.len();
        let n = (cols as f64).sqrt().round() as usize;
        if n * n != cols {
            return Err(err(hl, format!("{cols} columns is not a perfect square")));
        }
        let mut row_labels = Vec::new();
        let mut entries = Vec::new();
        for (i, line) in lines {
            let mut fields = line.split(',');
            let label = fields.next().unwrap_or("").trim();
            row_labels.push(match label {
                "inf" => RowLabel::Infinity,
                s => RowLabel::Slope(s.parse().map_err(|_| err(i, format!("bad slope {s:?}")))?),
            });
            let before = entries.len();
            for f in fields {
                entries.push(f.trim().parse().map_err(|_| err(i, format!("bad entry {f:?}")))?);
            }
            if entries.len() - before != cols {
                return Err(err(i, format!("expected {cols} entries")));
            }
        }
        OrthogonalArray::new(n, row_labels, column_labels, entries)
    }
}

/// Builds OA(q+1, q): the row for slope `k` holds `y − kx` at column `(x, y)`,
/// the row ∞ holds `x`.
pub fn build_pointline_oa(ctx: &FieldCtx, alpha: FieldElement) -> Result<OrthogonalArray, OaError> {
    let plane = Plane::new(ctx, alpha)?;
    pointline_oa_on(ctx, &plane)
}

fn pointline_oa_on(ctx: &FieldCtx, plane: &Plane) -> Result<OrthogonalArray, OaError> {
    let sub = plane.subfield();
    let q = sub.q() as usize;
    let column_labels: Vec<(u32, u32)> =
        (0..q as u32).flat_map(|x| (0..q as u32).map(move |y| (x, y))).collect();
    let mut entries = Vec::with_capacity((q + 1) * q * q);
    let mut row_labels = Vec::with_capacity(q + 1);
    for k in 0..q as u32 {
        row_labels.push(RowLabel::Slope(k));
        let ke = sub.element(k);
        for &(x, y) in &column_labels {
            let v = ctx.sub(sub.element(y), ctx.mul(ke, sub.element(x)));
            entries.push(sub.symbol(v).expect("F_q is closed under field operations"));
        }
    }
    row_labels.push(RowLabel::Infinity);
    entries.extend(column_labels.iter().map(|&(x, _)| x));
    let oa = OrthogonalArray::new(q, row_labels, column_labels, entries)?;
    oa.verify()?;
    Ok(oa)
}

/// Canonical cliques `S_{r,i}` of a block graph, one per (row, symbol).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalClass {
    pub row: usize,
    pub symbol: u32,
    pub columns: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct BlockGraph {
    pub graph: Graph,
    pub canonical: Vec<CanonicalClass>,
}

/// Columns are adjacent when they agree in some row.
pub fn block_graph(oa: &OrthogonalArray) -> BlockGraph {
    let cols = oa.columns();
    let graph = Graph::from_fn(cols, |a, b| (0..oa.m()).any(|r| oa.entry(r, a) == oa.entry(r, b)));
    let canonical = (0..oa.m())
        .flat_map(|r| {
            (0..oa.n() as u32).map(move |s| CanonicalClass { row: r, symbol: s, columns: oa.canonical_class(r, s) })
        })
        .collect();
    BlockGraph { graph, canonical }
}

/// Slope assigned to one coset of the connection set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetSlope {
    pub coset: CosetIndex,
    /// Plane coordinates `(u, v)` of the representative `g^coset`, as symbols.
    pub u: u32,
    pub v: u32,
    /// `v / u` as a symbol.
    pub slope: u32,
    /// Row of the slope in the full array.
    pub row: usize,
}

/// The rows of OA(q+1, q) that model a Peisert-type connection set.
#[derive(Debug, Clone)]
pub struct SubarraySelection {
    ctx: Arc<FieldCtx>,
    plane: Plane,
    parent: OrthogonalArray,
    slopes: Vec<CosetSlope>,
    subarray: OrthogonalArray,
}

impl SubarraySelection {
    /// Chooses `α` by [`default_alpha`], builds the full array and maps each
    /// coset representative `g^i = u + v·α` to the slope `v/u`.
    pub fn new(ctx: Arc<FieldCtx>, indices: &[CosetIndex]) -> Result<Self, OaError> {
        let alpha = default_alpha(&ctx, indices)?.ok_or(OaError::NoFreeCoset)?;
        Self::with_alpha(ctx, indices, alpha)
    }

    pub fn with_alpha(ctx: Arc<FieldCtx>, indices: &[CosetIndex], alpha: FieldElement) -> Result<Self, OaError> {
        let plane = Plane::new(&ctx, alpha)?;
        if indices.contains(&ctx.coset_index(alpha)?) {
            return Err(OaError::AlphaInConnectionSet(alpha));
        }
        let parent = pointline_oa_on(&ctx, &plane)?;
        let sub = plane.subfield();
        let mut indices: Vec<CosetIndex> = indices.to_vec();
        indices.sort();
        indices.dedup();
        let mut slopes: Vec<CosetSlope> = Vec::with_capacity(indices.len());
        let mut by_slope: BTreeMap<u32, CosetIndex> = BTreeMap::new();
        for &coset in &indices {
            let rep = ctx.exp(coset.0 as u64);
            let (u, v) = plane.point(rep);
            if u == 0 {
                return Err(OaError::VerticalRepresentative { coset });
            }
            let slope_elem = ctx.div(sub.element(v), sub.element(u))?;
            let slope = sub.symbol(slope_elem).expect("quotient of subfield elements");
            if let Some(&a) = by_slope.get(&slope) {
                return Err(OaError::DuplicateSlope { a, b: coset });
            }
            by_slope.insert(slope, coset);
            let row = parent.row_index(RowLabel::Slope(slope)).expect("every field slope has a row");
            slopes.push(CosetSlope { coset, u, v, slope, row });
        }
        let rows: Vec<usize> = slopes.iter().map(|s| s.row).collect();
        let subarray = parent.subarray(&rows)?;
        Ok(SubarraySelection { ctx, plane, parent, slopes, subarray })
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn alpha(&self) -> FieldElement {
        self.plane.alpha()
    }

    pub fn plane(&self) -> &Plane {
        &self.plane
    }

    pub fn parent(&self) -> &OrthogonalArray {
        &self.parent
    }

    pub fn subarray(&self) -> &OrthogonalArray {
        &self.subarray
    }

    pub fn slopes(&self) -> &[CosetSlope] {
        &self.slopes
    }

    pub fn cosets(&self) -> Vec<CosetIndex> {
        self.slopes.iter().map(|s| s.coset).collect()
    }

    pub fn slope_of_coset(&self, coset: CosetIndex) -> Option<&CosetSlope> {
        self.slopes.iter().find(|s| s.coset == coset)
    }

    /// Rows of the full array whose slope is not used, in row order.
    pub fn unused_rows(&self) -> Vec<usize> {
        let used: BTreeSet<usize> = self.slopes.iter().map(|s| s.row).collect();
        (0..self.parent.m()).filter(|r| !used.contains(r)).collect()
    }

    /// Intercept symbol `δ` with `c_i F_q + b = c_i F_q + δα`, i.e. the entry
    /// `d − c·v_i` of the line through `b = c + dα`.
    pub fn intercept(&self, slope: &CosetSlope, b: FieldElement) -> u32 {
        let sub = self.plane.subfield();
        let (c, d) = self.plane.point(b);
        let val = self.ctx.sub(sub.element(d), self.ctx.mul(sub.element(c), sub.element(slope.slope)));
        sub.symbol(val).expect("subfield arithmetic")
    }

    /// Graph vertices (element labels) of the line with the given slope row and symbol.
    pub fn line_vertices(&self, row: usize, symbol: u32) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .parent
            .canonical_class(row, symbol)
            .into_iter()
            .map(|c| self.plane.element(c).0 as usize)
            .collect();
        out.sort_unstable();
        out
    }
}

/// Explicit vertex map `f` from block-graph columns to graph vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsomorphismCertificate {
    pub alpha: u32,
    /// `map[column] = vertex`.
    pub map: Vec<usize>,
    pub pairs_checked: usize,
}

/// Checks that `map` is a bijection carrying adjacency of `block` onto
/// adjacency of `target`, over all vertex pairs.
pub fn verify_vertex_map(block: &Graph, target: &Graph, map: &[usize]) -> Result<usize, OaError> {
    let n = block.n();
    if target.n() != n || map.len() != n {
        return Err(OaError::NotBijective);
    }
    let mut hit = vec![false; n];
    for &v in map {
        if v >= n || hit[v] {
            return Err(OaError::NotBijective);
        }
        hit[v] = true;
    }
    let mut pairs = 0;
    for a in 0..n {
        for b in a + 1..n {
            if block.is_adjacent(a, b) != target.is_adjacent(map[a], map[b]) {
                return Err(OaError::NotIsomorphicUnderF(a, b));
            }
            pairs += 1;
        }
    }
    Ok(pairs)
}

pub fn verify_isomorphism(x: &PeisertGraph, sel: &SubarraySelection) -> Result<IsomorphismCertificate, OaError> {
    if sel.cosets() != x.indices() {
        return Err(OaError::SelectionMismatch);
    }
    let block = block_graph(sel.subarray());
    let map: Vec<usize> = (0..block.graph.n()).map(|c| sel.plane().element(c).0 as usize).collect();
    let pairs_checked = verify_vertex_map(&block.graph, x.graph(), &map)?;
    Ok(IsomorphismCertificate { alpha: sel.alpha().0, map, pairs_checked })
}

/// One matched pair of canonical cliques.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueCorrespondence {
    pub coset: CosetIndex,
    pub slope: u32,
    pub intercept: u32,
    /// Vertices of `c_i F_q + δα` in the Cayley graph.
    pub vertices: Vec<usize>,
    /// Columns of the line `y = v_i x + δ`.
    pub columns: Vec<usize>,
}

/// Matches every translate `c_i F_q + b` with the line of slope `v_i` and
/// intercept `d − c·v_i` (where `b = c + dα`), checking vertex sets agree
/// under `f` for every `b`.
pub fn canonical_correspondence(sel: &SubarraySelection) -> Result<Vec<CliqueCorrespondence>, OaError> {
    let ctx = sel.ctx();
    let sub = sel.plane().subfield();
    let mut out = Vec::new();
    for slope in sel.slopes() {
        let rep = ctx.exp(slope.coset.0 as u64);
        let line_f: Vec<FieldElement> = sub.elements().iter().map(|&t| ctx.mul(rep, t)).collect();
        let mut by_intercept: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for b in ctx.elements() {
            let mut clique: Vec<usize> = line_f.iter().map(|&z| ctx.add(z, b).0 as usize).collect();
            clique.sort_unstable();
            let delta = sel.intercept(slope, b);
            let line = sel.line_vertices(slope.row, delta);
            if line != clique {
                return Err(OaError::CorrespondenceFailed { coset: slope.coset, intercept: delta });
            }
            match by_intercept.get(&delta) {
                Some(prev) if *prev != clique => {
                    return Err(OaError::CorrespondenceFailed { coset: slope.coset, intercept: delta });
                }
                Some(_) => {}
                None => {
                    by_intercept.insert(delta, clique);
                }
            }
        }
        if by_intercept.len() != sub.q() as usize {
            return Err(OaError::CorrespondenceFailed { coset: slope.coset, intercept: u32::MAX });
        }
        for (delta, vertices) in by_intercept {
            let columns = sel.parent().canonical_class(slope.row, delta);
            out.push(CliqueCorrespondence { coset: slope.coset, slope: slope.slope, intercept: delta, vertices, columns });
        }
    }
    Ok(out)
}

/// Colours each vertex by its entry in the least unused slope row of the
/// full array. Colour classes are lines of an unused direction, hence
/// independent sets of size q.
pub fn unused_slope_coloring(sel: &SubarraySelection) -> Result<Coloring, OaError> {
    let row = *sel.unused_rows().first().ok_or(OaError::NoUnusedSlope)?;
    let n = sel.parent().columns();
    let mut colors = vec![0usize; n];
    for (col, &e) in sel.parent().row(row).iter().enumerate() {
        colors[sel.plane().element(col).0 as usize] = e as usize;
    }
    Ok(Coloring { colors })
}

/// Result of the non-canonical clique size bound for one clique.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoncanonicalBound {
    pub size: usize,
    /// `|D_j|`: columns (other than the translated all-zeros column) whose
    /// single zero entry is in row `j`.
    pub d_sizes: Vec<usize>,
    /// All columns lie in one canonical clique.
    pub canonical: bool,
    /// `(m − 1)²`.
    pub bound: usize,
    pub holds: bool,
}

/// Translates each row modulo `n` so the first clique column is all zeros,
/// partitions the rest by the row of their zero entry, and checks
/// `|C| ≤ 1 + Σ|D_j| ≤ (m−1)²` for non-canonical cliques.
pub fn noncanonical_bound(oa: &OrthogonalArray, clique_columns: &[usize]) -> Result<NoncanonicalBound, OaError> {
    let m = oa.m();
    let n = oa.n() as u32;
    let bound = (m.max(1) - 1).pow(2);
    let Some((&c0, rest)) = clique_columns.split_first() else {
        return Ok(NoncanonicalBound { size: 0, d_sizes: vec![0; m], canonical: true, bound, holds: true });
    };
    let shift: Vec<u32> = (0..m).map(|r| oa.entry(r, c0)).collect();
    let translated = |r: usize, c: usize| (oa.entry(r, c) + n - shift[r]) % n;
    let mut d_sizes = vec![0usize; m];
    for &c in rest {
        let zeros: Vec<usize> = (0..m).filter(|&r| translated(r, c) == 0).collect();
        match zeros.as_slice() {
            [j] => d_sizes[*j] += 1,
            _ => {
                return Err(OaError::Shape(format!(
                    "column {c} agrees with column {c0} in {} rows; expected exactly one",
                    zeros.len()
                )))
            }
        }
    }
    let canonical = d_sizes.iter().filter(|&&d| d > 0).count() <= 1;
    let size = clique_columns.len();
    debug_assert_eq!(size, 1 + d_sizes.iter().sum::<usize>());
    let holds = canonical || size <= bound;
    Ok(NoncanonicalBound { size, d_sizes, canonical, bound, holds })
}

/// Columns of the block graph for a set of Cayley-graph vertices.
pub fn clique_columns(sel: &SubarraySelection, clique: &Clique) -> Vec<usize> {
    clique.vertices.iter().map(|&v| sel.plane().column(FieldElement(v as u32))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{srg_certify, verify_coloring, ColoringCheck};
    use crate::peisert::build_cayley;

    fn gf9() -> Arc<FieldCtx> {
        Arc::new(FieldCtx::new(3, 2, None).unwrap())
    }

    fn gf81() -> Arc<FieldCtx> {
        Arc::new(FieldCtx::new(3, 4, Some(&[-1, 0, 0, -1, 1])).unwrap())
    }

    fn idx(v: &[u32]) -> Vec<CosetIndex> {
        v.iter().copied().map(CosetIndex).collect()
    }

    #[test]
    fn q3_point_line_array() {
        let f = gf9();
        let alpha = default_alpha(&f, &idx(&[0])).unwrap().unwrap();
        let oa = build_pointline_oa(&f, alpha).unwrap();
        assert_eq!((oa.m(), oa.n(), oa.columns()), (4, 3, 9));
        // Slope 1 at point (2, 1): 1 − 1·2 = −1 = 2. Symbols of GF(3) are labels 0,1,2.
        let r = oa.row_index(RowLabel::Slope(1)).unwrap();
        assert_eq!(oa.entry(r, 2 * 3 + 1), 2);
        // Exhaustive pair check, done independently of `verify`.
        for r1 in 0..4 {
            for r2 in r1 + 1..4 {
                let pairs: BTreeSet<(u32, u32)> = (0..9).map(|c| (oa.entry(r1, c), oa.entry(r2, c))).collect();
                assert_eq!(pairs.len(), 9);
            }
        }
        assert_eq!(oa.row(3), &[0, 0, 0, 1, 1, 1, 2, 2, 2]);
    }

    #[test]
    fn alpha_in_subfield_is_rejected() {
        let f = gf9();
        assert_eq!(build_pointline_oa(&f, FieldElement(2)).unwrap_err(), OaError::AlphaInSubfield(FieldElement(2)));
    }

    #[test]
    fn q9_array_has_ten_rows() {
        let f = gf81();
        let sel = SubarraySelection::new(f, &idx(&[0, 1, 2, 3, 4])).unwrap();
        assert_eq!(sel.parent().m(), 10);
        assert_eq!(sel.parent().columns(), 81);
        let slopes: BTreeSet<u32> = sel.slopes().iter().map(|s| s.slope).collect();
        assert_eq!(slopes.len(), 5);
    }

    #[test]
    fn base_coset_has_slope_zero() {
        let sel = SubarraySelection::new(gf9(), &idx(&[0])).unwrap();
        assert_eq!(sel.slopes()[0].v, 0);
        assert_eq!(sel.slopes()[0].slope, 0);
    }

    #[test]
    fn block_graph_parameters() {
        let f = gf9();
        let sel = SubarraySelection::new(f.clone(), &idx(&[0, 1])).unwrap();
        let bg = block_graph(sel.subarray());
        let p = srg_certify(&bg.graph).unwrap();
        assert_eq!((p.n, p.k, p.lambda, p.mu), (9, 4, 1, Some(2)));
        for class in &bg.canonical {
            assert_eq!(class.columns.len(), 3);
            bg.graph.is_clique(&class.columns).unwrap();
        }
        let full = block_graph(sel.parent());
        assert_eq!(full.graph.edge_count(), 36);
    }

    #[test]
    fn paley9_isomorphism_and_negative_control() {
        let f = gf9();
        let x = build_cayley(f.clone(), &idx(&[0, 1])).unwrap();
        let sel = SubarraySelection::new(f, x.indices()).unwrap();
        let cert = verify_isomorphism(&x, &sel).unwrap();
        assert_eq!(cert.pairs_checked, 36);
        let block = block_graph(sel.subarray());
        // Swap the images of two columns with different neighbourhoods.
        let mut bad = cert.map.clone();
        let (a, b) = (0..9)
            .flat_map(|a| (a + 1..9).map(move |b| (a, b)))
            .find(|&(a, b)| !block.graph.is_adjacent(a, b))
            .unwrap();
        bad.swap(a, b);
        assert!(matches!(
            verify_vertex_map(&block.graph, x.graph(), &bad),
            Err(OaError::NotIsomorphicUnderF(..))
        ));
    }

    #[test]
    fn correspondence_and_coloring_for_gp_star_81() {
        let f = gf81();
        let x = build_cayley(f.clone(), &idx(&[0, 1, 2, 3, 4])).unwrap();
        let sel = SubarraySelection::new(f, x.indices()).unwrap();
        verify_isomorphism(&x, &sel).unwrap();
        let pairs = canonical_correspondence(&sel).unwrap();
        assert_eq!(pairs.len(), 45);
        // F_9 itself is the line of slope v_1 = 0 through the origin.
        let base = pairs.iter().find(|p| p.coset == CosetIndex(0) && p.intercept == 0).unwrap();
        assert_eq!(base.vertices, sel.plane().subfield().elements().iter().map(|e| e.0 as usize).collect::<Vec<_>>());
        let col = unused_slope_coloring(&sel).unwrap();
        assert_eq!(col.num_colors(), 9);
        assert_eq!(verify_coloring(x.graph(), &col).unwrap(), ColoringCheck::Proper);
        assert!(col.classes().iter().all(|c| c.len() == 9));
    }

    #[test]
    fn coloring_with_one_unused_slope() {
        let f = gf9();
        let sel = SubarraySelection::new(f.clone(), &idx(&[0, 1, 2])).unwrap();
        assert_eq!(sel.unused_rows().len(), 1);
        let x = build_cayley(f, &idx(&[0, 1, 2])).unwrap();
        let col = unused_slope_coloring(&sel).unwrap();
        assert_eq!(verify_coloring(x.graph(), &col).unwrap(), ColoringCheck::Proper);
    }

    #[test]
    fn csv_round_trip() {
        let f = gf9();
        let sel = SubarraySelection::new(f, &idx(&[0, 1])).unwrap();
        let text = sel.parent().to_csv();
        assert!(text.starts_with("slope,0:0,0:1"));
        let back = OrthogonalArray::from_csv(&text).unwrap();
        assert_eq!(&back, sel.parent());
        back.verify().unwrap();
    }

    #[test]
    fn broken_array_fails_verification() {
        let oa = OrthogonalArray::new(
            2,
            vec![RowLabel::Slope(0), RowLabel::Slope(1)],
            vec![(0, 0), (0, 1), (1, 0), (1, 1)],
            vec![0, 0, 1, 1, 0, 0, 1, 1],
        )
        .unwrap();
        assert!(matches!(oa.verify(), Err(OaError::OAVerificationFailed { .. })));
    }

    #[test]
    fn bound_classifies_canonical_columns() {
        let sel = SubarraySelection::new(gf9(), &idx(&[0, 1])).unwrap();
        let oa = sel.subarray();
        let line = oa.canonical_class(0, 1);
        let b = noncanonical_bound(oa, &line).unwrap();
        assert!(b.canonical && b.holds);
        assert_eq!(b.size, 3);
    }
}
