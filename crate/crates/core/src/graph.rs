//! Dense undirected graphs with exact structural certificates.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::BitSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("graph is not regular: vertex {vertex} has degree {degree}, expected {expected}")]
    NotRegular { vertex: usize, degree: usize, expected: usize },
    #[error(
        "graph is not strongly regular: pair ({u}, {v}) has {common} common neighbours, expected {expected}"
    )]
    NotStronglyRegular { u: usize, v: usize, common: usize, expected: usize },
    #[error("SRG parameters {0:?} give non-integral or negative eigenvalue multiplicities")]
    InfeasibleSpectrum((usize, usize, usize, usize)),
    #[error("adjacency is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {0} out of range for graph on {1} vertices")]
    VertexOutOfRange(usize, usize),
    #[error("coloring has {got} entries for a graph on {expected} vertices")]
    LengthMismatch { got: usize, expected: usize },
    #[error("clique of size {size} is not Hoffman-tight (bound {bound})")]
    NotHoffmanTight { size: usize, bound: String },
    #[error("vertex set is not a clique: {0} and {1} are not adjacent")]
    NotAClique(usize, usize),
    #[error("graph carries no SRG certificate")]
    MissingCertificate,
    #[error("search budget exhausted after {0:.1} s")]
    Timeout(f64),
    #[error("malformed DIMACS input at line {line}: {msg}")]
    Dimacs { line: usize, msg: String },
}

/// One eigenvalue with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub value: i64,
    pub multiplicity: usize,
}

/// Adjacency spectrum of a strongly regular graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Spectrum {
    /// Distinct eigenvalues in decreasing order.
    Integral { eigenvalues: Vec<Eigenvalue> },
    /// Conference-type graph whose restricted eigenvalues are
    /// `((λ-μ) ± sqrt(discriminant)) / 2`.
    Irrational { discriminant: i64 },
}

/// Certified parameters `(n, k, λ, μ)`; `mu` is `None` for complete graphs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SrgParams {
    pub n: usize,
    pub k: usize,
    pub lambda: usize,
    pub mu: Option<usize>,
    pub spectrum: Spectrum,
    /// `μ = 0`: a disjoint union of complete graphs.
    pub disconnected: bool,
}

impl SrgParams {
    pub fn eigenvalues(&self) -> &[Eigenvalue] {
        match &self.spectrum {
            Spectrum::Integral { eigenvalues } => eigenvalues,
            Spectrum::Irrational { .. } => &[],
        }
    }

    pub fn least_eigenvalue(&self) -> Option<i64> {
        self.eigenvalues().iter().map(|e| e.value).min()
    }

    pub fn multiplicity(&self, value: i64) -> usize {
        self.eigenvalues().iter().find(|e| e.value == value).map_or(0, |e| e.multiplicity)
    }

    /// Delsarte–Hoffman clique bound `1 + k/m` with `-m` the least eigenvalue,
    /// as a numerator/denominator pair.
    pub fn hoffman_bound(&self) -> Option<(usize, usize)> {
        let m = -self.least_eigenvalue()?;
        if m <= 0 {
            return None;
        }
        let m = m as usize;
        Some((m + self.k, m))
    }

    /// The Hoffman bound when it is an integer.
    pub fn integral_hoffman_bound(&self) -> Option<usize> {
        let (num, den) = self.hoffman_bound()?;
        (num % den == 0).then_some(num / den)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Clique {
    pub vertices: Vec<usize>,
}

impl Clique {
    pub fn new(mut vertices: Vec<usize>) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        Clique { vertices }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub colors: Vec<usize>,
}

impl Coloring {
    pub fn num_colors(&self) -> usize {
        let mut seen: Vec<usize> = self.colors.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    pub fn classes(&self) -> Vec<Vec<usize>> {
        let top = self.colors.iter().copied().max().map_or(0, |c| c + 1);
        let mut out = vec![Vec::new(); top];
        for (v, &c) in self.colors.iter().enumerate() {
            out[c].push(v);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ColoringCheck {
    Proper,
    Conflict { u: usize, v: usize },
}

/// Undirected graph on `0..n` with one adjacency bitset per vertex and a
/// domain label for every vertex.
#[derive(Debug, Clone)]
pub struct Graph {
    rows: Vec<BitSet>,
    labels: Vec<u32>,
    srg: Option<SrgParams>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            rows: vec![BitSet::new(n); n],
            labels: (0..n as u32).collect(),
            srg: None,
        }
    }

    /// Builds a graph from a symmetric adjacency predicate evaluated on `u < v`.
    pub fn from_fn(n: usize, mut adjacent: impl FnMut(usize, usize) -> bool) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                if adjacent(u, v) {
                    g.add_edge(u, v);
                }
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::VertexOutOfRange(u.max(v), n));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        Graph::from_fn(n, |_, _| true)
    }

    pub fn with_labels(mut self, labels: Vec<u32>) -> Self {
        assert_eq!(labels.len(), self.n());
        self.labels = labels;
        self
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        self.rows[u].insert(v);
        self.rows[v].insert(u);
        self.srg = None;
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> u32 {
        self.labels[v]
    }

    pub fn vertex_of_label(&self, label: u32) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    #[inline]
    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        self.rows[u].contains(v)
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &BitSet {
        &self.rows[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.rows[v].count()
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(BitSet::count).sum::<usize>() / 2
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| self.rows[u].iter().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    pub fn complement(&self) -> Graph {
        let n = self.n();
        let rows = (0..n)
            .map(|v| {
                let mut r = self.rows[v].complement();
                r.remove(v);
                r
            })
            .collect();
        Graph { rows, labels: self.labels.clone(), srg: None }
    }

    /// Checks symmetry and the absence of self-loops.
    pub fn validate(&self) -> Result<(), GraphError> {
        for u in 0..self.n() {
            if self.rows[u].contains(u) {
                return Err(GraphError::SelfLoop(u));
            }
            for v in self.rows[u].iter() {
                if !self.rows[v].contains(u) {
                    return Err(GraphError::Asymmetric(u, v));
                }
            }
        }
        Ok(())
    }

    pub fn srg(&self) -> Option<&SrgParams> {
        self.srg.as_ref()
    }

    /// Runs [`srg_certify`] and attaches the certificate to the graph.
    pub fn certify(&mut self) -> Result<&SrgParams, GraphError> {
        let params = srg_certify(self)?;
        self.srg = Some(params);
        Ok(self.srg.as_ref().expect("just set"))
    }

    pub fn is_clique(&self, vertices: &[usize]) -> Result<(), GraphError> {
        for (i, &u) in vertices.iter().enumerate() {
            if u >= self.n() {
                return Err(GraphError::VertexOutOfRange(u, self.n()));
            }
            for &v in &vertices[i + 1..] {
                if u == v || !self.is_adjacent(u, v) {
                    return Err(GraphError::NotAClique(u, v));
                }
            }
        }
        Ok(())
    }

    /// A clique is maximal when no outside vertex is adjacent to all of it.
    pub fn is_maximal_clique(&self, clique: &Clique) -> bool {
        let mut common = BitSet::full(self.n());
        for &v in &clique.vertices {
            common.intersect_with(&self.rows[v]);
        }
        common.is_empty()
    }

    /// DIMACS `p edge` text, 1-based; vertex labels as `c label` comments.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "p edge {} {}", self.n(), self.edge_count());
        for (v, l) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "c label {} {}", v + 1, l);
        }
        for (u, v) in self.edges() {
            let _ = writeln!(out, "e {} {}", u + 1, v + 1);
        }
        out
    }

    pub fn from_dimacs(text: &str) -> Result<Graph, GraphError> {
        let err = |line: usize, msg: &str| GraphError::Dimacs { line: line + 1, msg: msg.to_string() };
        let mut graph: Option<Graph> = None;
        let mut declared_edges = 0usize;
        let mut labels: Vec<(usize, u32)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.as_slice() {
                [] => {}
                ["c", "label", v, l] => {
                    let v: usize = v.parse().map_err(|_| err(i, "bad label vertex"))?;
                    let l: u32 = l.parse().map_err(|_| err(i, "bad label value"))?;
                    labels.push((v, l));
                }
                ["c", ..] => {}
                ["p", "edge" | "col", n, m] => {
                    if graph.is_some() {
                        return Err(err(i, "duplicate problem line"));
                    }
                    let n: usize = n.parse().map_err(|_| err(i, "bad vertex count"))?;
                    declared_edges = m.parse().map_err(|_| err(i, "bad edge count"))?;
                    graph = Some(Graph::empty(n));
                }
                ["e", u, v] => {
                    let g = graph.as_mut().ok_or_else(|| err(i, "edge before problem line"))?;
                    let u: usize = u.parse().map_err(|_| err(i, "bad endpoint"))?;
                    let v: usize = v.parse().map_err(|_| err(i, "bad endpoint"))?;
                    if u == 0 || v == 0 || u > g.n() || v > g.n() {
                        return Err(err(i, "endpoint out of range"));
                    }
                    if u == v {
                        return Err(err(i, "self-loop"));
                    }
                    g.add_edge(u - 1, v - 1);
                }
                _ => return Err(err(i, "unrecognised line")),
            }
        }
        let mut g = graph.ok_or_else(|| err(0, "missing problem line"))?;
        if g.edge_count() != declared_edges {
            return Err(GraphError::Dimacs {
                line: 0,
                msg: format!("declared {declared_edges} edges, found {}", g.edge_count()),
            });
        }
        for (v, l) in labels {
            if v == 0 || v > g.n() {
                return Err(GraphError::Dimacs { line: 0, msg: format!("label for vertex {v} out of range") });
            }
            g.labels[v - 1] = l;
        }
        Ok(g)
    }
}

fn isqrt(n: i64) -> Option<i64> {
    if n < 0 {
        return None;
    }
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    (r * r == n).then_some(r)
}

/// Certifies strong regularity by checking `A² = kI + λA + μ(J − I − A)`
/// entry by entry with bitset popcounts, then derives the spectrum from the
/// closed-form multiplicities.
pub fn srg_certify(g: &Graph) -> Result<SrgParams, GraphError> {
    let n = g.n();
    if n == 0 {
        return Err(GraphError::EmptyGraph);
    }
    g.validate()?;
    let k = g.degree(0);
    for v in 1..n {
        let d = g.degree(v);
        if d != k {
            return Err(GraphError::NotRegular { vertex: v, degree: d, expected: k });
        }
    }

    let mut lambda: Option<usize> = None;
    let mut mu: Option<usize> = None;
    for u in 0..n {
        for v in u + 1..n {
            let common = g.rows[u].intersection_count(&g.rows[v]);
            let slot = if g.is_adjacent(u, v) { &mut lambda } else { &mut mu };
            match *slot {
                None => *slot = Some(common),
                Some(expected) if expected != common => {
                    return Err(GraphError::NotStronglyRegular { u, v, common, expected });
                }
                _ => {}
            }
        }
    }
    let lambda = lambda.unwrap_or(0);

    let spectrum = match mu {
        None => {
            let mut eigenvalues = vec![Eigenvalue { value: k as i64, multiplicity: 1 }];
            if n > 1 {
                eigenvalues.push(Eigenvalue { value: -1, multiplicity: n - 1 });
            }
            Spectrum::Integral { eigenvalues }
        }
        Some(mu) => {
            let (ni, ki, li, mi) = (n as i64, k as i64, lambda as i64, mu as i64);
            if ki * (ki - li - 1) != (ni - ki - 1) * mi {
                return Err(GraphError::InfeasibleSpectrum((n, k, lambda, mu)));
            }
            let disc = (li - mi) * (li - mi) + 4 * (ki - mi);
            match isqrt(disc) {
                None => Spectrum::Irrational { discriminant: disc },
                Some(root) => {
                    let infeasible = || GraphError::InfeasibleSpectrum((n, k, lambda, mu));
                    if (li - mi + root) % 2 != 0 {
                        return Err(infeasible());
                    }
                    let r = (li - mi + root) / 2;
                    let s = (li - mi - root) / 2;
                    let f_num = (ni - 1) * (-s) - ki;
                    let g_num = ki + (ni - 1) * r;
                    let den = r - s;
                    if den == 0 || f_num % den != 0 || g_num % den != 0 {
                        return Err(infeasible());
                    }
                    let (f, gm) = (f_num / den, g_num / den);
                    if f < 0 || gm < 0 || 1 + f + gm != ni {
                        return Err(infeasible());
                    }
                    let mut eigenvalues: Vec<Eigenvalue> = Vec::new();
                    for (value, mult) in [(ki, 1), (r, f), (s, gm)] {
                        if mult == 0 {
                            continue;
                        }
                        match eigenvalues.iter_mut().find(|e| e.value == value) {
                            Some(e) => e.multiplicity += mult as usize,
                            None => eigenvalues.push(Eigenvalue { value, multiplicity: mult as usize }),
                        }
                    }
                    eigenvalues.sort_by(|a, b| b.value.cmp(&a.value));
                    Spectrum::Integral { eigenvalues }
                }
            }
        }
    };

    Ok(SrgParams { n, k, lambda, mu, spectrum, disconnected: mu == Some(0) })
}

pub fn verify_coloring(g: &Graph, c: &Coloring) -> Result<ColoringCheck, GraphError> {
    if c.colors.len() != g.n() {
        return Err(GraphError::LengthMismatch { got: c.colors.len(), expected: g.n() });
    }
    Ok(g.edges()
        .find(|&(u, v)| c.colors[u] == c.colors[v])
        .map_or(ColoringCheck::Proper, |(u, v)| ColoringCheck::Conflict { u, v }))
}

/// Outcome of [`clique_regularity`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Regularity {
    /// Every outside vertex has `neighbours` neighbours in the clique.
    Regular { neighbours: usize },
    Irregular { vertex: usize, count: usize, expected: usize },
}

/// Checks that every vertex outside a Hoffman-tight clique has exactly `μ/m`
/// neighbours inside it.
pub fn clique_regularity(g: &Graph, clique: &Clique) -> Result<Regularity, GraphError> {
    let params = g.srg().ok_or(GraphError::MissingCertificate)?;
    g.is_clique(&clique.vertices)?;
    let tight = params.integral_hoffman_bound();
    if tight != Some(clique.len()) {
        let bound = params
            .hoffman_bound()
            .map_or_else(|| "undefined".to_string(), |(a, b)| format!("{a}/{b}"));
        return Err(GraphError::NotHoffmanTight { size: clique.len(), bound });
    }
    let m = -params.least_eigenvalue().expect("tight bound implies a spectrum") as usize;
    let expected = params.mu.unwrap_or(0) / m;
    let members: BitSet = {
        let mut s = BitSet::new(g.n());
        clique.vertices.iter().for_each(|&v| s.insert(v));
        s
    };
    for v in 0..g.n() {
        if members.contains(v) {
            continue;
        }
        let count = g.rows[v].intersection_count(&members);
        if count != expected {
            return Ok(Regularity::Irregular { vertex: v, count, expected });
        }
    }
    Ok(Regularity::Regular { neighbours: expected })
}
