//! Canonical cliques and the `(q−m)`-eigenbasis they span. Maximum cliques
//! are decomposed over it exactly.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::{Add, Mul};
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::budget::Budget;
use crate::clique::{enumerate_max_cliques, maximal_cliques_through, CliqueQuery};
use crate::field::{CosetIndex, FieldCtx, FieldElement, FieldError};
use crate::graph::{srg_certify, Clique, Graph, GraphError, SrgParams};
use crate::linalg::{format_rational, rat, ratio, Rational, RationalMatrix, Solution};
use crate::oa::{clique_columns, noncanonical_bound, OaError, SubarraySelection};
use crate::peisert::{build_cayley, PeisertError, PeisertGraph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EkrError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Oa(#[from] OaError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Peisert(#[from] PeisertError),
    #[error("eigenfunction check needs a nonzero vector")]
    ZeroVector,
    #[error("vector has {got} entries, graph has {expected} vertices")]
    LengthMismatch { got: usize, expected: usize },
    #[error("graph is not strongly regular with least eigenvalue -m = {expected}")]
    UnexpectedSpectrum { expected: i64 },
    #[error("{what} fails the eigenvalue equation at vertex {vertex}")]
    NotAnEigenvector { what: String, vertex: usize },
    #[error("identity violated: {0}")]
    IdentityFailed(String),
    #[error("basis has rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("clique of size {size} is not a maximum clique (q = {q}){detail}")]
    NotMaximumClique { size: usize, q: u32, detail: &'static str },
    #[error("decomposition left a nonzero residual {residual} at reduced row {row}")]
    NonZeroResidual { row: usize, residual: String },
    #[error("{0} is not the order of a proper subfield of F_q")]
    NotProperSubfield(u64),
    #[error("the subspace clique turned out to be canonical")]
    CanonicalAfterAll,
    #[error("counterexample check failed: {0}")]
    CounterexampleCheck(String),
}

/// `c_i F_q + δα` for coset `i` and intercept symbol `δ`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalClique {
    pub coset: CosetIndex,
    pub slope: u32,
    pub intercept: u32,
    pub vertices: Clique,
}

/// All `m·q` canonical cliques, ordered by (coset, intercept).
pub fn canonical_cliques(x: &PeisertGraph) -> Result<Vec<CanonicalClique>, EkrError> {
    let sel = SubarraySelection::new(x.ctx_arc(), x.indices())?;
    Ok(canonical_cliques_with(x, &sel))
}

pub fn canonical_cliques_with(x: &PeisertGraph, sel: &SubarraySelection) -> Vec<CanonicalClique> {
    let ctx = x.ctx();
    let sub = sel.plane().subfield();
    let mut out = Vec::with_capacity(x.m() as usize * x.q() as usize);
    for slope in sel.slopes() {
        let rep = ctx.exp(slope.coset.0 as u64);
        let alpha = sel.alpha();
        for delta in 0..sub.q() {
            let shift = ctx.mul(sub.element(delta), alpha);
            let verts = sub.elements().iter().map(|&t| ctx.add(ctx.mul(rep, t), shift).0 as usize).collect();
            out.push(CanonicalClique {
                coset: slope.coset,
                slope: slope.slope,
                intercept: delta,
                vertices: Clique::new(verts),
            });
        }
    }
    out
}

/// Outcome of [`eigenfunction_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum EigenCheck {
    Holds,
    FailsAt { vertex: usize },
}

impl EigenCheck {
    pub fn holds(self) -> bool {
        self == EigenCheck::Holds
    }
}

/// Checks `θ·v(γ) = Σ_{δ ∈ N(γ)} v(δ)` at every vertex, exactly.
pub fn eigenfunction_check<T>(g: &Graph, v: &[T], theta: &T) -> Result<EigenCheck, EkrError>
where
    T: Clone + Zero + PartialEq,
    for<'a> &'a T: Mul<&'a T, Output = T> + Add<&'a T, Output = T>,
{
    if v.len() != g.n() {
        return Err(EkrError::LengthMismatch { got: v.len(), expected: g.n() });
    }
    if v.iter().all(Zero::is_zero) {
        return Err(EkrError::ZeroVector);
    }
    for gamma in 0..g.n() {
        let lhs = theta * &v[gamma];
        let rhs = g.neighbors(gamma).iter().fold(T::zero(), |acc, d| &acc + &v[d]);
        if lhs != rhs {
            return Ok(EigenCheck::FailsAt { vertex: gamma });
        }
    }
    Ok(EigenCheck::Holds)
}

/// A vector orthogonal to the all-ones vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BalancedVector {
    entries: Vec<Rational>,
}

impl BalancedVector {
    /// `χ_A − (|A|/n)·1`.
    pub fn of_set(n: usize, set: &[usize]) -> Self {
        let mean = ratio(set.len() as i64, n as i64);
        let mut entries = vec![-mean.clone(); n];
        for &v in set {
            entries[v] += Rational::one();
        }
        debug_assert!(entries.iter().cloned().sum::<Rational>().is_zero());
        BalancedVector { entries }
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }
}

fn indicator(n: usize, set: &[usize]) -> Vec<i64> {
    let mut v = vec![0i64; n];
    for &x in set {
        v[x] = 1;
    }
    v
}

/// `g_{r,i}`: `q−1` on the clique, `−1` elsewhere; equals `q` times the
/// balanced characteristic vector.
fn g_vector(n: usize, q: i64, set: &[usize]) -> Vec<i64> {
    let mut v = vec![-1i64; n];
    for &x in set {
        v[x] = q - 1;
    }
    v
}

/// Canonical cliques of one coset class, the one through the base vertex first.
#[derive(Debug, Clone)]
pub struct CliqueClass {
    pub coset: CosetIndex,
    pub head: CanonicalClique,
    pub rest: Vec<CanonicalClique>,
}

/// Basis of the `(q−m)`-eigenspace: balanced characteristic vectors of the
/// `m(q−1)` canonical cliques missing the base vertex.
#[derive(Debug, Clone)]
pub struct EkrBasis {
    pub base_vertex: usize,
    pub q: u32,
    pub m: u32,
    pub classes: Vec<CliqueClass>,
    pub rank: usize,
}

impl EkrBasis {
    /// Basis cliques in column order.
    pub fn members(&self) -> impl Iterator<Item = &CanonicalClique> {
        self.classes.iter().flat_map(|c| c.rest.iter())
    }

    pub fn len(&self) -> usize {
        self.classes.iter().map(|c| c.rest.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn theta(&self) -> i64 {
        self.q as i64 - self.m as i64
    }

    /// Column `j` as a balanced vector `g_{r,i}/q`.
    pub fn column(&self, n: usize, j: usize) -> BalancedVector {
        let c = self.members().nth(j).expect("column index in range");
        BalancedVector::of_set(n, &c.vertices.vertices)
    }

    /// `g_{r,i}` for every canonical clique, grouped by class, heads first.
    pub fn g_family(&self, n: usize) -> Vec<Vec<Vec<i64>>> {
        self.classes
            .iter()
            .map(|c| {
                std::iter::once(&c.head)
                    .chain(&c.rest)
                    .map(|s| g_vector(n, self.q as i64, &s.vertices.vertices))
                    .collect()
            })
            .collect()
    }

    /// `f_{r,i} = χ_{S_{r,1}} − χ_{S_{r,i}}` for `i ≥ 2`, grouped by class.
    pub fn f_family(&self, n: usize) -> Vec<Vec<Vec<i64>>> {
        self.classes
            .iter()
            .map(|c| {
                let head = indicator(n, &c.head.vertices.vertices);
                c.rest
                    .iter()
                    .map(|s| {
                        let other = indicator(n, &s.vertices.vertices);
                        head.iter().zip(&other).map(|(a, b)| a - b).collect()
                    })
                    .collect()
            })
            .collect()
    }

    fn integer_matrix(&self, n: usize) -> RationalMatrix {
        let cols: Vec<Vec<i64>> =
            self.members().map(|c| g_vector(n, self.q as i64, &c.vertices.vertices)).collect();
        RationalMatrix::from_fn(n, cols.len(), |i, j| rat(cols[j][i]))
    }
}

fn certified_params(x: &PeisertGraph) -> Result<SrgParams, EkrError> {
    match x.graph().srg() {
        Some(p) => Ok(p.clone()),
        None => Ok(srg_certify(x.graph())?),
    }
}

fn check_eigen_i64(g: &Graph, v: &[i64], theta: i64, what: impl Fn() -> String) -> Result<(), EkrError> {
    match eigenfunction_check(g, v, &theta)? {
        EigenCheck::Holds => Ok(()),
        EigenCheck::FailsAt { vertex } => Err(EkrError::NotAnEigenvector { what: what(), vertex }),
    }
}

/// Builds and certifies the basis: every column is a `(q−m)`-eigenvector,
/// `Σ_i g_{r,i} = 0` in each class, `f_{r,i} = (g_{r,1} − g_{r,i})/q`,
/// classes are mutually orthogonal, and the rank is exactly `m(q−1)`.
pub fn build_ekr_basis(x: &PeisertGraph, base_vertex: usize) -> Result<EkrBasis, EkrError> {
    let sel = SubarraySelection::new(x.ctx_arc(), x.indices())?;
    build_ekr_basis_with(x, &sel, base_vertex)
}

pub fn build_ekr_basis_with(
    x: &PeisertGraph,
    sel: &SubarraySelection,
    base_vertex: usize,
) -> Result<EkrBasis, EkrError> {
    let g = x.graph();
    let n = g.n();
    if base_vertex >= n {
        return Err(GraphError::VertexOutOfRange(base_vertex, n).into());
    }
    let (q, m) = (x.q(), x.m());
    let params = certified_params(x)?;
    if params.least_eigenvalue() != Some(-(m as i64)) || params.k != (m * (q - 1)) as usize {
        return Err(EkrError::UnexpectedSpectrum { expected: -(m as i64) });
    }

    let mut by_coset: BTreeMap<CosetIndex, Vec<CanonicalClique>> = BTreeMap::new();
    for c in canonical_cliques_with(x, sel) {
        by_coset.entry(c.coset).or_default().push(c);
    }
    let classes: Vec<CliqueClass> = by_coset
        .into_iter()
        .map(|(coset, cliques)| {
            let (head, rest): (Vec<_>, Vec<_>) = cliques.into_iter().partition(|c| c.vertices.contains(base_vertex));
            let head = head.into_iter().next().expect("each class partitions the vertex set");
            CliqueClass { coset, head, rest }
        })
        .collect();
    let mut basis = EkrBasis { base_vertex, q, m, classes, rank: 0 };
    let theta = basis.theta();

    let gs = basis.g_family(n);
    let fs = basis.f_family(n);
    for (r, class) in gs.iter().enumerate() {
        for (i, gv) in class.iter().enumerate() {
            check_eigen_i64(g, gv, theta, || format!("g[{r}][{i}]"))?;
        }
        let total: Vec<i64> = (0..n).map(|v| class.iter().map(|gv| gv[v]).sum()).collect();
        if total.iter().any(|&t| t != 0) {
            return Err(EkrError::IdentityFailed(format!("sum of g over class {r} is nonzero")));
        }
        for (i, fv) in fs[r].iter().enumerate() {
            check_eigen_i64(g, fv, theta, || format!("f[{r}][{}]", i + 1))?;
            let q = q as i64;
            if (0..n).any(|v| q * fv[v] != class[0][v] - class[i + 1][v]) {
                return Err(EkrError::IdentityFailed(format!("f[{r}][{}] != (g1 - gi)/q", i + 1)));
            }
        }
    }
    for (r1, c1) in gs.iter().enumerate() {
        for c2 in &gs[r1 + 1..] {
            for a in c1 {
                for b in c2 {
                    let d: i64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                    if d != 0 {
                        return Err(EkrError::IdentityFailed("cross-class columns not orthogonal".into()));
                    }
                }
            }
        }
    }

    let expected = (m * (q - 1)) as usize;
    let rank = basis.integer_matrix(n).rank();
    if rank != expected || basis.len() != expected {
        return Err(EkrError::RankDeficient { rank, expected });
    }
    // For m = 1 the eigenvalue q − m coincides with the degree.
    let trivial = usize::from(theta == params.k as i64);
    let mult = params.multiplicity(theta);
    if mult != expected + trivial {
        return Err(EkrError::IdentityFailed(format!(
            "eigenspace dimension {mult} differs from basis size {expected}"
        )));
    }
    basis.rank = rank;
    Ok(basis)
}

/// Coefficients of a maximum clique over the basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub clique: Clique,
    /// One coefficient per basis column, in basis order.
    pub coefficients: Vec<Rational>,
    pub residual_zero: bool,
    /// Coefficients of `χ_C` over all `m·q` canonical characteristic vectors,
    /// classes in order with each head first.
    pub lift: Vec<Rational>,
    pub lift_verified: bool,
}

impl DecompositionReport {
    pub fn zero_count(&self) -> usize {
        self.coefficients.iter().filter(|c| c.is_zero()).count()
    }

    /// Coefficient value (as `num/den`) → count.
    pub fn histogram(&self) -> BTreeMap<String, usize> {
        let mut h = BTreeMap::new();
        for c in &self.coefficients {
            *h.entry(format_rational(c)).or_insert(0) += 1;
        }
        h
    }

    pub fn coefficient_of(&self, basis: &EkrBasis, vertices: &[usize]) -> Option<&Rational> {
        basis.members().position(|c| c.vertices.vertices == vertices).map(|j| &self.coefficients[j])
    }
}

fn check_maximum(x: &PeisertGraph, c: &Clique) -> Result<(), EkrError> {
    let g = x.graph();
    g.is_clique(&c.vertices)?;
    let q = x.q();
    if c.len() != q as usize {
        return Err(EkrError::NotMaximumClique { size: c.len(), q, detail: "" });
    }
    if !g.is_maximal_clique(c) {
        return Err(EkrError::NotMaximumClique { size: c.len(), q, detail: " (extendable)" });
    }
    Ok(())
}

/// Decomposes each clique's balanced characteristic vector over the basis.
pub fn decompose_cliques(
    x: &PeisertGraph,
    basis: &EkrBasis,
    cliques: &[Clique],
) -> Result<Vec<DecompositionReport>, EkrError> {
    let n = x.graph().n();
    let q = basis.q as i64;
    for c in cliques {
        check_maximum(x, c)?;
    }
    let a = basis.integer_matrix(n);
    // q·(χ_C − 1/q) = g_C, so coefficients over g/q columns solve A b = g_C.
    let rhs: Vec<Vec<Rational>> =
        cliques.iter().map(|c| g_vector(n, q, &c.vertices).into_iter().map(rat).collect()).collect();
    let mut out = Vec::with_capacity(cliques.len());
    for ((c, sol), b) in cliques.iter().zip(a.solve_many(&rhs)).zip(&rhs) {
        let coefficients = match sol {
            Solution::Exact(x) => x,
            Solution::Inconsistent { row, residual } => {
                return Err(EkrError::NonZeroResidual { row, residual: format_rational(&residual) })
            }
        };
        let residual_zero = a.mul_vec(&coefficients) == *b;
        if !residual_zero {
            return Err(EkrError::NonZeroResidual { row: 0, residual: "recomputed product differs".into() });
        }
        let (lift, lift_verified) = lift(basis, n, c, &coefficients);
        out.push(DecompositionReport { clique: c.clone(), coefficients, residual_zero, lift, lift_verified });
    }
    Ok(out)
}

pub fn decompose_clique(x: &PeisertGraph, basis: &EkrBasis, c: &Clique) -> Result<DecompositionReport, EkrError> {
    Ok(decompose_cliques(x, basis, std::slice::from_ref(c))?.remove(0))
}

/// `χ_C = Σ b_j χ_{S_j} + ((1 − Σ b_j)/(q·m)) Σ_{all canonical} χ_S`, using
/// that every vertex lies in exactly `m` canonical cliques.
fn lift(basis: &EkrBasis, n: usize, c: &Clique, b: &[Rational]) -> (Vec<Rational>, bool) {
    let total: Rational = b.iter().cloned().sum();
    let shift = (Rational::one() - total) / rat(basis.q as i64 * basis.m as i64);
    let mut coeffs = Vec::new();
    let mut j = 0;
    let mut acc = vec![Rational::zero(); n];
    for class in &basis.classes {
        coeffs.push(shift.clone());
        for &v in &class.head.vertices.vertices {
            acc[v] += &shift;
        }
        for s in &class.rest {
            let w = &b[j] + &shift;
            for &v in &s.vertices.vertices {
                acc[v] += &w;
            }
            coeffs.push(w);
            j += 1;
        }
    }
    let target = indicator(n, &c.vertices);
    let ok = acc.iter().zip(&target).all(|(a, &t)| *a == rat(t));
    (coeffs, ok)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scope", rename_all = "snake_case")]
pub enum AuditScope {
    All,
    /// Cliques through one vertex; sufficient for Cayley graphs since
    /// translations act transitively and map canonical cliques to canonical ones.
    ThroughVertex { vertex: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrictEkrReport {
    pub scope: AuditScope,
    pub omega: usize,
    pub hoffman_bound: Option<usize>,
    pub max_clique_count: usize,
    pub canonical_count: usize,
    pub non_canonical: Vec<Clique>,
    pub strict_ekr: bool,
    /// Non-canonical maximum cliques respect `|C| ≤ (m−1)²`.
    pub size_bound_holds: bool,
}

/// Enumerates maximum cliques exhaustively and classifies each as canonical
/// or not by set equality.
pub fn strict_ekr_audit(
    x: &PeisertGraph,
    canonical: &[CanonicalClique],
    scope: AuditScope,
    budget: Budget,
) -> Result<(StrictEkrReport, Vec<Clique>), EkrError> {
    let mut query = CliqueQuery { budget, ..CliqueQuery::default() };
    if let AuditScope::ThroughVertex { vertex } = scope {
        query.through = Some(vertex);
    }
    let params = certified_params(x)?;
    let hoffman_bound = params.integral_hoffman_bound();
    let cliques = if x.graph().srg().is_some() {
        enumerate_max_cliques(x.graph(), &query)?
    } else {
        let mut g = x.graph().clone();
        g.certify()?;
        enumerate_max_cliques(&g, &query)?
    };
    let known: BTreeSet<&Vec<usize>> = canonical.iter().map(|c| &c.vertices.vertices).collect();
    let (canon, non): (Vec<&Clique>, Vec<&Clique>) = cliques.iter().partition(|c| known.contains(&c.vertices));
    let omega = cliques.first().map_or(0, Clique::len);
    let m = x.m() as usize;
    let size_bound_holds = non.iter().all(|c| c.len() <= (m.max(1) - 1).pow(2));
    let report = StrictEkrReport {
        scope,
        omega,
        hoffman_bound,
        max_clique_count: cliques.len(),
        canonical_count: canon.len(),
        non_canonical: non.iter().map(|&c| c.clone()).collect(),
        strict_ekr: non.is_empty(),
        size_bound_holds,
    };
    Ok((report, cliques))
}

/// Tally of the non-canonical size bound over all maximal cliques through a vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaximalBoundReport {
    pub vertex: usize,
    pub maximal_cliques: usize,
    pub non_canonical: usize,
    pub largest_non_canonical: usize,
    pub bound: usize,
    pub holds: bool,
}

pub fn maximal_clique_bound(
    x: &PeisertGraph,
    sel: &SubarraySelection,
    vertex: usize,
    budget: Budget,
) -> Result<MaximalBoundReport, EkrError> {
    let cliques = maximal_cliques_through(x.graph(), vertex, budget)?;
    let oa = sel.subarray();
    let mut non_canonical = 0;
    let mut largest = 0;
    let mut holds = true;
    let bound = (oa.m().max(1) - 1).pow(2);
    for c in &cliques {
        let mut cols = clique_columns(sel, c);
        // Put the fixed vertex first so it becomes the all-zeros column.
        let pos = c.vertices.iter().position(|&v| v == vertex).expect("clique contains vertex");
        cols.swap(0, pos);
        let b = noncanonical_bound(oa, &cols)?;
        if !b.canonical {
            non_canonical += 1;
            largest = largest.max(b.size);
        }
        holds &= b.holds;
    }
    Ok(MaximalBoundReport { vertex, maximal_cliques: cliques.len(), non_canonical, largest_non_canonical: largest, bound, holds })
}

/// The subspace clique `C = ⊕_{j<t} g^j K` and the Peisert-type graph whose
/// connection set is the union of the cosets it meets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterexampleSpec {
    pub q: u32,
    pub k_order: u32,
    pub t: u32,
    pub clique: Clique,
    pub coset_indices: Vec<CosetIndex>,
    pub m: u32,
}

#[derive(Debug, Clone)]
pub struct Counterexample {
    pub spec: CounterexampleSpec,
    pub graph: PeisertGraph,
}

pub fn build_counterexample(ctx: Arc<FieldCtx>, k_order: u64) -> Result<Counterexample, EkrError> {
    let q = ctx.base_order()?;
    let p = ctx.p() as u64;
    let r = ctx.degree() / 2;
    let s = (1..r).find(|&s| p.pow(s) == k_order && r % s == 0);
    let Some(s) = s else {
        return Err(EkrError::NotProperSubfield(k_order));
    };
    let t = r / s;
    let k_elems = ctx.subfield_of_order(k_order)?;
    let gens: Vec<FieldElement> = (0..t).map(|j| ctx.exp(j as u64)).collect();

    let mut members = vec![FieldElement::ZERO];
    for &g in &gens {
        let mut next = Vec::with_capacity(members.len() * k_elems.len());
        for &z in &members {
            for &k in &k_elems {
                next.push(ctx.add(z, ctx.mul(g, k)));
            }
        }
        members = next;
    }
    let mut labels: Vec<usize> = members.iter().map(|z| z.0 as usize).collect();
    labels.sort_unstable();
    labels.dedup();
    if labels.len() != q as usize {
        return Err(EkrError::CounterexampleCheck(format!("|C| = {} instead of {q}", labels.len())));
    }

    let gen_cosets: BTreeSet<CosetIndex> = gens.iter().map(|&g| ctx.coset_index(g)).collect::<Result<_, _>>()?;
    if gen_cosets.len() != t as usize {
        return Err(EkrError::CounterexampleCheck("generators share a coset".into()));
    }
    let indices: BTreeSet<CosetIndex> =
        labels.iter().skip(1).map(|&v| ctx.coset_index(FieldElement(v as u32))).collect::<Result<_, _>>()?;
    let expected_m = (q - 1) / (k_order as u32 - 1);
    if indices.len() != expected_m as usize {
        return Err(EkrError::CounterexampleCheck(format!(
            "C meets {} cosets, expected {expected_m}",
            indices.len()
        )));
    }
    let coset_indices: Vec<CosetIndex> = indices.into_iter().collect();
    let mut graph = build_cayley(Arc::clone(&ctx), &coset_indices)?;
    graph.graph_mut().certify()?;

    let clique = Clique::new(labels);
    graph.graph().is_clique(&clique.vertices)?;
    let hoffman = graph.graph().srg().and_then(SrgParams::integral_hoffman_bound);
    if hoffman != Some(q as usize) {
        return Err(EkrError::CounterexampleCheck(format!("Hoffman bound {hoffman:?} is not q = {q}")));
    }
    if canonical_cliques(&graph)?.iter().any(|c| c.vertices == clique) {
        return Err(EkrError::CanonicalAfterAll);
    }
    let spec = CounterexampleSpec { q, k_order: k_order as u32, t, clique, coset_indices, m: expected_m };
    Ok(Counterexample { spec, graph })
}

/// Serializable view of a decomposition with rationals as `num/den` strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionSummary {
    pub clique: Vec<u32>,
    pub residual_zero: bool,
    pub zero_count: usize,
    pub histogram: BTreeMap<String, usize>,
    pub coefficients: Vec<BasisCoefficient>,
    pub lift_verified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisCoefficient {
    pub coset: u32,
    pub intercept: u32,
    pub vertices: Vec<u32>,
    pub value: String,
}

impl DecompositionReport {
    pub fn summary(&self, basis: &EkrBasis, labels: &[u32]) -> DecompositionSummary {
        DecompositionSummary {
            clique: self.clique.vertices.iter().map(|&v| labels[v]).collect(),
            residual_zero: self.residual_zero,
            zero_count: self.zero_count(),
            histogram: self.histogram(),
            coefficients: basis
                .members()
                .zip(&self.coefficients)
                .map(|(c, b)| BasisCoefficient {
                    coset: c.coset.0,
                    intercept: c.intercept,
                    vertices: c.vertices.vertices.iter().map(|&v| labels[v]).collect(),
                    value: format_rational(b),
                })
                .collect(),
            lift_verified: self.lift_verified,
        }
    }
}

/// Maps vertex sets to canonical-clique positions for fast membership tests.
pub fn canonical_index(canonical: &[CanonicalClique]) -> HashMap<Vec<usize>, usize> {
    canonical.iter().enumerate().map(|(i, c)| (c.vertices.vertices.clone(), i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf81() -> Arc<FieldCtx> {
        Arc::new(FieldCtx::new(3, 4, Some(&[-1, 0, 0, -1, 1])).unwrap())
    }

    fn idx(v: &[u32]) -> Vec<CosetIndex> {
        v.iter().copied().map(CosetIndex).collect()
    }

    fn paley9() -> PeisertGraph {
        let f = Arc::new(FieldCtx::new(3, 2, None).unwrap());
        let mut x = build_cayley(f, &idx(&[0, 1])).unwrap();
        x.graph_mut().certify().unwrap();
        x
    }

    #[test]
    fn canonical_cliques_partition_each_class() {
        let x = paley9();
        let cc = canonical_cliques(&x).unwrap();
        assert_eq!(cc.len(), 6);
        for coset in [0, 1] {
            let mut cover: Vec<usize> =
                cc.iter().filter(|c| c.coset.0 == coset).flat_map(|c| c.vertices.vertices.clone()).collect();
            cover.sort_unstable();
            assert_eq!(cover, (0..9).collect::<Vec<_>>());
        }
        for v in 0..9 {
            assert_eq!(cc.iter().filter(|c| c.vertices.contains(v)).count(), 2);
        }
        for c in &cc {
            assert_eq!(c.vertices.contains(0), c.intercept == 0);
            x.graph().is_clique(&c.vertices.vertices).unwrap();
        }
    }

    #[test]
    fn eigenfunction_examples() {
        let x = paley9();
        let ones = vec![1i64; 9];
        assert!(eigenfunction_check(x.graph(), &ones, &4).unwrap().holds());
        assert!(!eigenfunction_check(x.graph(), &ones, &3).unwrap().holds());
        assert_eq!(eigenfunction_check(x.graph(), &[0i64; 9], &1), Err(EkrError::ZeroVector));
    }

    #[test]
    fn paley9_basis_has_rank_four() {
        let x = paley9();
        let b = build_ekr_basis(&x, 0).unwrap();
        assert_eq!((b.len(), b.rank), (4, 4));
        assert!(b.members().all(|c| !c.vertices.contains(0)));
    }

    #[test]
    fn canonical_head_decomposes_as_minus_one_on_its_class() {
        let x = paley9();
        let b = build_ekr_basis(&x, 0).unwrap();
        let head = b.classes[0].head.vertices.clone();
        let d = decompose_clique(&x, &b, &head).unwrap();
        assert!(d.residual_zero && d.lift_verified);
        let expected: Vec<Rational> = vec![rat(-1), rat(-1), rat(0), rat(0)];
        assert_eq!(d.coefficients, expected);
    }

    #[test]
    fn decomposition_rejects_non_maximum_cliques() {
        let x = paley9();
        let b = build_ekr_basis(&x, 0).unwrap();
        let edge = Clique::new(b.classes[0].head.vertices.vertices[..2].to_vec());
        assert!(matches!(decompose_clique(&x, &b, &edge), Err(EkrError::NotMaximumClique { .. })));
    }

    #[test]
    fn gp_star_81_basis() {
        let f = gf81();
        let mut x = build_cayley(f, &idx(&[0, 1, 2, 3, 4])).unwrap();
        x.graph_mut().certify().unwrap();
        let b = build_ekr_basis(&x, 0).unwrap();
        assert_eq!(b.len(), 40);
        assert_eq!(b.rank, 40);
        let heads: Vec<_> = b.classes.iter().map(|c| c.head.vertices.clone()).collect();
        let ctx = x.ctx();
        let f9 = ctx.subfield_elements().unwrap();
        for (i, h) in heads.iter().enumerate() {
            let a_i = ctx.exp(i as u64);
            let expect = Clique::new(f9.iter().map(|&t| ctx.mul(a_i, t).0 as usize).collect());
            assert_eq!(*h, expect);
        }
    }

    #[test]
    fn counterexample_rejects_bad_subfields() {
        let f = gf81();
        assert_eq!(build_counterexample(f.clone(), 9).unwrap_err(), EkrError::NotProperSubfield(9));
        assert_eq!(build_counterexample(f, 5).unwrap_err(), EkrError::NotProperSubfield(5));
        let prime = Arc::new(FieldCtx::new(5, 2, None).unwrap());
        assert!(matches!(build_counterexample(prime, 5), Err(EkrError::NotProperSubfield(5))));
    }

    #[test]
    fn counterexample_q9() {
        let c = build_counterexample(gf81(), 3).unwrap();
        assert_eq!((c.spec.q, c.spec.m, c.spec.t), (9, 4, 2));
        assert_eq!(c.spec.coset_indices.len(), 4);
        assert!(c.spec.coset_indices.contains(&CosetIndex(0)));
        // sharpness: q = 9 = (m − 1)²
        assert_eq!((c.spec.m - 1).pow(2), c.spec.q);
    }
}
