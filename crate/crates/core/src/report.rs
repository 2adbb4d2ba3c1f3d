//! Batch drivers behind the CLI. Reports hold no timings, so equal configs
//! serialize to equal bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::budget::Budget;
use crate::clique::{enumerate_max_cliques, CliqueQuery};
use crate::ekr::{
    build_counterexample, build_ekr_basis_with, canonical_cliques_with, decompose_cliques, maximal_clique_bound,
    strict_ekr_audit, AuditScope, DecompositionSummary, EkrError, MaximalBoundReport, StrictEkrReport,
};
use crate::field::{CosetIndex, FieldCtx, FieldElement, FieldError};
use crate::graph::{clique_regularity, verify_coloring, Clique, ColoringCheck, GraphError, Regularity, SrgParams};
use crate::hadamard::{build_whd, HadamardError};
use crate::linalg::{format_rational, ratio};
use crate::oa::{canonical_correspondence, unused_slope_coloring, verify_isomorphism, OaError, SubarraySelection};
use crate::peisert::{build_cayley, family, Family, PeisertError, PeisertGraph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Peisert(#[from] PeisertError),
    #[error(transparent)]
    Oa(#[from] OaError),
    #[error(transparent)]
    Ekr(#[from] EkrError),
    #[error(transparent)]
    Hadamard(#[from] HadamardError),
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error("invalid input: {0}")]
    Input(String),
}

impl Error {
    pub fn is_timeout(&self) -> bool {
        matches!(
            self,
            Error::Graph(GraphError::Timeout(_))
                | Error::Ekr(EkrError::Graph(GraphError::Timeout(_)))
        )
    }

    fn is_input(&self) -> bool {
        use PeisertError as P;
        match self {
            Error::Input(_) | Error::Field(_) => true,
            Error::Peisert(p) => matches!(
                p,
                P::Field(_)
                    | P::MissingBaseCoset
                    | P::TooManyCosets { .. }
                    | P::IndexOutOfRange { .. }
                    | P::BadDivisor { .. }
                    | P::WrongCharacteristicResidue { .. }
                    | P::UnknownFamily(_)
            ),
            Error::Ekr(EkrError::NotProperSubfield(_) | EkrError::Field(_)) => true,
            Error::Hadamard(HadamardError::Csv(_) | HadamardError::NotSquare { .. }) => true,
            Error::Graph(GraphError::Dimacs { .. }) => true,
            _ => false,
        }
    }

    /// 1 assertion failure, 2 budget exhausted, 3 bad input.
    pub fn exit_code(&self) -> i32 {
        if self.is_timeout() {
            2
        } else if self.is_input() {
            3
        } else {
            1
        }
    }
}

/// Everything needed to rerun a report; embedded verbatim in it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cosets: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subfield: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_list: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_per_q: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_secs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        RunConfig { command: command.to_string(), ..RunConfig::default() }
    }

    pub fn budget(&self) -> Budget {
        self.budget_secs.map_or_else(Budget::default, Budget::seconds)
    }
}

/// Splits a prime power into `(p, e)`.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let (mut rest, mut e) = (q, 0);
    while rest % p == 0 {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

/// `F_{q²}` with the default modulus.
pub fn field_for_q(q: u64) -> Result<Arc<FieldCtx>, Error> {
    let (p, e) = prime_power(q).ok_or_else(|| Error::Input(format!("{q} is not a prime power")))?;
    Ok(Arc::new(FieldCtx::new(p, 2 * e, None)?))
}

/// A Peisert-type graph with its certificate attached and its OA selection.
pub fn build_certified(ctx: Arc<FieldCtx>, indices: &[CosetIndex]) -> Result<(PeisertGraph, SubarraySelection), Error> {
    let mut x = build_cayley(Arc::clone(&ctx), indices)?;
    x.graph_mut().certify()?;
    let sel = SubarraySelection::new(ctx, x.indices())?;
    Ok((x, sel))
}

/// `c0 + c1·a + c2·a² + …` with small coefficients, highest power first.
pub fn poly_form(ctx: &FieldCtx, x: FieldElement) -> String {
    let coords = ctx.coords(x);
    let mut terms = Vec::new();
    for (k, &c) in coords.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let coef = if c == 1 && k > 0 { String::new() } else { c.to_string() };
        terms.push(match k {
            0 => coef,
            1 => format!("{coef}a"),
            _ => format!("{coef}a^{k}"),
        });
    }
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join("+")
    }
}

fn span(ctx: &FieldCtx, coefficients: &[FieldElement], gens: &[FieldElement]) -> Clique {
    let mut members = vec![FieldElement::ZERO];
    for &g in gens {
        members = members
            .iter()
            .flat_map(|&z| coefficients.iter().map(move |&k| (z, k)))
            .map(|(z, k)| ctx.add(z, ctx.mul(g, k)))
            .collect();
    }
    Clique::new(members.into_iter().map(|z| z.0 as usize).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.to_string(), pass, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedClique {
    pub name: String,
    pub canonical: bool,
    pub vertices: Vec<u32>,
}

/// Outcome of the order-81 reproduction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStudyReport {
    pub config: RunConfig,
    pub pinned_modulus: bool,
    pub indices: Vec<u32>,
    pub omega: usize,
    pub hoffman_bound: Option<usize>,
    pub cliques_through_zero: Vec<NamedClique>,
    pub canonical_count: usize,
    pub non_canonical_count: usize,
    pub decomposed: String,
    pub decomposition: DecompositionSummary,
    /// Histograms for every non-canonical clique through 0, in clique order.
    pub non_canonical_histograms: Vec<BTreeMap<String, usize>>,
    pub table_csv: String,
    /// Whether each cell `sF_9 + t` of the reference table carries the
    /// reference value. Only meaningful for the pinned modulus.
    pub table_positional_match: Option<bool>,
    pub table_note: String,
    pub checks: Vec<Check>,
    pub pass: bool,
}

pub const CASE_STUDY_MODULUS: [i64; 5] = [-1, 0, 0, -1, 1];

/// Reference layout: for each column `s = a^0..a^4`, the eight intercepts `t`
/// as coordinates over `{1, a, a²}`; rows 3..8 of every column except `a²`
/// carry `-1/3`, all others `0`.
const TABLE_T: [[[u32; 3]; 8]; 5] = [
    [[0, 1, 0], [0, 2, 0], [0, 0, 1], [0, 0, 2], [0, 1, 1], [0, 2, 1], [0, 1, 2], [0, 2, 2]],
    [[0, 0, 1], [0, 0, 2], [1, 0, 0], [2, 0, 0], [1, 0, 1], [2, 0, 1], [1, 0, 2], [2, 0, 2]],
    [[1, 0, 0], [2, 0, 0], [0, 1, 0], [0, 2, 0], [1, 1, 0], [2, 1, 0], [1, 2, 0], [2, 2, 0]],
    [[0, 1, 0], [0, 2, 0], [1, 0, 0], [2, 0, 0], [1, 1, 0], [2, 1, 0], [1, 2, 0], [2, 2, 0]],
    [[0, 1, 0], [0, 2, 0], [1, 0, 0], [2, 0, 0], [1, 1, 0], [2, 1, 0], [1, 2, 0], [2, 2, 0]],
];

fn table_shaded(s: usize, row: usize) -> bool {
    s != 2 && row >= 2
}

/// Reproduces the GP*(81,10) analysis. With the default config the field is
/// pinned to `x⁴ − x³ − 1`; passing another modulus reruns the
/// presentation-independent counts only.
pub fn reproduce_case_study(config: &RunConfig) -> Result<CaseStudyReport, Error> {
    let budget = config.budget();
    let modulus = config.modulus.clone().unwrap_or_else(|| CASE_STUDY_MODULUS.to_vec());
    let pinned = modulus == CASE_STUDY_MODULUS;
    let ctx = Arc::new(FieldCtx::new(3, 4, Some(&modulus))?);
    let mut checks = Vec::new();
    let a = ctx.generator();
    let x_is_generator = a.0 == ctx.p();
    checks.push(Check::new("generator a is the class of x", x_is_generator, ctx.power_form(a)));
    if !x_is_generator {
        return Err(Error::Input("the case study needs a modulus with x primitive".into()));
    }

    let indices = family(&ctx, Family::Gpstar, Some(10))?;
    let idx: Vec<u32> = indices.iter().map(|c| c.0).collect();
    checks.push(Check::new("GP*(81,10) uses cosets 0..4", idx == [0, 1, 2, 3, 4], format!("{idx:?}")));
    let (x, sel) = build_certified(Arc::clone(&ctx), &indices)?;
    let params = x.graph().srg().cloned().expect("certified");
    checks.push(Check::new(
        "SRG parameters (81,40,19,20)",
        (params.n, params.k, params.lambda, params.mu) == (81, 40, 19, Some(20)),
        format!("({}, {}, {}, {:?})", params.n, params.k, params.lambda, params.mu),
    ));

    let through0 = enumerate_max_cliques(x.graph(), &CliqueQuery::default().through(0).budget(budget))?;
    let omega = through0.first().map_or(0, Clique::len);
    let hoffman = params.integral_hoffman_bound();
    checks.push(Check::new("omega = 9", omega == 9 && hoffman == Some(9), format!("omega {omega}, bound {hoffman:?}")));
    checks.push(Check::new("9 maximum cliques through 0", through0.len() == 9, through0.len().to_string()));

    let canonical = canonical_cliques_with(&x, &sel);
    let canonical_sets: BTreeSet<&Clique> = canonical.iter().map(|c| &c.vertices).collect();
    let f9 = ctx.subfield_elements()?;
    let f3 = ctx.subfield_of_order(3)?;
    let mut expected: Vec<(String, Clique, bool)> = (0..5)
        .map(|i| {
            let s = ctx.exp(i);
            let name = match i {
                0 => "F_9".to_string(),
                1 => "aF_9".to_string(),
                _ => format!("a^{i}F_9"),
            };
            (name, Clique::new(f9.iter().map(|&t| ctx.mul(s, t).0 as usize).collect()), true)
        })
        .collect();
    for (i, j) in [(0u64, 3u64), (1, 10), (11, 20), (30, 33)] {
        let name = format!("<a^{i},a^{j}>");
        expected.push((name, span(&ctx, &f3, &[ctx.exp(i), ctx.exp(j)]), false));
    }

    let found: BTreeSet<&Clique> = through0.iter().collect();
    let canonical_found: Vec<&Clique> = through0.iter().filter(|c| canonical_sets.contains(c)).collect();
    let non_canonical_found: Vec<&Clique> = through0.iter().filter(|c| !canonical_sets.contains(c)).collect();
    checks.push(Check::new(
        "5 canonical and 4 non-canonical",
        canonical_found.len() == 5 && non_canonical_found.len() == 4,
        format!("{} canonical, {} non-canonical", canonical_found.len(), non_canonical_found.len()),
    ));
    let canonical_by_name = expected
        .iter()
        .filter(|e| e.2)
        .all(|(_, c, _)| found.contains(c) && canonical_sets.contains(c));
    checks.push(Check::new("canonical cliques are a^iF_9, i < 5", canonical_by_name, ""));
    let mut named = Vec::new();
    if pinned {
        let missing: Vec<&str> = expected
            .iter()
            .filter(|(_, c, canon)| !found.contains(c) || canonical_sets.contains(c) != *canon)
            .map(|(n, _, _)| n.as_str())
            .collect();
        checks.push(Check::new(
            "non-canonical cliques are the four listed F_3-spans",
            missing.is_empty(),
            if missing.is_empty() { String::new() } else { format!("missing or misclassified: {missing:?}") },
        ));
        for (name, c, canon) in &expected {
            named.push(NamedClique { name: name.clone(), canonical: *canon, vertices: labels(c) });
        }
    } else {
        for c in &through0 {
            let canon = canonical_sets.contains(c);
            let name = expected.iter().find(|e| &e.1 == c).map_or_else(|| "-".to_string(), |e| e.0.clone());
            named.push(NamedClique { name, canonical: canon, vertices: labels(c) });
        }
    }

    let basis = build_ekr_basis_with(&x, &sel, 0)?;
    checks.push(Check::new("basis has 40 columns of rank 40", basis.len() == 40 && basis.rank == 40, ""));
    let non_canon: Vec<Clique> = non_canonical_found.iter().map(|&c| c.clone()).collect();
    let reports = decompose_cliques(&x, &basis, &non_canon)?;
    let histograms: Vec<BTreeMap<String, usize>> = reports.iter().map(|r| r.histogram()).collect();
    let reference_hist = BTreeMap::from([("0".to_string(), 16), ("-1/3".to_string(), 24)]);

    let c2 = span(&ctx, &f3, &[ctx.exp(1), ctx.exp(10)]);
    let (decomposed, target) = if pinned {
        ("<a^1,a^10>".to_string(), c2)
    } else {
        let c = non_canon.get(1).or(non_canon.first()).cloned().ok_or_else(|| {
            Error::Assertion("no non-canonical clique through 0 to decompose".into())
        })?;
        ("second non-canonical clique through 0".to_string(), c)
    };
    let report = match reports.iter().find(|r| r.clique == target) {
        Some(r) => r.clone(),
        None => crate::ekr::decompose_clique(&x, &basis, &target)?,
    };
    let hist = report.histogram();
    checks.push(Check::new(
        "decomposition residual is zero",
        report.residual_zero && report.lift_verified,
        "",
    ));
    checks.push(Check::new("histogram {0: 16, -1/3: 24}", hist == reference_hist, format!("{hist:?}")));

    let mut table_rows = vec![vec![String::new(); 5]; 8];
    let mut positional = true;
    for (s, column) in TABLE_T.iter().enumerate() {
        let sval = ctx.exp(s as u64);
        for (row, t) in column.iter().enumerate() {
            let t = ctx.from_coords(&[t[0], t[1], t[2], 0]);
            let cell: Vec<usize> = f9.iter().map(|&u| ctx.add(ctx.mul(sval, u), t).0 as usize).collect();
            let cell = Clique::new(cell);
            let coef = report.coefficient_of(&basis, &cell.vertices);
            let expect = if table_shaded(s, row) { ratio(-1, 3) } else { ratio(0, 1) };
            positional &= coef == Some(&expect);
            let shown = coef.map_or_else(|| "?".to_string(), format_rational);
            table_rows[row][s] = format!("{}:{shown}", poly_form(&ctx, t));
        }
    }
    let mut table_csv = String::from("row,1,a,a^2,a^3,a^4\n");
    for (i, row) in table_rows.iter().enumerate() {
        table_csv.push_str(&format!("{},{}\n", i + 1, row.join(",")));
    }
    let table_note = if pinned {
        "cells are sF_9 + t with value of its basis coefficient".to_string()
    } else {
        "presentation-dependent: intercept labels depend on the modulus".to_string()
    };

    let pass = checks.iter().all(|c| c.pass);
    let out = CaseStudyReport {
        config: config.clone(),
        pinned_modulus: pinned,
        indices: idx,
        omega,
        hoffman_bound: hoffman,
        cliques_through_zero: named,
        canonical_count: canonical_found.len(),
        non_canonical_count: non_canonical_found.len(),
        decomposed,
        decomposition: report.summary(&basis, x.graph().labels()),
        non_canonical_histograms: histograms,
        table_csv,
        table_positional_match: pinned.then_some(positional),
        table_note,
        checks,
        pass,
    };
    if !out.pass {
        let diff: Vec<String> = out
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{} (got {})", c.name, c.detail))
            .collect();
        return Err(Error::Assertion(diff.join("; ")));
    }
    Ok(out)
}

fn labels(c: &Clique) -> Vec<u32> {
    c.vertices.iter().map(|&v| v as u32).collect()
}

/// Which graphs the survey visits for one `q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyGraph {
    pub q: u32,
    pub indices: Vec<u32>,
    pub origin: String,
}

/// At `q = 3` every index set with `0 ∈ I` and `|I| ≤ q`; otherwise every
/// available family plus seeded random sets with `m ≤ (q+1)/2` until
/// `samples` distinct sets are reached. `q = 9` also gets the subspace
/// counterexample of type (4, 9).
pub fn survey_plan(q_list: &[u32], samples: usize, seed: u64) -> Result<Vec<SurveyGraph>, Error> {
    let mut plan = Vec::new();
    for &q in q_list {
        let ctx = field_for_q(q as u64)?;
        let mut seen: BTreeMap<Vec<u32>, String> = BTreeMap::new();
        let fams = [
            (Family::Paley, None),
            (Family::Peisert, None),
        ]
        .into_iter()
        .chain((2..=q + 1).flat_map(|d| [(Family::Gp, Some(d)), (Family::Gpstar, Some(d))]));
        for (fam, d) in fams {
            if let Ok(idx) = family(&ctx, fam, d) {
                let idx: Vec<u32> = idx.iter().map(|c| c.0).collect();
                let name = match d {
                    Some(d) => format!("{fam} d={d}"),
                    None => fam.to_string(),
                };
                seen.entry(idx).or_insert(name);
            }
        }
        if q == 3 {
            for mask in 0u32..8 {
                let idx: Vec<u32> = std::iter::once(0).chain((1..=3).filter(|i| mask >> (i - 1) & 1 == 1)).collect();
                if idx.len() <= q as usize {
                    seen.entry(idx).or_insert_with(|| "exhaustive".to_string());
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ q as u64);
            let cap = (q as usize + 1) / 2;
            let others: Vec<u32> = (1..=q).collect();
            let mut attempts = 0;
            while seen.len() < samples && attempts < 10_000 {
                attempts += 1;
                let m = rng.gen_range(1..=cap);
                let mut idx: Vec<u32> = others.choose_multiple(&mut rng, m - 1).copied().collect();
                idx.push(0);
                idx.sort_unstable();
                seen.entry(idx).or_insert_with(|| "sampled".to_string());
            }
        }
        if q == 9 {
            let c = build_counterexample(Arc::clone(&ctx), 3)?;
            let idx: Vec<u32> = c.spec.coset_indices.iter().map(|c| c.0).collect();
            seen.entry(idx).or_insert_with(|| "counterexample K=F_3".to_string());
        }
        plan.extend(seen.into_iter().map(|(indices, origin)| SurveyGraph { q, indices, origin }));
    }
    Ok(plan)
}

/// Every certificate for one graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphAudit {
    pub q: u32,
    pub m: u32,
    pub indices: Vec<u32>,
    pub origin: String,
    pub srg: Option<SrgParams>,
    pub srg_matches: bool,
    pub isomorphism: bool,
    pub correspondence_matched: usize,
    pub coloring_proper: bool,
    pub chromatic_number_certified: bool,
    pub omega: usize,
    pub max_clique_count: usize,
    pub all_regular: bool,
    pub decomposed: usize,
    pub residuals_zero: bool,
    pub strict_ekr: Option<StrictEkrReport>,
    /// `q > (m−1)²` forces strict-EKR.
    pub threshold_applies: bool,
    pub threshold_consistent: bool,
    pub maximal_bound: Option<MaximalBoundReport>,
    pub eigen_identities: bool,
    pub whd: bool,
    pub whd_tally: BTreeMap<i64, usize>,
    pub whd_tally_matches: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clique_coclique: Option<bool>,
    pub errors: Vec<String>,
    pub pass: bool,
}

fn expected_eigen(q: i64, m: i64) -> BTreeMap<i64, usize> {
    let mut t = BTreeMap::new();
    let k = m * (q - 1);
    for (v, c) in [(k, 1), (q - m, (m * (q - 1)) as usize), (-m, (q * q - 1 - m * (q - 1)) as usize)] {
        if c > 0 {
            *t.entry(v).or_insert(0) += c;
        }
    }
    t
}

/// Runs the full certificate battery on one graph. Failures are recorded,
/// not raised, except budget exhaustion.
pub fn audit_graph(ctx: Arc<FieldCtx>, spec: &SurveyGraph, budget: Budget) -> Result<GraphAudit, Error> {
    let indices: Vec<CosetIndex> = spec.indices.iter().copied().map(CosetIndex).collect();
    let (q, m) = (spec.q, spec.indices.len() as u32);
    let mut a = GraphAudit {
        q,
        m,
        indices: spec.indices.clone(),
        origin: spec.origin.clone(),
        srg: None,
        srg_matches: false,
        isomorphism: false,
        correspondence_matched: 0,
        coloring_proper: false,
        chromatic_number_certified: false,
        omega: 0,
        max_clique_count: 0,
        all_regular: false,
        decomposed: 0,
        residuals_zero: false,
        strict_ekr: None,
        threshold_applies: q > (m - 1).pow(2),
        threshold_consistent: false,
        maximal_bound: None,
        eigen_identities: false,
        whd: false,
        whd_tally: BTreeMap::new(),
        whd_tally_matches: false,
        clique_coclique: None,
        errors: Vec::new(),
        pass: false,
    };
    let (x, sel) = build_certified(Arc::clone(&ctx), &indices)?;
    let g = x.graph();
    let params = g.srg().cloned().expect("certified");
    let (n, k, l, mu) = x.expected_parameters();
    let spectrum: BTreeMap<i64, usize> = params.eigenvalues().iter().map(|e| (e.value, e.multiplicity)).collect();
    a.srg_matches = (params.n, params.k, params.lambda, params.mu) == (n, k, l, Some(mu))
        && spectrum == expected_eigen(q as i64, m as i64);
    a.srg = Some(params.clone());

    macro_rules! record {
        ($e:expr) => {
            match $e {
                Ok(v) => Some(v),
                Err(e) => {
                    let e: Error = e.into();
                    if e.is_timeout() {
                        return Err(e);
                    }
                    a.errors.push(e.to_string());
                    None
                }
            }
        };
    }

    a.isomorphism = record!(verify_isomorphism(&x, &sel)).is_some();
    if let Some(corr) = record!(canonical_correspondence(&sel)) {
        a.correspondence_matched = corr.len();
    }
    if let Some(col) = record!(unused_slope_coloring(&sel)) {
        a.coloring_proper =
            col.num_colors() == q as usize && matches!(verify_coloring(g, &col), Ok(ColoringCheck::Proper));
    }

    let canonical = canonical_cliques_with(&x, &sel);
    if let Some((audit, cliques)) = record!(strict_ekr_audit(&x, &canonical, AuditScope::All, budget)) {
        a.omega = audit.omega;
        a.max_clique_count = audit.max_clique_count;
        a.chromatic_number_certified = a.coloring_proper && audit.omega == q as usize;
        a.all_regular = cliques.iter().all(|c| matches!(clique_regularity(g, c), Ok(Regularity::Regular { .. })));
        a.threshold_consistent = !a.threshold_applies || audit.strict_ekr;
        if let Some(basis) = record!(build_ekr_basis_with(&x, &sel, 0)) {
            a.eigen_identities = true;
            if let Some(reports) = record!(decompose_cliques(&x, &basis, &cliques)) {
                a.decomposed = reports.len();
                a.residuals_zero = reports.iter().all(|r| r.residual_zero && r.lift_verified);
            }
        }
        a.strict_ekr = Some(audit);
    }
    a.maximal_bound = record!(maximal_clique_bound(&x, &sel, 0, budget));

    if let Some(w) = record!(build_whd(&x, &sel)) {
        a.whd = true;
        let mut expect = BTreeMap::new();
        for (v, c) in [(k as i64, 1), (q as i64 - m as i64, (m * (q - 1)) as usize), (-(m as i64), ((q + 1 - m) * (q - 1)) as usize)] {
            if c > 0 {
                *expect.entry(v).or_insert(0) += c;
            }
        }
        a.whd_tally_matches = w.tally == expect && w.tally.values().sum::<usize>() == n;
        a.whd_tally = w.tally;
    }

    if q <= 5 {
        let comp = g.complement();
        let query = CliqueQuery::default().budget(budget);
        if let (Some(cocliques), Some(cliques)) =
            (record!(enumerate_max_cliques(&comp, &query)), record!(enumerate_max_cliques(g, &query)))
        {
            // alpha(X) = q and each maximum coclique is a transversal of the maximum cliques.
            let alpha_is_q = cocliques.first().is_some_and(|s| s.len() == q as usize);
            a.clique_coclique = Some(alpha_is_q && cocliques.iter().all(|s| {
                cliques.iter().all(|c| c.vertices.iter().filter(|&&v| s.contains(v)).count() == 1)
            }));
        }
    }

    let strict_ok = a.strict_ekr.as_ref().is_some_and(|s| s.size_bound_holds);
    a.pass = a.errors.is_empty()
        && a.srg_matches
        && a.isomorphism
        && a.correspondence_matched == (m * q) as usize
        && a.coloring_proper
        && a.chromatic_number_certified
        && a.all_regular
        && a.residuals_zero
        && a.decomposed == a.max_clique_count
        && strict_ok
        && a.threshold_consistent
        && a.maximal_bound.as_ref().is_some_and(|b| b.holds)
        && a.eigen_identities
        && a.whd
        && a.whd_tally_matches
        && a.clique_coclique != Some(false);
    Ok(a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyReport {
    pub config: RunConfig,
    pub graphs: Vec<GraphAudit>,
    /// Number of graphs per q.
    pub coverage: BTreeMap<u32, usize>,
    pub failures: usize,
    pub pass: bool,
}

pub const DEFAULT_SURVEY_SAMPLES: usize = 12;
pub const DEFAULT_SURVEY_SEED: u64 = 2;

pub fn survey(config: &RunConfig) -> Result<SurveyReport, Error> {
    let q_list = config.q_list.clone().unwrap_or_else(|| vec![3, 5, 7, 9]);
    if let Some(&bad) = q_list.iter().find(|&&q| prime_power(q as u64).is_none()) {
        return Err(Error::Input(format!("{bad} is not a prime power")));
    }
    let plan = survey_plan(
        &q_list,
        config.samples_per_q.unwrap_or(DEFAULT_SURVEY_SAMPLES),
        config.seed.unwrap_or(DEFAULT_SURVEY_SEED),
    )?;
    let budget = config.budget();
    let fields: BTreeMap<u32, Arc<FieldCtx>> =
        q_list.iter().map(|&q| Ok((q, field_for_q(q as u64)?))).collect::<Result<_, Error>>()?;
    let graphs: Vec<GraphAudit> = plan
        .par_iter()
        .map(|s| audit_graph(Arc::clone(&fields[&s.q]), s, budget))
        .collect::<Result<_, _>>()?;
    let mut coverage = BTreeMap::new();
    for g in &graphs {
        *coverage.entry(g.q).or_insert(0) += 1;
    }
    let failures = graphs.iter().filter(|g| !g.pass).count();
    Ok(SurveyReport { config: config.clone(), graphs, coverage, failures, pass: failures == 0 })
}

/// Audit of the subspace counterexample through vertex 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub config: RunConfig,
    pub spec: crate::ekr::CounterexampleSpec,
    pub clique_labels: Vec<String>,
    pub is_clique: bool,
    pub is_maximal: bool,
    pub is_maximum: bool,
    pub non_canonical: bool,
    /// Exhaustive audit through 0, absent when the budget ran out.
    pub audit: Option<StrictEkrReport>,
    /// The exhaustive audit timed out and only `C` itself was verified.
    pub downgraded: bool,
    pub strict_ekr: bool,
    pub pass: bool,
}

pub fn counterexample_report(config: &RunConfig, q: u64, k_order: u64) -> Result<CounterexampleReport, Error> {
    let ctx = field_for_q(q)?;
    let c = build_counterexample(Arc::clone(&ctx), k_order)?;
    let x = &c.graph;
    let sel = SubarraySelection::new(Arc::clone(&ctx), x.indices())?;
    let canonical = canonical_cliques_with(x, &sel);
    let clique = &c.spec.clique;
    let is_clique = x.graph().is_clique(&clique.vertices).is_ok();
    let is_maximal = x.graph().is_maximal_clique(clique);
    let is_maximum = x.graph().srg().and_then(SrgParams::integral_hoffman_bound) == Some(clique.len());
    let non_canonical = !canonical.iter().any(|k| &k.vertices == clique);
    let (audit, downgraded) =
        match strict_ekr_audit(x, &canonical, AuditScope::ThroughVertex { vertex: 0 }, config.budget()) {
            Ok((audit, cliques)) => {
                if !cliques.contains(clique) {
                    return Err(Error::Assertion("subspace clique missing from exhaustive enumeration".into()));
                }
                (Some(audit), false)
            }
            Err(EkrError::Graph(GraphError::Timeout(_))) => (None, true),
            Err(e) => return Err(e.into()),
        };
    let strict_ekr = audit.as_ref().map_or(false, |a| a.strict_ekr);
    let pass = is_clique && is_maximal && is_maximum && non_canonical && !strict_ekr;
    Ok(CounterexampleReport {
        config: config.clone(),
        clique_labels: clique.vertices.iter().map(|&v| poly_form(&ctx, FieldElement(v as u32))).collect(),
        spec: c.spec,
        is_clique,
        is_maximal,
        is_maximum,
        non_canonical,
        audit,
        downgraded,
        strict_ekr,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(25), Some((5, 2)));
        assert_eq!(prime_power(7), Some((7, 1)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }

    #[test]
    fn poly_forms() {
        let ctx = FieldCtx::new(3, 4, Some(&CASE_STUDY_MODULUS)).unwrap();
        assert_eq!(poly_form(&ctx, FieldElement(0)), "0");
        assert_eq!(poly_form(&ctx, FieldElement(3 * 2 + 9)), "a^2+2a");
        assert_eq!(poly_form(&ctx, FieldElement(2)), "2");
    }

    #[test]
    fn plan_at_q3_is_exhaustive() {
        let plan = survey_plan(&[3], 12, 1).unwrap();
        assert_eq!(plan.len(), 7);
        assert!(plan.iter().all(|g| g.indices[0] == 0 && g.indices.len() <= 3));
    }

    #[test]
    fn plan_is_deterministic() {
        assert_eq!(survey_plan(&[5, 7], 12, 9).unwrap(), survey_plan(&[5, 7], 12, 9).unwrap());
    }

    #[test]
    fn zero_budget_case_study_times_out() {
        let cfg = RunConfig { budget_secs: Some(0.0), ..RunConfig::new("reproduce-81") };
        let err = reproduce_case_study(&cfg).unwrap_err();
        assert!(err.is_timeout(), "{err:?}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Error::Input("x".into()).exit_code(), 3);
        assert_eq!(Error::Assertion("x".into()).exit_code(), 1);
        assert_eq!(Error::Graph(GraphError::Timeout(1.0)).exit_code(), 2);
    }
}
