//! Peisert-type Cayley graphs `Cay(F_{q²}, S)` where `S` is a union of
//! `m ≤ q` cosets of `F_q^*` including `F_q^*` itself.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{CosetIndex, FieldCtx, FieldElement, FieldError};
use crate::graph::Graph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PeisertError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("connection set must contain the base coset F_q^* (index 0)")]
    MissingBaseCoset,
    #[error("{m} cosets requested but at most q = {q} are allowed")]
    TooManyCosets { m: usize, q: u32 },
    #[error("coset index {index} out of range [0, {q}]")]
    IndexOutOfRange { index: u32, q: u32 },
    #[error("divisor {d} is not valid for family {family} at q = {q}")]
    BadDivisor { family: Family, d: u32, q: u32 },
    #[error("family {family} needs {requirement} (p = {p}, q = {q})")]
    WrongCharacteristicResidue { family: Family, requirement: &'static str, p: u32, q: u32 },
    #[error("coset indices {indices:?} do not reproduce the {family} connection set")]
    VerificationFailed { family: Family, indices: Vec<u32> },
    #[error("unknown family {0:?} (expected paley, peisert, gp or gpstar)")]
    UnknownFamily(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Paley,
    Peisert,
    Gp,
    Gpstar,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Paley => "paley",
            Family::Peisert => "peisert",
            Family::Gp => "gp",
            Family::Gpstar => "gpstar",
        })
    }
}

impl FromStr for Family {
    type Err = PeisertError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "paley" => Ok(Family::Paley),
            "peisert" => Ok(Family::Peisert),
            "gp" => Ok(Family::Gp),
            "gpstar" | "gp*" => Ok(Family::Gpstar),
            other => Err(PeisertError::UnknownFamily(other.to_string())),
        }
    }
}

/// Normalises an index list: sorted, deduplicated, range-checked.
fn normalise(indices: &[CosetIndex], q: u32) -> Result<Vec<CosetIndex>, PeisertError> {
    let set: BTreeSet<CosetIndex> = indices.iter().copied().collect();
    if let Some(bad) = set.iter().find(|c| c.0 > q) {
        return Err(PeisertError::IndexOutOfRange { index: bad.0, q });
    }
    Ok(set.into_iter().collect())
}

/// Membership table over labels for the union of the given cosets.
fn connection_table(ctx: &FieldCtx, indices: &[CosetIndex]) -> Result<Vec<bool>, FieldError> {
    let wanted: BTreeSet<CosetIndex> = indices.iter().copied().collect();
    let mut table = vec![false; ctx.order() as usize];
    for x in ctx.elements().skip(1) {
        table[x.0 as usize] = wanted.contains(&ctx.coset_index(x)?);
    }
    Ok(table)
}

/// Cayley graph on `F_{q²}` whose connection set is the union of the given
/// cosets; no Peisert-type restrictions. Vertex `v` is the element with label `v`.
pub fn cayley_from_cosets(ctx: &FieldCtx, indices: &[CosetIndex]) -> Result<Graph, PeisertError> {
    let q = ctx.base_order()?;
    let indices = normalise(indices, q)?;
    let table = connection_table(ctx, &indices)?;
    let n = ctx.order() as usize;
    let g = Graph::from_fn(n, |u, v| table[ctx.sub(FieldElement(u as u32), FieldElement(v as u32)).0 as usize]);
    Ok(g)
}

/// A Peisert-type graph together with the field and coset data it was built from.
#[derive(Debug, Clone)]
pub struct PeisertGraph {
    ctx: Arc<FieldCtx>,
    q: u32,
    indices: Vec<CosetIndex>,
    graph: Graph,
}

impl PeisertGraph {
    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn ctx_arc(&self) -> Arc<FieldCtx> {
        Arc::clone(&self.ctx)
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Number of cosets in the connection set.
    pub fn m(&self) -> u32 {
        self.indices.len() as u32
    }

    pub fn indices(&self) -> &[CosetIndex] {
        &self.indices
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn graph_mut(&mut self) -> &mut Graph {
        &mut self.graph
    }

    pub fn vertex(&self, x: FieldElement) -> usize {
        x.0 as usize
    }

    pub fn element(&self, v: usize) -> FieldElement {
        FieldElement(v as u32)
    }

    /// Expected `(n, k, λ, μ)` for a graph of this type.
    pub fn expected_parameters(&self) -> (usize, usize, usize, usize) {
        let (m, q) = (self.m() as usize, self.q as usize);
        (q * q, m * (q - 1), (m - 1) * (m.max(2) - 2) + q - 2, m * (m - 1))
    }
}

/// Builds the Peisert-type graph of the given coset indices.
pub fn build_cayley(ctx: Arc<FieldCtx>, indices: &[CosetIndex]) -> Result<PeisertGraph, PeisertError> {
    let q = ctx.base_order()?;
    let indices = normalise(indices, q)?;
    if indices.first() != Some(&CosetIndex(0)) {
        return Err(PeisertError::MissingBaseCoset);
    }
    if indices.len() > q as usize {
        return Err(PeisertError::TooManyCosets { m: indices.len(), q });
    }
    let graph = cayley_from_cosets(&ctx, &indices)?;
    graph.validate().expect("-1 lies in F_q^*, so the connection set is symmetric");
    Ok(PeisertGraph { ctx, q, indices, graph })
}

/// Coset indices of a named family, checked element by element against the
/// family's defining connection set.
pub fn family(ctx: &FieldCtx, name: Family, d: Option<u32>) -> Result<Vec<CosetIndex>, PeisertError> {
    let q = ctx.base_order()?;
    let p = ctx.p();
    let order = ctx.order();
    let bad_divisor = |d: u32| PeisertError::BadDivisor { family: name, d, q };

    let (indices, defining): (Vec<u32>, Box<dyn Fn(FieldElement) -> bool>) = match name {
        Family::Paley => {
            let squares: BTreeSet<FieldElement> = ctx.elements().skip(1).map(|x| ctx.mul(x, x)).collect();
            ((0..=q).filter(|i| i % 2 == 0).collect(), Box::new(move |x| squares.contains(&x)))
        }
        Family::Peisert => {
            if p % 4 != 3 {
                return Err(PeisertError::WrongCharacteristicResidue {
                    family: name,
                    requirement: "p ≡ 3 (mod 4)",
                    p,
                    q,
                });
            }
            if q % 4 != 3 {
                return Err(PeisertError::WrongCharacteristicResidue {
                    family: name,
                    requirement: "q ≡ 3 (mod 4)",
                    p,
                    q,
                });
            }
            (
                (0..=q).filter(|i| i % 4 <= 1).collect(),
                Box::new(move |x| ctx.dlog(x).is_ok_and(|j| j % 4 <= 1)),
            )
        }
        Family::Gp => {
            let d = d.ok_or(bad_divisor(0))?;
            if d <= 1 || (q + 1) % d != 0 {
                return Err(bad_divisor(d));
            }
            let powers: BTreeSet<FieldElement> =
                ctx.elements().skip(1).map(|x| ctx.pow(x, d as u64)).collect();
            ((0..=q).filter(|i| i % d == 0).collect(), Box::new(move |x| powers.contains(&x)))
        }
        Family::Gpstar => {
            let d = d.ok_or(bad_divisor(0))?;
            if d == 0 || d % 2 != 0 || (q + 1) % d != 0 || (order - 1) % (2 * d) != 0 {
                return Err(bad_divisor(d));
            }
            (
                (0..=q).filter(|i| i % d < d / 2).collect(),
                Box::new(move |x| ctx.dlog(x).is_ok_and(|j| j % d < d / 2)),
            )
        }
    };

    let indices: Vec<CosetIndex> = indices.into_iter().map(CosetIndex).collect();
    let table = connection_table(ctx, &indices)?;
    let reproduced = ctx.elements().skip(1).all(|x| table[x.0 as usize] == defining(x));
    if !reproduced {
        return Err(PeisertError::VerificationFailed {
            family: name,
            indices: indices.iter().map(|c| c.0).collect(),
        });
    }
    Ok(indices)
}

/// The plane-identification element: least label in the least coset index
/// not used by the connection set.
pub fn default_alpha(ctx: &FieldCtx, indices: &[CosetIndex]) -> Result<Option<FieldElement>, FieldError> {
    let q = ctx.base_order()?;
    let used: BTreeSet<CosetIndex> = indices.iter().copied().collect();
    let Some(free) = (0..=q).map(CosetIndex).find(|c| !used.contains(c)) else {
        return Ok(None);
    };
    for x in ctx.elements().skip(1) {
        if ctx.coset_index(x)? == free {
            return Ok(Some(x));
        }
    }
    unreachable!("every coset is nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::srg_certify;

    fn ctx(p: u64, r: u32) -> Arc<FieldCtx> {
        Arc::new(FieldCtx::new(p, r, None).unwrap())
    }

    fn gf81() -> Arc<FieldCtx> {
        Arc::new(FieldCtx::new(3, 4, Some(&[-1, 0, 0, -1, 1])).unwrap())
    }

    fn idx(v: &[u32]) -> Vec<CosetIndex> {
        v.iter().copied().map(CosetIndex).collect()
    }

    #[test]
    fn paley9_from_two_cosets() {
        let x = build_cayley(ctx(3, 2), &idx(&[0, 1])).unwrap();
        let p = srg_certify(x.graph()).unwrap();
        assert_eq!((p.n, p.k, p.lambda, p.mu), (9, 4, 1, Some(2)));
    }

    #[test]
    fn gp_star_81_10() {
        let f = gf81();
        let indices = family(&f, Family::Gpstar, Some(10)).unwrap();
        assert_eq!(indices, idx(&[0, 1, 2, 3, 4]));
        let x = build_cayley(f, &indices).unwrap();
        assert_eq!(x.graph().n(), 81);
        assert_eq!(x.graph().degree(0), 40);
    }

    #[test]
    fn single_base_coset_gives_disjoint_triangles() {
        let x = build_cayley(ctx(3, 2), &idx(&[0])).unwrap();
        let p = srg_certify(x.graph()).unwrap();
        assert_eq!((p.k, p.lambda, p.mu), (2, 1, Some(0)));
    }

    #[test]
    fn builder_errors() {
        let f = ctx(3, 2);
        assert_eq!(build_cayley(f.clone(), &idx(&[1, 2])).unwrap_err(), PeisertError::MissingBaseCoset);
        assert_eq!(
            build_cayley(f.clone(), &idx(&[0, 1, 2, 3])).unwrap_err(),
            PeisertError::TooManyCosets { m: 4, q: 3 }
        );
        assert_eq!(
            build_cayley(f, &idx(&[0, 7])).unwrap_err(),
            PeisertError::IndexOutOfRange { index: 7, q: 3 }
        );
    }

    #[test]
    fn gp_25_2_is_paley() {
        let f = ctx(5, 2);
        let gp = family(&f, Family::Gp, Some(2)).unwrap();
        assert_eq!(gp, idx(&[0, 2, 4]));
        assert_eq!(family(&f, Family::Paley, None).unwrap(), gp);
        // Oracle: squares of GF(25) by exhaustion.
        let squares: BTreeSet<u32> = f.elements().skip(1).map(|x| f.mul(x, x).0).collect();
        let union: BTreeSet<u32> =
            f.elements().skip(1).filter(|&x| f.coset_index(x).unwrap().0 % 2 == 0).map(|x| x.0).collect();
        assert_eq!(squares, union);
    }

    #[test]
    fn gp_with_full_divisor_is_base_coset() {
        let f = ctx(3, 2);
        assert_eq!(family(&f, Family::Gp, Some(4)).unwrap(), idx(&[0]));
    }

    #[test]
    fn family_preconditions() {
        let f = ctx(3, 4);
        assert!(matches!(family(&f, Family::Gp, Some(3)), Err(PeisertError::BadDivisor { .. })));
        assert!(matches!(family(&f, Family::Gpstar, Some(5)), Err(PeisertError::BadDivisor { .. })));
        assert!(matches!(
            family(&f, Family::Peisert, None),
            Err(PeisertError::WrongCharacteristicResidue { .. })
        ));
        assert!(matches!(
            family(&ctx(5, 2), Family::Peisert, None),
            Err(PeisertError::WrongCharacteristicResidue { .. })
        ));
        assert_eq!(family(&ctx(7, 2), Family::Peisert, None).unwrap(), idx(&[0, 1, 4, 5]));
    }

    #[test]
    fn alpha_lies_in_least_free_coset() {
        let f = gf81();
        let a = default_alpha(&f, &idx(&[0, 1, 2, 3, 4])).unwrap().unwrap();
        assert_eq!(f.coset_index(a).unwrap(), CosetIndex(5));
        assert!(default_alpha(&f, &idx(&(0..10).collect::<Vec<_>>())).unwrap().is_none());
    }
}
