use std::sync::Arc;

use peisert_core::budget::Budget;
use peisert_core::clique::{enumerate_max_cliques, CliqueQuery};
use peisert_core::ekr::{build_ekr_basis, canonical_cliques, decompose_clique, strict_ekr_audit, AuditScope};
use peisert_core::field::{CosetIndex, FieldCtx};
use peisert_core::graph::{clique_regularity, srg_certify, Clique, Graph, GraphError, Regularity};
use peisert_core::oa::{build_pointline_oa, OrthogonalArray};
use peisert_core::peisert::{build_cayley, default_alpha, family, Family};
use peisert_core::report::{build_certified, reproduce_case_study, survey, RunConfig, CASE_STUDY_MODULUS};

fn idx(v: &[u32]) -> Vec<CosetIndex> {
    v.iter().copied().map(CosetIndex).collect()
}

fn gf81() -> Arc<FieldCtx> {
    Arc::new(FieldCtx::new(3, 4, Some(&CASE_STUDY_MODULUS)).unwrap())
}

#[test]
fn paley_25_is_gp_with_d_2() {
    let f = FieldCtx::new(5, 2, None).unwrap();
    assert_eq!(family(&f, Family::Gp, Some(2)).unwrap(), idx(&[0, 2, 4]));
    assert_eq!(family(&f, Family::Paley, None).unwrap(), idx(&[0, 2, 4]));
}

#[test]
fn gp_star_81_has_81_maximum_cliques_all_regular() {
    let (x, _) = build_certified(gf81(), &idx(&[0, 1, 2, 3, 4])).unwrap();
    let g = x.graph();
    let all = enumerate_max_cliques(g, &CliqueQuery::default()).unwrap();
    assert_eq!(all.len(), 81);
    let seq = enumerate_max_cliques(g, &CliqueQuery::default().sequential()).unwrap();
    assert_eq!(all, seq);
    for c in &all {
        assert_eq!(clique_regularity(g, c).unwrap(), Regularity::Regular { neighbours: 4 });
    }
    let edge = Clique::new(all[0].vertices[..2].to_vec());
    assert!(matches!(clique_regularity(g, &edge), Err(GraphError::NotHoffmanTight { .. })));
}

#[test]
fn subfield_clique_has_m_minus_one_outside_neighbours() {
    for (q, idxs) in [(5u64, vec![0, 1, 3]), (7, vec![0, 2, 5, 6])] {
        let f = Arc::new(FieldCtx::new(q, 2, None).unwrap());
        let (x, _) = build_certified(Arc::clone(&f), &idx(&idxs)).unwrap();
        let fq = Clique::new(f.subfield_elements().unwrap().iter().map(|e| e.0 as usize).collect());
        let m = idxs.len();
        assert_eq!(clique_regularity(x.graph(), &fq).unwrap(), Regularity::Regular { neighbours: m - 1 });
    }
}

#[test]
fn disjoint_triangles_and_complete_graph() {
    let f = Arc::new(FieldCtx::new(3, 2, None).unwrap());
    let x = build_cayley(f, &idx(&[0])).unwrap();
    let p = srg_certify(x.graph()).unwrap();
    assert!(p.disconnected);
    assert_eq!((p.n, p.k, p.lambda, p.mu), (9, 2, 1, Some(0)));
    let k4 = srg_certify(&Graph::complete(4)).unwrap();
    assert_eq!(k4.mu, None);
}

#[test]
fn dimacs_round_trip_keeps_labels() {
    let f = Arc::new(FieldCtx::new(3, 2, None).unwrap());
    let x = build_cayley(f, &idx(&[0, 1])).unwrap();
    let text = x.graph().to_dimacs();
    let back = Graph::from_dimacs(&text).unwrap();
    assert_eq!(back.edges().collect::<Vec<_>>(), x.graph().edges().collect::<Vec<_>>());
    assert_eq!(back.labels(), x.graph().labels());
}

#[test]
fn oa_csv_round_trip() {
    let f = FieldCtx::new(5, 2, None).unwrap();
    let alpha = default_alpha(&f, &idx(&[0])).unwrap().unwrap();
    let oa = build_pointline_oa(&f, alpha).unwrap();
    oa.verify().unwrap();
    let back = OrthogonalArray::from_csv(&oa.to_csv()).unwrap();
    assert_eq!(back, oa);
}

#[test]
fn canonical_decompositions_are_minus_one_on_their_class() {
    let f = Arc::new(FieldCtx::new(5, 2, None).unwrap());
    let (x, _) = build_certified(f, &idx(&[0, 2, 4])).unwrap();
    let basis = build_ekr_basis(&x, 0).unwrap();
    for class in &basis.classes {
        let d = decompose_clique(&x, &basis, &class.head.vertices).unwrap();
        for (member, b) in basis.members().zip(&d.coefficients) {
            let expect = if member.coset == class.coset { -1 } else { 0 };
            assert_eq!(*b, num_rational::BigRational::from_integer(expect.into()));
        }
    }
}

#[test]
fn paley_25_is_strict_ekr() {
    let f = Arc::new(FieldCtx::new(5, 2, None).unwrap());
    let (x, _) = build_certified(f, &idx(&[0, 2, 4])).unwrap();
    let canon = canonical_cliques(&x).unwrap();
    let (audit, _) = strict_ekr_audit(&x, &canon, AuditScope::All, Budget::default()).unwrap();
    assert!(audit.strict_ekr);
    assert_eq!(audit.max_clique_count, 15);
}

#[test]
fn zero_budget_never_returns_partial_lists() {
    let (x, _) = build_certified(gf81(), &idx(&[0, 1, 2, 3, 4])).unwrap();
    let q = CliqueQuery::default().budget(Budget::seconds(0.0));
    assert!(matches!(enumerate_max_cliques(x.graph(), &q), Err(GraphError::Timeout(_))));
}

#[test]
fn case_study_under_another_modulus_keeps_counts() {
    let default = FieldCtx::new(3, 4, None).unwrap();
    let modulus: Vec<i64> = default.spec().modulus.iter().map(|&c| c as i64).collect();
    assert_ne!(modulus, CASE_STUDY_MODULUS.to_vec());
    let cfg = RunConfig { modulus: Some(modulus), ..RunConfig::new("reproduce-81") };
    let r = reproduce_case_study(&cfg).unwrap();
    assert!(!r.pinned_modulus);
    assert_eq!((r.canonical_count, r.non_canonical_count), (5, 4));
    assert_eq!(r.decomposition.zero_count, 16);
    assert_eq!(r.table_positional_match, None);
}

#[test]
fn reports_are_byte_identical() {
    let cfg = RunConfig { q_list: Some(vec![3, 5]), seed: Some(7), ..RunConfig::new("survey") };
    let a = serde_json::to_string(&survey(&cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&survey(&cfg).unwrap()).unwrap();
    assert_eq!(a, b);
    let c1 = serde_json::to_string(&reproduce_case_study(&RunConfig::new("reproduce-81")).unwrap()).unwrap();
    let c2 = serde_json::to_string(&reproduce_case_study(&RunConfig::new("reproduce-81")).unwrap()).unwrap();
    assert_eq!(c1, c2);
}
