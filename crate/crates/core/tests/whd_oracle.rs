use peisert_core::hadamard::{is_weakly_hadamard, CandidateMatrix, WeakHadamardVerdict};
use proptest::prelude::*;

fn admissible(m: &CandidateMatrix, order: &[usize]) -> bool {
    (0..order.len()).all(|i| (i + 2..order.len()).all(|j| m.column_dot(order[i], order[j]) == 0))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn matrix() -> impl Strategy<Value = CandidateMatrix> {
    (1usize..=6).prop_flat_map(|n| {
        // Sparse entries keep a healthy share of orthogonal pairs.
        proptest::collection::vec(prop_oneof![4 => Just(0i64), 1 => Just(1i64), 1 => Just(-1i64)], n * n)
            .prop_map(move |v| CandidateMatrix::from_rows(v.chunks(n).map(<[i64]>::to_vec).collect()).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]
    #[test]
    fn path_criterion_matches_exhaustive_orderings(m in matrix()) {
        let exists = permutations(m.n()).iter().any(|p| admissible(&m, p));
        match is_weakly_hadamard(&m).unwrap() {
            WeakHadamardVerdict::Holds { ordering } => {
                prop_assert!(exists);
                let mut sorted = ordering.clone();
                sorted.sort_unstable();
                prop_assert_eq!(sorted, (0..m.n()).collect::<Vec<_>>());
                prop_assert!(admissible(&m, &ordering));
            }
            WeakHadamardVerdict::Fails { .. } => prop_assert!(!exists),
        }
    }
}
