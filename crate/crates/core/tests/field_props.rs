use peisert_core::field::{FieldCtx, FieldElement};
use proptest::prelude::*;

fn fields() -> Vec<FieldCtx> {
    [(3, 2), (3, 4), (5, 2), (7, 2), (11, 2), (5, 4)]
        .into_iter()
        .map(|(p, r)| FieldCtx::new(p, r, None).unwrap())
        .collect()
}

proptest! {
    #[test]
    fn ring_axioms(which in 0usize..6, a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
        let f = &fields()[which];
        let n = f.order();
        let (a, b, c) = (FieldElement(a % n), FieldElement(b % n), FieldElement(c % n));
        prop_assert_eq!(f.add(a, b), f.add(b, a));
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), FieldElement::ZERO);
        prop_assert_eq!(f.sub(f.add(a, b), b), a);
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
            prop_assert_eq!(f.exp(f.dlog(a).unwrap() as u64), a);
        }
    }

    #[test]
    fn coset_index_is_a_homomorphism(which in 0usize..6, a in 1u32.., b in 1u32..) {
        let f = &fields()[which];
        let n = f.order();
        let (a, b) = (FieldElement(1 + a % (n - 1)), FieldElement(1 + b % (n - 1)));
        let q = f.base_order().unwrap();
        let ia = f.coset_index(a).unwrap().0;
        let ib = f.coset_index(b).unwrap().0;
        prop_assert_eq!(f.coset_index(f.mul(a, b)).unwrap().0, (ia + ib) % (q + 1));
    }
}

#[test]
fn subfield_is_closed_and_has_coset_zero() {
    for f in fields() {
        let sub = f.subfield_elements().unwrap();
        assert_eq!(sub.len() as u32, f.base_order().unwrap());
        for &x in &sub {
            for &y in &sub {
                assert!(sub.contains(&f.add(x, y)) && sub.contains(&f.mul(x, y)));
            }
            if !x.is_zero() {
                assert_eq!(f.coset_index(x).unwrap().0, 0);
            }
        }
    }
}
