use std::sync::Arc;

use modcong::linalg::{hnf_with_modulus, MatZ};
use modcong::numfield::{
    compose_fields, ell_maximal_order, make_field, primes_above, restrict_place, valuation, FieldElement,
    NumberField, OrderBasis, OrderOps, PrimeIdeal, Valuation,
};
use modcong::poly::PolyQ;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use proptest::prelude::*;

const SMALL_PRIMES: [u64; 15] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47];

fn random_field(coeffs: &[i64]) -> Option<Arc<NumberField>> {
    let mut c = coeffs.to_vec();
    c.push(1);
    make_field(&PolyQ::from_ints(&c)).ok()
}

fn element(o: &OrderBasis, c: &[i64]) -> FieldElement {
    let v: Vec<BigInt> = c.iter().take(o.rank()).map(|&x| BigInt::from(x)).collect();
    o.element(&v)
}

fn fin(v: Valuation) -> u32 {
    v.finite().unwrap()
}

/// HNF of λ^n, built by multiplying module generators.
fn ideal_power(p: &PrimeIdeal, n: u32) -> MatZ {
    let o = p.order();
    let r = o.rank();
    let lam = p.hnf_basis().clone();
    let mut cur = MatZ::identity(r);
    for k in 1..=n {
        let md = num_traits::pow(BigInt::from(p.ell()), k as usize);
        let mut rows = Vec::new();
        for i in 0..cur.rows() {
            let m = o.mult_matrix(cur.row(i));
            for j in 0..lam.rows() {
                let mut v = vec![BigInt::zero(); r];
                for (t, c) in lam.row(j).iter().enumerate() {
                    if !c.is_zero() {
                        for (a, b) in v.iter_mut().zip(m.row(t)) {
                            *a += c * b;
                        }
                    }
                }
                rows.push(v);
            }
        }
        for i in 0..r {
            let mut e = vec![BigInt::zero(); r];
            e[i] = md.clone();
            rows.push(e);
        }
        cur = hnf_with_modulus(&MatZ::from_rows(rows, r), &md);
    }
    cur
}

fn in_lattice(h: &MatZ, x: &[BigInt]) -> bool {
    let mut v = x.to_vec();
    for i in 0..h.rows() {
        let row = h.row(i);
        let pc = row.iter().position(|c| !c.is_zero()).unwrap();
        let (q, r) = v[pc].div_mod_floor(&row[pc]);
        if !r.is_zero() {
            return false;
        }
        for (a, b) in v.iter_mut().zip(row) {
            *a -= &q * b;
        }
    }
    v.iter().all(|c| c.is_zero())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn sum_ef_is_degree(coeffs in prop::collection::vec(-6i64..=6, 1..=4), li in 0usize..15) {
        let ell = SMALL_PRIMES[li];
        if let Some(k) = random_field(&coeffs) {
            let o = Arc::new(ell_maximal_order(&k, ell).unwrap());
            let ps = primes_above(&o, ell).unwrap();
            let s: u32 = ps.iter().map(|p| p.ramification_index() * p.residue_degree()).sum();
            prop_assert_eq!(s as usize, k.degree());
            for p in &ps {
                let l = FieldElement::from_int(&k, ell as i64);
                prop_assert_eq!(fin(valuation(&l, p).unwrap()), p.ramification_index());
            }
            // idempotence
            let again = modcong::numfield::maximize(
                OrderBasis::from_basis(&k, o.basis().clone(), ell).unwrap()).unwrap();
            prop_assert_eq!(again.basis(), o.basis());
        }
    }

    #[test]
    fn valuation_axioms(
        coeffs in prop::collection::vec(-5i64..=5, 1..=3),
        li in 0usize..6,
        x in prop::collection::vec(-40i64..=40, 4),
        y in prop::collection::vec(-40i64..=40, 4),
        scale in 0u32..3,
    ) {
        let ell = SMALL_PRIMES[li];
        if let Some(k) = random_field(&coeffs) {
            let o = Arc::new(ell_maximal_order(&k, ell).unwrap());
            let mut xe = element(&o, &x);
            xe = &xe * &FieldElement::from_int(&k, (ell as i64).pow(scale));
            let ye = element(&o, &y);
            for p in primes_above(&o, ell).unwrap() {
                let vx = valuation(&xe, &p).unwrap();
                let vy = valuation(&ye, &p).unwrap();
                let vxy = valuation(&(&xe * &ye), &p).unwrap();
                let vs = valuation(&(&xe + &ye), &p).unwrap();
                match (vx, vy) {
                    (Valuation::Finite(a), Valuation::Finite(b)) => prop_assert_eq!(vxy, Valuation::Finite(a + b)),
                    _ => prop_assert_eq!(vxy, Valuation::Infinite),
                }
                prop_assert!(vs >= vx.min(vy));
                // agrees with membership in explicit ideal powers
                if let Valuation::Finite(a) = vx {
                    let c = o.integral_coords(&xe).unwrap();
                    prop_assert!(in_lattice(&ideal_power(&p, a), &c));
                    prop_assert!(!in_lattice(&ideal_power(&p, a + 1), &c));
                }
            }
        }
    }

    #[test]
    fn composite_embeddings_are_exact(a in prop::collection::vec(-4i64..=4, 1..=2), b in prop::collection::vec(-4i64..=4, 1..=2)) {
        if let (Some(fa), Some(fb)) = (random_field(&a), random_field(&b)) {
            let comp = compose_fields(&fa, &fb).unwrap();
            let ia = comp.embed_a.image().clone();
            let ib = comp.embed_b.image().clone();
            for (f, img) in [(&fa, &ia), (&fb, &ib)] {
                let mut acc = FieldElement::zero(&comp.field);
                for c in f.min_poly().coeffs().iter().rev() {
                    acc = &(&acc * img) + &FieldElement::from_rational(&comp.field, c.clone());
                }
                prop_assert!(acc.is_zero());
            }
            if comp.c > 0 {
                let sum = &ia + &(&ib * &FieldElement::from_int(&comp.field, comp.c as i64));
                prop_assert_eq!(sum, FieldElement::generator(&comp.field));
            }
        }
    }

    #[test]
    fn restriction_scales_valuations(
        a in prop::collection::vec(-4i64..=4, 1..=2),
        b in prop::collection::vec(-4i64..=4, 1..=2),
        li in 0usize..5,
        x in prop::collection::vec(-30i64..=30, 2),
    ) {
        let ell = SMALL_PRIMES[li];
        if let (Some(fa), Some(fb)) = (random_field(&a), random_field(&b)) {
            let comp = compose_fields(&fa, &fb).unwrap();
            let ko = Arc::new(ell_maximal_order(&comp.field, ell).unwrap());
            let fo = ell_maximal_order(&fa, ell).unwrap();
            let xe = element(&fo, &x);
            let img = comp.embed_a.apply(&xe);
            for lam in primes_above(&ko, ell).unwrap() {
                let res = restrict_place(&lam, &comp.embed_a).unwrap();
                let e = lam.ramification_index() / res.ramification_index();
                prop_assert_eq!(lam.ramification_index() % res.ramification_index(), 0);
                match valuation(&xe, &res).unwrap() {
                    Valuation::Finite(v) => prop_assert_eq!(valuation(&img, &lam).unwrap(), Valuation::Finite(v * e)),
                    Valuation::Infinite => prop_assert!(img.is_zero()),
                }
            }
        }
    }
}

#[test]
fn restriction_examples() {
    let r2 = make_field(&PolyQ::from_ints(&[-2, 0, 1])).unwrap();
    let r3 = make_field(&PolyQ::from_ints(&[-3, 0, 1])).unwrap();
    let comp = compose_fields(&r2, &r3).unwrap();
    let ko = Arc::new(ell_maximal_order(&comp.field, 5).unwrap());
    for lam in primes_above(&ko, 5).unwrap() {
        let p = restrict_place(&lam, &comp.embed_a).unwrap();
        assert_eq!((p.ramification_index(), p.residue_degree()), (1, 2));
    }
    // F = K with the identity embedding gives λ back
    let id = modcong::numfield::FieldEmbedding::identity(&comp.field);
    for lam in primes_above(&ko, 5).unwrap() {
        assert!(restrict_place(&lam, &id).unwrap() == lam);
    }
    // F = ℚ gives (ℓ)
    let q = Arc::new(NumberField::rationals());
    let qc = compose_fields(&q, &comp.field).unwrap();
    let lam = &primes_above(&ko, 5).unwrap()[0];
    let p = restrict_place(lam, &qc.embed_a).unwrap();
    assert_eq!((p.ramification_index(), p.residue_degree()), (1, 1));
    let five = FieldElement::from_int(&q, 5);
    assert_eq!(valuation(&five, &p).unwrap(), Valuation::Finite(1));
}
