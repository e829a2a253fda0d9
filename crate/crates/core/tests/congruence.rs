use std::sync::Arc;

use modcong::arith::{prime_divisors, primes_up_to};
use modcong::congruence::{
    cm_check, congruence_exponent, congruence_primes, congruence_valuations, make_place, minimality_check,
    residual_irreducibility_heuristic, strong_irreducibility_check, theorem_report, uniqueness_check, CheckOutcome,
    CmStatus, FormSource, Irreducibility, ModSymSource, StrongIrreducibility,
};
use modcong::linalg::{hnf_with_modulus, MatZ};
use modcong::modsym::Eigenform;
use modcong::numfield::{make_field, FieldElement, NumberField, PrimeIdeal, Valuation};
use modcong::{PolyQ, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use std::sync::OnceLock;

fn source() -> &'static ModSymSource {
    static S: OnceLock<ModSymSource> = OnceLock::new();
    S.get_or_init(ModSymSource::new)
}

fn class(level: u64, index: usize) -> Arc<dyn Eigenform> {
    source().classes(level).unwrap()[index - 1].clone()
}

/// An eigenform with prescribed field and no eigenvalues, for place tests.
struct Bare {
    level: u64,
    field: Arc<NumberField>,
}

impl Eigenform for Bare {
    fn level(&self) -> u64 {
        self.level
    }
    fn index(&self) -> usize {
        1
    }
    fn field(&self) -> &Arc<NumberField> {
        &self.field
    }
    fn eigenvalue(&self, _q: u64) -> Result<FieldElement> {
        Ok(FieldElement::zero(&self.field))
    }
}

fn rational_int(x: &FieldElement) -> BigInt {
    assert!(x.is_rational());
    x.coords()[0].to_integer()
}

#[test]
fn place_counts() {
    let q = Arc::new(NumberField::rationals());
    let r5 = make_field(&PolyQ::from_ints(&[-1, -1, 1])).unwrap();
    let f = Bare { level: 1, field: q.clone() };
    let g = Bare { level: 1, field: r5 };
    assert_eq!(make_place(&f, &f, 7).unwrap().len(), 1);
    let p11 = make_place(&f, &g, 11).unwrap();
    assert_eq!(p11.len(), 2);
    assert!(p11.iter().all(|p| p.e() == 1 && p.f() == 1));
    let p3 = make_place(&f, &g, 3).unwrap();
    assert_eq!(p3.len(), 1);
    assert_eq!(p3[0].f(), 2);
    assert!(make_place(&f, &g, 2).is_err());
    let h = Bare { level: 33, field: q };
    assert!(make_place(&h, &f, 3).is_err());
}

#[test]
fn exponent_of_class_with_itself_is_infinite() {
    let f = class(11, 1);
    let places = make_place(f.as_ref(), f.as_ref(), 5).unwrap();
    assert_eq!(congruence_exponent(f.as_ref(), f.as_ref(), &places[0], Some(50)).unwrap(), Valuation::Infinite);
    assert!(congruence_primes(f.as_ref(), f.as_ref(), None).is_err());
}

#[test]
fn congruence_primes_at_level_26() {
    let (f, g) = (class(26, 1), class(26, 2));
    let mut gcd = BigInt::zero();
    for q in primes_up_to(30) {
        if 26 % q != 0 {
            let d = rational_int(&f.eigenvalue(q).unwrap()) - rational_int(&g.eigenvalue(q).unwrap());
            gcd = gcd.gcd(&d.abs());
        }
    }
    let expect: Vec<u64> = prime_divisors(u64::try_from(gcd).unwrap())
        .into_iter()
        .filter(|&l| l != 2 && 26 % l != 0)
        .collect();
    // the two classes differ by 2·(odd unit) at small q, so only ℓ = 2 survives and it is excluded
    let got: Vec<u64> = congruence_primes(f.as_ref(), g.as_ref(), Some(30)).unwrap().into_iter().map(|(l, _)| l).collect();
    assert_eq!(got, expect);
}

#[test]
fn eisenstein_test_at_level_11() {
    let g = class(11, 1);
    let p5 = &make_place(g.as_ref(), g.as_ref(), 5).unwrap()[0];
    assert_eq!(residual_irreducibility_heuristic(g.as_ref(), p5, 50).unwrap(), Irreducibility::PossiblyReducible);
    let p7 = &make_place(g.as_ref(), g.as_ref(), 7).unwrap()[0];
    assert_eq!(
        residual_irreducibility_heuristic(g.as_ref(), p7, 50).unwrap(),
        Irreducibility::CertifiedIrreducible { q: 2 }
    );
    let p3 = &make_place(g.as_ref(), g.as_ref(), 3).unwrap()[0];
    assert_eq!(strong_irreducibility_check(g.as_ref(), p3, 50).unwrap(), StrongIrreducibility::Pass { q: 2 });
    assert_eq!(strong_irreducibility_check(g.as_ref(), p5, 50).unwrap(), StrongIrreducibility::Automatic);
    assert_eq!(minimality_check(g.as_ref(), p7, source(), None).unwrap(), CheckOutcome::Pass);
    assert_eq!(uniqueness_check(g.as_ref(), p7, source(), None).unwrap(), CheckOutcome::Pass);
}

#[test]
fn uniqueness_fails_for_congruent_classes_at_one_level() {
    let (f, g) = (class(106, 3), class(106, 4));
    let primes = congruence_primes(f.as_ref(), g.as_ref(), None).unwrap();
    assert_eq!(primes.iter().map(|(l, _)| *l).collect::<Vec<_>>(), vec![3]);
    let place = &make_place(f.as_ref(), f.as_ref(), 3).unwrap()[0];
    assert_eq!(uniqueness_check(f.as_ref(), place, source(), None).unwrap(), CheckOutcome::Fail { level: 106, index: 4 });
    let place = &make_place(g.as_ref(), g.as_ref(), 3).unwrap()[0];
    assert_eq!(uniqueness_check(g.as_ref(), place, source(), None).unwrap(), CheckOutcome::Fail { level: 106, index: 3 });
}

#[test]
fn minimality_fails_for_a_level_raised_form() {
    // 77.3 is congruent to 11.1 mod 3, so as "g" it is not minimal
    let g = class(77, 3);
    let place = &make_place(g.as_ref(), g.as_ref(), 3).unwrap()[0];
    assert_eq!(minimality_check(g.as_ref(), place, source(), None).unwrap(), CheckOutcome::Fail { level: 11, index: 1 });
}

#[test]
fn cm_examples() {
    assert!(matches!(cm_check(class(11, 1).as_ref(), 50).unwrap(), CmStatus::NoCm { .. }));
    assert_eq!(cm_check(class(27, 1).as_ref(), 50).unwrap(), CmStatus::Cm { disc: -3, bound: 50 });
    assert_eq!(cm_check(class(32, 1).as_ref(), 50).unwrap(), CmStatus::Cm { disc: -4, bound: 50 });
}

#[test]
fn report_rejects_equal_levels() {
    let f = class(11, 1);
    assert!(theorem_report(f.as_ref(), f.as_ref(), 3, source(), None).is_err());
    let g = class(26, 1);
    assert!(theorem_report(g.as_ref(), f.as_ref(), 3, source(), None).is_err());
}

#[test]
fn small_report() {
    let (f, g) = (class(95, 2), class(19, 1));
    let r = theorem_report(f.as_ref(), g.as_ref(), 3, source(), None).unwrap();
    assert_eq!((r.p, r.k), (5, 1));
    assert_eq!(r.max_m(), Some(3));
}

/// HNF of λ^n by repeated multiplication of module generators.
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
                    for (a, b) in v.iter_mut().zip(m.row(t)) {
                        *a += c * b;
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

#[test]
fn exponent_invariants() {
    let pairs = [((95, 2), (19, 1), 3), ((143, 2), (11, 1), 3), ((55, 2), (11, 1), 7), ((87, 2), (29, 1), 23)];
    for ((nf, i), (ng, j), ell) in pairs {
        let (f, g) = (class(nf, i), class(ng, j));
        let places = make_place(f.as_ref(), g.as_ref(), ell).unwrap();
        let mut best = Valuation::Finite(0);
        for place in &places {
            let n = congruence_exponent(f.as_ref(), g.as_ref(), place, None).unwrap();
            best = best.max(n);
            // monotone in the bound
            let wider = congruence_exponent(f.as_ref(), g.as_ref(), place, Some(modcong::congruence::sturm_bound(nf) + 20)).unwrap();
            assert!(wider <= n);
            // the minimum of the per-prime valuations
            let vals = congruence_valuations(f.as_ref(), g.as_ref(), place, None).unwrap();
            assert_eq!(vals.iter().map(|(_, v)| *v).min().unwrap(), n);
            // re-check membership of each difference in λ^n and, for the minimum, not in λ^(n+1)
            if let Valuation::Finite(n) = n {
                let pow = ideal_power(place.prime(), n);
                let next = ideal_power(place.prime(), n + 1);
                for (q, v) in &vals {
                    let d = place.difference(&f.eigenvalue(*q).unwrap(), &g.eigenvalue(*q).unwrap()).unwrap();
                    assert!(in_lattice(&pow, &d), "{nf}/{ng} q={q}");
                    if *v == Valuation::Finite(n) {
                        assert!(!in_lattice(&next, &d));
                    }
                }
            }
        }
        assert!(best >= Valuation::Finite(1), "{nf}/{ng} at {ell}");
    }
}

#[test]
fn rational_pairs_agree_at_every_place() {
    // both fields ℚ: one place, and it sees exactly v_ℓ(gcd)
    let (f, g) = (class(77, 3), class(11, 1));
    let places = make_place(f.as_ref(), g.as_ref(), 3).unwrap();
    assert_eq!(places.len(), 1);
    let n = congruence_exponent(f.as_ref(), g.as_ref(), &places[0], None).unwrap();
    let mut gcd = BigInt::zero();
    for q in primes_up_to(modcong::congruence::sturm_bound(77)) {
        if 3 * 77 % q != 0 {
            gcd = gcd.gcd(&(rational_int(&f.eigenvalue(q).unwrap()) - rational_int(&g.eigenvalue(q).unwrap())));
        }
    }
    assert_eq!(n, Valuation::Finite(modcong::arith::valuation_int(&gcd, &BigInt::from(3))));
}
