//! Primes above ℓ in an ℓ-maximal order, from the splitting of O/ℓO, and
//! the associated valuations.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::field::FieldElement;
use super::order::{
    echelon_mod, left_kernel_mod, mul_mod, radical_mod, residues, OrderBasis, OrderOps,
};
use crate::arith::valuation_int;
use crate::error::{Error, Result};
use crate::linalg::{hnf_with_modulus, MatZ};
use crate::modp::{self, pfactor, MatP};

/// A valuation value: a non-negative integer or +∞ (for zero).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(u32),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
            (Valuation::Finite(_), Valuation::Infinite) => Ordering::Less,
            (Valuation::Infinite, Valuation::Finite(_)) => Ordering::Greater,
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// A prime λ above ℓ of an ℓ-maximal order O, with λ = ℓO + πO.
///
/// Valuations use an element β with β·λ ⊆ ℓO and β ∉ ℓO: for x ∈ O,
/// x ∈ λ iff x·β ∈ ℓO, and then x·β/ℓ has valuation one less.
pub struct PrimeIdeal {
    order: Arc<dyn OrderOps>,
    field_order: Option<Arc<OrderBasis>>,
    ell: u64,
    e: u32,
    f: u32,
    pi: Vec<BigInt>,
    beta: Vec<BigInt>,
    idempotent: Vec<BigInt>,
    hnf: OnceLock<MatZ>,
    beta_mod: Mutex<HashMap<u64, Arc<MatP>>>,
}

impl fmt::Debug for PrimeIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PrimeIdeal(ell={}, e={}, f={}, pi={:?})", self.ell, self.e, self.f, self.pi)
    }
}

impl PartialEq for PrimeIdeal {
    fn eq(&self, other: &Self) -> bool {
        self.ell == other.ell
            && self.e == other.e
            && self.f == other.f
            && self.order.rank() == other.order.rank()
            && self.hnf_basis() == other.hnf_basis()
    }
}

impl PrimeIdeal {
    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn ramification_index(&self) -> u32 {
        self.e
    }

    pub fn residue_degree(&self) -> u32 {
        self.f
    }

    pub fn order(&self) -> &Arc<dyn OrderOps> {
        &self.order
    }

    /// The field order this prime belongs to, when it was built from one.
    pub fn field_order(&self) -> Option<&Arc<OrderBasis>> {
        self.field_order.as_ref()
    }

    /// π of the two-element representation (ℓ, π), in order coordinates.
    pub fn pi(&self) -> &[BigInt] {
        &self.pi
    }

    /// π as a field element, for primes of field orders.
    pub fn pi_element(&self) -> Option<FieldElement> {
        self.field_order.as_ref().map(|o| o.element(&self.pi))
    }

    /// Lift of the idempotent of O/ℓO belonging to this prime.
    pub fn idempotent(&self) -> &[BigInt] {
        &self.idempotent
    }

    /// Hermite basis of λ as a ℤ-module in order coordinates.
    pub fn hnf_basis(&self) -> &MatZ {
        self.hnf.get_or_init(|| {
            let n = self.order.rank();
            let l = BigInt::from(self.ell);
            let mp = self.order.mult_matrix(&self.pi);
            let mut rows = mp.row_vecs();
            for i in 0..n {
                let mut e = vec![BigInt::zero(); n];
                e[i] = l.clone();
                rows.push(e);
            }
            hnf_with_modulus(&MatZ::from_rows(rows, n), &l)
        })
    }

    fn beta_matrix(&self, m: u64) -> Arc<MatP> {
        let mut cache = self.beta_mod.lock().unwrap();
        cache
            .entry(m)
            .or_insert_with(|| Arc::new(self.order.mult_matrix_mod(&residues(&self.beta, m), m)))
            .clone()
    }

    /// min(v_λ(x), cap) for x ∈ O given by integer coordinates.
    pub fn valuation_capped(&self, x: &[BigInt], cap: u32) -> u32 {
        if cap == 0 {
            return 0;
        }
        let l = self.ell as u128;
        let mut m = 1u128;
        for _ in 0..=cap {
            m = m.saturating_mul(l);
        }
        if m < (1u128 << 62) {
            self.valuation_small(x, cap, m as u64)
        } else {
            self.valuation_big(x, cap)
        }
    }

    fn valuation_small(&self, x: &[BigInt], cap: u32, m: u64) -> u32 {
        let ell = self.ell;
        let b = self.beta_matrix(m);
        let mut cur = residues(x, m);
        let mut modulus = m;
        for v in 0..cap {
            let y = b.mul_vec_left(&cur);
            if y.iter().any(|&c| c % ell != 0) {
                return v;
            }
            modulus /= ell;
            cur = y.into_iter().map(|c| (c / ell) % modulus).collect();
        }
        cap
    }

    fn valuation_big(&self, x: &[BigInt], cap: u32) -> u32 {
        let l = BigInt::from(self.ell);
        let mut modulus = num_traits::pow(l.clone(), cap as usize + 1);
        let b = self.order.mult_matrix(&self.beta);
        let mut cur: Vec<BigInt> = x.iter().map(|c| c.mod_floor(&modulus)).collect();
        for v in 0..cap {
            let n = cur.len();
            let mut y = vec![BigInt::zero(); n];
            for (i, c) in cur.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for (o, t) in y.iter_mut().zip(b.row(i)) {
                    if !t.is_zero() {
                        *o += c * t;
                    }
                }
            }
            if y.iter().any(|c| !c.mod_floor(&l).is_zero()) {
                return v;
            }
            modulus /= &l;
            cur = y.into_iter().map(|c| (c / &l).mod_floor(&modulus)).collect();
        }
        cap
    }

    /// Whether x ∈ λ.
    pub fn contains(&self, x: &[BigInt]) -> bool {
        self.valuation_capped(x, 1) >= 1
    }
}

/// The primes above ℓ of an ℓ-maximal order, sorted by residue degree,
/// ramification index and then π.
pub fn primes_above_order(order: Arc<dyn OrderOps>, ell: u64) -> Result<Vec<PrimeIdeal>> {
    split_order(order, None, ell)
}

/// Primes above ℓ of an ℓ-maximal order of a number field.
pub fn primes_above(order: &Arc<OrderBasis>, ell: u64) -> Result<Vec<PrimeIdeal>> {
    if order.ell() != ell {
        return Err(Error::Precondition(format!("order is maximal at {}, not at {ell}", order.ell())));
    }
    let dynord: Arc<dyn OrderOps> = order.clone();
    split_order(dynord, Some(order.clone()), ell)
}

fn split_order(order: Arc<dyn OrderOps>, field_order: Option<Arc<OrderBasis>>, ell: u64) -> Result<Vec<PrimeIdeal>> {
    let n = order.rank();
    if !crate::arith::is_prime64(ell) || ell >= 1 << 62 {
        return Err(Error::Precondition(format!("{ell} is not a prime below 2^62")));
    }
    let rad = radical_mod(order.as_ref(), ell);
    let rad_piv: Vec<usize> = rad.iter().map(|r| r.iter().position(|&x| x != 0).unwrap()).collect();
    let reduce = |v: &mut Vec<u64>| {
        for (r, &pc) in rad.iter().zip(&rad_piv) {
            let c = v[pc];
            if c != 0 {
                let nc = ell - c;
                for (x, &y) in v.iter_mut().zip(r) {
                    if y != 0 {
                        *x = modp::add(*x, modp::mul(nc, y, ell), ell);
                    }
                }
            }
        }
    };
    let one = residues(&order.one(), ell);
    let mut one_a = one.clone();
    reduce(&mut one_a);
    let dim_a = n - rad.len();

    // split the semisimple quotient into fields
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001 ^ ell);
    let mut fields: Vec<Vec<Vec<u64>>> = Vec::new();
    let full: Vec<Vec<u64>> = {
        let piv: Vec<bool> = (0..n).map(|c| rad_piv.contains(&c)).collect();
        (0..n)
            .filter(|&c| !piv[c])
            .map(|c| {
                let mut v = vec![0u64; n];
                v[c] = 1;
                v
            })
            .collect()
    };
    let mut work = vec![full];
    while let Some(comp) = work.pop() {
        let r = comp.len();
        if r == 1 {
            fields.push(comp);
            continue;
        }
        let piv: Vec<usize> = comp.iter().map(|v| v.iter().position(|&x| x != 0).unwrap()).collect();
        let mut split = false;
        for _attempt in 0..200 {
            let mut alpha = vec![0u64; n];
            for s in &comp {
                let c = rng.gen_range(0..ell);
                for (a, &b) in alpha.iter_mut().zip(s) {
                    *a = modp::add(*a, modp::mul(c, b, ell), ell);
                }
            }
            let ma = order.mult_matrix_mod(&alpha, ell);
            let mut m = MatP::zero(r, r, ell);
            for (i, s) in comp.iter().enumerate() {
                let mut w = ma.mul_vec_left(s);
                reduce(&mut w);
                // comp is in reduced echelon form, so coordinates sit at the pivots
                for (j, &pc) in piv.iter().enumerate() {
                    m.data[i * r + j] = w[pc];
                }
            }
            let fac = pfactor(&m.charpoly(), ell);
            if fac.len() == 1 {
                if fac[0].1 == 1 {
                    fields.push(comp.clone());
                    split = true;
                    break;
                }
                continue;
            }
            for (g, _) in &fac {
                let gm = poly_at_matrix(g, &m);
                {
                    let rows: Vec<Vec<u64>> = left_kernel_mod(&gm)
                        .iter()
                        .map(|kv| {
                            let mut v = vec![0u64; n];
                            for (c, s) in kv.iter().zip(&comp) {
                                if *c != 0 {
                                    for (a, &b) in v.iter_mut().zip(s) {
                                        *a = modp::add(*a, modp::mul(*c, b, ell), ell);
                                    }
                                }
                            }
                            v
                        })
                        .collect();
                    work.push(echelon_mod(rows, n, ell));
                }
            }
            split = true;
            break;
        }
        if !split {
            return Err(Error::Computation(format!("could not split O/{ell}O semisimple part")));
        }
    }
    let total: usize = fields.iter().map(|c| c.len()).sum();
    debug_assert_eq!(total, dim_a);

    // idempotents: decompose 1 along the components
    let all: Vec<Vec<u64>> = fields.iter().flatten().cloned().collect();
    let comps_coords = solve_in_span(&all, &one_a, ell)
        .ok_or_else(|| Error::Computation("identity not in semisimple span".into()))?;
    let mut primes = Vec::with_capacity(fields.len());
    let mut offset = 0;
    let mut sum_ef = 0usize;
    for comp in &fields {
        let f = comp.len();
        let mut e_vec = vec![0u64; n];
        for (k, s) in comp.iter().enumerate() {
            let c = comps_coords[offset + k];
            for (a, &b) in e_vec.iter_mut().zip(s) {
                *a = modp::add(*a, modp::mul(c, b, ell), ell);
            }
        }
        offset += f;
        let idem = lift_idempotent(order.as_ref(), e_vec, ell);
        let me = order.mult_matrix_mod(&idem, ell);
        let local_dim = me.rank();
        if !local_dim.is_multiple_of(f) {
            return Err(Error::Computation("inconsistent local dimension".into()));
        }
        let e = local_dim / f;
        sum_ef += local_dim;
        let to_big = |v: &[u64]| -> Vec<BigInt> { v.iter().map(|&x| BigInt::from(x)).collect() };
        // the maximal ideal of the local factor E·(O/ℓO)
        let m_local: Vec<Vec<u64>> = echelon_mod(rad.iter().map(|j| me.mul_vec_left(j)).collect(), n, ell);
        let beta = if e == 1 {
            idem.clone()
        } else {
            // x with x·E = x and x·y = 0 for y in the local maximal ideal
            let blocks = 1 + m_local.len();
            let mut big = MatP::zero(n, n * blocks, ell);
            for i in 0..n {
                for j in 0..n {
                    let mut v = me.get(i, j);
                    if i == j {
                        v = modp::sub(v, 1, ell);
                    }
                    big.data[i * n * blocks + j] = v;
                }
            }
            for (k, y) in m_local.iter().enumerate() {
                let my = order.mult_matrix_mod(y, ell);
                for i in 0..n {
                    for j in 0..n {
                        big.data[i * n * blocks + (k + 1) * n + j] = my.get(i, j);
                    }
                }
            }
            let ker = left_kernel_mod(&big);
            ker.into_iter()
                .next()
                .ok_or_else(|| Error::Computation("empty annihilator".into()))?
        };
        let mut prime = PrimeIdeal {
            order: order.clone(),
            field_order: field_order.clone(),
            ell,
            e: e as u32,
            f: f as u32,
            pi: Vec::new(),
            beta: to_big(&beta),
            idempotent: to_big(&idem),
            hnf: OnceLock::new(),
            beta_mod: Mutex::new(HashMap::new()),
        };
        // π = (1 − E) + E·u with u ∈ λ \ λ²
        let base: Vec<u64> = one.iter().zip(&idem).map(|(&a, &b)| modp::sub(a, b, ell)).collect();
        let pi = if e == 1 {
            base
        } else {
            let mut found = None;
            for u in &m_local {
                let eu = mul_mod(order.as_ref(), &idem, u, ell);
                let cand: Vec<u64> = base.iter().zip(&eu).map(|(&a, &b)| modp::add(a, b, ell)).collect();
                if prime.valuation_capped(&to_big(&cand), 2) == 1 {
                    found = Some(cand);
                    break;
                }
            }
            // in a Dedekind local ring some generator of λ mod ℓ is a uniformizer
            found.ok_or_else(|| Error::Precondition(format!("order is not {ell}-maximal: no uniformizer")))?
        };
        prime.pi = to_big(&pi);
        primes.push(prime);
    }
    debug_assert_eq!(sum_ef, n);
    primes.sort_by(|a, b| (a.f, a.e, &a.pi).cmp(&(b.f, b.e, &b.pi)));
    Ok(primes)
}

/// Coefficients c with Σ c_i rows_i = target over F_p, if any.
fn solve_in_span(rows: &[Vec<u64>], target: &[u64], p: u64) -> Option<Vec<u64>> {
    let k = rows.len();
    let n = target.len();
    // columns: unknowns; augmented transpose system
    let mut m = MatP::zero(n, k + 1, p);
    for (j, r) in rows.iter().enumerate() {
        for i in 0..n {
            m.data[i * (k + 1) + j] = r[i];
        }
    }
    for i in 0..n {
        m.data[i * (k + 1) + k] = target[i];
    }
    let piv = m.rref();
    if piv.contains(&k) {
        return None;
    }
    let mut sol = vec![0u64; k];
    for (i, &c) in piv.iter().enumerate() {
        sol[c] = m.get(i, k);
    }
    Some(sol)
}

fn poly_at_matrix(g: &[u64], m: &MatP) -> MatP {
    let n = m.rows;
    let p = m.p;
    let mut acc = MatP::zero(n, n, p);
    for &c in g.iter().rev() {
        acc = acc.mul(m);
        for i in 0..n {
            acc.data[i * n + i] = modp::add(acc.data[i * n + i], c, p);
        }
    }
    acc
}

/// Lifts an idempotent of (O/ℓO)/rad to O/ℓO by e ↦ 3e² − 2e³.
fn lift_idempotent(o: &dyn OrderOps, mut e: Vec<u64>, ell: u64) -> Vec<u64> {
    for _ in 0..64 {
        let e2 = mul_mod(o, &e, &e, ell);
        if e2 == e {
            return e;
        }
        let e3 = mul_mod(o, &e2, &e, ell);
        e = e2
            .iter()
            .zip(&e3)
            .map(|(&a, &b)| modp::sub(modp::mul(3 % ell, a, ell), modp::mul(2 % ell, b, ell), ell))
            .collect();
    }
    e
}

/// v_λ(x) for a field element integral at ℓ.
pub fn valuation(x: &FieldElement, lam: &PrimeIdeal) -> Result<Valuation> {
    let o = lam
        .field_order
        .as_ref()
        .ok_or_else(|| Error::Precondition("prime is not attached to a field order".into()))?;
    if x.field() != o.field() {
        return Err(Error::Precondition("element and prime belong to different fields".into()));
    }
    if x.is_zero() {
        return Ok(Valuation::Infinite);
    }
    let c = o
        .integral_coords(x)
        .ok_or_else(|| Error::Precondition(format!("element is not integral at {}", lam.ell)))?;
    // v_λ(x)·f ≤ v_ℓ(N(x)) bounds the search
    let norm = x.norm();
    let l = BigInt::from(lam.ell);
    let cap = valuation_int(norm.numer(), &l).saturating_sub(valuation_int(norm.denom(), &l));
    let bound = cap / lam.f;
    let v = lam.valuation_capped(&c, bound + 1);
    Ok(Valuation::Finite(v.min(bound)))
}

/// The prime of the ℓ-maximal order of F lying under λ ⊂ K, for an
/// embedding F → K.
pub fn restrict_place(lam: &PrimeIdeal, embed: &super::compose::FieldEmbedding) -> Result<PrimeIdeal> {
    let ko = lam
        .field_order
        .as_ref()
        .ok_or_else(|| Error::Precondition("prime is not attached to a field order".into()))?;
    if embed.target() != ko.field() {
        return Err(Error::Precondition("embedding target is not the field of the prime".into()));
    }
    let fo = Arc::new(super::order::ell_maximal_order(embed.source(), lam.ell)?);
    let candidates = primes_above(&fo, lam.ell)?;
    for p in candidates {
        let pi = fo.element(&p.pi);
        let img = embed.apply(&pi);
        let c = ko
            .integral_coords(&img)
            .ok_or_else(|| Error::Computation("embedded element not integral at ℓ".into()))?;
        if lam.contains(&c) {
            return Ok(p);
        }
    }
    Err(Error::Computation("no prime of the subfield lies under the place".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Q;
    use crate::numfield::{ell_maximal_order, make_field};
    use crate::poly::PolyQ;

    fn primes(coeffs: &[i64], ell: u64) -> Vec<PrimeIdeal> {
        let k = make_field(&PolyQ::from_ints(coeffs)).unwrap();
        let o = Arc::new(ell_maximal_order(&k, ell).unwrap());
        primes_above(&o, ell).unwrap()
    }

    #[test]
    fn gaussian_primes() {
        let p5 = primes(&[1, 0, 1], 5);
        assert_eq!(p5.len(), 2);
        assert!(p5.iter().all(|p| p.e == 1 && p.f == 1));
        let p2 = primes(&[1, 0, 1], 2);
        assert_eq!(p2.len(), 1);
        assert_eq!((p2[0].e, p2[0].f), (2, 1));
        let k = p2[0].field_order().unwrap().field().clone();
        let two = FieldElement::from_int(&k, 2);
        assert_eq!(valuation(&two, &p2[0]).unwrap(), Valuation::Finite(2));
        let t = FieldElement::generator(&k);
        let one_plus_i = &t + &FieldElement::one(&k);
        assert_eq!(valuation(&one_plus_i, &p2[0]).unwrap(), Valuation::Finite(1));
        assert_eq!(valuation(&FieldElement::zero(&k), &p2[0]).unwrap(), Valuation::Infinite);
        let p3 = primes(&[1, 0, 1], 3);
        assert_eq!((p3.len(), p3[0].f), (1, 2));
    }

    #[test]
    fn rationals() {
        let p = primes(&[-1, 1], 7);
        assert_eq!(p.len(), 1);
        let k = p[0].field_order().unwrap().field().clone();
        let x = FieldElement::from_rational(&k, Q::new(98.into(), 5.into()));
        assert_eq!(valuation(&x, &p[0]).unwrap(), Valuation::Finite(2));
    }

    #[test]
    fn ramified_and_non_monogenic() {
        // sqrt(5) via x^2 - 5 at 2 needs the bigger order; 2 is inert there
        let p = primes(&[-5, 0, 1], 2);
        assert_eq!(p.len(), 1);
        assert_eq!((p[0].e, p[0].f), (1, 2));
        // x^3 - x^2 - 2x - 8: 2 splits completely though ℤ[θ] has index 2
        let p = primes(&[-8, -2, -1, 1], 2);
        assert_eq!(p.len(), 3);
        // x^3 - 3 at 3: totally ramified
        let p = primes(&[-3, 0, 0, 1], 3);
        assert_eq!((p.len(), p[0].e), (1, 3));
    }

    #[test]
    fn valuation_of_ell_is_e() {
        for (c, l) in [(vec![1i64, 0, 1], 2u64), (vec![-3, 0, 0, 1], 3), (vec![-2, 0, 0, 0, 1], 2), (vec![5, 0, 1], 5)] {
            for p in primes(&c, l) {
                let k = p.field_order().unwrap().field().clone();
                let x = FieldElement::from_int(&k, l as i64);
                assert_eq!(valuation(&x, &p).unwrap(), Valuation::Finite(p.e));
            }
        }
    }
}
