//! Orders given by a ℤ-basis, their tensor products, and maximalization at
//! a single prime by the radical/multiplier-ring iteration.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::field::{FieldElement, NumberField};
use crate::arith::big_mod_u64;
use crate::error::{Error, Result};
use crate::linalg::{hnf_with_modulus, MatQ, MatZ, Q};
use crate::modp::{self, MatP};

/// A ring that is free of finite rank over ℤ, seen through the matrices of
/// multiplication in a fixed ℤ-basis. Row convention: row i of the matrix of
/// x holds the coordinates of b_i · x.
pub trait OrderOps: Send + Sync + fmt::Debug {
    fn rank(&self) -> usize;
    fn one(&self) -> Vec<BigInt>;
    fn mult_matrix(&self, x: &[BigInt]) -> MatZ;
    /// Multiplication matrix modulo m (m < 2^62), x given by residues.
    fn mult_matrix_mod(&self, x: &[u64], m: u64) -> MatP;

    /// The ℓ-power Frobenius on O/ℓO as a matrix over F_ℓ.
    fn frobenius_mod(&self, ell: u64) -> MatP {
        let n = self.rank();
        let mut f = MatP::zero(n, n, ell);
        for k in 0..n {
            let mut e = vec![0u64; n];
            e[k] = 1;
            let r = pow_mod(self, &e, ell, ell);
            f.data[k * n..(k + 1) * n].copy_from_slice(&r);
        }
        f
    }
}

/// x · y modulo m.
pub fn mul_mod<O: OrderOps + ?Sized>(o: &O, x: &[u64], y: &[u64], m: u64) -> Vec<u64> {
    o.mult_matrix_mod(y, m).mul_vec_left(x)
}

/// x^e modulo m.
pub fn pow_mod<O: OrderOps + ?Sized>(o: &O, x: &[u64], mut e: u64, m: u64) -> Vec<u64> {
    let mut acc: Vec<u64> = o.one().iter().map(|c| big_mod_u64(c, m)).collect();
    let mut base = x.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(o, &acc, &base, m);
        }
        e >>= 1;
        if e > 0 {
            base = mul_mod(o, &base, &base, m);
        }
    }
    acc
}

pub fn residues(x: &[BigInt], m: u64) -> Vec<u64> {
    x.iter().map(|c| big_mod_u64(c, m)).collect()
}

/// An order of a number field, as a ℤ-basis in power-basis coordinates.
pub struct OrderBasis {
    field: Arc<NumberField>,
    basis: MatQ,
    inv: MatQ,
    ell: u64,
    structure: Vec<MatZ>,
    structure_mod: Mutex<HashMap<u64, Arc<Vec<MatP>>>>,
}

impl fmt::Debug for OrderBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OrderBasis({:?}, ell={}, basis={:?})", self.field, self.ell, self.basis)
    }
}

impl PartialEq for OrderBasis {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.basis == other.basis && self.ell == other.ell
    }
}

impl OrderBasis {
    /// ℤ[θ] for the field's generator θ.
    pub fn equation_order(field: &Arc<NumberField>, ell: u64) -> Result<Self> {
        Self::from_basis(field, MatQ::identity(field.degree()), ell)
    }

    /// Order spanned by the rows of `basis`; fails if the span is not a ring.
    pub fn from_basis(field: &Arc<NumberField>, basis: MatQ, ell: u64) -> Result<Self> {
        let n = field.degree();
        if basis.rows() != n || basis.cols() != n {
            return Err(Error::Precondition("order basis must be square of field degree".into()));
        }
        let inv = basis.inverse().ok_or_else(|| Error::Precondition("order basis is singular".into()))?;
        let mut structure = Vec::with_capacity(n);
        for k in 0..n {
            let x = FieldElement::new(field, basis.row(k).to_vec());
            let m = basis.mul(&x.mult_matrix()).mul(&inv);
            let mut data = Vec::with_capacity(n * n);
            for v in m.data() {
                if !v.is_integer() {
                    return Err(Error::Precondition("basis does not span a ring".into()));
                }
                data.push(v.to_integer());
            }
            structure.push(MatZ::new(n, n, data));
        }
        Ok(OrderBasis {
            field: field.clone(),
            basis,
            inv,
            ell,
            structure,
            structure_mod: Mutex::new(HashMap::new()),
        })
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    /// Rows are the basis elements in power-basis coordinates.
    pub fn basis(&self) -> &MatQ {
        &self.basis
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn degree(&self) -> usize {
        self.field.degree()
    }

    /// Index of ℤ[θ] in this order.
    pub fn index(&self) -> Q {
        self.inv.det().expect("square")
    }

    /// Coordinates of a field element with respect to the order basis.
    pub fn coords(&self, x: &FieldElement) -> Vec<Q> {
        self.inv.vec_mul(x.coords())
    }

    /// Coordinates scaled by a denominator prime to ℓ; None when ℓ divides
    /// a denominator (x not integral at ℓ).
    pub fn integral_coords(&self, x: &FieldElement) -> Option<Vec<BigInt>> {
        ell_integral(&self.coords(x), self.ell)
    }

    pub fn element(&self, c: &[BigInt]) -> FieldElement {
        let q: Vec<Q> = c.iter().map(|x| Q::from_integer(x.clone())).collect();
        FieldElement::new(&self.field, self.basis.vec_mul(&q))
    }
}

/// s·x for the least positive s making x integral, provided ℓ ∤ s.
pub fn ell_integral(x: &[Q], ell: u64) -> Option<Vec<BigInt>> {
    let den = x.iter().fold(BigInt::one(), |a, c| a.lcm(c.denom()));
    if (&den % BigInt::from(ell)).is_zero() {
        return None;
    }
    Some(x.iter().map(|c| (c * Q::from_integer(den.clone())).to_integer()).collect())
}

impl OrderOps for OrderBasis {
    fn rank(&self) -> usize {
        self.field.degree()
    }

    fn one(&self) -> Vec<BigInt> {
        let one = FieldElement::one(&self.field);
        self.coords(&one).into_iter().map(|c| c.to_integer()).collect()
    }

    fn mult_matrix(&self, x: &[BigInt]) -> MatZ {
        let n = self.rank();
        let mut acc = vec![BigInt::zero(); n * n];
        for (c, s) in x.iter().zip(&self.structure) {
            if c.is_zero() {
                continue;
            }
            for (a, b) in acc.iter_mut().zip(s.data()) {
                if !b.is_zero() {
                    *a += c * b;
                }
            }
        }
        MatZ::new(n, n, acc)
    }

    fn mult_matrix_mod(&self, x: &[u64], m: u64) -> MatP {
        let n = self.rank();
        let s = {
            let mut cache = self.structure_mod.lock().unwrap();
            cache
                .entry(m)
                .or_insert_with(|| {
                    Arc::new(
                        self.structure
                            .iter()
                            .map(|z| MatP { rows: n, cols: n, p: m, data: residues(z.data(), m) })
                            .collect(),
                    )
                })
                .clone()
        };
        let mut acc = vec![0u128; n * n];
        let mut out = MatP::zero(n, n, m);
        let mut pending = 0;
        for (&c, sk) in x.iter().zip(s.iter()) {
            if c == 0 {
                continue;
            }
            for (a, &b) in acc.iter_mut().zip(&sk.data) {
                *a += c as u128 * b as u128;
            }
            pending += 1;
            if pending == 15 {
                acc.iter_mut().for_each(|a| *a %= m as u128);
                pending = 0;
            }
        }
        for (o, a) in out.data.iter_mut().zip(acc) {
            *o = (a % m as u128) as u64;
        }
        out
    }
}

/// Tensor product O_A ⊗ O_B with the product basis a_i ⊗ b_j at index
/// i·rank(B) + j.
#[derive(Debug)]
pub struct TensorOrder {
    a: Arc<dyn OrderOps>,
    b: Arc<dyn OrderOps>,
    basis_b: Mutex<HashMap<u64, Arc<Vec<MatP>>>>,
}

impl TensorOrder {
    pub fn new(a: Arc<dyn OrderOps>, b: Arc<dyn OrderOps>) -> Self {
        TensorOrder { a, b, basis_b: Mutex::new(HashMap::new()) }
    }

    pub fn left(&self) -> &Arc<dyn OrderOps> {
        &self.a
    }

    pub fn right(&self) -> &Arc<dyn OrderOps> {
        &self.b
    }

    /// x ⊗ y in tensor coordinates.
    pub fn pure<T: Clone + Zero>(x: &[T], y: &[T]) -> Vec<T>
    where
        for<'a> &'a T: std::ops::Mul<&'a T, Output = T>,
    {
        let mut v = Vec::with_capacity(x.len() * y.len());
        for a in x {
            for b in y {
                v.push(a * b);
            }
        }
        v
    }

    fn right_basis_mod(&self, m: u64) -> Arc<Vec<MatP>> {
        let mut cache = self.basis_b.lock().unwrap();
        cache
            .entry(m)
            .or_insert_with(|| {
                let nb = self.b.rank();
                Arc::new(
                    (0..nb)
                        .map(|j| {
                            let mut e = vec![0u64; nb];
                            e[j] = 1 % m;
                            self.b.mult_matrix_mod(&e, m)
                        })
                        .collect(),
                )
            })
            .clone()
    }
}

/// Kronecker product of matrices modulo m.
pub fn kron_mod(x: &MatP, y: &MatP, m: u64) -> MatP {
    let (r, c) = (x.rows * y.rows, x.cols * y.cols);
    let mut out = MatP::zero(r, c, m);
    kron_add_into(&mut out, x, y, m);
    out
}

fn kron_add_into(out: &mut MatP, x: &MatP, y: &MatP, m: u64) {
    let c = x.cols * y.cols;
    for i1 in 0..x.rows {
        for i2 in 0..x.cols {
            let a = x.get(i1, i2);
            if a == 0 {
                continue;
            }
            for j1 in 0..y.rows {
                let row = (i1 * y.rows + j1) * c + i2 * y.cols;
                let yrow = y.row(j1);
                for (j2, &b) in yrow.iter().enumerate() {
                    if b != 0 {
                        let o = &mut out.data[row + j2];
                        *o = modp::add(*o, modp::mul(a, b, m), m);
                    }
                }
            }
        }
    }
}

impl OrderOps for TensorOrder {
    fn rank(&self) -> usize {
        self.a.rank() * self.b.rank()
    }

    fn one(&self) -> Vec<BigInt> {
        Self::pure(&self.a.one(), &self.b.one())
    }

    fn mult_matrix(&self, x: &[BigInt]) -> MatZ {
        let (na, nb) = (self.a.rank(), self.b.rank());
        let n = na * nb;
        let mut out = MatZ::zero(n, n);
        for j in 0..nb {
            let col: Vec<BigInt> = (0..na).map(|i| x[i * nb + j].clone()).collect();
            if col.iter().all(|c| c.is_zero()) {
                continue;
            }
            let ma = self.a.mult_matrix(&col);
            let mut e = vec![BigInt::zero(); nb];
            e[j] = BigInt::one();
            let mb = self.b.mult_matrix(&e);
            for i1 in 0..na {
                for i2 in 0..na {
                    let a = ma.get(i1, i2);
                    if a.is_zero() {
                        continue;
                    }
                    for j1 in 0..nb {
                        for j2 in 0..nb {
                            let b = mb.get(j1, j2);
                            if !b.is_zero() {
                                let (r, c) = (i1 * nb + j1, i2 * nb + j2);
                                let v = out.get(r, c) + a * b;
                                out.set(r, c, v);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn mult_matrix_mod(&self, x: &[u64], m: u64) -> MatP {
        let (na, nb) = (self.a.rank(), self.b.rank());
        let n = na * nb;
        let bb = self.right_basis_mod(m);
        let mut out = MatP::zero(n, n, m);
        for (j, mb) in bb.iter().enumerate() {
            let col: Vec<u64> = (0..na).map(|i| x[i * nb + j]).collect();
            if col.iter().all(|&c| c == 0) {
                continue;
            }
            let ma = self.a.mult_matrix_mod(&col, m);
            kron_add_into(&mut out, &ma, mb, m);
        }
        out
    }

    fn frobenius_mod(&self, ell: u64) -> MatP {
        kron_mod(&self.a.frobenius_mod(ell), &self.b.frobenius_mod(ell), ell)
    }
}

/// Left kernel {v : v·M = 0} over F_p, as echelon rows.
pub fn left_kernel_mod(m: &MatP) -> Vec<Vec<u64>> {
    let (k, _) = m.transpose().kernel();
    echelon_mod(k, m.rows, m.p)
}

/// Reduced echelon basis of the span of the given vectors over F_p.
pub fn echelon_mod(rows: Vec<Vec<u64>>, cols: usize, p: u64) -> Vec<Vec<u64>> {
    if rows.is_empty() {
        return rows;
    }
    let mut m = MatP::zero(rows.len(), cols, p);
    for (i, r) in rows.iter().enumerate() {
        m.data[i * cols..(i + 1) * cols].copy_from_slice(r);
    }
    let piv = m.rref();
    (0..piv.len()).map(|i| m.row(i).to_vec()).collect()
}

/// M^e over Z/m.
pub fn mat_pow_mod(m: &MatP, mut e: u64) -> MatP {
    let mut acc = MatP::identity(m.rows, m.p);
    let mut base = m.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(&base);
        }
        e >>= 1;
        if e > 0 {
            base = base.mul(&base);
        }
    }
    acc
}

/// The ℓ-radical of O/ℓO: kernel of a high enough power of Frobenius.
pub fn radical_mod(o: &dyn OrderOps, ell: u64) -> Vec<Vec<u64>> {
    let n = o.rank();
    let mut k = 1u64;
    let mut pk = ell as u128;
    while pk < n as u128 {
        pk *= ell as u128;
        k += 1;
    }
    let f = o.frobenius_mod(ell);
    left_kernel_mod(&mat_pow_mod(&f, k))
}

/// One round of maximalization at ℓ. Returns None when O is ℓ-maximal, else
/// the basis of the multiplier ring of the ℓ-radical in O-coordinates.
pub fn multiplier_ring_step(o: &dyn OrderOps, ell: u64) -> Option<MatQ> {
    let n = o.rank();
    let l = BigInt::from(ell);
    let rad = radical_mod(o, ell);
    // ℤ-basis of the radical I = ℓO + lifts
    let mut gens: Vec<Vec<BigInt>> = rad.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    for i in 0..n {
        let mut e = vec![BigInt::zero(); n];
        e[i] = l.clone();
        gens.push(e);
    }
    let gamma = hnf_with_modulus(&MatZ::from_rows(gens, n), &l);
    let ginv = gamma.to_q().inverse().expect("radical has full rank");
    // y ∈ O/ℓO with y·γ_k ∈ ℓI for all k
    let mut big = MatP::zero(n, n * n, ell);
    for k in 0..n {
        let mk = o.mult_matrix(gamma.row(k)).to_q().mul(&ginv);
        for i in 0..n {
            for j in 0..n {
                let v = mk.get(i, j);
                debug_assert!(v.is_integer());
                big.data[i * n * n + k * n + j] = big_mod_u64(&v.to_integer(), ell);
            }
        }
    }
    let ker = left_kernel_mod(&big);
    if ker.is_empty() {
        return None;
    }
    let mut rows: Vec<Vec<BigInt>> = ker.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    for i in 0..n {
        let mut e = vec![BigInt::zero(); n];
        e[i] = l.clone();
        rows.push(e);
    }
    let h = hnf_with_modulus(&MatZ::from_rows(rows, n), &l);
    let lq = Q::from_integer(l);
    Some(h.to_q().scale(&(Q::one() / lq)))
}

/// Canonical basis of the ℤ-module spanned by rational rows (full rank):
/// lower triangular Hermite form, so the first vector is the least positive
/// rational in the module.
pub fn canonical_basis(rows: &MatQ) -> MatQ {
    let n = rows.cols();
    let den = rows.max_denominator_lcm();
    let dq = Q::from_integer(den.clone());
    // reverse columns, row-style HNF, then reverse rows and columns back
    let ints: Vec<Vec<BigInt>> = (0..rows.rows())
        .map(|i| (0..n).rev().map(|j| (rows.get(i, j) * &dq).to_integer()).collect())
        .collect();
    let h = crate::linalg::hnf(&MatZ::from_rows(ints, n));
    let r = h.rows();
    let out: Vec<Vec<Q>> = (0..r)
        .rev()
        .map(|i| (0..n).rev().map(|j| Q::new(h.get(i, j).clone(), den.clone())).collect())
        .collect();
    MatQ::from_rows_with_cols(out, n)
}

/// An order of the field maximal at ℓ: ℤ[θ] enlarged by repeated
/// multiplier rings of the ℓ-radical until stable.
pub fn ell_maximal_order(field: &Arc<NumberField>, ell: u64) -> Result<OrderBasis> {
    if !crate::arith::is_prime64(ell) || ell >= 1 << 62 {
        return Err(Error::Precondition(format!("{ell} is not a prime below 2^62")));
    }
    let o = OrderBasis::equation_order(field, ell)?;
    let d = field.min_poly().discriminant()?;
    if field.degree() == 1 || crate::arith::valuation_int(d.numer(), &BigInt::from(ell)) < 2 {
        return Ok(o);
    }
    maximize(o)
}

/// Runs the multiplier-ring iteration on an existing order.
pub fn maximize(mut o: OrderBasis) -> Result<OrderBasis> {
    loop {
        match multiplier_ring_step(&o, o.ell) {
            None => return Ok(o),
            Some(rel) => {
                let b = canonical_basis(&rel.mul(&o.basis));
                o = OrderBasis::from_basis(&o.field, b, o.ell)?;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q;
    use crate::numfield::make_field;
    use crate::poly::PolyQ;

    #[test]
    fn sqrt5_at_2_has_index_2() {
        let k = make_field(&PolyQ::from_ints(&[-5, 0, 1])).unwrap();
        let o = ell_maximal_order(&k, 2).unwrap();
        assert_eq!(o.index(), q(2));
        let half = FieldElement::new(&k, vec![Q::new(1.into(), 2.into()), Q::new(1.into(), 2.into())]);
        assert!(o.integral_coords(&half).is_some());
        // idempotent
        let again = maximize(OrderBasis::from_basis(&k, o.basis().clone(), 2).unwrap()).unwrap();
        assert_eq!(again.basis(), o.basis());
    }

    #[test]
    fn unramified_orders_unchanged() {
        let gi = make_field(&PolyQ::from_ints(&[1, 0, 1])).unwrap();
        assert_eq!(ell_maximal_order(&gi, 5).unwrap().index(), q(1));
        let r2 = make_field(&PolyQ::from_ints(&[-2, 0, 1])).unwrap();
        assert_eq!(ell_maximal_order(&r2, 3).unwrap().index(), q(1));
        // x^2 + 3 at 2: index 2 via (1+sqrt(-3))/2
        let e = make_field(&PolyQ::from_ints(&[3, 0, 1])).unwrap();
        assert_eq!(ell_maximal_order(&e, 2).unwrap().index(), q(2));
        assert_eq!(ell_maximal_order(&e, 3).unwrap().index(), q(1));
    }

    #[test]
    fn cubic_index() {
        // θ = 2α with α^3 = α + 1, and ℤ[α] is maximal (disc −23)
        let k = make_field(&PolyQ::from_ints(&[-8, -4, 0, 1])).unwrap();
        assert_eq!(ell_maximal_order(&k, 2).unwrap().index(), q(8));
    }

    #[test]
    fn tensor_mult_matches_componentwise() {
        let a = make_field(&PolyQ::from_ints(&[-2, 0, 1])).unwrap();
        let b = make_field(&PolyQ::from_ints(&[1, 1, 1])).unwrap();
        let oa: Arc<dyn OrderOps> = Arc::new(OrderBasis::equation_order(&a, 7).unwrap());
        let ob: Arc<dyn OrderOps> = Arc::new(OrderBasis::equation_order(&b, 7).unwrap());
        let t = TensorOrder::new(oa.clone(), ob.clone());
        let x = TensorOrder::pure(&[BigInt::from(3), BigInt::from(1)], &[BigInt::from(2), BigInt::from(5)]);
        let y = TensorOrder::pure(&[BigInt::from(1), BigInt::from(4)], &[BigInt::from(0), BigInt::from(1)]);
        let xy = t.mult_matrix(&y).to_q().vec_mul(&x.iter().map(|c| Q::from_integer(c.clone())).collect::<Vec<_>>());
        // (3+√2)(1+4√2) = 11 + 13√2 ; (2+5ω)ω = 2ω + 5ω² = -5 - 3ω
        let expect = TensorOrder::pure(&[BigInt::from(11), BigInt::from(13)], &[BigInt::from(-5), BigInt::from(-3)]);
        assert_eq!(xy, expect.iter().map(|c| Q::from_integer(c.clone())).collect::<Vec<_>>());
        let m = 1_000_003;
        let xm = residues(&x, m);
        let ym = residues(&y, m);
        assert_eq!(mul_mod(&t, &xm, &ym, m), residues(&expect, m));
    }
}
