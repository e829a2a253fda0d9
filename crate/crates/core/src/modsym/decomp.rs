//! Splitting the new subspace into Hecke-irreducible blocks (newform
//! classes) and reading off eigenvalues in the block's eigenvalue field.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::genus::index_mu;
use super::space::{ModSymSpace, Subspace};
use crate::arith::{big_mod_u64, primes_up_to, rat_mod_u64};
use crate::error::{Error, Result};
use crate::linalg::modular::rref_from_images;
use crate::linalg::{MatQ, Q};
use crate::modp::{self, MatP};
use crate::numfield::{FieldElement, NumberField};
use crate::poly::PolyQ;

/// Anything with a level, an eigenvalue field and Hecke eigenvalues.
pub trait Eigenform: Send + Sync {
    fn level(&self) -> u64;
    /// 1-based position within its level.
    fn index(&self) -> usize;
    fn field(&self) -> &Arc<NumberField>;
    fn eigenvalue(&self, q: u64) -> Result<FieldElement>;
}

/// A ℤ-linear combination Σ c·T_p of Hecke operators at good primes.
pub type HeckeCombination = Vec<(i64, u64)>;

pub struct NewformClass {
    level: u64,
    index: usize,
    space: Arc<ModSymSpace>,
    subspace: Subspace,
    field: Arc<NumberField>,
    generator: HeckeCombination,
    cyclic_row: usize,
    krylov_inv: MatQ,
    cache: Mutex<BTreeMap<u64, FieldElement>>,
}

impl fmt::Debug for NewformClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NewformClass")
            .field("level", &self.level)
            .field("index", &self.index)
            .field("field", &self.field)
            .field("generator", &self.generator)
            .finish()
    }
}

impl NewformClass {
    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn eigen_field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn degree(&self) -> usize {
        self.field.degree()
    }

    pub fn space(&self) -> &Arc<ModSymSpace> {
        &self.space
    }

    /// Basis of the block inside the ambient modular symbols.
    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    /// The operator whose class generates the eigenvalue field.
    pub fn generator(&self) -> &HeckeCombination {
        &self.generator
    }

    /// Hecke eigenvalue a_q (the U_q eigenvalue when q divides the level).
    pub fn eigenvalue(&self, q: u64) -> Result<FieldElement> {
        if !crate::arith::is_prime64(q) {
            return Err(Error::Precondition(format!("{q} is not prime")));
        }
        if let Some(a) = self.cache.lock().unwrap().get(&q) {
            return Ok(a.clone());
        }
        let t = self.space.hecke_ambient(q);
        let w = t.apply(self.subspace.basis.row(self.cyclic_row));
        let u = self.subspace.coordinates(&w);
        let c = self.krylov_inv.vec_mul(&u);
        let a = FieldElement::new(&self.field, c);
        self.cache.lock().unwrap().insert(q, a.clone());
        Ok(a)
    }

    /// Eigenvalues currently cached, by prime.
    pub fn cached_eigenvalues(&self) -> BTreeMap<u64, FieldElement> {
        self.cache.lock().unwrap().clone()
    }

    /// Matrix of T_q on the block, in the block's echelon basis.
    pub fn hecke_matrix(&self, q: u64) -> MatQ {
        self.space.hecke_on(&self.subspace, q)
    }
}

impl Eigenform for NewformClass {
    fn level(&self) -> u64 {
        self.level
    }
    fn index(&self) -> usize {
        self.index
    }
    fn field(&self) -> &Arc<NumberField> {
        &self.field
    }
    fn eigenvalue(&self, q: u64) -> Result<FieldElement> {
        NewformClass::eigenvalue(self, q)
    }
}

/// Decomposes the new subspace into newform classes, sorted by field degree
/// and then by the traces of a_2, a_3, a_5, ….
pub fn decompose(space: &Arc<ModSymSpace>) -> Result<Vec<NewformClass>> {
    let n = space.level();
    let w = space.new_subspace().clone();
    if w.dim() == 0 {
        return Ok(Vec::new());
    }
    let limit = index_mu(n).div_ceil(6).max(50);
    let good: Vec<u64> = primes_up_to(limit).into_iter().filter(|p| !n.is_multiple_of(*p)).collect();
    let schedule = operator_schedule(&good);
    let mut ops: BTreeMap<u64, MatQ> = BTreeMap::new();
    let mut op_on_w = |p: u64| -> MatQ { ops.entry(p).or_insert_with(|| space.hecke_on(&w, p)).clone() };

    let mut blocks: Vec<(MatQ, HeckeCombination)> = Vec::new();
    let mut work: Vec<Subspace> = vec![Subspace::full(w.dim())];
    'nodes: while let Some(v) = work.pop() {
        for comb in &schedule {
            let mut a = MatQ::zero(v.dim(), v.dim());
            for &(c, p) in comb {
                let t = op_on_w(p);
                let r = v.restrict(&v.basis.mul(&t));
                a = a.add(&r.scale(&Q::from_integer(BigInt::from(c))));
            }
            let cp = a.charpoly()?;
            let fac = cp.factor()?;
            if fac.len() == 1 {
                if fac[0].1 == 1 {
                    blocks.push((v.basis.clone(), comb.clone()));
                    continue 'nodes;
                }
                continue;
            }
            for (g, e) in &fac {
                let k = generalized_kernel(&a, &cp, g, *e)?;
                work.push(Subspace::from_rows(k.mul(&v.basis)));
            }
            continue 'nodes;
        }
        return Err(Error::Computation(format!(
            "level {n}: block of dimension {} did not split into irreducible pieces",
            v.dim()
        )));
    }

    let mut classes = Vec::with_capacity(blocks.len());
    for (rows, generator) in blocks {
        let sub = Subspace::from_rows(rows.mul(&w.basis));
        classes.push(make_class(space, sub, generator)?);
    }
    let mut keyed: Vec<(Vec<Q>, NewformClass)> = Vec::new();
    let primes = primes_up_to(limit.max(100));
    for c in classes {
        keyed.push((Vec::new(), c));
    }
    // extend trace keys only as far as needed to separate classes
    for &q in &primes {
        let ambiguous = keyed.iter().enumerate().any(|(i, (k, c))| {
            keyed.iter().enumerate().any(|(j, (k2, c2))| i != j && c.degree() == c2.degree() && k == k2)
        });
        if !ambiguous {
            break;
        }
        for (k, c) in keyed.iter_mut() {
            k.push(c.eigenvalue(q)?.trace());
        }
    }
    keyed.sort_by(|(k1, c1), (k2, c2)| c1.degree().cmp(&c2.degree()).then_with(|| cmp_keys(k1, k2)));
    Ok(keyed
        .into_iter()
        .enumerate()
        .map(|(i, (_, mut c))| {
            c.index = i + 1;
            c
        })
        .collect())
}

fn cmp_keys(a: &[Q], b: &[Q]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Single good primes in increasing order, then small combinations.
fn operator_schedule(good: &[u64]) -> Vec<HeckeCombination> {
    let mut s: Vec<HeckeCombination> = good.iter().map(|&p| vec![(1, p)]).collect();
    for (i, &p) in good.iter().take(6).enumerate() {
        for &r in good.iter().skip(i + 1).take(6) {
            for c in [1i64, -1, 2, 3] {
                s.push(vec![(1, p), (c, r)]);
            }
        }
    }
    s
}

fn make_class(space: &Arc<ModSymSpace>, sub: Subspace, generator: HeckeCombination) -> Result<NewformClass> {
    let d = sub.dim();
    let mut a = MatQ::zero(d, d);
    for &(c, p) in &generator {
        let t = space.hecke_on(&sub, p);
        a = a.add(&t.scale(&Q::from_integer(BigInt::from(c))));
    }
    let g = a.charpoly()?;
    let field = Arc::new(NumberField::new_unchecked(&g)?);
    // sparsest basis row keeps eigenvalue evaluation cheap
    let cyclic_row = (0..d)
        .min_by_key(|&i| sub.basis.row(i).iter().filter(|x| !x.is_zero()).count())
        .expect("nonempty block");
    let mut kry = Vec::with_capacity(d);
    let mut cur = vec![Q::zero(); d];
    cur[cyclic_row] = Q::one();
    for _ in 0..d {
        let next = a.vec_mul(&cur);
        kry.push(std::mem::replace(&mut cur, next));
    }
    let krylov_inv = MatQ::from_rows_with_cols(kry, d)
        .inverse()
        .ok_or_else(|| Error::Computation("cyclic vector failed to generate the block".into()))?;
    Ok(NewformClass {
        level: space.level(),
        index: 0,
        space: space.clone(),
        subspace: sub,
        field,
        generator,
        cyclic_row,
        krylov_inv,
        cache: Mutex::new(BTreeMap::new()),
    })
}

/// Basis (rows, echelon) of ker g(A)^e for an irreducible factor g^e of the
/// characteristic polynomial cp of A acting on row vectors. The space equals
/// the image of h(A), h = cp / g^e; it is spanned modulo primes by Krylov
/// sequences of the vectors e_i·h(A), and the reconstruction is certified by
/// A-stability and the characteristic polynomial of the restriction.
fn generalized_kernel(a: &MatQ, cp: &PolyQ, g: &PolyQ, e: u32) -> Result<MatQ> {
    let k = a.rows();
    let ge = g.pow(e);
    let dim = ge.degree().unwrap();
    let h = cp.divrem(&ge).0;
    let den = a.max_denominator_lcm();
    let aint: Vec<BigInt> = a.data().iter().map(|x| (x * &den).to_integer()).collect();
    let image = |p: u64| -> Option<(Vec<u64>, Vec<usize>)> {
        let dp = big_mod_u64(&den, p);
        if dp == 0 {
            return None;
        }
        let dinv = modp::inv(dp, p);
        let mut ap = MatP::zero(k, k, p);
        for (o, x) in ap.data.iter_mut().zip(&aint) {
            *o = modp::mul(big_mod_u64(x, p), dinv, p);
        }
        let hp: Option<Vec<u64>> = h.coeffs().iter().map(|c| rat_mod_u64(c, p)).collect();
        let hp = hp?;
        let mut ech = EchelonP::new(k, p);
        'outer: for i in 0..k {
            // v = e_i · h(A) by Horner
            let mut v = vec![0u64; k];
            for c in hp.iter().rev() {
                v = ap.mul_vec_left(&v);
                v[i] = modp::add(v[i], *c, p);
            }
            for _ in 0..dim {
                if !ech.insert(&v) {
                    break;
                }
                if ech.len() == dim {
                    break 'outer;
                }
                v = ap.mul_vec_left(&v);
            }
        }
        if ech.len() != dim {
            return None;
        }
        Some(ech.into_rref())
    };
    let accept = |cand: &MatQ, pivots: &[usize]| -> bool {
        let img = cand.mul(a);
        let sub = Subspace { basis: cand.clone(), pivots: pivots.to_vec() };
        for i in 0..img.rows() {
            if !sub.contains(img.row(i)) {
                return false;
            }
        }
        sub.restrict(&img).charpoly().map(|c| c == ge).unwrap_or(false)
    };
    rref_from_images(dim, k, 4000, image, accept)
        .map(|(m, _)| m)
        .ok_or_else(|| Error::Computation("generalized eigenspace reconstruction failed".into()))
}

/// Incrementally built row echelon basis modulo p.
struct EchelonP {
    p: u64,
    cols: usize,
    rows: Vec<(usize, Vec<u64>)>,
}

impl EchelonP {
    fn new(cols: usize, p: u64) -> Self {
        EchelonP { p, cols, rows: Vec::new() }
    }

    fn len(&self) -> usize {
        self.rows.len()
    }

    /// Adds v to the span; false if it was already contained.
    fn insert(&mut self, v: &[u64]) -> bool {
        let p = self.p;
        let mut v = v.to_vec();
        for (piv, r) in &self.rows {
            let f = v[*piv];
            if f != 0 {
                let nf = p - f;
                for (x, &y) in v.iter_mut().zip(r) {
                    if y != 0 {
                        *x = modp::add(*x, modp::mul(nf, y, p), p);
                    }
                }
            }
        }
        let Some(piv) = v.iter().position(|&x| x != 0) else { return false };
        let iv = modp::inv(v[piv], p);
        for x in v.iter_mut() {
            *x = modp::mul(*x, iv, p);
        }
        self.rows.push((piv, v));
        true
    }

    fn into_rref(self) -> (Vec<u64>, Vec<usize>) {
        let mut m = MatP::zero(self.rows.len(), self.cols, self.p);
        for (i, (_, r)) in self.rows.iter().enumerate() {
            m.data[i * self.cols..(i + 1) * self.cols].copy_from_slice(r);
        }
        let piv = m.rref();
        (m.data, piv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q;
    use crate::modsym::build_space;

    fn classes(n: u64) -> Vec<NewformClass> {
        decompose(&Arc::new(build_space(n, 1).unwrap())).unwrap()
    }

    #[test]
    fn level_11() {
        let c = classes(11);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].degree(), 1);
        assert_eq!(c[0].eigenvalue(7).unwrap().coords(), &[q(-2)]);
        assert_eq!(c[0].eigenvalue(2).unwrap().coords(), &[q(-2)]);
    }

    #[test]
    fn level_23() {
        let c = classes(23);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].degree(), 2);
        assert_eq!(c[0].eigenvalue(2).unwrap().min_poly(), PolyQ::from_ints(&[-1, 1, 1]));
    }

    #[test]
    fn level_26() {
        let c = classes(26);
        assert_eq!(c.len(), 2);
        assert!(c.iter().all(|x| x.degree() == 1));
        let a2: Vec<Q> = c.iter().map(|x| x.eigenvalue(2).unwrap().trace()).collect();
        assert_eq!(a2, vec![q(-1), q(1)]);
        assert_eq!(c[1].eigenvalue(3).unwrap().trace(), q(-3));
        assert_eq!(c[0].index(), 1);
        assert_eq!(c[1].index(), 2);
    }

    #[test]
    fn empty_level() {
        assert!(classes(13).is_empty());
        assert!(classes(22).is_empty());
    }
}
