//! Spaces of weight-2 modular symbols for Γ₀(N) presented by Manin symbols.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::cusps::{Cusp, CuspClasses};
use super::heilbronn::{self, Mat2};
use super::p1::P1List;
use crate::arith::{is_prime64, prime_divisors};
use crate::error::{Error, Result};
use crate::linalg::{integer_vector, modular, MatQ, Q};

/// Sparse vector of numerators over the space's common denominator.
pub type SparseVec = Vec<(u32, i64)>;

/// The ambient space: the quotient of the free module on P¹(ℤ/N) by the
/// 2-term, 3-term and sign relations.
#[derive(Debug)]
pub struct AmbientSpace {
    level: u64,
    sign: i64,
    p1: P1List,
    coords: Vec<SparseVec>,
    den: i64,
    basis: Vec<usize>,
}

fn s_action(c: i64, d: i64) -> (i64, i64) {
    (d, -c)
}

fn t_action(c: i64, d: i64) -> (i64, i64) {
    (d, -c - d)
}

impl AmbientSpace {
    pub fn new(level: u64, sign: i64) -> Result<Self> {
        if level == 0 {
            return Err(Error::Precondition("level must be positive".into()));
        }
        if sign != 1 && sign != -1 {
            return Err(Error::Precondition(format!("sign must be +1 or -1, got {sign}")));
        }
        let p1 = P1List::new(level);
        let n = p1.len();
        let idx = |c: i64, d: i64| p1.index(c, d).expect("Manin symbol in P1");
        // 2-term relations x = -xS, x = sign * xη
        let mut gen_of: Vec<Option<(usize, i64)>> = vec![None; n];
        let mut done = vec![false; n];
        let mut ngens = 0usize;
        let mut gen_symbol = Vec::new();
        for i in 0..n {
            if done[i] {
                continue;
            }
            let e = p1.get(i);
            let (c, d) = (e.c as i64, e.d as i64);
            let (sc, sd) = s_action(c, d);
            let orbit = [
                (i, 1i64),
                (idx(sc, sd), -1),
                (idx(-c, d), sign),
                (idx(-sc, sd), -sign),
            ];
            let mut killed = false;
            for &(a, sa) in &orbit {
                for &(b, sb) in &orbit {
                    if a == b && sa != sb {
                        killed = true;
                    }
                }
            }
            for &(a, sa) in &orbit {
                done[a] = true;
                gen_of[a] = if killed { None } else { Some((ngens, sa)) };
            }
            if !killed {
                gen_symbol.push(i);
                ngens += 1;
            }
        }
        // 3-term relations x + xT + xT² = 0
        let mut seen = vec![false; n];
        let mut rels: Vec<Vec<BigInt>> = Vec::new();
        for i in 0..n {
            if seen[i] {
                continue;
            }
            let e = p1.get(i);
            let (c, d) = (e.c as i64, e.d as i64);
            let (c1, d1) = t_action(c, d);
            let (c2, d2) = t_action(c1, d1);
            let j = idx(c1, d1);
            let k = idx(c2, d2);
            seen[i] = true;
            seen[j] = true;
            seen[k] = true;
            let mut row: HashMap<usize, i64> = HashMap::new();
            for s in [i, j, k] {
                if let Some((g, sg)) = gen_of[s] {
                    *row.entry(g).or_insert(0) += sg;
                }
            }
            if row.values().any(|&v| v != 0) {
                let mut v = vec![BigInt::zero(); ngens];
                for (g, x) in row {
                    v[g] = BigInt::from(x);
                }
                rels.push(v);
            }
        }
        let (r, pivots) = modular::rref_int(&rels, ngens);
        let mut is_pivot = vec![None; ngens];
        for (row, &pc) in pivots.iter().enumerate() {
            is_pivot[pc] = Some(row);
        }
        let free: Vec<usize> = (0..ngens).filter(|&g| is_pivot[g].is_none()).collect();
        let mut free_pos = vec![usize::MAX; ngens];
        for (k, &g) in free.iter().enumerate() {
            free_pos[g] = k;
        }
        // coordinates of each generator in the basis of free generators
        let mut den = BigInt::from(1);
        for i in 0..r.rows() {
            for x in r.row(i) {
                den = den.lcm(x.denom());
            }
        }
        let den_i = den.to_i64().expect("relation denominators fit in i64");
        let mut gen_coords: Vec<SparseVec> = Vec::with_capacity(ngens);
        for g in 0..ngens {
            match is_pivot[g] {
                None => gen_coords.push(vec![(free_pos[g] as u32, den_i)]),
                Some(row) => {
                    let mut v = Vec::new();
                    for (k, &f) in free.iter().enumerate() {
                        let x = r.get(row, f);
                        if !x.is_zero() {
                            let num = (-(x * BigRational::from_integer(den.clone()))).to_integer();
                            v.push((k as u32, num.to_i64().expect("coordinate fits in i64")));
                        }
                    }
                    gen_coords.push(v);
                }
            }
        }
        let coords: Vec<SparseVec> = (0..n)
            .map(|i| match gen_of[i] {
                None => Vec::new(),
                Some((g, s)) => gen_coords[g].iter().map(|&(k, x)| (k, s * x)).collect(),
            })
            .collect();
        let basis = free.iter().map(|&g| gen_symbol[g]).collect();
        Ok(AmbientSpace { level, sign, p1, coords, den: den_i, basis })
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn sign(&self) -> i64 {
        self.sign
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn p1(&self) -> &P1List {
        &self.p1
    }

    /// Common denominator of all Manin symbol coordinates.
    pub fn den(&self) -> i64 {
        self.den
    }

    /// Manin symbol index of each basis element.
    pub fn basis_symbols(&self) -> &[usize] {
        &self.basis
    }

    /// Coordinates (numerators over `den`) of the Manin symbol (c : d).
    pub fn symbol_coords(&self, c: i64, d: i64) -> &[(u32, i64)] {
        match self.p1.index(c, d) {
            Some(i) => &self.coords[i],
            None => &[],
        }
    }

    fn add_symbol(&self, acc: &mut [i64], c: i64, d: i64, mult: i64) {
        if let Some(i) = self.p1.index(c, d) {
            for &(k, x) in &self.coords[i] {
                acc[k as usize] += mult * x;
            }
        }
    }

    /// Coordinates (numerators over `den`) of the modular symbol {0, u/v}
    /// via the continued fraction expansion of u/v (v = 0 means ∞).
    pub fn zero_to(&self, acc: &mut [i64], u: i64, v: i64, mult: i64) {
        // j = -1 term: {0, ∞}
        self.add_symbol(acc, 0, 1, mult);
        if v == 0 {
            return;
        }
        let (mut a, mut b) = (u, v);
        if b < 0 {
            a = -a;
            b = -b;
        }
        let (mut q_prev2, mut q_prev1) = (1i64, 0i64);
        let mut sgn = -1i64; // (-1)^(j-1) at j = 0
        while b != 0 {
            let (qt, r) = a.div_mod_floor(&b);
            let qj = qt * q_prev1 + q_prev2;
            self.add_symbol(acc, sgn * qj, q_prev1, mult);
            q_prev2 = q_prev1;
            q_prev1 = qj;
            sgn = -sgn;
            a = b;
            b = r;
        }
    }

    /// Lift of the Manin symbol (c : d) to [[a, b], [c', d']] in SL₂(ℤ).
    pub fn lift_to_sl2(&self, c: i64, d: i64) -> Mat2 {
        lift_to_sl2(self.level as i64, c, d)
    }

    /// Image of Σ_h x·h over the Heilbronn matrices h of one ambient basis
    /// element, as numerators over `den`.
    fn apply_heilbronn(&self, basis_index: usize, mats: &[Mat2]) -> Vec<i64> {
        let e = self.p1.get(self.basis[basis_index]);
        let (u, v) = (e.c as i64, e.d as i64);
        let n = self.level as i64;
        let mut acc = vec![0i64; self.dim()];
        for m in mats {
            let c = (u * m[0] + v * m[2]).rem_euclid(n);
            let d = (u * m[1] + v * m[3]).rem_euclid(n);
            self.add_symbol(&mut acc, c, d, 1);
        }
        acc
    }
}

pub fn lift_to_sl2(n: i64, c: i64, d: i64) -> Mat2 {
    let (mut c, mut d) = (c.rem_euclid(n.max(1)), d.rem_euclid(n.max(1)));
    if n == 1 {
        c = 0;
        d = 1;
    }
    if c == 0 {
        c = n;
    }
    while c.gcd(&d) != 1 {
        d += n;
    }
    let e = d.extended_gcd(&c);
    // a d - b c = 1
    [e.x, -e.y, c, d]
}

/// Matrix of a Hecke operator on the ambient basis (rows act from the
/// right on row vectors): entry (i, j) is rows[i][j] / den.
#[derive(Clone, Debug)]
pub struct HeckeAmbient {
    pub q: u64,
    pub den: i64,
    pub rows: Vec<Vec<i64>>,
}

impl HeckeAmbient {
    pub fn to_matq(&self) -> MatQ {
        let n = self.rows.len();
        let d = BigInt::from(self.den);
        let mut data = Vec::with_capacity(n * n);
        for r in &self.rows {
            for &x in r {
                data.push(BigRational::new(BigInt::from(x), d.clone()));
            }
        }
        MatQ::new(n, n, data)
    }

    /// v · T for a rational row vector v.
    pub fn apply(&self, v: &[Q]) -> Vec<Q> {
        let (s, vi) = integer_vector(v);
        let n = self.rows.len();
        let mut acc = vec![BigInt::zero(); n];
        for (x, row) in vi.iter().zip(&self.rows) {
            if x.is_zero() {
                continue;
            }
            for (a, &t) in acc.iter_mut().zip(row) {
                if t != 0 {
                    *a += x * t;
                }
            }
        }
        let scale = &s * BigRational::from_integer(BigInt::from(self.den));
        acc.into_iter().map(|a| BigRational::from_integer(a) / &scale).collect()
    }

    /// Rows of V·T for the rows of V.
    pub fn apply_rows(&self, v: &MatQ) -> MatQ {
        let rows: Vec<Vec<Q>> = (0..v.rows()).map(|i| self.apply(v.row(i))).collect();
        MatQ::from_rows_with_cols(rows, self.rows.len())
    }
}

/// A subspace given by a basis in reduced row echelon form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    pub basis: MatQ,
    pub pivots: Vec<usize>,
}

impl Subspace {
    pub fn from_rows(rows: MatQ) -> Self {
        let (basis, pivots) = rows.rref();
        Subspace { basis, pivots }
    }

    pub fn full(dim: usize) -> Self {
        Subspace { basis: MatQ::identity(dim), pivots: (0..dim).collect() }
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.cols()
    }

    /// Coordinates of a vector assumed to lie in the subspace.
    pub fn coordinates(&self, v: &[Q]) -> Vec<Q> {
        self.pivots.iter().map(|&p| v[p].clone()).collect()
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        let c = self.coordinates(v);
        self.basis.vec_mul(&c) == v
    }

    /// Matrix of an operator (given by its action on rows) restricted to
    /// this subspace, assuming stability.
    pub fn restrict(&self, image_rows: &MatQ) -> MatQ {
        image_rows.select_cols(&self.pivots)
    }
}

/// Weight-2 modular symbols for Γ₀(N) with sign, with cuspidal and new
/// subspaces and a per-prime cache of Hecke operators.
#[derive(Debug)]
pub struct ModSymSpace {
    ambient: AmbientSpace,
    cusps: CuspClasses,
    cuspidal: Subspace,
    new: OnceLock<Subspace>,
    hecke: Mutex<HashMap<u64, Arc<HeckeAmbient>>>,
}

impl ModSymSpace {
    pub fn new(level: u64, sign: i64) -> Result<Self> {
        let ambient = AmbientSpace::new(level, sign)?;
        let mut cusps = CuspClasses::new(level);
        let n = level as i64;
        let dim = ambient.dim();
        let mut entries: Vec<Vec<(usize, i64)>> = Vec::with_capacity(dim);
        for &s in ambient.basis_symbols() {
            let e = ambient.p1().get(s);
            let m = lift_to_sl2(n, e.c as i64, e.d as i64);
            let mut row = Vec::new();
            for (cusp, mult) in [(Cusp::new(m[0], m[2]), 1i64), (Cusp::new(m[1], m[3]), -1)] {
                let (k, eps) = cusps.class_of(cusp);
                // sign quotient: [-x] = sign·[x]
                let f = if eps == 1 { 1 } else { sign };
                row.push((k, mult * f));
            }
            entries.push(row);
        }
        let ncusps = cusps.len();
        let mut bmat = MatQ::zero(dim, ncusps);
        for (i, row) in entries.iter().enumerate() {
            for &(k, x) in row {
                // classes with [x] = -[x] vanish in the quotient
                if sign == -1 && cusps.is_self_conjugate(k) {
                    continue;
                }
                let cur = bmat.get(i, k).clone();
                bmat.set(i, k, cur + Q::from_integer(BigInt::from(x)));
            }
        }
        let ker = bmat.left_kernel();
        let cuspidal = Subspace::from_rows(MatQ::from_rows_with_cols(ker, dim));
        Ok(ModSymSpace {
            ambient,
            cusps,
            cuspidal,
            new: OnceLock::new(),
            hecke: Mutex::new(HashMap::new()),
        })
    }

    pub fn level(&self) -> u64 {
        self.ambient.level
    }

    pub fn sign(&self) -> i64 {
        self.ambient.sign
    }

    pub fn ambient(&self) -> &AmbientSpace {
        &self.ambient
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient.dim()
    }

    pub fn num_cusp_classes(&self) -> usize {
        self.cusps.len()
    }

    pub fn cuspidal(&self) -> &Subspace {
        &self.cuspidal
    }

    /// Hecke operator T_q (U_q when q | N) on the ambient space, cached.
    pub fn hecke_ambient(&self, q: u64) -> Arc<HeckeAmbient> {
        if let Some(h) = self.hecke.lock().unwrap().get(&q) {
            return h.clone();
        }
        let h = Arc::new(self.compute_hecke(q));
        let mut cache = self.hecke.lock().unwrap();
        cache.entry(q).or_insert(h).clone()
    }

    fn compute_hecke(&self, q: u64) -> HeckeAmbient {
        assert!(is_prime64(q), "Hecke operators are computed for primes");
        let mats = if self.level().is_multiple_of(q) { heilbronn::merel(q) } else { heilbronn::cremona(q) };
        let rows = (0..self.ambient.dim()).map(|j| self.ambient.apply_heilbronn(j, &mats)).collect();
        HeckeAmbient { q, den: self.ambient.den, rows }
    }

    /// Matrix of T_q on the cuspidal subspace (in its echelon basis).
    pub fn hecke_operator(&self, q: u64) -> MatQ {
        let t = self.hecke_ambient(q);
        self.cuspidal.restrict(&t.apply_rows(&self.cuspidal.basis))
    }

    /// Matrix of T_q restricted to a stable subspace.
    pub fn hecke_on(&self, w: &Subspace, q: u64) -> MatQ {
        let t = self.hecke_ambient(q);
        w.restrict(&t.apply_rows(&w.basis))
    }

    /// New subspace: the intersection inside the cuspidal subspace of the
    /// kernels of both degeneracy maps to level N/p for every prime p | N.
    pub fn new_subspace(&self) -> &Subspace {
        self.new.get_or_init(|| self.compute_new())
    }

    fn compute_new(&self) -> Subspace {
        let n = self.level();
        let c = &self.cuspidal;
        if c.dim() == 0 {
            return c.clone();
        }
        let mut blocks: Vec<MatQ> = Vec::new();
        for p in prime_divisors(n) {
            let m = n / p;
            let low = AmbientSpace::new(m, self.sign()).expect("valid lower level");
            if low.dim() == 0 {
                continue;
            }
            let (d1, dp) = degeneracy_maps(&self.ambient, &low, p);
            blocks.push(d1);
            blocks.push(dp);
        }
        if blocks.is_empty() {
            return c.clone();
        }
        let dim = self.ambient.dim();
        let total: usize = blocks.iter().map(|b| b.cols()).sum();
        let mut big = MatQ::zero(dim, total);
        let mut off = 0;
        for b in &blocks {
            for i in 0..dim {
                for j in 0..b.cols() {
                    let x = b.get(i, j);
                    if !x.is_zero() {
                        big.set(i, off + j, x.clone());
                    }
                }
            }
            off += b.cols();
        }
        let img = c.basis.mul(&big);
        let ker = img.left_kernel();
        if ker.is_empty() {
            return Subspace { basis: MatQ::zero(0, dim), pivots: Vec::new() };
        }
        let x = MatQ::from_rows_with_cols(ker, c.dim());
        Subspace::from_rows(x.mul(&c.basis))
    }
}

/// The two degeneracy maps from level N to level M = N/p on ambient
/// bases: (c:d) ↦ (c:d) mod M, and g{0,∞} ↦ {p·g0, p·g∞}.
pub fn degeneracy_maps(high: &AmbientSpace, low: &AmbientSpace, p: u64) -> (MatQ, MatQ) {
    let n = high.level() as i64;
    let dim_h = high.dim();
    let dim_l = low.dim();
    let den = BigInt::from(high.den()) * BigInt::from(low.den());
    let mut m1 = MatQ::zero(dim_h, dim_l);
    let mut mp = MatQ::zero(dim_h, dim_l);
    let p = p as i64;
    for (i, &s) in high.basis_symbols().iter().enumerate() {
        let e = high.p1().get(s);
        let (c, d) = (e.c as i64, e.d as i64);
        // the basis element is the Manin symbol itself (coordinate den/den)
        let mut acc = vec![0i64; dim_l];
        low.add_symbol(&mut acc, c, d, high.den());
        for (j, &x) in acc.iter().enumerate() {
            if x != 0 {
                m1.set(i, j, BigRational::new(BigInt::from(x), den.clone()));
            }
        }
        let g = lift_to_sl2(n, c, d);
        // g{0,∞} = {b/d', a/c'} ↦ {0, p a/c'} − {0, p b/d'}
        let mut acc = vec![0i64; dim_l];
        low.zero_to(&mut acc, p * g[0], g[2], high.den());
        if g[3] == 0 {
            low.zero_to(&mut acc, 1, 0, -high.den());
        } else {
            low.zero_to(&mut acc, p * g[1], g[3], -high.den());
        }
        for (j, &x) in acc.iter().enumerate() {
            if x != 0 {
                mp.set(i, j, BigRational::new(BigInt::from(x), den.clone()));
            }
        }
    }
    (m1, mp)
}

