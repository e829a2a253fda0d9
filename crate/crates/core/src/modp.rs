//! Arithmetic over prime fields F_p with p < 2^62: scalars, dense matrices and
//! univariate polynomials including factorization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[inline]
pub fn add(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub fn sub(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

#[inline]
pub fn neg(a: u64, p: u64) -> u64 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

#[inline]
pub fn mul(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn pow(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul(r, a, p);
        }
        a = mul(a, a, p);
        e >>= 1;
    }
    r
}

pub fn inv(a: u64, p: u64) -> u64 {
    assert!(!a.is_multiple_of(p), "inverse of zero mod {p}");
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (p as i128, (a % p) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    t.rem_euclid(p as i128) as u64
}

pub fn from_i64(x: i64, p: u64) -> u64 {
    x.rem_euclid(p as i64) as u64
}

/// Symmetric lift to (-p/2, p/2].
pub fn to_signed(x: u64, p: u64) -> i64 {
    if x > p / 2 {
        -((p - x) as i64)
    } else {
        x as i64
    }
}

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatP {
    pub rows: usize,
    pub cols: usize,
    pub p: u64,
    pub data: Vec<u64>,
}

impl MatP {
    pub fn zero(rows: usize, cols: usize, p: u64) -> Self {
        MatP { rows, cols, p, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize, p: u64) -> Self {
        let mut m = Self::zero(n, n, p);
        for i in 0..n {
            m.data[i * n + i] = 1 % p;
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, other: &MatP) -> MatP {
        assert_eq!(self.cols, other.rows);
        let p = self.p;
        let mut out = MatP::zero(self.rows, other.cols, p);
        let mut acc = vec![0u128; other.cols];
        // Accumulate in u128 and reduce lazily; p < 2^62 so 16 products fit.
        for i in 0..self.rows {
            acc.iter_mut().for_each(|a| *a = 0);
            let mut pending = 0;
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                let orow = other.row(k);
                for (x, &b) in acc.iter_mut().zip(orow) {
                    *x += a as u128 * b as u128;
                }
                pending += 1;
                if pending == 15 {
                    acc.iter_mut().for_each(|x| *x %= p as u128);
                    pending = 0;
                }
            }
            for (j, x) in acc.iter().enumerate() {
                out.data[i * other.cols + j] = (x % p as u128) as u64;
            }
        }
        out
    }

    pub fn mul_vec_left(&self, v: &[u64]) -> Vec<u64> {
        // v * M
        let p = self.p;
        let mut acc = vec![0u128; self.cols];
        let mut pending = 0;
        for (k, &a) in v.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (x, &b) in acc.iter_mut().zip(self.row(k)) {
                *x += a as u128 * b as u128;
            }
            pending += 1;
            if pending == 15 {
                acc.iter_mut().for_each(|x| *x %= p as u128);
                pending = 0;
            }
        }
        acc.into_iter().map(|x| (x % p as u128) as u64).collect()
    }

    pub fn transpose(&self) -> MatP {
        let mut t = MatP::zero(self.cols, self.rows, self.p);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    /// In-place reduced row echelon form; returns pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let p = self.p;
        let (rows, cols) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(piv) = (r..rows).find(|&i| self.data[i * cols + c] != 0) else {
                continue;
            };
            if piv != r {
                for j in c..cols {
                    self.data.swap(piv * cols + j, r * cols + j);
                }
            }
            let iv = inv(self.data[r * cols + c], p);
            for j in c..cols {
                self.data[r * cols + j] = mul(self.data[r * cols + j], iv, p);
            }
            let pivot_row: Vec<u64> = self.data[r * cols + c..(r + 1) * cols].to_vec();
            for i in 0..rows {
                if i == r {
                    continue;
                }
                let f = self.data[i * cols + c];
                if f == 0 {
                    continue;
                }
                let nf = p - f;
                let row = &mut self.data[i * cols + c..(i + 1) * cols];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    if y != 0 {
                        *x = ((*x as u128 + nf as u128 * y as u128) % p as u128) as u64;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Right kernel {v : M v = 0} as a list of basis vectors in echelon form
    /// (1 at the free column, 0 at other free columns). Also returns pivots.
    pub fn kernel(&self) -> (Vec<Vec<u64>>, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref();
        let p = self.p;
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut basis = Vec::new();
        for f in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![0u64; self.cols];
            v[f] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = neg(m.get(i, f), p);
            }
            basis.push(v);
        }
        (basis, pivots)
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Characteristic polynomial det(xI - M) via Hessenberg reduction,
    /// coefficients lowest degree first.
    pub fn charpoly(&self) -> Vec<u64> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let p = self.p;
        let mut h = self.data.clone();
        let idx = |i: usize, j: usize| i * n + j;
        // Reduce to upper Hessenberg form by similarity transformations.
        for m in 1..n.saturating_sub(1) {
            let Some(i) = (m..n).find(|&i| h[idx(i, m - 1)] != 0) else {
                continue;
            };
            if i != m {
                for j in 0..n {
                    h.swap(idx(i, j), idx(m, j));
                }
                for j in 0..n {
                    h.swap(idx(j, i), idx(j, m));
                }
            }
            let t = inv(h[idx(m, m - 1)], p);
            for i in m + 1..n {
                let u = mul(h[idx(i, m - 1)], t, p);
                if u == 0 {
                    continue;
                }
                for j in 0..n {
                    let v = mul(u, h[idx(m, j)], p);
                    h[idx(i, j)] = sub(h[idx(i, j)], v, p);
                }
                for j in 0..n {
                    let v = mul(u, h[idx(j, i)], p);
                    h[idx(j, m)] = add(h[idx(j, m)], v, p);
                }
            }
        }
        // Recurrence for characteristic polynomials of leading submatrices.
        let mut polys: Vec<Vec<u64>> = vec![vec![1]];
        for m in 1..=n {
            let mut next = vec![0u64; m + 1];
            // (x - h[m-1][m-1]) * polys[m-1]
            let prev = &polys[m - 1];
            let d = h[idx(m - 1, m - 1)];
            for (k, &c) in prev.iter().enumerate() {
                next[k + 1] = add(next[k + 1], c, p);
                next[k] = sub(next[k], mul(c, d, p), p);
            }
            let mut t = 1u64;
            for i in 1..m {
                t = mul(t, h[idx(m - i, m - i - 1)], p);
                let coef = mul(t, h[idx(m - i - 1, m - 1)], p);
                if coef == 0 {
                    continue;
                }
                for (k, &c) in polys[m - i - 1].iter().enumerate() {
                    next[k] = sub(next[k], mul(coef, c, p), p);
                }
            }
            polys.push(next);
        }
        polys.pop().unwrap()
    }
}

// ---------------------------------------------------------------------------
// Polynomials over F_p, lowest degree first, no trailing zeros.
// ---------------------------------------------------------------------------

pub type PolyP = Vec<u64>;

pub fn ptrim(a: &mut PolyP) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

pub fn pdeg(a: &PolyP) -> isize {
    a.len() as isize - 1
}

pub fn padd(a: &PolyP, b: &PolyP, p: u64) -> PolyP {
    let n = a.len().max(b.len());
    let mut r: PolyP = (0..n)
        .map(|i| add(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0), p))
        .collect();
    ptrim(&mut r);
    r
}

pub fn psub(a: &PolyP, b: &PolyP, p: u64) -> PolyP {
    let n = a.len().max(b.len());
    let mut r: PolyP = (0..n)
        .map(|i| sub(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0), p))
        .collect();
    ptrim(&mut r);
    r
}

pub fn pscale(a: &PolyP, c: u64, p: u64) -> PolyP {
    let mut r: PolyP = a.iter().map(|&x| mul(x, c, p)).collect();
    ptrim(&mut r);
    r
}

pub fn pmul(a: &PolyP, b: &PolyP, p: u64) -> PolyP {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut acc = vec![0u128; a.len() + b.len() - 1];
    let pp = p as u128;
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            let s = &mut acc[i + j];
            *s += x as u128 * y as u128;
            if *s >= (1u128 << 126) {
                *s %= pp;
            }
        }
    }
    let mut r: PolyP = acc.into_iter().map(|x| (x % pp) as u64).collect();
    ptrim(&mut r);
    r
}

/// Division with remainder; `b` must be nonzero.
pub fn pdivrem(a: &PolyP, b: &PolyP, p: u64) -> (PolyP, PolyP) {
    assert!(!b.is_empty(), "polynomial division by zero");
    if a.len() < b.len() {
        return (Vec::new(), a.clone());
    }
    let mut r = a.clone();
    let db = b.len() - 1;
    let lc_inv = inv(*b.last().unwrap(), p);
    let mut q = vec![0u64; a.len() - db];
    for i in (0..q.len()).rev() {
        let c = mul(r[i + db], lc_inv, p);
        q[i] = c;
        if c == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            r[i + j] = sub(r[i + j], mul(c, bj, p), p);
        }
    }
    ptrim(&mut r);
    ptrim(&mut q);
    (q, r)
}

pub fn prem(a: &PolyP, b: &PolyP, p: u64) -> PolyP {
    pdivrem(a, b, p).1
}

pub fn pmonic(a: &PolyP, p: u64) -> PolyP {
    match a.last() {
        None => Vec::new(),
        Some(&lc) => pscale(a, inv(lc, p), p),
    }
}

pub fn pgcd(a: &PolyP, b: &PolyP, p: u64) -> PolyP {
    let (mut x, mut y) = (a.clone(), b.clone());
    while !y.is_empty() {
        let r = prem(&x, &y, p);
        x = y;
        y = r;
    }
    pmonic(&x, p)
}

/// Extended gcd: returns (g, s, t) with s a + t b = g, g monic.
pub fn pxgcd(a: &PolyP, b: &PolyP, p: u64) -> (PolyP, PolyP, PolyP) {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1): (PolyP, PolyP) = (vec![1], Vec::new());
    let (mut t0, mut t1): (PolyP, PolyP) = (Vec::new(), vec![1]);
    while !r1.is_empty() {
        let (q, r) = pdivrem(&r0, &r1, p);
        let s2 = psub(&s0, &pmul(&q, &s1, p), p);
        let t2 = psub(&t0, &pmul(&q, &t1, p), p);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    let lc = *r0.last().expect("gcd of zero polynomials");
    let li = inv(lc, p);
    (pscale(&r0, li, p), pscale(&s0, li, p), pscale(&t0, li, p))
}

pub fn pderiv(a: &PolyP, p: u64) -> PolyP {
    let mut r: PolyP = a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| mul(c, (i as u64) % p, p))
        .collect();
    ptrim(&mut r);
    r
}

pub fn pmulmod(a: &PolyP, b: &PolyP, m: &PolyP, p: u64) -> PolyP {
    prem(&pmul(a, b, p), m, p)
}

/// a^e mod m for an arbitrary-size exponent given as little-endian u64 limbs.
pub fn ppowmod_big(a: &PolyP, e: &num_bigint::BigUint, m: &PolyP, p: u64) -> PolyP {
    let mut result: PolyP = prem(&vec![1], m, p);
    let base = prem(a, m, p);
    let nbits = e.bits();
    for i in (0..nbits).rev() {
        result = pmulmod(&result, &result, m, p);
        if e.bit(i) {
            result = pmulmod(&result, &base, m, p);
        }
    }
    result
}

pub fn ppowmod(a: &PolyP, e: u64, m: &PolyP, p: u64) -> PolyP {
    ppowmod_big(a, &num_bigint::BigUint::from(e), m, p)
}

pub fn peval(a: &PolyP, x: u64, p: u64) -> u64 {
    a.iter().rev().fold(0, |acc, &c| add(mul(acc, x, p), c, p))
}

/// Squarefree decomposition of a monic polynomial: list of (factor, multiplicity).
pub fn psquarefree(f: &PolyP, p: u64) -> Vec<(PolyP, u32)> {
    let f = pmonic(f, p);
    let mut out = Vec::new();
    if f.len() <= 1 {
        return out;
    }
    let d = pderiv(&f, p);
    if d.is_empty() {
        // f = g(x^p)
        let g: PolyP = f.iter().step_by(p as usize).copied().collect();
        for (h, m) in psquarefree(&g, p) {
            out.push((h, m * p as u32));
        }
        return out;
    }
    let mut c = pgcd(&f, &d, p);
    let mut w = pdivrem(&f, &c, p).0;
    let mut i = 1u32;
    while w.len() > 1 {
        let y = pgcd(&w, &c, p);
        let z = pdivrem(&w, &y, p).0;
        if z.len() > 1 {
            out.push((pmonic(&z, p), i));
        }
        i += 1;
        w = y;
        c = pdivrem(&c, &w, p).0;
    }
    if c.len() > 1 {
        // remaining part is a p-th power
        let g: PolyP = c.iter().step_by(p as usize).copied().collect();
        for (h, m) in psquarefree(&g, p) {
            out.push((h, m * p as u32));
        }
    }
    out
}

/// Distinct-degree factorization of a squarefree monic polynomial.
pub fn pddf(f: &PolyP, p: u64) -> Vec<(PolyP, usize)> {
    let mut out = Vec::new();
    let mut f = f.clone();
    let x: PolyP = vec![0, 1];
    let mut h = x.clone();
    let mut d = 0;
    while f.len() > 1 {
        d += 1;
        if 2 * d > f.len() - 1 {
            let deg = f.len() - 1;
            out.push((f.clone(), deg));
            break;
        }
        h = ppowmod(&h, p, &f, p);
        let g = pgcd(&psub(&h, &x, p), &f, p);
        if g.len() > 1 {
            out.push((g.clone(), d));
            f = pdivrem(&f, &g, p).0;
            h = prem(&h, &f, p);
        }
    }
    out
}

/// Equal-degree factorization (Cantor–Zassenhaus) of a product of distinct
/// monic irreducibles of degree `d`.
pub fn pedf(f: &PolyP, d: usize, p: u64, rng: &mut ChaCha8Rng) -> Vec<PolyP> {
    let n = f.len() - 1;
    if n == d {
        return vec![f.clone()];
    }
    loop {
        let a: PolyP = {
            let mut a: PolyP = (0..n).map(|_| rng.gen_range(0..p)).collect();
            ptrim(&mut a);
            a
        };
        if a.len() <= 1 {
            continue;
        }
        let g = if p == 2 {
            // trace map a + a^2 + ... + a^(2^(d-1))
            let mut t = a.clone();
            let mut acc = a.clone();
            for _ in 1..d {
                t = pmulmod(&t, &t, f, p);
                acc = padd(&acc, &t, p);
            }
            pgcd(&acc, f, p)
        } else {
            let g0 = pgcd(&a, f, p);
            if g0.len() > 1 && g0.len() < f.len() {
                g0
            } else {
                let e = (num_bigint::BigUint::from(p).pow(d as u32) - 1u32) >> 1u32;
                let b = ppowmod_big(&a, &e, f, p);
                pgcd(&psub(&b, &vec![1], p), f, p)
            }
        };
        if g.len() > 1 && g.len() < f.len() {
            let h = pdivrem(f, &g, p).0;
            let mut out = pedf(&g, d, p, rng);
            out.extend(pedf(&pmonic(&h, p), d, p, rng));
            return out;
        }
    }
}

/// Full factorization of a nonzero polynomial over F_p into monic irreducibles
/// with multiplicities, sorted by (degree, coefficients).
pub fn pfactor(f: &PolyP, p: u64) -> Vec<(PolyP, u32)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ p);
    let mut out = Vec::new();
    for (g, m) in psquarefree(f, p) {
        for (h, d) in pddf(&g, p) {
            for irr in pedf(&h, d, p, &mut rng) {
                out.push((irr, m));
            }
        }
    }
    out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
    out
}

/// Roots in F_p of a nonzero polynomial (distinct, ascending).
pub fn proots(f: &PolyP, p: u64) -> Vec<u64> {
    let mut roots: Vec<u64> = pfactor(f, p)
        .into_iter()
        .filter(|(g, _)| g.len() == 2)
        .map(|(g, _)| neg(g[0], p))
        .collect();
    roots.sort_unstable();
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_pow() {
        let p = 1_000_000_007;
        for a in [1u64, 2, 12345, p - 1] {
            assert_eq!(mul(a, inv(a, p), p), 1);
        }
        assert_eq!(pow(3, p - 1, p), 1);
    }

    #[test]
    fn factor_small_examples() {
        // x^2 + 1 mod 5 = (x + 2)(x + 3)
        let f = pfactor(&vec![1, 0, 1], 5);
        assert_eq!(f, vec![(vec![2, 1], 1), (vec![3, 1], 1)]);
        // x^2 + 1 mod 3 irreducible
        assert_eq!(pfactor(&vec![1, 0, 1], 3), vec![(vec![1, 0, 1], 1)]);
        // x^2 mod 7
        assert_eq!(pfactor(&vec![0, 0, 1], 7), vec![(vec![0, 1], 2)]);
        // (x+1)^3 mod 3 = x^3 + 1
        assert_eq!(pfactor(&vec![1, 0, 0, 1], 3), vec![(vec![1, 1], 3)]);
        // x^4 + 1 mod 2
        assert_eq!(pfactor(&vec![1, 0, 0, 0, 1], 2), vec![(vec![1, 1], 4)]);
    }

    #[test]
    fn factor_product_recovers_input() {
        let p = 101;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let n = rng.gen_range(1..12);
            let mut f: PolyP = (0..n).map(|_| rng.gen_range(0..p)).collect();
            f.push(1);
            let fac = pfactor(&f, p);
            let mut prod: PolyP = vec![1];
            for (g, m) in &fac {
                for _ in 0..*m {
                    prod = pmul(&prod, g, p);
                }
                assert_eq!(pddf(g, p).len(), 1);
                assert_eq!(pddf(g, p)[0].1, g.len() - 1, "irreducible");
            }
            assert_eq!(prod, f);
        }
    }

    #[test]
    fn hessenberg_charpoly_small() {
        let p = 97;
        let mut m = MatP::zero(2, 2, p);
        m.set(0, 1, 1);
        m.set(1, 0, 1);
        // x^2 - 1
        assert_eq!(m.charpoly(), vec![p - 1, 0, 1]);
    }

    #[test]
    fn hessenberg_charpoly_cayley_hamilton() {
        let p = 1_000_003;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..8 {
            let mut m = MatP::zero(n, n, p);
            for x in m.data.iter_mut() {
                *x = if rng.gen_bool(0.3) { 0 } else { rng.gen_range(0..p) };
            }
            let cp = m.charpoly();
            let mut acc = MatP::zero(n, n, p);
            for &c in cp.iter().rev() {
                acc = acc.mul(&m);
                for i in 0..n {
                    let v = add(acc.get(i, i), c, p);
                    acc.set(i, i, v);
                }
            }
            assert!(acc.data.iter().all(|&x| x == 0));
        }
    }
}
