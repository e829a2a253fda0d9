//! Dense exact matrices over ℚ and ℤ.

mod hnf;
pub mod modular;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::rat_mod_u64;
use crate::error::{Error, Result};
use crate::modp::MatP;
use crate::poly::PolyQ;

pub use hnf::{hnf, hnf_with_modulus};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MatQ {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl MatQ {
    pub fn new(rows: usize, cols: usize, data: Vec<Q>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must be rows*cols");
        MatQ { rows, cols, data }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        MatQ { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.data[i * n + i] = Q::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        MatQ { rows: r, cols: c, data }
    }

    /// Like `from_rows` but with an explicit column count, so that an empty
    /// row list still has a shape.
    pub fn from_rows_with_cols(rows: Vec<Vec<Q>>, cols: usize) -> Self {
        let r = rows.len();
        let mut data = Vec::with_capacity(r * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged rows");
            data.extend(row);
        }
        MatQ { rows: r, cols, data }
    }

    pub fn from_i64(rows: usize, cols: usize, v: &[i64]) -> Self {
        Self::new(rows, cols, v.iter().map(|&x| q(x)).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Q) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Q] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Q>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn data(&self) -> &[Q] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> MatQ {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        MatQ { rows: self.cols, cols: self.rows, data }
    }

    pub fn mul(&self, other: &MatQ) -> MatQ {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = MatQ::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![Q::zero(); self.cols];
        for (k, a) in v.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                let b = self.get(k, j);
                if !b.is_zero() {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Matrix times column vector.
    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut s = Q::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        s += a * b;
                    }
                }
                s
            })
            .collect()
    }

    pub fn add(&self, other: &MatQ) -> MatQ {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        MatQ { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &MatQ) -> MatQ {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        MatQ { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: &Q) -> MatQ {
        MatQ { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() }
    }

    /// Columns selected in the given order.
    pub fn select_cols(&self, cols: &[usize]) -> MatQ {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for i in 0..self.rows {
            for &j in cols {
                data.push(self.get(i, j).clone());
            }
        }
        MatQ { rows: self.rows, cols: cols.len(), data }
    }

    pub fn stack(&self, other: &MatQ) -> MatQ {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        MatQ { rows: self.rows + other.rows, cols: self.cols, data }
    }

    /// Evaluates a polynomial at a square matrix (Horner).
    pub fn eval_poly(&self, p: &PolyQ) -> MatQ {
        assert!(self.is_square());
        let n = self.rows;
        let mut acc = MatQ::zero(n, n);
        for c in p.coeffs().iter().rev() {
            acc = acc.mul(self);
            for i in 0..n {
                acc.data[i * n + i] += c;
            }
        }
        acc
    }

    /// Reduction modulo a prime, `None` if the prime divides a denominator.
    pub fn to_modp(&self, p: u64) -> Option<MatP> {
        let mut data = Vec::with_capacity(self.data.len());
        for x in &self.data {
            data.push(rat_mod_u64(x, p)?);
        }
        Some(MatP { rows: self.rows, cols: self.cols, p, data })
    }

    /// Each row scaled to a primitive integer vector (zero rows stay zero);
    /// also returns the per-row scaling factors s with int_row = s * row.
    pub fn integer_rows(&self) -> (Vec<Vec<BigInt>>, Vec<Q>) {
        let mut out = Vec::with_capacity(self.rows);
        let mut scales = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let (s, v) = integer_vector(self.row(i));
            out.push(v);
            scales.push(s);
        }
        (out, scales)
    }

    /// Exact reduced row echelon form by fraction-based Gauss–Jordan.
    /// Returns the nonzero rows and the pivot columns.
    pub fn rref_exact(&self) -> (MatQ, Vec<usize>) {
        let mut m = self.clone();
        let (rows, cols) = (m.rows, m.cols);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(piv) = (r..rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            if piv != r {
                for j in 0..cols {
                    m.data.swap(piv * cols + j, r * cols + j);
                }
            }
            let inv = m.get(r, c).recip();
            for j in c..cols {
                let v = &m.data[r * cols + j] * &inv;
                m.data[r * cols + j] = v;
            }
            let pivot_row: Vec<Q> = m.row(r).to_vec();
            for i in 0..rows {
                if i == r || m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c).clone();
                for j in c..cols {
                    if !pivot_row[j].is_zero() {
                        let v = &m.data[i * cols + j] - &f * &pivot_row[j];
                        m.data[i * cols + j] = v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        m.data.truncate(r * cols);
        m.rows = r;
        (m, pivots)
    }

    /// Reduced row echelon form (nonzero rows) and pivot columns. Large
    /// inputs go through the multimodular algorithm; the result is exact.
    pub fn rref(&self) -> (MatQ, Vec<usize>) {
        if self.rows * self.cols <= 64 {
            return self.rref_exact();
        }
        modular::rref(self)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel {v : M v = 0}, in reduced echelon form.
    pub fn kernel(&self) -> Vec<Vec<Q>> {
        let (r, pivots) = self.rref();
        kernel_from_rref(&r, &pivots, self.cols)
    }

    /// Basis of the left kernel {v : v M = 0}, in reduced echelon form.
    pub fn left_kernel(&self) -> Vec<Vec<Q>> {
        self.transpose().kernel()
    }

    pub fn charpoly(&self) -> Result<PolyQ> {
        if !self.is_square() {
            return Err(Error::Precondition(format!(
                "charpoly of a non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        Ok(modular::charpoly(self))
    }

    pub fn det(&self) -> Result<Q> {
        let cp = self.charpoly()?;
        let c0 = cp.coeff(0);
        Ok(if self.rows.is_multiple_of(2) { c0 } else { -c0 })
    }

    /// Inverse of a square matrix, `None` if singular.
    pub fn inverse(&self) -> Option<MatQ> {
        assert!(self.is_square());
        let n = self.rows;
        let mut aug = MatQ::zero(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, Q::one());
        }
        let (r, pivots) = if n * n <= 64 { aug.rref_exact() } else { modular::rref(&aug) };
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        Some(r.select_cols(&cols))
    }

    /// Solves x M = b for a row vector x, `None` if inconsistent. M must
    /// have full row rank for the solution to be unique.
    pub fn solve_left(&self, b: &[Q]) -> Option<Vec<Q>> {
        // x M = b  <=>  M^T x^T = b^T
        let mt = self.transpose();
        let mut aug = MatQ::zero(mt.rows, mt.cols + 1);
        for i in 0..mt.rows {
            for j in 0..mt.cols {
                aug.set(i, j, mt.get(i, j).clone());
            }
            aug.set(i, mt.cols, b[i].clone());
        }
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&mt.cols) {
            return None;
        }
        let mut x = vec![Q::zero(); mt.cols];
        for (i, &pc) in pivots.iter().enumerate() {
            x[pc] = r.get(i, mt.cols).clone();
        }
        Some(x)
    }

    pub fn max_denominator_lcm(&self) -> BigInt {
        self.data.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
    }
}

/// Kernel vectors read off from a reduced echelon form.
pub fn kernel_from_rref(r: &MatQ, pivots: &[usize], cols: usize) -> Vec<Vec<Q>> {
    let mut is_pivot = vec![false; cols];
    for &c in pivots {
        is_pivot[c] = true;
    }
    let mut basis = Vec::new();
    for f in (0..cols).filter(|&c| !is_pivot[c]) {
        let mut v = vec![Q::zero(); cols];
        v[f] = Q::one();
        for (i, &pc) in pivots.iter().enumerate() {
            v[pc] = -r.get(i, f).clone();
        }
        basis.push(v);
    }
    // Echelon order: leading entry is the first nonzero coordinate.
    basis.sort_by_key(|v| v.iter().position(|x| !x.is_zero()).unwrap_or(cols));
    basis.into_iter().map(normalize_leading).collect()
}

fn normalize_leading(v: Vec<Q>) -> Vec<Q> {
    match v.iter().find(|x| !x.is_zero()).cloned() {
        Some(l) if !l.is_one() => v.iter().map(|x| x / &l).collect(),
        _ => v,
    }
}

/// Smallest positive s with s*v integral and primitive.
pub fn integer_vector(v: &[Q]) -> (Q, Vec<BigInt>) {
    let den = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &den).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return (Q::one(), ints);
    }
    let ints: Vec<BigInt> = ints.into_iter().map(|x| x / &g).collect();
    (BigRational::new(den, g), ints)
}

impl fmt::Debug for MatQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MatQ {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MatZ {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl MatZ {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must be rows*cols");
        MatZ { rows, cols, data }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        MatZ { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_i64(rows: usize, cols: usize, v: &[i64]) -> Self {
        Self::new(rows, cols, v.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>, cols: usize) -> Self {
        let r = rows.len();
        let mut data = Vec::with_capacity(r * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged rows");
            data.extend(row);
        }
        MatZ { rows: r, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[BigInt] {
        &self.data
    }

    pub fn row_vecs(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn to_q(&self) -> MatQ {
        MatQ::new(
            self.rows,
            self.cols,
            self.data.iter().map(|x| BigRational::from_integer(x.clone())).collect(),
        )
    }

    pub fn mul(&self, other: &MatZ) -> MatZ {
        assert_eq!(self.cols, other.rows);
        let mut out = MatZ::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// Determinant by fraction-free Bareiss elimination.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.data.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k * n + k].is_zero() {
                let Some(s) = (k + 1..n).find(|&i| !a[i * n + k].is_zero()) else {
                    return BigInt::zero();
                };
                for j in 0..n {
                    a.swap(k * n + j, s * n + j);
                }
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j]) / &prev;
                    a[i * n + j] = v;
                }
            }
            prev = a[k * n + k].clone();
        }
        sign * &a[n * n - 1]
    }

    pub fn is_hnf(&self) -> bool {
        let mut last = None::<usize>;
        for i in 0..self.rows {
            let Some(p) = self.row(i).iter().position(|x| !x.is_zero()) else {
                return false;
            };
            if last.is_some_and(|l| p <= l) || !self.get(i, p).is_positive() {
                return false;
            }
            for k in 0..i {
                let x = self.get(k, p);
                if x.is_negative() || x >= self.get(i, p) {
                    return false;
                }
            }
            last = Some(p);
        }
        true
    }
}

impl fmt::Debug for MatZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MatZ {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Kernel of a rational matrix (right kernel, reduced echelon basis).
pub fn kernel(m: &MatQ) -> Vec<Vec<Q>> {
    m.kernel()
}

pub fn charpoly(m: &MatQ) -> Result<PolyQ> {
    m.charpoly()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qq(n: i64, d: i64) -> Q {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn kernel_examples() {
        assert!(MatQ::identity(2).kernel().is_empty());
        assert_eq!(MatQ::from_i64(1, 2, &[1, 1]).kernel(), vec![vec![q(1), q(-1)]]);
        assert_eq!(MatQ::from_i64(2, 2, &[1, 2, 2, 4]).kernel(), vec![vec![q(1), qq(-1, 2)]]);
    }

    #[test]
    fn charpoly_examples() {
        assert_eq!(MatQ::zero(3, 3).charpoly().unwrap(), PolyQ::from_ints(&[0, 0, 0, 1]));
        assert_eq!(MatQ::identity(2).charpoly().unwrap(), PolyQ::from_ints(&[1, -2, 1]));
        assert_eq!(MatQ::from_i64(2, 2, &[0, 1, 1, 0]).charpoly().unwrap(), PolyQ::from_ints(&[-1, 0, 1]));
        assert!(MatQ::zero(2, 3).charpoly().is_err());
    }

    #[test]
    fn charpoly_rational_entries() {
        // [[1/2, 1/3], [1/5, 7]]: x^2 - 15/2 x + (7/2 - 1/15)
        let m = MatQ::new(2, 2, vec![qq(1, 2), qq(1, 3), qq(1, 5), q(7)]);
        let cp = m.charpoly().unwrap();
        assert_eq!(cp.coeffs(), &[qq(103, 30), qq(-15, 2), q(1)]);
    }

    #[test]
    fn inverse_and_solve() {
        let m = MatQ::from_i64(2, 2, &[2, 1, 1, 1]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), MatQ::identity(2));
        assert!(MatQ::from_i64(2, 2, &[1, 2, 2, 4]).inverse().is_none());
        let x = m.solve_left(&[q(3), q(2)]).unwrap();
        assert_eq!(m.vec_mul(&x), vec![q(3), q(2)]);
    }

    #[test]
    fn bareiss_det() {
        let m = MatZ::from_i64(3, 3, &[2, 0, 1, 1, 3, 2, 1, 1, 2]);
        assert_eq!(m.det(), BigInt::from(6));
        assert_eq!(m.to_q().det().unwrap(), q(6));
    }
}
