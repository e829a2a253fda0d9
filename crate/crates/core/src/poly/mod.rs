//! Univariate polynomials over ℚ and ℤ.

mod factor;
pub mod int;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use factor::{factor_poly_mod_p, factor_poly_q, factor_primitive_squarefree};

use crate::error::{Error, Result};

/// Polynomial with rational coefficients, lowest degree first. The zero
/// polynomial has no coefficients; otherwise the last coefficient is nonzero.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct PolyQ {
    coeffs: Vec<BigRational>,
}

impl PolyQ {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        PolyQ { coeffs }
    }

    pub fn zero() -> Self {
        PolyQ { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        PolyQ::constant(BigRational::one())
    }

    pub fn x() -> Self {
        PolyQ::new(vec![BigRational::zero(), BigRational::one()])
    }

    pub fn constant(c: BigRational) -> Self {
        PolyQ::new(vec![c])
    }

    pub fn from_ints(c: &[i64]) -> Self {
        PolyQ::new(c.iter().map(|&x| BigRational::from_integer(x.into())).collect())
    }

    pub fn from_bigints(c: &[BigInt]) -> Self {
        PolyQ::new(c.iter().map(|x| BigRational::from_integer(x.clone())).collect())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> BigRational {
        self.coeffs.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| c.is_one())
    }

    pub fn monic(&self) -> PolyQ {
        if self.is_zero() {
            return self.clone();
        }
        let lc = self.leading();
        PolyQ::new(self.coeffs.iter().map(|c| c / &lc).collect())
    }

    pub fn scale(&self, c: &BigRational) -> PolyQ {
        PolyQ::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> PolyQ {
        PolyQ::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn divrem(&self, d: &PolyQ) -> (PolyQ, PolyQ) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.coeffs.len() - 1;
        if self.coeffs.len() <= dd {
            return (PolyQ::zero(), self.clone());
        }
        let mut r = self.coeffs.clone();
        let lc = d.leading();
        let mut q = vec![BigRational::zero(); self.coeffs.len() - dd];
        for i in (0..q.len()).rev() {
            let c = &r[i + dd] / &lc;
            if !c.is_zero() {
                for (j, dj) in d.coeffs.iter().enumerate() {
                    r[i + j] -= &c * dj;
                }
            }
            q[i] = c;
        }
        (PolyQ::new(q), PolyQ::new(r))
    }

    pub fn rem(&self, d: &PolyQ) -> PolyQ {
        self.divrem(d).1
    }

    /// Monic gcd (Euclid over ℚ; intended for small degrees).
    pub fn gcd(&self, other: &PolyQ) -> PolyQ {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r.primitive_rational();
        }
        a.monic()
    }

    /// Same polynomial rescaled to have coprime integer coefficients
    /// (positive leading coefficient), as a rational polynomial.
    fn primitive_rational(&self) -> PolyQ {
        if self.is_zero() {
            return self.clone();
        }
        let (_, z) = self.to_primitive_int();
        PolyQ::from_bigints(&z)
    }

    /// Splits into (content, primitive integer polynomial) with positive
    /// leading coefficient: self = content * primitive.
    pub fn to_primitive_int(&self) -> (BigRational, Vec<BigInt>) {
        int::primitive_of_rational(&self.coeffs)
    }

    /// Integer coefficients if all coefficients are integral.
    pub fn to_integer_coeffs(&self) -> Option<Vec<BigInt>> {
        self.coeffs
            .iter()
            .map(|c| c.is_integer().then(|| c.to_integer()))
            .collect()
    }

    pub fn pow(&self, e: u32) -> PolyQ {
        let mut r = PolyQ::one();
        for _ in 0..e {
            r = &r * self;
        }
        r
    }

    /// Composition self(other).
    pub fn compose(&self, other: &PolyQ) -> PolyQ {
        self.coeffs
            .iter()
            .rev()
            .fold(PolyQ::zero(), |acc, c| &(&acc * other) + &PolyQ::constant(c.clone()))
    }

    /// Irreducible factorization over ℚ; see [`factor_poly_q`].
    pub fn factor(&self) -> Result<Vec<(PolyQ, u32)>> {
        factor_poly_q(self)
    }

    /// Resultant with another polynomial.
    pub fn resultant(&self, other: &PolyQ) -> BigRational {
        if self.is_zero() || other.is_zero() {
            return BigRational::zero();
        }
        let (ca, a) = self.to_primitive_int();
        let (cb, b) = other.to_primitive_int();
        let r = int::resultant(&a, &b);
        let da = self.degree().unwrap() as i32;
        let db = other.degree().unwrap() as i32;
        BigRational::from_integer(r) * pow_rat(&ca, db) * pow_rat(&cb, da)
    }

    pub fn discriminant(&self) -> Result<BigRational> {
        let n = self.degree().ok_or(Error::Precondition("discriminant of zero polynomial".into()))?;
        let r = self.resultant(&self.derivative());
        let sign = if (n * n.saturating_sub(1) / 2) % 2 == 1 { -1 } else { 1 };
        Ok(r * BigRational::from_integer(sign.into()) / self.leading())
    }
}

pub(crate) fn pow_rat(x: &BigRational, e: i32) -> BigRational {
    let mut r = BigRational::one();
    for _ in 0..e {
        r *= x;
    }
    r
}

impl fmt::Debug for PolyQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for PolyQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let show_coeff = !a.is_one() || i == 0;
            if show_coeff {
                write!(f, "{}", a)?;
                if i > 0 {
                    write!(f, "*")?;
                }
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{}", i)?,
            }
        }
        Ok(())
    }
}

impl Add for &PolyQ {
    type Output = PolyQ;
    fn add(self, o: &PolyQ) -> PolyQ {
        let n = self.coeffs.len().max(o.coeffs.len());
        PolyQ::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl Sub for &PolyQ {
    type Output = PolyQ;
    fn sub(self, o: &PolyQ) -> PolyQ {
        let n = self.coeffs.len().max(o.coeffs.len());
        PolyQ::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl Mul for &PolyQ {
    type Output = PolyQ;
    fn mul(self, o: &PolyQ) -> PolyQ {
        if self.is_zero() || o.is_zero() {
            return PolyQ::zero();
        }
        let mut c = vec![BigRational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        PolyQ::new(c)
    }
}

impl Neg for PolyQ {
    type Output = PolyQ;
    fn neg(self) -> PolyQ {
        PolyQ::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

impl Add for PolyQ {
    type Output = PolyQ;
    fn add(self, o: PolyQ) -> PolyQ {
        &self + &o
    }
}

impl Sub for PolyQ {
    type Output = PolyQ;
    fn sub(self, o: PolyQ) -> PolyQ {
        &self - &o
    }
}

impl Mul for PolyQ {
    type Output = PolyQ;
    fn mul(self, o: PolyQ) -> PolyQ {
        &self * &o
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_arithmetic() {
        let p = PolyQ::from_ints(&[-1, 0, 1]);
        assert_eq!(p.to_string(), "x^2 - 1");
        let q = PolyQ::from_ints(&[1, 1]);
        let (d, r) = p.divrem(&q);
        assert_eq!(d, PolyQ::from_ints(&[-1, 1]));
        assert!(r.is_zero());
        assert_eq!(p.gcd(&PolyQ::from_ints(&[1, 2, 1])), q);
    }

    #[test]
    fn resultant_and_discriminant() {
        // disc(x^2 + x - 1) = 5, disc(x^2 + 1) = -4
        assert_eq!(PolyQ::from_ints(&[-1, 1, 1]).discriminant().unwrap(), BigRational::from_integer(5.into()));
        assert_eq!(PolyQ::from_ints(&[1, 0, 1]).discriminant().unwrap(), BigRational::from_integer((-4).into()));
        // Res(x^2 - 2, x - 1) = -1
        let r = PolyQ::from_ints(&[-2, 0, 1]).resultant(&PolyQ::from_ints(&[-1, 1]));
        assert_eq!(r, BigRational::from_integer((-1).into()));
    }
}
