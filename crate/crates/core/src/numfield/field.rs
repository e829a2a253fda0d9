//! Number fields ℚ[x]/(f) and their elements in power-basis coordinates.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{MatQ, Q};
use crate::poly::PolyQ;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NumberField {
    min_poly: PolyQ,
    degree: usize,
}

impl NumberField {
    /// Field defined by a monic irreducible polynomial; irreducibility is
    /// checked by factoring.
    pub fn new(p: &PolyQ) -> Result<Self> {
        let f = Self::new_unchecked(p)?;
        let fac = p.factor()?;
        if fac.len() != 1 || fac[0].1 != 1 {
            return Err(Error::Precondition(format!("{p} is reducible over ℚ")));
        }
        Ok(f)
    }

    /// Field defined by a monic polynomial known to be irreducible.
    pub fn new_unchecked(p: &PolyQ) -> Result<Self> {
        let degree = p
            .degree()
            .filter(|&d| d >= 1)
            .ok_or_else(|| Error::Precondition("defining polynomial must have degree >= 1".into()))?;
        if !p.is_monic() {
            return Err(Error::Precondition(format!("{p} is not monic")));
        }
        Ok(NumberField { min_poly: p.clone(), degree })
    }

    pub fn rationals() -> Self {
        NumberField { min_poly: PolyQ::from_ints(&[0, 1]), degree: 1 }
    }

    pub fn min_poly(&self) -> &PolyQ {
        &self.min_poly
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Reduces polynomial coefficients modulo the defining polynomial.
    pub fn reduce(&self, mut c: Vec<Q>) -> Vec<Q> {
        let d = self.degree;
        let m = self.min_poly.coeffs();
        while c.len() > d {
            let top = c.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            let k = c.len() - d;
            for i in 0..d {
                if !m[i].is_zero() {
                    c[k + i] -= &top * &m[i];
                }
            }
        }
        c.resize(d, Q::zero());
        c
    }

    /// Product of coordinate vectors.
    pub fn mul_coords(&self, a: &[Q], b: &[Q]) -> Vec<Q> {
        let d = self.degree;
        let mut prod = vec![Q::zero(); 2 * d - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    prod[i + j] += x * y;
                }
            }
        }
        self.reduce(prod)
    }

    /// Complex roots of the defining polynomial (Aberth iteration).
    pub fn complex_roots(&self) -> Vec<Complex64> {
        complex_roots(&self.min_poly)
    }
}

impl fmt::Debug for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NumberField({})", self.min_poly)
    }
}

/// Makes the number field defined by a monic irreducible polynomial.
pub fn make_field(p: &PolyQ) -> Result<Arc<NumberField>> {
    NumberField::new(p).map(Arc::new)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    field: Arc<NumberField>,
    coords: Vec<Q>,
}

impl FieldElement {
    pub fn new(field: &Arc<NumberField>, coords: Vec<Q>) -> Self {
        assert_eq!(coords.len(), field.degree, "coordinate count must equal field degree");
        FieldElement { field: field.clone(), coords }
    }

    /// Element given by a polynomial in the generator (reduced).
    pub fn from_poly(field: &Arc<NumberField>, p: &PolyQ) -> Self {
        FieldElement { field: field.clone(), coords: field.reduce(p.coeffs().to_vec()) }
    }

    pub fn from_rational(field: &Arc<NumberField>, x: Q) -> Self {
        let mut c = vec![Q::zero(); field.degree];
        c[0] = x;
        FieldElement { field: field.clone(), coords: c }
    }

    pub fn from_int(field: &Arc<NumberField>, x: i64) -> Self {
        Self::from_rational(field, Q::from_integer(BigInt::from(x)))
    }

    pub fn zero(field: &Arc<NumberField>) -> Self {
        Self::from_int(field, 0)
    }

    pub fn one(field: &Arc<NumberField>) -> Self {
        Self::from_int(field, 1)
    }

    /// The generator θ.
    pub fn generator(field: &Arc<NumberField>) -> Self {
        Self::from_poly(field, &PolyQ::x())
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn coords(&self) -> &[Q] {
        &self.coords
    }

    pub fn to_poly(&self) -> PolyQ {
        PolyQ::new(self.coords.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.coords.iter().skip(1).all(|c| c.is_zero())
    }

    /// Multiplication-by-self matrix: row i holds the coordinates of θ^i · self.
    pub fn mult_matrix(&self) -> MatQ {
        let d = self.field.degree;
        let mut rows = Vec::with_capacity(d);
        let mut cur = self.coords.clone();
        for _ in 0..d {
            rows.push(cur.clone());
            let mut shifted = vec![Q::zero()];
            shifted.extend(cur);
            cur = self.field.reduce(shifted);
        }
        MatQ::from_rows_with_cols(rows, d)
    }

    pub fn charpoly(&self) -> PolyQ {
        self.mult_matrix().charpoly().expect("square matrix")
    }

    pub fn min_poly(&self) -> PolyQ {
        let cp = self.charpoly();
        let g = cp.gcd(&cp.derivative());
        cp.divrem(&g).0.monic()
    }

    pub fn norm(&self) -> Q {
        self.field.min_poly.resultant(&self.to_poly())
    }

    pub fn trace(&self) -> Q {
        let cp = self.charpoly();
        -cp.coeff(self.field.degree - 1)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = FieldElement::one(&self.field);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let m = self.mult_matrix();
        let mut one = vec![Q::zero(); self.field.degree];
        one[0] = Q::one();
        m.solve_left(&one).map(|c| FieldElement::new(&self.field, c))
    }

    /// Values under all complex embeddings, in the order of `complex_roots`.
    pub fn embeddings(&self) -> Vec<Complex64> {
        let roots = self.field.complex_roots();
        let c: Vec<f64> = self.coords.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
        roots
            .iter()
            .map(|&r| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * r + a))
            .collect()
    }

    fn check_same(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.field, &other.field) || self.field == other.field,
            "elements of different fields"
        );
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_poly())
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.to_poly().to_string();
        write!(f, "{}", s.replace('x', "t"))
    }
}

impl<'a> Add<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn add(self, o: &FieldElement) -> FieldElement {
        self.check_same(o);
        let coords = self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect();
        FieldElement { field: self.field.clone(), coords }
    }
}

impl<'a> Sub<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn sub(self, o: &FieldElement) -> FieldElement {
        self.check_same(o);
        let coords = self.coords.iter().zip(&o.coords).map(|(a, b)| a - b).collect();
        FieldElement { field: self.field.clone(), coords }
    }
}

impl<'a> Mul<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn mul(self, o: &FieldElement) -> FieldElement {
        self.check_same(o);
        FieldElement { field: self.field.clone(), coords: self.field.mul_coords(&self.coords, &o.coords) }
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement { field: self.field.clone(), coords: self.coords.iter().map(|a| -a).collect() }
    }
}

/// Complex roots of a rational polynomial by Aberth–Ehrlich iteration.
pub fn complex_roots(p: &PolyQ) -> Vec<Complex64> {
    let n = match p.degree() {
        None | Some(0) => return Vec::new(),
        Some(n) => n,
    };
    let lc = p.leading();
    let c: Vec<Complex64> = p
        .coeffs()
        .iter()
        .map(|x| Complex64::new((x / &lc).to_f64().unwrap_or(f64::NAN), 0.0))
        .collect();
    let eval = |z: Complex64| {
        let mut v = Complex64::new(0.0, 0.0);
        let mut dv = Complex64::new(0.0, 0.0);
        for a in c.iter().rev() {
            dv = dv * z + v;
            v = v * z + a;
        }
        (v, dv)
    };
    // Cauchy bound for initial radius
    let radius = 1.0 + c[..n].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64;
            Complex64::from_polar(radius * 0.5, ang)
        })
        .collect();
    for _ in 0..500 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let (v, dv) = eval(z[i]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / dv;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    s += (z[i] - z[j]).inv();
                }
            }
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            z[i] -= w;
            max_step = max_step.max(w.norm() / (1.0 + z[i].norm()));
        }
        if max_step < 1e-15 {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q;

    #[test]
    fn make_field_examples() {
        assert_eq!(make_field(&PolyQ::from_ints(&[-1, 1])).unwrap().degree(), 1);
        assert_eq!(make_field(&PolyQ::from_ints(&[-2, 0, 1])).unwrap().degree(), 2);
        let k = make_field(&PolyQ::from_ints(&[-1, 1, 1])).unwrap();
        assert_eq!(k.min_poly().discriminant().unwrap(), q(5));
        assert!(make_field(&PolyQ::from_ints(&[-1, 0, 1])).is_err());
    }

    #[test]
    fn arithmetic() {
        let k = make_field(&PolyQ::from_ints(&[-2, 0, 1])).unwrap();
        let t = FieldElement::generator(&k);
        let one = FieldElement::one(&k);
        let x = &t + &one;
        assert_eq!((&t * &t).coords(), &[q(2), q(0)]);
        assert_eq!(x.norm(), q(-1));
        assert_eq!(x.trace(), q(2));
        let inv = x.inverse().unwrap();
        assert_eq!(&inv * &x, one);
        assert_eq!(x.min_poly(), PolyQ::from_ints(&[-1, -2, 1]));
        let e = t.embeddings();
        assert!((e[0].re.abs() - 2f64.sqrt()).abs() < 1e-12);
    }
}
