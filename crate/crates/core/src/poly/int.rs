//! Dense polynomials with integer coefficients (lowest degree first), used as
//! the fast path underneath [`super::PolyQ`].

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::{big_mod_u64, CrtAccumulator, ModularPrimes};
use crate::modp::{self, PolyP};

pub type PolyZ = Vec<BigInt>;

pub fn trim(a: &mut PolyZ) {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
}

pub fn content(a: &[BigInt]) -> BigInt {
    a.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

/// Primitive part with positive leading coefficient.
pub fn primitive_part(a: &[BigInt]) -> PolyZ {
    let mut c = content(a);
    if c.is_zero() {
        return Vec::new();
    }
    if a.last().unwrap().is_negative() {
        c = -c;
    }
    let mut r: PolyZ = a.iter().map(|x| x / &c).collect();
    trim(&mut r);
    r
}

/// Writes a rational coefficient vector as content * primitive integer polynomial.
pub fn primitive_of_rational(c: &[BigRational]) -> (BigRational, PolyZ) {
    if c.is_empty() {
        return (BigRational::zero(), Vec::new());
    }
    let den = c.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let ints: PolyZ = c.iter().map(|x| (x * BigRational::from_integer(den.clone())).to_integer()).collect();
    let mut g = content(&ints);
    if ints.last().unwrap().is_negative() {
        g = -g;
    }
    let prim: PolyZ = ints.iter().map(|x| x / &g).collect();
    (BigRational::new(g, den), prim)
}

pub fn to_modp(a: &[BigInt], p: u64) -> PolyP {
    let mut r: PolyP = a.iter().map(|x| big_mod_u64(x, p)).collect();
    modp::ptrim(&mut r);
    r
}

pub fn mul(a: &[BigInt], b: &[BigInt]) -> PolyZ {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut c = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            c[i + j] += x * y;
        }
    }
    trim(&mut c);
    c
}

/// Exact division a / b in ℤ[x], or `None` if b does not divide a.
pub fn div_exact(a: &[BigInt], b: &[BigInt]) -> Option<PolyZ> {
    assert!(!b.is_empty());
    if a.is_empty() {
        return Some(Vec::new());
    }
    if a.len() < b.len() {
        return None;
    }
    let db = b.len() - 1;
    let lc = b.last().unwrap();
    let mut r: PolyZ = a.to_vec();
    let mut q = vec![BigInt::zero(); a.len() - db];
    for i in (0..q.len()).rev() {
        let (c, rem) = r[i + db].div_rem(lc);
        if !rem.is_zero() {
            return None;
        }
        if !c.is_zero() {
            for (j, bj) in b.iter().enumerate() {
                r[i + j] -= &c * bj;
            }
        }
        q[i] = c;
    }
    if r.iter().any(|x| !x.is_zero()) {
        return None;
    }
    trim(&mut q);
    Some(q)
}

pub fn derivative(a: &[BigInt]) -> PolyZ {
    let mut r: PolyZ = a.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect();
    trim(&mut r);
    r
}

pub fn max_abs(a: &[BigInt]) -> BigInt {
    a.iter().map(|c| c.abs()).max().unwrap_or_default()
}

/// Upper bound (as bit count) for the Euclidean norm.
pub fn l2_norm_bits(a: &[BigInt]) -> u64 {
    let s: BigInt = a.iter().map(|c| c * c).sum();
    s.bits() / 2 + 1
}

/// gcd in ℤ[x] of two nonzero polynomials, primitive with positive leading
/// coefficient. Multimodular with exact trial-division verification.
pub fn gcd(a: &[BigInt], b: &[BigInt]) -> PolyZ {
    if a.is_empty() {
        return primitive_part(b);
    }
    if b.is_empty() {
        return primitive_part(a);
    }
    let a = primitive_part(a);
    let b = primitive_part(b);
    if a.len() == 1 || b.len() == 1 {
        return vec![BigInt::one()];
    }
    let gamma = a.last().unwrap().gcd(b.last().unwrap());
    let mut best_deg = usize::MAX;
    let mut acc: Option<CrtAccumulator> = None;
    let mut stable_rounds = 0;
    let mut last: Option<PolyZ> = None;
    for p in ModularPrimes::new() {
        if big_mod_u64(&gamma, p) == 0 {
            continue;
        }
        let ap = to_modp(&a, p);
        let bp = to_modp(&b, p);
        let g = modp::pgcd(&ap, &bp, p);
        let d = g.len() - 1;
        if d == 0 {
            return vec![BigInt::one()];
        }
        if d > best_deg {
            continue;
        }
        let gm = big_mod_u64(&gamma, p);
        let scaled: Vec<u64> = g.iter().map(|&c| modp::mul(c, gm, p)).collect();
        if d < best_deg {
            best_deg = d;
            acc = Some(CrtAccumulator::new(d + 1));
            last = None;
            stable_rounds = 0;
        }
        let acc_ref = acc.as_mut().unwrap();
        acc_ref.add(&scaled, p);
        let cand = primitive_part(&acc_ref.symmetric());
        if last.as_ref() == Some(&cand) {
            stable_rounds += 1;
        } else {
            stable_rounds = 0;
        }
        last = Some(cand.clone());
        if stable_rounds >= 1 && div_exact(&a, &cand).is_some() && div_exact(&b, &cand).is_some() {
            return cand;
        }
    }
    unreachable!()
}

/// Squarefree decomposition (Yun) of a primitive polynomial with positive
/// leading coefficient: returns (factor, multiplicity), factors primitive.
pub fn squarefree(f: &[BigInt]) -> Vec<(PolyZ, u32)> {
    let f = primitive_part(f);
    let mut out = Vec::new();
    if f.len() <= 1 {
        return out;
    }
    let fp = derivative(&f);
    let a0 = gcd(&f, &fp);
    let mut b = div_exact(&f, &a0).expect("gcd divides");
    let mut c = div_exact(&fp, &a0).expect("gcd divides derivative");
    let mut d = sub(&c, &derivative(&b));
    let mut i = 1;
    loop {
        let a = gcd(&b, &d);
        if a.len() > 1 {
            out.push((a.clone(), i));
        }
        b = div_exact(&b, &a).expect("divides");
        if b.len() <= 1 {
            break;
        }
        c = div_exact(&d, &a).expect("divides");
        d = sub(&c, &derivative(&b));
        i += 1;
    }
    out
}

pub fn sub(a: &[BigInt], b: &[BigInt]) -> PolyZ {
    let n = a.len().max(b.len());
    let z = BigInt::zero();
    let mut r: PolyZ = (0..n).map(|i| a.get(i).unwrap_or(&z) - b.get(i).unwrap_or(&z)).collect();
    trim(&mut r);
    r
}

/// Resultant over F_p (both polynomials nonzero).
pub fn resultant_modp(a: &PolyP, b: &PolyP, p: u64) -> u64 {
    let (mut a, mut b) = (a.clone(), b.clone());
    let mut acc = 1u64;
    loop {
        if b.is_empty() || a.is_empty() {
            return 0;
        }
        let m = a.len() - 1;
        let n = b.len() - 1;
        if n == 0 {
            return modp::mul(acc, modp::pow(b[0], m as u64, p), p);
        }
        if m == 0 {
            return modp::mul(acc, modp::pow(a[0], n as u64, p), p);
        }
        let r = modp::prem(&a, &b, p);
        if r.is_empty() {
            return 0;
        }
        let k = r.len() - 1;
        if (m * n) % 2 == 1 {
            acc = modp::neg(acc, p);
        }
        acc = modp::mul(acc, modp::pow(*b.last().unwrap(), (m - k) as u64, p), p);
        a = b;
        b = r;
    }
}

/// Resultant in ℤ, multimodular with a Hadamard bound.
pub fn resultant(a: &[BigInt], b: &[BigInt]) -> BigInt {
    if a.is_empty() || b.is_empty() {
        return BigInt::zero();
    }
    let m = (a.len() - 1) as u64;
    let n = (b.len() - 1) as u64;
    let bound_bits = l2_norm_bits(a) * n + l2_norm_bits(b) * m + 2;
    let mut acc = CrtAccumulator::new(1);
    for p in ModularPrimes::new() {
        if big_mod_u64(a.last().unwrap(), p) == 0 || big_mod_u64(b.last().unwrap(), p) == 0 {
            continue;
        }
        let r = resultant_modp(&to_modp(a, p), &to_modp(b, p), p);
        acc.add(&[r], p);
        if acc.modulus.bits() > bound_bits {
            break;
        }
    }
    acc.symmetric().pop().unwrap()
}
