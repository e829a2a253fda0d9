//! Integer helpers: primes, factorization, CRT and rational reconstruction.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use num_prime::nt_funcs::is_prime64;

/// All primes `<= limit`, ascending.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    num_prime::nt_funcs::primes(limit + 1)
        .into_iter()
        .filter(|&p| p <= limit)
        .collect()
}

/// Smallest prime strictly greater than `n`.
pub fn next_prime(n: u64) -> u64 {
    let mut c = n + 1;
    while !is_prime64(c) {
        c += 1;
    }
    c
}

/// Prime factorization of a machine integer, ascending primes.
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    if n <= 1 {
        return Vec::new();
    }
    num_prime::nt_funcs::factorize64(n)
        .into_iter()
        .map(|(p, e)| (p, e as u32))
        .collect()
}

pub fn prime_divisors(n: u64) -> Vec<u64> {
    factor_u64(n).into_iter().map(|(p, _)| p).collect()
}

/// All positive divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for (p, e) in factor_u64(n) {
        let cur = divs.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            divs.extend(cur.iter().map(|d| d * pk));
        }
    }
    divs.sort_unstable();
    divs
}

pub fn euler_phi(n: u64) -> u64 {
    factor_u64(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

pub fn num_divisors(n: u64) -> u64 {
    factor_u64(n).into_iter().map(|(_, e)| e as u64 + 1).product()
}

/// Result of factoring a big integer. `unfactored` holds composite cofactors the
/// factorizer gave up on.
#[derive(Clone, Debug, Default)]
pub struct BigFactorization {
    pub factors: BTreeMap<BigUint, u32>,
    pub unfactored: Vec<BigUint>,
}

pub fn factor_biguint(n: &BigUint) -> BigFactorization {
    let mut out = BigFactorization::default();
    if n <= &BigUint::one() {
        return out;
    }
    if let Some(small) = n.to_u64() {
        for (p, e) in factor_u64(small) {
            out.factors.insert(BigUint::from(p), e);
        }
        return out;
    }
    let (found, rest) = num_prime::nt_funcs::factors(n.clone(), None);
    for (p, e) in found {
        *out.factors.entry(p).or_insert(0) += e as u32;
    }
    if let Some(rest) = rest {
        out.unfactored = rest;
    }
    out
}

/// Kronecker symbol (d / n) for n > 0.
pub fn kronecker(d: i64, n: u64) -> i32 {
    if n == 0 {
        return if d == 1 || d == -1 { 1 } else { 0 };
    }
    let mut result = 1i32;
    let mut n = n;
    let a = d;
    // factor out powers of two from n
    let twos = n.trailing_zeros();
    if twos > 0 {
        if a % 2 == 0 {
            return 0;
        }
        n >>= twos;
        let r = a.rem_euclid(8);
        if twos % 2 == 1 && (r == 3 || r == 5) {
            result = -result;
        }
    }
    // Jacobi symbol (a / n) for odd n
    let mut a = a.rem_euclid(n as i64) as u64;
    while a != 0 {
        while a.is_multiple_of(2) {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Is `d` a fundamental discriminant?
pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    let m = d.rem_euclid(4);
    let squarefree = |x: u64| factor_u64(x).iter().all(|&(_, e)| e == 1);
    if m == 1 {
        return squarefree(d.unsigned_abs());
    }
    if m == 0 {
        let q = d / 4;
        let r = q.rem_euclid(4);
        return (r == 2 || r == 3) && squarefree(q.unsigned_abs());
    }
    false
}

/// Odd primes just below 2^62, used as moduli for multimodular algorithms.
pub struct ModularPrimes {
    next: u64,
}

impl ModularPrimes {
    pub const START: u64 = (1u64 << 62) - 1;

    pub fn new() -> Self {
        ModularPrimes { next: Self::START }
    }
}

impl Default for ModularPrimes {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for ModularPrimes {
    type Item = u64;
    fn next(&mut self) -> Option<u64> {
        let mut c = self.next;
        while !is_prime64(c) {
            c -= 2;
        }
        self.next = c - 2;
        Some(c)
    }
}

pub fn big_mod_u64(x: &BigInt, p: u64) -> u64 {
    let r = x.mod_floor(&BigInt::from(p));
    r.to_u64().expect("residue fits")
}

/// Residue of a rational modulo p; `None` when p divides the denominator.
pub fn rat_mod_u64(x: &BigRational, p: u64) -> Option<u64> {
    let d = big_mod_u64(x.denom(), p);
    if d == 0 {
        return None;
    }
    let n = big_mod_u64(x.numer(), p);
    Some(crate::modp::mul(n, crate::modp::inv(d, p), p))
}

/// Incremental Chinese remaindering of a vector of residues.
#[derive(Clone, Debug)]
pub struct CrtAccumulator {
    pub modulus: BigInt,
    pub values: Vec<BigInt>,
}

impl CrtAccumulator {
    pub fn new(len: usize) -> Self {
        CrtAccumulator {
            modulus: BigInt::one(),
            values: vec![BigInt::zero(); len],
        }
    }

    pub fn add(&mut self, residues: &[u64], p: u64) {
        assert_eq!(residues.len(), self.values.len());
        let pb = BigInt::from(p);
        // x = v + M * ((r - v) * M^{-1} mod p)
        let m_mod_p = big_mod_u64(&self.modulus, p);
        let m_inv = crate::modp::inv(m_mod_p, p);
        for (v, &r) in self.values.iter_mut().zip(residues) {
            let vm = big_mod_u64(v, p);
            let t = crate::modp::mul(crate::modp::sub(r, vm, p), m_inv, p);
            if t != 0 {
                *v += &self.modulus * BigInt::from(t);
            }
        }
        self.modulus *= pb;
    }

    /// Values lifted to the symmetric range (-M/2, M/2].
    pub fn symmetric(&self) -> Vec<BigInt> {
        let half = &self.modulus >> 1;
        self.values
            .iter()
            .map(|v| if v > &half { v - &self.modulus } else { v.clone() })
            .collect()
    }
}

/// Rational reconstruction of `a mod m`: finds n/d with |n|, d <= sqrt(m/2).
pub fn rational_reconstruction(a: &BigInt, m: &BigInt) -> Option<BigRational> {
    let a = a.mod_floor(m);
    let bound = (m >> 1u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), a);
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let (q, r2) = r0.div_rem(&r1);
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    if !r1.gcd(&t1).is_one() {
        return None;
    }
    let (n, d) = if t1.sign() == Sign::Minus { (-r1, -t1) } else { (r1, t1) };
    Some(BigRational::new(n, d))
}

/// Exact ℓ-adic valuation of a nonzero integer.
pub fn valuation_int(x: &BigInt, ell: &BigInt) -> u32 {
    assert!(!x.is_zero());
    let mut v = 0;
    let mut y = x.clone();
    loop {
        let (q, r) = y.div_rem(ell);
        if !r.is_zero() {
            return v;
        }
        y = q;
        v += 1;
    }
}

pub fn lcm_big(a: &BigInt, b: &BigInt) -> BigInt {
    a.lcm(b)
}

pub fn bits(x: &BigInt) -> u64 {
    x.bits()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronecker_matches_euler_criterion() {
        for p in primes_up_to(60).into_iter().filter(|&p| p > 2) {
            for a in -20i64..20 {
                let e = if a.rem_euclid(p as i64) == 0 {
                    0
                } else {
                    let r = crate::modp::pow(a.rem_euclid(p as i64) as u64, (p - 1) / 2, p);
                    if r == 1 { 1 } else { -1 }
                };
                assert_eq!(kronecker(a, p), e, "({a}/{p})");
            }
        }
        assert_eq!(kronecker(-11, 2), -1);
        assert_eq!(kronecker(-3, 2), -1);
        assert_eq!(kronecker(-4, 2), 0);
        assert_eq!(kronecker(-7, 2), 1);
    }

    #[test]
    fn fundamental_discriminants() {
        let fund: Vec<i64> = (-30..0).filter(|&d| is_fundamental_discriminant(d)).collect();
        assert_eq!(fund, vec![-24, -23, -20, -19, -15, -11, -8, -7, -4, -3]);
    }

    #[test]
    fn crt_and_reconstruction() {
        let target = BigRational::new(BigInt::from(-12345678901i64), BigInt::from(987654321u64));
        let mut acc = CrtAccumulator::new(1);
        for p in ModularPrimes::new().take(3) {
            acc.add(&[rat_mod_u64(&target, p).unwrap()], p);
        }
        let r = rational_reconstruction(&acc.values[0], &acc.modulus).unwrap();
        assert_eq!(r, target);
    }

    #[test]
    fn divisor_functions() {
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(euler_phi(36), 12);
        assert_eq!(num_divisors(36), 9);
    }
}
