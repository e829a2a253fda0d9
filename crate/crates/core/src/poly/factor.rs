//! Factorization over ℚ: squarefree decomposition, factorization modulo a
//! small prime, Hensel lifting and subset recombination (Zassenhaus).

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::int::{self, PolyZ};
use super::PolyQ;
use crate::arith::{big_mod_u64, primes_up_to};
use crate::error::{Error, Result};
use crate::modp::{self, PolyP};

/// Factorization modulo a prime of a rational polynomial: monic irreducible
/// factors over F_p (coefficients in 0..p) with multiplicities.
pub fn factor_poly_mod_p(p: &PolyQ, prime: u64) -> Result<Vec<(PolyP, u32)>> {
    if p.is_zero() {
        return Err(Error::Precondition("cannot factor the zero polynomial".into()));
    }
    let mut red = Vec::with_capacity(p.coeffs().len());
    for c in p.coeffs() {
        let r = crate::arith::rat_mod_u64(c, prime).ok_or_else(|| {
            Error::Precondition(format!("{prime} divides a coefficient denominator"))
        })?;
        red.push(r);
    }
    if *red.last().unwrap() == 0 {
        return Err(Error::Precondition(format!("leading coefficient vanishes mod {prime}")));
    }
    modp::ptrim(&mut red);
    Ok(modp::pfactor(&red, prime))
}

/// Irreducible factorization over ℚ into monic factors with multiplicities,
/// sorted by (degree, coefficients). The leading coefficient of `p` is the
/// implicit content.
pub fn factor_poly_q(p: &PolyQ) -> Result<Vec<(PolyQ, u32)>> {
    if p.is_zero() {
        return Err(Error::Precondition("cannot factor the zero polynomial".into()));
    }
    let (_, prim) = p.to_primitive_int();
    let mut out = Vec::new();
    // pull out powers of x first
    let zeros = prim.iter().take_while(|c| c.is_zero()).count();
    if zeros > 0 {
        out.push((PolyQ::x(), zeros as u32));
    }
    let prim: PolyZ = prim[zeros..].to_vec();
    for (sqf, mult) in int::squarefree(&prim) {
        for f in factor_primitive_squarefree(&sqf) {
            out.push((PolyQ::from_bigints(&f).monic(), mult));
        }
    }
    out.sort_by(|a, b| {
        a.0.degree()
            .cmp(&b.0.degree())
            .then_with(|| cmp_coeffs(a.0.coeffs(), b.0.coeffs()))
    });
    Ok(out)
}

fn cmp_coeffs(a: &[BigRational], b: &[BigRational]) -> std::cmp::Ordering {
    for (x, y) in a.iter().rev().zip(b.iter().rev()) {
        let c = x.cmp(y);
        if c != std::cmp::Ordering::Equal {
            return c;
        }
    }
    std::cmp::Ordering::Equal
}

struct LocalFactorization {
    p: u64,
    factors: Vec<PolyP>,
}

/// Factors a primitive squarefree polynomial with positive leading
/// coefficient into primitive irreducibles over ℤ.
pub fn factor_primitive_squarefree(f: &[BigInt]) -> Vec<PolyZ> {
    let f = int::primitive_part(f);
    let n = f.len() - 1;
    if n <= 1 {
        return vec![f];
    }
    let lc = f.last().unwrap().clone();
    // Try several primes; keep the factorization with the fewest factors and
    // intersect the sets of attainable degrees.
    let mut allowed: Option<BTreeSet<usize>> = None;
    let mut best: Option<LocalFactorization> = None;
    let mut tried = 0;
    let disc_check = int::derivative(&f);
    for p in primes_up_to(100_000).into_iter().skip(1) {
        if big_mod_u64(&lc, p) == 0 {
            continue;
        }
        let fp = int::to_modp(&f, p);
        let dp = int::to_modp(&disc_check, p);
        if dp.is_empty() || modp::pgcd(&fp, &dp, p).len() > 1 {
            continue;
        }
        let facs: Vec<PolyP> = modp::pfactor(&fp, p).into_iter().map(|(g, _)| g).collect();
        let degs: Vec<usize> = facs.iter().map(|g| g.len() - 1).collect();
        let sums = subset_sums(&degs, n);
        allowed = Some(match allowed {
            None => sums,
            Some(a) => a.intersection(&sums).copied().collect(),
        });
        if facs.len() == 1 || allowed.as_ref().unwrap().len() <= 2 {
            return vec![f];
        }
        if best.as_ref().is_none_or(|b| facs.len() < b.factors.len()) {
            best = Some(LocalFactorization { p, factors: facs });
        }
        tried += 1;
        if tried >= 8 {
            break;
        }
    }
    let best = best.expect("some prime is good for a squarefree polynomial");
    zassenhaus(&f, best, allowed.unwrap())
}

fn subset_sums(degs: &[usize], n: usize) -> BTreeSet<usize> {
    let mut reach = vec![false; n + 1];
    reach[0] = true;
    for &d in degs {
        for s in (d..=n).rev() {
            if reach[s - d] {
                reach[s] = true;
            }
        }
    }
    (0..=n).filter(|&s| reach[s]).collect()
}

/// Bound on the absolute value of coefficients of any factor of f times lc(f).
fn factor_coeff_bound_bits(f: &[BigInt]) -> u64 {
    let n = (f.len() - 1) as u64;
    // Mignotte: |h_i| <= C(deg h, i) ||f||_2 <= 2^n ||f||_2, times |lc|.
    n + int::l2_norm_bits(f) + f.last().unwrap().bits() + 1
}

fn zassenhaus(f: &[BigInt], local: LocalFactorization, allowed: BTreeSet<usize>) -> Vec<PolyZ> {
    let p = local.p;
    let bound_bits = factor_coeff_bound_bits(f) + 1;
    let pb = BigInt::from(p);
    let mut k = 1u32;
    let mut modulus = pb.clone();
    while modulus.bits() <= bound_bits {
        modulus *= &pb;
        k += 1;
    }
    let lifted = hensel_lift(f, &local.factors, p, k);
    recombine(f, lifted, &modulus, &allowed)
}

fn mod_sym(x: &BigInt, m: &BigInt) -> BigInt {
    let r = x.mod_floor(m);
    if &r + &r > *m {
        r - m
    } else {
        r
    }
}

fn poly_mod(a: &[BigInt], m: &BigInt) -> PolyZ {
    let mut r: PolyZ = a.iter().map(|c| c.mod_floor(m)).collect();
    int::trim(&mut r);
    r
}

fn mul_mod(a: &[BigInt], b: &[BigInt], m: &BigInt) -> PolyZ {
    poly_mod(&int::mul(a, b), m)
}

/// Division by a monic polynomial modulo m.
fn divrem_monic_mod(a: &[BigInt], b: &[BigInt], m: &BigInt) -> (PolyZ, PolyZ) {
    let db = b.len() - 1;
    if a.len() <= db {
        return (Vec::new(), poly_mod(a, m));
    }
    let mut r: PolyZ = a.to_vec();
    let mut q = vec![BigInt::zero(); a.len() - db];
    for i in (0..q.len()).rev() {
        let c = r[i + db].mod_floor(m);
        if !c.is_zero() {
            for (j, bj) in b.iter().enumerate() {
                r[i + j] = (&r[i + j] - &c * bj).mod_floor(m);
            }
        }
        q[i] = c;
    }
    int::trim(&mut q);
    (q, poly_mod(&r, m))
}

fn inv_mod_big(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    assert!(e.gcd.is_one(), "not invertible");
    e.x.mod_floor(m)
}

fn lift_from_p(a: &PolyP) -> PolyZ {
    a.iter().map(|&c| BigInt::from(c)).collect()
}

/// Lifts f ≡ lc(f)·∏ g_i (mod p), g_i monic and pairwise coprime, to a
/// factorization modulo p^k with monic factors.
fn hensel_lift(f: &[BigInt], factors: &[PolyP], p: u64, k: u32) -> Vec<PolyZ> {
    let target = BigInt::from(p).pow(k);
    let lc_inv = inv_mod_big(f.last().unwrap(), &target);
    let monic_f: PolyZ = poly_mod(&f.iter().map(|c| c * &lc_inv).collect::<Vec<_>>(), &target);
    lift_rec(&monic_f, factors, p, k)
}

fn lift_rec(f: &[BigInt], factors: &[PolyP], p: u64, k: u32) -> Vec<PolyZ> {
    if factors.len() == 1 {
        return vec![f.to_vec()];
    }
    // split into two halves and lift the two-factor factorization
    let mid = factors.len() / 2;
    let mut g0: PolyP = vec![1];
    for g in &factors[..mid] {
        g0 = modp::pmul(&g0, g, p);
    }
    let mut h0: PolyP = vec![1];
    for h in &factors[mid..] {
        h0 = modp::pmul(&h0, h, p);
    }
    let (gl, hl) = two_factor_lift(f, &g0, &h0, p, k);
    let mut out = lift_rec(&gl, &factors[..mid], p, k);
    out.extend(lift_rec(&hl, &factors[mid..], p, k));
    out
}

/// Quadratic Hensel lifting of f ≡ g·h (mod p) to modulus p^k (f monic mod p^k).
fn two_factor_lift(f: &[BigInt], g0: &PolyP, h0: &PolyP, p: u64, k: u32) -> (PolyZ, PolyZ) {
    let (one, s0, t0) = modp::pxgcd(g0, h0, p);
    assert_eq!(one, vec![1], "factors must be coprime");
    let target = BigInt::from(p).pow(k);
    let mut m = BigInt::from(p);
    let (mut g, mut h) = (lift_from_p(g0), lift_from_p(h0));
    let (mut s, mut t) = (lift_from_p(&s0), lift_from_p(&t0));
    while m < target {
        let m2 = &m * &m;
        // e = f - g h
        let e = poly_mod(&int::sub(&poly_mod(f, &m2), &mul_mod(&g, &h, &m2)), &m2);
        // q, r = divrem(s e, h); g* = g + t e + q g; h* = h + r
        let (q, r) = divrem_monic_mod(&mul_mod(&s, &e, &m2), &h, &m2);
        let gn = poly_mod(
            &add(&add(&g, &mul_mod(&t, &e, &m2)), &mul_mod(&q, &g, &m2)),
            &m2,
        );
        let hn = poly_mod(&add(&h, &r), &m2);
        // b = s g* + t h* - 1; c, d = divrem(s b, h*); s* = s - d; t* = t - t b - c g*
        let b = poly_mod(
            &int::sub(&add(&mul_mod(&s, &gn, &m2), &mul_mod(&t, &hn, &m2)), &[BigInt::one()]),
            &m2,
        );
        let (c, d) = divrem_monic_mod(&mul_mod(&s, &b, &m2), &hn, &m2);
        let sn = poly_mod(&int::sub(&s, &d), &m2);
        let tn = poly_mod(
            &int::sub(&int::sub(&t, &mul_mod(&t, &b, &m2)), &mul_mod(&c, &gn, &m2)),
            &m2,
        );
        g = gn;
        h = hn;
        s = sn;
        t = tn;
        m = m2;
    }
    (poly_mod(&g, &target), poly_mod(&h, &target))
}

fn add(a: &[BigInt], b: &[BigInt]) -> PolyZ {
    let n = a.len().max(b.len());
    let z = BigInt::zero();
    let mut r: PolyZ = (0..n).map(|i| a.get(i).unwrap_or(&z) + b.get(i).unwrap_or(&z)).collect();
    int::trim(&mut r);
    r
}

fn recombine(f: &[BigInt], mut local: Vec<PolyZ>, m: &BigInt, allowed: &BTreeSet<usize>) -> Vec<PolyZ> {
    let mut result = Vec::new();
    let mut f_cur: PolyZ = f.to_vec();
    let mut s = 1;
    while 2 * s <= local.len() {
        let r = local.len();
        let mut found = false;
        let mut idx: Vec<usize> = (0..s).collect();
        'subsets: loop {
            let deg: usize = idx.iter().map(|&i| local[i].len() - 1).sum();
            let cur_deg = f_cur.len() - 1;
            if allowed.contains(&deg) || cur_deg != f.len() - 1 {
                if let Some((g, q)) = try_subset(&f_cur, &local, &idx, m) {
                    result.push(g);
                    f_cur = q;
                    let chosen: BTreeSet<usize> = idx.iter().copied().collect();
                    local = local
                        .into_iter()
                        .enumerate()
                        .filter(|(i, _)| !chosen.contains(i))
                        .map(|(_, g)| g)
                        .collect();
                    found = true;
                    break 'subsets;
                }
            }
            // next combination
            let mut i = s;
            loop {
                if i == 0 {
                    break 'subsets;
                }
                i -= 1;
                if idx[i] < r - s + i {
                    idx[i] += 1;
                    for j in i + 1..s {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
                if i == 0 {
                    break 'subsets;
                }
            }
        }
        if !found {
            s += 1;
        }
    }
    if f_cur.len() > 1 {
        result.push(int::primitive_part(&f_cur));
    }
    result
}

fn try_subset(f: &[BigInt], local: &[PolyZ], idx: &[usize], m: &BigInt) -> Option<(PolyZ, PolyZ)> {
    let lc = f.last().unwrap();
    // constant-term test
    let f0 = &f[0];
    if !f0.is_zero() {
        let mut c0 = lc.clone();
        for &i in idx {
            c0 = (c0 * &local[i][0]).mod_floor(m);
        }
        let c0 = mod_sym(&c0, m);
        if c0.is_zero() || !(lc * f0).is_multiple_of(&c0) {
            return None;
        }
    }
    let mut g: PolyZ = vec![lc.clone()];
    for &i in idx {
        g = mul_mod(&g, &local[i], m);
    }
    let g: PolyZ = g.iter().map(|c| mod_sym(c, m)).collect();
    let g = int::primitive_part(&g);
    let q = int::div_exact(f, &g)?;
    Some((g, q))
}

#[allow(dead_code)]
fn small(x: &BigInt) -> i64 {
    x.to_i64().unwrap_or(if x.is_negative() { i64::MIN } else { i64::MAX })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: &[i64]) -> PolyQ {
        PolyQ::from_ints(v)
    }

    #[test]
    fn factor_examples() {
        let f = factor_poly_q(&q(&[-1, 0, 1])).unwrap();
        assert_eq!(f, vec![(q(&[-1, 1]), 1), (q(&[1, 1]), 1)]);
        assert_eq!(factor_poly_q(&q(&[1, 0, 1])).unwrap(), vec![(q(&[1, 0, 1]), 1)]);
        assert_eq!(factor_poly_q(&q(&[1, 0, -10, 0, 1])).unwrap(), vec![(q(&[1, 0, -10, 0, 1]), 1)]);
    }

    #[test]
    fn swinnerton_dyer_like_products() {
        // (x^4 - 10x^2 + 1)(x^2 - 2)(x + 3)^2 * 6
        let a = q(&[1, 0, -10, 0, 1]);
        let b = q(&[-2, 0, 1]);
        let c = q(&[3, 1]);
        let prod = (&(&(&a * &b) * &c) * &c).scale(&BigRational::from_integer(6.into()));
        let f = factor_poly_q(&prod).unwrap();
        assert_eq!(f, vec![(c.clone(), 2), (b.clone(), 1), (a.clone(), 1)]);
    }

    #[test]
    fn x_power_and_non_monic() {
        // 2x^3 (3x - 1)
        let f = factor_poly_q(&q(&[0, 0, 0, -2, 6])).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].0, PolyQ::new(vec![BigRational::new((-1).into(), 3.into()), BigRational::one()]));
        assert_eq!(f[1], (PolyQ::x(), 3));
    }

    #[test]
    fn cyclotomic_product() {
        // x^12 - 1 = Φ1 Φ2 Φ3 Φ4 Φ6 Φ12
        let mut c = vec![0i64; 13];
        c[0] = -1;
        c[12] = 1;
        let f = factor_poly_q(&q(&c)).unwrap();
        let degs: Vec<usize> = f.iter().map(|(g, _)| g.degree().unwrap()).collect();
        assert_eq!(degs, vec![1, 1, 2, 2, 2, 4]);
    }
}
