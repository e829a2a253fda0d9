//! Multimodular echelon forms and characteristic polynomials. Results are
//! reconstructed from images modulo word-size primes and then verified
//! exactly (echelon forms) or justified by a coefficient bound (charpolys).

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{integer_vector, MatQ, Q};
use crate::arith::{big_mod_u64, rational_reconstruction, CrtAccumulator, ModularPrimes};
use crate::modp::MatP;
use crate::poly::PolyQ;

/// Integer matrix reduced modulo p.
pub fn int_rows_mod_p(a: &[Vec<BigInt>], cols: usize, p: u64) -> MatP {
    let mut m = MatP::zero(a.len(), cols, p);
    for (i, row) in a.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if !x.is_zero() {
                m.data[i * cols + j] = big_mod_u64(x, p);
            }
        }
    }
    m
}

/// Reduced row echelon form of a rational matrix: nonzero rows and pivots.
pub fn rref(m: &MatQ) -> (MatQ, Vec<usize>) {
    let (a, _) = m.integer_rows();
    let a: Vec<Vec<BigInt>> = a.into_iter().filter(|r| r.iter().any(|x| !x.is_zero())).collect();
    rref_int(&a, m.cols())
}

/// Reduced row echelon form of the row space of an integer matrix.
pub fn rref_int(a: &[Vec<BigInt>], cols: usize) -> (MatQ, Vec<usize>) {
    if a.is_empty() {
        return (MatQ::zero(0, cols), Vec::new());
    }
    let mut best_pivots: Option<Vec<usize>> = None;
    let mut acc: Option<CrtAccumulator> = None;
    let mut primes_used = 0usize;
    let mut next_attempt = 1usize;
    for p in ModularPrimes::new() {
        let mut mp = int_rows_mod_p(a, cols, p);
        let pivots = mp.rref();
        let better = match &best_pivots {
            None => true,
            Some(bp) => pivots.len() > bp.len() || (pivots.len() == bp.len() && pivots < *bp),
        };
        let same = best_pivots.as_ref() == Some(&pivots);
        if better && !same {
            best_pivots = Some(pivots.clone());
            acc = Some(CrtAccumulator::new(pivots.len() * cols));
            primes_used = 0;
            next_attempt = 1;
        } else if !same {
            continue; // unlucky prime
        }
        let r = pivots.len();
        acc.as_mut().unwrap().add(&mp.data[..r * cols], p);
        primes_used += 1;
        if primes_used < next_attempt {
            continue;
        }
        next_attempt = primes_used + primes_used.div_ceil(4).max(1);
        let acc_ref = acc.as_ref().unwrap();
        if let Some(rows) = reconstruct_rows(acc_ref, r, cols) {
            let cand = MatQ::from_rows_with_cols(rows, cols);
            if verify_rref(a, &cand, &pivots) {
                return (cand, pivots);
            }
        }
    }
    unreachable!("prime supply exhausted")
}

/// Echelon basis of a rational subspace of known dimension, reconstructed
/// from its echelon forms modulo primes. `image(p)` returns the reduced
/// echelon rows mod p (row-major) with pivots, or None when p is unusable;
/// `accept` checks a reconstructed candidate exactly. Gives up after
/// `max_primes` usable primes.
pub fn rref_from_images(
    dim: usize,
    cols: usize,
    max_primes: usize,
    mut image: impl FnMut(u64) -> Option<(Vec<u64>, Vec<usize>)>,
    accept: impl Fn(&MatQ, &[usize]) -> bool,
) -> Option<(MatQ, Vec<usize>)> {
    let mut best: Option<Vec<usize>> = None;
    let mut acc = CrtAccumulator::new(dim * cols);
    let mut used = 0usize;
    let mut seen = 0usize;
    let mut next_attempt = 1usize;
    for p in ModularPrimes::new() {
        if seen >= max_primes {
            return None;
        }
        let Some((data, pivots)) = image(p) else { continue };
        seen += 1;
        if pivots.len() != dim {
            continue;
        }
        match &best {
            Some(b) if *b == pivots => {}
            // later pivots come from primes dividing some minor
            Some(b) if pivots > *b => continue,
            _ => {
                best = Some(pivots.clone());
                acc = CrtAccumulator::new(dim * cols);
                used = 0;
                next_attempt = 1;
            }
        }
        acc.add(&data[..dim * cols], p);
        used += 1;
        if used < next_attempt {
            continue;
        }
        next_attempt = used + used.div_ceil(4).max(1);
        if let Some(rows) = reconstruct_rows(&acc, dim, cols) {
            let cand = MatQ::from_rows_with_cols(rows, cols);
            let piv = best.as_ref().unwrap();
            if accept(&cand, piv) {
                return Some((cand, piv.clone()));
            }
        }
    }
    None
}

/// Rational reconstruction of each row, sharing a running denominator.
fn reconstruct_rows(acc: &CrtAccumulator, r: usize, cols: usize) -> Option<Vec<Vec<Q>>> {
    let m = &acc.modulus;
    let half_bound = (m >> 1u32).sqrt();
    let mut rows = Vec::with_capacity(r);
    for i in 0..r {
        let mut den = BigInt::one();
        let mut row = Vec::with_capacity(cols);
        for j in 0..cols {
            let v = &acc.values[i * cols + j];
            if v.is_zero() {
                row.push(Q::zero());
                continue;
            }
            let x = (v * &den).mod_floor(m);
            let xs = if &x + &x > *m { &x - m } else { x.clone() };
            if xs.abs() <= half_bound {
                row.push(BigRational::new(xs, den.clone()));
                continue;
            }
            let rr = rational_reconstruction(&x, m)?;
            let d2 = rr.denom().clone();
            row.push(BigRational::new(rr.numer().clone(), &den * &d2));
            den *= d2;
            if den > half_bound {
                return None;
            }
        }
        rows.push(row);
    }
    Some(rows)
}

/// Checks that `r` (identity at the pivots) spans the row space of `a`:
/// every row of a equals Σ a[pivot_i] * r_i. Ranks then agree, because the
/// rank modulo a prime never exceeds the rational rank.
fn verify_rref(a: &[Vec<BigInt>], r: &MatQ, pivots: &[usize]) -> bool {
    let cols = r.cols();
    let mut rint = Vec::with_capacity(r.rows());
    for i in 0..r.rows() {
        for (k, &pc) in pivots.iter().enumerate() {
            let expect = if k == i { Q::one() } else { Q::zero() };
            if r.get(i, pc) != &expect {
                return false;
            }
        }
        let (s, v) = integer_vector(r.row(i));
        rint.push((s, v));
    }
    // r_i = v_i / s_i; L = lcm of s_i numerators (s_i = den/g)
    let lcm = rint.iter().fold(BigInt::one(), |acc, (s, _)| acc.lcm(s.numer()));
    let factors: Vec<BigInt> = rint
        .iter()
        .map(|(s, _)| {
            // L * r_i = L * v_i * s_i.denom / s_i.numer
            (&lcm / s.numer()) * s.denom()
        })
        .collect();
    for row in a {
        let mut acc = vec![BigInt::zero(); cols];
        for (i, &pc) in pivots.iter().enumerate() {
            let c = &row[pc];
            if c.is_zero() {
                continue;
            }
            let cf = c * &factors[i];
            for (o, x) in acc.iter_mut().zip(&rint[i].1) {
                if !x.is_zero() {
                    *o += &cf * x;
                }
            }
        }
        for (o, x) in acc.iter().zip(row) {
            if *o != x * &lcm {
                return false;
            }
        }
    }
    true
}

/// Characteristic polynomial of a rational matrix by Chinese remaindering of
/// modular Hessenberg charpolys, with a Hadamard-type coefficient bound.
pub fn charpoly(m: &MatQ) -> PolyQ {
    let n = m.rows();
    if n == 0 {
        return PolyQ::one();
    }
    let den = m.max_denominator_lcm();
    let a: Vec<BigInt> = m.data().iter().map(|x| (x * &den).to_integer()).collect();
    let cp = charpoly_int(&a, n);
    // c_k(A/D) = c_k(A) / D^(n-k) for the coefficient of x^k
    let mut coeffs = Vec::with_capacity(n + 1);
    let mut dpow = BigInt::one();
    let mut pows = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        pows.push(dpow.clone());
        dpow *= &den;
    }
    for (k, c) in cp.into_iter().enumerate() {
        coeffs.push(BigRational::new(c, pows[n - k].clone()));
    }
    PolyQ::new(coeffs)
}

/// Charpoly of an integer matrix given row-major, coefficients ascending.
pub fn charpoly_int(a: &[BigInt], n: usize) -> Vec<BigInt> {
    // |c_k| <= C(n,k) R^(n-k) <= (1+R)^n with R the max absolute row sum.
    let mut r = BigInt::zero();
    for i in 0..n {
        let s: BigInt = a[i * n..(i + 1) * n].iter().map(|x| x.abs()).sum();
        if s > r {
            r = s;
        }
    }
    let bound_bits = (r + 1u32).bits() * n as u64 + 2;
    let mut acc = CrtAccumulator::new(n + 1);
    for p in ModularPrimes::new() {
        let mut mp = MatP::zero(n, n, p);
        for (d, x) in mp.data.iter_mut().zip(a) {
            if !x.is_zero() {
                *d = big_mod_u64(x, p);
            }
        }
        acc.add(&mp.charpoly(), p);
        if acc.modulus.bits() > bound_bits {
            break;
        }
    }
    acc.symmetric()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q;

    #[test]
    fn modular_rref_matches_exact() {
        let m = MatQ::new(
            4,
            5,
            [3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 12, 3, 10, 6, 8, 0, 0, 0, 7, 1]
                .iter()
                .map(|&x| q(x))
                .collect(),
        );
        let (r1, p1) = m.rref_exact();
        let (r2, p2) = rref(&m);
        assert_eq!(p1, p2);
        assert_eq!(r1, r2);
    }

    #[test]
    fn large_entries_reconstruct() {
        let big = BigInt::from(10u64).pow(40);
        let m = MatQ::new(
            2,
            3,
            vec![
                BigRational::from_integer(big.clone()),
                q(1),
                q(0),
                q(3),
                BigRational::new(1.into(), big.clone() + 7),
                q(2),
            ],
        );
        let (r1, p1) = m.rref_exact();
        let (r2, p2) = rref(&m);
        assert_eq!((r1, p1), (r2, p2));
    }
}
