//! Row-style Hermite normal form over ℤ.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::MatZ;

/// Hermite normal form of the row lattice: nonzero rows only, pivots
/// strictly increasing and positive, entries above a pivot in [0, pivot).
pub fn hnf(m: &MatZ) -> MatZ {
    let rows: Vec<Vec<BigInt>> = m.row_vecs();
    MatZ::from_rows(hnf_rows(rows, m.cols(), None), m.cols())
}

/// Hermite normal form of a full-rank lattice of rank `cols` given a
/// positive multiple `d` of its determinant; intermediate entries stay
/// bounded by d.
pub fn hnf_with_modulus(m: &MatZ, d: &BigInt) -> MatZ {
    let n = m.cols();
    MatZ::from_rows(hnf_rows(m.row_vecs(), n, Some(d)), n)
}

fn hnf_rows(mut rows: Vec<Vec<BigInt>>, cols: usize, modulus: Option<&BigInt>) -> Vec<Vec<BigInt>> {
    let reduce = |v: &mut Vec<BigInt>| {
        if let Some(d) = modulus {
            for x in v.iter_mut() {
                *x = x.mod_floor(d);
            }
        }
    };
    for r in rows.iter_mut() {
        reduce(r);
    }
    let mut out: Vec<Vec<BigInt>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    let mut active = rows;
    for c in 0..cols {
        // combine all rows with nonzero entry in column c into one
        let mut piv: Option<Vec<BigInt>> = None;
        let mut rest = Vec::with_capacity(active.len());
        for row in active.into_iter() {
            if row[c].is_zero() {
                if row.iter().any(|x| !x.is_zero()) {
                    rest.push(row);
                }
                continue;
            }
            match piv.take() {
                None => piv = Some(row),
                Some(p) => {
                    let (newp, other) = combine(p, row, c);
                    piv = Some(newp);
                    let mut other = other;
                    reduce(&mut other);
                    if other.iter().any(|x| !x.is_zero()) {
                        rest.push(other);
                    }
                }
            }
        }
        active = rest;
        if piv.is_none() {
            if let Some(d) = modulus {
                // d·e_c lies in the lattice
                let mut e = vec![BigInt::zero(); cols];
                e[c] = d.clone();
                piv = Some(e);
            }
        }
        if let Some(mut p) = piv {
            if p[c].is_negative() {
                for x in p.iter_mut() {
                    *x = -&*x;
                }
            }
            if let Some(d) = modulus {
                // the pivot divides d in a full-rank lattice containing dℤ^n
                let g = p[c].gcd(d);
                if g != p[c] {
                    // replace by g * (row / p[c]) modulo d via extended gcd with d e_c
                    let e = p[c].extended_gcd(d);
                    for x in p.iter_mut() {
                        *x = (&*x * &e.x).mod_floor(d);
                    }
                    p[c] = g.clone();
                }
                for x in p.iter_mut().skip(c + 1) {
                    *x = x.mod_floor(d);
                }
            }
            out.push(p);
            pivots.push(c);
        }
    }
    // reduce entries above pivots
    for i in (0..out.len()).rev() {
        let c = pivots[i];
        let pv = out[i][c].clone();
        let (upper, lower) = out.split_at_mut(i);
        let prow = &lower[0];
        for row in upper.iter_mut() {
            let q = row[c].div_floor(&pv);
            if !q.is_zero() {
                for (x, y) in row.iter_mut().zip(prow.iter()) {
                    *x -= &q * y;
                }
            }
        }
    }
    out
}

/// Unimodular combination of two rows so that the first has gcd at column
/// c and the second has zero there.
fn combine(a: Vec<BigInt>, b: Vec<BigInt>, c: usize) -> (Vec<BigInt>, Vec<BigInt>) {
    let e = a[c].extended_gcd(&b[c]);
    let g = e.gcd;
    let (u, v) = (e.x, e.y);
    let ac = &a[c] / &g;
    let bc = &b[c] / &g;
    let mut na = Vec::with_capacity(a.len());
    let mut nb = Vec::with_capacity(a.len());
    for (x, y) in a.iter().zip(&b) {
        na.push(&u * x + &v * y);
        nb.push(&ac * y - &bc * x);
    }
    debug_assert!(nb[c].is_zero());
    (na, nb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(hnf(&MatZ::identity(3)), MatZ::identity(3));
        let m = MatZ::from_i64(2, 2, &[2, 0, 0, 2]);
        assert_eq!(hnf(&m), m);
        assert_eq!(hnf(&MatZ::from_i64(2, 2, &[1, 2, 3, 4])), MatZ::from_i64(2, 2, &[1, 0, 0, 2]));
    }

    #[test]
    fn modular_variant_agrees() {
        let m = MatZ::from_i64(3, 3, &[4, 6, 2, 1, 5, 7, 3, 0, 9]);
        let d = m.det().abs();
        assert_eq!(hnf_with_modulus(&m, &d), hnf(&m));
        let m2 = MatZ::from_i64(4, 3, &[4, 6, 2, 1, 5, 7, 3, 0, 9, 2, 2, 2]);
        let h = hnf(&m2);
        assert!(h.is_hnf());
        let det: BigInt = (0..3).map(|i| h.get(i, i).clone()).product();
        assert_eq!(hnf_with_modulus(&m2, &det), h);
    }

    #[test]
    fn rank_deficient() {
        let m = MatZ::from_i64(3, 3, &[1, 2, 3, 2, 4, 6, 0, 0, 5]);
        let h = hnf(&m);
        assert_eq!(h.rows(), 2);
        assert!(h.is_hnf());
    }
}
