//! Heilbronn matrices of determinant q, acting on Manin symbols from the right.

/// Matrix [[a, b], [c, d]].
pub type Mat2 = [i64; 4];

/// Rounds a/b to the nearest integer, halves away from zero.
fn round_div(a: i64, b: i64) -> i64 {
    let neg = (a < 0) != (b < 0);
    let (a, b) = (a.abs(), b.abs());
    let q = (2 * a + b) / (2 * b);
    if neg {
        -q
    } else {
        q
    }
}

/// Cremona's Heilbronn matrices for a prime p (valid for T_p with p ∤ N).
pub fn cremona(p: u64) -> Vec<Mat2> {
    let p = p as i64;
    if p == 2 {
        return vec![[1, 0, 0, 2], [2, 0, 0, 1], [2, 1, 0, 1], [1, 0, 1, 2]];
    }
    let mut out = vec![[1, 0, 0, p]];
    let half = p / 2;
    for r in -half..=half {
        let (mut x1, mut x2, mut y1, mut y2) = (p, -r, 0i64, 1i64);
        let (mut a, mut b) = (-p, r);
        out.push([x1, x2, y1, y2]);
        while b != 0 {
            let q = round_div(a, b);
            let c = a - b * q;
            a = -b;
            b = c;
            let x3 = q * x2 - x1;
            x1 = x2;
            x2 = x3;
            let y3 = q * y2 - y1;
            y1 = y2;
            y2 = y3;
            out.push([x1, x2, y1, y2]);
        }
    }
    out
}

/// Merel's matrices [[a, b], [c, d]] with a > b >= 0, d > c >= 0 and
/// ad - bc = n (valid for any n and any level).
pub fn merel(n: u64) -> Vec<Mat2> {
    let n = n as i64;
    let mut out = Vec::new();
    for a in 1..=n {
        let q = n / a;
        if q * a == n {
            let d = q;
            for b in 0..a {
                out.push([a, b, 0, d]);
            }
            for c in 1..d {
                out.push([a, 0, c, d]);
            }
        }
        for d in q + 1..=n {
            let bc = a * d - n;
            for c in bc / a + 1..d {
                if bc % c == 0 {
                    out.push([a, bc / c, c, d]);
                }
            }
        }
    }
    out
}
