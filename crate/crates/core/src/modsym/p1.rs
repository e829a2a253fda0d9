//! The projective line P¹(ℤ/N) indexing Manin symbols.

use num_integer::Integer;

use crate::arith::divisors;

/// A pair (c, d) of residues mod N with gcd(c, d, N) = 1, in canonical form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct P1Element {
    pub c: u64,
    pub d: u64,
}

#[derive(Clone, Debug)]
pub struct P1List {
    n: u64,
    elements: Vec<P1Element>,
    divs: Vec<u64>,
    // index[k * n + v] for canonical (divs[k], v); u32::MAX when absent
    index: Vec<u32>,
}

fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// xgcd(a, n) = (g, s) with s*a ≡ g (mod n), 0 <= s < n.
fn xgcd_mod(a: u64, n: u64) -> (u64, u64) {
    let e = (a as i64).extended_gcd(&(n as i64));
    (e.gcd as u64, e.x.rem_euclid(n as i64) as u64)
}

/// Canonical representative of (u : v) in P¹(ℤ/N), `None` if gcd(u, v, N) > 1.
/// The first coordinate of the result always divides N (or is 0).
pub fn normalize(n: u64, u: i64, v: i64) -> Option<P1Element> {
    if n == 1 {
        return Some(P1Element { c: 0, d: 0 });
    }
    let ni = n as i64;
    let u = u.rem_euclid(ni) as u64;
    let v = v.rem_euclid(ni) as u64;
    if u == 0 {
        return if gcd(v, n) == 1 { Some(P1Element { c: 0, d: 1 }) } else { None };
    }
    let (g, mut s) = xgcd_mod(u, n);
    if gcd(g, v) != 1 {
        return None;
    }
    if g != 1 {
        let step = n / g;
        while gcd(s, n) != 1 {
            s = (s + step) % n;
        }
    }
    let v = ((s as u128 * v as u128) % n as u128) as u64;
    let mut min_v = v;
    if g != 1 {
        let ng = n / g;
        let vng = ((v as u128 * ng as u128) % n as u128) as u64;
        let mut cur = v;
        let mut t = 1u64;
        for _ in 1..g {
            cur = (cur + vng) % n;
            t += ng;
            if cur < min_v && gcd(t, n) == 1 {
                min_v = cur;
            }
        }
    }
    Some(P1Element { c: g, d: min_v })
}

impl P1List {
    pub fn new(n: u64) -> Self {
        assert!(n >= 1, "level must be positive");
        let divs = divisors(n);
        let mut elements = Vec::new();
        if n == 1 {
            elements.push(P1Element { c: 0, d: 0 });
            return P1List { n, elements, divs, index: vec![0] };
        }
        // (0:1) first, then by first coordinate (a divisor of N) and d
        elements.push(P1Element { c: 0, d: 1 });
        for &g in divs.iter().filter(|&&g| g != n) {
            for v in 0..n {
                if gcd(g, v) != 1 {
                    continue;
                }
                if let Some(e) = normalize(n, g as i64, v as i64) {
                    if e.c == g && e.d == v {
                        elements.push(e);
                    }
                }
            }
        }
        let mut index = vec![u32::MAX; divs.len() * n as usize];
        for (i, e) in elements.iter().enumerate() {
            let c = if e.c == 0 { n } else { e.c };
            let k = divs.binary_search(&c).expect("first coordinate divides N");
            index[k * n as usize + e.d as usize] = i as u32;
        }
        P1List { n, elements, divs, index }
    }

    pub fn level(&self) -> u64 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn get(&self, i: usize) -> P1Element {
        self.elements[i]
    }

    pub fn elements(&self) -> &[P1Element] {
        &self.elements
    }

    /// Index of the class of (u : v), `None` if not an element of P¹(ℤ/N).
    pub fn index(&self, u: i64, v: i64) -> Option<usize> {
        let e = normalize(self.n, u, v)?;
        if self.n == 1 {
            return Some(0);
        }
        let c = if e.c == 0 { self.n } else { e.c };
        let k = self.divs.binary_search(&c).ok()?;
        let i = self.index[k * self.n as usize + e.d as usize];
        (i != u32::MAX).then_some(i as usize)
    }
}

/// Lists P¹(ℤ/N).
pub fn p1_list(n: u64) -> Vec<P1Element> {
    P1List::new(n).elements
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::prime_divisors;

    fn mu(n: u64) -> u64 {
        prime_divisors(n).iter().fold(n, |acc, &p| acc / p * (p + 1))
    }

    #[test]
    fn sizes() {
        assert_eq!(p1_list(1).len(), 1);
        assert_eq!(p1_list(11).len(), 12);
        assert_eq!(p1_list(6).len(), 12);
        for n in 1..300 {
            assert_eq!(P1List::new(n).len() as u64, mu(n), "N={n}");
        }
    }

    #[test]
    fn unit_orbits_map_to_one_index() {
        for n in [12u64, 18, 25, 36, 49, 60] {
            let l = P1List::new(n);
            for c in 0..n {
                for d in 0..n {
                    let Some(i) = l.index(c as i64, d as i64) else {
                        assert!(c.gcd(&d).gcd(&n) > 1);
                        continue;
                    };
                    for u in (1..n).filter(|u| u.gcd(&n) == 1) {
                        let j = l.index((u * c) as i64, (u * d) as i64).unwrap();
                        assert_eq!(i, j);
                    }
                }
            }
        }
    }
}
