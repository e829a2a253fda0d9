//! Cusps of Γ₀(N) and their equivalence.

use num_integer::Integer;

/// A cusp u/v in lowest terms with v >= 0; infinity is 1/0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cusp {
    pub u: i64,
    pub v: i64,
}

impl Cusp {
    pub fn new(u: i64, v: i64) -> Self {
        if v == 0 {
            return Cusp { u: 1, v: 0 };
        }
        let g = u.gcd(&v);
        let (mut u, mut v) = (u / g, v / g);
        if v < 0 {
            u = -u;
            v = -v;
        }
        Cusp { u, v }
    }

    pub fn infinity() -> Self {
        Cusp { u: 1, v: 0 }
    }

    pub fn neg(self) -> Self {
        Cusp::new(-self.u, self.v)
    }
}

fn inv_mod(u: i64, v: i64) -> i64 {
    if v == 0 {
        return 1;
    }
    if v == 1 {
        return 0;
    }
    let e = u.extended_gcd(&v);
    e.x.rem_euclid(v)
}

/// Γ₀(N)-equivalence: u1/v1 ~ u2/v2 iff s1 v2 ≡ s2 v1 mod gcd(v1 v2, N)
/// where u_j s_j ≡ 1 mod v_j.
pub fn equivalent(a: Cusp, b: Cusp, n: u64) -> bool {
    let s1 = inv_mod(a.u, a.v) as i128;
    let s2 = inv_mod(b.u, b.v) as i128;
    let g = ((a.v as i128) * (b.v as i128)).gcd(&(n as i128));
    (s1 * b.v as i128 - s2 * a.v as i128).rem_euclid(g) == 0
}

/// Number of cusps of X₀(N): Σ_{d|N} φ(gcd(d, N/d)).
pub fn num_cusps(n: u64) -> u64 {
    crate::arith::divisors(n)
        .into_iter()
        .map(|d| crate::arith::euler_phi(d.gcd(&(n / d))))
        .sum()
}

/// Classes of cusps modulo Γ₀(N) and, when `identify_sign` is set, modulo
/// x ↦ −x as well. Classes are discovered lazily.
#[derive(Clone, Debug)]
pub struct CuspClasses {
    n: u64,
    reps: Vec<Cusp>,
    // whether the class of rep is stable under negation
    self_conjugate: Vec<bool>,
}

impl CuspClasses {
    pub fn new(n: u64) -> Self {
        CuspClasses { n, reps: Vec::new(), self_conjugate: Vec::new() }
    }

    pub fn reps(&self) -> &[Cusp] {
        &self.reps
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn is_self_conjugate(&self, i: usize) -> bool {
        self.self_conjugate[i]
    }

    /// Index of the class of x together with ε = ±1 such that x ~ ε-twist of
    /// the representative (ε = −1 when x ~ −rep but not rep).
    pub fn class_of(&mut self, x: Cusp) -> (usize, i64) {
        for (i, &r) in self.reps.iter().enumerate() {
            if equivalent(x, r, self.n) {
                return (i, 1);
            }
            if equivalent(x.neg(), r, self.n) {
                return (i, -1);
            }
        }
        self.reps.push(x);
        self.self_conjugate.push(equivalent(x, x.neg(), self.n));
        (self.reps.len() - 1, 1)
    }
}
