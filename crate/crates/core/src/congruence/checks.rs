//! The hypotheses of the level-raising congruence theorem, checked up to a
//! bound on the primes used.

use std::sync::Arc;

use super::place::{congruence_exponent, make_place, CongruencePlace};
use super::{sturm_bound, FormSource};
use crate::arith::{divisors, is_fundamental_discriminant, kronecker, primes_up_to};
use crate::error::Result;
use crate::modsym::Eigenform;
use crate::numfield::{valuation, FieldElement, Valuation};

/// Outcome of the Eisenstein test for the residual representation of g.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Irreducibility {
    /// Some b_q ≢ 1 + q mod λ, which rules out a reducible residual
    /// representation 1 ⊕ χ.
    CertifiedIrreducible { q: u64 },
    PossiblyReducible,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrongIrreducibility {
    /// ℓ > 3: irreducibility implies strong irreducibility.
    Automatic,
    /// ℓ = 3 and b_q is a λ-unit for this q ≡ 2 mod 3.
    Pass { q: u64 },
    Inconclusive,
}

/// Result of minimality and uniqueness checks; failures carry the
/// congruent class (level, index).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckOutcome {
    Pass,
    Fail { level: u64, index: usize },
}

impl CheckOutcome {
    pub fn passed(self) -> bool {
        self == CheckOutcome::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CmStatus {
    NoCm { candidates: Vec<i64> },
    /// a_q = 0 at every inert prime q ≤ bound.
    Cm { disc: i64, bound: u64 },
}

/// Looks for a prime q ≤ B, q ∤ ℓN_g, with b_q ≢ 1 + q modulo λ ∩ O_g.
pub fn residual_irreducibility_heuristic(
    g: &dyn Eigenform,
    place: &CongruencePlace,
    bound: u64,
) -> Result<Irreducibility> {
    let ell = place.ell();
    let lam = place.restriction_g();
    for q in primes_up_to(bound) {
        if (ell * g.level()).is_multiple_of(q) {
            continue;
        }
        let b = g.eigenvalue(q)?;
        let x = &b - &FieldElement::from_int(g.field(), 1 + q as i64);
        if valuation(&x, lam)? == Valuation::Finite(0) {
            return Ok(Irreducibility::CertifiedIrreducible { q });
        }
    }
    Ok(Irreducibility::PossiblyReducible)
}

/// Automatic for ℓ > 3; for ℓ = 3 looks for q ≡ 2 mod 3 with b_q a λ-unit.
pub fn strong_irreducibility_check(
    g: &dyn Eigenform,
    place: &CongruencePlace,
    bound: u64,
) -> Result<StrongIrreducibility> {
    let ell = place.ell();
    if ell > 3 {
        return Ok(StrongIrreducibility::Automatic);
    }
    let lam = place.restriction_g();
    for q in primes_up_to(bound) {
        if q % 3 != 2 || (ell * g.level()).is_multiple_of(q) {
            continue;
        }
        if valuation(&g.eigenvalue(q)?, lam)? == Valuation::Finite(0) {
            return Ok(StrongIrreducibility::Pass { q });
        }
    }
    Ok(StrongIrreducibility::Inconclusive)
}

/// Places of (g, h) lying over the same prime of K_g as `place`.
fn compatible_places(
    g: &dyn Eigenform,
    h: &dyn Eigenform,
    place: &CongruencePlace,
) -> Result<Vec<CongruencePlace>> {
    let lam = place.restriction_g();
    Ok(make_place(g, h, place.ell())?
        .into_iter()
        .filter(|p| Arc::ptr_eq(p.restriction_f(), lam) || **p.restriction_f() == **lam)
        .collect())
}

fn congruent_mod_lambda(
    g: &dyn Eigenform,
    h: &dyn Eigenform,
    place: &CongruencePlace,
    bound: u64,
) -> Result<bool> {
    for p in compatible_places(g, h, place)? {
        if congruence_exponent(g, h, &p, Some(bound))? >= Valuation::Finite(1) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// g is minimal at λ if no class at a proper divisor level is congruent to
/// it mod λ. `bound` defaults to the Sturm bound at N_g.
pub fn minimality_check(
    g: &dyn Eigenform,
    place: &CongruencePlace,
    source: &dyn FormSource,
    bound: Option<u64>,
) -> Result<CheckOutcome> {
    let n = g.level();
    let b = bound.unwrap_or_else(|| sturm_bound(n));
    for m in divisors(n) {
        // no cusp forms below level 11
        if m == n || m < 11 {
            continue;
        }
        for h in source.classes(m)? {
            if congruent_mod_lambda(g, h.as_ref(), place, b)? {
                return Ok(CheckOutcome::Fail { level: m, index: h.index() });
            }
        }
    }
    Ok(CheckOutcome::Pass)
}

/// No other class at level N_g is congruent to g mod λ.
pub fn uniqueness_check(
    g: &dyn Eigenform,
    place: &CongruencePlace,
    source: &dyn FormSource,
    bound: Option<u64>,
) -> Result<CheckOutcome> {
    let n = g.level();
    let b = bound.unwrap_or_else(|| sturm_bound(n));
    for h in source.classes(n)? {
        if h.index() == g.index() {
            continue;
        }
        if congruent_mod_lambda(g, h.as_ref(), place, b)? {
            return Ok(CheckOutcome::Fail { level: n, index: h.index() });
        }
    }
    Ok(CheckOutcome::Pass)
}

/// Negative fundamental discriminants D with |D| dividing 4N.
pub fn cm_candidates(n: u64) -> Vec<i64> {
    let mut v: Vec<i64> = divisors(4 * n)
        .into_iter()
        .map(|d| -(d as i64))
        .filter(|&d| is_fundamental_discriminant(d))
        .collect();
    v.sort_by_key(|d| d.abs());
    v
}

/// CM(D) if a_q vanishes at every prime q ≤ B, q ∤ N, inert in ℚ(√D) (at
/// least one such prime is required).
pub fn cm_check(g: &dyn Eigenform, bound: u64) -> Result<CmStatus> {
    let n = g.level();
    let candidates = cm_candidates(n);
    'cand: for &d in &candidates {
        let mut tested = 0;
        for q in primes_up_to(bound) {
            if n.is_multiple_of(q) || kronecker(d, q) != -1 {
                continue;
            }
            if !g.eigenvalue(q)?.is_zero() {
                continue 'cand;
            }
            tested += 1;
        }
        if tested > 0 {
            return Ok(CmStatus::Cm { disc: d, bound });
        }
    }
    Ok(CmStatus::NoCm { candidates })
}
