//! Full report for a pair f (level p^k·N_g) and g (level N_g) at a prime ℓ.

use std::fmt;

use num_bigint::BigInt;

use super::checks::{
    cm_check, minimality_check, residual_irreducibility_heuristic, strong_irreducibility_check, uniqueness_check,
    CheckOutcome, CmStatus, Irreducibility, StrongIrreducibility,
};
use super::place::{congruence_exponent, make_place};
use super::{carayol_check, sturm_bound, CarayolCheck, FormSource};
use crate::arith::{factor_u64, primes_up_to};
use crate::error::{Error, Result};
use crate::modsym::Eigenform;
use crate::numfield::Valuation;
use crate::poly::PolyQ;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormId {
    pub level: u64,
    pub index: usize,
    pub min_poly: PolyQ,
}

impl FormId {
    pub fn of(f: &dyn Eigenform) -> Self {
        FormId { level: f.level(), index: f.index(), min_poly: f.field().min_poly().clone() }
    }
}

impl fmt::Display for FormId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{} [{}]", self.level, self.index, self.min_poly)
    }
}

/// Hypotheses of the theorem, as verified at one place.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypotheses {
    pub irreducibility: Irreducibility,
    pub strong_irreducibility: StrongIrreducibility,
    pub minimality: CheckOutcome,
    pub uniqueness: CheckOutcome,
}

impl Hypotheses {
    pub fn all_pass(&self) -> bool {
        matches!(self.irreducibility, Irreducibility::CertifiedIrreducible { .. })
            && self.strong_irreducibility != StrongIrreducibility::Inconclusive
            && self.minimality.passed()
            && self.uniqueness.passed()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaceReport {
    pub e: u32,
    pub f: u32,
    /// π of the two-element representation (ℓ, π) of λ.
    pub pi: Vec<BigInt>,
    pub n_max: Valuation,
    /// n_max + 1; None when all tested differences vanish at λ.
    pub m: Option<u32>,
    /// Only computed when n_max ≥ 1.
    pub hypotheses: Option<Hypotheses>,
    /// v_ℓ(a) = m − 1 for the unipotent inertia parameter, when k = 1 and
    /// the hypotheses hold.
    pub predicted_v_ell_a: Option<u32>,
    /// The congruence descends mod λ^(m−1) to level N_g.
    pub lowering_level: Option<u32>,
    /// Exponent with 20 more primes, recorded only if it is smaller.
    pub monotonicity_drop: Option<Valuation>,
}

impl PlaceReport {
    /// m ≥ 2 with every hypothesis verified.
    pub fn qualifies(&self) -> bool {
        self.m.is_some_and(|m| m >= 2) && self.hypotheses.as_ref().is_some_and(|h| h.all_pass())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CongruenceReport {
    pub f: FormId,
    pub g: FormId,
    pub ell: u64,
    pub p: u64,
    pub k: u32,
    pub bound: u64,
    pub excluded_primes: Vec<u64>,
    pub carayol: CarayolCheck,
    pub cm: CmStatus,
    pub places: Vec<PlaceReport>,
}

impl CongruenceReport {
    /// The qualifying place with the largest m (unramified first on ties).
    pub fn best(&self) -> Option<&PlaceReport> {
        self.places
            .iter()
            .filter(|p| p.qualifies())
            .max_by_key(|p| (p.m, std::cmp::Reverse(p.e), std::cmp::Reverse(p.f)))
    }

    pub fn max_m(&self) -> Option<u32> {
        self.places.iter().filter_map(|p| p.m).max()
    }
}

/// Splits N_f/N_g as p^k; errors unless it is a nontrivial prime power
/// with p ∤ N_g.
pub fn level_ratio(n_f: u64, n_g: u64) -> Result<(u64, u32)> {
    if n_g == 0 || !n_f.is_multiple_of(n_g) {
        return Err(Error::Precondition(format!("{n_g} does not divide {n_f}")));
    }
    let fac = factor_u64(n_f / n_g);
    match fac.as_slice() {
        [(p, k)] if !n_g.is_multiple_of(*p) => Ok((*p, *k)),
        [] => Err(Error::Precondition("levels are equal: the ratio is not p^k with k ≥ 1".into())),
        _ => Err(Error::Precondition(format!(
            "level ratio {} is not a power of a prime not dividing {n_g}",
            n_f / n_g
        ))),
    }
}

/// Congruence exponent at every place above ℓ together with the hypothesis
/// checklist. B defaults to the Sturm bound at N_f.
pub fn theorem_report(
    f: &dyn Eigenform,
    g: &dyn Eigenform,
    ell: u64,
    source: &dyn FormSource,
    bound: Option<u64>,
) -> Result<CongruenceReport> {
    let (p, k) = level_ratio(f.level(), g.level())?;
    let carayol = carayol_check(f.level(), g.level())?;
    let b = bound.unwrap_or_else(|| sturm_bound(f.level()));
    let places = make_place(f, g, ell)?;
    let mut out = Vec::with_capacity(places.len());
    for place in &places {
        let n_max = congruence_exponent(f, g, place, Some(b))?;
        let m = n_max.finite().map(|n| n + 1);
        let mut rep = PlaceReport {
            e: place.e(),
            f: place.f(),
            pi: place.prime().pi().to_vec(),
            n_max,
            m,
            hypotheses: None,
            predicted_v_ell_a: None,
            lowering_level: None,
            monotonicity_drop: None,
        };
        if n_max >= Valuation::Finite(1) {
            let wider = congruence_exponent(f, g, place, Some(b + 20))?;
            if wider < n_max {
                log::warn!(
                    "exponent for {}.{} / {}.{} at ℓ={ell} drops from {n_max} to {wider} past B={b}",
                    f.level(),
                    f.index(),
                    g.level(),
                    g.index()
                );
                rep.monotonicity_drop = Some(wider);
            }
            let h = Hypotheses {
                irreducibility: residual_irreducibility_heuristic(g, place, b)?,
                strong_irreducibility: strong_irreducibility_check(g, place, b)?,
                minimality: minimality_check(g, place, source, None)?,
                uniqueness: uniqueness_check(g, place, source, None)?,
            };
            if h.all_pass() {
                if let Some(m) = m {
                    if k == 1 && carayol.pass {
                        rep.predicted_v_ell_a = Some(m - 1);
                    }
                    if m > 1 {
                        rep.lowering_level = Some(m - 1);
                    }
                }
            }
            rep.hypotheses = Some(h);
        }
        out.push(rep);
    }
    let bad = ell * f.level();
    Ok(CongruenceReport {
        f: FormId::of(f),
        g: FormId::of(g),
        ell,
        p,
        k,
        bound: b,
        excluded_primes: primes_up_to(b).into_iter().filter(|q| bad.is_multiple_of(*q)).collect(),
        carayol,
        cm: cm_check(g, b)?,
        places: out,
    })
}

impl fmt::Display for CongruenceReport {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(fm, "f = {}", self.f)?;
        writeln!(fm, "g = {}", self.g)?;
        writeln!(fm, "ell = {}, N_f/N_g = {}^{}, B = {}", self.ell, self.p, self.k, self.bound)?;
        writeln!(fm, "excluded primes: {:?}", self.excluded_primes)?;
        match self.carayol.offending_prime {
            None => writeln!(fm, "carayol: pass")?,
            Some(q) => writeln!(fm, "carayol: fail at p = {q}")?,
        }
        match &self.cm {
            CmStatus::NoCm { .. } => writeln!(fm, "cm: none")?,
            CmStatus::Cm { disc, bound } => writeln!(fm, "cm: D = {disc} (up to {bound})")?,
        }
        for (i, p) in self.places.iter().enumerate() {
            let m = p.m.map_or("inf".to_string(), |m| m.to_string());
            writeln!(fm, "place {}: e = {}, f = {}, n_max = {}, m = {}", i + 1, p.e, p.f, p.n_max, m)?;
            if let Some(h) = &p.hypotheses {
                writeln!(fm, "  irreducibility: {:?}", h.irreducibility)?;
                writeln!(fm, "  strong irreducibility: {:?}", h.strong_irreducibility)?;
                writeln!(fm, "  minimality: {:?}", h.minimality)?;
                writeln!(fm, "  uniqueness: {:?}", h.uniqueness)?;
                writeln!(fm, "  all hypotheses: {}", if h.all_pass() { "pass" } else { "fail" })?;
            }
            if let Some(v) = p.predicted_v_ell_a {
                writeln!(fm, "  predicted v_ell(a) = {v}")?;
            }
            if let Some(n) = p.lowering_level {
                writeln!(fm, "  level lowering holds mod lambda^{n}")?;
            }
            if let Some(v) = p.monotonicity_drop {
                writeln!(fm, "  warning: exponent drops to {v} with 20 more primes")?;
            }
        }
        Ok(())
    }
}
