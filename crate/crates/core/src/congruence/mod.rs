//! Congruences between newforms modulo powers of a prime, and the
//! hypotheses under which the break of such a congruence is explained by
//! ramification at the extra prime of the level.

mod checks;
mod place;
mod report;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

pub use checks::{
    cm_candidates, cm_check, minimality_check, residual_irreducibility_heuristic, strong_irreducibility_check, uniqueness_check,
    CheckOutcome, CmStatus, Irreducibility, StrongIrreducibility,
};
pub use place::{
    congruence_exponent, congruence_primes, congruence_valuations, make_place, maximal_order, CongruencePlace,
};
pub use report::{level_ratio, theorem_report, CongruenceReport, FormId, Hypotheses, PlaceReport};

use crate::arith::factor_u64;
use crate::error::{Error, Result};
use crate::modsym::{build_space, decompose, genus::index_mu, Eigenform};

/// Weight-2 Sturm bound ⌈μ/6⌉ for Γ₀(N), μ the index of Γ₀(N) in SL₂(ℤ).
pub fn sturm_bound(n: u64) -> u64 {
    index_mu(n).div_ceil(6)
}

/// Whether N_f/N_g avoids cubes of primes not dividing N_g.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CarayolCheck {
    pub pass: bool,
    pub offending_prime: Option<u64>,
}

pub fn carayol_check(n_f: u64, n_g: u64) -> Result<CarayolCheck> {
    if n_g == 0 || !n_f.is_multiple_of(n_g) {
        return Err(Error::Precondition(format!("{n_g} does not divide {n_f}")));
    }
    for (p, _) in factor_u64(n_f / n_g) {
        if !n_g.is_multiple_of(p) && n_f.is_multiple_of(p * p * p) {
            return Ok(CarayolCheck { pass: false, offending_prime: Some(p) });
        }
    }
    Ok(CarayolCheck { pass: true, offending_prime: None })
}

/// Where the checks find the newform classes of a level.
pub trait FormSource: Send + Sync {
    fn classes(&self, level: u64) -> Result<Vec<Arc<dyn Eigenform>>>;
}

/// Classes computed directly from modular symbols (sign +1), cached per level.
#[derive(Default)]
pub struct ModSymSource {
    levels: Mutex<HashMap<u64, Arc<Mutex<Option<Vec<Arc<dyn Eigenform>>>>>>>,
}

impl ModSymSource {
    pub fn new() -> Self {
        Self::default()
    }
}

impl FormSource for ModSymSource {
    fn classes(&self, level: u64) -> Result<Vec<Arc<dyn Eigenform>>> {
        let slot = self.levels.lock().unwrap().entry(level).or_default().clone();
        let mut guard = slot.lock().unwrap();
        if let Some(v) = guard.as_ref() {
            return Ok(v.clone());
        }
        let space = Arc::new(build_space(level, 1)?);
        let v: Vec<Arc<dyn Eigenform>> =
            decompose(&space)?.into_iter().map(|c| Arc::new(c) as Arc<dyn Eigenform>).collect();
        *guard = Some(v.clone());
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sturm_examples() {
        assert_eq!(sturm_bound(1), 1);
        assert_eq!(sturm_bound(11), 2);
        // μ(1937) = 14·150 = 2100
        assert_eq!(sturm_bound(1937), 350);
    }

    #[test]
    fn carayol_examples() {
        assert!(carayol_check(1859, 11).unwrap().pass);
        assert_eq!(carayol_check(88, 11).unwrap(), CarayolCheck { pass: false, offending_prime: Some(2) });
        assert!(carayol_check(77, 77).unwrap().pass);
        assert!(carayol_check(77, 5).is_err());
    }
}
