//! Closed-form dimension formulas for Γ₀(N).

use crate::arith::{divisors, factor_u64, kronecker};
use super::cusps::num_cusps;

/// Index of Γ₀(N) in SL₂(ℤ): N·∏_{p|N}(1 + 1/p).
pub fn index_mu(n: u64) -> u64 {
    factor_u64(n).iter().fold(n, |acc, &(p, _)| acc / p * (p + 1))
}

/// Number of elliptic points of order 2.
pub fn nu2(n: u64) -> u64 {
    if n.is_multiple_of(4) {
        return 0;
    }
    factor_u64(n).iter().map(|&(p, _)| (1 + kronecker(-4, p)) as u64).product()
}

/// Number of elliptic points of order 3.
pub fn nu3(n: u64) -> u64 {
    if n.is_multiple_of(9) {
        return 0;
    }
    factor_u64(n).iter().map(|&(p, _)| (1 + kronecker(-3, p)) as u64).product()
}

/// Genus of X₀(N) = dim S₂(Γ₀(N)).
pub fn genus(n: u64) -> u64 {
    let twelve_g = 12 + index_mu(n) as i64 - 3 * nu2(n) as i64 - 4 * nu3(n) as i64 - 6 * num_cusps(n) as i64;
    debug_assert!(twelve_g % 12 == 0);
    (twelve_g / 12) as u64
}

fn beta(n: u64) -> i64 {
    factor_u64(n)
        .iter()
        .map(|&(_, e)| match e {
            1 => -2,
            2 => 1,
            _ => 0,
        })
        .product()
}

/// dim S₂^new(Γ₀(N)) by Möbius-type inversion of the genus.
pub fn dim_new(n: u64) -> u64 {
    divisors(n).into_iter().map(|m| beta(n / m) * genus(m) as i64).sum::<i64>() as u64
}
