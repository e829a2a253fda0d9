//! Weight-2 modular symbols for Γ₀(N) and the newform decomposition.

pub mod cusps;
pub mod decomp;
pub mod genus;
pub mod heilbronn;
pub mod p1;
pub mod space;

pub use decomp::{decompose, Eigenform, HeckeCombination, NewformClass};
pub use p1::{p1_list, P1Element, P1List};
pub use space::{AmbientSpace, HeckeAmbient, ModSymSpace, Subspace};

use crate::error::Result;

/// Builds the space of modular symbols of weight 2 for Γ₀(N) with the
/// given sign (+1 or −1).
pub fn build_space(level: u64, sign: i64) -> Result<ModSymSpace> {
    ModSymSpace::new(level, sign)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q;

    #[test]
    fn cuspidal_dimensions() {
        for n in 1..=60u64 {
            let s = build_space(n, 1).unwrap();
            assert_eq!(s.cuspidal().dim() as u64, genus::genus(n), "N={n}");
        }
    }

    #[test]
    fn level_11() {
        let s = build_space(11, 1).unwrap();
        assert_eq!(s.hecke_operator(2), crate::linalg::MatQ::from_i64(1, 1, &[-2]));
        assert_eq!(s.hecke_operator(3), crate::linalg::MatQ::from_i64(1, 1, &[-1]));
        assert_eq!(*s.hecke_operator(7).get(0, 0), q(-2));
        assert_eq!(*s.hecke_operator(11).get(0, 0), q(1));
    }

    #[test]
    fn new_dimensions() {
        for n in 1..=60u64 {
            let s = build_space(n, 1).unwrap();
            assert_eq!(s.new_subspace().dim() as u64, genus::dim_new(n), "N={n}");
        }
    }
}
