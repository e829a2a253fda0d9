//! Weight-2 newforms on Γ₀(N) from modular symbols, their Hecke eigenvalue
//! fields, and congruences between them modulo powers of a prime.

pub mod arith;
pub mod congruence;
pub mod error;
pub mod linalg;
pub mod modp;
pub mod modsym;
pub mod numfield;
pub mod pipeline;
pub mod poly;

pub use error::{Error, Result};
pub use poly::PolyQ;
