//! Number fields, orders, prime ideals and valuations.

mod compose;
mod field;
mod order;
mod primes;

pub use field::{complex_roots, make_field, FieldElement, NumberField};
pub use compose::{compose_fields, tensor_components, Composite, FieldEmbedding};
pub use order::{
    canonical_basis, ell_integral, ell_maximal_order, maximize, kron_mod, left_kernel_mod, mul_mod, pow_mod,
    residues, OrderBasis, OrderOps, TensorOrder,
};
pub use primes::{primes_above, primes_above_order, restrict_place, valuation, PrimeIdeal, Valuation};
