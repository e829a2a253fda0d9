//! Places above ℓ for a pair of eigenforms, and congruence exponents.
//!
//! A place lives in O_f ⊗ O_g, the tensor product of ℓ-maximal orders of the
//! two eigenvalue fields. Its primes above ℓ are exactly the primes above ℓ
//! of all composite fields of K_f and K_g, so every way of matching the
//! Galois conjugates of f with those of g is covered. When the tensor
//! product is not ℓ-maximal (both fields ramified at ℓ), the composite
//! components are built explicitly instead.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::sturm_bound;
use crate::arith::{factor_biguint, is_prime64, primes_up_to, valuation_int};
use crate::error::{Error, Result};
use crate::modsym::Eigenform;
use crate::numfield::{
    ell_maximal_order, primes_above, primes_above_order, tensor_components, FieldElement, FieldEmbedding,
    NumberField, OrderBasis, OrderOps, PrimeIdeal, TensorOrder, Valuation,
};

type OrderSlot = Arc<OnceLock<std::result::Result<(Arc<OrderBasis>, Arc<Vec<Arc<PrimeIdeal>>>), String>>>;

fn order_cache() -> &'static Mutex<HashMap<(NumberField, u64), OrderSlot>> {
    static CACHE: OnceLock<Mutex<HashMap<(NumberField, u64), OrderSlot>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The ℓ-maximal order of a field with its primes above ℓ, computed once
/// per (field, ℓ) for the whole process.
pub fn maximal_order(field: &Arc<NumberField>, ell: u64) -> Result<(Arc<OrderBasis>, Arc<Vec<Arc<PrimeIdeal>>>)> {
    let slot = order_cache()
        .lock()
        .unwrap()
        .entry(((**field).clone(), ell))
        .or_default()
        .clone();
    slot.get_or_init(|| {
        let o = Arc::new(ell_maximal_order(field, ell).map_err(|e| e.to_string())?);
        let ps = primes_above(&o, ell).map_err(|e| e.to_string())?;
        Ok((o, Arc::new(ps.into_iter().map(Arc::new).collect())))
    })
    .clone()
    .map_err(Error::Computation)
}

#[derive(Debug)]
enum Ring {
    Tensor(Arc<TensorOrder>),
    Component { order: Arc<OrderBasis>, embed_f: FieldEmbedding, embed_g: FieldEmbedding },
}

/// A prime λ above ℓ of (an order in) K_f ⊗ K_g, with its restrictions to
/// the two eigenvalue fields.
pub struct CongruencePlace {
    ell: u64,
    field_f: Arc<NumberField>,
    field_g: Arc<NumberField>,
    order_f: Arc<OrderBasis>,
    order_g: Arc<OrderBasis>,
    ring: Ring,
    lam: Arc<PrimeIdeal>,
    lam_f: Arc<PrimeIdeal>,
    lam_g: Arc<PrimeIdeal>,
}

impl fmt::Debug for CongruencePlace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CongruencePlace(ell={}, e={}, f={})", self.ell, self.e(), self.f())
    }
}

impl CongruencePlace {
    pub fn ell(&self) -> u64 {
        self.ell
    }

    /// Ramification index of λ over ℓ.
    pub fn e(&self) -> u32 {
        self.lam.ramification_index()
    }

    /// Residue degree of λ over ℓ.
    pub fn f(&self) -> u32 {
        self.lam.residue_degree()
    }

    pub fn prime(&self) -> &Arc<PrimeIdeal> {
        &self.lam
    }

    /// λ ∩ O_f.
    pub fn restriction_f(&self) -> &Arc<PrimeIdeal> {
        &self.lam_f
    }

    /// λ ∩ O_g.
    pub fn restriction_g(&self) -> &Arc<PrimeIdeal> {
        &self.lam_g
    }

    /// Rank over ℤ of the order holding λ.
    pub fn rank(&self) -> usize {
        self.lam.order().rank()
    }

    /// Whether λ sits in the full tensor product or in one explicit composite.
    pub fn is_tensor(&self) -> bool {
        matches!(self.ring, Ring::Tensor(_))
    }

    /// Coordinates of s·x in the order holding λ for x ∈ K_f (left) or
    /// x ∈ K_g, with s a positive integer prime to ℓ; returns (coords, s).
    fn image(&self, x: &FieldElement, left: bool) -> Result<(Vec<BigInt>, BigInt)> {
        let not_integral = || Error::Precondition(format!("eigenvalue not integral at {}", self.ell));
        match &self.ring {
            Ring::Tensor(t) => {
                let (o, field) = if left { (&self.order_f, &self.field_f) } else { (&self.order_g, &self.field_g) };
                if x.field() != field {
                    return Err(Error::Precondition("element is not in the expected eigenvalue field".into()));
                }
                let c = o.integral_coords(x).ok_or_else(not_integral)?;
                let s = scale_of(&o.coords(x), &c);
                let v = if left {
                    TensorOrder::pure(&c, &t.right().one())
                } else {
                    TensorOrder::pure(&t.left().one(), &c)
                };
                Ok((v, s))
            }
            Ring::Component { order, embed_f, embed_g } => {
                let y = if left { embed_f.apply(x) } else { embed_g.apply(x) };
                let c = order.integral_coords(&y).ok_or_else(not_integral)?;
                let s = scale_of(&order.coords(&y), &c);
                Ok((c, s))
            }
        }
    }

    /// Coordinates of a unit multiple of a⊗1 − 1⊗b.
    pub fn difference(&self, a: &FieldElement, b: &FieldElement) -> Result<Vec<BigInt>> {
        let (ca, sa) = self.image(a, true)?;
        let (cb, sb) = self.image(b, false)?;
        Ok(ca.iter().zip(&cb).map(|(x, y)| &sb * x - &sa * y).collect())
    }

    /// Coordinates of a unit multiple of the image of b ∈ K_g.
    pub fn right_element(&self, b: &FieldElement) -> Result<Vec<BigInt>> {
        Ok(self.image(b, false)?.0)
    }

    /// Upper bound for v_λ(a⊗1 − 1⊗b) from its norm, None when the norm
    /// vanishes (the difference is a zero divisor).
    fn norm_bound(&self, a: &FieldElement, b: &FieldElement) -> Option<u32> {
        let norm = match &self.ring {
            Ring::Tensor(_) => a.charpoly().resultant(&b.charpoly()),
            Ring::Component { embed_f, embed_g, .. } => (&embed_f.apply(a) - &embed_g.apply(b)).norm(),
        };
        if norm.is_zero() {
            return None;
        }
        let l = BigInt::from(self.ell);
        Some(valuation_int(norm.numer(), &l) / self.f())
    }

    /// v_λ(a⊗1 − 1⊗b), exact. `q` is the prime the eigenvalues belong to
    /// and bounds the complex absolute values by 2√q.
    pub fn valuation_of_difference(&self, a: &FieldElement, b: &FieldElement, q: u64) -> Result<Valuation> {
        let d = self.difference(a, b)?;
        if d.iter().all(|c| c.is_zero()) {
            return Ok(Valuation::Infinite);
        }
        Ok(match self.norm_bound(a, b) {
            Some(cap) => Valuation::Finite(self.lam.valuation_capped(&d, cap)),
            None => {
                let cap = self.ramanujan_cap(q);
                let v = self.lam.valuation_capped(&d, cap);
                if v == cap {
                    Valuation::Infinite
                } else {
                    Valuation::Finite(v)
                }
            }
        })
    }

    /// One more than the largest finite λ-valuation a nonzero component of a
    /// difference of q-th eigenvalues can have.
    fn ramanujan_cap(&self, q: u64) -> u32 {
        let bits = self.rank() as f64 * (4.0 * (q as f64).sqrt()).ln() / (self.ell as f64).ln();
        (bits / self.f() as f64).floor() as u32 + 1
    }
}

fn scale_of(rational: &[crate::linalg::Q], scaled: &[BigInt]) -> BigInt {
    for (r, s) in rational.iter().zip(scaled) {
        if !r.is_zero() {
            return (s.clone() * r.denom()) / r.numer();
        }
    }
    BigInt::from(1)
}

/// All places above ℓ for the pair (f, g), ordered by residue degree,
/// ramification index and uniformizer.
pub fn make_place(f: &dyn Eigenform, g: &dyn Eigenform, ell: u64) -> Result<Vec<CongruencePlace>> {
    if ell == 2 || !is_prime64(ell) {
        return Err(Error::Precondition(format!("ℓ = {ell} must be an odd prime")));
    }
    if f.level().is_multiple_of(ell) {
        return Err(Error::Precondition(format!("ℓ = {ell} divides the level {}", f.level())));
    }
    let (of, pf) = maximal_order(f.field(), ell)?;
    let (og, pg) = maximal_order(g.field(), ell)?;
    let tensor = Arc::new(TensorOrder::new(of.clone() as Arc<dyn OrderOps>, og.clone() as Arc<dyn OrderOps>));
    let mut places = Vec::new();
    // O_f ⊗ O_g is ℓ-maximal unless both factors ramify somewhere above ℓ
    let both_ramified = pf.iter().any(|p| p.ramification_index() > 1) && pg.iter().any(|p| p.ramification_index() > 1);
    let split = if both_ramified {
        Err(Error::Precondition(format!("tensor order not {ell}-maximal")))
    } else {
        primes_above_order(tensor.clone(), ell)
    };
    match split {
        Ok(primes) => {
            for lam in primes {
                let lam = Arc::new(lam);
                let lam_f = restrict(&pf, |p| lam.contains(&TensorOrder::pure(p.pi(), &og.one())))?;
                let lam_g = restrict(&pg, |p| lam.contains(&TensorOrder::pure(&of.one(), p.pi())))?;
                places.push(CongruencePlace {
                    ell,
                    field_f: f.field().clone(),
                    field_g: g.field().clone(),
                    order_f: of.clone(),
                    order_g: og.clone(),
                    ring: Ring::Tensor(tensor.clone()),
                    lam,
                    lam_f,
                    lam_g,
                });
            }
        }
        Err(Error::Precondition(_)) => {
            log::debug!("tensor order not {ell}-maximal; using composite components");
            for comp in tensor_components(f.field(), g.field())? {
                let (ok, pk) = maximal_order(&comp.field, ell)?;
                for lam in pk.iter() {
                    let image_in = |e: &FieldEmbedding, o: &OrderBasis, p: &PrimeIdeal| -> Result<bool> {
                        let y = e.apply(&o.element(p.pi()));
                        let c = ok
                            .integral_coords(&y)
                            .ok_or_else(|| Error::Computation("embedded uniformizer not integral".into()))?;
                        Ok(lam.contains(&c))
                    };
                    let lam_f = restrict_try(&pf, |p| image_in(&comp.embed_a, &of, p))?;
                    let lam_g = restrict_try(&pg, |p| image_in(&comp.embed_b, &og, p))?;
                    places.push(CongruencePlace {
                        ell,
                        field_f: f.field().clone(),
                        field_g: g.field().clone(),
                        order_f: of.clone(),
                        order_g: og.clone(),
                        ring: Ring::Component {
                            order: ok.clone(),
                            embed_f: comp.embed_a.clone(),
                            embed_g: comp.embed_b.clone(),
                        },
                        lam: lam.clone(),
                        lam_f,
                        lam_g,
                    });
                }
            }
        }
        Err(e) => return Err(e),
    }
    Ok(places)
}

fn restrict(primes: &[Arc<PrimeIdeal>], test: impl Fn(&PrimeIdeal) -> bool) -> Result<Arc<PrimeIdeal>> {
    restrict_try(primes, |p| Ok(test(p)))
}

fn restrict_try(primes: &[Arc<PrimeIdeal>], test: impl Fn(&PrimeIdeal) -> Result<bool>) -> Result<Arc<PrimeIdeal>> {
    for p in primes {
        if test(p)? {
            return Ok(p.clone());
        }
    }
    Err(Error::Computation("no prime of the eigenvalue field lies under the place".into()))
}

/// Primes q ≤ bound not dividing `bad`.
fn good_primes(bound: u64, bad: u64) -> Vec<u64> {
    primes_up_to(bound).into_iter().filter(|q| !bad.is_multiple_of(*q)).collect()
}

fn default_bound(f: &dyn Eigenform, g: &dyn Eigenform) -> u64 {
    sturm_bound(f.level().lcm(&g.level()))
}

/// v_λ(a_q − b_q) for every prime q ≤ B with q ∤ ℓ·N_f·N_g.
pub fn congruence_valuations(
    f: &dyn Eigenform,
    g: &dyn Eigenform,
    place: &CongruencePlace,
    bound: Option<u64>,
) -> Result<Vec<(u64, Valuation)>> {
    let b = bound.unwrap_or_else(|| default_bound(f, g));
    let bad = place.ell * f.level().lcm(&g.level());
    good_primes(b, bad)
        .into_iter()
        .map(|q| Ok((q, place.valuation_of_difference(&f.eigenvalue(q)?, &g.eigenvalue(q)?, q)?)))
        .collect()
}

/// The largest n with a_q ≡ b_q mod λⁿ for all primes q ≤ B, q ∤ ℓ·N_f·N_g;
/// B defaults to the Sturm bound at lcm(N_f, N_g).
pub fn congruence_exponent(
    f: &dyn Eigenform,
    g: &dyn Eigenform,
    place: &CongruencePlace,
    bound: Option<u64>,
) -> Result<Valuation> {
    let b = bound.unwrap_or_else(|| default_bound(f, g));
    let bad = place.ell * f.level().lcm(&g.level());
    let mut cur = Valuation::Infinite;
    for q in good_primes(b, bad) {
        let (a, bq) = (f.eigenvalue(q)?, g.eigenvalue(q)?);
        match cur {
            Valuation::Finite(0) => break,
            Valuation::Finite(c) => {
                let d = place.difference(&a, &bq)?;
                let v = place.lam.valuation_capped(&d, c);
                if v < c {
                    cur = Valuation::Finite(v);
                }
            }
            Valuation::Infinite => cur = place.valuation_of_difference(&a, &bq, q)?,
        }
    }
    Ok(cur)
}

/// Odd primes ℓ ∤ N_f dividing every Norm(a_q − b_q), q ≤ B, q ∤ N_f·N_g,
/// each with the largest congruence exponent over its places (only those
/// with exponent ≥ 1 are kept).
pub fn congruence_primes(f: &dyn Eigenform, g: &dyn Eigenform, bound: Option<u64>) -> Result<Vec<(u64, Valuation)>> {
    let b = bound.unwrap_or_else(|| default_bound(f, g));
    let bad = f.level().lcm(&g.level());
    let mut gcd = BigInt::zero();
    for q in good_primes(b, bad) {
        let (a, bq) = (f.eigenvalue(q)?, g.eigenvalue(q)?);
        let norm = a.charpoly().resultant(&bq.charpoly());
        if !norm.is_zero() {
            gcd = gcd.gcd(&norm.numer().abs());
            if gcd == BigInt::from(1) {
                break;
            }
        }
    }
    if gcd.is_zero() {
        return Err(Error::Precondition("all eigenvalue-difference norms vanish: the classes coincide".into()));
    }
    let fac = factor_biguint(&gcd.to_biguint().unwrap());
    if !fac.unfactored.is_empty() {
        log::warn!("could not fully factor norm gcd; unfactored parts {:?} skipped", fac.unfactored);
    }
    let mut out = Vec::new();
    for p in fac.factors.keys() {
        let ell = match u64::try_from(p.clone()) {
            Ok(l) if l < (1u64 << 62) => l,
            _ => {
                log::warn!("candidate congruence prime {p} exceeds the supported range");
                continue;
            }
        };
        if ell == 2 || f.level().is_multiple_of(ell) {
            continue;
        }
        let mut best: Option<Valuation> = None;
        for place in make_place(f, g, ell)? {
            let v = congruence_exponent(f, g, &place, Some(b))?;
            best = Some(best.map_or(v, |x| x.max(v)));
        }
        if let Some(v) = best.filter(|v| *v >= Valuation::Finite(1)) {
            out.push((ell, v));
        }
    }
    Ok(out)
}
