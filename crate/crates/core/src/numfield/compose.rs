//! Composite fields with explicit embeddings.

use std::sync::Arc;

use num_traits::{Signed, Zero};

use super::field::{FieldElement, NumberField};
use crate::error::{Error, Result};
use crate::linalg::{MatQ, Q};
use crate::poly::PolyQ;

/// A field homomorphism F → K given by the image of the generator of F.
#[derive(Clone, Debug)]
pub struct FieldEmbedding {
    source: Arc<NumberField>,
    target: Arc<NumberField>,
    image: FieldElement,
}

impl FieldEmbedding {
    /// Checks that the image is a root of the minimal polynomial of F.
    pub fn new(source: &Arc<NumberField>, image: FieldElement) -> Result<Self> {
        let target = image.field().clone();
        let e = FieldEmbedding { source: source.clone(), target, image };
        let val = e.eval_poly(source.min_poly());
        if !val.is_zero() {
            return Err(Error::Computation("embedding image is not a root of the source polynomial".into()));
        }
        Ok(e)
    }

    pub fn identity(field: &Arc<NumberField>) -> Self {
        FieldEmbedding { source: field.clone(), target: field.clone(), image: FieldElement::generator(field) }
    }

    pub fn source(&self) -> &Arc<NumberField> {
        &self.source
    }

    pub fn target(&self) -> &Arc<NumberField> {
        &self.target
    }

    /// Image of the generator of the source field.
    pub fn image(&self) -> &FieldElement {
        &self.image
    }

    fn eval_poly(&self, p: &PolyQ) -> FieldElement {
        let mut acc = FieldElement::zero(&self.target);
        for c in p.coeffs().iter().rev() {
            acc = &(&acc * &self.image) + &FieldElement::from_rational(&self.target, c.clone());
        }
        acc
    }

    pub fn apply(&self, x: &FieldElement) -> FieldElement {
        assert!(x.field() == &self.source, "element is not in the source field");
        self.eval_poly(&x.to_poly())
    }
}

/// The composite of two fields: θ_K = θ_A + c·θ_B (c = 0 when one side is ℚ).
#[derive(Clone, Debug)]
pub struct Composite {
    pub field: Arc<NumberField>,
    pub embed_a: FieldEmbedding,
    pub embed_b: FieldEmbedding,
    pub c: u64,
}

fn rational_image(src: &Arc<NumberField>, target: &Arc<NumberField>) -> Result<FieldEmbedding> {
    let root = -src.min_poly().coeff(0);
    FieldEmbedding::new(src, FieldElement::from_rational(target, root))
}

fn kron(a: &MatQ, b: &MatQ) -> MatQ {
    let (ra, ca, rb, cb) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut m = MatQ::zero(ra * rb, ca * cb);
    for i in 0..ra {
        for j in 0..ca {
            let x = a.get(i, j);
            if x.is_zero() {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    let y = b.get(k, l);
                    if !y.is_zero() {
                        m.set(i * rb + k, j * cb + l, x * y);
                    }
                }
            }
        }
    }
    m
}

/// Composite field of A and B with embeddings of both.
///
/// Works inside A ⊗ B: the charpoly of θ_A⊗1 + c·1⊗θ_B is the resultant
/// Res_y(A(x − cy), B(y)); the smallest c making it squarefree is used, and
/// the factor of largest degree (smallest height on ties) defines K.
pub fn compose_fields(a: &Arc<NumberField>, b: &Arc<NumberField>) -> Result<Composite> {
    Ok(tensor_components(a, b)?.swap_remove(0))
}

/// Every field factor of A ⊗_ℚ B, each with its embeddings of A and B,
/// ordered by decreasing degree and then increasing height.
pub fn tensor_components(a: &Arc<NumberField>, b: &Arc<NumberField>) -> Result<Vec<Composite>> {
    if a.degree() == 1 {
        return Ok(vec![Composite {
            field: b.clone(),
            embed_a: rational_image(a, b)?,
            embed_b: FieldEmbedding::identity(b),
            c: 0,
        }]);
    }
    if b.degree() == 1 {
        return Ok(vec![Composite {
            field: a.clone(),
            embed_a: FieldEmbedding::identity(a),
            embed_b: rational_image(b, a)?,
            c: 0,
        }]);
    }
    let (da, db) = (a.degree(), b.degree());
    let ma = FieldElement::generator(a).mult_matrix();
    let mb = FieldElement::generator(b).mult_matrix();
    let left = kron(&ma, &MatQ::identity(db));
    let right = kron(&MatQ::identity(da), &mb);
    for c in 1u64.. {
        let gamma = left.add(&right.scale(&Q::from_integer(c.into())));
        let r = gamma.charpoly()?;
        if r.gcd(&r.derivative()).degree() != Some(0) {
            continue;
        }
        let mut fac = r.factor()?;
        fac.sort_by(|(p, _), (q, _)| {
            let h = |x: &PolyQ| x.coeffs().iter().map(|c| c.abs()).max().unwrap();
            q.degree().cmp(&p.degree()).then_with(|| h(p).cmp(&h(q))).then_with(|| p.coeffs().cmp(q.coeffs()))
        });
        let mut out = Vec::with_capacity(fac.len());
        for (h, _) in fac {
            let h = h.monic();
            let k = Arc::new(NumberField::new_unchecked(&h)?);
            let d = k.degree();
            // a nonzero element of the component cut out by h, and its Krylov basis
            let z = gamma
                .eval_poly(&h)
                .left_kernel()
                .into_iter()
                .next()
                .ok_or_else(|| Error::Computation("empty component in tensor product".into()))?;
            let mut kry = Vec::with_capacity(d);
            let mut cur = z.clone();
            for _ in 0..d {
                let next = gamma.vec_mul(&cur);
                kry.push(std::mem::replace(&mut cur, next));
            }
            let kry = MatQ::from_rows(kry);
            let image = |m: &MatQ| -> Result<FieldElement> {
                let w = m.vec_mul(&z);
                let coords = kry
                    .solve_left(&w)
                    .ok_or_else(|| Error::Computation("component is not cyclic".into()))?;
                Ok(FieldElement::new(&k, coords))
            };
            let embed_a = FieldEmbedding::new(a, image(&left)?)?;
            let embed_b = FieldEmbedding::new(b, image(&right)?)?;
            out.push(Composite { field: k, embed_a, embed_b, c });
        }
        return Ok(out);
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numfield::make_field;

    fn field(c: &[i64]) -> Arc<NumberField> {
        make_field(&PolyQ::from_ints(c)).unwrap()
    }

    fn check(comp: &Composite, a: &Arc<NumberField>, b: &Arc<NumberField>) {
        let ia = comp.embed_a.apply(&FieldElement::generator(a));
        let ib = comp.embed_b.apply(&FieldElement::generator(b));
        if comp.c > 0 {
            let sum = &ia + &(&ib * &FieldElement::from_int(&comp.field, comp.c as i64));
            assert_eq!(sum, FieldElement::generator(&comp.field));
        }
    }

    #[test]
    fn sqrt2_sqrt3() {
        let (a, b) = (field(&[-2, 0, 1]), field(&[-3, 0, 1]));
        let comp = compose_fields(&a, &b).unwrap();
        assert_eq!(comp.field.min_poly(), &PolyQ::from_ints(&[1, 0, -10, 0, 1]));
        assert_eq!(comp.c, 1);
        check(&comp, &a, &b);
    }

    #[test]
    fn same_field_twice() {
        let a = field(&[-2, 0, 1]);
        let comp = compose_fields(&a, &a).unwrap();
        assert_eq!(comp.field.degree(), 2);
        check(&comp, &a, &a);
    }

    #[test]
    fn rationals_with_field() {
        let q = Arc::new(NumberField::rationals());
        let b = field(&[-1, -1, 1]);
        let comp = compose_fields(&q, &b).unwrap();
        assert_eq!(comp.field, b);
        assert_eq!(comp.embed_b.image(), &FieldElement::generator(&b));
    }

    #[test]
    fn cubic_pair() {
        // ℚ(∛2) with itself: the tensor product splits as degree 3 + 6
        let a = field(&[-2, 0, 0, 1]);
        let comp = compose_fields(&a, &a).unwrap();
        assert_eq!(comp.field.degree(), 6);
        check(&comp, &a, &a);
        assert_eq!(tensor_components(&a, &a).unwrap().iter().map(|c| c.field.degree()).collect::<Vec<_>>(), vec![6, 3]);
        let b = field(&[1, 1, 1]);
        let comp = compose_fields(&a, &b).unwrap();
        assert_eq!(comp.field.degree(), 6);
        check(&comp, &a, &b);
    }
}
