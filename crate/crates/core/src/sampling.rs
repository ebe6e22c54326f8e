//! Seeded random elements for the property suites.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use crate::cyclotomic::{totient, CycNum};
use crate::error::Result;
use crate::galgebra::{Atom, Element, GenId, Monomial, Signature, Word};
use crate::tensor::{TensorContext, TensorElement};

/// Shape of generated elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleShape {
    /// Maximum number of atoms in a word.
    pub max_len: usize,
    /// Maximum total polynomial degree of a word.
    pub max_degree: u32,
    /// Maximum number of terms in an element.
    pub max_terms: usize,
    /// Coefficients in the power basis are drawn from `-bound..=bound`.
    pub coeff_bound: i64,
}

impl Default for SampleShape {
    fn default() -> Self {
        SampleShape {
            max_len: 6,
            max_degree: 5,
            max_terms: 3,
            coeff_bound: 2,
        }
    }
}

/// Nonzero scalar with small integer coordinates.
pub fn random_scalar<R: Rng>(rng: &mut R, modulus: u32, bound: i64) -> CycNum {
    let len = totient(modulus);
    loop {
        let coeffs = (0..len)
            .map(|_| BigRational::from_integer(BigInt::from(rng.gen_range(-bound..=bound))))
            .collect();
        let c = CycNum::new(modulus, coeffs).expect("modulus checked by caller");
        if !c.is_zero() {
            return c;
        }
    }
}

/// A random word over `sig`; variables appear as function blocks.
pub fn random_word<R: Rng>(rng: &mut R, sig: &Signature, shape: &SampleShape) -> Word {
    let vars: Vec<GenId> = sig.variables().collect();
    let others: Vec<GenId> = (0..sig.len()).filter(|g| !sig.get(*g).is_variable()).collect();
    let len = rng.gen_range(0..=shape.max_len);
    let mut degree = 0u32;
    let mut atoms = Vec::with_capacity(len);
    for _ in 0..len {
        let want_func = !vars.is_empty() && (others.is_empty() || rng.gen_bool(0.4));
        if want_func && degree < shape.max_degree {
            let v = vars[rng.gen_range(0..vars.len())];
            let e = rng.gen_range(1..=(shape.max_degree - degree).min(2));
            degree += e;
            atoms.push(Atom::Func(Monomial::from_pairs([(v, e)])));
        } else if !others.is_empty() {
            atoms.push(Atom::Gen(others[rng.gen_range(0..others.len())]));
        }
    }
    Word::new(atoms).merged()
}

pub fn random_element<R: Rng>(rng: &mut R, sig: &Signature, modulus: u32, shape: &SampleShape) -> Element {
    let terms = rng.gen_range(1..=shape.max_terms);
    let mut e = Element::zero(modulus);
    for _ in 0..terms {
        let w = random_word(rng, sig, shape);
        e.add_term(w, random_scalar(rng, modulus, shape.coeff_bound));
    }
    e
}

/// Random element whose words all have the same grade.
pub fn random_homogeneous<R: Rng>(rng: &mut R, sig: &Signature, modulus: u32, shape: &SampleShape) -> Element {
    let first = random_word(rng, sig, shape);
    let grade = first.grade(sig);
    let mut e = Element::term(first, random_scalar(rng, modulus, shape.coeff_bound));
    let extra = rng.gen_range(0..shape.max_terms);
    for _ in 0..extra {
        // a few tries are enough; giving up just yields fewer terms
        for _ in 0..16 {
            let w = random_word(rng, sig, shape);
            if w.grade(sig) == grade {
                e.add_term(w, random_scalar(rng, modulus, shape.coeff_bound));
                break;
            }
        }
    }
    e
}

pub fn random_elements<R: Rng>(rng: &mut R, sig: &Signature, modulus: u32, shape: &SampleShape, count: usize) -> Vec<Element> {
    (0..count).map(|_| random_element(rng, sig, modulus, shape)).collect()
}

pub fn random_pairs<R: Rng>(
    rng: &mut R,
    sig: &Signature,
    modulus: u32,
    shape: &SampleShape,
    count: usize,
) -> Vec<(Element, Element)> {
    (0..count)
        .map(|_| {
            let a = random_homogeneous(rng, sig, modulus, shape);
            let b = random_homogeneous(rng, sig, modulus, shape);
            (a, b)
        })
        .collect()
}

/// Random element of `A ⊗_q B`: a sum of pure tensors of random words.
pub fn random_tensor_element<R: Rng>(rng: &mut R, ctx: &TensorContext, shape: &SampleShape) -> Result<TensorElement> {
    let n = ctx.modulus();
    let mut u = ctx.zero();
    for _ in 0..rng.gen_range(1..=shape.max_terms) {
        let a = Element::word(random_word(rng, ctx.left().signature(), shape), n);
        let b = Element::word(random_word(rng, ctx.right().signature(), shape), n);
        let c = random_scalar(rng, n, shape.coeff_bound);
        u = u.add(&ctx.pure(&a, &b)?.scale(&c))?;
    }
    Ok(u)
}

pub fn random_tensor_pairs<R: Rng>(
    rng: &mut R,
    ctx: &TensorContext,
    shape: &SampleShape,
    count: usize,
) -> Result<Vec<(TensorElement, TensorElement)>> {
    (0..count)
        .map(|_| Ok((random_tensor_element(rng, ctx, shape)?, random_tensor_element(rng, ctx, shape)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galgebra::Generator;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sig() -> Signature {
        Signature::new(vec![
            Generator::variable("x"),
            Generator::form("dx", 1),
            Generator::form("d2x", 2),
        ])
        .unwrap()
    }

    #[test]
    fn respects_shape() {
        let sig = sig();
        let shape = SampleShape::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let w = random_word(&mut rng, &sig, &shape);
            assert!(w.len() <= shape.max_len);
            let deg: u32 = w
                .atoms()
                .iter()
                .map(|a| match a {
                    Atom::Func(m) => m.degree(),
                    Atom::Gen(_) => 0,
                })
                .sum();
            assert!(deg <= shape.max_degree);
            let h = random_homogeneous(&mut rng, &sig, 3, &shape);
            assert!(h.is_zero() || h.homogeneous_grade(&sig).is_some());
        }
    }

    #[test]
    fn seeded_streams_repeat() {
        let sig = sig();
        let shape = SampleShape::default();
        let a = random_elements(&mut ChaCha8Rng::seed_from_u64(1), &sig, 3, &shape, 20);
        let b = random_elements(&mut ChaCha8Rng::seed_from_u64(1), &sig, 3, &shape, 20);
        assert_eq!(a, b);
    }
}
