//! Anyonic (q-braided) tensor product of graded algebras.
//!
//! `(a1 ⊗ b1)(a2 ⊗ b2) = q^(|b1||a2|) (a1 a2 ⊗ b1 b2)`. With `q = -1` this is
//! the classical graded tensor product of differential algebras.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::cyclotomic::{CycNum, RootExponent};
use crate::differential::DifferentialStructure;
use crate::error::{Error, Result};
use crate::galgebra::{add_into_map, Element, Word};

/// Identifies the factor algebras and braiding an element belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ContextTag {
    left: usize,
    right: usize,
    braiding: RootExponent,
}

/// `A ⊗_q B` for two factor calculi.
#[derive(Clone)]
pub struct TensorContext {
    left: Arc<DifferentialStructure>,
    right: Arc<DifferentialStructure>,
    braiding: RootExponent,
}

#[derive(Clone, PartialEq, Eq)]
pub struct TensorElement {
    tag: ContextTag,
    terms: BTreeMap<(Word, Word), CycNum>,
}

impl fmt::Debug for TensorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

impl TensorElement {
    pub fn tag(&self) -> ContextTag {
        self.tag
    }

    pub fn braiding(&self) -> RootExponent {
        self.tag.braiding
    }

    pub fn terms(&self) -> &BTreeMap<(Word, Word), CycNum> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, a: &Word, b: &Word) -> CycNum {
        self.terms
            .get(&(a.clone(), b.clone()))
            .cloned()
            .unwrap_or_else(|| CycNum::zero(self.tag.braiding.modulus()))
    }

    fn add_term(&mut self, a: Word, b: Word, c: CycNum) {
        add_into_map(&mut self.terms, (a, b), c);
    }

    pub fn add(&self, other: &TensorElement) -> Result<TensorElement> {
        if self.tag != other.tag {
            return Err(Error::ContextMismatch);
        }
        let mut out = self.clone();
        for ((a, b), c) in &other.terms {
            out.add_term(a.clone(), b.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &TensorElement) -> Result<TensorElement> {
        self.add(&other.scale(&-CycNum::one(self.tag.braiding.modulus())))
    }

    pub fn scale(&self, c: &CycNum) -> TensorElement {
        let mut out = TensorElement {
            tag: self.tag,
            terms: BTreeMap::new(),
        };
        for ((a, b), x) in &self.terms {
            out.add_term(a.clone(), b.clone(), x * c);
        }
        out
    }
}

impl TensorContext {
    pub fn new(
        left: Arc<DifferentialStructure>,
        right: Arc<DifferentialStructure>,
        braiding: RootExponent,
    ) -> Result<Self> {
        for ds in [&left, &right] {
            if ds.modulus() != braiding.modulus() {
                return Err(Error::ModulusMismatch {
                    left: braiding.modulus(),
                    right: ds.modulus(),
                });
            }
        }
        Ok(TensorContext {
            left,
            right,
            braiding,
        })
    }

    pub fn tag(&self) -> ContextTag {
        ContextTag {
            left: Arc::as_ptr(&self.left) as usize,
            right: Arc::as_ptr(&self.right) as usize,
            braiding: self.braiding,
        }
    }

    pub fn braiding(&self) -> RootExponent {
        self.braiding
    }

    pub fn modulus(&self) -> u32 {
        self.braiding.modulus()
    }

    pub fn left(&self) -> &Arc<DifferentialStructure> {
        &self.left
    }

    pub fn right(&self) -> &Arc<DifferentialStructure> {
        &self.right
    }

    /// `B ⊗_qbar A` over the same factor objects.
    pub fn flipped(&self) -> TensorContext {
        TensorContext {
            left: self.right.clone(),
            right: self.left.clone(),
            braiding: self.braiding.conj(),
        }
    }

    fn check(&self, u: &TensorElement) -> Result<()> {
        if u.tag == self.tag() {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    pub fn zero(&self) -> TensorElement {
        TensorElement {
            tag: self.tag(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(&self) -> TensorElement {
        let mut u = self.zero();
        u.add_term(Word::empty(), Word::empty(), CycNum::one(self.modulus()));
        u
    }

    /// `a ⊗ b`, each factor normalized in its own calculus.
    pub fn pure(&self, a: &Element, b: &Element) -> Result<TensorElement> {
        let a = self.left.normalize(a)?;
        let b = self.right.normalize(b)?;
        let mut u = self.zero();
        for (wa, ca) in a.terms() {
            for (wb, cb) in b.terms() {
                u.add_term(wa.clone(), wb.clone(), ca * cb);
            }
        }
        Ok(u)
    }

    pub fn embed_left(&self, a: &Element) -> Result<TensorElement> {
        self.pure(a, &Element::one(self.modulus()))
    }

    pub fn embed_right(&self, b: &Element) -> Result<TensorElement> {
        self.pure(&Element::one(self.modulus()), b)
    }

    /// Grade of a pair of factor words.
    pub fn pair_grade(&self, a: &Word, b: &Word) -> u32 {
        self.left_grade(a) + self.right_grade(b)
    }

    fn left_grade(&self, a: &Word) -> u32 {
        a.grade(self.left.signature())
    }

    fn right_grade(&self, b: &Word) -> u32 {
        b.grade(self.right.signature())
    }

    /// Homogeneous components keyed by total grade.
    pub fn grade_decompose(&self, u: &TensorElement) -> BTreeMap<u32, TensorElement> {
        let mut out: BTreeMap<u32, TensorElement> = BTreeMap::new();
        for ((a, b), c) in &u.terms {
            out.entry(self.pair_grade(a, b))
                .or_insert_with(|| self.zero())
                .add_term(a.clone(), b.clone(), c.clone());
        }
        out
    }

    /// Braided product, phases from the homogeneous grades of each term.
    pub fn mul(&self, u: &TensorElement, v: &TensorElement) -> Result<TensorElement> {
        self.check(u)?;
        self.check(v)?;
        let n = self.modulus();
        let mut out = self.zero();
        for ((a1, b1), c1) in &u.terms {
            for ((a2, b2), c2) in &v.terms {
                let exp = self.right_grade(b1) as i64 * self.left_grade(a2) as i64;
                let coeff = &(c1 * c2) * &self.braiding.pow_cyc(exp);
                let a = self.left.normalize(&Element::word(a1.concat(a2), n))?;
                let b = self.right.normalize(&Element::word(b1.concat(b2), n))?;
                for (wa, ca) in a.terms() {
                    for (wb, cb) in b.terms() {
                        out.add_term(wa.clone(), wb.clone(), &(&coeff * ca) * cb);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `a ⊗_q b -> q^(-|a||b|) b ⊗_qbar a`, landing in [`TensorContext::flipped`].
    pub fn flip_iso(&self, u: &TensorElement) -> Result<TensorElement> {
        self.check(u)?;
        let target = self.flipped();
        let mut out = target.zero();
        for ((a, b), c) in &u.terms {
            let exp = self.left_grade(a) as i64 * self.right_grade(b) as i64;
            out.add_term(b.clone(), a.clone(), c * &self.braiding.pow_cyc(-exp));
        }
        Ok(out)
    }

    /// `d(a ⊗ b) = da ⊗ b + s^|a| a ⊗ db`.
    pub fn candidate_d(&self, s: RootExponent, u: &TensorElement) -> Result<TensorElement> {
        self.check(u)?;
        if s.modulus() != self.modulus() {
            return Err(Error::ModulusMismatch {
                left: self.modulus(),
                right: s.modulus(),
            });
        }
        let n = self.modulus();
        let mut out = self.zero();
        for ((a, b), c) in &u.terms {
            let ea = Element::word(a.clone(), n);
            let eb = Element::word(b.clone(), n);
            let first = self.pure(&self.left.apply_d(&ea)?, &eb)?;
            let phase = s.pow_cyc(self.left_grade(a) as i64);
            let second = self.pure(&ea, &self.right.apply_d(&eb)?)?.scale(&(c * &phase));
            out = out.add(&first.scale(c))?.add(&second)?;
        }
        Ok(out)
    }

    /// `d(u) v + p^|u| u d(v)` for the candidate differential with phase `s`.
    pub fn product_leibniz(
        &self,
        p: RootExponent,
        s: RootExponent,
        u: &TensorElement,
        v: &TensorElement,
    ) -> Result<TensorElement> {
        let mut out = self.mul(&self.candidate_d(s, u)?, v)?;
        let dv = self.candidate_d(s, v)?;
        for (grade, part) in self.grade_decompose(u) {
            let t = self.mul(&part, &dv)?.scale(&p.pow_cyc(grade as i64));
            out = out.add(&t)?;
        }
        Ok(out)
    }
}

/// Outcome of checking that the flip is an isomorphism.
#[derive(Clone, Debug, Default)]
pub struct FlipReport {
    pub checked: usize,
    /// Pairs with `phi(u v) != phi(u) phi(v)`.
    pub homomorphism_failures: Vec<(TensorElement, TensorElement)>,
    /// Elements with `phi_qbar(phi_q(u)) != u`.
    pub inverse_failures: Vec<TensorElement>,
}

impl FlipReport {
    pub fn passed(&self) -> bool {
        self.homomorphism_failures.is_empty() && self.inverse_failures.is_empty()
    }
}

impl TensorContext {
    /// Checks multiplicativity of [`TensorContext::flip_iso`] on every pair
    /// and that flipping back is the identity.
    pub fn check_flip(&self, pairs: &[(TensorElement, TensorElement)]) -> Result<FlipReport> {
        let back = self.flipped();
        let mut report = FlipReport::default();
        for (u, v) in pairs {
            let lhs = self.flip_iso(&self.mul(u, v)?)?;
            let rhs = back.mul(&self.flip_iso(u)?, &self.flip_iso(v)?)?;
            if lhs != rhs {
                report.homomorphism_failures.push((u.clone(), v.clone()));
            }
            for w in [u, v] {
                if back.flip_iso(&self.flip_iso(w)?)? != *w {
                    report.inverse_failures.push(w.clone());
                }
            }
            report.checked += 1;
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculi::{derham_line_on, line_calculus_on, Truncation};
    use crate::galgebra::{GenId, Signature};

    fn setup(k: i64) -> (TensorContext, Arc<Signature>, Arc<Signature>) {
        let j = RootExponent::new(3, 1).unwrap();
        let a = Arc::new(line_calculus_on(j, "x", Truncation::None).unwrap().differential().clone());
        let b = Arc::new(line_calculus_on(j, "y", Truncation::None).unwrap().differential().clone());
        let (sa, sb) = (a.signature().clone(), b.signature().clone());
        let ctx = TensorContext::new(a, b, RootExponent::new(3, k).unwrap()).unwrap();
        (ctx, sa, sb)
    }

    fn w(sig: &Signature, names: &[&str], n: u32) -> Element {
        let ids: Vec<GenId> = names.iter().map(|s| sig.lookup(s).unwrap()).collect();
        Element::word(Word::from_gens(sig, &ids), n)
    }

    #[test]
    fn braided_products() {
        let (ctx, sa, sb) = setup(1);
        let x1 = ctx.embed_left(&w(&sa, &["x"], 3)).unwrap();
        let d2y = ctx.embed_right(&w(&sb, &["d2y"], 3)).unwrap();
        assert_eq!(ctx.mul(&x1, &d2y).unwrap(), ctx.pure(&w(&sa, &["x"], 3), &w(&sb, &["d2y"], 3)).unwrap());
        let dy = ctx.embed_right(&w(&sb, &["dy"], 3)).unwrap();
        let dx = ctx.embed_left(&w(&sa, &["dx"], 3)).unwrap();
        let want = ctx
            .pure(&w(&sa, &["dx"], 3), &w(&sb, &["dy"], 3))
            .unwrap()
            .scale(&ctx.braiding().to_cyc());
        assert_eq!(ctx.mul(&dy, &dx).unwrap(), want);
        // embed_right(y) embed_left(x) = x ⊗ y
        let y = ctx.embed_right(&w(&sb, &["y"], 3)).unwrap();
        let x = ctx.embed_left(&w(&sa, &["x"], 3)).unwrap();
        assert_eq!(ctx.mul(&y, &x).unwrap(), ctx.pure(&w(&sa, &["x"], 3), &w(&sb, &["y"], 3)).unwrap());
        let dxdx = ctx.embed_left(&w(&sa, &["dx", "dx"], 3)).unwrap();
        assert_eq!(ctx.mul(&dx, &dx).unwrap(), dxdx);
    }

    #[test]
    fn classical_sign_rule() {
        let a = Arc::new(derham_line_on("x").unwrap().differential().clone());
        let b = Arc::new(derham_line_on("y").unwrap().differential().clone());
        let (sa, sb) = (a.signature().clone(), b.signature().clone());
        let ctx = TensorContext::new(a, b, RootExponent::new(2, 1).unwrap()).unwrap();
        let dy = ctx.embed_right(&w(&sb, &["dy"], 2)).unwrap();
        let dx = ctx.embed_left(&w(&sa, &["dx"], 2)).unwrap();
        let prod = ctx.mul(&dy, &dx).unwrap();
        let plain = ctx.pure(&w(&sa, &["dx"], 2), &w(&sb, &["dy"], 2)).unwrap();
        assert_eq!(prod, plain.scale(&CycNum::from_integer(2, -1)));
    }

    #[test]
    fn flip_examples() {
        let (ctx, sa, sb) = setup(1);
        let u = ctx.pure(&w(&sa, &["dx"], 3), &w(&sb, &["dy"], 3)).unwrap();
        let flipped = ctx.flip_iso(&u).unwrap();
        let target = ctx.flipped();
        assert_eq!(target.braiding(), RootExponent::new(3, 2).unwrap());
        let want = target
            .pure(&w(&sb, &["dy"], 3), &w(&sa, &["dx"], 3))
            .unwrap()
            .scale(&RootExponent::new(3, 2).unwrap().to_cyc());
        assert_eq!(flipped, want);
        let x = ctx.embed_left(&w(&sa, &["x"], 3)).unwrap();
        assert_eq!(ctx.flip_iso(&x).unwrap(), target.embed_right(&w(&sa, &["x"], 3)).unwrap());
        // homomorphism on (dx ⊗ 1, 1 ⊗ dy)
        let l = ctx.embed_left(&w(&sa, &["dx"], 3)).unwrap();
        let r = ctx.embed_right(&w(&sb, &["dy"], 3)).unwrap();
        let lhs = ctx.flip_iso(&ctx.mul(&l, &r).unwrap()).unwrap();
        let rhs = target
            .mul(&ctx.flip_iso(&l).unwrap(), &ctx.flip_iso(&r).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(target.flip_iso(&flipped).unwrap(), u);
    }

    #[test]
    fn candidate_d_examples() {
        let (ctx, sa, sb) = setup(1);
        let s = RootExponent::new(3, 1).unwrap();
        assert!(ctx.candidate_d(s, &ctx.one()).unwrap().is_zero());
        let u = ctx.pure(&w(&sa, &["x"], 3), &w(&sb, &["y"], 3)).unwrap();
        let want = ctx
            .pure(&w(&sa, &["dx"], 3), &w(&sb, &["y"], 3))
            .unwrap()
            .add(&ctx.pure(&w(&sa, &["x"], 3), &w(&sb, &["dy"], 3)).unwrap())
            .unwrap();
        assert_eq!(ctx.candidate_d(s, &u).unwrap(), want);
        let a = w(&sa, &["x", "dx"], 3);
        let lhs = ctx.candidate_d(s, &ctx.embed_left(&a).unwrap()).unwrap();
        let rhs = ctx.embed_left(&ctx.left().apply_d(&a).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn mixed_contexts_are_rejected() {
        let (ctx, _, _) = setup(1);
        let other = ctx.flipped();
        assert_eq!(ctx.mul(&ctx.one(), &other.one()), Err(Error::ContextMismatch));
        assert!(ctx.one().add(&other.one()).is_err());
    }
}
