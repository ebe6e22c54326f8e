//! Exhaustive search for a differential on the anyonic tensor product.
//!
//! On `A ⊗_q B` we try `d(a ⊗ b) = da ⊗ b + s^|a| a ⊗ db` and ask that it obey
//! the `p`-Leibniz rule. Expanding `d((a1 ⊗ b1)(a2 ⊗ b2))` once by multiplying
//! first and once through the Leibniz rule gives two coefficient rows on the
//! four basis terms
//!
//! ```text
//! da1 a2 ⊗ b1 b2,  a1 da2 ⊗ b1 b2,  a1 a2 ⊗ db1 b2,  a1 a2 ⊗ b1 db2
//! ```
//!
//! All coefficients are computed symbolically with [`TensorContext`] on free
//! algebras of generic homogeneous symbols, never read off a table.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::cyclotomic::{CycNum, RootExponent};
use crate::differential::DifferentialStructure;
use crate::error::Result;
use crate::galgebra::{Element, Generator, GenId, RuleSet, Signature, Word};
use crate::tensor::TensorContext;

/// Grades `(|a1|, |a2|, |b1|, |b2|)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GradeProfile(pub [u32; 4]);

impl GradeProfile {
    /// All profiles with entries in `[0, bound)`, `|b2|` varying fastest.
    pub fn sweep(bound: u32) -> Vec<GradeProfile> {
        let mut out = Vec::with_capacity(bound.pow(4) as usize);
        for a1 in 0..bound {
            for a2 in 0..bound {
                for b1 in 0..bound {
                    for b2 in 0..bound {
                        out.push(GradeProfile([a1, a2, b1, b2]));
                    }
                }
            }
        }
        out
    }

    pub fn a1(self) -> u32 {
        self.0[0]
    }
    pub fn a2(self) -> u32 {
        self.0[1]
    }
    pub fn b1(self) -> u32 {
        self.0[2]
    }
    pub fn b2(self) -> u32 {
        self.0[3]
    }
}

impl fmt::Display for GradeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "({a},{b},{c},{d})")
    }
}

/// Braiding `q`, product Leibniz parameter `p` and cross phase `s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub q: RootExponent,
    pub p: RootExponent,
    pub s: RootExponent,
}

impl Triple {
    pub fn exponents(&self) -> [u32; 3] {
        [self.q.exponent(), self.p.exponent(), self.s.exponent()]
    }
}

/// Coefficients of the four basis terms in both evaluation orders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientTable {
    /// Multiply first, then apply `d`.
    pub multiply_first: [CycNum; 4],
    /// Apply `d` through the product Leibniz rule, then multiply.
    pub leibniz_first: [CycNum; 4],
}

impl CoefficientTable {
    pub fn defect(&self) -> DefectVector {
        DefectVector(std::array::from_fn(|i| {
            &self.multiply_first[i] - &self.leibniz_first[i]
        }))
    }
}

/// Per-column difference of the two rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefectVector(pub [CycNum; 4]);

impl DefectVector {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(CycNum::is_zero)
    }
}

/// Free algebra on `x1, x2` of the given grades and their differentials
/// `dx1, dx2`, with `d(dx_i) = 0`.
struct GenericFactor {
    ds: Arc<DifferentialStructure>,
    sym: [GenId; 2],
    dsym: [GenId; 2],
}

impl GenericFactor {
    fn new(prefix: &str, grades: [u32; 2], p: RootExponent) -> Result<Self> {
        let n = p.modulus();
        let sig = Arc::new(Signature::new(vec![
            Generator::generic(format!("{prefix}1"), grades[0]),
            Generator::generic(format!("{prefix}2"), grades[1]),
            Generator::generic(format!("d{prefix}1"), grades[0] + 1),
            Generator::generic(format!("d{prefix}2"), grades[1] + 1),
        ])?);
        let mut action = BTreeMap::new();
        action.insert(0, Element::generator(&sig, 2, n));
        action.insert(1, Element::generator(&sig, 3, n));
        action.insert(2, Element::zero(n));
        action.insert(3, Element::zero(n));
        let ds = DifferentialStructure::new(p, RuleSet::empty(sig, n), action)?;
        Ok(GenericFactor {
            ds: Arc::new(ds),
            sym: [0, 1],
            dsym: [2, 3],
        })
    }

    fn word(&self, ids: &[GenId]) -> Word {
        Word::from_gens(self.ds.signature(), ids)
    }
}

/// Both evaluation orders of `d((a1 ⊗ b1)(a2 ⊗ b2))` on generic symbols.
pub fn coefficient_table(q: RootExponent, p: RootExponent, s: RootExponent, g: GradeProfile) -> Result<CoefficientTable> {
    let n = q.modulus();
    let fa = GenericFactor::new("a", [g.a1(), g.a2()], p)?;
    let fb = GenericFactor::new("b", [g.b1(), g.b2()], p)?;
    let ctx = TensorContext::new(fa.ds.clone(), fb.ds.clone(), q)?;
    let gen = |f: &GenericFactor, id: GenId| Element::generator(f.ds.signature(), id, n);
    let u = ctx.pure(&gen(&fa, fa.sym[0]), &gen(&fb, fb.sym[0]))?;
    let v = ctx.pure(&gen(&fa, fa.sym[1]), &gen(&fb, fb.sym[1]))?;

    let multiply_first = ctx.candidate_d(s, &ctx.mul(&u, &v)?)?;
    let leibniz_first = ctx.product_leibniz(p, s, &u, &v)?;

    let [a1, a2] = fa.sym;
    let [da1, da2] = fa.dsym;
    let [b1, b2] = fb.sym;
    let [db1, db2] = fb.dsym;
    let basis = [
        (fa.word(&[da1, a2]), fb.word(&[b1, b2])),
        (fa.word(&[a1, da2]), fb.word(&[b1, b2])),
        (fa.word(&[a1, a2]), fb.word(&[db1, b2])),
        (fa.word(&[a1, a2]), fb.word(&[b1, db2])),
    ];
    for row in [&multiply_first, &leibniz_first] {
        debug_assert!(row.terms().keys().all(|k| basis.contains(k)));
    }
    Ok(CoefficientTable {
        multiply_first: basis.clone().map(|(a, b)| multiply_first.coefficient(&a, &b)),
        leibniz_first: basis.map(|(a, b)| leibniz_first.coefficient(&a, &b)),
    })
}

pub fn leibniz_defect(q: RootExponent, p: RootExponent, s: RootExponent, g: GradeProfile) -> Result<DefectVector> {
    Ok(coefficient_table(q, p, s, g)?.defect())
}

/// Every `(q, p, s)` with `q, s` arbitrary and `p` primitive.
pub fn candidate_triples(modulus: u32) -> Result<Vec<Triple>> {
    let all = RootExponent::all(modulus)?;
    let prim = RootExponent::all_primitive(modulus)?;
    let mut out = Vec::new();
    for &q in &all {
        for &p in &prim {
            for &s in &all {
                out.push(Triple { q, p, s });
            }
        }
    }
    Ok(out)
}

/// A rejected triple with the first profile (in sweep order) whose defect
/// does not vanish.
#[derive(Clone, Debug)]
pub struct Rejection {
    pub triple: Triple,
    pub profile: GradeProfile,
    pub defect: DefectVector,
}

#[derive(Clone, Debug)]
pub struct NogoResult {
    pub modulus: u32,
    pub grade_bound: u32,
    pub solutions: Vec<Triple>,
    pub rejections: Vec<Rejection>,
    pub notes: Vec<String>,
}

/// First profile violating the selected columns, if any.
fn first_violation(
    t: Triple,
    profiles: &[GradeProfile],
    columns: &[usize],
) -> Result<Option<(GradeProfile, DefectVector)>> {
    for &g in profiles {
        let defect = leibniz_defect(t.q, t.p, t.s, g)?;
        if columns.iter().any(|&c| !defect.0[c].is_zero()) {
            return Ok(Some((g, defect)));
        }
    }
    Ok(None)
}

/// Sweeps all triples over grade profiles in `[0, N)` (or `[0, 2N)` with
/// `extended_sweep`) and keeps the triples whose defect always vanishes.
pub fn solve_nogo(modulus: u32, extended_sweep: bool) -> Result<NogoResult> {
    let bound = if extended_sweep { 2 * modulus } else { modulus };
    let profiles = GradeProfile::sweep(bound);
    let triples = candidate_triples(modulus)?;
    let outcomes: Vec<(Triple, Option<(GradeProfile, DefectVector)>)> = triples
        .par_iter()
        .map(|&t| first_violation(t, &profiles, &[0, 1, 2, 3]).map(|v| (t, v)))
        .collect::<Result<_>>()?;
    let mut solutions = Vec::new();
    let mut rejections = Vec::new();
    for (triple, violation) in outcomes {
        match violation {
            None => solutions.push(triple),
            Some((profile, defect)) => rejections.push(Rejection {
                triple,
                profile,
                defect,
            }),
        }
    }
    solutions.sort();
    rejections.sort_by_key(|r| r.triple);
    let mut notes = vec![
        "p ranges over primitive roots: the factor embeddings force q_A = p = q_B".to_string(),
        format!(
            "grade profiles swept over [0, {bound})^4; every phase exponent is an integer polynomial in the grades, so residues mod N suffice"
        ),
    ];
    if let Some(note) = column_two_note(modulus)? {
        notes.push(note);
    }
    Ok(NogoResult {
        modulus,
        grade_bound: bound,
        solutions,
        rejections,
        notes,
    })
}

/// Triples whose defect vanishes in column `column` (0-based) for every
/// profile in `[0, N)`.
pub fn column_survivors(modulus: u32, column: usize) -> Result<Vec<Triple>> {
    let profiles = GradeProfile::sweep(modulus);
    let mut out: Vec<Triple> = candidate_triples(modulus)?
        .par_iter()
        .map(|&t| first_violation(t, &profiles, &[column]).map(|v| (t, v)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter_map(|(t, v)| v.is_none().then_some(t))
        .collect();
    out.sort();
    Ok(out)
}

/// Compares the derived second-column coefficient of the Leibniz-first row
/// with the commonly printed form `p^(|a1|+|b1|) q^(|b1|(|a1|+1))`, which
/// differs from the derived `q^(|b1|(|a2|+1))` whenever `|a1| != |a2|` and
/// the braiding is nontrivial.
pub fn column_two_note(modulus: u32) -> Result<Option<String>> {
    let q = RootExponent::primitive(modulus)?;
    let (p, s) = (q, q);
    for g in GradeProfile::sweep(modulus) {
        let derived = &coefficient_table(q, p, s, g)?.leibniz_first[1];
        let printed = &p.pow_cyc((g.a1() + g.b1()) as i64) * &q.pow_cyc((g.b1() * (g.a1() + 1)) as i64);
        if *derived != printed {
            return Ok(Some(format!(
                "column 2 of the Leibniz-first row is derived as p^(|a1|+|b1|) q^(|b1|(|a2|+1)); the form q^(|b1|(|a1|+1)) disagrees first at profile {g}; both force p = q^-1"
            )));
        }
    }
    Ok(None)
}

/// Outcome of pushing the `q`-Leibniz rule through a differential
/// homomorphism into a `p`-differential algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HomomorphismVerdict {
    /// `p = q`: the two Leibniz rules agree in every grade.
    Equal,
    /// Smallest grade `i` with `q^i != p^i`, and the nonzero difference
    /// `(q^i - p^i) w d(e)` between the two sides.
    Witness { grade: u32, residual: Element },
}

/// Applies a generic grade-preserving map commuting with `d` to the
/// `q`-Leibniz rule for `d(w e)`, `|w| = i`, and compares with the
/// `p`-Leibniz rule in the target.
pub fn homomorphism_forces_equal(modulus: u32, q: RootExponent, p: RootExponent) -> Result<HomomorphismVerdict> {
    let q = RootExponent::new(modulus, q.exponent() as i64)?.require_primitive()?;
    let p = RootExponent::new(modulus, p.exponent() as i64)?.require_primitive()?;
    for i in 0..modulus {
        let sig = Arc::new(Signature::new(vec![
            Generator::generic("w", i),
            Generator::generic("e", 0),
            Generator::generic("dw", i + 1),
            Generator::generic("de", 1),
        ])?);
        let mut action = BTreeMap::new();
        action.insert(0, Element::generator(&sig, 2, modulus));
        action.insert(1, Element::generator(&sig, 3, modulus));
        action.insert(2, Element::zero(modulus));
        action.insert(3, Element::zero(modulus));
        let rules = RuleSet::empty(sig.clone(), modulus);
        let source = DifferentialStructure::new(q, rules.clone(), action.clone())?;
        let target = DifferentialStructure::new(p, rules, action)?;
        let we = Element::word(Word::from_gens(&sig, &[0, 1]), modulus);
        // psi is the identity on generators, so psi(d_q(we)) is d_q(we) read
        // in the target
        let pushed = source.apply_d(&we)?;
        let native = target.apply_d(&we)?;
        let residual = pushed.sub(&native)?;
        if !residual.is_zero() {
            return Ok(HomomorphismVerdict::Witness { grade: i, residual });
        }
    }
    Ok(HomomorphismVerdict::Equal)
}
