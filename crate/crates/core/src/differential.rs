//! The q-Leibniz differential `d`, nilpotency and Leibniz verification, and
//! the star structure.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;

use crate::cyclotomic::{CycNum, RootExponent};
use crate::error::{Error, Result};
use crate::galgebra::{Atom, Element, GenId, Monomial, RuleSet, Signature, Word};

/// A grade-raising operator `d` with `d(ab) = d(a) b + q^|a| a d(b)`.
#[derive(Clone, Debug)]
pub struct DifferentialStructure {
    q: RootExponent,
    action: Vec<Element>,
    rules: RuleSet,
}

impl DifferentialStructure {
    /// `action` must give `d` on every generator of the rule set's signature.
    pub fn new(q: RootExponent, rules: RuleSet, action: BTreeMap<GenId, Element>) -> Result<Self> {
        let q = q.require_primitive()?;
        if q.modulus() != rules.modulus() {
            return Err(Error::ModulusMismatch {
                left: q.modulus(),
                right: rules.modulus(),
            });
        }
        let sig = rules.signature().clone();
        let mut table = Vec::with_capacity(sig.len());
        for (g, gen) in sig.generators().iter().enumerate() {
            let image = action
                .get(&g)
                .cloned()
                .ok_or_else(|| Error::MissingAction(gen.name().to_string()))?;
            if image.modulus() != q.modulus() {
                return Err(Error::ModulusMismatch {
                    left: q.modulus(),
                    right: image.modulus(),
                });
            }
            for w in image.terms().keys() {
                let found = w.grade(&sig);
                if found != gen.grade() + 1 {
                    return Err(Error::BadAction {
                        name: gen.name().to_string(),
                        grade: gen.grade(),
                        found,
                    });
                }
            }
            table.push(image);
        }
        Ok(DifferentialStructure {
            q,
            action: table,
            rules,
        })
    }

    pub fn q(&self) -> RootExponent {
        self.q
    }

    pub fn modulus(&self) -> u32 {
        self.q.modulus()
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    pub fn signature(&self) -> &Arc<Signature> {
        self.rules.signature()
    }

    pub fn action(&self, g: GenId) -> &Element {
        &self.action[g]
    }

    /// Same `d`, different normalization context over the same signature.
    pub fn with_rules(&self, rules: RuleSet) -> Result<Self> {
        let action = self.action.iter().cloned().enumerate().collect();
        DifferentialStructure::new(self.q, rules, action)
    }

    pub fn normalize(&self, e: &Element) -> Result<Element> {
        self.rules.normalize(e)
    }

    /// `d` of a function block: `sum_v d(v) * df/dv`.
    fn d_function(&self, m: &Monomial) -> Element {
        let mut out = Element::zero(self.modulus());
        for &(v, _) in m.pairs() {
            let (e, rest) = m.partial(v).expect("v occurs in m");
            let tail = Word::new(vec![Atom::Func(rest)]).merged();
            let scale = CycNum::from_rational(self.modulus(), BigRational::from_integer(e.into()));
            for (w, c) in self.action[v].terms() {
                out.add_term(w.concat(&tail), c * &scale);
            }
        }
        out
    }

    fn d_atom(&self, a: &Atom) -> Element {
        match a {
            Atom::Gen(g) => self.action[*g].clone(),
            Atom::Func(m) => self.d_function(m),
        }
    }

    /// The Leibniz expansion over the atoms of every word, without any
    /// normalization of input or output.
    pub fn leibniz_expand(&self, e: &Element) -> Result<Element> {
        let sig = self.signature();
        let mut out = Element::zero(self.modulus());
        for (w, c) in e.terms() {
            let atoms = w.atoms();
            let mut prefix_grade = 0u32;
            for i in 0..atoms.len() {
                let prefix = Word::new(atoms[..i].to_vec());
                let suffix = Word::new(atoms[i + 1..].to_vec());
                let phase = c * &self.q.pow_cyc(prefix_grade as i64);
                for (dw, dc) in self.d_atom(&atoms[i]).terms() {
                    out.add_term(prefix.concat(dw).concat(&suffix), dc * &phase);
                }
                prefix_grade += sig.atom_grade(&atoms[i]);
            }
        }
        Ok(out)
    }

    /// `d(e)`, normalizing the input first and the result after.
    pub fn apply_d(&self, e: &Element) -> Result<Element> {
        let n = self.normalize(e)?;
        self.normalize(&self.leibniz_expand(&n)?)
    }

    pub fn apply_d_times(&self, e: &Element, times: u32) -> Result<Element> {
        let mut cur = self.normalize(e)?;
        for _ in 0..times {
            cur = self.apply_d(&cur)?;
        }
        Ok(cur)
    }

    /// Applies `d` `N` times (`N` the order of `q`) to every sample and
    /// reports nonzero results.
    pub fn verify_nilpotency(&self, samples: &[Element]) -> Result<NilpotencyReport> {
        let order = self.q.order();
        let mut report = NilpotencyReport {
            order,
            checked: 0,
            failures: Vec::new(),
        };
        for (index, s) in samples.iter().enumerate() {
            let residual = self.apply_d_times(s, order)?;
            if !residual.is_zero() {
                report.failures.push(NilpotencyWitness {
                    index,
                    sample: s.clone(),
                    residual,
                });
            }
            report.checked += 1;
        }
        Ok(report)
    }

    /// `d(a) b + q^|a| a d(b)`, normalized; `a` is split by grade.
    pub fn leibniz_rhs(&self, a: &Element, b: &Element) -> Result<Element> {
        let sig = self.signature();
        let da = self.apply_d(a)?;
        let db = self.apply_d(b)?;
        let mut rhs = da.mul(b)?;
        for (grade, part) in a.grade_decompose(sig) {
            let twisted = part.mul(&db)?.scale(&self.q.pow_cyc(grade as i64));
            rhs = rhs.add(&twisted)?;
        }
        self.normalize(&rhs)
    }

    /// Checks `d(ab) = d(a) b + q^|a| a d(b)` exactly, with `ab` normalized
    /// before `d` is applied so that compatibility of `d` with the rules is
    /// exercised too.
    pub fn verify_leibniz(&self, pairs: &[(Element, Element)]) -> Result<LeibnizReport> {
        let mut report = LeibnizReport::default();
        for (index, (a, b)) in pairs.iter().enumerate() {
            let lhs = self.apply_d(&self.normalize(&a.mul(b)?)?)?;
            let rhs = self.leibniz_rhs(a, b)?;
            if lhs != rhs {
                report.failures.push(LeibnizWitness {
                    index,
                    a: a.clone(),
                    b: b.clone(),
                    lhs,
                    rhs,
                });
            }
            report.checked += 1;
        }
        Ok(report)
    }

    /// Antilinear, antimultiplicative extension of `table`, normalized.
    pub fn star(&self, table: &StarTable, e: &Element) -> Result<Element> {
        let sig = self.signature();
        let n = self.modulus();
        let image = |g: GenId| -> Result<&Element> {
            table
                .0
                .get(&g)
                .ok_or_else(|| Error::MissingStar(sig.get(g).name().to_string()))
        };
        let mut out = Element::zero(n);
        for (w, c) in e.terms() {
            let mut acc = Element::scalar(c.conj());
            for a in w.atoms().iter().rev() {
                let factor = match a {
                    Atom::Gen(g) => image(*g)?.clone(),
                    Atom::Func(m) => {
                        let mut f = Element::one(n);
                        for &(v, k) in m.pairs() {
                            for _ in 0..k {
                                f = f.mul(image(v)?)?;
                            }
                        }
                        f
                    }
                };
                acc = acc.mul(&factor)?;
            }
            out = out.add(&acc)?;
        }
        self.normalize(&out)
    }

    /// Checks `(d w)* = q^(-|w|) d(w*)` on a homogeneous element.
    pub fn star_rule_holds(&self, table: &StarTable, e: &Element) -> Result<bool> {
        let sig = self.signature();
        let mut ok = true;
        for (grade, part) in e.grade_decompose(sig) {
            let lhs = self.star(table, &self.apply_d(&part)?)?;
            let rhs = self
                .apply_d(&self.star(table, &part)?)?
                .scale(&self.q.pow_cyc(-(grade as i64)));
            ok &= lhs == rhs;
        }
        Ok(ok)
    }
}

pub fn apply_d(ds: &DifferentialStructure, e: &Element) -> Result<Element> {
    ds.apply_d(e)
}

pub fn verify_nilpotency(ds: &DifferentialStructure, samples: &[Element]) -> Result<NilpotencyReport> {
    ds.verify_nilpotency(samples)
}

pub fn verify_leibniz(ds: &DifferentialStructure, pairs: &[(Element, Element)]) -> Result<LeibnizReport> {
    ds.verify_leibniz(pairs)
}

pub fn star(ds: &DifferentialStructure, table: &StarTable, e: &Element) -> Result<Element> {
    ds.star(table, e)
}

/// Star images of the generators.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StarTable(pub BTreeMap<GenId, Element>);

impl StarTable {
    pub fn new(entries: impl IntoIterator<Item = (GenId, Element)>) -> Self {
        StarTable(entries.into_iter().collect())
    }

    pub fn get(&self, g: GenId) -> Option<&Element> {
        self.0.get(&g)
    }
}

#[derive(Clone, Debug)]
pub struct NilpotencyWitness {
    pub index: usize,
    pub sample: Element,
    pub residual: Element,
}

#[derive(Clone, Debug)]
pub struct NilpotencyReport {
    pub order: u32,
    pub checked: usize,
    pub failures: Vec<NilpotencyWitness>,
}

impl NilpotencyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct LeibnizWitness {
    pub index: usize,
    pub a: Element,
    pub b: Element,
    pub lhs: Element,
    pub rhs: Element,
}

#[derive(Clone, Debug, Default)]
pub struct LeibnizReport {
    pub checked: usize,
    pub failures: Vec<LeibnizWitness>,
}

impl LeibnizReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}
