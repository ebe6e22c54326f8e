//! Free Z-graded associative algebra over `Q(z_N)` with commuting
//! coefficient variables, and the rewrite engine that brings elements to
//! normal form.
//!
//! A [`Word`] is a sequence of [`Atom`]s. Form and generic generators are
//! noncommuting atoms; runs of variables collapse into a single function block
//! holding a [`Monomial`]. Rewrite rules may carry one function wildcard `f`
//! whose right-hand side can mention formal derivatives of `f`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use crate::cyclotomic::CycNum;
use crate::error::{Error, Result};
use crate::render;

pub type GenId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeneratorKind {
    /// Noncommuting differential form of grade at least one (`dx`, `d2x`).
    Form,
    /// Grade-zero coordinate commuting with everything (`x`, `y`).
    Variable,
    /// Noncommuting homogeneous symbol of any grade, used for generic
    /// elements of free algebras.
    Generic,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    name: String,
    grade: u32,
    kind: GeneratorKind,
}

impl Generator {
    pub fn form(name: impl Into<String>, grade: u32) -> Self {
        Generator {
            name: name.into(),
            grade,
            kind: GeneratorKind::Form,
        }
    }

    pub fn variable(name: impl Into<String>) -> Self {
        Generator {
            name: name.into(),
            grade: 0,
            kind: GeneratorKind::Variable,
        }
    }

    pub fn generic(name: impl Into<String>, grade: u32) -> Self {
        Generator {
            name: name.into(),
            grade,
            kind: GeneratorKind::Generic,
        }
    }

    pub fn new(name: impl Into<String>, grade: u32, kind: GeneratorKind) -> Self {
        Generator {
            name: name.into(),
            grade,
            kind,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn grade(&self) -> u32 {
        self.grade
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    pub fn is_variable(&self) -> bool {
        self.kind == GeneratorKind::Variable
    }
}

/// Formal derivative bookkeeping for jet variables: `D_coordinate(var) = next`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Jet {
    coordinate: GenId,
    next: Option<GenId>,
}

/// The generator universe of an algebra.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Signature {
    generators: Vec<Generator>,
    jets: BTreeMap<GenId, Jet>,
}

impl Signature {
    pub fn new(generators: Vec<Generator>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for g in &generators {
            let bad = |reason: &str| Error::InvalidGenerator {
                name: g.name.clone(),
                reason: reason.to_string(),
            };
            if g.name.is_empty() {
                return Err(bad("empty name"));
            }
            if !seen.insert(g.name.clone()) {
                return Err(bad("duplicate name"));
            }
            match g.kind {
                GeneratorKind::Variable if g.grade != 0 => {
                    return Err(bad("variables have grade 0"))
                }
                GeneratorKind::Form if g.grade == 0 => {
                    return Err(bad("forms have grade at least 1"))
                }
                _ => {}
            }
        }
        Ok(Signature {
            generators,
            jets: BTreeMap::new(),
        })
    }

    /// Declares `var` as a jet variable with `D_coordinate(var) = next`;
    /// `next = None` marks the top of a truncated jet tower.
    pub fn with_jet(mut self, var: GenId, coordinate: GenId, next: Option<GenId>) -> Result<Self> {
        for id in [Some(var), Some(coordinate), next].into_iter().flatten() {
            if !self.get(id).is_variable() {
                return Err(Error::InvalidGenerator {
                    name: self.get(id).name.clone(),
                    reason: "jets relate variables only".into(),
                });
            }
        }
        self.jets.insert(var, Jet { coordinate, next });
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn get(&self, id: GenId) -> &Generator {
        &self.generators[id]
    }

    pub fn id(&self, name: &str) -> Option<GenId> {
        self.generators.iter().position(|g| g.name == name)
    }

    pub fn lookup(&self, name: &str) -> Result<GenId> {
        self.id(name)
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
    }

    pub fn variables(&self) -> impl Iterator<Item = GenId> + '_ {
        (0..self.len()).filter(|&i| self.generators[i].is_variable())
    }

    /// `D_coordinate(var)` as a monomial, `None` when it vanishes.
    fn coordinate_derivative(&self, var: GenId, coordinate: GenId) -> Result<Option<Monomial>> {
        if var == coordinate {
            return Ok(Some(Monomial::one()));
        }
        match self.jets.get(&var) {
            Some(jet) if jet.coordinate == coordinate => match jet.next {
                Some(next) => Ok(Some(Monomial::var(next))),
                None => Err(Error::UntrackedDerivative(self.get(var).name.clone())),
            },
            _ => Ok(None),
        }
    }

    /// Total derivative of a monomial along `coordinate`, honouring jets.
    pub fn total_derivative(&self, m: &Monomial, coordinate: GenId) -> Result<Vec<(u64, Monomial)>> {
        let mut out: BTreeMap<Monomial, u64> = BTreeMap::new();
        for &(v, e) in m.pairs() {
            let Some(dv) = self.coordinate_derivative(v, coordinate)? else {
                continue;
            };
            let (c, rest) = m.partial(v).expect("v occurs in m");
            *out.entry(rest.mul(&dv)).or_default() += c as u64;
            debug_assert_eq!(c, e);
        }
        Ok(out.into_iter().map(|(m, c)| (c, m)).collect())
    }

    pub fn atom_grade(&self, atom: &Atom) -> u32 {
        match atom {
            Atom::Gen(g) => self.get(*g).grade,
            Atom::Func(_) => 0,
        }
    }
}

/// Product of variables with positive exponents, sorted by generator id.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(Vec<(GenId, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: GenId) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (GenId, u32)>) -> Self {
        let mut acc: BTreeMap<GenId, u32> = BTreeMap::new();
        for (v, e) in pairs {
            *acc.entry(v).or_default() += e;
        }
        Monomial(acc.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    pub fn pairs(&self) -> &[(GenId, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, v: GenId) -> u32 {
        self.0
            .iter()
            .find(|&&(w, _)| w == v)
            .map_or(0, |&(_, e)| e)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial::from_pairs(self.0.iter().chain(&other.0).copied())
    }

    /// `d/dv`, returned as `(exponent, monomial)`; `None` when `v` is absent.
    pub fn partial(&self, v: GenId) -> Option<(u32, Monomial)> {
        let e = self.exponent(v);
        (e > 0).then(|| {
            let rest = self
                .0
                .iter()
                .map(|&(w, f)| if w == v { (w, f - 1) } else { (w, f) });
            (e, Monomial::from_pairs(rest))
        })
    }
}

/// A polynomial in the commuting variables: the coefficient function `f` of
/// a form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoeffFunction {
    modulus: u32,
    terms: BTreeMap<Monomial, CycNum>,
}

impl CoeffFunction {
    pub fn zero(modulus: u32) -> Self {
        CoeffFunction {
            modulus,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: CycNum) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn term(c: CycNum, m: Monomial) -> Self {
        let mut f = Self::zero(c.modulus());
        f.add_term(m, c);
        f
    }

    pub fn add_term(&mut self, m: Monomial, c: CycNum) {
        add_into(&mut self.terms, m, c);
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, CycNum> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exact partial derivative with respect to the variable `v`.
    pub fn formal_derivative(&self, v: GenId) -> CoeffFunction {
        let mut out = CoeffFunction::zero(self.modulus);
        for (m, c) in &self.terms {
            if let Some((e, rest)) = m.partial(v) {
                out.add_term(rest, c.scale(&BigRational::from_integer(e.into())));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Gen(GenId),
    Func(Monomial),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<Atom>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(atoms: Vec<Atom>) -> Self {
        Word(atoms)
    }

    /// Word built from generator ids; variables become function blocks.
    pub fn from_gens(sig: &Signature, ids: &[GenId]) -> Self {
        Word(ids.iter().map(|&g| Atom::for_generator(sig, g)).collect())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn grade(&self, sig: &Signature) -> u32 {
        self.0.iter().map(|a| sig.atom_grade(a)).sum()
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word(self.0.iter().chain(&other.0).cloned().collect())
    }

    /// Adjacent function blocks multiplied together, unit blocks dropped.
    pub fn merged(&self) -> Word {
        let mut out: Vec<Atom> = Vec::with_capacity(self.0.len());
        for a in &self.0 {
            match (a, out.last_mut()) {
                (Atom::Func(m), _) if m.is_one() => {}
                (Atom::Func(m), Some(Atom::Func(prev))) => *prev = prev.mul(m),
                _ => out.push(a.clone()),
            }
        }
        Word(out)
    }

    /// The function block at the end of the word, if any.
    pub fn trailing_function(&self) -> Option<&Monomial> {
        match self.0.last() {
            Some(Atom::Func(m)) => Some(m),
            _ => None,
        }
    }

    /// Splits off the trailing function block: `(forms..., f)`.
    pub fn split_trailing(&self) -> (Word, Monomial) {
        match self.0.split_last() {
            Some((Atom::Func(m), rest)) => (Word(rest.to_vec()), m.clone()),
            _ => (self.clone(), Monomial::one()),
        }
    }

    pub fn with_trailing(&self, m: &Monomial) -> Word {
        let mut atoms = self.0.clone();
        atoms.push(Atom::Func(m.clone()));
        Word(atoms).merged()
    }
}

impl Atom {
    pub fn for_generator(sig: &Signature, g: GenId) -> Atom {
        if sig.get(g).is_variable() {
            Atom::Func(Monomial::var(g))
        } else {
            Atom::Gen(g)
        }
    }
}

fn add_into<K: Ord>(map: &mut BTreeMap<K, CycNum>, key: K, c: CycNum) {
    if c.is_zero() {
        return;
    }
    match map.entry(key) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let sum = o.get() + &c;
            if sum.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = sum;
            }
        }
    }
}

pub(crate) fn add_into_map<K: Ord>(map: &mut BTreeMap<K, CycNum>, key: K, c: CycNum) {
    add_into(map, key, c)
}

/// Finite linear combination of words with cyclotomic coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct Element {
    modulus: u32,
    terms: BTreeMap<Word, CycNum>,
}

impl Element {
    pub fn zero(modulus: u32) -> Self {
        Element {
            modulus,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(modulus: u32) -> Self {
        Self::scalar(CycNum::one(modulus))
    }

    pub fn scalar(c: CycNum) -> Self {
        Self::term(Word::empty(), c)
    }

    pub fn from_terms(modulus: u32, terms: impl IntoIterator<Item = (Word, CycNum)>) -> Self {
        let mut e = Element::zero(modulus);
        for (w, c) in terms {
            e.add_term(w, c);
        }
        e
    }

    pub fn term(word: Word, c: CycNum) -> Self {
        let mut e = Element::zero(c.modulus());
        e.add_term(word, c);
        e
    }

    pub fn word(word: Word, modulus: u32) -> Self {
        Self::term(word, CycNum::one(modulus))
    }

    pub fn generator(sig: &Signature, g: GenId, modulus: u32) -> Self {
        Self::word(Word::from_gens(sig, &[g]), modulus)
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn terms(&self) -> &BTreeMap<Word, CycNum> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<Word, CycNum> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, word: &Word) -> CycNum {
        self.terms
            .get(word)
            .cloned()
            .unwrap_or_else(|| CycNum::zero(self.modulus))
    }

    pub fn add_term(&mut self, word: Word, c: CycNum) {
        debug_assert_eq!(c.modulus(), self.modulus);
        add_into(&mut self.terms, word, c);
    }

    fn check(&self, other: &Element) -> Result<()> {
        if self.modulus == other.modulus {
            Ok(())
        } else {
            Err(Error::ModulusMismatch {
                left: self.modulus,
                right: other.modulus,
            })
        }
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        self.check(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Element {
        Element {
            modulus: self.modulus,
            terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &CycNum) -> Element {
        let mut out = Element::zero(self.modulus);
        for (w, a) in &self.terms {
            out.add_term(w.clone(), a * c);
        }
        out
    }

    /// Bilinear concatenation; the result is not normalized.
    pub fn mul(&self, other: &Element) -> Result<Element> {
        self.check(other)?;
        let mut out = Element::zero(self.modulus);
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                out.add_term(u.concat(v), a * b);
            }
        }
        Ok(out)
    }

    pub fn map_words(&self, f: impl Fn(&Word) -> Word) -> Element {
        let mut out = Element::zero(self.modulus);
        for (w, c) in &self.terms {
            out.add_term(f(w), c.clone());
        }
        out
    }

    /// Homogeneous components keyed by grade.
    pub fn grade_decompose(&self, sig: &Signature) -> BTreeMap<u32, Element> {
        let mut out: BTreeMap<u32, Element> = BTreeMap::new();
        for (w, c) in &self.terms {
            out.entry(w.grade(sig))
                .or_insert_with(|| Element::zero(self.modulus))
                .add_term(w.clone(), c.clone());
        }
        out
    }

    /// The common grade of all terms; `None` for zero or mixed grades.
    pub fn homogeneous_grade(&self, sig: &Signature) -> Option<u32> {
        let grades: BTreeSet<u32> = self.terms.keys().map(|w| w.grade(sig)).collect();
        (grades.len() == 1).then(|| *grades.iter().next().unwrap())
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

pub fn mul(a: &Element, b: &Element) -> Result<Element> {
    a.mul(b)
}

pub fn grade_decompose(e: &Element, sig: &Signature) -> BTreeMap<u32, Element> {
    e.grade_decompose(sig)
}

pub fn formal_derivative(f: &CoeffFunction, v: GenId) -> CoeffFunction {
    f.formal_derivative(v)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatternAtom {
    Gen(GenId),
    /// The function wildcard `f`; matches one non-unit function block.
    Wild,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TemplateAtom {
    Gen(GenId),
    Func(Monomial),
    /// `f` differentiated along each listed coordinate (sorted).
    Wild(Vec<GenId>),
}

/// Oriented equality `lhs -> rhs` between homogeneous words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteRule {
    lhs: Vec<PatternAtom>,
    rhs: BTreeMap<Vec<TemplateAtom>, CycNum>,
    modulus: u32,
}

impl RewriteRule {
    pub fn new(
        sig: &Signature,
        modulus: u32,
        lhs: Vec<PatternAtom>,
        rhs: Vec<(CycNum, Vec<TemplateAtom>)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (c, mut t) in rhs {
            if c.modulus() != modulus {
                return Err(Error::ModulusMismatch {
                    left: modulus,
                    right: c.modulus(),
                });
            }
            for a in &mut t {
                match a {
                    TemplateAtom::Wild(derivs) => derivs.sort_unstable(),
                    TemplateAtom::Gen(g) if sig.get(*g).is_variable() => {
                        *a = TemplateAtom::Func(Monomial::var(*g))
                    }
                    _ => {}
                }
            }
            add_into(&mut map, t, c);
        }
        let rule = RewriteRule {
            lhs,
            rhs: map,
            modulus,
        };
        rule.validate(sig)?;
        Ok(rule)
    }

    fn validate(&self, sig: &Signature) -> Result<()> {
        let malformed = |reason: &str| Error::MalformedRule {
            rule: render::render_rule(sig, self),
            reason: reason.to_string(),
        };
        let wilds = self.lhs.iter().filter(|a| **a == PatternAtom::Wild).count();
        if wilds > 1 {
            return Err(malformed("at most one function wildcard"));
        }
        let mut lhs_grade = 0;
        let mut has_gen = false;
        for a in &self.lhs {
            if let PatternAtom::Gen(g) = a {
                if sig.get(*g).is_variable() {
                    return Err(malformed("variables enter patterns only through the wildcard"));
                }
                has_gen = true;
                lhs_grade += sig.get(*g).grade;
            }
        }
        if !has_gen {
            return Err(malformed("pattern needs at least one non-variable generator"));
        }
        for t in self.rhs.keys() {
            let w = t.iter().filter(|a| matches!(a, TemplateAtom::Wild(_))).count();
            if w > 1 || (w == 1 && wilds == 0) {
                return Err(malformed("right-hand side must be linear in the wildcard of the pattern"));
            }
            let g: u32 = t
                .iter()
                .map(|a| match a {
                    TemplateAtom::Gen(g) => sig.get(*g).grade,
                    _ => 0,
                })
                .sum();
            if g != lhs_grade {
                return Err(Error::MisgradedRule {
                    rule: render::render_rule(sig, self),
                    lhs: lhs_grade,
                    rhs: g,
                });
            }
        }
        Ok(())
    }

    pub fn lhs(&self) -> &[PatternAtom] {
        &self.lhs
    }

    pub fn rhs(&self) -> &BTreeMap<Vec<TemplateAtom>, CycNum> {
        &self.rhs
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn has_wildcard(&self) -> bool {
        self.lhs.contains(&PatternAtom::Wild)
    }

    /// Binding of the wildcard when the pattern matches at `pos`.
    fn match_at<'w>(&self, atoms: &'w [Atom], pos: usize) -> Option<Option<&'w Monomial>> {
        if pos + self.lhs.len() > atoms.len() {
            return None;
        }
        let mut binding = None;
        for (p, a) in self.lhs.iter().zip(&atoms[pos..]) {
            match (p, a) {
                (PatternAtom::Gen(g), Atom::Gen(h)) if g == h => {}
                (PatternAtom::Wild, Atom::Func(m)) if !m.is_one() => binding = Some(m),
                _ => return None,
            }
        }
        Some(binding)
    }

    /// The right-hand side with the wildcard bound to `binding`.
    pub fn instantiate(&self, sig: &Signature, binding: Option<&Monomial>) -> Result<Element> {
        let mut out = Element::zero(self.modulus);
        for (t, c) in &self.rhs {
            // each rhs term expands into a sum over the derivative of `f`
            let mut partial: Vec<(BigInt, Vec<Atom>)> = vec![(BigInt::from(1), Vec::new())];
            for a in t {
                match a {
                    TemplateAtom::Gen(g) => partial.iter_mut().for_each(|(_, w)| w.push(Atom::Gen(*g))),
                    TemplateAtom::Func(m) => partial
                        .iter_mut()
                        .for_each(|(_, w)| w.push(Atom::Func(m.clone()))),
                    TemplateAtom::Wild(derivs) => {
                        let f = binding.cloned().unwrap_or_else(Monomial::one);
                        let mut poly: Vec<(u64, Monomial)> = vec![(1, f)];
                        for &coord in derivs {
                            let mut next: BTreeMap<Monomial, u64> = BTreeMap::new();
                            for (k, m) in &poly {
                                for (k2, m2) in sig.total_derivative(m, coord)? {
                                    *next.entry(m2).or_default() += k * k2;
                                }
                            }
                            poly = next.into_iter().map(|(m, k)| (k, m)).collect();
                        }
                        let mut expanded = Vec::new();
                        for (k, w) in &partial {
                            for (k2, m) in &poly {
                                let mut w = w.clone();
                                w.push(Atom::Func(m.clone()));
                                expanded.push((k * BigInt::from(*k2), w));
                            }
                        }
                        partial = expanded;
                    }
                }
            }
            for (k, w) in partial {
                out.add_term(Word(w), c.scale(&BigRational::from_integer(k)));
            }
        }
        Ok(out)
    }
}

/// Ordered rewrite rules over one signature, with a termination fuel bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSet {
    signature: Arc<Signature>,
    modulus: u32,
    rules: Vec<RewriteRule>,
    fuel: usize,
}

/// Where and how a word can be rewritten.
#[derive(Clone, Debug)]
struct Redex {
    pos: usize,
    rule: usize,
    binding: Option<Monomial>,
}

impl RuleSet {
    pub const DEFAULT_FUEL: usize = 10_000;

    pub fn new(signature: Arc<Signature>, modulus: u32, rules: Vec<RewriteRule>) -> Result<Self> {
        for r in &rules {
            if r.modulus != modulus {
                return Err(Error::ModulusMismatch {
                    left: modulus,
                    right: r.modulus,
                });
            }
            r.validate(&signature)?;
        }
        Ok(RuleSet {
            signature,
            modulus,
            rules,
            fuel: Self::DEFAULT_FUEL,
        })
    }

    pub fn empty(signature: Arc<Signature>, modulus: u32) -> Self {
        RuleSet {
            signature,
            modulus,
            rules: Vec::new(),
            fuel: Self::DEFAULT_FUEL,
        }
    }

    pub fn with_fuel(mut self, fuel: usize) -> Self {
        self.fuel = fuel;
        self
    }

    /// Appends rules after the existing ones (lowest priority).
    pub fn extended(&self, more: Vec<RewriteRule>) -> Result<Self> {
        let mut rules = self.rules.clone();
        rules.extend(more);
        Ok(RuleSet::new(self.signature.clone(), self.modulus, rules)?.with_fuel(self.fuel))
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    pub fn fuel(&self) -> usize {
        self.fuel
    }

    /// Leftmost position, first matching rule.
    fn first_redex(&self, word: &Word) -> Option<Redex> {
        (0..word.len()).find_map(|pos| {
            self.rules.iter().enumerate().find_map(|(i, r)| {
                r.match_at(word.atoms(), pos).map(|b| Redex {
                    pos,
                    rule: i,
                    binding: b.cloned(),
                })
            })
        })
    }

    fn all_redexes(&self, word: &Word) -> Vec<Redex> {
        let mut out = Vec::new();
        for pos in 0..word.len() {
            for (i, r) in self.rules.iter().enumerate() {
                if let Some(b) = r.match_at(word.atoms(), pos) {
                    out.push(Redex {
                        pos,
                        rule: i,
                        binding: b.cloned(),
                    });
                }
            }
        }
        out
    }

    pub fn is_normal(&self, word: &Word) -> bool {
        *word == word.merged() && self.first_redex(word).is_none()
    }

    fn rewrite(&self, word: &Word, redex: &Redex) -> Result<Element> {
        let rule = &self.rules[redex.rule];
        let rhs = rule.instantiate(&self.signature, redex.binding.as_ref())?;
        let prefix = Word(word.atoms()[..redex.pos].to_vec());
        let suffix = Word(word.atoms()[redex.pos + rule.lhs.len()..].to_vec());
        let mut out = Element::zero(self.modulus);
        for (w, c) in rhs.terms {
            out.add_term(prefix.concat(&w).concat(&suffix).merged(), c);
        }
        Ok(out)
    }

    fn run(&self, e: &Element, mut choose: impl FnMut(&BTreeMap<Word, CycNum>, &Self) -> Option<(Word, Redex)>) -> Result<Element> {
        if e.modulus != self.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus,
                right: e.modulus,
            });
        }
        let budget = self.fuel.saturating_mul(e.len().max(1));
        let mut pending: BTreeMap<Word, CycNum> = BTreeMap::new();
        let mut done = Element::zero(self.modulus);
        let mut route = |w: Word, c: CycNum, pending: &mut BTreeMap<Word, CycNum>| {
            if self.first_redex(&w).is_none() {
                done.add_term(w, c);
            } else {
                add_into(pending, w, c);
            }
        };
        for (w, c) in &e.terms {
            route(w.merged(), c.clone(), &mut pending);
        }
        let mut spent = 0usize;
        while let Some((word, redex)) = choose(&pending, self) {
            if spent >= budget {
                return Err(Error::NonTerminating {
                    fuel: budget,
                    term: render::render_word(&self.signature, &word),
                });
            }
            spent += 1;
            let c = pending.remove(&word).unwrap();
            for (w, a) in self.rewrite(&word, &redex)?.terms {
                route(w, &a * &c, &mut pending);
            }
        }
        Ok(done)
    }

    /// Canonical normal form: leftmost redex, first matching rule.
    pub fn normalize(&self, e: &Element) -> Result<Element> {
        self.run(e, |pending, rs| {
            let (w, _) = pending.iter().next()?;
            let redex = rs.first_redex(w).expect("normal words were removed");
            Some((w.clone(), redex))
        })
    }

    /// Normal form reached by rewriting a random redex of a random pending
    /// word at every step.
    pub fn normalize_randomized<R: Rng>(&self, e: &Element, rng: &mut R) -> Result<Element> {
        self.run(e, |pending, rs| {
            if pending.is_empty() {
                return None;
            }
            let idx = rng.gen_range(0..pending.len());
            let w = pending.keys().nth(idx).unwrap();
            let mut all = rs.all_redexes(w);
            let pick = rng.gen_range(0..all.len());
            Some((w.clone(), all.swap_remove(pick)))
        })
    }
}

pub fn normalize(e: &Element, rules: &RuleSet) -> Result<Element> {
    rules.normalize(e)
}

/// A sample whose canonical and randomized normal forms differ.
#[derive(Clone, Debug)]
pub struct Discrepancy {
    pub sample: Element,
    pub canonical: Element,
    pub alternative: Element,
}

#[derive(Clone, Debug, Default)]
pub struct OrderReport {
    pub checked: usize,
    pub discrepancies: Vec<Discrepancy>,
}

impl OrderReport {
    pub fn passed(&self) -> bool {
        self.discrepancies.is_empty()
    }
}

/// Compares the canonical normal form of every sample with `rounds`
/// randomized rewriting orders.
pub fn check_order_independence<R: Rng>(
    rules: &RuleSet,
    samples: &[Element],
    rounds: usize,
    rng: &mut R,
) -> Result<OrderReport> {
    let mut report = OrderReport::default();
    for s in samples {
        let canonical = rules.normalize(s)?;
        for _ in 0..rounds {
            let alt = rules.normalize_randomized(s, rng)?;
            if alt != canonical {
                report.discrepancies.push(Discrepancy {
                    sample: s.clone(),
                    canonical: canonical.clone(),
                    alternative: alt,
                });
                break;
            }
        }
        report.checked += 1;
    }
    Ok(report)
}

/// Rule with no wildcard, from plain words.
pub fn word_rule(
    sig: &Signature,
    modulus: u32,
    lhs: &[GenId],
    rhs: Vec<(CycNum, Vec<GenId>)>,
) -> Result<RewriteRule> {
    RewriteRule::new(
        sig,
        modulus,
        lhs.iter().map(|&g| PatternAtom::Gen(g)).collect(),
        rhs.into_iter()
            .map(|(c, w)| (c, w.into_iter().map(TemplateAtom::Gen).collect()))
            .collect(),
    )
}
