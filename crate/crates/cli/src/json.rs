//! JSON shapes shared by the reports.
//!
//! Scalars are lists of `["num/den", power]` pairs in the power basis of a
//! named root; elements are lists of terms in canonical order, `[]` for zero.

use std::collections::BTreeMap;

use serde::Serialize;

use qdiff::galgebra::{Atom, Element, Monomial, Signature};
use qdiff::render::{basis_coeffs, monomial_string, term_key};
use qdiff::{CycNum, RootExponent};

use crate::parse::rational_string;

pub type ScalarJson = Vec<(String, usize)>;

#[derive(Debug, Serialize)]
pub struct TermJson {
    pub coeff: ScalarJson,
    pub word: Vec<String>,
    /// Trailing function block, `{}` when the word ends in a form.
    pub func: BTreeMap<String, String>,
}

pub fn scalar(c: &CycNum, basis: RootExponent) -> ScalarJson {
    coeffs(&basis_coeffs(c, basis))
}

/// Coefficients in the basis of `z_N`.
pub fn scalar_z(c: &CycNum) -> ScalarJson {
    coeffs(c.coeffs())
}

fn coeffs(cs: &[num_rational::BigRational]) -> ScalarJson {
    cs.iter()
        .enumerate()
        .filter(|(_, c)| !num_traits::Zero::is_zero(*c))
        .map(|(i, c)| (rational_string(c), i))
        .collect()
}

fn monomial_key(sig: &Signature, m: &Monomial) -> String {
    monomial_string(sig, m)
}

pub fn element(sig: &Signature, e: &Element, basis: RootExponent) -> Vec<TermJson> {
    let mut terms: Vec<_> = e.terms().iter().collect();
    terms.sort_by_cached_key(|(w, _)| term_key(sig, w));
    terms
        .into_iter()
        .map(|(w, c)| {
            let (body, trailing) = w.split_trailing();
            let word = body
                .atoms()
                .iter()
                .map(|a| match a {
                    Atom::Gen(g) => sig.get(*g).name().to_string(),
                    Atom::Func(m) => monomial_key(sig, m),
                })
                .collect();
            let mut func = BTreeMap::new();
            if !trailing.is_one() {
                func.insert(monomial_key(sig, &trailing), "1".to_string());
            }
            TermJson {
                coeff: scalar(c, basis),
                word,
                func,
            }
        })
        .collect()
}

/// Pretty JSON with a trailing newline.
pub fn to_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}
