//! Canonical plain-text rendering.
//!
//! Terms are sorted by grade, then lexicographically by their token
//! sequence. Scalars are printed as polynomials in `q`, the configured root
//! of the calculus, using the power basis of that root.

use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::cyclotomic::{render_coeffs, CycNum, RootExponent};
use crate::galgebra::{Atom, Element, Monomial, PatternAtom, RewriteRule, Signature, TemplateAtom, Word};

pub fn monomial_tokens(sig: &Signature, m: &Monomial) -> Vec<String> {
    m.pairs()
        .iter()
        .map(|&(v, e)| {
            let name = sig.get(v).name();
            if e == 1 {
                name.to_string()
            } else {
                format!("{name}^{e}")
            }
        })
        .collect()
}

pub fn monomial_string(sig: &Signature, m: &Monomial) -> String {
    if m.is_one() {
        "1".to_string()
    } else {
        monomial_tokens(sig, m).join(" ")
    }
}

pub fn word_tokens(sig: &Signature, w: &Word) -> Vec<String> {
    let mut out = Vec::new();
    for a in w.atoms() {
        match a {
            Atom::Gen(g) => out.push(sig.get(*g).name().to_string()),
            Atom::Func(m) => out.extend(monomial_tokens(sig, m)),
        }
    }
    out
}

pub fn render_word(sig: &Signature, w: &Word) -> String {
    if w.is_empty() {
        "1".to_string()
    } else {
        word_tokens(sig, w).join(" ")
    }
}

/// Sort key for canonical term order.
pub fn term_key(sig: &Signature, w: &Word) -> (u32, Vec<String>) {
    (w.grade(sig), word_tokens(sig, w))
}

/// Coefficients of `c` in the power basis of `basis`; falls back to the
/// basis of `z_N` when `basis` is not primitive.
pub fn basis_coeffs(c: &CycNum, basis: RootExponent) -> Vec<BigRational> {
    c.coeffs_in_root_basis(basis)
        .unwrap_or_else(|_| c.coeffs().to_vec())
}

pub fn render_scalar(c: &CycNum, basis: RootExponent) -> String {
    render_coeffs(&basis_coeffs(c, basis), "q")
}

/// A coefficient in front of `body` (a word or a wildcard expression).
fn render_term(c: &CycNum, basis: RootExponent, body: Option<String>) -> String {
    let coeffs = basis_coeffs(c, basis);
    let nonzero = coeffs.iter().filter(|x| !num_traits::Zero::is_zero(*x)).count();
    let s = render_coeffs(&coeffs, "q");
    let Some(body) = body else {
        return if nonzero > 1 { format!("({s})") } else { s };
    };
    if nonzero > 1 {
        return format!("({s}) {body}");
    }
    let (i, v) = coeffs
        .iter()
        .enumerate()
        .find(|(_, x)| !num_traits::Zero::is_zero(*x))
        .expect("nonzero coefficient");
    if i == 0 && v.abs().is_one() {
        if v.is_negative() {
            format!("-{body}")
        } else {
            body
        }
    } else {
        format!("{s} {body}")
    }
}

fn join_terms(terms: Vec<String>) -> String {
    let mut out = String::new();
    for (i, t) in terms.into_iter().enumerate() {
        if i == 0 {
            out.push_str(&t);
        } else if let Some(rest) = t.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&t);
        }
    }
    out
}

/// Canonical text of an element; `0` for the zero element.
pub fn render_element(sig: &Signature, e: &Element, basis: RootExponent) -> String {
    if e.is_zero() {
        return "0".to_string();
    }
    let mut terms: Vec<(&Word, &CycNum)> = e.terms().iter().collect();
    terms.sort_by_cached_key(|(w, _)| term_key(sig, w));
    let single = terms.len() == 1;
    join_terms(
        terms
            .into_iter()
            .map(|(w, c)| {
                if w.is_empty() && single {
                    render_scalar(c, basis)
                } else {
                    render_term(c, basis, (!w.is_empty()).then(|| render_word(sig, w)))
                }
            })
            .collect(),
    )
}

/// `f`, `f'`, `f''` for a single coordinate in a one-variable signature,
/// otherwise `f_x_y` with one coordinate per derivative.
pub fn wildcard_name(sig: &Signature, derivs: &[usize]) -> String {
    if derivs.is_empty() {
        return "f".to_string();
    }
    let single_var = sig.variables().count() == 1;
    if single_var && derivs.len() <= 3 {
        format!("f{}", "'".repeat(derivs.len()))
    } else {
        let names: Vec<&str> = derivs.iter().map(|&v| sig.get(v).name()).collect();
        format!("f_{}", names.join("_"))
    }
}

fn template_string(sig: &Signature, t: &[TemplateAtom]) -> String {
    if t.is_empty() {
        return "1".to_string();
    }
    t.iter()
        .map(|a| match a {
            TemplateAtom::Gen(g) => sig.get(*g).name().to_string(),
            TemplateAtom::Func(m) => monomial_string(sig, m),
            TemplateAtom::Wild(d) => wildcard_name(sig, d),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn template_grade(sig: &Signature, t: &[TemplateAtom]) -> u32 {
    t.iter()
        .map(|a| match a {
            TemplateAtom::Gen(g) => sig.get(*g).grade(),
            _ => 0,
        })
        .sum()
}

/// Surface syntax of a rule: `f d2x -> d2x f + (q - 1) dx dx f'`.
pub fn render_rule_in(sig: &Signature, rule: &RewriteRule, basis: RootExponent) -> String {
    let lhs = rule
        .lhs()
        .iter()
        .map(|a| match a {
            PatternAtom::Gen(g) => sig.get(*g).name().to_string(),
            PatternAtom::Wild => "f".to_string(),
        })
        .collect::<Vec<_>>()
        .join(" ");
    let rhs = if rule.rhs().is_empty() {
        "0".to_string()
    } else {
        let mut terms: Vec<_> = rule.rhs().iter().collect();
        terms.sort_by_cached_key(|(t, _)| (template_grade(sig, t), template_string(sig, t)));
        join_terms(
            terms
                .into_iter()
                .map(|(t, c)| render_term(c, basis, (!t.is_empty()).then(|| template_string(sig, t))))
                .collect(),
        )
    };
    format!("{lhs} -> {rhs}")
}

/// Rule text in the basis of `z_N`.
pub fn render_rule(sig: &Signature, rule: &RewriteRule) -> String {
    let basis = RootExponent::primitive(rule.modulus()).expect("rule modulus is valid");
    render_rule_in(sig, rule, basis)
}
