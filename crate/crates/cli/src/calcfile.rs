//! Line-based calculus definitions.
//!
//! ```text
//! # the j-line
//! name line-j
//! modulus 3
//! root 1                      # q = z_3^1
//! generator x 0 variable
//! generator dx 1 form
//! generator d2x 2 form
//! d(x) = dx
//! d(dx) = d2x
//! d(d2x) = 0
//! rule f dx -> dx f
//! rule f d2x -> d2x f + (q - 1) dx dx f'
//! star(d2x) = q^2 d2x
//! ```
//!
//! Rules are applied in file order. Either every generator has a `star`
//! line or none has.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use qdiff::calculi::{builtin, Calculus, BUILTIN_NAMES};
use qdiff::differential::{DifferentialStructure, StarTable};
use qdiff::galgebra::GenId;
use qdiff::render::{render_element, render_rule_in};
use qdiff::{Element, Generator, GeneratorKind, RewriteRule, RootExponent, RuleSet, Signature};

use crate::error::CliError;
use crate::parse::{eval_raw, parse_pattern, parse_template, split_arrow, Scope};

const RESERVED: &[&str] = &["q", "d", "f"];

fn def_err(line: usize, message: impl Into<String>) -> CliError {
    CliError::Definition {
        line,
        message: message.into(),
    }
}

/// Re-anchors expression errors to the definition line.
fn at_line(line: usize) -> impl Fn(CliError) -> CliError {
    move |e| match e {
        CliError::Definition { .. } => e,
        other => def_err(line, other.to_string()),
    }
}

/// `d(name)` or `star(name)` on the left of `=`.
fn applied_name<'a>(head: &'a str, func: &str) -> Option<&'a str> {
    head.trim()
        .strip_prefix(func)?
        .trim_start()
        .strip_prefix('(')?
        .strip_suffix(')')
        .map(str::trim)
}

fn parse_kind(s: &str) -> Option<GeneratorKind> {
    match s {
        "form" => Some(GeneratorKind::Form),
        "variable" => Some(GeneratorKind::Variable),
        "generic" => Some(GeneratorKind::Generic),
        _ => None,
    }
}

fn kind_name(k: GeneratorKind) -> &'static str {
    match k {
        GeneratorKind::Form => "form",
        GeneratorKind::Variable => "variable",
        GeneratorKind::Generic => "generic",
    }
}

pub fn import(text: &str, default_label: &str) -> Result<Calculus, CliError> {
    let mut label = default_label.to_string();
    let mut modulus = None;
    let mut root_k = None;
    let mut generators = Vec::new();
    let mut deferred = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (head, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        let rest = rest.trim();
        match head {
            "name" => label = rest.to_string(),
            "modulus" => modulus = Some(rest.parse::<u32>().map_err(|_| def_err(line, "modulus must be a positive integer"))?),
            "root" => root_k = Some(rest.parse::<i64>().map_err(|_| def_err(line, "root must be an integer exponent"))?),
            "generator" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let [name, grade, kind] = parts.as_slice() else {
                    return Err(def_err(line, "expected `generator <name> <grade> <form|variable|generic>`"));
                };
                if RESERVED.contains(name) || name.starts_with("f'") || name.starts_with("f_") {
                    return Err(def_err(line, format!("`{name}` is reserved")));
                }
                let grade = grade.parse().map_err(|_| def_err(line, "grade must be a natural number"))?;
                let kind = parse_kind(kind).ok_or_else(|| def_err(line, format!("unknown generator kind `{kind}`")))?;
                generators.push(Generator::new(*name, grade, kind));
            }
            "rule" | "star" | "d" => deferred.push((line, content)),
            _ if content.starts_with("d(") || content.starts_with("star(") => deferred.push((line, content)),
            _ => return Err(def_err(line, format!("unknown directive `{head}`"))),
        }
    }

    let n = modulus.ok_or_else(|| def_err(0, "missing `modulus`"))?;
    let root = RootExponent::new(n, root_k.ok_or_else(|| def_err(0, "missing `root`"))?)
        .and_then(RootExponent::require_primitive)
        .map_err(|e| def_err(0, e.to_string()))?;
    let sig = Arc::new(Signature::new(generators).map_err(|e| def_err(0, e.to_string()))?);
    let scope = Scope {
        signature: &sig,
        root,
        differential: None,
        wildcards: false,
    };
    let rule_scope = Scope {
        signature: &sig,
        root,
        differential: None,
        wildcards: true,
    };

    let mut action: BTreeMap<GenId, Element> = BTreeMap::new();
    let mut star: BTreeMap<GenId, Element> = BTreeMap::new();
    let mut rules = Vec::new();
    for (line, content) in deferred {
        if let Some(body) = content.strip_prefix("rule") {
            let (lhs, rhs, _) = split_arrow(body).ok_or_else(|| def_err(line, "expected `rule <pattern> -> <rhs>`"))?;
            let pattern = parse_pattern(lhs, &rule_scope).map_err(at_line(line))?;
            let template = parse_template(rhs, &rule_scope).map_err(at_line(line))?;
            rules.push(RewriteRule::new(&sig, n, pattern, template).map_err(|e| def_err(line, e.to_string()))?);
            continue;
        }
        let (head, rhs) = content
            .split_once('=')
            .ok_or_else(|| def_err(line, "expected `d(<generator>) = <expr>` or `star(<generator>) = <expr>`"))?;
        let (table, name) = if let Some(name) = applied_name(head, "star") {
            (&mut star, name)
        } else if let Some(name) = applied_name(head, "d") {
            (&mut action, name)
        } else {
            return Err(def_err(line, format!("cannot read `{}`", head.trim())));
        };
        let g = sig.id(name).ok_or_else(|| def_err(line, format!("unknown generator `{name}`")))?;
        let value = eval_raw(rhs, &scope).map_err(at_line(line))?;
        if table.insert(g, value).is_some() {
            return Err(def_err(line, format!("`{name}` is defined twice")));
        }
    }

    let star = if star.is_empty() {
        None
    } else {
        if let Some((_, g)) = sig.generators().iter().enumerate().find(|(id, _)| !star.contains_key(id)) {
            return Err(def_err(0, format!("star table has no entry for `{}`", g.name())));
        }
        Some(StarTable(star))
    };
    let rules = RuleSet::new(sig.clone(), n, rules).map_err(|e| def_err(0, e.to_string()))?;
    let ds = DifferentialStructure::new(root, rules, action).map_err(|e| def_err(0, e.to_string()))?;
    Ok(Calculus::new(label, ds, star))
}

pub fn export(cal: &Calculus) -> String {
    let sig = cal.signature();
    let root = cal.root();
    let mut out = String::new();
    let _ = writeln!(out, "name {}", cal.label());
    let _ = writeln!(out, "modulus {}", cal.modulus());
    let _ = writeln!(out, "root {}", root.exponent());
    for g in sig.generators() {
        let _ = writeln!(out, "generator {} {} {}", g.name(), g.grade(), kind_name(g.kind()));
    }
    let ds = cal.differential();
    for (id, g) in sig.generators().iter().enumerate() {
        let _ = writeln!(out, "d({}) = {}", g.name(), render_element(sig, ds.action(id), root));
    }
    for rule in cal.rules().rules() {
        let _ = writeln!(out, "rule {}", render_rule_in(sig, rule, root));
    }
    if let Some(table) = cal.star_table() {
        for (id, g) in sig.generators().iter().enumerate() {
            if let Some(e) = table.get(id) {
                let _ = writeln!(out, "star({}) = {}", g.name(), render_element(sig, e, root));
            }
        }
    }
    out
}

/// A built-in name or a path to a definition file.
pub fn load(name: &str) -> Result<Calculus, CliError> {
    if let Some(cal) = builtin(name) {
        return Ok(cal?);
    }
    let path = Path::new(name);
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "`{name}` is neither a built-in calculus ({}) nor a file",
            BUILTIN_NAMES.join(", ")
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read `{name}`: {e}")))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(name);
    import(&text, stem).map_err(|e| CliError::Usage(format!("{name}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qdiff::calculi::shipped_calculi;

    #[test]
    fn builtins_round_trip_through_text() {
        for cal in shipped_calculi().unwrap() {
            let text = export(&cal);
            let back = import(&text, "x").unwrap();
            assert_eq!(back.label(), cal.label());
            assert_eq!(back.rules().rules(), cal.rules().rules(), "{}", cal.label());
            assert_eq!(back.signature(), cal.signature());
            assert_eq!(back.star_table().map(|t| &t.0), cal.star_table().map(|t| &t.0));
            for id in 0..cal.signature().len() {
                assert_eq!(back.differential().action(id), cal.differential().action(id));
            }
            assert_eq!(export(&back), text);
        }
    }

    #[test]
    fn reports_bad_lines() {
        let base = "modulus 3\nroot 1\ngenerator x 0 variable\ngenerator dx 1 form\nd(x) = dx\nd(dx) = 0\n";
        let misgraded = format!("{base}rule dx dx -> dx\n");
        match import(&misgraded, "t") {
            Err(CliError::Definition { line, .. }) => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
        assert!(import(&format!("{base}frobnicate\n"), "t").is_err());
        assert!(import(&format!("{base}generator q 0 variable\n"), "t").is_err());
        assert!(import(&format!("{base}rule dx dy -> 0\n"), "t").is_err());
        assert!(import("modulus 3\nroot 0\n", "t").is_err());
        let ok = import(&format!("{base}rule f dx -> dx f\nrule dx dx -> 0\n"), "t").unwrap();
        assert_eq!(ok.label(), "t");
        assert!(ok.star_table().is_none());
    }
}
