//! The ten acceptance criteria, run in order. Each prints one line
//! `[PASS|FAIL] <n>. <name> (<elapsed>; <detail>)`; the test fails if any
//! criterion fails. Every check is exact, so the only numeric tolerances
//! are the runtime bounds printed with each line.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{fixture, qdiff};
use qdiff::calculi::{
    check_not_anyonic, derive_line_relations, line_calculus, shipped_calculi, tensor_factors, SuiteConfig, SuiteReport,
    Truncation,
};
use qdiff::cyclotomic::q_binomial;
use qdiff::galgebra::{Element, GenId, Word};
use qdiff::nogo::{candidate_triples, column_survivors, homomorphism_forces_equal, solve_nogo, HomomorphismVerdict, Triple};
use qdiff::sampling::{random_element, random_tensor_pairs, SampleShape};
use qdiff::tensor::TensorContext;
use qdiff::{CycNum, RootExponent};
use qdiff_cli::parse::parse_element;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn root(n: u32, k: i64) -> RootExponent {
    RootExponent::new(n, k).unwrap()
}

fn c1_qbinomial_vanishing() -> Outcome {
    let mut count = 0;
    for n in 2..=12u32 {
        for r in RootExponent::all_primitive(n).map_err(|e| e.to_string())? {
            for k in 1..n {
                let v = q_binomial(n, k, r).map_err(|e| e.to_string())?;
                ensure(v.is_zero(), || format!("[{n} choose {k}] at {r} = {v}"))?;
                count += 1;
            }
            let ends = [0, n].map(|k| q_binomial(n, k, r).unwrap());
            ensure(ends.iter().all(CycNum::is_one), || format!("[{n} choose 0 or N] at {r} is not 1"))?;
        }
    }
    Ok(format!("{count} binomials vanish exactly"))
}

fn c2_nogo() -> Outcome {
    let two = solve_nogo(2, false).map_err(|e| e.to_string())?;
    let minus_one = CycNum::from_integer(2, -1);
    ensure(two.solutions.len() == 1, || format!("N=2 solutions {:?}", two.solutions))?;
    let t: Triple = two.solutions[0];
    ensure(
        [t.q, t.p, t.s].iter().all(|r| r.to_cyc() == minus_one),
        || format!("N=2 solution {:?} is not (-1,-1,-1)", t.exponents()),
    )?;
    for m in 3..=8 {
        let r = solve_nogo(m, false).map_err(|e| e.to_string())?;
        ensure(r.solutions.is_empty(), || format!("N={m} solutions {:?}", r.solutions))?;
        ensure(r.rejections.iter().all(|c| !c.defect.is_zero()), || format!("N={m}: certificate with zero defect"))?;
    }
    Ok("N=2 -> {(-1,-1,-1)}, N=3..8 -> {}".into())
}

fn c3_constraint_chain() -> Outcome {
    for n in 2..=4 {
        let all = candidate_triples(n).map_err(|e| e.to_string())?;
        let by = |f: &dyn Fn(&Triple) -> bool| all.iter().copied().filter(|t| f(t)).collect::<BTreeSet<_>>();
        let survivors = |col| -> Result<BTreeSet<Triple>, String> {
            Ok(column_survivors(n, col).map_err(|e| e.to_string())?.into_iter().collect())
        };
        ensure(survivors(1)? == by(&|t| (&t.p.to_cyc() * &t.q.to_cyc()).is_one()), || format!("N={n}: column 2 is not pq = 1"))?;
        ensure(survivors(2)? == by(&|t| t.s.to_cyc() == t.q.to_cyc()), || format!("N={n}: column 3 is not s = q"))?;
        ensure(survivors(3)? == by(&|t| t.p.to_cyc() == t.s.to_cyc()), || format!("N={n}: column 4 is not p = s"))?;
    }
    Ok("pq = 1, s = q, p = s for N = 2..4".into())
}

fn c4_line_derivation() -> Outcome {
    let want = [
        "f dx -> dx f",
        "f d2x -> d2x f + (q - 1) dx dx f'",
        "dx dx dx -> 0",
        "dx d2x -> q d2x dx",
    ];
    for k in [1, 2] {
        let r = root(3, k);
        let d = derive_line_relations(r).map_err(|e| e.to_string())?;
        let shipped = line_calculus(r, Truncation::None).map_err(|e| e.to_string())?;
        ensure(d.rules.as_slice() == shipped.rules().rules(), || format!("{r}: derived rules differ from shipped"))?;
        ensure(d.rendered_rules() == want, || format!("{r}: {:?}", d.rendered_rules()))?;
        ensure(d.cube_coefficient == CycNum::from_integer(3, -3), || format!("{r}: coefficient {}", d.cube_coefficient))?;
        ensure(d.cube_part == "-3 dx dx dx f''", || format!("{r}: cube part {}", d.cube_part))?;
    }
    Ok("j and jbar rule-for-rule, -3 dx dx dx f''".into())
}

fn suites() -> Result<Vec<SuiteReport>, String> {
    let config = SuiteConfig {
        samples: 200,
        seed: 0,
        ..SuiteConfig::default()
    };
    shipped_calculi()
        .map_err(|e| e.to_string())?
        .iter()
        .map(|c| c.run_suite(&config).map_err(|e| e.to_string()))
        .collect()
}

fn c5_nilpotency_leibniz() -> Outcome {
    ensure(SampleShape::default().max_degree <= 5, || "samples exceed degree 5".into())?;
    let reports = suites()?;
    for r in &reports {
        ensure(r.nilpotency.checked >= 200 && r.nilpotency.passed(), || format!("{}: nilpotency", r.label))?;
        ensure(r.leibniz.checked >= 200 && r.leibniz.passed(), || format!("{}: leibniz", r.label))?;
        let want = if r.label == "derham-line" { 2 } else { 3 };
        ensure(r.nilpotency.order == want, || format!("{}: d^{} checked", r.label, r.nilpotency.order))?;
    }
    ensure(reports.iter().any(|r| r.label == "derham-line"), || "classical control missing".into())?;
    Ok(format!("{} calculi x 200 samples, including the d^2 = 0 control", reports.len()))
}

fn c6_flip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut runs = 0;
    for n in [2, 3, 4] {
        let (a, b) = tensor_factors(n).map_err(|e| e.to_string())?;
        for k in 0..n as i64 {
            let ctx = TensorContext::new(
                std::sync::Arc::new(a.differential().clone()),
                std::sync::Arc::new(b.differential().clone()),
                root(n, k),
            )
            .map_err(|e| e.to_string())?;
            let pairs = random_tensor_pairs(&mut rng, &ctx, &SampleShape::default(), 200).map_err(|e| e.to_string())?;
            let report = ctx.check_flip(&pairs).map_err(|e| e.to_string())?;
            ensure(report.checked == 200 && report.passed(), || format!("N={n} braiding {k}"))?;
            runs += 1;
        }
    }
    Ok(format!("{runs} braidings x 200 pairs, homomorphism and inverse"))
}

fn word(cal: &qdiff::calculi::Calculus, names: &[&str]) -> Element {
    let sig = cal.signature();
    let ids: Vec<GenId> = names.iter().map(|s| sig.lookup(s).unwrap()).collect();
    Element::word(Word::from_gens(sig, &ids), 3)
}

fn c7_star() -> Outcome {
    for k in [1, 2] {
        let r = root(3, k);
        let cal = line_calculus(r, Truncation::None).map_err(|e| e.to_string())?;
        let ds = cal.differential();
        let table = cal.star_table().ok_or("no star table")?;
        let star = |e: &Element| ds.star(table, e).map_err(|e| e.to_string());
        ensure(star(&word(&cal, &["dx"]))? == word(&cal, &["dx"]), || format!("{r}: dx* != dx"))?;
        ensure(star(&word(&cal, &["x"]))? == word(&cal, &["x"]), || format!("{r}: x* != x"))?;
        ensure(
            star(&word(&cal, &["d2x"]))? == word(&cal, &["d2x"]).scale(&r.pow_cyc(2)),
            || format!("{r}: (d2x)* != q^2 d2x"),
        )?;
        let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
        for _ in 0..200 {
            let e = random_element(&mut rng, cal.signature(), 3, &SampleShape::default());
            let twice = star(&star(&e)?)?;
            ensure(twice == ds.normalize(&e).map_err(|e| e.to_string())?, || format!("{r}: star star != id"))?;
        }
        let failures = cal.star_rule_failures().map_err(|e| e.to_string())?;
        ensure(failures.is_empty(), || format!("{r}: rules {failures:?}"))?;
    }
    Ok("generator values, involution on 200 samples, all rules".into())
}

fn c8_plane() -> Outcome {
    for k in [1, 2] {
        let v = check_not_anyonic(root(3, k)).map_err(|e| e.to_string())?;
        ensure(v.solutions.is_empty(), || format!("z_3^{k}: braidings {:?}", v.solutions))?;
    }
    let control = check_not_anyonic(root(2, 1)).map_err(|e| e.to_string())?;
    ensure(!control.solutions.is_empty(), || "N=2 control has no braiding".into())?;
    Ok("j, jbar -> {}, N=2 control -> {-1}".into())
}

fn c9_homomorphism() -> Outcome {
    let mut witnesses = 0;
    for n in 2..=8 {
        let prims = RootExponent::all_primitive(n).map_err(|e| e.to_string())?;
        for &q in &prims {
            for &p in &prims {
                let v = homomorphism_forces_equal(n, q, p).map_err(|e| e.to_string())?;
                match (p == q, v) {
                    (true, HomomorphismVerdict::Equal) => {}
                    (false, HomomorphismVerdict::Witness { residual, .. }) if !residual.is_zero() => witnesses += 1,
                    (_, other) => return Err(format!("N={n} q={q} p={p}: {other:?}")),
                }
            }
        }
    }
    Ok(format!("{witnesses} witnesses for p != q"))
}

fn c10_engineering() -> Outcome {
    let reports = suites()?;
    for r in &reports {
        ensure(r.idempotence_failures.is_empty(), || format!("{}: idempotence", r.label))?;
        ensure(r.order.passed() && r.order.checked >= 200, || format!("{}: rewriting order", r.label))?;
    }
    let mut trips = 0;
    for cal in shipped_calculi().map_err(|e| e.to_string())? {
        let ds = cal.differential();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let e = ds
                .normalize(&random_element(&mut rng, cal.signature(), cal.modulus(), &SampleShape::default()))
                .map_err(|e| e.to_string())?;
            let back = parse_element(&cal.render(&e), ds).map_err(|e| e.to_string())?;
            ensure(back == e, || format!("{}: {} does not round-trip", cal.label(), cal.render(&e)))?;
            trips += 1;
        }
    }
    let args = ["--format", "json", "--seed", "4", "check", "--calc", "line-jbar", "--samples", "50"];
    let (a, b) = (qdiff(&args), qdiff(&args));
    ensure(a.code == 0 && a.stdout == b.stdout, || "seeded check reports differ".into())?;
    let nogo = ["--format", "json", "nogo", "--N", "2", "--max-N", "5"];
    ensure(qdiff(&nogo).stdout == qdiff(&nogo).stdout, || "nogo reports differ".into())?;
    let bad = qdiff(&["check", "--calc", &fixture("corrupted-line.calc"), "--samples", "50"]);
    ensure(bad.code == 1 && bad.stdout.contains("FAIL"), || format!("corrupted fixture exited {}", bad.code))?;
    ensure(bad.stdout.lines().any(|l| l.starts_with("    ")), || "corrupted fixture has no witness".into())?;
    let usage = qdiff(&["reduce", "--calc", "line-j", "x +"]);
    ensure(usage.code == 2, || format!("parse error exited {}", usage.code))?;
    Ok(format!("{trips} round trips, byte-identical reports, exit codes 0/1/2"))
}

#[test]
fn acceptance_criteria() {
    let criteria = [
        Criterion { id: 1, name: "q-binomial vanishing", limit: Some(Duration::from_secs(1)), run: c1_qbinomial_vanishing },
        Criterion { id: 2, name: "no-go sweep N = 2..8", limit: Some(Duration::from_secs(10)), run: c2_nogo },
        Criterion { id: 3, name: "constraint chain", limit: None, run: c3_constraint_chain },
        Criterion { id: 4, name: "line relations rederived", limit: None, run: c4_line_derivation },
        Criterion { id: 5, name: "nilpotency and Leibniz suites", limit: Some(Duration::from_secs(30)), run: c5_nilpotency_leibniz },
        Criterion { id: 6, name: "flip isomorphism", limit: None, run: c6_flip },
        Criterion { id: 7, name: "star structure", limit: None, run: c7_star },
        Criterion { id: 8, name: "plane is not anyonic", limit: Some(Duration::from_secs(1)), run: c8_plane },
        Criterion { id: 9, name: "homomorphisms force p = q", limit: None, run: c9_homomorphism },
        Criterion { id: 10, name: "engineering gates", limit: None, run: c10_engineering },
    ];
    let mut failed = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let bound = c.limit.map(|l| format!(" < {:.0?}", l)).unwrap_or_default();
        let (ok, detail) = match result {
            Ok(d) => match c.limit {
                Some(l) if elapsed >= l => (false, format!("{d}; over the time limit")),
                _ => (true, d),
            },
            Err(e) => (false, e),
        };
        println!(
            "[{}] {}. {} ({:.2?}{bound}; exact; {detail})",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            elapsed
        );
        if !ok {
            failed.push(c.id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
