//! The no-go search checked against a hand-derived closed form of the two
//! coefficient rows.

use std::collections::BTreeSet;

use qdiff::cyclotomic::{CycNum, RootExponent};
use qdiff::nogo::{
    candidate_triples, coefficient_table, column_survivors, homomorphism_forces_equal, solve_nogo, GradeProfile,
    HomomorphismVerdict, Triple,
};

/// Rows of the table written out by hand, with grades `a1, a2, b1, b2`:
///
/// multiply first: `q^(a2 b1) * [1, p^a1, s^(a1+a2), s^(a1+a2) p^b1]`
/// Leibniz first:  `[q^(a2 b1), p^(a1+b1) q^(b1 (a2+1)), q^((b1+1) a2) s^a1,
///                   p^(a1+b1) s^a2 q^(b1 a2)]`
fn closed_form(t: Triple, g: GradeProfile) -> ([CycNum; 4], [CycNum; 4]) {
    let [a1, a2, b1, _] = g.0.map(i64::from);
    let (q, p, s) = (t.q, t.p, t.s);
    let e = |r: RootExponent, k: i64| r.pow_cyc(k);
    let base = e(q, a2 * b1);
    let first = [
        base.clone(),
        &base * &e(p, a1),
        &base * &e(s, a1 + a2),
        &(&base * &e(s, a1 + a2)) * &e(p, b1),
    ];
    let second = [
        base.clone(),
        &e(p, a1 + b1) * &e(q, b1 * (a2 + 1)),
        &e(q, (b1 + 1) * a2) * &e(s, a1),
        &(&e(p, a1 + b1) * &e(s, a2)) * &e(q, b1 * a2),
    ];
    (first, second)
}

#[test]
fn symbolic_table_matches_closed_form() {
    for n in 2..=4 {
        for t in candidate_triples(n).unwrap() {
            for g in GradeProfile::sweep(n) {
                let table = coefficient_table(t.q, t.p, t.s, g).unwrap();
                let (first, second) = closed_form(t, g);
                assert_eq!(table.multiply_first, first, "{t:?} {g}");
                assert_eq!(table.leibniz_first, second, "{t:?} {g}");
            }
        }
    }
}

#[test]
fn sweep_results() {
    let two = solve_nogo(2, false).unwrap();
    let exps: Vec<[u32; 3]> = two.solutions.iter().map(Triple::exponents).collect();
    assert_eq!(exps, vec![[1, 1, 1]]);
    for n in 3..=8 {
        let r = solve_nogo(n, false).unwrap();
        assert!(r.solutions.is_empty(), "N={n}");
        assert_eq!(r.rejections.len(), candidate_triples(n).unwrap().len());
    }
}

#[test]
fn extended_sweep_agrees() {
    for n in 2..=3 {
        let a = solve_nogo(n, false).unwrap();
        let b = solve_nogo(n, true).unwrap();
        assert_eq!(a.solutions, b.solutions);
        assert_eq!(b.grade_bound, 2 * n);
    }
}

#[test]
fn certificate_for_the_symmetric_triple() {
    let r = solve_nogo(3, false).unwrap();
    let cert = r.rejections.iter().find(|c| c.triple.exponents() == [1, 1, 1]).unwrap();
    assert_eq!(cert.profile, GradeProfile([0, 0, 1, 0]));
    let j = RootExponent::new(3, 1).unwrap();
    assert_eq!(cert.defect.0[1], &CycNum::one(3) - &j.pow_cyc(2));
    assert!(cert.defect.0[0].is_zero());
}

/// Each surviving set is exactly the solution set of the matching phase
/// condition, enumerated independently of the engine.
#[test]
fn constraint_chain() {
    for n in 2..=4 {
        let all = candidate_triples(n).unwrap();
        let set = |v: Vec<Triple>| v.into_iter().collect::<BTreeSet<_>>();
        let by = |f: &dyn Fn(&Triple) -> bool| all.iter().copied().filter(|t| f(t)).collect::<BTreeSet<_>>();
        assert_eq!(set(column_survivors(n, 0).unwrap()), by(&|_| true));
        assert_eq!(
            set(column_survivors(n, 1).unwrap()),
            by(&|t| (&t.p.to_cyc() * &t.q.to_cyc()).is_one()),
            "pq = 1, N={n}"
        );
        assert_eq!(set(column_survivors(n, 2).unwrap()), by(&|t| t.s.to_cyc() == t.q.to_cyc()), "s = q, N={n}");
        assert_eq!(set(column_survivors(n, 3).unwrap()), by(&|t| t.p.to_cyc() == t.s.to_cyc()), "p = s, N={n}");
    }
}

#[test]
fn homomorphisms_force_equal_roots() {
    for n in 2..=8 {
        let prims = RootExponent::all_primitive(n).unwrap();
        for &q in &prims {
            for &p in &prims {
                let v = homomorphism_forces_equal(n, q, p).unwrap();
                if p == q {
                    assert_eq!(v, HomomorphismVerdict::Equal);
                } else {
                    match v {
                        HomomorphismVerdict::Witness { grade, residual } => {
                            assert!(!residual.is_zero());
                            // the smallest grade where q^i and p^i differ
                            let first = (0..n as i64).find(|&i| q.pow_cyc(i) != p.pow_cyc(i)).unwrap();
                            assert_eq!(grade as i64, first);
                        }
                        HomomorphismVerdict::Equal => panic!("N={n} q={q} p={p}"),
                    }
                }
            }
        }
    }
}
