use std::collections::BTreeSet;

use crate::error::LtlError;

use super::*;

fn atoms(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn seq(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn office_formula() -> LtlAst {
    parse_ltl(
        "[]<> p2 && []<> p4 && <> p3 && (! p3) U p4",
        &atoms(&["p1", "p2", "p3", "p4"]),
    )
    .unwrap()
}

#[test]
fn parse_examples() {
    let ast = office_formula();
    // ((([]<> p2 && []<> p4) && <> p3) && ((! p3) U p4))
    let expect = LtlAst::And(
        Box::new(LtlAst::And(
            Box::new(LtlAst::And(
                Box::new(LtlAst::Always(Box::new(LtlAst::Eventually(Box::new(
                    LtlAst::Atom("p2".into()),
                ))))),
                Box::new(LtlAst::Always(Box::new(LtlAst::Eventually(Box::new(
                    LtlAst::Atom("p4".into()),
                ))))),
            )),
            Box::new(LtlAst::Eventually(Box::new(LtlAst::Atom("p3".into())))),
        )),
        Box::new(LtlAst::Until(
            Box::new(LtlAst::Not(Box::new(LtlAst::Atom("p3".into())))),
            Box::new(LtlAst::Atom("p4".into())),
        )),
    );
    assert_eq!(ast, expect);

    let ast = parse_ltl("G F a", &atoms(&["a"])).unwrap();
    assert_eq!(
        ast,
        LtlAst::Always(Box::new(LtlAst::Eventually(Box::new(LtlAst::Atom(
            "a".into()
        )))))
    );

    assert!(matches!(
        parse_ltl("a U", &atoms(&["a"])),
        Err(LtlError::Syntax { .. })
    ));
    assert!(matches!(
        parse_ltl("a && q", &atoms(&["a"])),
        Err(LtlError::UndeclaredAtom { .. })
    ));
}

#[test]
fn until_binds_tighter_than_and() {
    // ! a U b parses as (! a) U b
    let ast = parse_ltl("! a U b", &atoms(&["a", "b"])).unwrap();
    assert_eq!(
        ast,
        LtlAst::Until(
            Box::new(LtlAst::Not(Box::new(LtlAst::Atom("a".into())))),
            Box::new(LtlAst::Atom("b".into()))
        )
    );
}

#[test]
fn parser_round_trip() {
    let names = atoms(&["a", "b", "p1", "p2", "p3", "p4"]);
    for text in [
        "[]<> p2 && []<> p4 && <> p3 && (! p3) U p4",
        "a -> b -> a",
        "a U b U a",
        "X X a || ! (a R b)",
        "true && false || G a",
    ] {
        let ast = parse_ltl(text, &names).unwrap();
        let printed = ast.to_string();
        let reparsed = parse_ltl(&printed, &names).unwrap();
        assert_eq!(ast, reparsed, "round trip failed for `{text}` -> `{printed}`");
    }
}

#[test]
fn lasso_examples() {
    let names = atoms(&["p", "q", "p1", "p2", "p3", "p4"]);
    let gf_p = parse_ltl("[]<> p", &names).unwrap();
    assert!(evaluate_on_lasso(&gf_p, &[], &seq(&["p"])));

    let f_q = parse_ltl("<> q", &names).unwrap();
    assert!(!evaluate_on_lasso(&f_q, &seq(&["p"]), &seq(&["p"])));

    let office = office_formula();
    assert!(evaluate_on_lasso(
        &office,
        &seq(&["p1", "p2", "p4", "p3"]),
        &seq(&["p2", "p4"])
    ));
    // visiting p3 before p4 violates the until clause
    assert!(!evaluate_on_lasso(
        &office,
        &seq(&["p1", "p3", "p4"]),
        &seq(&["p2", "p4"])
    ));
}

/// All lassos with |prefix| <= lp and |suffix| in 1..=ls over the given
/// alphabet.
fn all_lassos(alphabet: &[&str], lp: usize, ls: usize) -> Vec<(Vec<String>, Vec<String>)> {
    fn words(alphabet: &[&str], len: usize) -> Vec<Vec<String>> {
        if len == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for w in words(alphabet, len - 1) {
            for a in alphabet {
                let mut w2 = w.clone();
                w2.push(a.to_string());
                out.push(w2);
            }
        }
        out
    }
    let mut out = Vec::new();
    for p in 0..=lp {
        for s in 1..=ls {
            for pre in words(alphabet, p) {
                for suf in words(alphabet, s) {
                    out.push((pre.clone(), suf));
                }
            }
        }
    }
    out
}

fn assert_matches_oracle(ast: &LtlAst, lassos: &[(Vec<String>, Vec<String>)]) {
    let aut = ltl_to_buchi(ast);
    for (pre, suf) in lassos {
        let want = evaluate_on_lasso(ast, pre, suf);
        let got = accepts_lasso(&aut, pre, suf);
        assert_eq!(
            got, want,
            "automaton for `{ast}` disagrees with semantics on {pre:?}({suf:?})^w"
        );
    }
}

#[test]
fn buchi_matches_oracle_on_basics() {
    let names = atoms(&["p", "q"]);
    let lassos = all_lassos(&["p", "q"], 2, 3);
    for text in [
        "<> p", "[] p", "true", "false", "p", "! p", "X p", "p U q", "p R q", "[]<> p",
        "<>[] q", "p U (q U p)", "! (p U q)", "X X q", "(<> p) && (<> q)",
    ] {
        let ast = parse_ltl(text, &names).unwrap();
        assert_matches_oracle(&ast, &lassos);
    }
}

#[test]
fn buchi_matches_oracle_exhaustive_small() {
    // every formula of AST size <= 4 over {p, q}
    let lassos = all_lassos(&["p", "q"], 2, 3);
    for ast in enumerate_formulas(4) {
        assert_matches_oracle(&ast, &lassos);
    }
}

/// Enumerates all formulas up to the given AST node count over atoms p, q.
pub(super) fn enumerate_formulas(max_size: usize) -> Vec<LtlAst> {
    let mut by_size: Vec<Vec<LtlAst>> = vec![Vec::new(); max_size + 1];
    if max_size >= 1 {
        by_size[1] = vec![
            LtlAst::True,
            LtlAst::False,
            LtlAst::Atom("p".into()),
            LtlAst::Atom("q".into()),
        ];
    }
    for size in 2..=max_size {
        let mut out = Vec::new();
        for x in &by_size[size - 1] {
            out.push(LtlAst::Not(Box::new(x.clone())));
            out.push(LtlAst::Next(Box::new(x.clone())));
            out.push(LtlAst::Eventually(Box::new(x.clone())));
            out.push(LtlAst::Always(Box::new(x.clone())));
        }
        for ls in 1..size - 1 {
            let rs = size - 1 - ls;
            for a in &by_size[ls] {
                for b in &by_size[rs] {
                    out.push(LtlAst::And(Box::new(a.clone()), Box::new(b.clone())));
                    out.push(LtlAst::Or(Box::new(a.clone()), Box::new(b.clone())));
                    out.push(LtlAst::Implies(Box::new(a.clone()), Box::new(b.clone())));
                    out.push(LtlAst::Until(Box::new(a.clone()), Box::new(b.clone())));
                    out.push(LtlAst::Release(Box::new(a.clone()), Box::new(b.clone())));
                }
            }
        }
        by_size[size] = out;
    }
    by_size.into_iter().flatten().collect()
}

fn office_ts() -> RoiTransitionSystem {
    // delta(p1) = {p1, p2}; p3 and p4 cannot go back to p1
    let names = seq(&["p1", "p2", "p3", "p4"]);
    let delta = vec![vec![0, 1], vec![0, 1, 2, 3], vec![1, 2, 3], vec![1, 2, 3]];
    RoiTransitionSystem::new(names, delta)
}

#[test]
fn accepting_path_office() {
    let ast = office_formula();
    let aut = ltl_to_buchi(&ast);
    let ts = office_ts();
    let path = find_accepting_path(&ts, &aut, "p1").unwrap();
    let first = path.prefix.first().unwrap_or(&path.suffix[0]);
    assert_eq!(first, "p1");
    assert!(evaluate_on_lasso(&ast, &path.prefix, &path.suffix));
    // every consecutive step respects delta, including the wrap
    let all: Vec<&String> = path.prefix.iter().chain(path.suffix.iter()).collect();
    let mut steps: Vec<(usize, usize)> = all
        .windows(2)
        .map(|w| {
            (
                ts.region_index(w[0]).unwrap(),
                ts.region_index(w[1]).unwrap(),
            )
        })
        .collect();
    steps.push((
        ts.region_index(path.suffix.last().unwrap()).unwrap(),
        ts.region_index(&path.suffix[0]).unwrap(),
    ));
    for (a, b) in steps {
        assert!(ts.delta[a].contains(&b), "step {a} -> {b} not in delta");
    }
}

#[test]
fn accepting_path_trivial_and_unrealizable() {
    let names = atoms(&["p", "q"]);
    // G p on a single self-looping p-state
    let ast = parse_ltl("[] p", &names).unwrap();
    let aut = ltl_to_buchi(&ast);
    let ts = RoiTransitionSystem::new(seq(&["p"]), vec![vec![0]]);
    let path = find_accepting_path(&ts, &aut, "p").unwrap();
    assert!(path.prefix.is_empty());
    assert_eq!(path.suffix, seq(&["p"]));

    // <> q with q unreachable
    let ast = parse_ltl("<> q", &names).unwrap();
    let aut = ltl_to_buchi(&ast);
    let ts = RoiTransitionSystem::new(seq(&["p", "q"]), vec![vec![0], vec![1]]);
    assert_eq!(
        find_accepting_path(&ts, &aut, "p"),
        Err(LtlError::Unrealizable)
    );

    assert_eq!(
        find_accepting_path(&ts, &aut, "nope"),
        Err(LtlError::UnknownInitialRegion("nope".into()))
    );
}

#[test]
fn consecutive_pairs_examples() {
    let path = AcceptingPath {
        prefix: seq(&["p1", "p2", "p4", "p3"]),
        suffix: seq(&["p2", "p4"]),
    };
    let pairs: Vec<(String, String)> = consecutive_pairs(&path);
    let expect: Vec<(String, String)> = [
        ("p1", "p2"),
        ("p2", "p4"),
        ("p4", "p3"),
        ("p3", "p2"),
        ("p4", "p2"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    assert_eq!(pairs, expect);

    let path = AcceptingPath {
        prefix: vec![],
        suffix: seq(&["a"]),
    };
    assert_eq!(consecutive_pairs(&path), vec![("a".to_string(), "a".to_string())]);

    let path = AcceptingPath {
        prefix: seq(&["a"]),
        suffix: seq(&["b", "c"]),
    };
    let expect: Vec<(String, String)> = [("a", "b"), ("b", "c"), ("c", "b")]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    assert_eq!(consecutive_pairs(&path), expect);
}

#[test]
fn automaton_dump_mentions_guards() {
    let ast = parse_ltl("<> p", &atoms(&["p"])).unwrap();
    let aut = ltl_to_buchi(&ast);
    let dump = aut.dump();
    assert!(dump.contains("states:"));
    assert!(dump.contains("guard"));
}
