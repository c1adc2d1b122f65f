use super::*;
use crate::parser::parse_str;

const EX2: &str =
    "@output out/1.\nr(X,Y,N) :- e(X,Y), N = 0.\nr(X,Z,M) :- r(X,Y,N), e(Y,Z), M = N + 1.\n\
                   out(Y) :- r(X,Y,N), X = a, N <= 5.\n";
const EX2_REWRITTEN: &str = "@output out/1.\nr(X,Y,N) :- e(X,Y), X = a, N = 0.\n\
                             r(X,Z,M) :- r(X,Y,N), e(Y,Z), M <= 5, M = N + 1.\nout(Y) :- r(X,Y,N).\n";

fn store(facts: &str) -> FactStore {
    FactStore::new().with_program_facts(&parse_str(facts).unwrap())
}

fn atoms(text: &str) -> BTreeSet<GroundAtom> {
    store(text).atom_set()
}

fn syms(model: &Model, pred: &str, arity: usize) -> Vec<String> {
    model
        .facts
        .relation(&Pred::new(pred, arity))
        .map(|t| {
            t.iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect()
}

#[test]
fn empty_program_returns_input() {
    let d = store("e(a,b). e(b,c).");
    let m = evaluate(&Program::default(), &d, &EvalOptions::default()).unwrap();
    assert_eq!(m.facts, d);
    assert_eq!(m.total_firings(), 0);
}

#[test]
fn transitive_closure() {
    let p = parse_str("tc(X,Y) :- e(X,Y). tc(X,Z) :- tc(X,Y), e(Y,Z).").unwrap();
    let m = evaluate(
        &p,
        &store("e(a,b). e(b,c). e(c,d)."),
        &EvalOptions::default(),
    )
    .unwrap();
    assert_eq!(m.facts.count(&Pred::new("tc", 2)), 6);
    // every body match happens exactly once under semi-naive evaluation
    assert_eq!(m.firings, vec![3, 3]);
}

#[test]
fn example2_original_on_chain() {
    let p = parse_str(EX2).unwrap();
    let m = evaluate(
        &p,
        &store("e(a,b). e(b,c). e(c,d)."),
        &EvalOptions::default(),
    )
    .unwrap();
    assert_eq!(syms(&m, "out", 1), vec!["b", "c", "d"]);
}

#[test]
fn example2_original_diverges_on_cycle() {
    let p = parse_str(EX2).unwrap();
    let d = store("e(a,b). e(b,c). e(c,a).");
    let err = evaluate(&p, &d, &EvalOptions::default().with_max_rounds(Some(200))).unwrap_err();
    assert_eq!(err, EvalError::StepCap { rounds: 200 });
    assert!(err.to_string().contains("non-terminating under cap"));
}

#[test]
fn example2_rewritten_terminates_on_cycle() {
    let p = parse_str(EX2_REWRITTEN).unwrap();
    let m = evaluate(
        &p,
        &store("e(a,b). e(b,c). e(c,a)."),
        &EvalOptions::default(),
    )
    .unwrap();
    assert_eq!(syms(&m, "out", 1), vec!["a", "b", "c"]);
    // r(a, _, n) for n = 0..=5
    assert_eq!(m.facts.count(&Pred::new("r", 3)), 6);
}

#[test]
fn arithmetic_binds_in_both_directions() {
    let p = parse_str("@output o/1.\no(X) :- n(Y), Y = X + 2.\nq(Z) :- n(X), n(Y), Z = X + Y.")
        .unwrap();
    let m = evaluate(&p, &store("n(3). n(5)."), &EvalOptions::default()).unwrap();
    assert_eq!(syms(&m, "o", 1), vec!["1", "3"]);
    assert_eq!(syms(&m, "q", 1), vec!["6", "8", "10"]);
}

#[test]
fn unsafe_builtin_use_is_rejected() {
    let p = Program {
        rules: vec![Rule::new(
            crate::ast::Atom::new("o", vec![crate::ast::Term::var("X")]),
            vec![],
        )
        .with_filter(crate::ast::FilterExpr::Atom(crate::ast::Atom::from_pred(
            Builtin::Leq(3).pred(),
            vec![crate::ast::Term::var("X")],
        )))],
        ..Default::default()
    };
    assert!(matches!(
        evaluate(&p, &FactStore::new(), &EvalOptions::default()),
        Err(EvalError::Unsafe { rule: 1, .. })
    ));
}

#[test]
fn custom_filter_reads_store() {
    let p = parse_str("@filter odd/1.\no(X) :- n(X), odd(X).").unwrap();
    let m = evaluate(
        &p,
        &store("n(1). n(2). n(3). odd(1). odd(3)."),
        &EvalOptions::default(),
    )
    .unwrap();
    assert_eq!(syms(&m, "o", 1), vec!["1", "3"]);
}

#[test]
fn disjunctive_filter() {
    let p = parse_str("o(X) :- n(X), (X = 1 ; X = 3).").unwrap();
    let m = evaluate(&p, &store("n(1). n(2). n(3)."), &EvalOptions::default()).unwrap();
    assert_eq!(syms(&m, "o", 1), vec!["1", "3"]);
}

#[test]
fn naive_and_semi_naive_agree() {
    let p = parse_str(EX2).unwrap();
    let d = store("e(a,b). e(b,c). e(c,d). e(b,d). e(d,e).");
    let semi = evaluate(&p, &d, &EvalOptions::default()).unwrap();
    let naive = evaluate(
        &p,
        &d,
        &EvalOptions::default().with_strategy(Strategy::Naive),
    )
    .unwrap();
    assert_eq!(semi.facts, naive.facts);
    assert!(semi.total_firings() <= naive.total_firings());
}

#[test]
fn negation_requires_stratified_entry_point() {
    let p = parse_str("p(X) :- q(X), not r(X).").unwrap();
    assert_eq!(
        evaluate(&p, &FactStore::new(), &EvalOptions::default()).unwrap_err(),
        EvalError::Negation
    );
}

#[test]
fn ground_self_negation() {
    let p = parse_str("p(X) :- q(X), not p(X).").unwrap();
    let gp = ground(&p, &store("q(c).")).unwrap();
    let rules: Vec<String> = gp.rules.iter().map(ToString::to_string).collect();
    assert_eq!(rules, vec!["p(c) :- q(c), not p(c)."]);
}

#[test]
fn ground_variable_free_program() {
    let p = parse_str("p(c) :- q(c), not r(c).\nr(d) :- q(d).").unwrap();
    let gp = ground(&p, &store("q(c). q(d).")).unwrap();
    let rules: Vec<String> = gp.rules.iter().map(ToString::to_string).collect();
    assert_eq!(rules, vec!["p(c) :- q(c), not r(c).", "r(d) :- q(d)."]);
}

#[test]
fn ground_evaluates_builtins() {
    let p = parse_str("o(X) :- n(X), X = a.").unwrap();
    let gp = ground(&p, &store("n(a). n(b).")).unwrap();
    let rules: Vec<String> = gp.rules.iter().map(ToString::to_string).collect();
    assert_eq!(rules, vec!["o(a) :- n(a)."]);
}

#[test]
fn ground_reports_domain_bound() {
    let p = parse_str("n(Y) :- n(X), Y = X + 1.").unwrap();
    assert_eq!(
        ground(&p, &store("n(0).")).unwrap_err(),
        EvalError::DomainBound { bound: 64 }
    );
}

fn gp(text: &str) -> GroundProgram {
    ground(&parse_str(text).unwrap(), &FactStore::new()).unwrap()
}

#[test]
fn reduct_examples() {
    let g = gp("p(c) :- not q(c).");
    let empty = reduct(&g, &BTreeSet::new());
    assert_eq!(
        empty
            .rules
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>(),
        vec!["p(c)."]
    );
    assert!(reduct(&g, &atoms("q(c).")).rules.is_empty());

    let even = gp("p :- not q.\nq :- not p.");
    // only the rule negating q survives A = {p}
    let kept = reduct(&even, &atoms("p."));
    assert_eq!(
        kept.rules
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>(),
        vec!["p."]
    );
}

#[test]
fn even_loop_has_two_stable_models() {
    let p = parse_str("p :- not q.\nq :- not p.").unwrap();
    let d = store("e(z).");
    let models = stable_models(&p, &d, 20).unwrap();
    let expected = vec![atoms("e(z). p."), atoms("e(z). q.")];
    assert_eq!(models, expected);
}

#[test]
fn self_negation_has_no_stable_model() {
    let p = parse_str("p(X) :- q(X), not p(X).").unwrap();
    assert!(stable_models(&p, &store("q(c)."), 20).unwrap().is_empty());
}

#[test]
fn atom_cap_is_enforced() {
    let p = parse_str("p(X) :- d(X), not q(X).\nq(X) :- d(X), not p(X).").unwrap();
    let d = store("d(1). d(2). d(3).");
    assert_eq!(
        stable_models(&p, &d, 5).unwrap_err(),
        EvalError::TooManyAtoms { atoms: 6, cap: 5 }
    );
    assert_eq!(stable_models(&p, &d, 6).unwrap().len(), 8);
}

const WIN: &str = "@output win/1.\nwin(X) :- move(X,Y), not win(Y).";
const STRATIFIED: &str = "reach(X,Y) :- e(X,Y).\nreach(X,Z) :- reach(X,Y), e(Y,Z).\n\
                          node(X) :- e(X,Y).\nnode(Y) :- e(X,Y).\n\
                          unreach(X,Y) :- node(X), node(Y), not reach(X,Y).";

#[test]
fn stratified_matches_unique_stable_model() {
    let p = parse_str(STRATIFIED).unwrap();
    let d = store("e(a,b). e(b,c).");
    let m = stratified_evaluate(&p, &d, &EvalOptions::default()).unwrap();
    assert_eq!(m.facts.count(&Pred::new("unreach", 2)), 9 - 3);
    let models = stable_models(&p, &d, 20).unwrap();
    assert_eq!(models, vec![m.facts.atom_set()]);
}

#[test]
fn win_on_acyclic_moves() {
    // win/lose on a chain is not stratified but has a unique stable model
    let p = parse_str(WIN).unwrap();
    let d = store("move(a,b). move(b,c).");
    assert!(matches!(
        stratified_evaluate(&p, &d, &EvalOptions::default()),
        Err(EvalError::NotStratifiable { .. })
    ));
    let models = stable_models(&p, &d, 20).unwrap();
    assert_eq!(models.len(), 1);
    assert!(models[0].contains(&GroundAtom::new(Pred::new("win", 1), vec![Const::sym("b")])));
    assert!(!models[0].contains(&GroundAtom::new(Pred::new("win", 1), vec![Const::sym("a")])));
}

#[test]
fn two_stratum_win_lose() {
    let p = parse_str("@output win/1.\nlose(X) :- pos(X), not canmove(X).\ncanmove(X) :- move(X,Y).\nwin(X) :- move(X,Y), lose(Y).")
        .unwrap();
    let d = store("pos(a). pos(b). pos(c). move(a,b). move(b,c).");
    let m = stratified_evaluate(&p, &d, &EvalOptions::default()).unwrap();
    assert_eq!(syms(&m, "win", 1), vec!["b"]);
    assert_eq!(stable_models(&p, &d, 20).unwrap(), vec![m.facts.atom_set()]);
}

#[test]
fn stratified_without_negation_equals_evaluate() {
    let p = parse_str(EX2).unwrap();
    let d = store("e(a,b). e(b,c).");
    let a = evaluate(&p, &d, &EvalOptions::default()).unwrap();
    let b = stratified_evaluate(&p, &d, &EvalOptions::default()).unwrap();
    assert_eq!(a.facts, b.facts);
}

#[test]
fn self_negation_is_not_stratifiable() {
    let p = parse_str("p(X) :- q(X), not p(X).").unwrap();
    let err = stratified_evaluate(&p, &store("q(c)."), &EvalOptions::default()).unwrap_err();
    assert_eq!(
        err,
        EvalError::NotStratifiable {
            pred: Pred::new("p", 1)
        }
    );
}

#[test]
fn reduct_is_antitone() {
    let g = gp("p :- not q.\nq :- not p.\nr :- not p, not q.");
    let small = reduct(&g, &atoms("p."));
    let large = reduct(&g, &atoms("p. q."));
    assert!(large.rules.is_subset(&small.rules));
}

#[test]
fn satisfies_filter() {
    use crate::filter::Dnf;
    let leq = FAtom::new(Builtin::Leq(5).pred(), vec![2]);
    let eqa = FAtom::new(Builtin::EqConst(Const::sym("a")).pred(), vec![1]);
    let d = Dnf::conj([leq, eqa]);
    let s = FactStore::new();
    assert!(satisfies(&d, &[Const::sym("a"), Const::Int(5)], &s));
    assert!(!satisfies(&d, &[Const::sym("a"), Const::Int(6)], &s));
    assert!(!satisfies(&d, &[Const::sym("b"), Const::Int(0)], &s));
    assert!(satisfies(&Dnf::top(), &[], &s));
    assert!(!satisfies(&Dnf::bottom(), &[], &s));
}
