use staticfilter_core::engine::{FilterConfig, Mode};
use staticfilter_core::eval::{evaluate, stable_models, EvalOptions, FactStore};
use staticfilter_core::filter::{auto_theory, Regime};
use staticfilter_core::parser::parse_str;
use staticfilter_core::rewrite::optimize;
use staticfilter_core::{Const, Pred, Program};

fn program(text: &str) -> Program {
    let mut p = parse_str(text).unwrap();
    p.theory = auto_theory(&p);
    p
}

fn twice(p: &Program, cfg: &FilterConfig) -> (Program, Program) {
    let once = optimize(p, cfg).unwrap().rewritten;
    let again = optimize(&once, cfg).unwrap().rewritten;
    (once, again)
}

fn fixtures() -> Vec<Program> {
    let mut v = vec![
        staticfilter_core::families::gen_counter(3).unwrap().program,
        staticfilter_core::families::gen_permutation(3).unwrap(),
        staticfilter_core::families::gen_transitive_closure(&Const::sym("a"), &[]).program,
    ];
    v.push(
        staticfilter_core::families::gen_bounded_reach(5, &Const::sym("a"), &[])
            .unwrap()
            .program,
    );
    v
}

#[test]
fn fixtures_are_rewrite_fixpoints() {
    for p in fixtures() {
        for mode in [Mode::Full, Mode::Casf] {
            for regime in [Regime::prop(), Regime::horn(p.theory.clone())] {
                let cfg = FilterConfig::new(mode, regime);
                let (once, again) = twice(&p, &cfg);
                assert_eq!(again, once, "{mode:?}");
            }
        }
    }
}

// Known non-fixpoint in full mode: equality atoms are opaque to the
// propositional regime, so the second round adds filters that the first
// round's rules already imply. Outputs are unchanged.
#[test]
fn full_mode_second_round_can_differ_but_keeps_outputs() {
    let p = program("@output q/1.\nq(D) :- s(D,a,D), r(D,0), D <= 0, D = D.\nr(A,B) :- r(B,A), A = A, A = 0.\nq(B) :- s(B,2,B), q(B), B = B.\nr(A,B) :- e(A,B).\ns(A,B,C) :- e(A,B), f(C).\n");
    let cfg = FilterConfig::new(Mode::Full, Regime::prop());
    let (once, again) = twice(&p, &cfg);
    assert_ne!(again, once);
    let mut d = FactStore::new();
    for (a, b) in [("a", "a"), ("0", "a"), ("a", "0"), ("b", "a")] {
        d.insert(
            &Pred::new("e", 2),
            vec![Const::parse(a).unwrap(), Const::parse(b).unwrap()],
        );
    }
    for c in ["a", "0", "b"] {
        d.insert(&Pred::new("f", 1), vec![Const::parse(c).unwrap()]);
    }
    let opts = EvalOptions::default();
    let base = evaluate(&p, &d, &opts).unwrap().facts.restrict(&p.outputs);
    assert_eq!(
        evaluate(&once, &d, &opts)
            .unwrap()
            .facts
            .restrict(&p.outputs),
        base
    );
    assert_eq!(
        evaluate(&again, &d, &opts)
            .unwrap()
            .facts
            .restrict(&p.outputs),
        base
    );
}

// Known non-fixpoint with negation: the filter of a predicate that is not
// stratifiable starts from its negated occurrences, and those pick up the
// filters added by the first round.
#[test]
fn negated_occurrences_tighten_on_second_round() {
    let p = program("@output q/1.\nq(B) :- f(B), not e(B,B).\ns(D,D,D) :- e(D,B), q(D), not r(D,B).\nr(A,A) :- q(2), s(2,C,A).\n");
    let cfg = FilterConfig::new(Mode::Casf, Regime::prop());
    let (once, again) = twice(&p, &cfg);
    assert_ne!(again, once);
    let mut d = FactStore::new();
    for (a, b) in [("2", "0"), ("2", "2"), ("0", "1"), ("1", "1")] {
        d.insert(
            &Pred::new("e", 2),
            vec![Const::parse(a).unwrap(), Const::parse(b).unwrap()],
        );
    }
    for c in [0, 1, 2] {
        d.insert(&Pred::new("f", 1), vec![Const::Int(c)]);
    }
    let models = |q: &Program| stable_models(q, &d, 16).unwrap().len();
    assert_eq!(models(&once), models(&p));
    assert_eq!(models(&again), models(&p));
}
