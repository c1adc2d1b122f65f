//! Generators for the benchmark program families.

use crate::ast::{Const, Pred, Program};
use crate::eval::FactStore;
use crate::filter::auto_theory;
use crate::parser::parse_str;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FamilyError {
    #[error("counter width must be at least 1, got {0}")]
    CounterWidth(usize),
    #[error("permutation width must be at least 2, got {0}")]
    PermutationWidth(usize),
    #[error("distance bound must be non-negative, got {0}")]
    NegativeBound(i64),
}

/// A generated program with its database.
#[derive(Clone, Debug)]
pub struct Family {
    pub program: Program,
    pub facts: FactStore,
}

fn vars(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn parse(text: &str) -> Program {
    parse_str(text).unwrap_or_else(|e| panic!("generated program does not parse: {e}\n{text}"))
}

/// Step rule `i` (1-based) of the binary counter over `l` bits: the head sets
/// bit i and clears the bits after it, the body has bit i clear and the bits
/// after it set.
fn step_rule(l: usize, i: usize) -> String {
    let prefix = vars("X", i - 1);
    let mut head = prefix.clone();
    head.push("1".into());
    head.extend(std::iter::repeat_n("0".to_string(), l - i));
    head.push("Y".into());
    let mut body = prefix;
    body.push("0".into());
    body.extend(std::iter::repeat_n("1".to_string(), l - i));
    body.push("Y".into());
    format!("p({}) :- p({}).\n", head.join(","), body.join(","))
}

/// The counter program with seeds `p(0,..,0,a)` and `p(1,..,1,0,b)` written
/// as inline facts, and `out(Y) :- p(X1,..,Xl,Y), Y = b`.
pub fn gen_counter(l: usize) -> Result<Family, FamilyError> {
    if l == 0 {
        return Err(FamilyError::CounterWidth(l));
    }
    let mut text = String::from("@output out/1.\n");
    let zeros = vec!["0"; l].join(",");
    let mut ones = vec!["1"; l - 1];
    ones.push("0");
    text += &format!("p({zeros},a).\np({},b).\n", ones.join(","));
    for i in 1..=l {
        text += &step_rule(l, i);
    }
    text += &format!("out(Y) :- p({},Y), Y = b.\n", vars("X", l).join(","));
    Ok(Family {
        program: parse(&text),
        facts: FactStore::new(),
    })
}

/// Counter variant whose full-mode filter fixpoint takes exponentially many
/// passes: `p` is fed from `e`, the output asks for the all-ones value, and
/// the theory makes `X = 0, X = 1` inconsistent. Step rules are listed from
/// the last bit to the first.
pub fn gen_counter_witness(l: usize) -> Result<Family, FamilyError> {
    if l == 0 {
        return Err(FamilyError::CounterWidth(l));
    }
    let xs = vars("X", l).join(",");
    let mut text = String::from("@output out/1.\n@theory { false :- X = 0, X = 1. }\n");
    text += &format!("p({xs},Y) :- e({xs},Y).\n");
    for i in (1..=l).rev() {
        text += &step_rule(l, i);
    }
    text += &format!("out(Y) :- p({},Y).\n", vec!["1"; l].join(","));
    let mut facts = FactStore::new();
    let mut seed = vec![Const::Int(0); l];
    seed.push(Const::sym("c"));
    facts.insert(&Pred::new("e", l + 1), seed);
    Ok(Family {
        program: parse(&text),
        facts,
    })
}

/// Bounded reachability from `start` over `e/2` with the order theory for
/// the program's numeric constants.
pub fn gen_bounded_reach(
    bound: i64,
    start: &Const,
    edges: &[(Const, Const)],
) -> Result<Family, FamilyError> {
    if bound < 0 {
        return Err(FamilyError::NegativeBound(bound));
    }
    let text = format!(
        "@output out/1.\nr(X,Y,N) :- e(X,Y), N = 0.\nr(X,Z,M) :- r(X,Y,N), e(Y,Z), M = N + 1.\n\
         out(Y) :- r(X,Y,N), X = {start}, N <= {bound}.\n"
    );
    let mut program = parse(&text);
    program.theory = auto_theory(&program);
    Ok(Family {
        program,
        facts: edge_store("e", edges),
    })
}

/// Transitive closure over `p/2` with the selection `X = start` on the
/// output rule only.
pub fn gen_transitive_closure(start: &Const, edges: &[(Const, Const)]) -> Family {
    let text = format!(
        "@output out/1.\ntc(X,Y) :- p(X,Y).\ntc(X,Z) :- tc(X,Y), p(Y,Z).\nout(Y) :- tc(X,Y), X = {start}.\n"
    );
    Family {
        program: parse(&text),
        facts: edge_store("p", edges),
    }
}

/// The permutation family over `k` key positions, with output selection
/// `X1 = a1, .., Xk = ak`.
pub fn gen_permutation(k: usize) -> Result<Program, FamilyError> {
    if k < 2 {
        return Err(FamilyError::PermutationWidth(k));
    }
    let xs = vars("X", k);
    let mut text = format!("@output out/1.\nr({0},Y) :- p({0},Y).\n", xs.join(","));
    for i in 0..k {
        for j in i + 1..k {
            let mut swapped = xs.clone();
            swapped.swap(i, j);
            text += &format!("r({},Y) :- r({},Y).\n", swapped.join(","), xs.join(","));
        }
    }
    let sel: Vec<String> = xs
        .iter()
        .enumerate()
        .map(|(i, x)| format!("{x} = a{}", i + 1))
        .collect();
    text += &format!("out(Y) :- r({},Y), {}.\n", xs.join(","), sel.join(", "));
    Ok(parse(&text))
}

pub fn edge_store(pred: &str, edges: &[(Const, Const)]) -> FactStore {
    let mut s = FactStore::new();
    let p = Pred::new(pred, 2);
    for (a, b) in edges {
        s.insert(&p, vec![a.clone(), b.clone()]);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{compute_filters, FilterConfig, Mode};
    use crate::eval::{evaluate, EvalOptions};
    use crate::filter::Regime;
    use crate::rewrite::optimize;

    fn sym(s: &str) -> Const {
        Const::sym(s)
    }

    fn edges(list: &[(&str, &str)]) -> Vec<(Const, Const)> {
        list.iter().map(|(a, b)| (sym(a), sym(b))).collect()
    }

    /// Independent simulation of the counter: increment each seed value
    /// until all bits are set, collecting distinct (value, tag) pairs.
    fn counter_fact_count(l: usize) -> usize {
        let top = (1u64 << l) - 1;
        let mut seen = std::collections::BTreeSet::new();
        for (mut v, tag) in [(0, 'a'), (top & !1, 'b')] {
            seen.insert((v, tag));
            while v < top {
                v += 1;
                seen.insert((v, tag));
            }
        }
        seen.len()
    }

    #[test]
    fn counter_shapes() {
        let c1 = gen_counter(1).unwrap();
        assert_eq!(c1.program.facts.len(), 2);
        assert_eq!(c1.program.rules.len(), 2);
        let c3 = gen_counter(3).unwrap();
        assert_eq!(
            c3.program
                .rules
                .iter()
                .filter(|r| r.head.pred.name.as_ref() == "p")
                .count(),
            3
        );
        assert_eq!(gen_counter(0).unwrap_err(), FamilyError::CounterWidth(0));
    }

    #[test]
    fn counter_original_and_rewritten_fact_counts() {
        for l in 1..=6 {
            let f = gen_counter(l).unwrap();
            let p = Pred::new("p", l + 1);
            let orig = evaluate(&f.program, &f.facts, &EvalOptions::default()).unwrap();
            assert_eq!(orig.facts.count(&p), counter_fact_count(l), "l = {l}");
            let out: Vec<_> = orig.facts.relation(&Pred::new("out", 1)).cloned().collect();
            assert_eq!(out, vec![vec![sym("b")]]);

            let cfg = FilterConfig::new(Mode::Casf, Regime::prop());
            let rewritten = optimize(&f.program, &cfg).unwrap().rewritten;
            let m = evaluate(&rewritten, &f.facts, &EvalOptions::default()).unwrap();
            assert_eq!(m.facts.count(&p), 3, "l = {l}");
            assert_eq!(
                m.facts.restrict([&Pred::new("out", 1)]),
                orig.facts.restrict([&Pred::new("out", 1)])
            );
        }
    }

    /// Passes of the filter fixpoint on the witness, simulated on counter
    /// values: rules run in program order (last bit first) and see earlier
    /// updates of the same pass; the final pass changes nothing.
    fn witness_passes(l: usize) -> u64 {
        let top = (1u64 << l) - 1;
        let mut known = std::collections::BTreeSet::new();
        let mut passes = 0;
        loop {
            passes += 1;
            let mut changed = false;
            for i in (1..=l).rev() {
                // head: bit i (from the left) set, later bits clear
                let low = l - i;
                let heads: Vec<u64> = known
                    .iter()
                    .copied()
                    .filter(|v| v & ((1 << (low + 1)) - 1) == 1 << low)
                    .collect();
                for v in heads {
                    changed |= known.insert(v - 1);
                }
            }
            changed |= known.insert(top);
            if !changed {
                return passes;
            }
        }
    }

    #[test]
    fn counter_witness_pass_counts() {
        for l in 1..=6usize {
            let f = gen_counter_witness(l).unwrap();
            let cfg = FilterConfig::new(Mode::Full, Regime::horn(f.program.theory.clone()));
            let a = compute_filters(&f.program, &cfg).unwrap();
            assert_eq!(a.iteration_count, witness_passes(l), "l = {l}");
            assert_eq!(a.iteration_count, (1 << (l - 1)) + 2, "l = {l}");
            // every counter value ends up in the filter of p
            assert_eq!(
                a.get(&Pred::new("p", l + 1)).unwrap().len(),
                1 << l,
                "l = {l}"
            );
        }
    }

    #[test]
    fn bounded_reach_shapes() {
        let f = gen_bounded_reach(5, &sym("a"), &[]).unwrap();
        let ex2 = crate::ast::tests::example2();
        assert_eq!(f.program.rules, ex2.rules);
        assert_eq!(f.program.outputs, ex2.outputs);
        assert!(!f.program.theory.is_empty());
        assert_eq!(
            gen_bounded_reach(-1, &sym("a"), &[]).unwrap_err(),
            FamilyError::NegativeBound(-1)
        );

        let g = edges(&[("a", "b"), ("b", "c"), ("a", "d"), ("d", "a")]);
        let f = gen_bounded_reach(0, &sym("a"), &g).unwrap();
        let m = evaluate(
            &f.program,
            &f.facts,
            &EvalOptions::default().with_max_rounds(Some(50)),
        );
        // the cycle a-d makes the unrestricted program diverge; the rewriting does not
        assert!(m.is_err());
        let cfg = FilterConfig::new(Mode::Full, Regime::horn(f.program.theory.clone()));
        let rewritten = optimize(&f.program, &cfg).unwrap().rewritten;
        let m = evaluate(&rewritten, &f.facts, &EvalOptions::default()).unwrap();
        let out: Vec<_> = m.facts.relation(&Pred::new("out", 1)).cloned().collect();
        assert_eq!(out, vec![vec![sym("b")], vec![sym("d")]]);

        let f = gen_bounded_reach(5, &sym("a"), &[]).unwrap();
        let m = evaluate(&f.program, &f.facts, &EvalOptions::default()).unwrap();
        assert_eq!(m.facts.count(&Pred::new("out", 1)), 0);
    }

    #[test]
    fn transitive_closure_single_edge() {
        let f = gen_transitive_closure(&sym("a"), &edges(&[("a", "b")]));
        let m = evaluate(&f.program, &f.facts, &EvalOptions::default()).unwrap();
        let out: Vec<_> = m.facts.relation(&Pred::new("out", 1)).cloned().collect();
        assert_eq!(out, vec![vec![sym("b")]]);
    }

    #[test]
    fn permutation_shapes() {
        let swaps = |k| gen_permutation(k).unwrap().rules.len() - 2;
        assert_eq!(swaps(2), 1);
        assert_eq!(swaps(3), 3);
        assert_eq!(swaps(5), 10);
        assert_eq!(
            gen_permutation(1).unwrap_err(),
            FamilyError::PermutationWidth(1)
        );
    }
}
