//! Normal form: every atom argument is a distinct variable and constants or
//! arithmetic only appear through built-in filter atoms.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::ast::{add_const_pred, Atom, Builtin, Const, FilterExpr, Program, Rule, Symbol, Term};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("arithmetic over non-numeric constant {0}")]
pub struct NormalizeError(pub String);

pub fn normalize(program: &Program) -> Result<Program, NormalizeError> {
    let rules = program
        .rules
        .iter()
        .map(normalize_rule)
        .collect::<Result<_, _>>()?;
    Ok(Program {
        rules,
        ..program.clone()
    })
}

struct Fresh {
    used: BTreeSet<Symbol>,
    next: usize,
    extra: Vec<FilterExpr>,
}

impl Fresh {
    fn var(&mut self) -> Symbol {
        loop {
            self.next += 1;
            let name: Symbol = Arc::from(format!("_v{}", self.next));
            if self.used.insert(name.clone()) {
                return name;
            }
        }
    }

    fn push(&mut self, pred: crate::ast::Pred, args: Vec<Symbol>) {
        self.extra.push(FilterExpr::Atom(Atom::from_pred(
            pred,
            args.into_iter().map(Term::Var).collect(),
        )));
    }

    /// Reduces a term to a variable or an integer, emitting filter atoms.
    fn operand(&mut self, t: &Term) -> Result<Result<Symbol, i64>, NormalizeError> {
        Ok(match t {
            Term::Var(v) => Ok(v.clone()),
            Term::Const(Const::Int(i)) => Err(*i),
            Term::Const(c) => return Err(NormalizeError(c.to_string())),
            Term::Add(a, b) => Ok(self.sum(a, b)?),
        })
    }

    fn sum(&mut self, a: &Term, b: &Term) -> Result<Symbol, NormalizeError> {
        let x = self.operand(a)?;
        let y = self.operand(b)?;
        let r = self.var();
        match (x, y) {
            (Ok(x), Err(d)) | (Err(d), Ok(x)) => self.push(add_const_pred(d), vec![x, r.clone()]),
            (Ok(x), Ok(y)) => self.push(Builtin::Plus.pred(), vec![x, y, r.clone()]),
            (Err(c), Err(d)) => {
                self.push(Builtin::EqConst(Const::Int(c + d)).pred(), vec![r.clone()])
            }
        }
        Ok(r)
    }

    fn atom(&mut self, a: &Atom, distinct: bool) -> Result<Atom, NormalizeError> {
        let mut seen: Vec<Symbol> = Vec::new();
        let mut args = Vec::with_capacity(a.args.len());
        for t in &a.args {
            let v = match t {
                Term::Var(v) if distinct && seen.contains(v) => {
                    let f = self.var();
                    self.push(Builtin::Eq.pred(), vec![v.clone(), f.clone()]);
                    f
                }
                Term::Var(v) => v.clone(),
                Term::Const(c) => {
                    let f = self.var();
                    self.push(Builtin::EqConst(c.clone()).pred(), vec![f.clone()]);
                    f
                }
                Term::Add(x, y) => self.sum(x, y)?,
            };
            seen.push(v.clone());
            args.push(Term::Var(v));
        }
        Ok(Atom::from_pred(a.pred.clone(), args))
    }
}

/// Normalizes one rule. Fresh variables are `_v<k>` with a per-rule counter.
pub fn normalize_rule(rule: &Rule) -> Result<Rule, NormalizeError> {
    let mut fresh = Fresh {
        used: rule.vars().into_iter().collect(),
        next: 0,
        extra: Vec::new(),
    };
    let positive = rule
        .positive
        .iter()
        .map(|a| fresh.atom(a, true))
        .collect::<Result<Vec<_>, _>>()?;
    let head = fresh.atom(&rule.head, true)?;
    let negative = rule
        .negative
        .iter()
        .map(|a| fresh.atom(a, true))
        .collect::<Result<Vec<_>, _>>()?;
    let mut err = None;
    let filter = rule.filter.map_atoms(&mut |a| {
        if a.args.iter().all(|t| matches!(t, Term::Var(_))) {
            return FilterExpr::Atom(a.clone());
        }
        match fresh.atom(a, false) {
            Ok(n) => FilterExpr::Atom(n),
            Err(e) => {
                err = Some(e);
                FilterExpr::Atom(a.clone())
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let mut filter = filter;
    for e in std::mem::take(&mut fresh.extra) {
        filter = filter.conjoin(e);
    }
    Ok(Rule {
        head,
        positive,
        negative,
        filter,
    })
}

fn is_fresh(v: &str) -> bool {
    v.strip_prefix("_v")
        .is_some_and(|d| !d.is_empty() && d.chars().all(|c| c.is_ascii_digit()))
}

/// Folds filter conjuncts on normalizer-introduced variables back into
/// constants, repeated variables and sums where that is safe.
pub fn denormalize(program: &Program) -> Program {
    Program {
        rules: program.rules.iter().map(denormalize_rule).collect(),
        ..program.clone()
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Slot {
    Head(usize),
    Pos(usize, usize),
    Neg(usize, usize),
}

fn occurrences(rule: &Rule, v: &str) -> Vec<Slot> {
    let mut out = Vec::new();
    for (j, t) in rule.head.args.iter().enumerate() {
        if t.as_var().is_some_and(|x| &**x == v) {
            out.push(Slot::Head(j));
        }
    }
    for (i, a) in rule.positive.iter().enumerate() {
        for (j, t) in a.args.iter().enumerate() {
            if t.as_var().is_some_and(|x| &**x == v) {
                out.push(Slot::Pos(i, j));
            }
        }
    }
    for (i, a) in rule.negative.iter().enumerate() {
        for (j, t) in a.args.iter().enumerate() {
            if t.as_var().is_some_and(|x| &**x == v) {
                out.push(Slot::Neg(i, j));
            }
        }
    }
    out
}

fn set_slot(rule: &mut Rule, s: Slot, t: Term) {
    match s {
        Slot::Head(j) => rule.head.args[j] = t,
        Slot::Pos(i, j) => rule.positive[i].args[j] = t,
        Slot::Neg(i, j) => rule.negative[i].args[j] = t,
    }
}

pub fn denormalize_rule(rule: &Rule) -> Rule {
    let mut rule = rule.clone();
    loop {
        let conjuncts: Vec<FilterExpr> = rule.filter.conjuncts().into_iter().cloned().collect();
        let mut folded = None;
        for (ci, c) in conjuncts.iter().enumerate() {
            let FilterExpr::Atom(a) = c else { continue };
            let Some(b) = Builtin::of(&a.pred) else {
                continue;
            };
            let vars: Vec<&Symbol> = a.args.iter().filter_map(Term::as_var).collect();
            if vars.len() != a.args.len() {
                continue;
            }
            // the variable being eliminated and the term replacing it
            let (target, term): (&Symbol, Term) = match b {
                Builtin::EqConst(ref k) => (vars[0], Term::Const(k.clone())),
                Builtin::Eq => (vars[1], Term::Var(vars[0].clone())),
                Builtin::Succ => (
                    vars[1],
                    Term::Add(Box::new(Term::Var(vars[0].clone())), Box::new(Term::int(1))),
                ),
                Builtin::PlusConst(d) => (
                    vars[1],
                    Term::Add(Box::new(Term::Var(vars[0].clone())), Box::new(Term::int(d))),
                ),
                Builtin::Plus => (
                    vars[2],
                    Term::Add(
                        Box::new(Term::Var(vars[0].clone())),
                        Box::new(Term::Var(vars[1].clone())),
                    ),
                ),
                Builtin::Leq(_) => continue,
            };
            if !is_fresh(target) || vars.iter().filter(|v| **v == target).count() != 1 {
                continue;
            }
            let in_filter = conjuncts
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != ci)
                .any(|(_, e)| e.atoms().iter().any(|x| x.vars().contains(target)));
            if in_filter {
                continue;
            }
            let occ = occurrences(&rule, target);
            let ok = matches!(
                (occ.as_slice(), &b),
                ([Slot::Head(_)], Builtin::EqConst(_))
                    | ([Slot::Pos(..)], Builtin::EqConst(_) | Builtin::Eq)
                    | (
                        [Slot::Head(_)],
                        Builtin::Succ | Builtin::PlusConst(_) | Builtin::Plus
                    )
            );
            if ok {
                folded = Some((ci, occ[0], term));
                break;
            }
        }
        let Some((ci, slot, term)) = folded else {
            break;
        };
        set_slot(&mut rule, slot, term);
        let rest: Vec<FilterExpr> = conjuncts
            .into_iter()
            .enumerate()
            .filter(|(j, _)| *j != ci)
            .map(|(_, e)| e)
            .collect();
        rule.filter = rest.into_iter().fold(FilterExpr::Top, FilterExpr::conjoin);
    }
    rule
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_str;

    fn rules(src: &str) -> Vec<Rule> {
        parse_str(src).unwrap().rules
    }

    #[test]
    fn already_normal_rules_unchanged() {
        let src = "out(Y) :- r(X,Y,N), X = a, N <= 5.\nout(Y) :- p(X1,X2,X3,Y), Y = b.";
        for r in rules(src) {
            assert_eq!(normalize_rule(&r).unwrap(), r);
        }
    }

    #[test]
    fn repeated_variable_gets_equality() {
        let r = &rules("q(X) :- e(X,X).")[0];
        let n = normalize_rule(r).unwrap();
        assert_eq!(n, rules("q(X) :- e(X,_v1), X = _v1.")[0]);
        assert_eq!(denormalize_rule(&n), *r);
    }

    #[test]
    fn constants_and_sums() {
        let r = &rules("p(X+1, a) :- e(X, 3).")[0];
        let n = normalize_rule(r).unwrap();
        assert_eq!(
            n,
            rules("p(_v2, _v3) :- e(X, _v1), _v1 = 3, _v2 = X + 1, _v3 = a.")[0]
        );
        assert_eq!(denormalize_rule(&n), *r);
        assert!(normalize_rule(&rules("p(Y) :- e(X), Y = X + 2.")[0]).is_ok());
    }

    #[test]
    fn fresh_names_avoid_user_variables() {
        let r = &rules("q(_v1) :- e(_v1, _v1).")[0];
        let n = normalize_rule(r).unwrap();
        assert_eq!(n, rules("q(_v1) :- e(_v1, _v2), _v1 = _v2.")[0]);
    }

    #[test]
    fn head_equality_is_not_folded() {
        let n = normalize_rule(&rules("p(X, X) :- e(X).")[0]).unwrap();
        assert_eq!(n, rules("p(X, _v1) :- e(X), X = _v1.")[0]);
        assert_eq!(denormalize_rule(&n), n);
    }

    #[test]
    fn idempotent_on_examples() {
        let p = parse_str("q(X) :- e(X,X,a).\nr(X) :- q(X), ~s(X, b).").unwrap();
        let n = normalize(&p).unwrap();
        assert_eq!(normalize(&n).unwrap(), n);
    }
}
