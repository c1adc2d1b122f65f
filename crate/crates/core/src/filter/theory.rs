//! Horn theories over filter predicates and their consequence operator.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::ast::{add_const_pred, Atom, Builtin, Const, Pred, Term};

use super::FAtom;

/// A theory rule `head :- body`; a missing head stands for `false`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TheoryRule {
    pub head: Option<Atom>,
    pub body: Vec<Atom>,
}

impl fmt::Display for TheoryRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.head {
            Some(h) => write!(f, "{h} :- ")?,
            None => f.write_str("false :- ")?,
        }
        for (i, a) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(".")
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TheoryError {
    #[error("theory rule {0}: empty body")]
    EmptyBody(usize),
    #[error("theory rule {0}: argument {1} is not a variable")]
    NonVariableArg(usize, String),
    #[error("theory rule {0}: head variable {1} does not occur in the body")]
    UnsafeHead(usize, String),
}

#[derive(Clone, Debug)]
struct Compiled {
    head: Option<(Pred, Vec<usize>)>,
    body: Vec<(Pred, Vec<usize>)>,
    nvars: usize,
}

/// Finite Horn theory used as the approximate entailment relation.
#[derive(Clone, Debug, Default)]
pub struct HornTheory {
    rules: Vec<TheoryRule>,
    compiled: Vec<Compiled>,
    by_body_pred: HashMap<Pred, Vec<(usize, usize)>>,
    by_head_pred: HashMap<Pred, Vec<usize>>,
    false_rules: Vec<usize>,
}

impl PartialEq for HornTheory {
    fn eq(&self, other: &Self) -> bool {
        self.rules == other.rules
    }
}

impl Eq for HornTheory {}

impl HornTheory {
    pub fn empty() -> HornTheory {
        HornTheory::default()
    }

    pub fn new(rules: Vec<TheoryRule>) -> Result<HornTheory, TheoryError> {
        let mut t = HornTheory::default();
        for r in rules {
            t.push(r)?;
        }
        Ok(t)
    }

    fn push(&mut self, rule: TheoryRule) -> Result<(), TheoryError> {
        let idx = self.rules.len();
        if rule.body.is_empty() {
            return Err(TheoryError::EmptyBody(idx + 1));
        }
        let mut names: Vec<String> = Vec::new();
        let compile_atom = |a: &Atom, names: &mut Vec<String>, in_head: bool| {
            let mut slots = Vec::with_capacity(a.args.len());
            for t in &a.args {
                let Term::Var(v) = t else {
                    return Err(TheoryError::NonVariableArg(idx + 1, t.to_string()));
                };
                let pos = match names.iter().position(|n| **n == **v) {
                    Some(p) => p,
                    None if in_head => return Err(TheoryError::UnsafeHead(idx + 1, v.to_string())),
                    None => {
                        names.push(v.to_string());
                        names.len() - 1
                    }
                };
                slots.push(pos);
            }
            Ok((a.pred.clone(), slots))
        };
        let mut body = Vec::new();
        for a in &rule.body {
            body.push(compile_atom(a, &mut names, false)?);
        }
        let head = match &rule.head {
            Some(h) => Some(compile_atom(h, &mut names, true)?),
            None => None,
        };
        for (j, (p, _)) in body.iter().enumerate() {
            self.by_body_pred
                .entry(p.clone())
                .or_default()
                .push((idx, j));
        }
        match &head {
            Some((p, _)) => self.by_head_pred.entry(p.clone()).or_default().push(idx),
            None => self.false_rules.push(idx),
        }
        self.compiled.push(Compiled {
            head,
            body,
            nvars: names.len(),
        });
        self.rules.push(rule);
        Ok(())
    }

    /// Adds the rules of `other` that are not already present.
    pub fn merge(&self, other: &HornTheory) -> HornTheory {
        let mut t = self.clone();
        for r in &other.rules {
            if !t.rules.contains(r) {
                t.push(r.clone()).expect("rule was valid in its own theory");
            }
        }
        t
    }

    pub fn rules(&self) -> &[TheoryRule] {
        &self.rules
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Every rule has exactly one body atom.
    pub fn is_linear(&self) -> bool {
        self.rules.iter().all(|r| r.body.len() == 1)
    }

    pub fn predicates(&self) -> BTreeSet<Pred> {
        let mut out = BTreeSet::new();
        for r in &self.rules {
            if let Some(h) = &r.head {
                out.insert(h.pred.clone());
            }
            out.extend(r.body.iter().map(|a| a.pred.clone()));
        }
        out
    }

    /// Forward chaining from `atoms`; terminates because no rule invents markers.
    pub fn closure<I: IntoIterator<Item = FAtom>>(&self, atoms: I) -> Closure {
        let mut known: BTreeSet<FAtom> = BTreeSet::new();
        let mut by_pred: HashMap<Pred, Vec<Vec<u32>>> = HashMap::new();
        let mut queue: Vec<FAtom> = Vec::new();
        for a in atoms {
            if known.insert(a.clone()) {
                by_pred
                    .entry(a.pred.clone())
                    .or_default()
                    .push(a.args.clone());
                queue.push(a);
            }
        }
        if self.rules.is_empty() {
            return Closure {
                atoms: known,
                inconsistent: false,
            };
        }
        let mut inconsistent = false;
        while let Some(a) = queue.pop() {
            let Some(occ) = self.by_body_pred.get(&a.pred) else {
                continue;
            };
            for &(ri, bj) in occ {
                let c = &self.compiled[ri];
                let mut env: Vec<Option<u32>> = vec![None; c.nvars];
                if !unify(&c.body[bj].1, &a.args, &mut env) {
                    continue;
                }
                let mut derived: Vec<Option<FAtom>> = Vec::new();
                join(c, 0, bj, &mut env, &by_pred, &mut derived);
                for d in derived {
                    match d {
                        None => inconsistent = true,
                        Some(h) => {
                            if known.insert(h.clone()) {
                                by_pred
                                    .entry(h.pred.clone())
                                    .or_default()
                                    .push(h.args.clone());
                                queue.push(h);
                            }
                        }
                    }
                }
            }
        }
        Closure {
            atoms: known,
            inconsistent,
        }
    }

    /// Atoms whose truth would force `target` or `false` (backward chaining over
    /// a linear theory, instantiating free body variables over markers 1..=k).
    pub fn necessarily_false(&self, target: &FAtom, k: u32) -> BTreeSet<FAtom> {
        let mut s: BTreeSet<FAtom> = BTreeSet::new();
        let mut queue: Vec<FAtom> = Vec::new();
        let add = |a: FAtom, s: &mut BTreeSet<FAtom>, queue: &mut Vec<FAtom>| {
            if s.insert(a.clone()) {
                queue.push(a);
            }
        };
        add(target.clone(), &mut s, &mut queue);
        for &ri in &self.false_rules {
            let c = &self.compiled[ri];
            for env in all_envs(c.nvars, k, &vec![None; c.nvars]) {
                for (p, slots) in &c.body {
                    add(instantiate(p, slots, &env), &mut s, &mut queue);
                }
            }
        }
        while let Some(h) = queue.pop() {
            let Some(rs) = self.by_head_pred.get(&h.pred) else {
                continue;
            };
            for &ri in rs {
                let c = &self.compiled[ri];
                let (_, hslots) = c.head.as_ref().expect("indexed by head");
                let mut partial: Vec<Option<u32>> = vec![None; c.nvars];
                if !unify(hslots, &h.args, &mut partial) {
                    continue;
                }
                for env in all_envs(c.nvars, k, &partial) {
                    for (p, slots) in &c.body {
                        add(instantiate(p, slots, &env), &mut s, &mut queue);
                    }
                }
            }
        }
        s
    }
}

fn instantiate(pred: &Pred, slots: &[usize], env: &[u32]) -> FAtom {
    FAtom {
        pred: pred.clone(),
        args: slots.iter().map(|&s| env[s]).collect(),
    }
}

fn all_envs(nvars: usize, k: u32, partial: &[Option<u32>]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::with_capacity(nvars)];
    for slot in partial.iter().take(nvars) {
        let choices: Vec<u32> = match slot {
            Some(m) => vec![*m],
            None => (1..=k).collect(),
        };
        out = out
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |&c| {
                    let mut p = prefix.clone();
                    p.push(c);
                    p
                })
            })
            .collect();
    }
    out
}

fn unify(slots: &[usize], args: &[u32], env: &mut [Option<u32>]) -> bool {
    if slots.len() != args.len() {
        return false;
    }
    for (&s, &m) in slots.iter().zip(args) {
        match env[s] {
            Some(x) if x != m => return false,
            Some(_) => {}
            None => env[s] = Some(m),
        }
    }
    true
}

fn join(
    c: &Compiled,
    j: usize,
    skip: usize,
    env: &mut Vec<Option<u32>>,
    by_pred: &HashMap<Pred, Vec<Vec<u32>>>,
    out: &mut Vec<Option<FAtom>>,
) {
    if j == c.body.len() {
        out.push(c.head.as_ref().map(|(p, slots)| FAtom {
            pred: p.clone(),
            args: slots.iter().map(|&s| env[s].expect("safe head")).collect(),
        }));
        return;
    }
    if j == skip {
        return join(c, j + 1, skip, env, by_pred, out);
    }
    let (p, slots) = &c.body[j];
    let Some(facts) = by_pred.get(p) else { return };
    for args in facts {
        let saved = env.clone();
        if unify(slots, args, env) {
            join(c, j + 1, skip, env, by_pred, out);
        }
        *env = saved;
    }
}

/// Result of forward chaining.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Closure {
    pub atoms: BTreeSet<FAtom>,
    /// A rule with head `false` fired.
    pub inconsistent: bool,
}

/// Order theory over the integers in `constants`:
/// `x<=c :- x=c`, `x<=c :- y<=c, y=x+d` and `x<=c :- x<=d` for c > d.
///
/// Negative `d` is skipped since `y = x + d` with `d < 0` does not bound `x`.
pub fn instantiate_order_theory(constants: &BTreeSet<i64>) -> HornTheory {
    let x = || Term::var("X");
    let y = || Term::var("Y");
    let leq = |c: i64, t: Term| Atom::from_pred(Builtin::Leq(c).pred(), vec![t]);
    let mut rules = Vec::new();
    for &c in constants {
        rules.push(TheoryRule {
            head: Some(leq(c, x())),
            body: vec![Atom::from_pred(
                Builtin::EqConst(Const::Int(c)).pred(),
                vec![x()],
            )],
        });
    }
    for &c in constants {
        for &d in constants.iter().filter(|d| **d >= 0) {
            rules.push(TheoryRule {
                head: Some(leq(c, x())),
                body: vec![
                    leq(c, y()),
                    Atom::from_pred(add_const_pred(d), vec![x(), y()]),
                ],
            });
        }
    }
    for &c in constants {
        for &d in constants.iter().filter(|d| **d < c) {
            rules.push(TheoryRule {
                head: Some(leq(c, x())),
                body: vec![leq(d, x())],
            });
        }
    }
    HornTheory::new(rules).expect("generated rules are well formed")
}

/// Integers that the order theory should be instantiated for: parameters of
/// `leq`, numeric `eq_const`, `succ` (1) and `plus[d]` atoms.
pub fn numeric_filter_constants<'a>(preds: impl IntoIterator<Item = &'a Pred>) -> BTreeSet<i64> {
    preds
        .into_iter()
        .filter_map(Builtin::of)
        .flat_map(|b| b.numeric_constants())
        .collect()
}

/// The program's own theory merged with the order theory over its numeric
/// filter constants.
pub fn auto_theory(program: &crate::ast::Program) -> HornTheory {
    let constants = numeric_filter_constants(&program.filter_predicates());
    program.theory.merge(&instantiate_order_theory(&constants))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fa(b: Builtin, args: &[u32]) -> FAtom {
        FAtom {
            pred: b.pred(),
            args: args.to_vec(),
        }
    }

    #[test]
    fn order_theory_rule_counts() {
        let t = instantiate_order_theory(&[0, 1, 5].into_iter().collect());
        assert_eq!(t.rules().len(), 15);
        assert!(!t.is_linear());
        let t5 = instantiate_order_theory(&[5].into_iter().collect());
        assert_eq!(t5.rules().len(), 2);
        let rendered: Vec<String> = t5.rules().iter().map(|r| r.to_string()).collect();
        assert_eq!(
            rendered,
            vec![
                "leq[5](X) :- eq_const[5](X).",
                "leq[5](X) :- leq[5](Y), plus[5](X, Y)."
            ]
        );
        assert!(instantiate_order_theory(&BTreeSet::new()).is_empty());
    }

    #[test]
    fn closure_through_successor() {
        let t = instantiate_order_theory(&[0, 1, 5].into_iter().collect());
        let c = t.closure([fa(Builtin::Leq(5), &[4]), fa(Builtin::Succ, &[3, 4])]);
        assert!(c.atoms.contains(&fa(Builtin::Leq(5), &[3])));
        assert!(!c.inconsistent);
    }

    #[test]
    fn false_head_marks_inconsistency() {
        let rule = TheoryRule {
            head: None,
            body: vec![
                Atom::from_pred(Builtin::EqConst(Const::Int(0)).pred(), vec![Term::var("X")]),
                Atom::from_pred(Builtin::EqConst(Const::Int(1)).pred(), vec![Term::var("X")]),
            ],
        };
        let t = HornTheory::new(vec![rule]).unwrap();
        let c = t.closure([
            fa(Builtin::EqConst(Const::Int(0)), &[1]),
            fa(Builtin::EqConst(Const::Int(1)), &[1]),
        ]);
        assert!(c.inconsistent);
        let c = t.closure([
            fa(Builtin::EqConst(Const::Int(0)), &[1]),
            fa(Builtin::EqConst(Const::Int(1)), &[2]),
        ]);
        assert!(!c.inconsistent);
    }

    #[test]
    fn rejects_unsafe_and_constant_args() {
        let bad = TheoryRule {
            head: Some(Atom::new("f", vec![Term::var("Z")])),
            body: vec![Atom::new("g", vec![Term::var("X")])],
        };
        assert!(matches!(
            HornTheory::new(vec![bad]),
            Err(TheoryError::UnsafeHead(1, _))
        ));
        let bad = TheoryRule {
            head: None,
            body: vec![Atom::new("g", vec![Term::sym("a")])],
        };
        assert!(matches!(
            HornTheory::new(vec![bad]),
            Err(TheoryError::NonVariableArg(1, _))
        ));
    }
}
