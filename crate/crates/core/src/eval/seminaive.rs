//! Interned relations, compiled rules and the bottom-up fixpoint loop.

use std::collections::{HashMap, HashSet};

use crate::ast::{Builtin, Const, FilterExpr, Pred, Program, Rule};
use crate::normalize::normalize_rule;

use super::{EvalError, EvalOptions, FactStore, GroundAtom, Strategy};

#[derive(Default)]
pub(crate) struct Interner {
    ids: HashMap<Const, u32>,
    consts: Vec<Const>,
    ints: Vec<Option<i64>>,
}

impl Interner {
    pub(crate) fn id(&mut self, c: &Const) -> u32 {
        if let Some(&i) = self.ids.get(c) {
            return i;
        }
        let i = self.consts.len() as u32;
        self.consts.push(c.clone());
        self.ints.push(c.as_int());
        self.ids.insert(c.clone(), i);
        i
    }

    pub(crate) fn get(&self, id: u32) -> &Const {
        &self.consts[id as usize]
    }

    fn int(&self, id: u32) -> Option<i64> {
        self.ints[id as usize]
    }
}

type Tuple = Box<[u32]>;

struct Index {
    map: HashMap<Tuple, Vec<u32>>,
    upto: usize,
}

#[derive(Default)]
pub(crate) struct Relation {
    rows: Vec<Tuple>,
    set: HashSet<Tuple>,
    indexes: HashMap<Vec<usize>, Index>,
    /// rows below `old_end` are "old" for the current round
    old_end: usize,
    /// snapshot of `rows.len()` at the start of the current round
    cur_end: usize,
}

impl Relation {
    fn insert(&mut self, t: Tuple) -> bool {
        if self.set.contains(&t) {
            return false;
        }
        self.set.insert(t.clone());
        self.rows.push(t);
        true
    }

    fn ensure_index(&mut self, cols: &[usize]) {
        let idx = self.indexes.entry(cols.to_vec()).or_insert_with(|| Index {
            map: HashMap::new(),
            upto: 0,
        });
        for (i, row) in self.rows.iter().enumerate().skip(idx.upto) {
            let key: Tuple = cols.iter().map(|&c| row[c]).collect();
            idx.map.entry(key).or_default().push(i as u32);
        }
        idx.upto = self.rows.len();
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum RangeKind {
    Old,
    Delta,
    Full,
}

#[derive(Clone, Debug)]
enum CB {
    EqConst(u32),
    Eq,
    Leq(i64),
    /// second = first + d
    Add(i64),
    /// third = first + second
    Plus,
}

#[derive(Clone, Debug)]
enum CAtom {
    Builtin(CB, Vec<usize>),
    Custom(usize, Vec<usize>),
}

#[derive(Clone, Debug)]
enum CExpr {
    Top,
    Bottom,
    Atom(CAtom),
    And(Vec<CExpr>),
    Or(Vec<CExpr>),
}

impl CExpr {
    fn slots(&self, out: &mut Vec<usize>) {
        match self {
            CExpr::Atom(CAtom::Builtin(_, s) | CAtom::Custom(_, s)) => out.extend(s),
            CExpr::And(v) | CExpr::Or(v) => v.iter().for_each(|e| e.slots(out)),
            _ => {}
        }
    }
}

#[derive(Clone, Debug)]
enum Step {
    Scan {
        rel: usize,
        range: RangeKind,
        cols: Vec<usize>,
        key: Vec<usize>,
        free: Vec<(usize, usize)>,
    },
    /// compute argument `target` of a built-in from the others
    Bind {
        b: CB,
        slots: Vec<usize>,
        target: usize,
    },
    Test(CExpr),
    Neg {
        rel: usize,
        slots: Vec<usize>,
    },
}

pub(crate) struct CompiledRule {
    head_rel: usize,
    head: Vec<usize>,
    pos: Vec<(usize, Vec<usize>)>,
    neg: Vec<(usize, Vec<usize>)>,
    nslots: usize,
    var_names: Vec<String>,
    /// plan per delta position, plus one with every atom over the full range
    variants: Vec<Vec<Step>>,
    full: Vec<Step>,
    /// full-range plan without negation checks, used for grounding
    positive_only: Vec<Step>,
}

pub(crate) struct State {
    pub(crate) interner: Interner,
    rels: Vec<Relation>,
    preds: Vec<Pred>,
    pred_ids: HashMap<Pred, usize>,
    numeric_bound: Option<i64>,
    pub(crate) truncated: bool,
}

impl State {
    pub(crate) fn new(store: &FactStore, numeric_bound: Option<i64>) -> State {
        let mut s = State {
            interner: Interner::default(),
            rels: Vec::new(),
            preds: Vec::new(),
            pred_ids: HashMap::new(),
            numeric_bound,
            truncated: false,
        };
        for a in store.atoms() {
            s.insert_atom(&a);
        }
        s
    }

    pub(crate) fn rel_id(&mut self, p: &Pred) -> usize {
        if let Some(&i) = self.pred_ids.get(p) {
            return i;
        }
        self.rels.push(Relation::default());
        self.preds.push(p.clone());
        self.pred_ids.insert(p.clone(), self.rels.len() - 1);
        self.rels.len() - 1
    }

    pub(crate) fn insert_atom(&mut self, a: &GroundAtom) -> bool {
        let r = self.rel_id(&a.pred);
        let t: Tuple = a.args.iter().map(|c| self.interner.id(c)).collect();
        self.rels[r].insert(t)
    }

    pub(crate) fn len(&self) -> usize {
        self.rels.iter().map(|r| r.rows.len()).sum()
    }

    pub(crate) fn to_store(&self) -> FactStore {
        let mut out = FactStore::new();
        for (p, r) in self.preds.iter().zip(&self.rels) {
            for row in &r.rows {
                out.insert(
                    p,
                    row.iter().map(|&i| self.interner.get(i).clone()).collect(),
                );
            }
        }
        out
    }

    pub(crate) fn compile(&mut self, rule: &Rule, index: usize) -> Result<CompiledRule, EvalError> {
        let rule = normalize_rule(rule).map_err(|e| EvalError::Invalid(e.to_string()))?;
        let mut names: Vec<String> = Vec::new();
        let slot = |v: &str, names: &mut Vec<String>| -> usize {
            match names.iter().position(|n| n == v) {
                Some(i) => i,
                None => {
                    names.push(v.to_string());
                    names.len() - 1
                }
            }
        };
        let atom_slots = |a: &crate::ast::Atom, names: &mut Vec<String>| -> Vec<usize> {
            a.args
                .iter()
                .map(|t| slot(t.as_var().expect("normalized"), names))
                .collect()
        };
        let head = atom_slots(&rule.head, &mut names);
        let pos: Vec<(usize, Vec<usize>)> = rule
            .positive
            .iter()
            .map(|a| (self.rel_id(&a.pred), atom_slots(a, &mut names)))
            .collect();
        let neg: Vec<(usize, Vec<usize>)> = rule
            .negative
            .iter()
            .map(|a| (self.rel_id(&a.pred), atom_slots(a, &mut names)))
            .collect();
        let conjuncts: Vec<CExpr> = rule
            .filter
            .conjuncts()
            .into_iter()
            .map(|e| self.compile_expr(e, &mut names))
            .collect::<Result<_, _>>()?;
        let head_rel = self.rel_id(&rule.head.pred);
        let nslots = names.len();
        let plan = |delta: Option<usize>, with_neg: bool| -> Result<Vec<Step>, EvalError> {
            plan(
                &pos,
                if with_neg { &neg } else { &[] },
                &conjuncts,
                &head,
                nslots,
                delta,
            )
            .map_err(|s| EvalError::Unsafe {
                rule: index + 1,
                var: names[s].clone(),
            })
        };
        let variants = (0..pos.len())
            .map(|j| plan(Some(j), true))
            .collect::<Result<_, _>>()?;
        let full = plan(None, true)?;
        let positive_only = plan(None, false)?;
        Ok(CompiledRule {
            head_rel,
            head,
            pos,
            neg,
            nslots,
            var_names: names.clone(),
            variants,
            full,
            positive_only,
        })
    }

    fn compile_expr(
        &mut self,
        e: &FilterExpr,
        names: &mut Vec<String>,
    ) -> Result<CExpr, EvalError> {
        Ok(match e {
            FilterExpr::Top => CExpr::Top,
            FilterExpr::Bottom => CExpr::Bottom,
            FilterExpr::And(v) => CExpr::And(
                v.iter()
                    .map(|x| self.compile_expr(x, names))
                    .collect::<Result<_, _>>()?,
            ),
            FilterExpr::Or(v) => CExpr::Or(
                v.iter()
                    .map(|x| self.compile_expr(x, names))
                    .collect::<Result<_, _>>()?,
            ),
            FilterExpr::Atom(a) => {
                let slots: Vec<usize> = a
                    .args
                    .iter()
                    .map(|t| {
                        let v = t.as_var().expect("normalized");
                        match names.iter().position(|n| **n == **v) {
                            Some(i) => i,
                            None => {
                                names.push(v.to_string());
                                names.len() - 1
                            }
                        }
                    })
                    .collect();
                CExpr::Atom(match Builtin::of(&a.pred) {
                    Some(Builtin::EqConst(c)) => {
                        CAtom::Builtin(CB::EqConst(self.interner.id(&c)), slots)
                    }
                    Some(Builtin::Eq) => CAtom::Builtin(CB::Eq, slots),
                    Some(Builtin::Leq(c)) => CAtom::Builtin(CB::Leq(c), slots),
                    Some(Builtin::Succ) => CAtom::Builtin(CB::Add(1), slots),
                    Some(Builtin::PlusConst(d)) => CAtom::Builtin(CB::Add(d), slots),
                    Some(Builtin::Plus) => CAtom::Builtin(CB::Plus, slots),
                    None => CAtom::Custom(self.rel_id(&a.pred), slots),
                })
            }
        })
    }

    /// Brings every index used by `steps` up to date.
    fn prepare(&mut self, steps: &[Step]) {
        for s in steps {
            if let Step::Scan { rel, cols, .. } = s {
                if !cols.is_empty() {
                    self.rels[*rel].ensure_index(cols);
                }
            }
        }
    }

    /// Runs one plan, calling `emit` with the variable slots of each match.
    fn run(&mut self, steps: &[Step], nslots: usize, emit: &mut dyn FnMut(&[u32])) {
        self.prepare(steps);
        let mut env = vec![u32::MAX; nslots];
        let State {
            interner,
            rels,
            numeric_bound,
            truncated,
            ..
        } = self;
        let mut ctx = Exec {
            interner,
            rels,
            numeric_bound: *numeric_bound,
            truncated,
        };
        ctx.step(steps, 0, &mut env, emit);
    }

    /// Least fixpoint of `rules` on top of the current relations. Returns
    /// the number of rounds.
    pub(crate) fn fixpoint(
        &mut self,
        rules: &[&CompiledRule],
        firings: &mut [u64],
        rule_ids: &[usize],
        opts: &EvalOptions,
    ) -> Result<u64, EvalError> {
        for r in &mut self.rels {
            r.old_end = 0;
            r.cur_end = r.rows.len();
        }
        let mut round = 0u64;
        loop {
            round += 1;
            if opts.max_rounds.is_some_and(|m| round > m) {
                return Err(EvalError::StepCap { rounds: round - 1 });
            }
            for r in &mut self.rels {
                r.cur_end = r.rows.len();
            }
            let mut any_new = false;
            for (k, cr) in rules.iter().enumerate() {
                let mut out: Vec<Tuple> = Vec::new();
                let mut count = 0u64;
                {
                    let mut emit = |env: &[u32]| {
                        count += 1;
                        out.push(cr.head.iter().map(|&s| env[s]).collect());
                    };
                    match opts.strategy {
                        Strategy::SemiNaive if !cr.pos.is_empty() => {
                            for (j, steps) in cr.variants.iter().enumerate() {
                                let rel = &self.rels[cr.pos[j].0];
                                if rel.cur_end > rel.old_end {
                                    self.run(steps, cr.nslots, &mut emit);
                                }
                            }
                        }
                        Strategy::SemiNaive => {
                            if round == 1 {
                                self.run(&cr.full, cr.nslots, &mut emit);
                            }
                        }
                        Strategy::Naive => self.run(&cr.full, cr.nslots, &mut emit),
                    }
                }
                firings[rule_ids[k]] += count;
                let head = &mut self.rels[cr.head_rel];
                for t in out {
                    any_new |= head.insert(t);
                }
            }
            for r in &mut self.rels {
                r.old_end = r.cur_end;
            }
            if opts.max_facts.is_some_and(|m| self.len() > m) {
                return Err(EvalError::FactCap { facts: self.len() });
            }
            if !any_new {
                return Ok(round);
            }
        }
    }

    /// Ground instances of a rule whose positive atoms hold in the current
    /// relations; filters are evaluated and dropped.
    pub(crate) fn instances(
        &mut self,
        cr: &CompiledRule,
    ) -> Vec<(GroundAtom, Vec<GroundAtom>, Vec<GroundAtom>)> {
        for r in &mut self.rels {
            r.cur_end = r.rows.len();
            r.old_end = 0;
        }
        let mut envs: Vec<Vec<u32>> = Vec::new();
        self.run(&cr.positive_only, cr.nslots, &mut |env: &[u32]| {
            envs.push(env.to_vec())
        });
        let atom = |s: &State, rel: usize, slots: &[usize], env: &[u32]| {
            GroundAtom::new(
                s.preds[rel].clone(),
                slots
                    .iter()
                    .map(|&i| s.interner.get(env[i]).clone())
                    .collect(),
            )
        };
        envs.iter()
            .map(|env| {
                (
                    atom(self, cr.head_rel, &cr.head, env),
                    cr.pos.iter().map(|(r, s)| atom(self, *r, s, env)).collect(),
                    cr.neg.iter().map(|(r, s)| atom(self, *r, s, env)).collect(),
                )
            })
            .collect()
    }
}

impl CompiledRule {
    #[allow(dead_code)]
    pub(crate) fn var_names(&self) -> &[String] {
        &self.var_names
    }
}

/// Orders the body of one rule. Returns the slot of an unbound variable if
/// the rule cannot be evaluated.
fn plan(
    pos: &[(usize, Vec<usize>)],
    neg: &[(usize, Vec<usize>)],
    conjuncts: &[CExpr],
    head: &[usize],
    nslots: usize,
    delta: Option<usize>,
) -> Result<Vec<Step>, usize> {
    let mut bound = vec![false; nslots];
    let mut steps = Vec::new();
    let mut pending: Vec<&CExpr> = conjuncts.iter().collect();
    let mut negs: Vec<&(usize, Vec<usize>)> = neg.iter().collect();
    let mut remaining: Vec<usize> = (0..pos.len()).collect();
    let range = |i: usize| match delta {
        None => RangeKind::Full,
        Some(j) if i < j => RangeKind::Old,
        Some(j) if i == j => RangeKind::Delta,
        Some(_) => RangeKind::Full,
    };
    let scan = |i: usize, bound: &mut Vec<bool>, steps: &mut Vec<Step>| {
        let (rel, slots) = &pos[i];
        let mut cols = Vec::new();
        let mut key = Vec::new();
        let mut free = Vec::new();
        for (c, &s) in slots.iter().enumerate() {
            if bound[s] {
                cols.push(c);
                key.push(s);
            } else if !free.iter().any(|&(_, f)| f == s) {
                free.push((c, s));
            } else {
                // repeated variable within one atom: test against the first
                cols.push(c);
                key.push(s);
            }
        }
        for &(_, s) in &free {
            bound[s] = true;
        }
        steps.push(Step::Scan {
            rel: *rel,
            range: range(i),
            cols,
            key,
            free,
        });
    };
    if let Some(j) = delta {
        scan(j, &mut bound, &mut steps);
        remaining.retain(|&i| i != j);
    }
    loop {
        loop {
            let mut progress = false;
            let mut k = 0;
            while k < pending.len() {
                let e = pending[k];
                let mut s = Vec::new();
                e.slots(&mut s);
                let unbound: Vec<usize> = s.iter().copied().filter(|&x| !bound[x]).collect();
                if unbound.is_empty() {
                    steps.push(Step::Test(e.clone()));
                    pending.remove(k);
                    progress = true;
                    continue;
                }
                if let CExpr::Atom(CAtom::Builtin(b, slots)) = e {
                    let mut distinct = unbound.clone();
                    distinct.dedup();
                    if distinct.len() == 1 && !matches!(b, CB::Leq(_)) {
                        let target = slots.iter().position(|&x| x == distinct[0]).unwrap();
                        let single_occurrence =
                            slots.iter().filter(|&&x| x == distinct[0]).count() == 1;
                        if single_occurrence {
                            steps.push(Step::Bind {
                                b: b.clone(),
                                slots: slots.clone(),
                                target,
                            });
                            bound[distinct[0]] = true;
                            pending.remove(k);
                            progress = true;
                            continue;
                        }
                    }
                }
                k += 1;
            }
            let mut k = 0;
            while k < negs.len() {
                if negs[k].1.iter().all(|&x| bound[x]) {
                    steps.push(Step::Neg {
                        rel: negs[k].0,
                        slots: negs[k].1.clone(),
                    });
                    negs.remove(k);
                    progress = true;
                } else {
                    k += 1;
                }
            }
            if !progress {
                break;
            }
        }
        if remaining.is_empty() {
            break;
        }
        let best = *remaining
            .iter()
            .max_by_key(|&&i| {
                (
                    pos[i].1.iter().filter(|&&s| bound[s]).count(),
                    std::cmp::Reverse(i),
                )
            })
            .unwrap();
        scan(best, &mut bound, &mut steps);
        remaining.retain(|&i| i != best);
    }
    let mut missing: Vec<usize> = Vec::new();
    for e in &pending {
        e.slots(&mut missing);
    }
    for (_, s) in &negs {
        missing.extend(s);
    }
    missing.extend(head);
    match missing.into_iter().find(|&s| !bound[s]) {
        Some(s) => Err(s),
        None => Ok(steps),
    }
}

struct Exec<'a> {
    interner: &'a mut Interner,
    rels: &'a [Relation],
    numeric_bound: Option<i64>,
    truncated: &'a mut bool,
}

impl Exec<'_> {
    fn int_result(&mut self, v: Option<i64>) -> Option<u32> {
        let v = v?;
        if self.numeric_bound.is_some_and(|b| v.abs() > b) {
            *self.truncated = true;
            return None;
        }
        Some(self.interner.id(&Const::Int(v)))
    }

    fn test_builtin(&self, b: &CB, slots: &[usize], env: &[u32]) -> bool {
        let int = |k: usize| self.interner.int(env[slots[k]]);
        match b {
            CB::EqConst(c) => env[slots[0]] == *c,
            CB::Eq => env[slots[0]] == env[slots[1]],
            CB::Leq(c) => int(0).is_some_and(|x| x <= *c),
            CB::Add(d) => {
                matches!((int(0), int(1)), (Some(x), Some(z)) if x.checked_add(*d) == Some(z))
            }
            CB::Plus => {
                matches!((int(0), int(1), int(2)), (Some(x), Some(y), Some(z)) if x.checked_add(y) == Some(z))
            }
        }
    }

    fn test(&self, e: &CExpr, env: &[u32]) -> bool {
        match e {
            CExpr::Top => true,
            CExpr::Bottom => false,
            CExpr::Atom(CAtom::Builtin(b, s)) => self.test_builtin(b, s, env),
            CExpr::Atom(CAtom::Custom(rel, s)) => {
                let key: Tuple = s.iter().map(|&i| env[i]).collect();
                self.rels[*rel].set.contains(&key)
            }
            CExpr::And(v) => v.iter().all(|x| self.test(x, env)),
            CExpr::Or(v) => v.iter().any(|x| self.test(x, env)),
        }
    }

    fn bind(&mut self, b: &CB, slots: &[usize], target: usize, env: &[u32]) -> Option<u32> {
        let int = |interner: &Interner, k: usize| interner.int(env[slots[k]]);
        match (b, target) {
            (CB::EqConst(c), _) => Some(*c),
            (CB::Eq, 0) => Some(env[slots[1]]),
            (CB::Eq, _) => Some(env[slots[0]]),
            (CB::Add(d), 1) => {
                let v = int(self.interner, 0).and_then(|x| x.checked_add(*d));
                self.int_result(v)
            }
            (CB::Add(d), _) => {
                let v = int(self.interner, 1).and_then(|z| z.checked_sub(*d));
                self.int_result(v)
            }
            (CB::Plus, 2) => {
                let v = int(self.interner, 0)
                    .zip(int(self.interner, 1))
                    .and_then(|(x, y)| x.checked_add(y));
                self.int_result(v)
            }
            (CB::Plus, 1) => {
                let v = int(self.interner, 2)
                    .zip(int(self.interner, 0))
                    .and_then(|(z, x)| z.checked_sub(x));
                self.int_result(v)
            }
            (CB::Plus, _) => {
                let v = int(self.interner, 2)
                    .zip(int(self.interner, 1))
                    .and_then(|(z, y)| z.checked_sub(y));
                self.int_result(v)
            }
            (CB::Leq(_), _) => None,
        }
    }

    fn step(&mut self, steps: &[Step], k: usize, env: &mut Vec<u32>, emit: &mut dyn FnMut(&[u32])) {
        let Some(s) = steps.get(k) else {
            emit(env);
            return;
        };
        match s {
            Step::Scan {
                rel,
                range,
                cols,
                key,
                free,
            } => {
                let r = &self.rels[*rel];
                let (lo, hi) = match range {
                    RangeKind::Old => (0, r.old_end),
                    RangeKind::Delta => (r.old_end, r.cur_end),
                    RangeKind::Full => (0, r.cur_end),
                };
                if cols.is_empty() {
                    for i in lo..hi {
                        let row = &self.rels[*rel].rows[i];
                        for &(c, s) in free {
                            env[s] = row[c];
                        }
                        self.step(steps, k + 1, env, emit);
                    }
                } else {
                    let probe: Tuple = key.iter().map(|&s| env[s]).collect();
                    let Some(ids) = r.indexes[cols].map.get(&probe) else {
                        return;
                    };
                    let start = ids.partition_point(|&i| (i as usize) < lo);
                    let end = ids.partition_point(|&i| (i as usize) < hi);
                    for &i in &ids[start..end] {
                        let row = &self.rels[*rel].rows[i as usize];
                        for &(c, s) in free {
                            env[s] = row[c];
                        }
                        self.step(steps, k + 1, env, emit);
                    }
                }
            }
            Step::Bind { b, slots, target } => {
                if let Some(v) = self.bind(b, slots, *target, env) {
                    env[slots[*target]] = v;
                    self.step(steps, k + 1, env, emit);
                }
            }
            Step::Test(e) => {
                if self.test(e, env) {
                    self.step(steps, k + 1, env, emit);
                }
            }
            Step::Neg { rel, slots } => {
                let key: Tuple = slots.iter().map(|&i| env[i]).collect();
                if !self.rels[*rel].set.contains(&key) {
                    self.step(steps, k + 1, env, emit);
                }
            }
        }
    }
}

/// Compiles all rules of a program against a fresh state.
pub(crate) fn compile_program(
    program: &Program,
    state: &mut State,
) -> Result<Vec<CompiledRule>, EvalError> {
    program
        .rules
        .iter()
        .enumerate()
        .map(|(i, r)| state.compile(r, i))
        .collect()
}
