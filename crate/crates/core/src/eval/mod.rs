//! Reference evaluator: semi-naive bottom-up evaluation, stratified
//! negation, ground programs and brute-force stable models.

mod seminaive;
mod stable;
mod store;

use std::collections::BTreeSet;

use crate::ast::{Builtin, Const, Pred, Program, Rule};
use crate::engine::{build_dependency_graph, FilterAssignment, Sign};
use crate::filter::{Dnf, FAtom};

use seminaive::{compile_program, State};

pub use stable::{ground, least_model, reduct, stable_models, GroundProgram, GroundRule};
pub use store::{FactStore, GroundAtom};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Naive,
    SemiNaive,
}

#[derive(Clone, Debug)]
pub struct EvalOptions {
    pub strategy: Strategy,
    /// Rounds per stratum before giving up.
    pub max_rounds: Option<u64>,
    pub max_facts: Option<usize>,
    /// Arithmetic results with a larger absolute value are dropped.
    pub numeric_bound: Option<i64>,
    /// Treat negated atoms as absent from the body.
    pub ignore_negation: bool,
}

impl Default for EvalOptions {
    fn default() -> EvalOptions {
        EvalOptions {
            strategy: Strategy::SemiNaive,
            max_rounds: Some(10_000),
            max_facts: Some(50_000_000),
            numeric_bound: None,
            ignore_negation: false,
        }
    }
}

impl EvalOptions {
    pub fn with_max_rounds(mut self, rounds: Option<u64>) -> EvalOptions {
        self.max_rounds = rounds;
        self
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> EvalOptions {
        self.strategy = strategy;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("{0}")]
    Invalid(String),
    #[error("rule {rule}: variable {var} is not bound by a positive atom")]
    Unsafe { rule: usize, var: String },
    #[error("program uses negation; use stratified or stable-model evaluation")]
    Negation,
    #[error("program is not stratified: {pred} depends negatively on itself")]
    NotStratifiable { pred: Pred },
    #[error("non-terminating under cap: no fixpoint after {rounds} rounds")]
    StepCap { rounds: u64 },
    #[error("fact cap exceeded: {facts} facts")]
    FactCap { facts: usize },
    #[error("grounding needs integers beyond +/-{bound}")]
    DomainBound { bound: i64 },
    #[error("{atoms} undetermined ground atoms exceed the cap of {cap}")]
    TooManyAtoms { atoms: usize, cap: usize },
}

/// Result of a bottom-up evaluation.
#[derive(Clone, Debug)]
pub struct Model {
    /// Input facts and everything derived.
    pub facts: FactStore,
    /// Number of body matches per rule, in rule order.
    pub firings: Vec<u64>,
    /// Rounds summed over strata, including the final one that derives nothing.
    pub rounds: u64,
}

impl Model {
    pub fn total_firings(&self) -> u64 {
        self.firings.iter().sum()
    }

    /// Facts of the program's output predicates.
    pub fn outputs(&self, program: &Program) -> FactStore {
        self.facts.restrict(&program.outputs)
    }
}

fn strip_negation(program: &Program) -> Program {
    let mut p = program.clone();
    for r in &mut p.rules {
        r.negative.clear();
    }
    p
}

/// Least model of a negation-free program over `store` plus the program's
/// inline facts.
pub fn evaluate(
    program: &Program,
    store: &FactStore,
    opts: &EvalOptions,
) -> Result<Model, EvalError> {
    if opts.ignore_negation {
        return evaluate(
            &strip_negation(program),
            store,
            &EvalOptions {
                ignore_negation: false,
                ..opts.clone()
            },
        );
    }
    if program.has_negation() {
        return Err(EvalError::Negation);
    }
    let mut state = State::new(&store.with_program_facts(program), opts.numeric_bound);
    let compiled = compile_program(program, &mut state)?;
    let mut firings = vec![0; compiled.len()];
    let refs: Vec<_> = compiled.iter().collect();
    let ids: Vec<usize> = (0..compiled.len()).collect();
    let rounds = state.fixpoint(&refs, &mut firings, &ids, opts)?;
    Ok(Model {
        facts: state.to_store(),
        firings,
        rounds,
    })
}

/// Rule indices grouped by stratum, lowest first.
pub fn strata(program: &Program) -> Result<Vec<Vec<usize>>, EvalError> {
    let g = build_dependency_graph(program);
    let mut out = Vec::new();
    for scc in g.sccs().into_iter().rev() {
        if g.has_internal_edge(&scc, Sign::Neg) {
            return Err(EvalError::NotStratifiable {
                pred: scc[0].clone(),
            });
        }
        let rules: Vec<usize> = (0..program.rules.len())
            .filter(|&i| scc.contains(&program.rules[i].head.pred))
            .collect();
        if !rules.is_empty() {
            out.push(rules);
        }
    }
    Ok(out)
}

/// Perfect model of a stratified program.
pub fn stratified_evaluate(
    program: &Program,
    store: &FactStore,
    opts: &EvalOptions,
) -> Result<Model, EvalError> {
    if opts.ignore_negation || !program.has_negation() {
        return evaluate(program, store, opts);
    }
    let strata = strata(program)?;
    let mut state = State::new(&store.with_program_facts(program), opts.numeric_bound);
    let compiled = compile_program(program, &mut state)?;
    let mut firings = vec![0; compiled.len()];
    let mut rounds = 0;
    for s in &strata {
        let refs: Vec<_> = s.iter().map(|&i| &compiled[i]).collect();
        rounds += state.fixpoint(&refs, &mut firings, s, opts)?;
    }
    Ok(Model {
        facts: state.to_store(),
        firings,
        rounds,
    })
}

/// Truth of a filter atom on constants; non built-ins are looked up in `store`.
pub fn filter_holds(pred: &Pred, args: &[Const], store: &FactStore) -> bool {
    let int = |k: usize| args[k].as_int();
    match Builtin::of(pred) {
        Some(Builtin::EqConst(c)) => args[0] == c,
        Some(Builtin::Eq) => args[0] == args[1],
        Some(Builtin::Leq(c)) => int(0).is_some_and(|x| x <= c),
        Some(Builtin::Succ) => {
            matches!((int(0), int(1)), (Some(x), Some(z)) if x.checked_add(1) == Some(z))
        }
        Some(Builtin::PlusConst(d)) => {
            matches!((int(0), int(1)), (Some(x), Some(z)) if x.checked_add(d) == Some(z))
        }
        Some(Builtin::Plus) => {
            matches!((int(0), int(1), int(2)), (Some(x), Some(y), Some(z)) if x.checked_add(y) == Some(z))
        }
        None => store.contains(pred, args),
    }
}

/// Whether a tuple satisfies a filter over its argument positions.
pub fn satisfies(dnf: &Dnf, tuple: &[Const], store: &FactStore) -> bool {
    let atom = |a: &FAtom| {
        let args: Vec<Const> = a
            .args
            .iter()
            .map(|&m| tuple[m as usize - 1].clone())
            .collect();
        filter_holds(&a.pred, &args, store)
    };
    dnf.disjuncts().any(|c| c.iter().all(atom))
}

/// Keeps the atoms of `atoms` that are input facts, non-IDB, or satisfy the
/// computed filter of their predicate.
pub fn filter_atoms(
    atoms: &BTreeSet<GroundAtom>,
    assignment: &FilterAssignment,
    program: &Program,
    store: &FactStore,
) -> BTreeSet<GroundAtom> {
    let idb = crate::ast::idb_predicates(program);
    atoms
        .iter()
        .filter(|a| {
            store.contains_atom(a)
                || !idb.contains(&a.pred)
                || assignment
                    .get(&a.pred)
                    .is_none_or(|d| satisfies(d, &a.args, store))
        })
        .cloned()
        .collect()
}

/// Checks a single rule for evaluability without running it.
pub fn check_rule(rule: &Rule) -> Result<(), EvalError> {
    let mut state = State::new(&FactStore::new(), None);
    state.compile(rule, 0).map(|_| ())
}

#[cfg(test)]
mod tests;
