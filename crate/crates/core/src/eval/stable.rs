//! Ground programs, the reduct and stable models by enumeration.

use std::collections::BTreeSet;
use std::fmt;

use crate::ast::Program;

use super::seminaive::{compile_program, State};
use super::{strip_negation, EvalError, EvalOptions, FactStore, GroundAtom};

/// Integers produced by arithmetic during grounding stay within this bound.
const GROUND_NUMERIC_BOUND: i64 = 64;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroundRule {
    pub head: GroundAtom,
    pub positive: Vec<GroundAtom>,
    pub negative: Vec<GroundAtom>,
}

impl fmt::Display for GroundRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        let body: Vec<String> = self
            .positive
            .iter()
            .map(ToString::to_string)
            .chain(self.negative.iter().map(|a| format!("not {a}")))
            .collect();
        if !body.is_empty() {
            write!(f, " :- {}", body.join(", "))?;
        }
        f.write_str(".")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroundProgram {
    pub rules: BTreeSet<GroundRule>,
}

impl GroundProgram {
    pub fn heads(&self) -> BTreeSet<GroundAtom> {
        self.rules.iter().map(|r| r.head.clone()).collect()
    }
}

/// Instances of the program's rules whose positive bodies are derivable
/// when negation is ignored. Filters are evaluated away.
pub fn ground(program: &Program, store: &FactStore) -> Result<GroundProgram, EvalError> {
    let base = store.with_program_facts(program);
    let mut state = State::new(&base, Some(GROUND_NUMERIC_BOUND));
    let positive = strip_negation(program);
    let over = compile_program(&positive, &mut state)?;
    let refs: Vec<_> = over.iter().collect();
    let ids: Vec<usize> = (0..over.len()).collect();
    let mut firings = vec![0; over.len()];
    state.fixpoint(&refs, &mut firings, &ids, &EvalOptions::default())?;
    let compiled = compile_program(program, &mut state)?;
    let mut rules = BTreeSet::new();
    for cr in &compiled {
        for (head, positive, negative) in state.instances(cr) {
            rules.insert(GroundRule {
                head,
                positive,
                negative,
            });
        }
    }
    if state.truncated {
        return Err(EvalError::DomainBound {
            bound: GROUND_NUMERIC_BOUND,
        });
    }
    Ok(GroundProgram { rules })
}

/// Drops the rules blocked by `candidate` and the negative literals of the rest.
pub fn reduct(gp: &GroundProgram, candidate: &BTreeSet<GroundAtom>) -> GroundProgram {
    let rules = gp
        .rules
        .iter()
        .filter(|r| r.negative.iter().all(|a| !candidate.contains(a)))
        .map(|r| GroundRule {
            head: r.head.clone(),
            positive: r.positive.clone(),
            negative: Vec::new(),
        })
        .collect();
    GroundProgram { rules }
}

/// Least model of the positive part of `gp` on top of `base`.
pub fn least_model(gp: &GroundProgram, base: &BTreeSet<GroundAtom>) -> BTreeSet<GroundAtom> {
    let mut model = base.clone();
    loop {
        let before = model.len();
        for r in &gp.rules {
            if !model.contains(&r.head) && r.positive.iter().all(|a| model.contains(a)) {
                model.insert(r.head.clone());
            }
        }
        if model.len() == before {
            return model;
        }
    }
}

/// All stable models of the program over `store`, each including the input
/// facts. Enumerates truth assignments to the derivable atoms that occur
/// negatively; more than `atom_cap` of them is an error.
pub fn stable_models(
    program: &Program,
    store: &FactStore,
    atom_cap: usize,
) -> Result<Vec<BTreeSet<GroundAtom>>, EvalError> {
    let gp = ground(program, store)?;
    let base = store.with_program_facts(program).atom_set();
    let heads = gp.heads();
    let open: Vec<GroundAtom> = gp
        .rules
        .iter()
        .flat_map(|r| r.negative.iter())
        .filter(|a| heads.contains(*a) && !base.contains(*a))
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if open.len() > atom_cap || open.len() >= 63 {
        return Err(EvalError::TooManyAtoms {
            atoms: open.len(),
            cap: atom_cap,
        });
    }
    let mut models = BTreeSet::new();
    for mask in 0u64..(1u64 << open.len()) {
        let mut guess = base.clone();
        guess.extend(
            open.iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, a)| a.clone()),
        );
        let m = least_model(&reduct(&gp, &guess), &base);
        let consistent = open
            .iter()
            .enumerate()
            .all(|(i, a)| (mask >> i & 1 == 1) == m.contains(a));
        if consistent {
            models.insert(m);
        }
    }
    Ok(models.into_iter().collect())
}
