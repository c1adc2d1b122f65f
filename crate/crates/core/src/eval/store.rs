use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use crate::ast::{Atom, Const, Pred, Program, Term};
use crate::parser::{load_facts_path, FactError, FactFile};

/// A variable-free atom.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub pred: Pred,
    pub args: Vec<Const>,
}

impl GroundAtom {
    pub fn new(pred: Pred, args: Vec<Const>) -> GroundAtom {
        GroundAtom { pred, args }
    }

    pub fn from_atom(a: &Atom) -> Option<GroundAtom> {
        Some(GroundAtom {
            pred: a.pred.clone(),
            args: a.ground_tuple()?,
        })
    }

    pub fn to_atom(&self) -> Atom {
        Atom::from_pred(
            self.pred.clone(),
            self.args.iter().cloned().map(Term::Const).collect(),
        )
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_atom())
    }
}

/// A set of facts grouped by predicate.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FactStore {
    relations: BTreeMap<Pred, BTreeSet<Vec<Const>>>,
}

impl FactStore {
    pub fn new() -> FactStore {
        FactStore::default()
    }

    pub fn insert(&mut self, pred: &Pred, tuple: Vec<Const>) -> bool {
        debug_assert_eq!(tuple.len(), pred.arity);
        self.relations
            .entry(pred.clone())
            .or_default()
            .insert(tuple)
    }

    pub fn insert_atom(&mut self, a: &GroundAtom) -> bool {
        self.insert(&a.pred, a.args.clone())
    }

    pub fn add_file(&mut self, f: &FactFile) {
        for row in &f.rows {
            self.insert(&f.pred, row.clone());
        }
    }

    pub fn contains(&self, pred: &Pred, tuple: &[Const]) -> bool {
        self.relations.get(pred).is_some_and(|r| r.contains(tuple))
    }

    pub fn contains_atom(&self, a: &GroundAtom) -> bool {
        self.contains(&a.pred, &a.args)
    }

    pub fn relation(&self, pred: &Pred) -> impl Iterator<Item = &Vec<Const>> {
        self.relations.get(pred).into_iter().flatten()
    }

    pub fn count(&self, pred: &Pred) -> usize {
        self.relations.get(pred).map_or(0, BTreeSet::len)
    }

    pub fn predicates(&self) -> impl Iterator<Item = &Pred> {
        self.relations.keys().filter(|p| self.count(p) > 0)
    }

    pub fn len(&self) -> usize {
        self.relations.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn atoms(&self) -> impl Iterator<Item = GroundAtom> + '_ {
        self.relations
            .iter()
            .flat_map(|(p, r)| r.iter().map(move |t| GroundAtom::new(p.clone(), t.clone())))
    }

    pub fn atom_set(&self) -> BTreeSet<GroundAtom> {
        self.atoms().collect()
    }

    pub fn from_atoms<'a>(atoms: impl IntoIterator<Item = &'a GroundAtom>) -> FactStore {
        let mut s = FactStore::new();
        for a in atoms {
            s.insert_atom(a);
        }
        s
    }

    pub fn extend(&mut self, other: &FactStore) {
        for a in other.atoms() {
            self.insert_atom(&a);
        }
    }

    /// Facts of the given predicates only.
    pub fn restrict<'a>(&self, preds: impl IntoIterator<Item = &'a Pred>) -> FactStore {
        let mut out = FactStore::new();
        for p in preds {
            if let Some(r) = self.relations.get(p) {
                out.relations.insert(p.clone(), r.clone());
            }
        }
        out
    }

    /// The store plus the program's inline facts.
    pub fn with_program_facts(&self, program: &Program) -> FactStore {
        let mut s = self.clone();
        for f in &program.facts {
            if let Some(g) = GroundAtom::from_atom(f) {
                s.insert_atom(&g);
            }
        }
        s
    }

    /// Loads every `@facts` binding, resolving paths against `base`.
    pub fn load_bindings(program: &Program, base: &Path) -> Result<FactStore, FactError> {
        let mut s = FactStore::new();
        for b in &program.fact_files {
            s.add_file(&load_facts_path(&base.join(&b.path), &b.pred)?);
        }
        Ok(s)
    }

    /// Sorted CSV rendering of one relation.
    pub fn to_csv(&self, pred: &Pred) -> String {
        let mut out = String::new();
        for t in self.relation(pred) {
            let fields: Vec<String> = t.iter().map(csv_field).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

fn csv_field(c: &Const) -> String {
    match c {
        Const::Int(i) => i.to_string(),
        Const::Sym(s) if s.contains([',', '"', '\n']) || s.parse::<i64>().is_ok() => {
            format!("\"{}\"", s.replace('"', "\"\""))
        }
        Const::Sym(s) => s.to_string(),
    }
}
