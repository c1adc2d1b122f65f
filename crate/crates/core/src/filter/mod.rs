//! Filter formulas over positional markers.
//!
//! A marker `i` (1-based) refers to argument position `i` of some context
//! atom. Formulas are positive boolean combinations of filter atoms whose
//! arguments are markers. [`Dnf`] is the canonical representation used by
//! the fixpoint engine; [`Formula`] is the general tree form.

mod theory;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::ast::{Atom, Builtin, FilterExpr, Symbol, Term};

pub use theory::{
    auto_theory, instantiate_order_theory, numeric_filter_constants, Closure, HornTheory,
    TheoryError, TheoryRule,
};

pub use crate::ast::Pred;

/// A filter atom over positional markers, e.g. `leq[5](3)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FAtom {
    pub pred: Pred,
    pub args: Vec<u32>,
}

impl FAtom {
    pub fn new(pred: Pred, args: Vec<u32>) -> FAtom {
        FAtom { pred, args }
    }

    pub fn max_marker(&self) -> u32 {
        self.args.iter().copied().max().unwrap_or(0)
    }
}

fn marker(i: u32) -> String {
    format!("{i}\u{302}")
}

impl fmt::Display for FAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = |k: usize| marker(self.args[k]);
        match Builtin::of(&self.pred) {
            Some(Builtin::EqConst(c)) => write!(f, "{}\u{2250}{c}", m(0)),
            Some(Builtin::Eq) => write!(f, "{}\u{2250}{}", m(0), m(1)),
            Some(Builtin::Leq(c)) => write!(f, "{}\u{2264}{c}", m(0)),
            Some(Builtin::Succ) => write!(f, "{}\u{2250}{}+1", m(1), m(0)),
            Some(Builtin::PlusConst(d)) => write!(f, "{}\u{2250}{}+{d}", m(1), m(0)),
            Some(Builtin::Plus) => write!(f, "{}\u{2250}{}+{}", m(2), m(0), m(1)),
            None => {
                write!(f, "{}(", self.pred.name)?;
                for k in 0..self.args.len() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    f.write_str(&m(k))?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Top,
    Bottom,
    Atom(FAtom),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("formula too large: DNF exceeds {cap} disjuncts")]
pub struct CapExceeded {
    pub cap: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FilterError {
    #[error("arity mismatch: formula uses marker {marker} but the atom has {arity} arguments")]
    ArityMismatch { marker: u32, arity: usize },
    #[error("filter atom argument {0} is not a variable")]
    NonVariable(String),
    #[error("entailment mode precondition violated: {0}")]
    ModePrecondition(&'static str),
    #[error(transparent)]
    Cap(#[from] CapExceeded),
}

impl Formula {
    pub fn atom(pred: Pred, args: Vec<u32>) -> Formula {
        Formula::Atom(FAtom::new(pred, args))
    }

    pub fn and(parts: Vec<Formula>) -> Formula {
        Formula::And(parts)
    }

    pub fn or(parts: Vec<Formula>) -> Formula {
        Formula::Or(parts)
    }

    pub fn atoms(&self) -> BTreeSet<FAtom> {
        let mut out = BTreeSet::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut BTreeSet<FAtom>) {
        match self {
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::And(v) | Formula::Or(v) => v.iter().for_each(|f| f.collect(out)),
            _ => {}
        }
    }

    pub fn max_marker(&self) -> u32 {
        self.atoms()
            .iter()
            .map(FAtom::max_marker)
            .max()
            .unwrap_or(0)
    }

    /// Unit laws, flattening, duplicate removal and canonical child order.
    /// `Top` and `Bottom` survive only at the root.
    pub fn simplify(&self) -> Formula {
        match self {
            Formula::Top | Formula::Bottom | Formula::Atom(_) => self.clone(),
            Formula::And(children) => {
                let mut out = BTreeSet::new();
                for c in children {
                    match c.simplify() {
                        Formula::Bottom => return Formula::Bottom,
                        Formula::Top => {}
                        Formula::And(v) => out.extend(v),
                        x => {
                            out.insert(x);
                        }
                    }
                }
                collapse(out, Formula::Top, Formula::And)
            }
            Formula::Or(children) => {
                let mut out = BTreeSet::new();
                for c in children {
                    match c.simplify() {
                        Formula::Top => return Formula::Top,
                        Formula::Bottom => {}
                        Formula::Or(v) => out.extend(v),
                        x => {
                            out.insert(x);
                        }
                    }
                }
                collapse(out, Formula::Bottom, Formula::Or)
            }
        }
    }

    pub fn is_conjunctive(&self) -> bool {
        match self {
            Formula::Or(v) => v.len() <= 1 && v.iter().all(Formula::is_conjunctive),
            Formula::And(v) => v.iter().all(Formula::is_conjunctive),
            _ => true,
        }
    }

    /// Expands into disjunctive normal form, failing once more than `cap`
    /// disjuncts would be needed.
    pub fn to_dnf(&self, cap: Option<usize>) -> Result<Dnf, CapExceeded> {
        match self {
            Formula::Top => Ok(Dnf::top()),
            Formula::Bottom => Ok(Dnf::bottom()),
            Formula::Atom(a) => Ok(Dnf::conj([a.clone()])),
            Formula::Or(v) => {
                let mut acc = Dnf::bottom();
                for c in v {
                    acc.0.extend(c.to_dnf(cap)?.0);
                    check_cap(acc.0.len(), cap)?;
                }
                Ok(acc)
            }
            Formula::And(v) => {
                let mut acc = Dnf::top();
                for c in v {
                    acc = acc.and(&c.to_dnf(cap)?, cap)?;
                }
                Ok(acc)
            }
        }
    }

    /// Atoms shared by every disjunct: a conjunction entailed by `self`.
    /// Used as the sound fallback when DNF expansion is too large.
    pub fn common_atoms(&self) -> Dnf {
        match self {
            Formula::Top => Dnf::top(),
            Formula::Bottom => Dnf::bottom(),
            Formula::Atom(a) => Dnf::conj([a.clone()]),
            Formula::And(v) => {
                let mut acc: BTreeSet<FAtom> = BTreeSet::new();
                for c in v {
                    match c.common_atoms().single() {
                        None => return Dnf::bottom(),
                        Some(s) => acc.extend(s),
                    }
                }
                Dnf::conj(acc)
            }
            Formula::Or(v) => {
                let mut acc: Option<BTreeSet<FAtom>> = None;
                for c in v {
                    if let Some(s) = c.common_atoms().single() {
                        acc = Some(match acc {
                            None => s,
                            Some(a) => a.intersection(&s).cloned().collect(),
                        });
                    }
                }
                match acc {
                    None => Dnf::bottom(),
                    Some(s) => Dnf::conj(s),
                }
            }
        }
    }

    pub fn map_markers(&self, f: &impl Fn(u32) -> u32) -> Formula {
        match self {
            Formula::Top => Formula::Top,
            Formula::Bottom => Formula::Bottom,
            Formula::Atom(a) => Formula::Atom(FAtom::new(
                a.pred.clone(),
                a.args.iter().map(|&m| f(m)).collect(),
            )),
            Formula::And(v) => Formula::And(v.iter().map(|x| x.map_markers(f)).collect()),
            Formula::Or(v) => Formula::Or(v.iter().map(|x| x.map_markers(f)).collect()),
        }
    }

    /// Evaluates with every atom mapped to a fixed truth value.
    pub fn eval(&self, truth: &impl Fn(&FAtom) -> bool) -> bool {
        match self {
            Formula::Top => true,
            Formula::Bottom => false,
            Formula::Atom(a) => truth(a),
            Formula::And(v) => v.iter().all(|x| x.eval(truth)),
            Formula::Or(v) => v.iter().any(|x| x.eval(truth)),
        }
    }
}

fn collapse(set: BTreeSet<Formula>, empty: Formula, wrap: fn(Vec<Formula>) -> Formula) -> Formula {
    let mut v: Vec<Formula> = set.into_iter().collect();
    match v.len() {
        0 => empty,
        1 => v.pop().unwrap(),
        _ => wrap(v),
    }
}

fn check_cap(n: usize, cap: Option<usize>) -> Result<(), CapExceeded> {
    match cap {
        Some(c) if n > c => Err(CapExceeded { cap: c }),
        _ => Ok(()),
    }
}

fn paren(f: &Formula) -> String {
    match f {
        Formula::Or(v) if v.len() > 1 => format!("({f})"),
        Formula::And(v) if v.len() > 1 => format!("({f})"),
        _ => f.to_string(),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Top => f.write_str("\u{22a4}"),
            Formula::Bottom => f.write_str("\u{22a5}"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::And(v) => {
                let parts: Vec<String> = v.iter().map(paren).collect();
                f.write_str(&parts.join(" \u{2227} "))
            }
            Formula::Or(v) => {
                let parts: Vec<String> = v.iter().map(paren).collect();
                f.write_str(&parts.join(" \u{2228} "))
            }
        }
    }
}

pub type Conj = BTreeSet<FAtom>;

/// A formula in disjunctive normal form: a set of conjunctions.
///
/// The empty set is ⊥; a set containing the empty conjunction is ⊤.
/// Ordering of atoms and disjuncts comes from the `BTreeSet`s, which gives
/// the canonical order (predicate name, arity, markers) for free.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dnf(pub BTreeSet<Conj>);

impl Dnf {
    pub fn bottom() -> Dnf {
        Dnf(BTreeSet::new())
    }

    pub fn top() -> Dnf {
        Dnf([Conj::new()].into_iter().collect())
    }

    pub fn conj<I: IntoIterator<Item = FAtom>>(atoms: I) -> Dnf {
        Dnf([atoms.into_iter().collect::<Conj>()].into_iter().collect())
    }

    pub fn is_bottom(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_top(&self) -> bool {
        self.0.iter().any(BTreeSet::is_empty)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn disjuncts(&self) -> impl Iterator<Item = &Conj> {
        self.0.iter()
    }

    /// The atom set of a single-disjunct DNF; `None` for ⊥.
    ///
    /// For several disjuncts this is their intersection, i.e. the
    /// conjunction they all entail propositionally.
    pub fn single(&self) -> Option<Conj> {
        let mut it = self.0.iter();
        let first = it.next()?.clone();
        Some(it.fold(first, |acc, c| acc.intersection(c).cloned().collect()))
    }

    pub fn and(&self, other: &Dnf, cap: Option<usize>) -> Result<Dnf, CapExceeded> {
        let mut out = BTreeSet::new();
        for a in &self.0 {
            for b in &other.0 {
                out.insert(a.union(b).cloned().collect::<Conj>());
                check_cap(out.len(), cap)?;
            }
        }
        Ok(Dnf(out))
    }

    pub fn or(&self, other: &Dnf) -> Dnf {
        Dnf(self.0.union(&other.0).cloned().collect())
    }

    /// Drops disjuncts that are supersets of other disjuncts.
    pub fn remove_subsumed(&self) -> Dnf {
        let mut by_size: Vec<&Conj> = self.0.iter().collect();
        by_size.sort_by_key(|c| c.len());
        let mut kept: Vec<&Conj> = Vec::new();
        for c in by_size {
            if !kept.iter().any(|k| k.is_subset(c)) {
                kept.push(c);
            }
        }
        Dnf(kept.into_iter().cloned().collect())
    }

    pub fn to_formula(&self) -> Formula {
        let conj = |c: &Conj| -> Formula {
            let mut v: Vec<Formula> = c.iter().cloned().map(Formula::Atom).collect();
            match v.len() {
                0 => Formula::Top,
                1 => v.pop().unwrap(),
                _ => Formula::And(v),
            }
        };
        if self.is_top() {
            return Formula::Top;
        }
        let mut v: Vec<Formula> = self.0.iter().map(conj).collect();
        match v.len() {
            0 => Formula::Bottom,
            1 => v.pop().unwrap(),
            _ => Formula::Or(v),
        }
    }

    pub fn map_markers(&self, f: &impl Fn(u32) -> u32) -> Dnf {
        Dnf(self
            .0
            .iter()
            .map(|c| {
                c.iter()
                    .map(|a| FAtom::new(a.pred.clone(), a.args.iter().map(|&m| f(m)).collect()))
                    .collect()
            })
            .collect())
    }
}

impl fmt::Display for Dnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

pub fn simplify(f: &Formula) -> Formula {
    f.simplify()
}

/// Replaces every marker `i` by the `i`-th argument of `atom`.
pub fn apply_iota(atom: &Atom, formula: &Formula) -> Result<FilterExpr, FilterError> {
    let arity = atom.args.len();
    let term = |m: u32| -> Result<Term, FilterError> {
        if m == 0 || m as usize > arity {
            return Err(FilterError::ArityMismatch { marker: m, arity });
        }
        Ok(atom.args[m as usize - 1].clone())
    };
    Ok(match formula {
        Formula::Top => FilterExpr::Top,
        Formula::Bottom => FilterExpr::Bottom,
        Formula::Atom(a) => FilterExpr::Atom(Atom::from_pred(
            a.pred.clone(),
            a.args.iter().map(|&m| term(m)).collect::<Result<_, _>>()?,
        )),
        Formula::And(v) => FilterExpr::And(
            v.iter()
                .map(|x| apply_iota(atom, x))
                .collect::<Result<_, _>>()?,
        ),
        Formula::Or(v) => FilterExpr::Or(
            v.iter()
                .map(|x| apply_iota(atom, x))
                .collect::<Result<_, _>>()?,
        ),
    })
}

/// Assigns a marker to every variable of a rule, so variable-level
/// expressions can be handled as marker formulas of arity `len()`.
#[derive(Clone, Debug, Default)]
pub struct VarContext {
    index: BTreeMap<Symbol, u32>,
    names: Vec<Symbol>,
}

impl VarContext {
    pub fn new(vars: impl IntoIterator<Item = Symbol>) -> VarContext {
        let mut ctx = VarContext::default();
        for v in vars {
            ctx.marker_of(&v);
        }
        ctx
    }

    pub fn marker_of(&mut self, v: &Symbol) -> u32 {
        if let Some(&m) = self.index.get(v) {
            return m;
        }
        self.names.push(v.clone());
        let m = self.names.len() as u32;
        self.index.insert(v.clone(), m);
        m
    }

    pub fn get(&self, v: &str) -> Option<u32> {
        self.index.get(v).copied()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, m: u32) -> &Symbol {
        &self.names[m as usize - 1]
    }

    /// Converts a filter expression whose arguments are variables.
    pub fn formula_of(&mut self, e: &FilterExpr) -> Result<Formula, FilterError> {
        Ok(match e {
            FilterExpr::Top => Formula::Top,
            FilterExpr::Bottom => Formula::Bottom,
            FilterExpr::Atom(a) => {
                let mut args = Vec::with_capacity(a.args.len());
                for t in &a.args {
                    match t {
                        Term::Var(v) => args.push(self.marker_of(v)),
                        other => return Err(FilterError::NonVariable(other.to_string())),
                    }
                }
                Formula::atom(a.pred.clone(), args)
            }
            FilterExpr::And(v) => Formula::And(
                v.iter()
                    .map(|x| self.formula_of(x))
                    .collect::<Result<_, _>>()?,
            ),
            FilterExpr::Or(v) => Formula::Or(
                v.iter()
                    .map(|x| self.formula_of(x))
                    .collect::<Result<_, _>>()?,
            ),
        })
    }

    pub fn expr_of(&self, f: &Formula) -> FilterExpr {
        match f {
            Formula::Top => FilterExpr::Top,
            Formula::Bottom => FilterExpr::Bottom,
            Formula::Atom(a) => FilterExpr::Atom(Atom::from_pred(
                a.pred.clone(),
                a.args
                    .iter()
                    .map(|&m| Term::Var(self.name(m).clone()))
                    .collect(),
            )),
            Formula::And(v) => FilterExpr::And(v.iter().map(|x| self.expr_of(x)).collect()),
            Formula::Or(v) => FilterExpr::Or(v.iter().map(|x| self.expr_of(x)).collect()),
        }
    }
}

/// Explicit choice of the approximate entailment procedure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntailMode {
    /// `f` a conjunction: forward chaining over the markers.
    Conjunctive,
    /// Linear theory, `g` an atom: backward "necessarily false" set.
    Linear,
    /// Any `f`, `g`: DNF of both, each `f`-disjunct checked by forward chaining.
    General,
}

/// Entailment regime: a Horn theory (empty for plain propositional
/// entailment) and the DNF cap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Regime {
    pub theory: HornTheory,
    pub dnf_cap: Option<usize>,
}

pub const DEFAULT_DNF_CAP: usize = 4096;

impl Default for Regime {
    fn default() -> Self {
        Regime::prop()
    }
}

impl Regime {
    pub fn prop() -> Regime {
        Regime {
            theory: HornTheory::empty(),
            dnf_cap: Some(DEFAULT_DNF_CAP),
        }
    }

    pub fn horn(theory: HornTheory) -> Regime {
        Regime {
            theory,
            dnf_cap: Some(DEFAULT_DNF_CAP),
        }
    }

    pub fn with_cap(mut self, cap: Option<usize>) -> Regime {
        self.dnf_cap = cap;
        self
    }

    pub fn closure(&self, c: &Conj) -> Closure {
        self.theory.closure(c.iter().cloned())
    }

    /// `f |≈ g`, picking the cheapest applicable procedure.
    pub fn entails(&self, f: &Formula, g: &Formula) -> Result<bool, CapExceeded> {
        let f = f.simplify();
        let g = g.simplify();
        if g == Formula::Top || f == Formula::Bottom {
            return Ok(true);
        }
        let mode = if f.is_conjunctive() {
            EntailMode::Conjunctive
        } else if self.theory.is_linear() && matches!(g, Formula::Atom(_)) {
            EntailMode::Linear
        } else {
            EntailMode::General
        };
        match entails_approx(&self.theory, &f, &g, mode, self.dnf_cap) {
            Ok(b) => Ok(b),
            Err(FilterError::Cap(c)) => Err(c),
            Err(e) => unreachable!("mode chosen to satisfy its precondition: {e}"),
        }
    }

    /// True if every disjunct of `f` derives `false` under the theory.
    pub fn is_unsat(&self, f: &Formula) -> Result<bool, CapExceeded> {
        let d = f.simplify().to_dnf(self.dnf_cap)?;
        let all = d.disjuncts().all(|c| self.closure(c).inconsistent);
        Ok(all)
    }

    /// Canonical representation: DNF, closed disjuncts, inconsistent
    /// disjuncts dropped, subsumed disjuncts removed.
    pub fn repr(&self, f: &Formula) -> Repr {
        match f.to_dnf(self.dnf_cap) {
            Ok(d) => Repr {
                dnf: self.repr_dnf(&d),
                weakened: false,
            },
            Err(_) => Repr {
                dnf: self.repr_dnf(&f.common_atoms()),
                weakened: true,
            },
        }
    }

    pub fn repr_dnf(&self, d: &Dnf) -> Dnf {
        let mut out = BTreeSet::new();
        for c in d.disjuncts() {
            let cl = self.closure(c);
            if !cl.inconsistent {
                out.insert(cl.atoms);
            }
        }
        Dnf(out).remove_subsumed()
    }
}

/// Output of [`Regime::repr`]; `weakened` is set when the DNF cap forced the
/// common-atoms fallback.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Repr {
    pub dnf: Dnf,
    pub weakened: bool,
}

/// Propositional entailment between positive formulas.
///
/// `f ⊨ g` iff every disjunct of `f` contains some disjunct of `g`, since
/// the disjuncts of `f` are its minimal models and `g` is monotone.
pub fn entails_prop(f: &Formula, g: &Formula, cap: Option<usize>) -> Result<bool, CapExceeded> {
    let df = f.to_dnf(cap)?;
    let dg = g.to_dnf(cap)?;
    let ok = df
        .disjuncts()
        .all(|c| dg.disjuncts().any(|h| h.is_subset(c)));
    Ok(ok)
}

/// Approximate entailment `f |≈ g` under `theory` with an explicit mode.
pub fn entails_approx(
    theory: &HornTheory,
    f: &Formula,
    g: &Formula,
    mode: EntailMode,
    cap: Option<usize>,
) -> Result<bool, FilterError> {
    if *g == Formula::Top || *f == Formula::Bottom {
        return Ok(true);
    }
    match mode {
        EntailMode::Conjunctive => {
            if !f.is_conjunctive() {
                return Err(FilterError::ModePrecondition("f must be a conjunction"));
            }
            let Some(c) = f.to_dnf(cap)?.single() else {
                return Ok(true);
            };
            let cl = theory.closure(c);
            if cl.inconsistent {
                return Ok(true);
            }
            let dg = g.to_dnf(cap)?;
            let ok = dg.disjuncts().any(|h| h.is_subset(&cl.atoms));
            Ok(ok)
        }
        EntailMode::Linear => {
            let Formula::Atom(target) = g else {
                return Err(FilterError::ModePrecondition("g must be a single atom"));
            };
            if !theory.is_linear() {
                return Err(FilterError::ModePrecondition("theory must be linear"));
            }
            let k = f.max_marker().max(target.max_marker());
            let s = theory.necessarily_false(target, k);
            // The valuation "false on S, true elsewhere" is the largest model
            // of the theory in which g fails; f entails g iff f fails there.
            Ok(!f.eval(&|a| !s.contains(a)))
        }
        EntailMode::General => {
            let df = f.to_dnf(cap)?;
            let dg = g.to_dnf(cap)?;
            let ok = df.disjuncts().all(|c| {
                let cl = theory.closure(c.iter().cloned());
                cl.inconsistent || dg.disjuncts().any(|h| h.is_subset(&cl.atoms))
            });
            Ok(ok)
        }
    }
}

/// Conjunction of all atoms over `positions` entailed by `c` (after closure),
/// renamed so that `positions[i]` becomes marker `i + 1`. `None` if `c` is
/// inconsistent.
pub fn project(regime: &Regime, c: &Conj, positions: &[u32]) -> Option<Conj> {
    let cl = regime.closure(c);
    if cl.inconsistent {
        return None;
    }
    Some(project_closed(&cl.atoms, positions))
}

pub fn project_closed(atoms: &Conj, positions: &[u32]) -> Conj {
    let pos_of = |m: u32| positions.iter().position(|&p| p == m).map(|i| i as u32 + 1);
    atoms
        .iter()
        .filter_map(|a| {
            let args: Option<Vec<u32>> = a.args.iter().map(|&m| pos_of(m)).collect();
            args.map(|args| FAtom::new(a.pred.clone(), args))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Const;

    fn eqc(c: &str, m: u32) -> Formula {
        Formula::atom(Builtin::EqConst(Const::sym(c)).pred(), vec![m])
    }
    fn eqi(c: i64, m: u32) -> Formula {
        Formula::atom(Builtin::EqConst(Const::Int(c)).pred(), vec![m])
    }
    fn leq(c: i64, m: u32) -> Formula {
        Formula::atom(Builtin::Leq(c).pred(), vec![m])
    }
    fn succ(a: u32, b: u32) -> Formula {
        Formula::atom(Builtin::Succ.pred(), vec![a, b])
    }
    fn p(name: &str, m: u32) -> Formula {
        Formula::atom(Pred::new(name, 1), vec![m])
    }
    fn order015() -> HornTheory {
        instantiate_order_theory(&[0, 1, 5].into_iter().collect())
    }

    #[test]
    fn iota_examples() {
        let r = Atom::new("r", vec![Term::var("x"), Term::var("y"), Term::var("n")]);
        let e = apply_iota(&r, &leq(5, 3)).unwrap();
        assert_eq!(
            e,
            FilterExpr::Atom(Atom::from_pred(
                Builtin::Leq(5).pred(),
                vec![Term::var("n")]
            ))
        );
        assert_eq!(apply_iota(&r, &Formula::Top).unwrap(), FilterExpr::Top);
        let both = apply_iota(&r, &Formula::and(vec![eqc("a", 1), leq(5, 3)])).unwrap();
        assert_eq!(crate::emit::render_filter(&both), "x = a, n <= 5");
        assert!(matches!(
            apply_iota(&r, &leq(5, 4)),
            Err(FilterError::ArityMismatch {
                marker: 4,
                arity: 3
            })
        ));
    }

    #[test]
    fn simplify_examples() {
        assert_eq!(
            Formula::and(vec![Formula::Top, eqc("a", 1)]).simplify(),
            eqc("a", 1)
        );
        assert_eq!(
            Formula::or(vec![Formula::Bottom, Formula::Bottom]).simplify(),
            Formula::Bottom
        );
        let a = p("a", 1);
        assert_eq!(
            Formula::and(vec![Formula::or(vec![a.clone(), a.clone()]), Formula::Top]).simplify(),
            a
        );
    }

    #[test]
    fn prop_examples() {
        let (a, b) = (p("a", 1), p("b", 1));
        assert!(entails_prop(&Formula::and(vec![a.clone(), b.clone()]), &a, None).unwrap());
        assert!(entails_prop(&a, &Formula::or(vec![a.clone(), b.clone()]), None).unwrap());
        assert!(!entails_prop(&Formula::or(vec![a.clone(), b.clone()]), &a, None).unwrap());
    }

    #[test]
    fn approx_examples() {
        let t = instantiate_order_theory(&[0, 5].into_iter().collect());
        for mode in [EntailMode::Conjunctive, EntailMode::General] {
            assert!(entails_approx(&t, &eqi(0, 1), &leq(5, 1), mode, None).unwrap());
        }
        let t = order015();
        let f = Formula::and(vec![leq(5, 4), succ(3, 4)]);
        assert!(entails_approx(&t, &f, &leq(5, 3), EntailMode::Conjunctive, None).unwrap());
        assert!(!entails_approx(&t, &f, &leq(1, 3), EntailMode::Conjunctive, None).unwrap());
        assert!(entails_approx(&t, &p("q", 1), &Formula::Top, EntailMode::General, None).unwrap());
        assert!(
            entails_approx(&t, &Formula::Bottom, &p("q", 1), EntailMode::General, None).unwrap()
        );
    }

    #[test]
    fn linear_mode_matches_forward_chaining() {
        // a(x) -> b(x) -> c(x)
        let rule = |h: &str, b: &str| TheoryRule {
            head: Some(Atom::new(h, vec![Term::var("X")])),
            body: vec![Atom::new(b, vec![Term::var("X")])],
        };
        let t = HornTheory::new(vec![rule("b", "a"), rule("c", "b")]).unwrap();
        assert!(t.is_linear());
        let f = Formula::or(vec![p("a", 1), Formula::and(vec![p("b", 1), p("d", 2)])]);
        assert!(entails_approx(&t, &f, &p("c", 1), EntailMode::Linear, None).unwrap());
        assert!(!entails_approx(&t, &f, &p("a", 1), EntailMode::Linear, None).unwrap());
        let g = Formula::or(vec![p("a", 1), p("d", 1)]);
        assert!(!entails_approx(&t, &g, &p("c", 1), EntailMode::Linear, None).unwrap());
        assert!(matches!(
            entails_approx(&order015(), &f, &p("c", 1), EntailMode::Linear, None),
            Err(FilterError::ModePrecondition(_))
        ));
    }

    #[test]
    fn repr_examples() {
        let r = Regime::horn(order015());
        let f = Formula::and(vec![Formula::Top, eqc("a", 1), leq(5, 3)]);
        let expected = Dnf::conj([
            FAtom::new(Builtin::EqConst(Const::sym("a")).pred(), vec![1]),
            FAtom::new(Builtin::Leq(5).pred(), vec![3]),
        ]);
        assert_eq!(r.repr(&f).dnf, expected);
        let (a, b) = (p("a", 1), p("b", 1));
        let pr = Regime::prop();
        assert_eq!(
            pr.repr(&Formula::or(vec![
                a.clone(),
                Formula::and(vec![a.clone(), b])
            ]))
            .dnf,
            pr.repr(&a).dnf
        );
        let t05 = Regime::horn(instantiate_order_theory(&[0, 5].into_iter().collect()));
        let got = t05.repr(&Formula::or(vec![eqi(0, 1), leq(5, 1)])).dnf;
        assert_eq!(
            got,
            Dnf::conj([FAtom::new(Builtin::Leq(5).pred(), vec![1])])
        );
    }

    #[test]
    fn cap_triggers_fallback() {
        // (a1 ∨ b1) ∧ (a2 ∨ b2) ∧ ... has 2^n disjuncts
        let parts: Vec<Formula> = (1..=6)
            .map(|i| Formula::or(vec![p("a", i), Formula::and(vec![p("b", i), p("c", 1)])]))
            .collect();
        let f = Formula::and(parts);
        assert!(f.to_dnf(Some(10)).is_err());
        let r = Regime::prop().with_cap(Some(10));
        let rep = r.repr(&f);
        assert!(rep.weakened);
        assert!(rep.dnf.is_top());
        assert_eq!(Regime::prop().repr(&f).dnf.len(), 64);
    }

    #[test]
    fn display_uses_markers() {
        let f = Formula::and(vec![eqc("a", 1), leq(5, 3)]);
        assert_eq!(
            f.to_string(),
            "1\u{302}\u{2250}a \u{2227} 3\u{302}\u{2264}5"
        );
    }
}
