//! Terms, atoms, rules and programs.
//!
//! Everything here is plain immutable data. Predicates are identified by
//! `(name, arity)`; built-in filter predicates carry their constant parameter
//! inside the name, e.g. `eq_const[a]` or `leq[5]`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::filter::HornTheory;

pub type Symbol = Arc<str>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Const {
    Int(i64),
    Sym(Symbol),
}

impl Const {
    pub fn sym(s: &str) -> Const {
        Const::Sym(Arc::from(s))
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Const::Int(i) => Some(*i),
            Const::Sym(_) => None,
        }
    }

    /// Reads a constant the way it would appear in program text.
    pub fn parse(text: &str) -> Option<Const> {
        let text = text.trim();
        if let Ok(i) = text.parse::<i64>() {
            return Some(Const::Int(i));
        }
        if text.len() >= 2 && text.starts_with('"') && text.ends_with('"') {
            return unescape(&text[1..text.len() - 1]).map(|s| Const::Sym(Arc::from(s)));
        }
        if is_plain_symbol(text) {
            return Some(Const::sym(text));
        }
        None
    }
}

fn unescape(s: &str) -> Option<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next()? {
                'n' => out.push('\n'),
                't' => out.push('\t'),
                other => out.push(other),
            },
            '"' => return None,
            c => out.push(c),
        }
    }
    Some(out)
}

/// True for symbols that can be written without quotes.
pub fn is_plain_symbol(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && s != "not"
}

impl Const {
    /// Always-quoted string form, as used for file names and souffle symbols.
    pub fn quoted(&self) -> String {
        match self {
            Const::Int(i) => format!("\"{i}\""),
            Const::Sym(s) if is_plain_symbol(s) => format!("\"{s}\""),
            c => c.to_string(),
        }
    }
}

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const::Int(i) => write!(f, "{i}"),
            Const::Sym(s) if is_plain_symbol(s) => write!(f, "{s}"),
            Const::Sym(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\t' => f.write_str("\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Symbol),
    Const(Const),
    /// Arithmetic sum; only present before normalization.
    Add(Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Arc::from(name))
    }

    pub fn sym(name: &str) -> Term {
        Term::Const(Const::sym(name))
    }

    pub fn int(i: i64) -> Term {
        Term::Const(Const::Int(i))
    }

    pub fn as_var(&self) -> Option<&Symbol> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) => true,
            Term::Add(a, b) => a.is_ground() && b.is_ground(),
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<Symbol>) {
        match self {
            Term::Var(v) => out.push(v.clone()),
            Term::Const(_) => {}
            Term::Add(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

pub fn is_variable_name(s: &str) -> bool {
    match s.chars().next() {
        Some(c) => c.is_ascii_uppercase() || c == '_' || c == '?',
        None => false,
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "{c}"),
            Term::Add(a, b) => write!(f, "{a} + {b}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pred {
    pub name: Symbol,
    pub arity: usize,
}

impl Pred {
    pub fn new(name: &str, arity: usize) -> Pred {
        Pred {
            name: Arc::from(name),
            arity,
        }
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// Filter predicates whose extension is known without facts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Builtin {
    /// `eq_const[c](x)`: x = c
    EqConst(Const),
    /// `eq(x, y)`: x = y
    Eq,
    /// `leq[c](x)`: x <= c, integers only
    Leq(i64),
    /// `succ(x, z)`: z = x + 1
    Succ,
    /// `plus[d](x, z)`: z = x + d
    PlusConst(i64),
    /// `plus(x, y, z)`: z = x + y
    Plus,
}

impl Builtin {
    pub fn of(pred: &Pred) -> Option<Builtin> {
        let name: &str = &pred.name;
        let (base, param) = match name.find('[') {
            Some(i) if name.ends_with(']') => (&name[..i], Some(&name[i + 1..name.len() - 1])),
            Some(_) => return None,
            None => (name, None),
        };
        let b = match (base, param) {
            ("eq_const", Some(p)) => Builtin::EqConst(Const::parse(p)?),
            ("eq", None) => Builtin::Eq,
            ("leq", Some(p)) => Builtin::Leq(p.trim().parse().ok()?),
            ("succ", None) => Builtin::Succ,
            ("plus", Some(p)) => Builtin::PlusConst(p.trim().parse().ok()?),
            ("plus", None) => Builtin::Plus,
            _ => return None,
        };
        (b.arity() == pred.arity).then_some(b)
    }

    pub fn arity(&self) -> usize {
        match self {
            Builtin::EqConst(_) | Builtin::Leq(_) => 1,
            Builtin::Eq | Builtin::Succ | Builtin::PlusConst(_) => 2,
            Builtin::Plus => 3,
        }
    }

    pub fn pred(&self) -> Pred {
        let name = match self {
            Builtin::EqConst(c) => format!("eq_const[{c}]"),
            Builtin::Eq => "eq".to_string(),
            Builtin::Leq(c) => format!("leq[{c}]"),
            Builtin::Succ => "succ".to_string(),
            Builtin::PlusConst(d) => format!("plus[{d}]"),
            Builtin::Plus => "plus".to_string(),
        };
        Pred::new(&name, self.arity())
    }

    /// Integer constants mentioned by the predicate name.
    pub fn numeric_constants(&self) -> Vec<i64> {
        match self {
            Builtin::EqConst(Const::Int(i)) | Builtin::Leq(i) | Builtin::PlusConst(i) => vec![*i],
            Builtin::Succ => vec![1],
            _ => vec![],
        }
    }
}

/// Name of the built-in with canonical `+d` spelling (`succ` for d = 1).
pub fn add_const_pred(d: i64) -> Pred {
    if d == 1 {
        Builtin::Succ.pred()
    } else {
        Builtin::PlusConst(d).pred()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: Pred,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(name: &str, args: Vec<Term>) -> Atom {
        Atom {
            pred: Pred::new(name, args.len()),
            args,
        }
    }

    pub fn from_pred(pred: Pred, args: Vec<Term>) -> Atom {
        Atom { pred, args }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn vars(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        for t in &self.args {
            t.collect_vars(&mut out);
        }
        out
    }

    pub fn ground_tuple(&self) -> Option<Vec<Const>> {
        self.args
            .iter()
            .map(|t| match t {
                Term::Const(c) => Some(c.clone()),
                _ => None,
            })
            .collect()
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred.name)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Generalised filter expression over rule variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FilterExpr {
    Top,
    Bottom,
    Atom(Atom),
    And(Vec<FilterExpr>),
    Or(Vec<FilterExpr>),
}

impl FilterExpr {
    pub fn and(parts: Vec<FilterExpr>) -> FilterExpr {
        FilterExpr::And(parts).simplify()
    }

    /// Conjoins `other` onto `self`, flattening the top-level conjunction.
    pub fn conjoin(self, other: FilterExpr) -> FilterExpr {
        let mut parts = match self {
            FilterExpr::Top => Vec::new(),
            FilterExpr::And(v) => v,
            e => vec![e],
        };
        match other {
            FilterExpr::Top => {}
            FilterExpr::And(v) => parts.extend(v),
            e => parts.push(e),
        }
        match parts.len() {
            0 => FilterExpr::Top,
            1 => parts.pop().unwrap(),
            _ => FilterExpr::And(parts),
        }
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            FilterExpr::Atom(a) => out.push(a),
            FilterExpr::And(v) | FilterExpr::Or(v) => v.iter().for_each(|e| e.collect_atoms(out)),
            FilterExpr::Top | FilterExpr::Bottom => {}
        }
    }

    /// Conjuncts at the top level; a non-conjunction is its own single conjunct.
    pub fn conjuncts(&self) -> Vec<&FilterExpr> {
        match self {
            FilterExpr::Top => Vec::new(),
            FilterExpr::And(v) => v.iter().flat_map(|e| e.conjuncts()).collect(),
            e => vec![e],
        }
    }

    pub fn has_disjunction(&self) -> bool {
        match self {
            FilterExpr::Or(_) => true,
            FilterExpr::And(v) => v.iter().any(FilterExpr::has_disjunction),
            _ => false,
        }
    }

    /// Applies the unit and idempotence laws without reordering.
    ///
    /// Nested connectives of the same kind are flattened and repeated
    /// children keep their first position.
    pub fn simplify(&self) -> FilterExpr {
        match self {
            FilterExpr::Top | FilterExpr::Bottom | FilterExpr::Atom(_) => self.clone(),
            FilterExpr::And(children) => {
                let mut out: Vec<FilterExpr> = Vec::new();
                for c in children {
                    match c.simplify() {
                        FilterExpr::Bottom => return FilterExpr::Bottom,
                        FilterExpr::Top => {}
                        FilterExpr::And(v) => {
                            for x in v {
                                if !out.contains(&x) {
                                    out.push(x);
                                }
                            }
                        }
                        x => {
                            if !out.contains(&x) {
                                out.push(x);
                            }
                        }
                    }
                }
                match out.len() {
                    0 => FilterExpr::Top,
                    1 => out.pop().unwrap(),
                    _ => FilterExpr::And(out),
                }
            }
            FilterExpr::Or(children) => {
                let mut out: Vec<FilterExpr> = Vec::new();
                for c in children {
                    match c.simplify() {
                        FilterExpr::Top => return FilterExpr::Top,
                        FilterExpr::Bottom => {}
                        FilterExpr::Or(v) => {
                            for x in v {
                                if !out.contains(&x) {
                                    out.push(x);
                                }
                            }
                        }
                        x => {
                            if !out.contains(&x) {
                                out.push(x);
                            }
                        }
                    }
                }
                match out.len() {
                    0 => FilterExpr::Bottom,
                    1 => out.pop().unwrap(),
                    _ => FilterExpr::Or(out),
                }
            }
        }
    }

    pub fn map_atoms(&self, f: &mut impl FnMut(&Atom) -> FilterExpr) -> FilterExpr {
        match self {
            FilterExpr::Top => FilterExpr::Top,
            FilterExpr::Bottom => FilterExpr::Bottom,
            FilterExpr::Atom(a) => f(a),
            FilterExpr::And(v) => FilterExpr::And(v.iter().map(|e| e.map_atoms(f)).collect()),
            FilterExpr::Or(v) => FilterExpr::Or(v.iter().map(|e| e.map_atoms(f)).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub head: Atom,
    pub positive: Vec<Atom>,
    pub negative: Vec<Atom>,
    pub filter: FilterExpr,
}

impl Rule {
    pub fn new(head: Atom, positive: Vec<Atom>) -> Rule {
        Rule {
            head,
            positive,
            negative: Vec::new(),
            filter: FilterExpr::Top,
        }
    }

    pub fn with_filter(mut self, filter: FilterExpr) -> Rule {
        self.filter = filter;
        self
    }

    pub fn with_negative(mut self, negative: Vec<Atom>) -> Rule {
        self.negative = negative;
        self
    }

    /// Variables in order of first appearance: head, positive, negative, filter.
    pub fn vars(&self) -> Vec<Symbol> {
        let mut all = self.head.vars();
        for a in self.positive.iter().chain(&self.negative) {
            all.extend(a.vars());
        }
        for a in self.filter.atoms() {
            all.extend(a.vars());
        }
        let mut seen = BTreeSet::new();
        all.retain(|v| seen.insert(v.clone()));
        all
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FactBinding {
    pub pred: Pred,
    pub path: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub rules: Vec<Rule>,
    /// Ground facts written inline in the program text.
    pub facts: Vec<Atom>,
    pub outputs: Vec<Pred>,
    /// Declared (non built-in) filter predicates.
    pub filters: Vec<Pred>,
    pub theory: HornTheory,
    pub fact_files: Vec<FactBinding>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PredClass {
    Edb,
    Idb,
    Filter,
}

impl Program {
    pub fn is_filter(&self, pred: &Pred) -> bool {
        Builtin::of(pred).is_some() || self.filters.contains(pred)
    }

    pub fn class_of(&self, pred: &Pred) -> PredClass {
        if self.is_filter(pred) {
            PredClass::Filter
        } else if self.rules.iter().any(|r| &r.head.pred == pred) {
            PredClass::Idb
        } else {
            PredClass::Edb
        }
    }

    /// IDB predicates that also receive facts from outside the rules
    /// (inline facts or `@facts` bindings).
    pub fn seeded_predicates(&self) -> BTreeSet<Pred> {
        let idb = idb_predicates(self);
        self.facts
            .iter()
            .map(|a| a.pred.clone())
            .chain(self.fact_files.iter().map(|b| b.pred.clone()))
            .filter(|p| idb.contains(p))
            .collect()
    }

    /// Filter predicates used by rules, declarations or the theory.
    pub fn filter_predicates(&self) -> BTreeSet<Pred> {
        let mut out: BTreeSet<Pred> = self.filters.iter().cloned().collect();
        for r in &self.rules {
            for a in r.filter.atoms() {
                out.insert(a.pred.clone());
            }
        }
        out.extend(self.theory.predicates());
        out
    }

    pub fn has_negation(&self) -> bool {
        self.rules.iter().any(|r| !r.negative.is_empty())
    }

    /// Every predicate that occurs anywhere in rules or facts.
    pub fn predicates(&self) -> BTreeSet<Pred> {
        let mut out = BTreeSet::new();
        for r in &self.rules {
            out.insert(r.head.pred.clone());
            for a in r.positive.iter().chain(&r.negative) {
                out.insert(a.pred.clone());
            }
            for a in r.filter.atoms() {
                out.insert(a.pred.clone());
            }
        }
        out.extend(self.facts.iter().map(|a| a.pred.clone()));
        out
    }
}

/// Predicates occurring in some rule head.
pub fn idb_predicates(program: &Program) -> BTreeSet<Pred> {
    program.rules.iter().map(|r| r.head.pred.clone()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    ArityMismatch { pred: Pred, found: usize },
    UnsafeVariable(Symbol),
    FilterInHead(Pred),
    FilterInBody(Pred),
    NonFilterInFilterExpr(Pred),
    NonGroundFact(Atom),
    FactForFilter(Pred),
    UnknownOutput(Pred),
    NonNumericSum,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Zero-based rule index, if the violation belongs to a rule.
    pub rule: Option<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(i) = self.rule {
            write!(f, "rule {}: ", i + 1)?;
        }
        match &self.kind {
            ViolationKind::ArityMismatch { pred, found } => {
                write!(f, "arity mismatch for {pred}: {found} arguments")
            }
            ViolationKind::UnsafeVariable(v) => write!(f, "unsafe variable {v}"),
            ViolationKind::FilterInHead(p) => write!(f, "filter in head: {p}"),
            ViolationKind::FilterInBody(p) => write!(f, "filter predicate {p} used as a body atom"),
            ViolationKind::NonFilterInFilterExpr(p) => {
                write!(f, "non-filter predicate {p} inside a filter expression")
            }
            ViolationKind::NonGroundFact(a) => write!(f, "non-ground fact {a}"),
            ViolationKind::FactForFilter(p) => write!(f, "fact for filter predicate {p}"),
            ViolationKind::UnknownOutput(p) => {
                write!(f, "output {p} does not occur in the program")
            }
            ViolationKind::NonNumericSum => write!(f, "arithmetic over a non-numeric constant"),
        }
    }
}

/// Checks the structural invariants of a program and reports every violation.
pub fn validate(program: &Program) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let arity_check = |rule: Option<usize>, a: &Atom, out: &mut Vec<Violation>| {
        if a.args.len() != a.pred.arity {
            out.push(Violation {
                rule,
                kind: ViolationKind::ArityMismatch {
                    pred: a.pred.clone(),
                    found: a.args.len(),
                },
            });
        }
    };
    for (i, r) in program.rules.iter().enumerate() {
        let ri = Some(i);
        arity_check(ri, &r.head, &mut out);
        if program.is_filter(&r.head.pred) {
            out.push(Violation {
                rule: ri,
                kind: ViolationKind::FilterInHead(r.head.pred.clone()),
            });
        }
        for a in r.positive.iter().chain(&r.negative) {
            arity_check(ri, a, &mut out);
            if program.is_filter(&a.pred) {
                out.push(Violation {
                    rule: ri,
                    kind: ViolationKind::FilterInBody(a.pred.clone()),
                });
            }
        }
        for a in r.filter.atoms() {
            arity_check(ri, a, &mut out);
            if !program.is_filter(&a.pred) {
                out.push(Violation {
                    rule: ri,
                    kind: ViolationKind::NonFilterInFilterExpr(a.pred.clone()),
                });
            }
        }
        match crate::normalize::normalize_rule(r) {
            Ok(nr) => {
                for v in unsafe_variables(&nr) {
                    // fresh variables only stand in for terms of the original rule
                    if r.vars().contains(&v) {
                        out.push(Violation {
                            rule: ri,
                            kind: ViolationKind::UnsafeVariable(v),
                        });
                    }
                }
            }
            Err(_) => out.push(Violation {
                rule: ri,
                kind: ViolationKind::NonNumericSum,
            }),
        }
    }
    for a in &program.facts {
        arity_check(None, a, &mut out);
        if !a.is_ground() {
            out.push(Violation {
                rule: None,
                kind: ViolationKind::NonGroundFact(a.clone()),
            });
        }
        if program.is_filter(&a.pred) {
            out.push(Violation {
                rule: None,
                kind: ViolationKind::FactForFilter(a.pred.clone()),
            });
        }
    }
    let preds = program.predicates();
    for p in &program.outputs {
        if !preds.contains(p) {
            out.push(Violation {
                rule: None,
                kind: ViolationKind::UnknownOutput(p.clone()),
            });
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Variables a rule cannot bind.
///
/// Positive body atoms bind their variables. Top-level built-in conjuncts
/// then bind further variables when enough of their arguments are known:
/// `x = c` binds x, `x = y` and the `+d` forms bind either side from the
/// other, and `z = x + y` binds any one argument from the other two.
pub fn unsafe_variables(rule: &Rule) -> Vec<Symbol> {
    let bound = bound_variables(rule);
    rule.vars()
        .into_iter()
        .filter(|v| !bound.contains(v))
        .collect()
}

pub fn bound_variables(rule: &Rule) -> BTreeSet<Symbol> {
    let mut bound: BTreeSet<Symbol> = BTreeSet::new();
    for a in &rule.positive {
        for t in &a.args {
            if let Term::Var(v) = t {
                bound.insert(v.clone());
            }
        }
    }
    let conjuncts: Vec<&Atom> = rule
        .filter
        .conjuncts()
        .into_iter()
        .filter_map(|e| match e {
            FilterExpr::Atom(a) => Some(a),
            _ => None,
        })
        .collect();
    loop {
        let mut changed = false;
        for a in &conjuncts {
            let Some(b) = Builtin::of(&a.pred) else {
                continue;
            };
            let unbound: Vec<&Symbol> = a
                .args
                .iter()
                .filter_map(|t| t.as_var())
                .filter(|v| !bound.contains(*v))
                .collect();
            let can_bind = match b {
                Builtin::Leq(_) => false,
                Builtin::Plus => unbound.len() == 1,
                _ => unbound.len() == 1,
            };
            if can_bind
                && a.args
                    .iter()
                    .all(|t| matches!(t, Term::Var(_) | Term::Const(_)))
            {
                bound.insert(unbound[0].clone());
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    bound
}

/// Groups rules by head predicate, keeping program order within a group.
pub fn rules_by_head(program: &Program) -> BTreeMap<Pred, Vec<usize>> {
    let mut out: BTreeMap<Pred, Vec<usize>> = BTreeMap::new();
    for (i, r) in program.rules.iter().enumerate() {
        out.entry(r.head.pred.clone()).or_default().push(i);
    }
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    fn v(n: &str) -> Term {
        Term::var(n)
    }

    pub(crate) fn example2() -> Program {
        let r4 = Rule::new(
            Atom::new("r", vec![v("X"), v("Y"), v("N")]),
            vec![Atom::new("e", vec![v("X"), v("Y")])],
        )
        .with_filter(FilterExpr::Atom(Atom::from_pred(
            Builtin::EqConst(Const::Int(0)).pred(),
            vec![v("N")],
        )));
        let r5 = Rule::new(
            Atom::new("r", vec![v("X"), v("Z"), v("M")]),
            vec![
                Atom::new("r", vec![v("X"), v("Y"), v("N")]),
                Atom::new("e", vec![v("Y"), v("Z")]),
            ],
        )
        .with_filter(FilterExpr::Atom(Atom::from_pred(
            Builtin::Succ.pred(),
            vec![v("N"), v("M")],
        )));
        let r6 = Rule::new(
            Atom::new("out", vec![v("Y")]),
            vec![Atom::new("r", vec![v("X"), v("Y"), v("N")])],
        )
        .with_filter(FilterExpr::And(vec![
            FilterExpr::Atom(Atom::from_pred(
                Builtin::EqConst(Const::sym("a")).pred(),
                vec![v("X")],
            )),
            FilterExpr::Atom(Atom::from_pred(Builtin::Leq(5).pred(), vec![v("N")])),
        ]));
        Program {
            rules: vec![r4, r5, r6],
            outputs: vec![Pred::new("out", 1)],
            ..Default::default()
        }
    }

    #[test]
    fn idb_of_example2() {
        let idb = idb_predicates(&example2());
        let expected: BTreeSet<Pred> = [Pred::new("r", 3), Pred::new("out", 1)]
            .into_iter()
            .collect();
        assert_eq!(idb, expected);
    }

    #[test]
    fn idb_of_empty_and_single() {
        assert!(idb_predicates(&Program::default()).is_empty());
        let p = Program {
            rules: vec![Rule::new(
                Atom::new("q", vec![v("X")]),
                vec![Atom::new("e", vec![v("X")])],
            )],
            ..Default::default()
        };
        assert_eq!(
            idb_predicates(&p).into_iter().collect::<Vec<_>>(),
            vec![Pred::new("q", 1)]
        );
    }

    #[test]
    fn example2_validates() {
        assert_eq!(validate(&example2()), Ok(()));
    }

    #[test]
    fn unsafe_head_variable() {
        let r = Rule::new(Atom::new("out", vec![v("Y")]), vec![]).with_filter(FilterExpr::Atom(
            Atom::from_pred(Builtin::EqConst(Const::sym("a")).pred(), vec![v("X")]),
        ));
        let p = Program {
            rules: vec![r],
            ..Default::default()
        };
        let errs = validate(&p).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].to_string(), "rule 1: unsafe variable Y");
    }

    #[test]
    fn filter_in_head() {
        let r = Rule::new(
            Atom::new("f", vec![v("X")]),
            vec![Atom::new("e", vec![v("X")])],
        );
        let p = Program {
            rules: vec![r],
            filters: vec![Pred::new("f", 1)],
            ..Default::default()
        };
        let errs = validate(&p).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| e.kind == ViolationKind::FilterInHead(Pred::new("f", 1))));
        assert!(errs[0].to_string().contains("filter in head"));
    }

    #[test]
    fn builtin_names_round_trip() {
        for b in [
            Builtin::EqConst(Const::sym("a")),
            Builtin::EqConst(Const::Int(-3)),
            Builtin::EqConst(Const::sym("Hello world")),
            Builtin::Eq,
            Builtin::Leq(5),
            Builtin::Succ,
            Builtin::PlusConst(7),
            Builtin::Plus,
        ] {
            assert_eq!(Builtin::of(&b.pred()), Some(b));
        }
        assert_eq!(Builtin::of(&Pred::new("leq[5]", 2)), None);
        assert_eq!(Builtin::of(&Pred::new("oddLen", 1)), None);
    }

    #[test]
    fn constant_display_quotes_when_needed() {
        assert_eq!(Const::sym("abc").to_string(), "abc");
        assert_eq!(Const::sym("Abc").to_string(), "\"Abc\"");
        assert_eq!(Const::sym("a \"b\"").to_string(), "\"a \\\"b\\\"\"");
        assert_eq!(Const::parse("\"a \\\"b\\\"\""), Some(Const::sym("a \"b\"")));
    }

    #[test]
    fn filter_simplify_keeps_order() {
        let a = FilterExpr::Atom(Atom::new("f", vec![v("X")]));
        let b = FilterExpr::Atom(Atom::new("g", vec![v("X")]));
        let e = FilterExpr::And(vec![
            FilterExpr::Top,
            b.clone(),
            FilterExpr::And(vec![a.clone(), b.clone()]),
        ]);
        assert_eq!(e.simplify(), FilterExpr::And(vec![b.clone(), a.clone()]));
        let o = FilterExpr::Or(vec![FilterExpr::Bottom, a.clone(), a.clone()]);
        assert_eq!(o.simplify(), a);
        assert_eq!(
            FilterExpr::Or(vec![a, FilterExpr::Top]).simplify(),
            FilterExpr::Top
        );
    }
}
