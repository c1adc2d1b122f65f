//! Program text output in the native syntax and two external dialects.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use crate::ast::{Atom, Builtin, Const, FilterExpr, Pred, Program, Rule, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dialect {
    Generic,
    Clingo,
    Souffle,
}

impl FromStr for Dialect {
    type Err = String;

    fn from_str(s: &str) -> Result<Dialect, String> {
        match s {
            "generic" => Ok(Dialect::Generic),
            "clingo" => Ok(Dialect::Clingo),
            "souffle" => Ok(Dialect::Souffle),
            other => Err(format!(
                "unknown dialect {other} (expected generic, clingo or souffle)"
            )),
        }
    }
}

impl std::fmt::Display for Dialect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Dialect::Generic => "generic",
            Dialect::Clingo => "clingo",
            Dialect::Souffle => "souffle",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EmitError {
    #[error("inexpressible filter predicate {pred} in dialect {dialect}")]
    Inexpressible { pred: Pred, dialect: Dialect },
}

pub fn emit_program(program: &Program, dialect: Dialect) -> Result<String, EmitError> {
    match dialect {
        Dialect::Generic => Ok(emit_generic(program)),
        Dialect::Clingo | Dialect::Souffle => Foreign::new(program, dialect).emit(),
    }
}

fn render_term(t: &Term) -> String {
    match t {
        Term::Add(a, b) => {
            let r = render_term(b);
            let r = if matches!(**b, Term::Add(..)) {
                format!("({r})")
            } else {
                r
            };
            format!("{} + {r}", render_term(a))
        }
        other => other.to_string(),
    }
}

fn render_atom_plain(a: &Atom) -> String {
    if a.args.is_empty() {
        return a.pred.name.to_string();
    }
    let args: Vec<String> = a.args.iter().map(render_term).collect();
    format!("{}({})", a.pred.name, args.join(", "))
}

/// Comparison sugar for a built-in atom when the parser maps it back to the
/// same predicate.
fn sugar(a: &Atom) -> Option<String> {
    let b = Builtin::of(&a.pred)?;
    let v: Vec<&str> = a
        .args
        .iter()
        .map(|t| t.as_var().map(|s| &**s))
        .collect::<Option<_>>()?;
    Some(match b {
        Builtin::EqConst(c) => format!("{} = {c}", v[0]),
        Builtin::Eq => format!("{} = {}", v[0], v[1]),
        Builtin::Leq(c) => format!("{} <= {c}", v[0]),
        Builtin::Succ => format!("{} = {} + 1", v[1], v[0]),
        Builtin::PlusConst(d) if d != 1 => format!("{} = {} + {d}", v[1], v[0]),
        Builtin::Plus => format!("{} = {} + {}", v[2], v[0], v[1]),
        Builtin::PlusConst(_) => return None,
    })
}

pub fn render_atom(a: &Atom) -> String {
    sugar(a).unwrap_or_else(|| render_atom_plain(a))
}

fn render_expr(e: &FilterExpr, nested: bool) -> String {
    match e {
        FilterExpr::Top => "true".into(),
        FilterExpr::Bottom => "false".into(),
        FilterExpr::Atom(a) => render_atom(a),
        FilterExpr::And(parts) => {
            let s = parts
                .iter()
                .map(|p| render_expr(p, true))
                .collect::<Vec<_>>()
                .join(", ");
            if nested {
                format!("({s})")
            } else {
                s
            }
        }
        FilterExpr::Or(alts) => {
            let s = alts
                .iter()
                .map(|p| match p {
                    FilterExpr::Or(_) => render_expr(p, true),
                    _ => render_expr(p, false),
                })
                .collect::<Vec<_>>()
                .join(" ; ");
            format!("({s})")
        }
    }
}

/// A filter as it appears in a rule body, without a trailing period.
pub fn render_filter(e: &FilterExpr) -> String {
    render_expr(e, false)
}

pub fn render_rule(r: &Rule) -> String {
    let mut body: Vec<String> = r.positive.iter().map(render_atom_plain).collect();
    body.extend(
        r.negative
            .iter()
            .map(|a| format!("~{}", render_atom_plain(a))),
    );
    match &r.filter {
        FilterExpr::Top => {}
        f => body.push(render_filter(f)),
    }
    if body.is_empty() {
        body.push("true".into());
    }
    format!("{} :- {}.", render_atom_plain(&r.head), body.join(", "))
}

fn emit_generic(p: &Program) -> String {
    let mut out = String::new();
    for o in &p.outputs {
        let _ = writeln!(out, "@output {o}.");
    }
    for f in p.filters.iter().filter(|f| Builtin::of(f).is_none()) {
        let _ = writeln!(out, "@filter {f}.");
    }
    if !p.theory.is_empty() {
        out.push_str("@theory {\n");
        for r in p.theory.rules() {
            let _ = writeln!(out, "    {r}");
        }
        out.push_str("}\n");
    }
    for b in &p.fact_files {
        let _ = writeln!(out, "@facts {} {}.", b.pred, Const::sym(&b.path).quoted());
    }
    for f in &p.facts {
        let _ = writeln!(out, "{}.", render_atom_plain(f));
    }
    for r in &p.rules {
        let _ = writeln!(out, "{}", render_rule(r));
    }
    out
}

/// Disjunctive normal form of a filter expression as lists of atoms.
fn expr_dnf(e: &FilterExpr) -> Vec<Vec<Atom>> {
    match e {
        FilterExpr::Top => vec![vec![]],
        FilterExpr::Bottom => vec![],
        FilterExpr::Atom(a) => vec![vec![a.clone()]],
        FilterExpr::Or(alts) => alts.iter().flat_map(expr_dnf).collect(),
        FilterExpr::And(parts) => parts.iter().fold(vec![vec![]], |acc, p| {
            let d = expr_dnf(p);
            let mut out = Vec::new();
            for a in &acc {
                for b in &d {
                    let mut c = a.clone();
                    c.extend(b.iter().cloned());
                    out.push(c);
                }
            }
            out
        }),
    }
}

struct Foreign<'a> {
    p: &'a Program,
    dialect: Dialect,
    /// Argument positions known to hold numbers (souffle only).
    numeric: BTreeSet<(Pred, usize)>,
}

impl<'a> Foreign<'a> {
    fn new(p: &'a Program, dialect: Dialect) -> Foreign<'a> {
        let numeric = if dialect == Dialect::Souffle {
            infer_numeric(p)
        } else {
            BTreeSet::new()
        };
        Foreign {
            p,
            dialect,
            numeric,
        }
    }

    fn var(&self, v: &str) -> String {
        match self.dialect {
            Dialect::Clingo => {
                let ok = v
                    .trim_start_matches('_')
                    .starts_with(|c: char| c.is_ascii_uppercase());
                if ok && !v.starts_with('_') {
                    v.to_string()
                } else {
                    format!("V_{}", v.trim_start_matches('?'))
                }
            }
            _ => v.trim_start_matches('?').replace('?', "_").to_string(),
        }
    }

    fn constant(&self, c: &Const) -> String {
        match (c, self.dialect) {
            (Const::Sym(s), Dialect::Souffle) => Const::sym(s).quoted(),
            _ => c.to_string(),
        }
    }

    fn term(&self, t: &Term) -> String {
        match t {
            Term::Var(v) => self.var(v),
            Term::Const(c) => self.constant(c),
            Term::Add(a, b) => format!("({} + {})", self.term(a), self.term(b)),
        }
    }

    fn atom(&self, a: &Atom) -> String {
        let args: Vec<String> = a.args.iter().map(|t| self.term(t)).collect();
        match (args.is_empty(), self.dialect) {
            (true, Dialect::Clingo) => a.pred.name.to_string(),
            _ => format!("{}({})", a.pred.name, args.join(", ")),
        }
    }

    fn filter_atom(&self, a: &Atom) -> Result<String, EmitError> {
        let Some(b) = Builtin::of(&a.pred) else {
            return Err(EmitError::Inexpressible {
                pred: a.pred.clone(),
                dialect: self.dialect,
            });
        };
        let t: Vec<String> = a.args.iter().map(|t| self.term(t)).collect();
        Ok(match b {
            Builtin::EqConst(c) => format!("{} = {}", t[0], self.constant(&c)),
            Builtin::Eq => format!("{} = {}", t[0], t[1]),
            Builtin::Leq(c) => format!("{} <= {c}", t[0]),
            Builtin::Succ => format!("{} = {} + 1", t[1], t[0]),
            Builtin::PlusConst(d) => format!("{} = {} + {d}", t[1], t[0]),
            Builtin::Plus => format!("{} = {} + {}", t[2], t[0], t[1]),
        })
    }

    fn emit(&self) -> Result<String, EmitError> {
        let mut out = String::new();
        if self.dialect == Dialect::Souffle {
            for pred in self.p.predicates().iter().filter(|q| !self.p.is_filter(q)) {
                let cols: Vec<String> = (0..pred.arity)
                    .map(|i| {
                        let ty = if self.numeric.contains(&(pred.clone(), i)) {
                            "number"
                        } else {
                            "symbol"
                        };
                        format!("x{i}:{ty}")
                    })
                    .collect();
                let _ = writeln!(out, ".decl {}({})", pred.name, cols.join(", "));
            }
            for b in &self.p.fact_files {
                let _ = writeln!(
                    out,
                    ".input {}(IO=file, filename={}, delimiter=\",\")",
                    b.pred.name,
                    Const::sym(&b.path).quoted()
                );
            }
            for o in &self.p.outputs {
                let _ = writeln!(out, ".output {}", o.name);
            }
        } else {
            for b in &self.p.fact_files {
                let _ = writeln!(
                    out,
                    "% facts for {} are read from {}",
                    b.pred,
                    Const::sym(&b.path).quoted()
                );
            }
            for o in &self.p.outputs {
                let _ = writeln!(out, "#show {o}.");
            }
        }
        for f in &self.p.facts {
            let _ = writeln!(out, "{}.", self.atom(f));
        }
        let neg = if self.dialect == Dialect::Souffle {
            "!"
        } else {
            "not "
        };
        for r in &self.p.rules {
            for conj in expr_dnf(&r.filter) {
                let mut body: Vec<String> = r.positive.iter().map(|a| self.atom(a)).collect();
                body.extend(r.negative.iter().map(|a| format!("{neg}{}", self.atom(a))));
                for a in &conj {
                    body.push(self.filter_atom(a)?);
                }
                if body.is_empty() {
                    let _ = writeln!(out, "{}.", self.atom(&r.head));
                } else {
                    let _ = writeln!(out, "{} :- {}.", self.atom(&r.head), body.join(", "));
                }
            }
        }
        Ok(out)
    }
}

/// Union-find over argument positions and rule variables; a class is numeric
/// when it touches an integer constant or an arithmetic built-in.
fn infer_numeric(p: &Program) -> BTreeSet<(Pred, usize)> {
    #[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
    enum Node {
        Pos(Pred, usize),
        Var(usize, String),
    }
    let mut ids: BTreeMap<Node, usize> = BTreeMap::new();
    let mut parent: Vec<usize> = Vec::new();
    let mut numeric: Vec<bool> = Vec::new();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut id = |n: Node, parent: &mut Vec<usize>, numeric: &mut Vec<bool>| -> usize {
        *ids.entry(n).or_insert_with(|| {
            parent.push(parent.len());
            numeric.push(false);
            parent.len() - 1
        })
    };
    let union = |a: usize, b: usize, parent: &mut Vec<usize>, numeric: &mut Vec<bool>| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            parent[ra] = rb;
            numeric[rb] |= numeric[ra];
        }
    };
    let mark = |x: usize, parent: &mut Vec<usize>, numeric: &mut Vec<bool>| {
        let r = find(parent, x);
        numeric[r] = true;
    };
    let mut positions = Vec::new();
    for f in &p.facts {
        for (j, t) in f.args.iter().enumerate() {
            let n = id(Node::Pos(f.pred.clone(), j), &mut parent, &mut numeric);
            positions.push((f.pred.clone(), j, n));
            if matches!(t, Term::Const(Const::Int(_))) {
                mark(n, &mut parent, &mut numeric);
            }
        }
    }
    for (ri, r) in p.rules.iter().enumerate() {
        for a in std::iter::once(&r.head)
            .chain(&r.positive)
            .chain(&r.negative)
        {
            for (j, t) in a.args.iter().enumerate() {
                let n = id(Node::Pos(a.pred.clone(), j), &mut parent, &mut numeric);
                positions.push((a.pred.clone(), j, n));
                match t {
                    Term::Var(v) => {
                        let m = id(Node::Var(ri, v.to_string()), &mut parent, &mut numeric);
                        union(n, m, &mut parent, &mut numeric);
                    }
                    Term::Const(Const::Int(_)) | Term::Add(..) => {
                        mark(n, &mut parent, &mut numeric)
                    }
                    Term::Const(_) => {}
                }
                if let Term::Add(..) = t {
                    let mut vs = Vec::new();
                    t.collect_vars(&mut vs);
                    for v in vs {
                        let m = id(Node::Var(ri, v.to_string()), &mut parent, &mut numeric);
                        mark(m, &mut parent, &mut numeric);
                    }
                }
            }
        }
        for a in r.filter.atoms() {
            let Some(b) = Builtin::of(&a.pred) else {
                continue;
            };
            let vars: Vec<usize> = a
                .args
                .iter()
                .filter_map(Term::as_var)
                .map(|v| id(Node::Var(ri, v.to_string()), &mut parent, &mut numeric))
                .collect();
            match b {
                Builtin::EqConst(Const::Int(_))
                | Builtin::Leq(_)
                | Builtin::Succ
                | Builtin::PlusConst(_)
                | Builtin::Plus => {
                    for v in vars {
                        mark(v, &mut parent, &mut numeric);
                    }
                }
                Builtin::Eq if vars.len() == 2 => {
                    union(vars[0], vars[1], &mut parent, &mut numeric)
                }
                _ => {}
            }
        }
    }
    positions
        .into_iter()
        .filter(|(_, _, n)| {
            let r = find(&mut parent, *n);
            numeric[r]
        })
        .map(|(p, j, _)| (p, j))
        .collect()
}
