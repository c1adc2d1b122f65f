//! Program text and CSV fact files.
//!
//! ```text
//! @output out/1.
//! @filter oddLen/1.
//! @theory { leq[5](X) :- eq_const[0](X). }
//! @facts e "edges.csv".
//! r(X,Y,N) :- e(X,Y), N = 0.
//! r(X,Z,M) :- r(X,Y,N), e(Y,Z), M = N + 1.
//! out(Y) :- r(X,Y,N), X = a, N <= 5.
//! s(X) :- e(X,Y), ~t(Y), (X = a ; X = b).
//! ```
//!
//! `%` and `//` start line comments. The full grammar is in the README.

use std::fmt;
use std::io::Read;
use std::sync::Arc;

use crate::ast::{
    add_const_pred, validate, Atom, Builtin, Const, FactBinding, FilterExpr, Pred, Program, Rule,
    Term, Violation,
};
use crate::filter::{HornTheory, TheoryError, TheoryRule};

#[derive(Clone, Debug)]
pub struct SourceProgram {
    pub text: String,
    pub origin: String,
}

impl SourceProgram {
    pub fn new(text: impl Into<String>, origin: impl Into<String>) -> SourceProgram {
        SourceProgram {
            text: text.into(),
            origin: origin.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxError {
    pub origin: String,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}: {}",
            self.origin, self.line, self.col, self.message
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("{0}")]
    Syntax(SyntaxError),
    #[error("{}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Violation>),
    #[error("theory: {0}")]
    Theory(#[from] TheoryError),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(i64),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Dot,
    Slash,
    If,
    Tilde,
    Eq,
    Le,
    Plus,
    At,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Var(s) => write!(f, "`{s}`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::Eof => f.write_str("end of input"),
            other => {
                let s = match other {
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::LBracket => "[",
                    Tok::RBracket => "]",
                    Tok::LBrace => "{",
                    Tok::RBrace => "}",
                    Tok::Comma => ",",
                    Tok::Semi => ";",
                    Tok::Dot => ".",
                    Tok::Slash => "/",
                    Tok::If => ":-",
                    Tok::Tilde => "~",
                    Tok::Eq => "=",
                    Tok::Le => "<=",
                    Tok::Plus => "+",
                    Tok::At => "@",
                    _ => unreachable!(),
                };
                write!(f, "`{s}`")
            }
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

type Spanned = (Tok, usize, usize);

impl<'a> Lexer<'a> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, (usize, usize, String)> {
        let mut out = Vec::new();
        loop {
            while let Some(&c) = self.chars.peek() {
                if c.is_whitespace() {
                    self.bump();
                } else if c == '%' {
                    while self.chars.peek().is_some_and(|&c| c != '\n') {
                        self.bump();
                    }
                } else if c == '/' {
                    let mut look = self.chars.clone();
                    look.next();
                    if look.peek() == Some(&'/') {
                        while self.chars.peek().is_some_and(|&c| c != '\n') {
                            self.bump();
                        }
                    } else {
                        break;
                    }
                } else {
                    break;
                }
            }
            let (line, col) = (self.line, self.col);
            let Some(c) = self.bump() else {
                out.push((Tok::Eof, line, col));
                return Ok(out);
            };
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                '.' => Tok::Dot,
                '/' => Tok::Slash,
                '~' => Tok::Tilde,
                '=' => Tok::Eq,
                '+' => Tok::Plus,
                '@' => Tok::At,
                ':' if self.chars.peek() == Some(&'-') => {
                    self.bump();
                    Tok::If
                }
                '<' if self.chars.peek() == Some(&'=') => {
                    self.bump();
                    Tok::Le
                }
                '"' => {
                    let mut s = String::new();
                    loop {
                        match self.bump() {
                            None => return Err((line, col, "unterminated string".into())),
                            Some('"') => break,
                            Some('\\') => match self.bump() {
                                Some('n') => s.push('\n'),
                                Some('t') => s.push('\t'),
                                Some(c) => s.push(c),
                                None => return Err((line, col, "unterminated string".into())),
                            },
                            Some(c) => s.push(c),
                        }
                    }
                    Tok::Str(s)
                }
                c if c.is_ascii_digit()
                    || (c == '-' && self.chars.peek().is_some_and(|d| d.is_ascii_digit())) =>
                {
                    let mut s = c.to_string();
                    while let Some(&d) = self.chars.peek() {
                        if d.is_ascii_digit() {
                            s.push(d);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    Tok::Int(
                        s.parse()
                            .map_err(|_| (line, col, format!("integer out of range: {s}")))?,
                    )
                }
                c if c.is_alphabetic() || c == '_' || c == '?' => {
                    let mut s = c.to_string();
                    while let Some(&d) = self.chars.peek() {
                        if d.is_alphanumeric() || d == '_' {
                            s.push(d);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    if crate::ast::is_variable_name(&s) {
                        Tok::Var(s)
                    } else {
                        Tok::Ident(s)
                    }
                }
                other => return Err((line, col, format!("unexpected character {other:?}"))),
            };
            out.push((tok, line, col));
        }
    }
}

/// A body literal before predicates are classified.
#[derive(Clone, Debug)]
enum Lit {
    Pos(Atom),
    Neg(Atom),
    Filter(FilterExpr),
}

struct Clause {
    head: Atom,
    body: Vec<Lit>,
    line: usize,
    col: usize,
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    origin: &'a str,
    anon: usize,
}

type PResult<T> = Result<T, SyntaxError>;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        let (_, line, col) = self.toks[self.pos];
        Err(SyntaxError {
            origin: self.origin.to_string(),
            line,
            col,
            message: message.into(),
        })
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if *self.peek() == t {
            self.next();
            Ok(())
        } else {
            self.err(format!("expected {t}, found {}", self.peek()))
        }
    }

    fn eat(&mut self, t: Tok) -> bool {
        if *self.peek() == t {
            self.next();
            true
        } else {
            false
        }
    }

    /// Predicate name, including a bracketed parameter like `leq[5]`.
    fn pred_name(&mut self) -> PResult<String> {
        let Tok::Ident(name) = self.next() else {
            self.pos -= 1;
            return self.err(format!("expected predicate name, found {}", self.peek()));
        };
        if self.eat(Tok::LBracket) {
            let c = self.constant()?;
            self.expect(Tok::RBracket)?;
            return Ok(format!("{name}[{c}]"));
        }
        Ok(name)
    }

    fn constant(&mut self) -> PResult<Const> {
        match self.next() {
            Tok::Int(i) => Ok(Const::Int(i)),
            Tok::Ident(s) => Ok(Const::sym(&s)),
            Tok::Str(s) => Ok(Const::Sym(Arc::from(s))),
            _ => {
                self.pos -= 1;
                self.err(format!("expected constant, found {}", self.peek()))
            }
        }
    }

    fn simple_term(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Var(v) => {
                self.next();
                if v == "_" {
                    self.anon += 1;
                    Ok(Term::var(&format!("_anon{}", self.anon)))
                } else {
                    Ok(Term::var(&v))
                }
            }
            Tok::LParen => {
                self.next();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            _ => Ok(Term::Const(self.constant()?)),
        }
    }

    fn term(&mut self) -> PResult<Term> {
        let mut t = self.simple_term()?;
        while self.eat(Tok::Plus) {
            let r = self.simple_term()?;
            t = Term::Add(Box::new(t), Box::new(r));
        }
        Ok(t)
    }

    fn atom(&mut self) -> PResult<Atom> {
        let name = self.pred_name()?;
        let mut args = Vec::new();
        if self.eat(Tok::LParen) && !self.eat(Tok::RParen) {
            loop {
                args.push(self.term()?);
                if self.eat(Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        Ok(Atom::new(&name, args))
    }

    fn starts_comparison(&self) -> bool {
        match self.peek() {
            Tok::Var(_) | Tok::Int(_) | Tok::Str(_) => true,
            Tok::Ident(_) => {
                !matches!(self.peek_at(1), Tok::LParen | Tok::LBracket)
                    && matches!(self.peek_at(1), Tok::Eq | Tok::Le)
            }
            _ => false,
        }
    }

    fn comparison(&mut self) -> PResult<Atom> {
        let lhs = self.term()?;
        let op = self.next();
        let rhs = self.term()?;
        let bad = |p: &Self, msg: &str| -> PResult<Atom> {
            p.err(format!("unsupported comparison: {msg}"))
        };
        match op {
            Tok::Eq => match (lhs, rhs) {
                (Term::Var(z), Term::Add(a, b)) | (Term::Add(a, b), Term::Var(z)) => match (*a, *b)
                {
                    (Term::Var(x), Term::Const(Const::Int(d)))
                    | (Term::Const(Const::Int(d)), Term::Var(x)) => Ok(Atom::from_pred(
                        add_const_pred(d),
                        vec![Term::Var(x), Term::Var(z)],
                    )),
                    (Term::Var(x), Term::Var(y)) => Ok(Atom::from_pred(
                        Builtin::Plus.pred(),
                        vec![Term::Var(x), Term::Var(y), Term::Var(z)],
                    )),
                    _ => bad(self, "sums must be `Z = X + Y` or `Z = X + <int>`"),
                },
                (Term::Var(x), Term::Var(y)) => Ok(Atom::from_pred(
                    Builtin::Eq.pred(),
                    vec![Term::Var(x), Term::Var(y)],
                )),
                (Term::Var(x), Term::Const(c)) | (Term::Const(c), Term::Var(x)) => Ok(
                    Atom::from_pred(Builtin::EqConst(c).pred(), vec![Term::Var(x)]),
                ),
                _ => bad(self, "one side of `=` must be a variable"),
            },
            Tok::Le => match (lhs, rhs) {
                (Term::Var(x), Term::Const(Const::Int(c))) => {
                    Ok(Atom::from_pred(Builtin::Leq(c).pred(), vec![Term::Var(x)]))
                }
                _ => bad(self, "only `X <= <int>` is supported"),
            },
            _ => {
                self.pos -= 1;
                self.err(format!("expected `=` or `<=`, found {}", self.peek()))
            }
        }
    }

    /// Bare `true` / `false` in a body.
    fn constant_filter(&mut self) -> Option<FilterExpr> {
        let e = match self.peek() {
            Tok::Ident(s) if s == "true" => FilterExpr::Top,
            Tok::Ident(s) if s == "false" => FilterExpr::Bottom,
            _ => return None,
        };
        if matches!(
            self.peek_at(1),
            Tok::LParen | Tok::LBracket | Tok::Eq | Tok::Le
        ) {
            return None;
        }
        self.next();
        Some(e)
    }

    /// Atom or comparison allowed inside filter groups and theory bodies.
    fn filter_item(&mut self) -> PResult<FilterExpr> {
        if let Some(e) = self.constant_filter() {
            return Ok(e);
        }
        if self.eat(Tok::LParen) {
            let e = self.disjunction()?;
            self.expect(Tok::RParen)?;
            return Ok(e);
        }
        if self.starts_comparison() {
            return Ok(FilterExpr::Atom(self.comparison()?));
        }
        Ok(FilterExpr::Atom(self.atom()?))
    }

    fn disjunction(&mut self) -> PResult<FilterExpr> {
        let mut alts = vec![self.conjunction()?];
        while self.eat(Tok::Semi) {
            alts.push(self.conjunction()?);
        }
        Ok(if alts.len() == 1 {
            alts.pop().unwrap()
        } else {
            FilterExpr::Or(alts)
        })
    }

    fn conjunction(&mut self) -> PResult<FilterExpr> {
        let mut parts = vec![self.filter_item()?];
        while self.eat(Tok::Comma) {
            parts.push(self.filter_item()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            FilterExpr::And(parts)
        })
    }

    fn literal(&mut self) -> PResult<Lit> {
        if self.eat(Tok::Tilde) {
            return Ok(Lit::Neg(self.atom()?));
        }
        if matches!(self.peek(), Tok::Ident(s) if s == "not")
            && matches!(self.peek_at(1), Tok::Ident(_))
        {
            self.next();
            return Ok(Lit::Neg(self.atom()?));
        }
        if let Some(e) = self.constant_filter() {
            return Ok(Lit::Filter(e));
        }
        if self.eat(Tok::LParen) {
            let e = self.disjunction()?;
            self.expect(Tok::RParen)?;
            return Ok(Lit::Filter(e));
        }
        if self.starts_comparison() {
            return Ok(Lit::Filter(FilterExpr::Atom(self.comparison()?)));
        }
        Ok(Lit::Pos(self.atom()?))
    }

    fn clause(&mut self) -> PResult<Clause> {
        let (_, line, col) = self.toks[self.pos];
        let head = self.atom()?;
        let mut body = Vec::new();
        if self.eat(Tok::If) {
            loop {
                body.push(self.literal()?);
                if !self.eat(Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::Dot)?;
        Ok(Clause {
            head,
            body,
            line,
            col,
        })
    }

    fn pred_ref(&mut self) -> PResult<Pred> {
        let name = self.pred_name()?;
        self.expect(Tok::Slash)?;
        match self.next() {
            Tok::Int(n) if n >= 0 => Ok(Pred::new(&name, n as usize)),
            _ => {
                self.pos -= 1;
                self.err("expected arity")
            }
        }
    }

    fn theory_rule(&mut self) -> PResult<TheoryRule> {
        let head = if matches!(self.peek(), Tok::Ident(s) if s == "false")
            && !matches!(self.peek_at(1), Tok::LParen | Tok::LBracket)
        {
            self.next();
            None
        } else {
            match self.filter_item()? {
                FilterExpr::Atom(a) => Some(a),
                _ => return self.err("theory rule head must be a single atom"),
            }
        };
        self.expect(Tok::If)?;
        let mut body = Vec::new();
        loop {
            match self.filter_item()? {
                FilterExpr::Atom(a) => body.push(a),
                _ => return self.err("theory rule bodies are conjunctions of atoms"),
            }
            if !self.eat(Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::Dot)?;
        Ok(TheoryRule { head, body })
    }
}

/// Parses and validates a program.
pub fn parse_program(src: &SourceProgram) -> Result<Program, ParseError> {
    let origin = src.origin.as_str();
    let toks = Lexer {
        chars: src.text.chars().peekable(),
        line: 1,
        col: 1,
    }
    .tokens()
    .map_err(|(line, col, message)| {
        ParseError::Syntax(SyntaxError {
            origin: origin.into(),
            line,
            col,
            message,
        })
    })?;
    let mut p = Parser {
        toks,
        pos: 0,
        origin,
        anon: 0,
    };
    let mut clauses = Vec::new();
    let mut program = Program::default();
    let mut theory_rules = Vec::new();
    let syn = ParseError::Syntax;
    while *p.peek() != Tok::Eof {
        if p.eat(Tok::At) {
            let Tok::Ident(d) = p.next() else {
                p.pos -= 1;
                return Err(syn(p.err::<()>("expected directive name").unwrap_err()));
            };
            match d.as_str() {
                "output" | "filter" => loop {
                    let pr = p.pred_ref().map_err(syn)?;
                    let list = if d == "output" {
                        &mut program.outputs
                    } else {
                        &mut program.filters
                    };
                    if !list.contains(&pr) {
                        list.push(pr);
                    }
                    if !p.eat(Tok::Comma) {
                        p.eat(Tok::Dot);
                        break;
                    }
                },
                "theory" => {
                    p.expect(Tok::LBrace).map_err(syn)?;
                    while !p.eat(Tok::RBrace) {
                        theory_rules.push(p.theory_rule().map_err(syn)?);
                    }
                    p.eat(Tok::Dot);
                }
                "facts" => {
                    let name = p.pred_name().map_err(syn)?;
                    let arity = if p.eat(Tok::Slash) {
                        match p.next() {
                            Tok::Int(n) if n >= 0 => Some(n as usize),
                            _ => return Err(syn(p.err::<()>("expected arity").unwrap_err())),
                        }
                    } else {
                        None
                    };
                    let Tok::Str(path) = p.next() else {
                        p.pos -= 1;
                        return Err(syn(p.err::<()>("expected quoted file name").unwrap_err()));
                    };
                    p.eat(Tok::Dot);
                    program.fact_files.push(FactBinding {
                        pred: Pred::new(&name, arity.unwrap_or(usize::MAX)),
                        path,
                    });
                }
                other => {
                    return Err(syn(p
                        .err::<()>(format!("unknown directive @{other}"))
                        .unwrap_err()))
                }
            }
        } else {
            clauses.push(p.clause().map_err(syn)?);
        }
    }
    program.theory = HornTheory::new(theory_rules)?;
    let is_filter = |pred: &Pred, prog: &Program| prog.is_filter(pred);
    for c in clauses {
        if c.body.is_empty()
            && c.head.is_ground()
            && !c.head.args.iter().any(|t| matches!(t, Term::Add(..)))
        {
            program.facts.push(c.head);
            continue;
        }
        let mut rule = Rule::new(c.head, Vec::new());
        let mut filters = Vec::new();
        for lit in c.body {
            match lit {
                Lit::Pos(a) if is_filter(&a.pred, &program) => filters.push(FilterExpr::Atom(a)),
                Lit::Pos(a) => rule.positive.push(a),
                Lit::Neg(a) if is_filter(&a.pred, &program) => {
                    return Err(syn(SyntaxError {
                        origin: origin.into(),
                        line: c.line,
                        col: c.col,
                        message: format!("negated filter atom {a}"),
                    }))
                }
                Lit::Neg(a) => rule.negative.push(a),
                Lit::Filter(e) => filters.push(e),
            }
        }
        rule.filter = match filters.len() {
            0 => FilterExpr::Top,
            1 => filters.pop().unwrap(),
            _ => FilterExpr::And(filters),
        };
        program.rules.push(rule);
    }
    resolve_fact_arities(&mut program);
    validate(&program).map_err(ParseError::Invalid)?;
    Ok(program)
}

/// `@facts p "f.csv"` without an arity takes it from the predicate's use.
fn resolve_fact_arities(program: &mut Program) {
    let preds = program.predicates();
    for b in &mut program.fact_files {
        if b.pred.arity == usize::MAX {
            if let Some(p) = preds.iter().find(|p| p.name == b.pred.name) {
                b.pred = p.clone();
            } else {
                b.pred.arity = 0;
            }
        }
    }
}

pub fn parse_str(text: &str) -> Result<Program, ParseError> {
    parse_program(&SourceProgram::new(text, "<string>"))
}

/// Rows of one predicate as read from a CSV file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactFile {
    pub pred: Pred,
    pub rows: Vec<Vec<Const>>,
}

#[derive(Debug, thiserror::Error)]
pub enum FactError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("arity mismatch at row {0}")]
    Arity(usize),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

/// Reads comma-separated rows; fields that parse as integers become integer
/// constants, everything else a symbol. Order and duplicates are kept.
pub fn load_facts<R: Read>(reader: R, pred: &Pred) -> Result<FactFile, FactError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() == 1 && rec.get(0) == Some("") && pred.arity != 1 {
            continue;
        }
        if rec.len() != pred.arity {
            return Err(FactError::Arity(i + 1));
        }
        rows.push(
            rec.iter()
                .map(|f| match f.trim().parse::<i64>() {
                    Ok(n) => Const::Int(n),
                    Err(_) => Const::sym(f),
                })
                .collect(),
        );
    }
    Ok(FactFile {
        pred: pred.clone(),
        rows,
    })
}

pub fn load_facts_path(path: &std::path::Path, pred: &Pred) -> Result<FactFile, FactError> {
    load_facts(std::fs::File::open(path)?, pred)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::idb_predicates;

    pub const EXAMPLE2: &str = "\
@output out/1.
r(X,Y,N) :- e(X,Y), N = 0.
r(X,Z,M) :- r(X,Y,N), e(Y,Z), M = N + 1.
out(Y) :- r(X,Y,N), X = a, N <= 5.
";

    #[test]
    fn parses_example2() {
        let p = parse_str(EXAMPLE2).unwrap();
        assert_eq!(p.rules.len(), 3);
        assert_eq!(p.outputs, vec![Pred::new("out", 1)]);
        assert_eq!(idb_predicates(&p).len(), 2);
        assert_eq!(
            p.rules[1].filter,
            FilterExpr::Atom(Atom::from_pred(
                Builtin::Succ.pred(),
                vec![Term::var("N"), Term::var("M")]
            ))
        );
        assert_eq!(p, crate::ast::tests::example2());
    }

    #[test]
    fn empty_input() {
        assert_eq!(parse_str("").unwrap(), Program::default());
        assert_eq!(
            parse_str("  % only a comment\n").unwrap(),
            Program::default()
        );
    }

    #[test]
    fn repeated_variables_are_accepted() {
        let p = parse_str("p(X) :- q(X,X).").unwrap();
        assert_eq!(
            p.rules[0].positive[0].args,
            vec![Term::var("X"), Term::var("X")]
        );
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_str("p(X) :- q(X)\nr(Y) :- s(Y).").unwrap_err();
        match err {
            ParseError::Syntax(e) => {
                assert_eq!((e.line, e.col), (2, 1));
                assert!(e.message.contains("expected `.`"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn semantic_errors_reported() {
        let err = parse_str("out(Y) :- X = a.").unwrap_err();
        assert_eq!(err.to_string(), "rule 1: unsafe variable Y");
    }

    #[test]
    fn disjunction_negation_and_directives() {
        let src = "@output s/1.\n@filter odd/1.\n@facts e \"e.csv\".\n@theory { false :- eq_const[0](X), X = 1. }\n\
                   s(X) :- e(X,Y), ~t(Y), not t(X), (X = a ; X = b, odd(X)).\nt(X) :- e(X,X).";
        let p = parse_str(src).unwrap();
        let r = &p.rules[0];
        assert_eq!(r.negative.len(), 2);
        assert!(matches!(&r.filter, FilterExpr::Or(v) if v.len() == 2));
        assert_eq!(p.fact_files[0].pred, Pred::new("e", 2));
        assert_eq!(p.theory.rules().len(), 1);
        assert!(p.theory.rules()[0].head.is_none());
    }

    #[test]
    fn negated_filter_rejected() {
        assert!(parse_str("p(X) :- q(X), ~eq_const[a](X).").is_err());
    }

    #[test]
    fn facts_are_collected() {
        let p = parse_str("p(0,0,a).\np(1,\"B c\",b).").unwrap();
        assert_eq!(p.facts.len(), 2);
        assert_eq!(p.facts[1].args[1], Term::Const(Const::sym("B c")));
    }

    #[test]
    fn load_facts_examples() {
        let e = Pred::new("e", 2);
        let f = load_facts("a,b\nb,c".as_bytes(), &e).unwrap();
        assert_eq!(
            f.rows,
            vec![
                vec![Const::sym("a"), Const::sym("b")],
                vec![Const::sym("b"), Const::sym("c")]
            ]
        );
        assert!(load_facts("".as_bytes(), &e).unwrap().rows.is_empty());
        let err = load_facts("a,b,c".as_bytes(), &e).unwrap_err();
        assert_eq!(err.to_string(), "arity mismatch at row 1");
        let dup = load_facts("1,\"x,y\"\n1,\"x,y\"".as_bytes(), &e).unwrap();
        assert_eq!(dup.rows.len(), 2);
        assert_eq!(dup.rows[0], vec![Const::Int(1), Const::sym("x,y")]);
    }
}
