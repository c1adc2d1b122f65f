//! Static filter computation: the fixpoint over per-predicate filter
//! formulas, in full and conjunctive (CASF) mode, plus the dependency graph
//! analysis needed for programs with negation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use petgraph::graph::{DiGraph, NodeIndex};
use petgraph::visit::{Bfs, EdgeRef};

use crate::ast::{idb_predicates, Atom, FilterExpr, Pred, Program, Rule};
use crate::filter::{
    project, CapExceeded, Conj, Dnf, FAtom, FilterError, Formula, Regime, VarContext,
};
use crate::normalize::{normalize, NormalizeError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Full,
    Casf,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Full => "full",
            Mode::Casf => "casf",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Mode, String> {
        match s {
            "full" => Ok(Mode::Full),
            "casf" => Ok(Mode::Casf),
            other => Err(format!("unknown mode {other} (expected full or casf)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Pos,
    Neg,
}

/// IDB predicates with an edge `p -> q` when `p` occurs in the body of a
/// rule for `q`.
#[derive(Clone, Debug)]
pub struct DependencyGraph {
    graph: DiGraph<Pred, Sign>,
    index: BTreeMap<Pred, NodeIndex>,
}

impl DependencyGraph {
    pub fn vertices(&self) -> BTreeSet<Pred> {
        self.index.keys().cloned().collect()
    }

    pub fn edges(&self) -> BTreeSet<(Pred, Pred, Sign)> {
        self.graph
            .edge_references()
            .map(|e| {
                (
                    self.graph[e.source()].clone(),
                    self.graph[e.target()].clone(),
                    *e.weight(),
                )
            })
            .collect()
    }

    pub fn from_edges(vertices: &[Pred], edges: &[(Pred, Pred, Sign)]) -> DependencyGraph {
        let mut g = DependencyGraph {
            graph: DiGraph::new(),
            index: BTreeMap::new(),
        };
        for v in vertices {
            g.node(v);
        }
        for (p, q, s) in edges {
            let (a, b) = (g.node(p), g.node(q));
            g.add_edge(a, b, *s);
        }
        g
    }

    fn node(&mut self, p: &Pred) -> NodeIndex {
        if let Some(&n) = self.index.get(p) {
            return n;
        }
        let n = self.graph.add_node(p.clone());
        self.index.insert(p.clone(), n);
        n
    }

    fn add_edge(&mut self, a: NodeIndex, b: NodeIndex, s: Sign) {
        let exists = self.graph.edges_connecting(a, b).any(|e| *e.weight() == s);
        if !exists {
            self.graph.add_edge(a, b, s);
        }
    }

    /// Strongly connected components in reverse topological order: a head
    /// component comes before the components its rule bodies use.
    pub fn sccs(&self) -> Vec<Vec<Pred>> {
        petgraph::algo::tarjan_scc(&self.graph)
            .into_iter()
            .map(|c| {
                let mut v: Vec<Pred> = c.into_iter().map(|n| self.graph[n].clone()).collect();
                v.sort();
                v
            })
            .collect()
    }

    /// True if some edge with sign `s` connects two members of `scc`.
    pub fn has_internal_edge(&self, scc: &[Pred], s: Sign) -> bool {
        let members: BTreeSet<NodeIndex> = scc.iter().map(|p| self.index[p]).collect();
        self.graph.edge_references().any(|e| {
            *e.weight() == s && members.contains(&e.source()) && members.contains(&e.target())
        })
    }
}

pub fn build_dependency_graph(program: &Program) -> DependencyGraph {
    let idb = idb_predicates(program);
    let mut g = DependencyGraph {
        graph: DiGraph::new(),
        index: BTreeMap::new(),
    };
    for p in &idb {
        g.node(p);
    }
    for r in &program.rules {
        let q = g.node(&r.head.pred);
        let signed = r
            .positive
            .iter()
            .map(|a| (a, Sign::Pos))
            .chain(r.negative.iter().map(|a| (a, Sign::Neg)));
        for (a, s) in signed {
            if idb.contains(&a.pred) {
                let p = g.node(&a.pred);
                g.add_edge(p, q, s);
            }
        }
    }
    g
}

/// Predicates not reachable from a cycle through a negative edge.
pub fn stratifiable_predicates(g: &DependencyGraph) -> BTreeSet<Pred> {
    let mut tainted = BTreeSet::new();
    for scc in g.sccs() {
        if g.has_internal_edge(&scc, Sign::Neg) {
            for p in &scc {
                let mut bfs = Bfs::new(&g.graph, g.index[p]);
                while let Some(n) = bfs.next(&g.graph) {
                    tainted.insert(g.graph[n].clone());
                }
            }
        }
    }
    g.vertices()
        .into_iter()
        .filter(|p| !tainted.contains(p))
        .collect()
}

/// Size parameters of a program that enter the iteration bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundParams {
    /// number of IDB (head) predicates
    pub n_h: u64,
    /// largest IDB arity
    pub a_h: u64,
    /// number of filter predicates, program and theory together
    pub n_f: u64,
    /// largest filter arity
    pub a_f: u64,
}

impl BoundParams {
    pub fn of(program: &Program, regime: &Regime) -> BoundParams {
        let idb = idb_predicates(program);
        let mut filters = program.filter_predicates();
        filters.extend(regime.theory.predicates());
        BoundParams {
            n_h: idb.len() as u64,
            a_h: idb.iter().map(|p| p.arity as u64).max().unwrap_or(0),
            n_f: filters.len() as u64,
            a_f: filters.iter().map(|p| p.arity as u64).max().unwrap_or(0),
        }
    }

    /// `n_h * 2^(n_F * a_h^a_F)`, saturating.
    pub fn syntactic_bound(&self) -> u64 {
        let exp = self.n_f.saturating_mul(sat_pow(self.a_h, self.a_f));
        let pow = if exp >= 64 { u64::MAX } else { 1u64 << exp };
        self.n_h.saturating_mul(pow)
    }

    /// `n_h * ((n_F * c_F)^a_h + 2)` for filter relations of at most `c_f`
    /// tuples each, saturating.
    pub fn finite_bound(&self, c_f: u64) -> u64 {
        self.n_h
            .saturating_mul(sat_pow(self.n_f.saturating_mul(c_f), self.a_h).saturating_add(2))
    }

    /// Default iteration cap: ten times the syntactic bound, at most 10^6.
    pub fn default_cap(&self) -> u64 {
        self.syntactic_bound()
            .saturating_mul(10)
            .clamp(1, 1_000_000)
    }
}

fn sat_pow(base: u64, exp: u64) -> u64 {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
        if acc == u64::MAX || acc == 0 {
            break;
        }
    }
    acc
}

#[derive(Clone, Debug)]
pub struct FilterConfig {
    pub mode: Mode,
    pub regime: Regime,
    /// Outer-pass cap; `None` uses [`BoundParams::default_cap`].
    pub iteration_cap: Option<u64>,
    pub trace: bool,
}

impl FilterConfig {
    pub fn new(mode: Mode, regime: Regime) -> FilterConfig {
        FilterConfig {
            mode,
            regime,
            iteration_cap: None,
            trace: false,
        }
    }

    pub fn with_trace(mut self) -> FilterConfig {
        self.trace = true;
        self
    }

    pub fn with_iteration_cap(mut self, cap: Option<u64>) -> FilterConfig {
        self.iteration_cap = cap;
        self
    }
}

/// One visit of an IDB body atom in the main loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub pass: u64,
    /// 1-based rule index in the normalized program
    pub rule: usize,
    pub atom: Pred,
    pub negated: bool,
    /// `ι_h(Θ_h) ∧ G_F` over the rule's variables
    pub g: FilterExpr,
    pub theta_old: Dnf,
    pub m: Dnf,
    pub theta_new: Dnf,
}

impl TraceEntry {
    pub fn changed(&self) -> bool {
        self.theta_old != self.theta_new
    }
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pass={} rule={} atom={} theta_old={} M={} theta_new={}",
            self.pass, self.rule, self.atom, self.theta_old, self.m, self.theta_new
        )
    }
}

#[derive(Clone, Debug)]
pub struct FilterAssignment {
    pub filters: BTreeMap<Pred, Dnf>,
    pub initial: BTreeMap<Pred, Dnf>,
    pub iteration_count: u64,
    pub mode: Mode,
    /// Some formula hit the DNF cap and was replaced by a weaker one.
    pub weakened: bool,
    pub trace: Vec<TraceEntry>,
}

impl FilterAssignment {
    pub fn get(&self, p: &Pred) -> Option<&Dnf> {
        self.filters.get(p)
    }

    /// Θ_p as a formula; ⊤ for predicates without an entry (EDB).
    pub fn formula(&self, p: &Pred) -> Formula {
        self.filters.get(p).map_or(Formula::Top, Dnf::to_formula)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("iteration cap of {cap} passes exceeded")]
    IterationCap { cap: u64 },
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Filter(#[from] FilterError),
}

/// A normalized rule with its variables mapped to markers.
struct Prepared {
    ctx: VarContext,
    head_pos: Vec<u32>,
    gf: Formula,
    /// (body atom, its markers, negated) for IDB atoms in body order
    body: Vec<(Pred, Vec<u32>, bool)>,
}

fn positions(ctx: &mut VarContext, a: &Atom) -> Result<Vec<u32>, FilterError> {
    a.args
        .iter()
        .map(|t| match t.as_var() {
            Some(v) => Ok(ctx.marker_of(v)),
            None => Err(FilterError::NonVariable(t.to_string())),
        })
        .collect()
}

fn prepare(rule: &Rule, idb: &BTreeSet<Pred>) -> Result<Prepared, FilterError> {
    let mut ctx = VarContext::new(rule.vars());
    let head_pos = positions(&mut ctx, &rule.head)?;
    let gf = ctx.formula_of(&rule.filter)?;
    let mut body = Vec::new();
    for (a, neg) in rule
        .positive
        .iter()
        .map(|a| (a, false))
        .chain(rule.negative.iter().map(|a| (a, true)))
    {
        if idb.contains(&a.pred) {
            body.push((a.pred.clone(), positions(&mut ctx, a)?, neg));
        }
    }
    Ok(Prepared {
        ctx,
        head_pos,
        gf,
        body,
    })
}

fn lift(theta: &Dnf, pos: &[u32]) -> Dnf {
    theta.map_markers(&|m| pos[m as usize - 1])
}

/// Outcome of projecting G onto one body atom.
enum Projection {
    /// Per-disjunct projections of the consistent disjuncts of G.
    Exact(Vec<Conj>),
    /// G was too large to expand; only atoms common to all disjuncts were used.
    Weak(Conj),
}

struct Solver<'a> {
    regime: &'a Regime,
    mode: Mode,
    weakened: bool,
}

impl<'a> Solver<'a> {
    fn g_dnf(&self, theta_h: &Dnf, prep: &Prepared) -> Result<Dnf, CapExceeded> {
        let cap = self.regime.dnf_cap;
        let gf = prep.gf.simplify().to_dnf(cap)?;
        lift(theta_h, &prep.head_pos).and(&gf, cap)
    }

    fn g_formula(&self, theta_h: &Dnf, prep: &Prepared) -> Formula {
        Formula::And(vec![
            lift(theta_h, &prep.head_pos).to_formula(),
            prep.gf.clone(),
        ])
    }

    fn projections(&mut self, theta_h: &Dnf, prep: &Prepared, pos: &[u32]) -> Projection {
        match self.g_dnf(theta_h, prep) {
            Ok(g) => Projection::Exact(
                g.disjuncts()
                    .filter_map(|c| project(self.regime, c, pos))
                    .collect(),
            ),
            Err(_) => {
                let common = self.g_formula(theta_h, prep).common_atoms();
                let c = common.single().unwrap_or_default();
                match project(self.regime, &c, pos) {
                    Some(p) => Projection::Weak(p),
                    None => Projection::Exact(Vec::new()),
                }
            }
        }
    }

    /// New Θ_b after visiting `b(y⃗)` in a rule whose head filter is `theta_h`;
    /// returns (M, Θ_b').
    fn update(&mut self, theta_h: &Dnf, theta_b: &Dnf, prep: &Prepared, pos: &[u32]) -> (Dnf, Dnf) {
        if theta_h.is_bottom() {
            return (Dnf::bottom(), theta_b.clone());
        }
        match self.mode {
            Mode::Full => {
                let m = match self.projections(theta_h, prep, pos) {
                    Projection::Exact(ps) => Dnf(ps.into_iter().collect()),
                    Projection::Weak(p) => {
                        self.weakened = true;
                        Dnf::conj(p)
                    }
                };
                let mut new = self.regime.repr_dnf(&theta_b.or(&m));
                if self.regime.dnf_cap.is_some_and(|cap| new.len() > cap) {
                    self.weakened = true;
                    new = self
                        .regime
                        .repr_dnf(&Dnf::conj(new.single().unwrap_or_default()));
                }
                (m.remove_subsumed(), new)
            }
            Mode::Casf => {
                // E_G: atoms over b's positions entailed by G; None when G is
                // inconsistent and so entails everything including ⊥.
                let e_g: Option<Conj> = match self.projections(theta_h, prep, pos) {
                    Projection::Exact(ps) => {
                        let mut it = ps.into_iter();
                        it.next().map(|first| {
                            it.fold(first, |acc, c| acc.intersection(&c).cloned().collect())
                        })
                    }
                    Projection::Weak(p) => match (
                        theta_b.single(),
                        self.linear_candidates(theta_h, theta_b, prep, pos),
                    ) {
                        (Some(_), Some(exact)) => Some(exact),
                        _ => {
                            self.weakened = true;
                            Some(p)
                        }
                    },
                };
                let m = match &e_g {
                    None => Dnf::bottom(),
                    Some(e) => Dnf::conj(e.iter().cloned()),
                };
                let new = match (theta_b.single(), e_g) {
                    (_, None) => theta_b.clone(),
                    (None, Some(e)) => Dnf::conj(e),
                    (Some(c), Some(e)) => Dnf::conj(c.intersection(&e).cloned()),
                };
                (m, new)
            }
        }
    }

    /// CASF fallback for oversized G under a linear theory: test each atom
    /// of the current Θ_b individually.
    fn linear_candidates(
        &self,
        theta_h: &Dnf,
        theta_b: &Dnf,
        prep: &Prepared,
        pos: &[u32],
    ) -> Option<Conj> {
        if !self.regime.theory.is_linear() {
            return None;
        }
        let c = theta_b.single()?;
        let g = self.g_formula(theta_h, prep);
        let mut out = Conj::new();
        for a in &c {
            let target = FAtom::new(
                a.pred.clone(),
                a.args.iter().map(|&m| pos[m as usize - 1]).collect(),
            );
            let ok = crate::filter::entails_approx(
                &self.regime.theory,
                &g,
                &Formula::Atom(target),
                crate::filter::EntailMode::Linear,
                self.regime.dnf_cap,
            )
            .ok()?;
            if ok {
                out.insert(a.clone());
            }
        }
        Some(out)
    }
}

/// Starting assignment: ⊤ for outputs, the negation-derived formula for
/// predicates that are not stratifiable, ⊥ otherwise.
pub fn initial_filters(
    program: &Program,
    config: &FilterConfig,
) -> Result<FilterAssignment, EngineError> {
    let program = normalize(program)?;
    let idb = idb_predicates(&program);
    let prepared: Vec<Prepared> = program
        .rules
        .iter()
        .map(|r| prepare(r, &idb))
        .collect::<Result<_, _>>()?;
    let mut solver = Solver {
        regime: &config.regime,
        mode: config.mode,
        weakened: false,
    };
    let filters = initial(&program, &idb, &prepared, &mut solver);
    Ok(FilterAssignment {
        initial: filters.clone(),
        filters,
        iteration_count: 0,
        mode: config.mode,
        weakened: solver.weakened,
        trace: Vec::new(),
    })
}

fn initial(
    program: &Program,
    idb: &BTreeSet<Pred>,
    prepared: &[Prepared],
    solver: &mut Solver,
) -> BTreeMap<Pred, Dnf> {
    let strat = if program.has_negation() {
        stratifiable_predicates(&build_dependency_graph(program))
    } else {
        idb.clone()
    };
    let mut out = BTreeMap::new();
    for p in idb {
        let theta = if program.outputs.contains(p) {
            Dnf::top()
        } else if strat.contains(p) {
            Dnf::bottom()
        } else {
            // ⋁ over rules and negated occurrences of p of what G_F entails
            let mut n = Dnf::bottom();
            for prep in prepared {
                for (b, pos, neg) in &prep.body {
                    if *neg && b == p {
                        let (m, _) = {
                            let mut full = Solver {
                                regime: solver.regime,
                                mode: Mode::Full,
                                weakened: false,
                            };
                            let r = full.update(&Dnf::top(), &Dnf::bottom(), prep, pos);
                            solver.weakened |= full.weakened;
                            r
                        };
                        n = n.or(&m);
                    }
                }
            }
            let n = solver.regime.repr_dnf(&n);
            match solver.mode {
                Mode::Full => n,
                Mode::Casf => match n.single() {
                    Some(c) => Dnf::conj(c),
                    None => Dnf::bottom(),
                },
            }
        };
        out.insert(p.clone(), theta);
    }
    out
}

/// Runs the fixpoint loop to completion.
pub fn compute_filters(
    program: &Program,
    config: &FilterConfig,
) -> Result<FilterAssignment, EngineError> {
    let program = normalize(program)?;
    let idb = idb_predicates(&program);
    let prepared: Vec<Prepared> = program
        .rules
        .iter()
        .map(|r| prepare(r, &idb))
        .collect::<Result<_, _>>()?;
    let mut solver = Solver {
        regime: &config.regime,
        mode: config.mode,
        weakened: false,
    };
    let init = initial(&program, &idb, &prepared, &mut solver);
    let mut theta = init.clone();
    let cap = config
        .iteration_cap
        .unwrap_or_else(|| BoundParams::of(&program, &config.regime).default_cap());
    let mut trace = Vec::new();
    let mut passes = 0u64;
    if !idb.is_empty() {
        loop {
            if passes >= cap {
                return Err(EngineError::IterationCap { cap });
            }
            passes += 1;
            let mut changed = false;
            for (ri, (rule, prep)) in program.rules.iter().zip(&prepared).enumerate() {
                for (b, pos, neg) in &prep.body {
                    let theta_h = &theta[&rule.head.pred];
                    let theta_b = &theta[b];
                    let (m, new) = solver.update(theta_h, theta_b, prep, pos);
                    if config.trace {
                        let g = Formula::And(vec![
                            lift(theta_h, &prep.head_pos).to_formula(),
                            prep.gf.clone(),
                        ]);
                        trace.push(TraceEntry {
                            pass: passes,
                            rule: ri + 1,
                            atom: b.clone(),
                            negated: *neg,
                            g: prep.ctx.expr_of(&g.simplify()),
                            theta_old: theta_b.clone(),
                            m,
                            theta_new: new.clone(),
                        });
                    }
                    if new != *theta_b {
                        changed = true;
                        theta.insert(b.clone(), new);
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }
    Ok(FilterAssignment {
        filters: theta,
        initial: init,
        iteration_count: passes,
        mode: config.mode,
        weakened: solver.weakened,
        trace,
    })
}

/// Every CASF update keeps the conjunct set or shrinks it once the
/// predicate has left ⊥.
pub fn casf_monotonicity_check(trace: &[TraceEntry]) -> bool {
    trace
        .iter()
        .all(|e| match (e.theta_old.single(), e.theta_new.single()) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(old), Some(new)) => {
                e.theta_old.len() == 1 && e.theta_new.len() == 1 && new.is_subset(&old)
            }
        })
}

/// Per-pass account of how Θ_p was obtained. Needs a traced assignment.
pub fn explain(assignment: &FilterAssignment, p: &Pred) -> Option<String> {
    let init = assignment.initial.get(p)?;
    let mut out = String::new();
    let name = &p.name;
    let updates: Vec<&TraceEntry> = assignment
        .trace
        .iter()
        .filter(|e| &e.atom == p && e.changed())
        .collect();
    if updates.is_empty() {
        out.push_str(&format!("Θ_{name} initialized {init}, never updated\n"));
    } else {
        out.push_str(&format!("Θ_{name} initialized {init}\n"));
        for pass in 1..=assignment.iteration_count {
            let here: Vec<&&TraceEntry> = updates.iter().filter(|e| e.pass == pass).collect();
            if here.is_empty() {
                out.push_str(&format!("pass {pass}: Θ_{name} unchanged\n"));
            }
            for e in here {
                out.push_str(&format!(
                    "pass {}: rule {} {} {}; G = {}; M = {}; Θ_{name} becomes {}\n",
                    e.pass,
                    e.rule,
                    if e.negated {
                        "negated atom"
                    } else {
                        "body atom"
                    },
                    e.atom,
                    crate::emit::render_filter(&e.g),
                    e.m,
                    e.theta_new
                ));
            }
        }
    }
    let fin = assignment.filters.get(p)?;
    out.push_str(&format!(
        "after {} passes: Θ_{name} = {fin}\n",
        assignment.iteration_count
    ));
    Some(out)
}
