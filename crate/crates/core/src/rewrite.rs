//! Admissible rewriting: replace each rule's filter by a simpler formula
//! that is still strong enough given the computed predicate filters.

use std::collections::BTreeSet;

use crate::ast::{idb_predicates, unsafe_variables, FilterExpr, Pred, Program, Rule};
use crate::engine::{compute_filters, EngineError, FilterAssignment, FilterConfig};
use crate::filter::{apply_iota, CapExceeded, FilterError, Formula, Regime, VarContext};
use crate::normalize::normalize;

/// The two formulas that bound an admissible filter for one rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissibilityContext {
    pub rule: Rule,
    /// `ι_h(Θ_h) ∧ G_F`
    pub f_plus: FilterExpr,
    /// conjunction of `ι_q(Θ_q)` over positive IDB body atoms
    pub f_minus: FilterExpr,
}

impl AdmissibilityContext {
    /// `rule` must be normalized. IDB predicates in `seeded` receive facts
    /// that bypass the rules, so their filters say nothing about the body
    /// atoms and are left out of F₋.
    pub fn new(
        rule: &Rule,
        assignment: &FilterAssignment,
        seeded: &BTreeSet<Pred>,
    ) -> Result<Self, FilterError> {
        let theta_h = assignment.formula(&rule.head.pred);
        let f_plus = FilterExpr::And(vec![apply_iota(&rule.head, &theta_h)?, rule.filter.clone()]);
        let mut minus = Vec::new();
        for a in &rule.positive {
            if assignment.filters.contains_key(&a.pred) && !seeded.contains(&a.pred) {
                minus.push(apply_iota(a, &assignment.formula(&a.pred))?);
            }
        }
        Ok(AdmissibilityContext {
            rule: rule.clone(),
            f_plus,
            f_minus: FilterExpr::And(minus),
        })
    }

    fn var_context(&self) -> VarContext {
        VarContext::new(self.rule.vars())
    }
}

struct Checker<'a> {
    ctx: VarContext,
    regime: &'a Regime,
}

impl Checker<'_> {
    fn formula(&mut self, e: &FilterExpr) -> Formula {
        self.ctx
            .formula_of(e)
            .expect("filters of normalized rules range over variables")
    }

    fn entails(&mut self, f: &FilterExpr, g: &FilterExpr) -> Result<bool, CapExceeded> {
        let (f, g) = (self.formula(f), self.formula(g));
        self.regime.entails(&f, &g)
    }
}

/// Checks `F₊ |≈ ψ` and `ψ ∧ F₋ |≈ F₊`.
pub fn is_admissible(
    ctx: &AdmissibilityContext,
    psi: &FilterExpr,
    regime: &Regime,
) -> Result<bool, CapExceeded> {
    let mut c = Checker {
        ctx: ctx.var_context(),
        regime,
    };
    let both = FilterExpr::And(vec![psi.clone(), ctx.f_minus.clone()]);
    Ok(c.entails(&ctx.f_plus, psi)? && c.entails(&both, &ctx.f_plus)?)
}

/// Copy of `e` with the atoms whose preorder index is not in `keep`
/// replaced by ⊤.
fn masked(e: &FilterExpr, keep: &[bool], next: &mut usize) -> FilterExpr {
    match e {
        FilterExpr::Atom(_) => {
            let i = *next;
            *next += 1;
            if keep[i] {
                e.clone()
            } else {
                FilterExpr::Top
            }
        }
        FilterExpr::And(v) => FilterExpr::And(v.iter().map(|x| masked(x, keep, next)).collect()),
        FilterExpr::Or(v) => FilterExpr::Or(v.iter().map(|x| masked(x, keep, next)).collect()),
        other => other.clone(),
    }
}

/// Greedy pass over the atom occurrences of F₊, leftmost-outermost first:
/// an occurrence is dropped when F₋ and the rest still entail the current
/// formula. Occurrences whose entailment check hits the DNF cap, or whose
/// removal would leave a variable unbound, are kept.
pub fn compute_admissible_filter(ctx: &AdmissibilityContext, regime: &Regime) -> FilterExpr {
    let mut c = Checker {
        ctx: ctx.var_context(),
        regime,
    };
    let n = ctx.f_plus.atoms().len();
    let mut keep = vec![true; n];
    let unsafe_before: BTreeSet<_> = unsafe_variables(&ctx.rule).into_iter().collect();
    let with = |keep: &[bool]| masked(&ctx.f_plus, keep, &mut 0);
    for o in 0..n {
        let current = with(&keep);
        keep[o] = false;
        let candidate = with(&keep);
        let premise = FilterExpr::And(vec![ctx.f_minus.clone(), candidate.clone()]);
        let ok = matches!(c.entails(&premise, &current), Ok(true)) && {
            let r = Rule {
                filter: candidate.simplify(),
                ..ctx.rule.clone()
            };
            unsafe_variables(&r)
                .iter()
                .all(|v| unsafe_before.contains(v))
        };
        if !ok {
            keep[o] = true;
        }
    }
    let f_plus = c.formula(&ctx.f_plus);
    if matches!(regime.is_unsat(&f_plus), Ok(true)) {
        return FilterExpr::Bottom;
    }
    with(&keep).simplify()
}

/// Rewriting of a whole program plus what happened to each rule.
#[derive(Clone, Debug)]
pub struct RewriteReport {
    pub program: Program,
    /// 1-based indices of deleted rules in the normalized input
    pub deleted: Vec<usize>,
    /// admissible filter chosen for each rule of the normalized input
    pub filters: Vec<FilterExpr>,
}

pub fn rewrite_program(
    program: &Program,
    assignment: &FilterAssignment,
    regime: &Regime,
) -> Result<Program, EngineError> {
    Ok(rewrite_with_report(program, assignment, regime)?.program)
}

pub fn rewrite_with_report(
    program: &Program,
    assignment: &FilterAssignment,
    regime: &Regime,
) -> Result<RewriteReport, EngineError> {
    let program = normalize(program)?;
    let seeded = program.seeded_predicates();
    let mut rules = Vec::new();
    let mut deleted = Vec::new();
    let mut filters = Vec::new();
    for (i, r) in program.rules.iter().enumerate() {
        let ctx = AdmissibilityContext::new(r, assignment, &seeded)?;
        let psi = compute_admissible_filter(&ctx, regime);
        filters.push(psi.clone());
        match psi {
            FilterExpr::Bottom => deleted.push(i + 1),
            psi => rules.push(Rule {
                filter: psi,
                ..r.clone()
            }),
        }
    }
    Ok(RewriteReport {
        program: Program { rules, ..program },
        deleted,
        filters,
    })
}

/// Normalization, filter computation and rewriting in one call.
#[derive(Clone, Debug)]
pub struct Optimized {
    pub normalized: Program,
    pub assignment: FilterAssignment,
    pub rewritten: Program,
    pub deleted: Vec<usize>,
}

pub fn optimize(program: &Program, config: &FilterConfig) -> Result<Optimized, EngineError> {
    let normalized = normalize(program)?;
    let assignment = compute_filters(&normalized, config)?;
    let report = rewrite_with_report(&normalized, &assignment, &config.regime)?;
    Ok(Optimized {
        normalized,
        assignment,
        rewritten: report.program,
        deleted: report.deleted,
    })
}

/// IDB predicates that lost every rule in the rewriting.
pub fn emptied_predicates(original: &Program, rewritten: &Program) -> BTreeSet<Pred> {
    let after = idb_predicates(rewritten);
    idb_predicates(original)
        .into_iter()
        .filter(|p| !after.contains(p))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Mode;
    use crate::filter::{
        instantiate_order_theory, numeric_filter_constants, HornTheory, TheoryRule,
    };
    use crate::parser::parse_str;

    const EX2: &str =
        "@output out/1.\nr(X,Y,N) :- e(X,Y), N = 0.\nr(X,Z,M) :- r(X,Y,N), e(Y,Z), M = N + 1.\n\
                       out(Y) :- r(X,Y,N), X = a, N <= 5.\n";

    fn auto(program: &Program) -> Regime {
        Regime::horn(instantiate_order_theory(&numeric_filter_constants(
            &program.filter_predicates(),
        )))
    }

    /// Filters as sets of rendered conjuncts, so conjunct order does not matter.
    fn conjunct_set(e: &FilterExpr) -> BTreeSet<String> {
        e.conjuncts()
            .into_iter()
            .map(crate::emit::render_filter)
            .collect()
    }

    #[test]
    fn example2_rewrites_to_rules_7_to_9() {
        let prog = parse_str(EX2).unwrap();
        let expected = parse_str(
            "@output out/1.\nr(X,Y,N) :- e(X,Y), X = a, N = 0.\nr(X,Z,M) :- r(X,Y,N), e(Y,Z), M <= 5, M = N + 1.\n\
             out(Y) :- r(X,Y,N).",
        )
        .unwrap();
        for mode in [Mode::Full, Mode::Casf] {
            let out = optimize(&prog, &FilterConfig::new(mode, auto(&prog))).unwrap();
            assert_eq!(out.rewritten.rules.len(), 3);
            for (got, want) in out.rewritten.rules.iter().zip(&expected.rules) {
                assert_eq!(got.head, want.head);
                assert_eq!(got.positive, want.positive);
                assert_eq!(conjunct_set(&got.filter), conjunct_set(&want.filter));
            }
        }
    }

    #[test]
    fn admissibility_examples() {
        let prog = normalize(&parse_str(EX2).unwrap()).unwrap();
        let regime = auto(&prog);
        let a = compute_filters(&prog, &FilterConfig::new(Mode::Full, regime.clone())).unwrap();
        let seeded = BTreeSet::new();
        let ctx7 = AdmissibilityContext::new(&prog.rules[0], &a, &seeded).unwrap();
        let psi7 = parse_str("r(X,Y,N) :- e(X,Y), N = 0, X = a.")
            .unwrap()
            .rules[0]
            .filter
            .clone();
        assert!(is_admissible(&ctx7, &psi7, &regime).unwrap());
        assert!(is_admissible(&ctx7, &ctx7.f_plus, &regime).unwrap());
        assert!(!is_admissible(&ctx7, &FilterExpr::Top, &regime).unwrap());
        let ctx9 = AdmissibilityContext::new(&prog.rules[2], &a, &seeded).unwrap();
        assert!(is_admissible(&ctx9, &FilterExpr::Top, &regime).unwrap());
        assert_eq!(compute_admissible_filter(&ctx9, &regime), FilterExpr::Top);
        let psi8 = compute_admissible_filter(
            &AdmissibilityContext::new(&prog.rules[1], &a, &seeded).unwrap(),
            &regime,
        );
        assert_eq!(crate::emit::render_filter(&psi8), "M <= 5, M = N + 1");
    }

    #[test]
    fn inconsistent_filter_deletes_rule() {
        let mut prog =
            parse_str("@output o/1.\no(X) :- e(X), X = 0, X = 1.\no(X) :- f(X).").unwrap();
        let x = crate::ast::Term::var("X");
        let eq = |c: i64| {
            crate::ast::Atom::from_pred(
                crate::ast::Builtin::EqConst(crate::ast::Const::Int(c)).pred(),
                vec![x.clone()],
            )
        };
        let theory = HornTheory::new(vec![TheoryRule {
            head: None,
            body: vec![eq(0), eq(1)],
        }])
        .unwrap();
        prog.theory = theory.clone();
        let out = optimize(&prog, &FilterConfig::new(Mode::Full, Regime::horn(theory))).unwrap();
        assert_eq!(out.deleted, vec![1]);
        assert_eq!(out.rewritten.rules.len(), 1);
    }

    #[test]
    fn idempotent_on_example2() {
        let prog = parse_str(EX2).unwrap();
        let cfg = FilterConfig::new(Mode::Full, auto(&prog));
        let once = optimize(&prog, &cfg).unwrap().rewritten;
        let twice = optimize(&once, &cfg).unwrap().rewritten;
        assert_eq!(once, twice);
    }

    #[test]
    fn binding_filter_is_kept() {
        // `next` entails the successor atom, but only the latter binds Z.
        let src = "@output o/2.\n@filter next/2.\n@theory { succ(X,Z) :- next(X,Z). }\n\
                   o(X, Z) :- e(X), next(X, Z), Z = X + 1.";
        let prog = parse_str(src).unwrap();
        let out = optimize(
            &prog,
            &FilterConfig::new(Mode::Full, Regime::horn(prog.theory.clone())),
        )
        .unwrap();
        assert_eq!(
            crate::emit::render_filter(&out.rewritten.rules[0].filter),
            "next(X, Z), Z = X + 1"
        );
    }
}
