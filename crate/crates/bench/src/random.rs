//! Seeded random programs and databases for equivalence suites.
//!
//! Programs use the EDB predicates `e/2`, `f/1`, the IDB predicates `q/1`,
//! `r/2`, `s/3` and filters built from `X = c`, `X <= c`, `Z = X + 1` and
//! `X = Y`. Every rule is safe: head, negated and filter variables are drawn
//! from the positive body.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use staticfilter_core::eval::FactStore;
use staticfilter_core::filter::auto_theory;
use staticfilter_core::normalize::normalize;
use staticfilter_core::parser::parse_str;
use staticfilter_core::{Const, Pred, Program};

const VARS: [&str; 4] = ["A", "B", "C", "D"];
pub const CONSTS: [&str; 5] = ["a", "b", "0", "1", "2"];
const EDB: [(&str, usize); 2] = [("e", 2), ("f", 1)];
const IDB: [(&str, usize); 3] = [("q", 1), ("r", 2), ("s", 3)];

#[derive(Clone, Copy, Debug)]
pub struct RandomConfig {
    pub max_rules: usize,
    pub negation: bool,
    pub max_facts: usize,
    /// database constants are drawn from the first `domain` entries of [`CONSTS`]
    pub domain: usize,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig {
            max_rules: 5,
            negation: false,
            max_facts: 50,
            domain: CONSTS.len(),
        }
    }
}

fn body_atom(rng: &mut impl Rng) -> (&'static str, Vec<String>) {
    let all: Vec<(&str, usize)> = EDB.iter().chain(IDB.iter()).copied().collect();
    let (name, arity) = *all.choose(rng).unwrap();
    let args = (0..arity)
        .map(|_| {
            if rng.gen_bool(0.75) {
                VARS.choose(rng).unwrap().to_string()
            } else {
                CONSTS.choose(rng).unwrap().to_string()
            }
        })
        .collect();
    (name, args)
}

fn pick(bound: &[String], rng: &mut impl Rng) -> String {
    match bound.choose(rng) {
        Some(v) => v.clone(),
        None => CONSTS.choose(rng).unwrap().to_string(),
    }
}

fn rule_text(rng: &mut impl Rng, head: (&str, usize), negation: bool) -> String {
    let body: Vec<(&str, Vec<String>)> =
        (0..rng.gen_range(1..=2)).map(|_| body_atom(rng)).collect();
    let mut bound: Vec<String> = Vec::new();
    for (_, args) in &body {
        for a in args {
            if VARS.contains(&a.as_str()) && !bound.contains(a) {
                bound.push(a.clone());
            }
        }
    }
    let head_args: Vec<String> = (0..head.1).map(|_| pick(&bound, rng)).collect();
    let mut lits: Vec<String> = body
        .iter()
        .map(|(n, a)| format!("{n}({})", a.join(",")))
        .collect();
    if negation && rng.gen_bool(0.5) {
        let (name, arity) = *EDB
            .iter()
            .chain(IDB.iter())
            .collect::<Vec<_>>()
            .choose(rng)
            .unwrap();
        let args: Vec<String> = (0..*arity).map(|_| pick(&bound, rng)).collect();
        lits.push(format!("not {name}({})", args.join(",")));
    }
    if !bound.is_empty() {
        for _ in 0..rng.gen_range(0..=2) {
            let x = pick(&bound, rng);
            lits.push(match rng.gen_range(0..4) {
                0 => format!("{x} = {}", CONSTS.choose(rng).unwrap()),
                1 => format!("{x} <= {}", rng.gen_range(0..3)),
                2 => format!("{} = {x} + 1", pick(&bound, rng)),
                _ => format!("{x} = {}", pick(&bound, rng)),
            });
        }
    }
    format!(
        "{}({}) :- {}.\n",
        head.0,
        head_args.join(","),
        lits.join(", ")
    )
}

/// A random program. The first rule defines the output `q/1`; `r/2` is a
/// second output in some programs.
pub fn random_program(rng: &mut impl Rng, cfg: &RandomConfig) -> Program {
    let n = rng.gen_range(1..=cfg.max_rules.max(1));
    let heads: Vec<(&str, usize)> = (0..n)
        .map(|i| {
            if i == 0 {
                IDB[0]
            } else {
                *IDB.choose(rng).unwrap()
            }
        })
        .collect();
    let two_outputs = rng.gen_bool(0.3) && heads.contains(&IDB[1]);
    let mut text = String::from(if two_outputs {
        "@output q/1, r/2.\n"
    } else {
        "@output q/1.\n"
    });
    for h in heads {
        text += &rule_text(rng, h, cfg.negation);
    }
    let mut p = parse_str(&text)
        .unwrap_or_else(|e| panic!("generated program does not parse: {e}\n{text}"));
    p.theory = auto_theory(&p);
    p
}

pub fn random_database(rng: &mut impl Rng, cfg: &RandomConfig) -> FactStore {
    let domain = &CONSTS[..cfg.domain.clamp(1, CONSTS.len())];
    let mut s = FactStore::new();
    for _ in 0..rng.gen_range(0..=cfg.max_facts) {
        let (name, arity) = *EDB.choose(rng).unwrap();
        let args = (0..arity)
            .map(|_| Const::parse(domain.choose(rng).unwrap()).unwrap())
            .collect();
        s.insert(&Pred::new(name, arity), args);
    }
    s
}

/// Normalized random program and database for case `index` of the suite
/// seeded with `seed`.
pub fn random_case(seed: u64, index: u64, cfg: &RandomConfig) -> (Program, FactStore) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let p = random_program(&mut rng, cfg);
    let mut p = normalize(&p).expect("generated programs normalize");
    p.theory = auto_theory(&p);
    let d = random_database(&mut rng, cfg);
    (p, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use staticfilter_core::ast::idb_predicates;
    use staticfilter_core::eval::{evaluate, EvalOptions};

    #[test]
    fn cases_are_reproducible() {
        let cfg = RandomConfig::default();
        for i in 0..20 {
            let (p1, d1) = random_case(3, i, &cfg);
            let (p2, d2) = random_case(3, i, &cfg);
            assert_eq!(p1, p2);
            assert_eq!(d1, d2);
        }
    }

    #[test]
    fn cases_respect_size_limits() {
        let cfg = RandomConfig {
            negation: true,
            ..RandomConfig::default()
        };
        for i in 0..200 {
            let (p, d) = random_case(11, i, &cfg);
            assert!(p.rules.len() <= 5);
            assert!(idb_predicates(&p).len() <= 3);
            assert!(p.rules.iter().all(|r| r.head.args.len() <= 3));
            assert!(d.len() <= 50);
        }
    }

    #[test]
    fn positive_cases_evaluate() {
        let cfg = RandomConfig::default();
        for i in 0..100 {
            let (p, d) = random_case(5, i, &cfg);
            evaluate(&p, &d, &EvalOptions::default()).unwrap();
        }
    }
}
