//! Named, seeded benchmark workloads.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use staticfilter_core::eval::FactStore;
use staticfilter_core::families::{self, Family, FamilyError};
use staticfilter_core::{Const, Pred};

use crate::graph::{node, random_graph};
use crate::report::{run_comparison, BenchReport, ComparisonOptions, Variant};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Workload {
    Counter {
        width: usize,
    },
    Witness {
        width: usize,
    },
    Reach {
        bound: i64,
        nodes: usize,
        edges: usize,
    },
    TransitiveClosure {
        nodes: usize,
        edges: usize,
    },
    Permutation {
        k: usize,
        facts: usize,
    },
}

impl Workload {
    pub fn name(&self) -> String {
        match self {
            Workload::Counter { width } => format!("counter-{width}"),
            Workload::Witness { width } => format!("witness-{width}"),
            Workload::Reach {
                bound,
                nodes,
                edges,
            } => format!("reach-{bound}-{nodes}n-{edges}e"),
            Workload::TransitiveClosure { nodes, edges } => format!("tc-{nodes}n-{edges}e"),
            Workload::Permutation { k, facts } => format!("permutation-{k}-{facts}f"),
        }
    }

    /// Graph workloads start from `n0`.
    pub fn build(&self, seed: u64) -> Result<Family, FamilyError> {
        match *self {
            Workload::Counter { width } => families::gen_counter(width),
            Workload::Witness { width } => families::gen_counter_witness(width),
            Workload::Reach {
                bound,
                nodes,
                edges,
            } => families::gen_bounded_reach(bound, &node(0), &random_graph(nodes, edges, seed)),
            Workload::TransitiveClosure { nodes, edges } => Ok(families::gen_transitive_closure(
                &node(0),
                &random_graph(nodes, edges, seed),
            )),
            Workload::Permutation { k, facts } => {
                let program = families::gen_permutation(k)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let pool: Vec<Const> = (1..=k)
                    .map(|i| Const::sym(&format!("a{i}")))
                    .chain([Const::sym("z")])
                    .collect();
                let mut store = FactStore::new();
                let p = Pred::new("p", k + 1);
                for i in 0..facts {
                    let mut t: Vec<Const> = (0..k)
                        .map(|_| pool.choose(&mut rng).unwrap().clone())
                        .collect();
                    t.push(Const::Int(i as i64));
                    store.insert(&p, t);
                }
                Ok(Family {
                    program,
                    facts: store,
                })
            }
        }
    }

    pub fn run(&self, seed: u64, runs: usize) -> Result<BenchReport, FamilyError> {
        let f = self.build(seed)?;
        let opts = ComparisonOptions {
            name: self.name(),
            seed: Some(seed),
            runs,
            ..ComparisonOptions::default()
        };
        Ok(run_comparison(
            &f.program,
            &f.facts,
            &Variant::standard(&f.program),
            &opts,
        ))
    }
}
