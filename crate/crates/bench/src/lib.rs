//! Benchmark harness: seeded workloads, original-vs-rewritten comparisons
//! and JSON reports.

pub mod graph;
pub mod pool;
pub mod random;
pub mod report;
pub mod workload;

pub use report::{
    reports_to_json, run_comparison, BenchReport, ComparisonOptions, Variant, VariantReport, SCHEMA,
};
pub use staticfilter_core::families::{
    edge_store, gen_bounded_reach, gen_counter, gen_counter_witness, gen_permutation,
    gen_transitive_closure, Family, FamilyError,
};
pub use workload::Workload;
