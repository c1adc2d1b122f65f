//! Static filter inference and program rewriting for Datalog with filter
//! predicates.

pub mod ast;
pub mod emit;
pub mod engine;
pub mod eval;
pub mod families;
pub mod filter;
pub mod normalize;
pub mod parser;
pub mod rewrite;

pub use ast::{Atom, Builtin, Const, FilterExpr, Pred, Program, Rule, Symbol, Term};
pub use filter::{Formula, HornTheory};
