//! Interpreter and contextuality analyzer for P-programs.
//!
//! A P-program declares a number of measurement contexts, each a scope of
//! binary random variables that returns a joint probability table. The
//! analyzer evaluates every context and then decides whether a single global
//! probabilistic model exists:
//!
//! * when the variable-level schema of the tables is acyclic, the tables are
//!   joined along a join tree into one joint distribution ([`joiner`]);
//! * otherwise the contexts are mapped onto an event-level contextuality
//!   scenario ([`scenario`]) and the observed probabilities are checked
//!   against the edge normalization constraints ([`feasibility`]).
//!
//! The whole pipeline is driven by [`pipeline::analyze`].
//!
//! ```
//! use pprog_core::{frontend, pipeline};
//!
//! let src = "
//! var P1 = context() {
//!     var A = flip(0.7)
//!     var B = A ? flip(0.8) : flip(0.1)
//!     var p = [A, B]
//!     return {Infer({samples:1000}, p)}
//! };
//! var P2 = context() {
//!     var B = flip(0.4)
//!     var A = B ? flip(0.4) : flip(0.6)
//!     var p = [B, A]
//!     return {Infer({samples:1000}, p)}
//! };
//! return {model(P1, P2)}
//! ";
//! let program = frontend::load(src).unwrap();
//! let analysis = pipeline::analyze(&program, &pipeline::AnalysisOptions::default()).unwrap();
//! assert!(analysis.verdict.is_contextual());
//! ```

pub mod distribution;
pub mod evaluator;
pub mod exec;
pub mod feasibility;
pub mod frontend;
pub mod joiner;
pub mod pipeline;
pub mod rational;
pub mod scenario;
pub mod schema;

pub use distribution::{NamedTable, PTable, TableMode};
pub use exec::Execution;
pub use feasibility::Verdict;
pub use frontend::{Program, ValidatedProgram};
pub use num_rational::BigRational;
pub use pipeline::{analyze, Analysis, AnalysisOptions, EvalMode, Tolerance};
pub use scenario::Scenario;
