//! Approximate projected model counting by XOR streamlining.
//!
//! A run repeatedly adds `k` random parity constraints over the counted
//! bits, enumerates up to `c` surviving solutions, and feeds the result to a
//! particle filter over `log2` of the count. The next `(k, c)` is chosen
//! from the current distribution, and the loop stops once the confidence
//! interval is narrower than a threshold or the count has been enumerated
//! exactly.
//!
//! ```
//! use xorcount::{parse_dimacs_str, run_search, CnfBackend, RunConfig, Status};
//!
//! let f = parse_dimacs_str("p cnf 3 1\nc ind 1 2 0\n1 2 3 0\n").unwrap();
//! let report = run_search(&mut CnfBackend::new(f), &RunConfig::default()).unwrap();
//! assert_eq!(report.status, Status::Exact);
//! assert_eq!(report.exact_count, Some(4));
//! ```

pub mod backend;
pub mod cnf;
pub mod driver;
pub mod estimator;
pub mod oracle;
pub mod rng;
pub mod sat;
pub mod smt;
pub mod sound;
pub mod xor;

pub use backend::{BackendError, CnfBackend, CountingBackend};
pub use cnf::{parse_dimacs, parse_dimacs_str, CnfError, CnfFormula, Lit, ParseError, Var};
pub use driver::{
    adjust_cl, calibrate, run_search, CountReport, ReportFormat, RunConfig, Status,
};
pub use estimator::{PriorKind, QueryPlan};
pub use rng::RandomSource;
pub use sat::{QueryOutcome, SolverSession};
pub use smt::{SmtBackend, SmtError, SmtProblem, SolverProcessConfig};
pub use sound::{sound_bounds, SoundBounds};
pub use xor::{draw_xor, encode_xor_cnf, XorConstraint};
