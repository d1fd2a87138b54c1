//! Incremental satisfiability interface and exhaust-up-to-c enumeration.

pub mod cdcl;

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::cnf::{CnfFormula, Lit, Var};
use crate::xor::{encode_xor_cnf, XorConstraint};

pub use cdcl::CdclSolver;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveResult {
    Sat,
    Unsat,
    /// Resource limit reached before an answer.
    Unknown,
}

/// The capability a back-end solver must offer.
pub trait SatSolver {
    /// Makes variables `1..=n` known to the solver.
    fn reserve_vars(&mut self, n: Var);
    fn add_clause(&mut self, lits: &[Lit]);
    fn solve(&mut self) -> SolveResult;
    /// Value of `var` in the last satisfying assignment.
    fn model_value(&self, var: Var) -> Option<bool>;
    fn set_deadline(&mut self, _deadline: Option<Instant>) {}

    /// Whether [`SatSolver::add_xor`] is supported natively.
    fn supports_xor(&self) -> bool {
        false
    }
    /// Adds a native parity clause. Only called when `supports_xor` is true.
    fn add_xor(&mut self, _vars: &[Var], _parity: bool) {
        unimplemented!("native parity clauses are not supported by this solver")
    }
}

/// Result of one exhaust-up-to-c query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct QueryOutcome {
    /// Distinct projected solutions found.
    pub n_sat: u64,
    /// Enumeration stopped at the cap, so the true count is at least `n_sat`.
    pub saturated: bool,
    /// Satisfiability calls issued.
    pub solver_calls: u64,
}

impl QueryOutcome {
    /// A complete enumeration of `n` solutions (`n + 1` calls).
    pub fn exact(n: u64) -> Self {
        QueryOutcome {
            n_sat: n,
            saturated: false,
            solver_calls: n + 1,
        }
    }

    /// An enumeration that stopped at the cap `c` (`c` calls).
    pub fn saturated(c: u64) -> Self {
        QueryOutcome {
            n_sat: c,
            saturated: true,
            solver_calls: c,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SatError {
    #[error("solver call exceeded the time limit after {} solutions", partial.n_sat)]
    Timeout { partial: QueryOutcome },
    #[error("enumeration cap must be at least 1")]
    ZeroCap,
    #[error("projected assignment has {got} values, projection has {want}")]
    AssignmentWidth { got: usize, want: usize },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SessionStats {
    pub solve_calls: u64,
    pub blocking_clauses: u64,
    pub xor_constraints: u64,
}

/// A formula loaded into a solver, plus streamlining and blocking state.
pub struct SolverSession<S: SatSolver = CdclSolver> {
    solver: S,
    projection: Vec<Var>,
    next_free_var: Var,
    timeout: Option<Duration>,
    stats: SessionStats,
}

impl SolverSession<CdclSolver> {
    pub fn load(f: &CnfFormula) -> Self {
        Self::with_solver(f, CdclSolver::new())
    }
}

impl<S: SatSolver> SolverSession<S> {
    pub fn with_solver(f: &CnfFormula, mut solver: S) -> Self {
        solver.reserve_vars(f.num_vars());
        for c in f.clauses() {
            solver.add_clause(c);
        }
        SolverSession {
            solver,
            projection: f.projection().to_vec(),
            next_free_var: f.num_vars() + 1,
            timeout: None,
            stats: SessionStats::default(),
        }
    }

    /// Per-call time limit; `None` disables it.
    pub fn set_timeout(&mut self, timeout: Option<Duration>) {
        self.timeout = timeout;
    }

    pub fn stats(&self) -> SessionStats {
        self.stats
    }

    pub fn projection(&self) -> &[Var] {
        &self.projection
    }

    /// Adds parity constraints, natively when the solver supports it and as
    /// a parity chain over fresh auxiliaries otherwise.
    pub fn add_xors(&mut self, xors: &[XorConstraint]) {
        for x in xors {
            debug_assert!(x.vars.iter().all(|v| self.projection.binary_search(v).is_ok()));
            self.stats.xor_constraints += 1;
            if self.solver.supports_xor() {
                self.solver.add_xor(&x.vars, x.parity);
                continue;
            }
            let (clauses, next) = encode_xor_cnf(x, self.next_free_var);
            if next > self.next_free_var {
                self.solver.reserve_vars(next - 1);
            }
            self.next_free_var = next;
            for c in &clauses {
                self.solver.add_clause(c);
            }
        }
    }

    pub fn solve(&mut self) -> SolveResult {
        self.stats.solve_calls += 1;
        self.solver
            .set_deadline(self.timeout.map(|t| Instant::now() + t));
        self.solver.solve()
    }

    /// The projection part of the last model, in projection order.
    pub fn projected_model(&self) -> Vec<bool> {
        self.projection
            .iter()
            .map(|&v| self.solver.model_value(v).unwrap_or(false))
            .collect()
    }

    /// Excludes one projected assignment (given in projection order),
    /// whatever the values of the other variables.
    pub fn block(&mut self, projected: &[bool]) -> Result<(), SatError> {
        if projected.len() != self.projection.len() {
            return Err(SatError::AssignmentWidth {
                got: projected.len(),
                want: self.projection.len(),
            });
        }
        let clause: Vec<Lit> = self
            .projection
            .iter()
            .zip(projected)
            .map(|(&v, &val)| if val { -(v as Lit) } else { v as Lit })
            .collect();
        self.solver.add_clause(&clause);
        self.stats.blocking_clauses += 1;
        Ok(())
    }

    /// Adds `xors`, then enumerates distinct projected solutions with
    /// blocking until the formula is exhausted or `cap` solutions are found.
    pub fn exhaust_up_to_c(
        &mut self,
        xors: &[XorConstraint],
        cap: u64,
    ) -> Result<QueryOutcome, SatError> {
        self.exhaust_with(xors, cap, |_| {})
    }

    /// Like [`Self::exhaust_up_to_c`], reporting each projected solution.
    pub fn exhaust_with<F: FnMut(&[bool])>(
        &mut self,
        xors: &[XorConstraint],
        cap: u64,
        mut on_solution: F,
    ) -> Result<QueryOutcome, SatError> {
        if cap == 0 {
            return Err(SatError::ZeroCap);
        }
        self.add_xors(xors);
        let mut out = QueryOutcome {
            n_sat: 0,
            saturated: false,
            solver_calls: 0,
        };
        loop {
            out.solver_calls += 1;
            match self.solve() {
                SolveResult::Unsat => return Ok(out),
                SolveResult::Unknown => return Err(SatError::Timeout { partial: out }),
                SolveResult::Sat => {
                    let m = self.projected_model();
                    on_solution(&m);
                    out.n_sat += 1;
                    if out.n_sat == cap {
                        out.saturated = true;
                        return Ok(out);
                    }
                    self.block(&m)?;
                }
            }
        }
    }
}
