//! The query interface the search loop runs against.

use std::time::Duration;

use thiserror::Error;

use crate::cnf::{CnfFormula, Var};
use crate::sat::{QueryOutcome, SatError, SolverSession};
use crate::smt::SmtError;
use crate::xor::XorConstraint;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error(transparent)]
    Sat(#[from] SatError),
    #[error(transparent)]
    Smt(#[from] SmtError),
}

/// Something that can answer exhaust-up-to-c queries over a fixed set of
/// counted bits.
pub trait CountingBackend {
    /// Number of counted bits.
    fn width(&self) -> usize;

    /// Variable identifiers the random XOR constraints are drawn over,
    /// one per counted bit.
    fn xor_domain(&self) -> &[Var];

    /// Counts distinct projected solutions satisfying `xors`, stopping at
    /// `cap`. Each call starts from the unstreamlined problem.
    fn exhaust(&mut self, xors: &[XorConstraint], cap: u64) -> Result<QueryOutcome, BackendError>;
}

/// CNF counting with a fresh in-process solver per query.
#[derive(Debug, Clone)]
pub struct CnfBackend {
    formula: CnfFormula,
    timeout: Option<Duration>,
}

impl CnfBackend {
    pub fn new(formula: CnfFormula) -> Self {
        CnfBackend {
            formula,
            timeout: None,
        }
    }

    pub fn with_timeout(mut self, timeout: Option<Duration>) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn formula(&self) -> &CnfFormula {
        &self.formula
    }
}

impl CountingBackend for CnfBackend {
    fn width(&self) -> usize {
        self.formula.width()
    }

    fn xor_domain(&self) -> &[Var] {
        self.formula.projection()
    }

    fn exhaust(&mut self, xors: &[XorConstraint], cap: u64) -> Result<QueryOutcome, BackendError> {
        let mut session = SolverSession::load(&self.formula);
        session.set_timeout(self.timeout);
        Ok(session.exhaust_up_to_c(xors, cap)?)
    }
}

impl<B: CountingBackend + ?Sized> CountingBackend for &mut B {
    fn width(&self) -> usize {
        (**self).width()
    }
    fn xor_domain(&self) -> &[Var] {
        (**self).xor_domain()
    }
    fn exhaust(&mut self, xors: &[XorConstraint], cap: u64) -> Result<QueryOutcome, BackendError> {
        (**self).exhaust(xors, cap)
    }
}
