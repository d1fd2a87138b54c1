// Counts distinct values of a bit-vector output through an external SMT
// solver. Does nothing if no solver is available.

use xorcount::{run_search, RunConfig, SmtBackend, SmtProblem, SolverProcessConfig};

const SCRIPT: &str = "(set-logic QF_BV)
(declare-fun secret () (_ BitVec 16))
(declare-fun out () (_ BitVec 16))
; An 11-bit secret times an odd constant: 2048 distinct outputs.
(assert (bvult secret #x0800))
(assert (= out (bvmul secret #x9E37)))
";

pub fn run_example() -> anyhow::Result<()> {
    let Some(solver) = SolverProcessConfig::from_env() else {
        println!("no SMT solver found; set XORCOUNT_SMT_SOLVER or install z3");
        return Ok(());
    };
    let problem = SmtProblem::parse(SCRIPT, "out", 16)?;
    let report = run_search(&mut SmtBackend::new(problem, solver), &RunConfig::default())?;
    print!("{}", report.to_text());
    anyhow::ensure!(report.contains_count(2048));
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
