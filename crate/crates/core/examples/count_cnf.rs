// Counts the projected solutions of a DIMACS formula, first exactly on a
// small projection and then approximately on a larger one.

use xorcount::driver::{Generator, PlantedGenerator};
use xorcount::{parse_dimacs_str, run_search, CnfBackend, RunConfig, Status};

pub fn run_example() -> anyhow::Result<()> {
    // x1 ∨ x2 projected onto {x1, x2}: three assignments, whatever x3 does.
    let small = parse_dimacs_str("p cnf 3 2\nc ind 1 2 0\n1 2 0\n-3 1 2 0\n")?;
    let report = run_search(&mut CnfBackend::new(small), &RunConfig::default())?;
    print!("{}", report.to_text());
    anyhow::ensure!(report.exact_count == Some(3));

    // 2^12 outputs over 18 projected bits: too many to enumerate cheaply.
    let big = PlantedGenerator::new(12, 18).generate(1);
    let config = RunConfig {
        seed: 5,
        ..RunConfig::default()
    };
    let report = run_search(&mut CnfBackend::new(big), &config)?;
    print!("{}", report.to_text());
    anyhow::ensure!(report.status == Status::Interval);
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
