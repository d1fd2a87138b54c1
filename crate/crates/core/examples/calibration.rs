// Scores repeated runs against exact counts: how often does the reported
// interval contain the truth?

use xorcount::driver::{calibrate, PlantedGenerator, RandomCnfGenerator};
use xorcount::RunConfig;

pub fn run_example() -> anyhow::Result<()> {
    let config = RunConfig {
        cl: 0.8,
        ..RunConfig::default()
    };
    let table = calibrate(&PlantedGenerator::new(9, 14), 24, &config)?;
    print!("{}", table.to_text());
    anyhow::ensure!(table.coverage >= 0.6);

    let table = calibrate(&RandomCnfGenerator::default(), 24, &config)?;
    println!(
        "{}: coverage {:.2}, median queries {}",
        table.generator, table.coverage, table.median_queries
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
