// Random parity constraints halve the solution count on average.

use xorcount::rng::{RandomSource, Stream};
use xorcount::{draw_xor, encode_xor_cnf, parse_dimacs_str, CountingBackend, CnfBackend};

pub fn run_example() -> anyhow::Result<()> {
    // Ten unconstrained projected bits: 1024 solutions.
    let f = parse_dimacs_str("p cnf 10 0\n")?;
    let mut rng = RandomSource::new(2024);

    let x = draw_xor(f.projection(), rng.stream(Stream::XorDraws));
    let (clauses, next) = encode_xor_cnf(&x, f.num_vars() + 1);
    println!(
        "constraint over {:?} = {}: {} clauses, next free variable {next}",
        x.vars,
        x.parity as u8,
        clauses.len()
    );

    let mut backend = CnfBackend::new(f);
    for k in 0..=6u32 {
        let trials = 40;
        let mut total = 0;
        for _ in 0..trials {
            let xors: Vec<_> = (0..k)
                .map(|_| draw_xor(backend.xor_domain(), rng.stream(Stream::XorDraws)))
                .collect();
            total += backend.exhaust(&xors, 2048)?.n_sat;
        }
        let mean = total as f64 / trials as f64;
        println!("k = {k}: mean survivors {mean:.1} (expected {})", 1024 >> k);
        anyhow::ensure!((mean - (1024 >> k) as f64).abs() < 0.5 * (1024 >> k) as f64);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
