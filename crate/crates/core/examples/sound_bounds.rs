// Bounds that hold with a guaranteed probability from a single query.

use xorcount::driver::{Generator, PlantedGenerator};
use xorcount::rng::{RandomSource, Stream};
use xorcount::sound::{confidence_floor, epsilon_from_c, pivot, sound_bounds};
use xorcount::{draw_xor, run_search, CnfBackend, CountingBackend, RunConfig};

pub fn run_example() -> anyhow::Result<()> {
    println!("confidence floor {:.4}", confidence_floor());
    for c in [18, 24, 46, 64, 200] {
        println!("cap {c:>3}: tolerance {:.3}", epsilon_from_c(c)?);
    }
    println!("tolerance 0.53 needs cap {}", pivot(0.53));

    // One query with k = 4, c = 64 on 2^8 planted outputs.
    let mut backend = CnfBackend::new(PlantedGenerator::new(8, 12).generate(0));
    let mut rng = RandomSource::new(1);
    let xors: Vec<_> = (0..4)
        .map(|_| draw_xor(backend.xor_domain(), rng.stream(Stream::XorDraws)))
        .collect();
    let out = backend.exhaust(&xors, 64)?;
    if let Some(b) = sound_bounds(4, 64, &out, 12.0) {
        println!("n = {}: influence in [{:.3}, {:?}]", out.n_sat, b.lower, b.upper);
    }

    // A full run that also requires the sound interval to be narrow.
    let config = RunConfig {
        sound: true,
        ..RunConfig::default()
    };
    let report = run_search(&mut CnfBackend::new(PlantedGenerator::new(10, 16).generate(3)), &config)?;
    print!("{}", report.to_text());
    anyhow::ensure!(report.sound_lower.is_some());
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
