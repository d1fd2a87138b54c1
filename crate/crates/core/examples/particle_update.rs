// Drives the particle filter by hand: plan a query, observe, update.

use xorcount::estimator::{compute_c_and_k, make_prior, update, PriorKind};
use xorcount::oracle::ModelSetBackend;
use xorcount::rng::{RandomSource, Stream};
use xorcount::{draw_xor, CountingBackend};

pub fn run_example() -> anyhow::Result<()> {
    // 300 distinct 14-bit values; log2(300) ≈ 8.23.
    let mut backend = ModelSetBackend::new((0..300u64).map(|i| i * 53 % 16384), 14);
    let width = backend.width() as f64;
    let mut rng = RandomSource::new(9);
    let mut prior = make_prior(PriorKind::UniformWidth, width, 500, rng.stream(Stream::Resampling))?;

    for step in 1..=8 {
        let plan = compute_c_and_k(&prior, width);
        let cap = plan.cap.limit(1 << 16);
        let xors: Vec<_> = (0..plan.k)
            .map(|_| draw_xor(backend.xor_domain(), rng.stream(Stream::XorDraws)))
            .collect();
        let outcome = backend.exhaust(&xors, cap)?;
        let (post, est) = update(&prior, &plan, &outcome, 0.9, &mut rng)?;
        println!(
            "step {step}: k={} c={cap} n={}{} -> mean {:.2}, interval [{:.2}, {:.2}]",
            plan.k,
            outcome.n_sat,
            if outcome.saturated { "+" } else { "" },
            est.mean,
            est.lower,
            est.upper
        );
        prior = post;
    }
    anyhow::ensure!((prior.mean() - 300f64.log2()).abs() < 1.5);
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
