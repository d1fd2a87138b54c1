// Exact survivor distributions over every possible XOR draw, next to the
// binomial model the estimator assumes.

use xorcount::oracle::xor_survival_distribution;

pub fn run_example() -> anyhow::Result<()> {
    let sets: [(&str, &[u64], u32); 3] = [
        ("{00, 11}", &[0b00, 0b11], 2),
        ("all of 2 bits", &[0, 1, 2, 3], 2),
        ("{000, 011, 101, 110}", &[0b000, 0b011, 0b101, 0b110], 3),
    ];
    for (name, models, width) in sets {
        for k in 1..=2 {
            let d = xor_survival_distribution(models, width, k)?;
            println!("{name}, k = {k}: mean {} (binomial {})", d.mean(), d.binomial_mean());
            for (n, p) in &d.probs {
                println!("  P(n = {n}) = {p}   binomial {}", d.binomial_prob(*n));
            }
            anyhow::ensure!(d.mean() == d.binomial_mean());
            anyhow::ensure!(d.variance() == d.binomial_variance());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
