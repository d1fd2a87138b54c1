use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use xorcount::estimator::{
    confidence_interval, make_prior, prob_at_least, resample_systematic, reweight, update,
    ParticleSet, PriorKind, QueryPlan,
};
use xorcount::{QueryOutcome, RandomSource};

fn weighted_set() -> impl Strategy<Value = ParticleSet> {
    (1.0f64..40.0).prop_flat_map(|width| {
        prop::collection::vec((0.0..=width, 0.0f64..1.0), 1..60)
            .prop_map(move |ps| ParticleSet::from_weighted(ps, width).unwrap())
    })
}

proptest! {
    #[test]
    fn at_least_is_decreasing_from_one(big_n in 0.0f64..5000.0, k in 0u32..12) {
        prop_assert_eq!(prob_at_least(big_n, k, 0), 1.0);
        let mut prev = 1.0;
        for n in 0..40u64 {
            let p = prob_at_least(big_n, k, n);
            prop_assert!((0.0..=1.0).contains(&p));
            prop_assert!(p <= prev + 1e-12, "N={} k={} n={}", big_n, k, n);
            prev = p;
        }
    }

    #[test]
    fn update_keeps_the_domain_and_equal_weights(
        set in weighted_set(),
        k in 1u32..6,
        c in 1u64..40,
        n_frac in 0.0f64..1.0,
        saturated in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let n_sat = if saturated { c } else { (n_frac * c as f64) as u64 };
        let outcome = QueryOutcome { n_sat, saturated, solver_calls: 0 };
        let plan = QueryPlan::new(k, c);
        let mut rng = RandomSource::new(seed);
        if let Ok((post, b)) = update(&set, &plan, &outcome, 0.9, &mut rng) {
            prop_assert_eq!(post.len(), set.len());
            let w0 = post.particles()[0].weight;
            prop_assert!(post.particles().iter().all(|p| p.weight == w0));
            prop_assert!(post.particles().iter().all(|p| (0.0..=set.width()).contains(&p.influence)));
            prop_assert!(b.lower <= b.mean + 1e-9 && b.mean <= b.upper + 1e-9);
            prop_assert!(b.lower >= 0.0 && b.upper <= set.width());
        }
        if let Ok(w) = reweight(&set, &plan, &outcome) {
            prop_assert!((w.total_weight() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn interval_grows_with_confidence(set in weighted_set()) {
        let mut prev = -1.0;
        for cl in [0.1, 0.3, 0.5, 0.8, 0.9, 0.99] {
            let (lo, hi) = confidence_interval(&set, cl);
            prop_assert!(hi - lo >= prev - 1e-12);
            prop_assert!(lo >= 0.0 && hi <= set.width());
            prev = hi - lo;
        }
    }

    #[test]
    fn priors_stay_in_range(width in 1.0f64..300.0, n in 1usize..200, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = make_prior(PriorKind::Uniform64, width, n, &mut rng).unwrap();
        prop_assert_eq!(p.len(), n);
        prop_assert!(p.particles().iter().all(|x| x.influence <= width.min(64.0)));
    }
}

#[test]
fn resampling_preserves_the_mean_on_average() {
    let xs: Vec<(f64, f64)> = (0..100).map(|i| (i as f64 * 0.1, 1.0 + (i % 7) as f64)).collect();
    let set = ParticleSet::from_weighted(xs, 10.0).unwrap();
    let target = set.mean();
    let means: Vec<f64> = (0..200)
        .map(|s| resample_systematic(&set, &mut ChaCha8Rng::seed_from_u64(s)).mean())
        .collect();
    let grand = means.iter().sum::<f64>() / 200.0;
    let sd = (means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / 199.0).sqrt();
    let se = sd / (200f64).sqrt();
    assert!((grand - target).abs() <= 3.0 * se.max(1e-12), "{grand} vs {target} (se {se})");
}
