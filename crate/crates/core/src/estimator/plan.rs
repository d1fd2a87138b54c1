//! Choosing the next query: how many XOR constraints and how many
//! solutions to enumerate.

use serde::Serialize;

use super::particles::ParticleSet;

/// Smallest standard deviation used when sizing the enumeration cap.
pub const SIGMA_FLOOR: f64 = 1e-6;

/// Enumeration cap of a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Cap {
    /// At most this many solutions.
    Finite(u64),
    /// Enumerate everything (bounded only by the driver's safety cap).
    Exhaustive,
}

impl Cap {
    /// The concrete limit once a safety cap is applied.
    pub fn limit(self, safety_cap: u64) -> u64 {
        match self {
            Cap::Finite(c) => c.min(safety_cap),
            Cap::Exhaustive => safety_cap,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QueryPlan {
    pub k: u32,
    pub cap: Cap,
}

impl QueryPlan {
    /// The exact-count query: no constraints, no cap.
    pub fn exhaustive() -> Self {
        QueryPlan {
            k: 0,
            cap: Cap::Exhaustive,
        }
    }

    /// `k` constraints with cap `c`; `k = 0` always means exhaustive.
    pub fn new(k: u32, c: u64) -> Self {
        if k == 0 {
            Self::exhaustive()
        } else {
            QueryPlan {
                k,
                cap: Cap::Finite(c.max(1)),
            }
        }
    }
}

/// The cap whose mid-ruler mark spacing matches `sigma`:
/// `ceil(((2^σ + 1) / (2^σ - 1))^2)`, with `σ` floored at [`SIGMA_FLOOR`].
pub fn cap_for_sigma(sigma: f64) -> u64 {
    let s = sigma.max(SIGMA_FLOOR).exp2();
    let r = (s + 1.0) / (s - 1.0);
    // Saturating float-to-int conversion.
    (r * r).ceil() as u64
}

/// Places the ruler so the prior mean sits in its upper half:
/// `k = floor(μ - log2(c) / 2)`; a non-positive `k` turns into the
/// exhaustive query.
pub fn plan_from_moments(mean: f64, sigma: f64) -> QueryPlan {
    let c = cap_for_sigma(sigma);
    let k = (mean - 0.5 * (c as f64).log2()).floor();
    if k <= 0.0 {
        QueryPlan::exhaustive()
    } else {
        QueryPlan::new(k as u32, c)
    }
}

pub fn compute_c_and_k(prior: &ParticleSet, width: f64) -> QueryPlan {
    let (mean, sigma) = prior.mean_sd();
    let plan = plan_from_moments(mean.min(width), sigma);
    debug_assert!(plan.k as f64 <= width.floor());
    plan
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cap_values() {
        assert_eq!(cap_for_sigma(1.0), 9);
        assert_eq!(cap_for_sigma(0.5), 34);
        // Huge σ: the ratio approaches 1 so the cap is 2.
        assert_eq!(cap_for_sigma(40.0), 2);
        // Floor keeps the cap finite.
        assert!(cap_for_sigma(0.0) > 1_000_000_000);
    }

    #[test]
    fn k_values() {
        assert_eq!(plan_from_moments(10.0, 1.0), QueryPlan::new(8, 9));
        assert_eq!(plan_from_moments(1.0, 1.0), QueryPlan::exhaustive());
        // floor(μ - ½log2 c) = 0 is also exhaustive.
        assert_eq!(plan_from_moments(2.0, 1.0), QueryPlan::exhaustive());
    }

    #[test]
    fn cap_monotone_in_sigma_and_k_below_mean() {
        let mut prev = u64::MAX;
        for i in 1..=40 {
            let sigma = i as f64 / 10.0;
            let c = cap_for_sigma(sigma);
            assert!(c <= prev, "σ={sigma}");
            prev = c;
            for mu in [0.5, 3.0, 7.7, 20.0, 63.9] {
                let p = plan_from_moments(mu, sigma);
                assert!(p.k as f64 <= mu.floor());
            }
        }
    }

    #[test]
    fn safety_cap() {
        assert_eq!(Cap::Exhaustive.limit(1 << 20), 1 << 20);
        assert_eq!(Cap::Finite(10).limit(1 << 20), 10);
        assert_eq!(Cap::Finite(u64::MAX).limit(5), 5);
    }
}
