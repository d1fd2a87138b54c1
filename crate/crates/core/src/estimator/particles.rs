//! Particle representation of the distribution over influence, the
//! reweight/resample update, and interval extraction.

use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use thiserror::Error;

use super::binomial::{ln_prob_at_least, ln_prob_exact};
use super::plan::QueryPlan;
use crate::rng::{RandomSource, Stream};
use crate::sat::QueryOutcome;

pub const DEFAULT_PARTICLES: usize = 500;

/// Influence upper bound of the `uniform-64` prior.
pub const UNIFORM_64_MAX: f64 = 64.0;

/// Every particle weight became zero: the observation is impossible under
/// the current distribution.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("all particle weights are zero after the update")]
pub struct DegenerateUpdate;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PriorError {
    #[error("empty prior range [{lo}, {hi}]")]
    EmptyRange { lo: f64, hi: f64 },
    #[error("prior range [{lo}, {hi}] is outside [0, {width}]")]
    OutOfDomain { lo: f64, hi: f64, width: f64 },
    #[error("need at least one particle")]
    NoParticles,
    #[error("invalid prior `{0}` (expected uniform-width, uniform-64 or uniform:<lo>:<hi>)")]
    Syntax(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Particle {
    /// log2 of a hypothesised model count.
    pub influence: f64,
    pub weight: f64,
}

/// Weighted samples over influence values in `[0, width]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    particles: Vec<Particle>,
    width: f64,
}

impl ParticleSet {
    /// Equal-weight particles at the given influences (clamped to the domain).
    pub fn from_influences<I: IntoIterator<Item = f64>>(xs: I, width: f64) -> Self {
        let mut particles: Vec<Particle> = xs
            .into_iter()
            .map(|x| Particle {
                influence: x.clamp(0.0, width),
                weight: 1.0,
            })
            .collect();
        let n = particles.len() as f64;
        for p in &mut particles {
            p.weight = 1.0 / n;
        }
        ParticleSet { particles, width }
    }

    /// Weighted particles; weights are normalized.
    pub fn from_weighted<I: IntoIterator<Item = (f64, f64)>>(
        xs: I,
        width: f64,
    ) -> Result<Self, DegenerateUpdate> {
        let mut set = ParticleSet {
            particles: xs
                .into_iter()
                .map(|(x, w)| Particle {
                    influence: x.clamp(0.0, width),
                    weight: w.max(0.0),
                })
                .collect(),
            width,
        };
        set.normalize()?;
        Ok(set)
    }

    pub fn point_mass(x: f64, n: usize, width: f64) -> Self {
        Self::from_influences(std::iter::repeat_n(x, n.max(1)), width)
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn total_weight(&self) -> f64 {
        self.particles.iter().map(|p| p.weight).sum()
    }

    pub fn normalize(&mut self) -> Result<(), DegenerateUpdate> {
        let total = self.total_weight();
        if !total.is_finite() || total <= 0.0 {
            return Err(DegenerateUpdate);
        }
        for p in &mut self.particles {
            p.weight /= total;
        }
        Ok(())
    }

    /// Weighted mean and (population) standard deviation.
    pub fn mean_sd(&self) -> (f64, f64) {
        let total = self.total_weight();
        // Offsetting by one particle keeps a point mass exact.
        let origin = self.particles.first().map_or(0.0, |p| p.influence);
        let mean = origin
            + self
                .particles
                .iter()
                .map(|p| p.weight * (p.influence - origin))
                .sum::<f64>()
                / total;
        let var = self
            .particles
            .iter()
            .map(|p| p.weight * (p.influence - mean).powi(2))
            .sum::<f64>()
            / total;
        (mean, var.max(0.0).sqrt())
    }

    pub fn mean(&self) -> f64 {
        self.mean_sd().0
    }
}

/// Initial distribution over influence.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PriorKind {
    /// Uniform over `[0, width]`.
    UniformWidth,
    /// Uniform over `[0, min(64, width)]`.
    #[default]
    Uniform64,
    /// Uniform over `[lo, hi]`.
    Range { lo: f64, hi: f64 },
}

impl FromStr for PriorKind {
    type Err = PriorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform-width" => return Ok(PriorKind::UniformWidth),
            "uniform-64" => return Ok(PriorKind::Uniform64),
            _ => {}
        }
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["uniform", lo, hi] => {
                let lo: f64 = lo.parse().map_err(|_| PriorError::Syntax(s.into()))?;
                let hi: f64 = hi.parse().map_err(|_| PriorError::Syntax(s.into()))?;
                Ok(PriorKind::Range { lo, hi })
            }
            _ => Err(PriorError::Syntax(s.into())),
        }
    }
}

impl PriorKind {
    /// The sampled interval for a given output width.
    pub fn range(self, width: f64) -> Result<(f64, f64), PriorError> {
        let (lo, hi) = match self {
            PriorKind::UniformWidth => (0.0, width),
            PriorKind::Uniform64 => (0.0, UNIFORM_64_MAX.min(width)),
            PriorKind::Range { lo, hi } => (lo, hi),
        };
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(PriorError::EmptyRange { lo, hi });
        }
        if lo < 0.0 || hi > width {
            return Err(PriorError::OutOfDomain { lo, hi, width });
        }
        Ok((lo, hi))
    }
}

/// `n` equal-weight particles drawn uniformly from the prior's range.
pub fn make_prior<R: Rng + ?Sized>(
    kind: PriorKind,
    width: f64,
    n: usize,
    rng: &mut R,
) -> Result<ParticleSet, PriorError> {
    if n == 0 {
        return Err(PriorError::NoParticles);
    }
    let (lo, hi) = kind.range(width)?;
    let xs: Vec<f64> = (0..n)
        .map(|_| lo + (hi - lo) * rng.random::<f64>())
        .collect();
    Ok(ParticleSet::from_influences(xs, width))
}

/// Multiplies each weight by the likelihood of `outcome` under `plan` for
/// that particle's count `2^x`, then normalizes.
pub fn reweight(
    prior: &ParticleSet,
    plan: &QueryPlan,
    outcome: &QueryOutcome,
) -> Result<ParticleSet, DegenerateUpdate> {
    let log_w: Vec<f64> = prior
        .particles
        .iter()
        .map(|p| {
            let n = p.influence.exp2();
            let ll = if outcome.saturated {
                ln_prob_at_least(n, plan.k, outcome.n_sat)
            } else {
                ln_prob_exact(n, plan.k, outcome.n_sat)
            };
            p.weight.ln() + ll
        })
        .collect();
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(DegenerateUpdate);
    }
    let particles: Vec<Particle> = prior
        .particles
        .iter()
        .zip(&log_w)
        .map(|(p, &lw)| Particle {
            influence: p.influence,
            weight: (lw - max).exp(),
        })
        .collect();
    let mut post = ParticleSet {
        particles,
        width: prior.width,
    };
    post.normalize()?;
    Ok(post)
}

/// Systematic (low-variance) resampling to equal weights.
pub fn resample_systematic<R: Rng + ?Sized>(set: &ParticleSet, rng: &mut R) -> ParticleSet {
    let n = set.len();
    let total = set.total_weight();
    let step = total / n as f64;
    let mut u = rng.random::<f64>() * step;
    let mut xs = Vec::with_capacity(n);
    let mut cum = 0.0;
    let mut i = 0;
    for _ in 0..n {
        while i < n - 1 && cum + set.particles[i].weight <= u {
            cum += set.particles[i].weight;
            i += 1;
        }
        xs.push(set.particles[i].influence);
        u += step;
    }
    ParticleSet::from_influences(xs, set.width)
}

/// Standard deviation of the post-resampling jitter.
pub fn jitter_sd(sigma: f64) -> f64 {
    (0.1 * sigma).max(0.02)
}

fn add_jitter<R: Rng + ?Sized>(set: &mut ParticleSet, sd: f64, rng: &mut R) {
    let normal = Normal::new(0.0, sd).expect("positive jitter sd");
    let width = set.width;
    for p in &mut set.particles {
        p.influence = (p.influence + normal.sample(rng)).clamp(0.0, width);
    }
}

/// Summary of a posterior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsEstimate {
    pub mean: f64,
    pub sd: f64,
    pub lower: f64,
    pub upper: f64,
    pub confidence_level: f64,
}

impl BoundsEstimate {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Interval centred on the weighted mean: the smallest `δ` such that
/// `[μ - δ/2, μ + δ/2]` holds at least `cl` of the mass. An interval
/// sticking out of `[0, width]` is shifted back inside at the same length.
pub fn confidence_interval(post: &ParticleSet, cl: f64) -> (f64, f64) {
    let (mean, _) = post.mean_sd();
    let total = post.total_weight();
    let mut by_dist: Vec<(f64, f64)> = post
        .particles
        .iter()
        .map(|p| ((p.influence - mean).abs(), p.weight))
        .collect();
    by_dist.sort_by(|a, b| a.0.total_cmp(&b.0));
    let target = cl * total * (1.0 - 1e-12);
    let mut acc = 0.0;
    let mut half = 0.0;
    for (d, w) in by_dist {
        acc += w;
        half = d;
        if acc >= target {
            break;
        }
    }
    let width = post.width;
    let len = (2.0 * half).min(width);
    let mut lo = mean - len / 2.0;
    let mut hi = mean + len / 2.0;
    if lo < 0.0 {
        lo = 0.0;
        hi = len;
    }
    if hi > width {
        hi = width;
        lo = width - len;
    }
    (lo.max(0.0), hi.min(width))
}

/// One filter step: reweight by the observation, resample systematically,
/// jitter, and summarize at confidence `cl`.
///
/// The jitter has standard deviation `max(0.02, 0.1 σ)` with `σ` the
/// reweighted spread; it is skipped after a complete `k = 0` enumeration,
/// which observes the count exactly.
pub fn update(
    prior: &ParticleSet,
    plan: &QueryPlan,
    outcome: &QueryOutcome,
    cl: f64,
    rng: &mut RandomSource,
) -> Result<(ParticleSet, BoundsEstimate), DegenerateUpdate> {
    let weighted = reweight(prior, plan, outcome)?;
    let (_, sigma) = weighted.mean_sd();
    let mut post = resample_systematic(&weighted, rng.stream(Stream::Resampling));
    if plan.k > 0 || outcome.saturated {
        add_jitter(&mut post, jitter_sd(sigma), rng.stream(Stream::Jitter));
    }
    let (mean, sd) = post.mean_sd();
    let (lower, upper) = confidence_interval(&post, cl);
    Ok((
        post,
        BoundsEstimate {
            mean,
            sd,
            lower,
            upper,
            confidence_level: cl,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
        let n = ((hi - lo) / step).round() as usize;
        (0..=n).map(|i| lo + i as f64 * step).collect()
    }

    #[test]
    fn point_mass_survives_exact_observation() {
        let prior = ParticleSet::point_mass(3.0, 50, 8.0);
        let mut rng = RandomSource::new(1);
        let (post, b) = update(
            &prior,
            &QueryPlan::exhaustive(),
            &QueryOutcome::exact(8),
            0.9,
            &mut rng,
        )
        .unwrap();
        assert!(post.particles().iter().all(|p| p.influence == 3.0));
        assert_eq!((b.lower, b.mean, b.upper), (3.0, 3.0, 3.0));
    }

    #[test]
    fn impossible_hypothesis_eliminated() {
        let prior = ParticleSet::from_influences([1.0, 10.0], 16.0);
        let w = reweight(&prior, &QueryPlan::exhaustive(), &QueryOutcome::exact(2)).unwrap();
        assert_eq!(w.particles()[0].weight, 1.0);
        assert_eq!(w.particles()[1].weight, 0.0);
        let mut rng = RandomSource::new(2);
        let (post, _) = update(
            &prior,
            &QueryPlan::exhaustive(),
            &QueryOutcome::exact(2),
            0.9,
            &mut rng,
        )
        .unwrap();
        assert!(post.particles().iter().all(|p| p.influence == 1.0));
    }

    #[test]
    fn degenerate_update_is_reported() {
        let prior = ParticleSet::from_influences([1.0, 2.0], 16.0);
        // 100 survivors are impossible with at most 4 models.
        let err = reweight(&prior, &QueryPlan::new(3, 200), &QueryOutcome::exact(100));
        assert_eq!(err, Err(DegenerateUpdate));
    }

    /// Independent reference for P(at least n): a plain product formula for
    /// the generalized binomial coefficient, summed in linear space.
    fn reference_at_least(big_n: f64, k: u32, n: u64) -> f64 {
        let p = 0.5f64.powi(k as i32);
        let mut lower = 0.0;
        for i in 0..n {
            if i as f64 > big_n {
                break;
            }
            let mut coef = 1.0;
            for j in 0..i {
                coef *= (big_n - j as f64) / (j as f64 + 1.0);
            }
            lower += coef * p.powi(i as i32) * (1.0 - p).powf(big_n - i as f64);
        }
        if (n as f64) > big_n {
            0.0
        } else {
            (1.0 - lower).max(0.0)
        }
    }

    #[test]
    fn saturation_moves_the_mean_up() {
        let xs = grid(0.0, 16.0, 0.1);
        let prior = ParticleSet::from_influences(xs.clone(), 16.0);
        let plan = QueryPlan::new(4, 20);
        let outcome = QueryOutcome::saturated(20);

        let w: Vec<f64> = xs.iter().map(|&x| reference_at_least(x.exp2(), 4, 20)).collect();
        let total: f64 = w.iter().sum();
        let ref_mean = xs.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / total;

        let weighted = reweight(&prior, &plan, &outcome).unwrap();
        assert!((weighted.mean() - ref_mean).abs() < 1e-9);

        let mut rng = RandomSource::new(3);
        let (post, b) = update(&prior, &plan, &outcome, 0.9, &mut rng).unwrap();
        assert!(b.mean > prior.mean(), "{} vs {}", b.mean, prior.mean());
        assert!((post.mean() - ref_mean).abs() < 0.2);
    }

    #[test]
    fn posterior_invariants() {
        let mut r = ChaCha8Rng::seed_from_u64(4);
        let prior = make_prior(PriorKind::UniformWidth, 12.0, 500, &mut r).unwrap();
        let mut rng = RandomSource::new(4);
        let (post, b) = update(
            &prior,
            &QueryPlan::new(5, 9),
            &QueryOutcome::exact(6),
            0.8,
            &mut rng,
        )
        .unwrap();
        assert_eq!(post.len(), 500);
        assert!((post.total_weight() - 1.0).abs() < 1e-9);
        let w0 = post.particles()[0].weight;
        assert!(post.particles().iter().all(|p| p.weight == w0));
        assert!(post
            .particles()
            .iter()
            .all(|p| (0.0..=12.0).contains(&p.influence)));
        assert!(b.lower <= b.mean && b.mean <= b.upper);
    }

    #[test]
    fn reweight_is_permutation_equivariant() {
        let xs = grid(0.0, 10.0, 0.25);
        let a = ParticleSet::from_influences(xs.clone(), 10.0);
        let mut rev = xs.clone();
        rev.reverse();
        let b = ParticleSet::from_influences(rev, 10.0);
        let plan = QueryPlan::new(3, 12);
        let out = QueryOutcome::exact(5);
        let wa = reweight(&a, &plan, &out).unwrap();
        let wb = reweight(&b, &plan, &out).unwrap();
        for (pa, pb) in wa.particles().iter().zip(wb.particles().iter().rev()) {
            assert_eq!(pa.influence, pb.influence);
            assert!((pa.weight - pb.weight).abs() <= 1e-12 * pa.weight.max(pb.weight));
        }
        assert!((wa.mean() - wb.mean()).abs() < 1e-12);
        let ia = confidence_interval(&wa, 0.9);
        let ib = confidence_interval(&wb, 0.9);
        assert!((ia.0 - ib.0).abs() < 1e-12 && (ia.1 - ib.1).abs() < 1e-12);
    }

    #[test]
    fn resampling_preserves_mean_in_expectation() {
        let xs = grid(0.0, 10.0, 0.5);
        let weighted = ParticleSet::from_weighted(
            xs.iter().map(|&x| (x, (-(x - 3.0).powi(2) / 4.0).exp())),
            10.0,
        )
        .unwrap();
        let target = weighted.mean();
        let means: Vec<f64> = (0..200)
            .map(|s| {
                let mut r = ChaCha8Rng::seed_from_u64(s);
                resample_systematic(&weighted, &mut r).mean()
            })
            .collect();
        let grand = means.iter().sum::<f64>() / 200.0;
        let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / 199.0;
        let se = (var / 200.0).sqrt();
        assert!((grand - target).abs() <= 3.0 * se.max(1e-12), "{grand} vs {target}");
    }

    #[test]
    fn interval_of_point_mass() {
        let set = ParticleSet::point_mass(4.2, 10, 8.0);
        for cl in [0.1, 0.5, 0.99] {
            assert_eq!(confidence_interval(&set, cl), (4.2, 4.2));
        }
    }

    #[test]
    fn interval_of_uniform() {
        let set = ParticleSet::from_influences(grid(0.0, 10.0, 0.01), 10.0);
        let (lo, hi) = confidence_interval(&set, 0.5);
        assert!((lo - 2.5).abs() < 0.2 && (hi - 7.5).abs() < 0.2, "{lo} {hi}");
    }

    #[test]
    fn interval_widens_with_confidence() {
        let mut r = ChaCha8Rng::seed_from_u64(8);
        let set = make_prior(PriorKind::Range { lo: 2.0, hi: 9.0 }, 12.0, 500, &mut r).unwrap();
        let mut prev = 0.0;
        for cl in [0.1, 0.3, 0.5, 0.8, 0.9, 0.99] {
            let (lo, hi) = confidence_interval(&set, cl);
            assert!(hi - lo >= prev);
            prev = hi - lo;
        }
    }

    #[test]
    fn interval_shifted_inside_domain() {
        // Mass piled near 0: the symmetric interval would start below 0.
        let set = ParticleSet::from_influences([0.0, 0.0, 0.0, 0.1, 3.0], 8.0);
        let (lo, hi) = confidence_interval(&set, 0.95);
        let mean = set.mean();
        assert_eq!(lo, 0.0);
        assert!(hi >= mean);
        let len = 2.0 * (3.0 - mean);
        assert!((hi - lo - len).abs() < 1e-12);
        let covered: f64 = set
            .particles()
            .iter()
            .filter(|p| p.influence >= lo && p.influence <= hi)
            .map(|p| p.weight)
            .sum();
        assert!(covered >= 0.95);
    }

    #[test]
    fn priors() {
        let mut r = ChaCha8Rng::seed_from_u64(1);
        let p = make_prior(PriorKind::UniformWidth, 8.0, 100, &mut r).unwrap();
        assert!(p.particles().iter().all(|q| (0.0..=8.0).contains(&q.influence)));
        assert!(p.particles().iter().all(|q| (q.weight - 0.01).abs() < 1e-15));
        let p = make_prior(PriorKind::Uniform64, 256.0, 500, &mut r).unwrap();
        assert!(p.particles().iter().all(|q| (0.0..=64.0).contains(&q.influence)));
        assert!(p.particles().iter().any(|q| q.influence > 60.0));
        let p = make_prior(PriorKind::Range { lo: 3.0, hi: 3.0 }, 8.0, 10, &mut r).unwrap();
        assert!(p.particles().iter().all(|q| q.influence == 3.0));
        assert_eq!(
            make_prior(PriorKind::Range { lo: 4.0, hi: 3.0 }, 8.0, 10, &mut r),
            Err(PriorError::EmptyRange { lo: 4.0, hi: 3.0 })
        );
        assert!(matches!(
            make_prior(PriorKind::Range { lo: 0.0, hi: 9.0 }, 8.0, 10, &mut r),
            Err(PriorError::OutOfDomain { .. })
        ));
        assert_eq!(
            make_prior(PriorKind::UniformWidth, 8.0, 0, &mut r),
            Err(PriorError::NoParticles)
        );
    }

    #[test]
    fn prior_syntax() {
        assert_eq!("uniform-64".parse(), Ok(PriorKind::Uniform64));
        assert_eq!("uniform-width".parse(), Ok(PriorKind::UniformWidth));
        assert_eq!(
            "uniform:0.5:12".parse(),
            Ok(PriorKind::Range { lo: 0.5, hi: 12.0 })
        );
        assert!("gauss:1:2".parse::<PriorKind>().is_err());
        assert!("uniform:a:2".parse::<PriorKind>().is_err());
    }
}
