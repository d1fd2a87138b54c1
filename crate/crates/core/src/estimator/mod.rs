//! Probabilistic model of query results and the particle filter over
//! influence.

pub mod binomial;
pub mod particles;
pub mod plan;

pub use binomial::{ln_prob_at_least, ln_prob_exact, prob_at_least, prob_exact};
pub use particles::{
    confidence_interval, make_prior, resample_systematic, reweight, update, BoundsEstimate,
    DegenerateUpdate, Particle, ParticleSet, PriorError, PriorKind, DEFAULT_PARTICLES,
};
pub use plan::{cap_for_sigma, compute_c_and_k, plan_from_moments, Cap, QueryPlan};
