//! The adaptive search loop: plan a query, streamline, enumerate, update
//! the particle filter, repeat until the interval is narrow enough.

mod calibrate;
mod generate;
mod report;

use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::backend::CountingBackend;
use crate::estimator::{
    compute_c_and_k, make_prior, update, BoundsEstimate, Cap, ParticleSet, PriorError, PriorKind,
    QueryPlan, DEFAULT_PARTICLES,
};
use crate::rng::{RandomSource, Stream};
use crate::sound::{sound_bounds, SoundBounds};
use crate::xor::draw_xor;

pub use calibrate::{calibrate, CalibrationError, CalibrationRow, CalibrationTable};
pub use generate::{Generator, PlantedGenerator, RandomCnfGenerator};
pub use report::ReportFormat;

pub const DEFAULT_CL: f64 = 0.86;
pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_THRES: f64 = 1.7;
pub const DEFAULT_MAX_ITERATIONS: u32 = 100;
/// Largest number of solutions any single query enumerates.
pub const DEFAULT_EXHAUST_CAP: u64 = 1 << 20;
/// Consecutive degenerate updates after which the prior is reset.
pub const DEGENERATE_RESET_AFTER: u32 = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("confidence level must be in (0, 1), got {0}")]
    Cl(f64),
    #[error("alpha must be in [0, 1), got {0}")]
    Alpha(f64),
    #[error("threshold must be a nonnegative number, got {0}")]
    Thres(f64),
    #[error("exhaust cap must be at least 1")]
    ExhaustCap,
    #[error("max iterations must be at least 1")]
    MaxIterations,
    #[error("initial plan uses {k} constraints but the output has {width} bits")]
    InitialPlan { k: u32, width: usize },
    #[error(transparent)]
    Prior(#[from] PriorError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub cl: f64,
    pub alpha: f64,
    /// Target interval length in bits.
    pub thres: f64,
    /// Also require the sound interval to be within `thres`, and report it.
    pub sound: bool,
    pub seed: u64,
    pub n_particles: usize,
    pub prior: PriorKind,
    pub max_iterations: u32,
    pub exhaust_cap: u64,
    /// Overrides the first query instead of deriving it from the prior.
    pub initial_plan: Option<QueryPlan>,
    /// Time limit per query.
    #[serde(skip)]
    pub timeout: Option<Duration>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            cl: DEFAULT_CL,
            alpha: DEFAULT_ALPHA,
            thres: DEFAULT_THRES,
            sound: false,
            seed: 0,
            n_particles: DEFAULT_PARTICLES,
            prior: PriorKind::default(),
            max_iterations: DEFAULT_MAX_ITERATIONS,
            exhaust_cap: DEFAULT_EXHAUST_CAP,
            initial_plan: None,
            timeout: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.cl > 0.0 && self.cl < 1.0) {
            return Err(ConfigError::Cl(self.cl));
        }
        if !(self.alpha >= 0.0 && self.alpha < 1.0) {
            return Err(ConfigError::Alpha(self.alpha));
        }
        if !self.thres.is_finite() || self.thres < 0.0 {
            return Err(ConfigError::Thres(self.thres));
        }
        if self.exhaust_cap == 0 {
            return Err(ConfigError::ExhaustCap);
        }
        if self.max_iterations == 0 {
            return Err(ConfigError::MaxIterations);
        }
        if self.n_particles == 0 {
            return Err(PriorError::NoParticles.into());
        }
        Ok(())
    }
}

/// `cl + (1 - cl) α`: the level the filter's interval is computed at.
pub fn adjust_cl(cl: f64, alpha: f64) -> f64 {
    cl + (1.0 - cl) * alpha
}

/// The retry after a degenerate update: one constraint fewer and twice the
/// cap, bounded by `safety_cap`.
pub fn recover_degenerate(last_plan: &QueryPlan, safety_cap: u64) -> QueryPlan {
    match last_plan.cap {
        Cap::Exhaustive => QueryPlan::exhaustive(),
        Cap::Finite(c) => QueryPlan::new(
            last_plan.k.saturating_sub(1),
            c.saturating_mul(2).min(safety_cap),
        ),
    }
}

/// What to do after a degenerate update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recovery {
    /// Keep the prior and reissue this query.
    Retry(QueryPlan),
    /// Go back to the initial distribution.
    ResetPrior,
}

/// Counts consecutive degenerate updates.
#[derive(Debug, Clone, Default)]
pub struct DegeneracyPolicy {
    consecutive: u32,
}

impl DegeneracyPolicy {
    pub fn on_degenerate(&mut self, last_plan: &QueryPlan, safety_cap: u64) -> Recovery {
        self.consecutive += 1;
        if self.consecutive >= DEGENERATE_RESET_AFTER {
            self.consecutive = 0;
            Recovery::ResetPrior
        } else {
            Recovery::Retry(recover_degenerate(last_plan, safety_cap))
        }
    }

    pub fn on_success(&mut self) {
        self.consecutive = 0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Interval,
    Exact,
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AbortReason {
    MaxIterations,
    Solver { message: String },
}

/// One pass of the loop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub k: u32,
    /// Cap actually used, after the safety cap.
    pub cap: u64,
    pub n_sat: u64,
    pub saturated: bool,
    pub solver_calls: u64,
    /// Filter summary after the update; absent when the update was
    /// degenerate or the query was a complete enumeration.
    pub estimate: Option<BoundsEstimate>,
    pub sound: Option<SoundBounds>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountReport {
    pub status: Status,
    pub abort_reason: Option<AbortReason>,
    /// Bounds and moments in bits. For an exact count of zero these are
    /// absent (the influence of an empty set is undefined).
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub mean: Option<f64>,
    pub sigma: Option<f64>,
    pub confidence_level: f64,
    pub exact_count: Option<u64>,
    pub sound_lower: Option<f64>,
    pub sound_upper: Option<f64>,
    pub sound_confidence: Option<f64>,
    pub iterations: u32,
    pub total_queries: u64,
    pub degenerate_updates: u32,
    pub prior_resets: u32,
    pub width: usize,
    pub seed: u64,
    pub wall_time_secs: f64,
    pub history: Vec<IterationRecord>,
}

impl CountReport {
    /// The report with timing zeroed, for comparisons between runs.
    pub fn without_timing(&self) -> CountReport {
        CountReport {
            wall_time_secs: 0.0,
            ..self.clone()
        }
    }

    /// Whether the reported result is consistent with `count` models.
    pub fn contains_count(&self, count: u64) -> bool {
        match (self.status, self.exact_count) {
            (Status::Exact, Some(n)) => n == count,
            _ => match (self.lower, self.upper) {
                (Some(lo), Some(hi)) if count > 0 => {
                    let x = (count as f64).log2();
                    lo <= x && x <= hi
                }
                _ => false,
            },
        }
    }

    /// Interval length in bits, if there is an interval.
    pub fn interval_width(&self) -> Option<f64> {
        Some(self.upper? - self.lower?)
    }
}

struct Loop<'a> {
    config: &'a RunConfig,
    started: Instant,
    width: usize,
    iterations: u32,
    total_queries: u64,
    degenerate: u32,
    resets: u32,
    history: Vec<IterationRecord>,
    last_estimate: Option<BoundsEstimate>,
    last_sound: Option<SoundBounds>,
}

impl Loop<'_> {
    fn finish(self, status: Status, abort_reason: Option<AbortReason>, exact: Option<u64>) -> CountReport {
        let cl = adjust_cl(self.config.cl, self.config.alpha);
        let (lower, upper, mean, sigma) = match (exact, self.last_estimate) {
            (Some(0), _) => (None, None, None, None),
            (Some(n), _) => {
                let x = (n as f64).log2();
                (Some(x), Some(x), Some(x), Some(0.0))
            }
            (None, Some(e)) => (Some(e.lower), Some(e.upper), Some(e.mean), Some(e.sd)),
            (None, None) => (None, None, None, None),
        };
        let sound = if self.config.sound { self.last_sound } else { None };
        CountReport {
            status,
            abort_reason,
            lower,
            upper,
            mean,
            sigma,
            confidence_level: cl,
            exact_count: exact,
            sound_lower: sound.map(|s| s.lower),
            sound_upper: sound.and_then(|s| s.upper),
            sound_confidence: sound.map(|s| s.confidence),
            iterations: self.iterations,
            total_queries: self.total_queries,
            degenerate_updates: self.degenerate,
            prior_resets: self.resets,
            width: self.width,
            seed: self.config.seed,
            wall_time_secs: self.started.elapsed().as_secs_f64(),
            history: self.history,
        }
    }
}

/// Runs the search against `backend`. Solver failures end the run with
/// status `aborted`; only invalid configurations are errors.
pub fn run_search<B: CountingBackend + ?Sized>(
    backend: &mut B,
    config: &RunConfig,
) -> Result<CountReport, ConfigError> {
    config.validate()?;
    let width = backend.width();
    let wf = width as f64;
    if let Some(p) = config.initial_plan {
        if p.k as usize > width {
            return Err(ConfigError::InitialPlan { k: p.k, width });
        }
    }
    let cl = adjust_cl(config.cl, config.alpha);
    let mut rng = RandomSource::new(config.seed);
    let initial = make_prior(
        config.prior,
        wf,
        config.n_particles,
        rng.stream(Stream::Resampling),
    )?;
    let mut state = Loop {
        config,
        started: Instant::now(),
        width,
        iterations: 0,
        total_queries: 0,
        degenerate: 0,
        resets: 0,
        history: Vec::new(),
        last_estimate: None,
        last_sound: None,
    };
    let mut prior: ParticleSet = initial.clone();
    let mut plan = config
        .initial_plan
        .unwrap_or_else(|| compute_c_and_k(&prior, wf));
    let mut policy = DegeneracyPolicy::default();

    while state.iterations < config.max_iterations {
        assert!(plan.k as usize <= width, "planned {} constraints over {width} bits", plan.k);
        state.iterations += 1;
        let cap = plan.cap.limit(config.exhaust_cap);
        let xors: Vec<_> = (0..plan.k)
            .map(|_| draw_xor(backend.xor_domain(), rng.stream(Stream::XorDraws)))
            .collect();
        let outcome = match backend.exhaust(&xors, cap) {
            Ok(o) => o,
            Err(e) => {
                log::warn!("query failed: {e}");
                let reason = AbortReason::Solver {
                    message: e.to_string(),
                };
                return Ok(state.finish(Status::Aborted, Some(reason), None));
            }
        };
        state.total_queries += outcome.solver_calls;
        let mut record = IterationRecord {
            k: plan.k,
            cap,
            n_sat: outcome.n_sat,
            saturated: outcome.saturated,
            solver_calls: outcome.solver_calls,
            estimate: None,
            sound: None,
        };
        log::debug!(
            "iteration {}: k={} cap={} n_sat={} saturated={}",
            state.iterations,
            plan.k,
            cap,
            outcome.n_sat,
            outcome.saturated
        );

        if plan.k == 0 && !outcome.saturated {
            state.history.push(record);
            return Ok(state.finish(Status::Exact, None, Some(outcome.n_sat)));
        }

        if plan.k > 0 {
            if let Some(s) = sound_bounds(plan.k, cap, &outcome, wf) {
                record.sound = Some(s);
                state.last_sound = Some(s);
            }
        }

        match update(&prior, &plan, &outcome, cl, &mut rng) {
            Ok((post, est)) => {
                policy.on_success();
                record.estimate = Some(est);
                state.last_estimate = Some(est);
                state.history.push(record);
                log::info!(
                    "Lower: {:.4} Upper: {:.4} (mean {:.4}, sd {:.4})",
                    est.lower,
                    est.upper,
                    est.mean,
                    est.sd
                );
                prior = post;
                let narrow = est.width() <= config.thres;
                let sound_narrow = !config.sound
                    || state
                        .last_sound
                        .and_then(|s| s.width())
                        .is_some_and(|w| w <= config.thres);
                if narrow && sound_narrow {
                    return Ok(state.finish(Status::Interval, None, None));
                }
                plan = compute_c_and_k(&prior, wf);
            }
            Err(_) => {
                state.degenerate += 1;
                state.history.push(record);
                log::warn!("degenerate update at k={} n_sat={}", plan.k, outcome.n_sat);
                match policy.on_degenerate(&plan, config.exhaust_cap) {
                    Recovery::Retry(next) => plan = next,
                    Recovery::ResetPrior => {
                        state.resets += 1;
                        prior = initial.clone();
                        plan = compute_c_and_k(&prior, wf);
                    }
                }
            }
        }
    }
    Ok(state.finish(Status::Aborted, Some(AbortReason::MaxIterations), None))
}
