//! Probabilistically sound influence bounds from a single query.
//!
//! The random XOR family is strongly 3-universal. For such a family, with
//! pivot `c = ceil(2 r (1 + ε) e^(1/3) / ε²)`, the streamlined count lies in
//! `[(1-ε)|F|/2^k, (1+ε)|F|/2^k]` with probability at least
//! `1 - e^floor(-r/2)`. Solving the pivot equation for `ε` given the cap used
//! by a query and inverting the band gives bounds on `|F|`.

use serde::Serialize;
use thiserror::Error;

use crate::sat::QueryOutcome;

/// Universality degree of the XOR family.
pub const UNIVERSALITY: u32 = 3;

/// Largest cap for which no `ε` in (0, 1) is admitted.
pub const MIN_PIVOT_EXCLUSIVE: u64 = 17;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum SoundBoundError {
    #[error("cap {0} is too small for a sound bound (need more than 17)")]
    CapTooSmall(u64),
}

/// `2 r e^(1/3)`.
fn pivot_coefficient() -> f64 {
    2.0 * UNIVERSALITY as f64 * (1.0f64 / 3.0).exp()
}

/// `1 - e^floor(-r/2)`; about 0.8647 for `r = 3`.
pub fn confidence_floor() -> f64 {
    let exponent = (-(UNIVERSALITY as f64) / 2.0).floor();
    1.0 - exponent.exp()
}

/// Pivot for tolerance `ε`: `ceil(2 r (1 + ε) e^(1/3) / ε²)`.
pub fn pivot(epsilon: f64) -> u64 {
    (pivot_coefficient() * (1.0 + epsilon) / (epsilon * epsilon)).ceil() as u64
}

/// The `ε` whose (unrounded) pivot equals `c`: the positive root of
/// `c ε² - a ε - a = 0` with `a = 2 r e^(1/3)`.
pub fn epsilon_from_c(c: u64) -> Result<f64, SoundBoundError> {
    if c <= MIN_PIVOT_EXCLUSIVE {
        return Err(SoundBoundError::CapTooSmall(c));
    }
    let a = pivot_coefficient();
    let c = c as f64;
    Ok((a + (a * a + 4.0 * c * a).sqrt()) / (2.0 * c))
}

/// Parameters of the bound for one query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SoundBoundParams {
    pub r: u32,
    pub c: u64,
    pub k: u32,
    pub epsilon: f64,
    pub confidence_floor: f64,
}

impl SoundBoundParams {
    pub fn new(k: u32, c: u64) -> Result<Self, SoundBoundError> {
        Ok(SoundBoundParams {
            r: UNIVERSALITY,
            c,
            k,
            epsilon: epsilon_from_c(c)?,
            confidence_floor: confidence_floor(),
        })
    }
}

/// Bounds on the influence in bits. `upper` is absent when the query found
/// no solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SoundBounds {
    pub lower: f64,
    pub upper: Option<f64>,
    pub confidence: f64,
    pub epsilon: f64,
}

impl SoundBounds {
    pub fn width(&self) -> Option<f64> {
        self.upper.map(|u| u - self.lower)
    }

    pub fn contains(&self, influence: f64) -> bool {
        influence >= self.lower && self.upper.is_none_or(|u| influence <= u)
    }
}

/// Sound bounds from a query with `k` constraints and cap `c`:
/// `|F| ∈ [n 2^k / (1 + ε), n 2^k / (1 - ε)]`, in log2 and clamped to
/// `[0, width]`. Returns `None` for caps of 17 or less and for saturated
/// queries.
pub fn sound_bounds(k: u32, c: u64, outcome: &QueryOutcome, width: f64) -> Option<SoundBounds> {
    if outcome.saturated {
        return None;
    }
    let params = SoundBoundParams::new(k, c).ok()?;
    let eps = params.epsilon;
    if outcome.n_sat == 0 {
        return Some(SoundBounds {
            lower: 0.0,
            upper: None,
            confidence: params.confidence_floor,
            epsilon: eps,
        });
    }
    let scaled = (outcome.n_sat as f64).log2() + k as f64;
    let lower = (scaled - (1.0 + eps).log2()).clamp(0.0, width);
    let upper = (scaled - (1.0 - eps).log2()).clamp(0.0, width);
    Some(SoundBounds {
        lower,
        upper: Some(upper),
        confidence: params.confidence_floor,
        epsilon: eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_is_one_minus_e_to_minus_two() {
        assert!((confidence_floor() - (1.0 - (-2.0f64).exp())).abs() < 1e-15);
        assert!((confidence_floor() - 0.8647).abs() < 1e-4);
    }

    #[test]
    fn epsilon_at_46() {
        let e = epsilon_from_c(46).unwrap();
        assert!((e - 0.527).abs() < 0.001, "{e}");
        assert!((e - 0.53).abs() < 0.01);
    }

    #[test]
    fn forward_and_inverse() {
        assert_eq!(pivot(0.8), 24);
        let e = epsilon_from_c(24).unwrap();
        assert!(e > 0.78 && e < 0.81, "{e}");
        for eps in [0.2, 0.4, 0.53, 0.8] {
            let back = epsilon_from_c(pivot(eps)).unwrap();
            assert!((back - eps).abs() < 0.02, "{eps} -> {back}");
        }
    }

    #[test]
    fn boundary() {
        assert!(epsilon_from_c(18).unwrap() < 1.0);
        assert_eq!(epsilon_from_c(17), Err(SoundBoundError::CapTooSmall(17)));
        assert!(epsilon_from_c(10).is_err());
    }

    #[test]
    fn bound_values() {
        let b = sound_bounds(4, 46, &QueryOutcome::exact(30), 64.0).unwrap();
        assert!((b.lower - 8.30).abs() < 0.01, "{}", b.lower);
        assert!((b.upper.unwrap() - 9.99).abs() < 0.01, "{:?}", b.upper);
        let b = sound_bounds(0, 46, &QueryOutcome::exact(10), 64.0).unwrap();
        assert!((b.lower - 2.71).abs() < 0.01);
        assert!((b.upper.unwrap() - 4.40).abs() < 0.01);
        assert!(sound_bounds(4, 10, &QueryOutcome::exact(5), 64.0).is_none());
        assert!(sound_bounds(4, 46, &QueryOutcome::saturated(46), 64.0).is_none());
    }

    #[test]
    fn empty_query_gives_only_a_lower_bound() {
        let b = sound_bounds(3, 30, &QueryOutcome::exact(0), 16.0).unwrap();
        assert_eq!(b.lower, 0.0);
        assert_eq!(b.upper, None);
        assert!(b.contains(12.0));
    }

    #[test]
    fn bounds_are_clamped() {
        let b = sound_bounds(10, 20, &QueryOutcome::exact(19), 12.0).unwrap();
        assert_eq!(b.upper, Some(12.0));
        assert!(b.lower <= 12.0);
    }

    #[test]
    fn width_shrinks_with_larger_pivot() {
        // Fixed n 2^k = 480.
        let mut prev = f64::INFINITY;
        for c in [18u64, 24, 46, 64, 100, 500, 5000] {
            let w = sound_bounds(4, c, &QueryOutcome::exact(30), 64.0)
                .unwrap()
                .width()
                .unwrap();
            assert!(w <= prev, "c={c}");
            prev = w;
        }
    }
}
