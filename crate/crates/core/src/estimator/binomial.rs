//! Survival model for solutions under `k` random XOR constraints.
//!
//! Each of `N` projected solutions survives independently with probability
//! `p = 2^-k`, so the surviving count is Binomial(N, p). `N = 2^x` for a
//! real influence `x`, so the binomial coefficient uses its gamma-function
//! extension. Everything is evaluated in natural-log space.

use std::f64::consts::LN_2;

use statrs::function::factorial::ln_factorial;
use statrs::function::gamma::ln_gamma;

/// Tolerance used when comparing a real-valued model count with an integer.
const COUNT_TOL: f64 = 1e-9;

/// `ln Γ(a) - ln Γ(b)` for large `b` via the Stirling series, written so the
/// leading terms do not cancel. `a - b = n`.
fn stirling_gamma_diff(a: f64, b: f64, n: f64) -> f64 {
    fn corr(z: f64) -> f64 {
        let z2 = z * z;
        (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * z2)) / z2) / z2) / z
    }
    (a - 0.5) * (n / b).ln_1p() + n * b.ln() - n + corr(a) - corr(b)
}

/// `ln(N (N-1) ... (N-n+1)) = ln Γ(N+1) - ln Γ(N-n+1)`, for `N > n - 1`.
fn ln_falling_factorial(big_n: f64, n: u64) -> f64 {
    if n <= 64 {
        return (0..n).map(|i| (big_n - i as f64).ln()).sum();
    }
    let nf = n as f64;
    let a = big_n + 1.0;
    let b = big_n - nf + 1.0;
    if b >= 16.0 {
        stirling_gamma_diff(a, b, nf)
    } else {
        ln_gamma(a) - ln_gamma(b)
    }
}

/// `ln P(exactly n survive | N solutions, k constraints)`.
pub fn ln_prob_exact(big_n: f64, k: u32, n: u64) -> f64 {
    let nf = n as f64;
    if k == 0 {
        return if (big_n - nf).abs() <= COUNT_TOL {
            0.0
        } else {
            f64::NEG_INFINITY
        };
    }
    if nf > big_n + COUNT_TOL {
        return f64::NEG_INFINITY;
    }
    let big_n = big_n.max(nf);
    let ln_p = -(k as f64) * LN_2;
    let ln_q = (-(-(k as f64)).exp2()).ln_1p();
    let rest = big_n - nf;
    let tail = if rest == 0.0 { 0.0 } else { rest * ln_q };
    ln_falling_factorial(big_n, n) - ln_factorial(n) + nf * ln_p + tail
}

/// `P(exactly n survive)`: `C(N, n) p^n (1-p)^(N-n)` with `p = 2^-k`.
///
/// For `k = 0` this is 1 when `n` equals `N` (within 1e-9) and 0 otherwise;
/// it is 0 whenever `N < n`.
pub fn prob_exact(big_n: f64, k: u32, n: u64) -> f64 {
    ln_prob_exact(big_n, k, n).exp()
}

/// `ln` of the ratio `P(i+1) / P(i)`.
fn ln_step_up(big_n: f64, i: u64, ln_odds: f64) -> f64 {
    (big_n - i as f64).ln() - ((i + 1) as f64).ln() + ln_odds
}

/// Relative size below which tail terms are dropped.
const TAIL_EPS: f64 = 1e-18;

/// `P(at least n survive) = 1 - sum_{i<n} P(exactly i)`, clamped to [0, 1].
///
/// When `n - 1` is at or below the mean the lower sum is evaluated from
/// `i = n - 1` downwards; otherwise the upper tail is summed directly from
/// `i = n` so that small tail probabilities keep their relative precision.
/// For integer `N` both routes equal `1 - sum_{i<n} P(i)`. Each route stops
/// once terms fall below `1e-18` of the leading one, so the cost is
/// roughly the width of the distribution, not `n`.
pub fn prob_at_least(big_n: f64, k: u32, n: u64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let nf = n as f64;
    if k == 0 {
        return if big_n >= nf - COUNT_TOL { 1.0 } else { 0.0 };
    }
    if nf > big_n + COUNT_TOL {
        return 0.0;
    }
    let p = (-(k as f64)).exp2();
    let ln_odds = -(k as f64) * LN_2 - (-p).ln_1p();
    let mean = big_n * p;

    if nf - 1.0 <= mean {
        // Terms decrease going down from n - 1.
        let top = ln_prob_exact(big_n, k, n - 1);
        if !top.is_finite() {
            return 1.0;
        }
        let mut sum = 1.0;
        let mut ln_t = 0.0;
        let mut i = n - 1;
        while i > 0 {
            // P(i-1) / P(i) = 1 / step_up(i-1)
            ln_t -= ln_step_up(big_n, i - 1, ln_odds);
            let t = ln_t.exp();
            sum += t;
            if t < TAIL_EPS * sum {
                break;
            }
            i -= 1;
        }
        let lower = (top + sum.ln()).exp();
        (1.0 - lower).clamp(0.0, 1.0)
    } else {
        // Terms decrease going up from n.
        let first = ln_prob_exact(big_n, k, n);
        if !first.is_finite() {
            return 0.0;
        }
        let mut sum = 1.0;
        let mut ln_t = 0.0;
        let mut i = n;
        while (i + 1) as f64 <= big_n + COUNT_TOL {
            ln_t += ln_step_up(big_n, i, ln_odds);
            let t = ln_t.exp();
            sum += t;
            if t < TAIL_EPS * sum {
                break;
            }
            i += 1;
        }
        (first + sum.ln()).exp().clamp(0.0, 1.0)
    }
}

/// `ln` of [`prob_at_least`], keeping precision for tiny tails.
pub fn ln_prob_at_least(big_n: f64, k: u32, n: u64) -> f64 {
    prob_at_least(big_n, k, n).ln()
}
