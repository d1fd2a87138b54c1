//! Ground truth for small instances: exact projected counts, explicit model
//! sets, and the exact distribution of survivors over the whole XOR draw
//! space.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use thiserror::Error;

use crate::backend::{BackendError, CountingBackend};
use crate::cnf::{CnfFormula, Var};
use crate::sat::{QueryOutcome, SolverSession};
use crate::xor::XorConstraint;

pub const DEFAULT_LIMIT: u64 = 1 << 20;

/// Largest variable count the truth-table enumerator accepts.
pub const BRUTE_FORCE_MAX_VARS: u32 = 26;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("2^{width} projected assignments exceed the limit {limit}")]
    ProjectionTooLarge { width: usize, limit: u64 },
    #[error("{0} variables is too many for truth-table enumeration")]
    TooManyVariables(u32),
    #[error("draw space too large: width {width}, k {k}")]
    DrawSpaceTooLarge { width: u32, k: u32 },
    #[error("solver failure: {0}")]
    Solver(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactCount {
    pub count: u64,
    /// Projected assignments, packed with projection index `i` at bit `i`.
    pub values: Option<BTreeSet<u64>>,
}

fn pack(bits: &[bool]) -> u64 {
    bits.iter()
        .enumerate()
        .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i))
}

/// Exact projected count by enumeration with blocking, keeping the values.
pub fn exact_count(f: &CnfFormula, limit: u64) -> Result<ExactCount, OracleError> {
    let width = f.width();
    if width >= 64 || (1u64 << width) > limit {
        return Err(OracleError::ProjectionTooLarge { width, limit });
    }
    let mut values = BTreeSet::new();
    let out = SolverSession::load(f)
        .exhaust_with(&[], (1u64 << width) + 1, |m| {
            values.insert(pack(m));
        })
        .map_err(|e| OracleError::Solver(e.to_string()))?;
    debug_assert!(!out.saturated);
    debug_assert_eq!(out.n_sat, values.len() as u64);
    Ok(ExactCount {
        count: out.n_sat,
        values: Some(values),
    })
}

/// Projected model set by truth-table enumeration, with no solver involved.
pub fn brute_force_models(f: &CnfFormula) -> Result<BTreeSet<u64>, OracleError> {
    let n = f.num_vars();
    if n > BRUTE_FORCE_MAX_VARS {
        return Err(OracleError::TooManyVariables(n));
    }
    // Clause as (positive mask, negative mask).
    let masks: Vec<(u64, u64)> = f
        .clauses()
        .iter()
        .map(|c| {
            c.iter().fold((0u64, 0u64), |(pos, neg), &l| {
                let bit = 1u64 << (l.unsigned_abs() - 1);
                if l > 0 {
                    (pos | bit, neg)
                } else {
                    (pos, neg | bit)
                }
            })
        })
        .collect();
    let proj = f.projection();
    let mut out = BTreeSet::new();
    for a in 0u64..(1u64 << n) {
        if masks.iter().all(|&(pos, neg)| a & pos != 0 || !a & neg != 0) {
            let p = proj
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &v)| acc | (((a >> (v - 1)) & 1) << i));
            out.insert(p);
        }
    }
    Ok(out)
}

/// An explicit set of projected values over `width` bits, answering queries
/// without a solver. Bit `i` of a value corresponds to XOR variable `i + 1`.
#[derive(Debug, Clone)]
pub struct ModelSetBackend {
    models: Vec<u64>,
    domain: Vec<Var>,
}

impl ModelSetBackend {
    pub fn new<I: IntoIterator<Item = u64>>(models: I, width: usize) -> Self {
        assert!((1..=64).contains(&width), "width must be in 1..=64");
        let set: BTreeSet<u64> = models.into_iter().collect();
        if width < 64 {
            assert!(set.iter().all(|&m| m >> width == 0), "model wider than width");
        }
        ModelSetBackend {
            models: set.into_iter().collect(),
            domain: (1..=width as Var).collect(),
        }
    }

    pub fn count(&self) -> usize {
        self.models.len()
    }

    pub fn models(&self) -> &[u64] {
        &self.models
    }
}

impl CountingBackend for ModelSetBackend {
    fn width(&self) -> usize {
        self.domain.len()
    }

    fn xor_domain(&self) -> &[Var] {
        &self.domain
    }

    fn exhaust(&mut self, xors: &[XorConstraint], cap: u64) -> Result<QueryOutcome, BackendError> {
        let survivors = self
            .models
            .iter()
            .filter(|&&m| xors.iter().all(|x| x.holds_on_bits(m)))
            .take(cap as usize)
            .count() as u64;
        Ok(if survivors == cap {
            QueryOutcome::saturated(cap)
        } else {
            QueryOutcome::exact(survivors)
        })
    }
}

/// Exact distribution of the surviving count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurvivalDistribution {
    /// Number of models before streamlining.
    pub models: u64,
    pub k: u32,
    pub probs: BTreeMap<u64, Ratio<u64>>,
}

impl SurvivalDistribution {
    pub fn prob(&self, n: u64) -> Ratio<u64> {
        self.probs.get(&n).copied().unwrap_or_else(|| Ratio::from_integer(0))
    }

    pub fn mean(&self) -> Ratio<u64> {
        self.probs
            .iter()
            .fold(Ratio::from_integer(0), |acc, (&n, &p)| acc + p * n)
    }

    pub fn variance(&self) -> Ratio<u64> {
        let second = self
            .probs
            .iter()
            .fold(Ratio::from_integer(0), |acc, (&n, &p)| acc + p * (n * n));
        let m = self.mean();
        second - m * m
    }

    /// `N/2^k`, the mean under the independent-survival model.
    pub fn binomial_mean(&self) -> Ratio<u64> {
        Ratio::new(self.models, 1 << self.k)
    }

    /// `N p (1 - p)` with `p = 2^-k`.
    pub fn binomial_variance(&self) -> Ratio<u64> {
        let d = 1u64 << self.k;
        Ratio::new(self.models * (d - 1), d * d)
    }

    /// `C(N, n) p^n (1-p)^(N-n)`, exactly.
    pub fn binomial_prob(&self, n: u64) -> Ratio<u64> {
        if n > self.models {
            return Ratio::from_integer(0);
        }
        let d = 1u64 << self.k;
        let big_n = self.models;
        let mut coef = 1u64;
        for i in 0..n {
            coef = coef * (big_n - i) / (i + 1);
        }
        Ratio::new(
            coef * (d - 1).pow((big_n - n) as u32),
            d.pow(big_n as u32),
        )
    }
}

/// Enumerates every `k`-tuple of XOR constraints over `width` bits (each of
/// the `2^(width+1)` constraints equally likely) and tallies how many
/// models of `model_set` survive. Requires `width ≤ 3`, `k ≤ 2`.
pub fn xor_survival_distribution(
    model_set: &[u64],
    width: u32,
    k: u32,
) -> Result<SurvivalDistribution, OracleError> {
    if width > 3 || k > 2 || width == 0 {
        return Err(OracleError::DrawSpaceTooLarge { width, k });
    }
    let models: BTreeSet<u64> = model_set.iter().copied().collect();
    let singles: Vec<XorConstraint> = (0u32..1 << width)
        .flat_map(|mask| {
            let vars: Vec<Var> = (1..=width).filter(|v| mask >> (v - 1) & 1 == 1).collect();
            [false, true].map(|parity| XorConstraint::new(vars.clone(), parity))
        })
        .collect();
    let per = singles.len() as u64;
    let total = per.pow(k);
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for idx in 0..total {
        let mut rest = idx;
        let tuple: Vec<&XorConstraint> = (0..k)
            .map(|_| {
                let x = &singles[(rest % per) as usize];
                rest /= per;
                x
            })
            .collect();
        let n = models
            .iter()
            .filter(|&&m| tuple.iter().all(|x| x.holds_on_bits(m)))
            .count() as u64;
        *counts.entry(n).or_insert(0) += 1;
    }
    Ok(SurvivalDistribution {
        models: models.len() as u64,
        k,
        probs: counts
            .into_iter()
            .map(|(n, c)| (n, Ratio::new(c, total)))
            .collect(),
    })
}
