//! Seeded formula families with small, oracle-checkable counts.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cnf::{CnfFormula, Lit, Var};
use crate::xor::{encode_xor_cnf, XorConstraint};

/// Produces one formula per seed.
pub trait Generator: Sync {
    fn generate(&self, seed: u64) -> CnfFormula;
    fn describe(&self) -> String;
}

/// `width` projected bits of which the first `free_bits` are unconstrained
/// and each remaining bit is `(a ∧ b) ⊕ (c ∧ d) ⊕ e` of randomly chosen free
/// bits. The projected count is exactly `2^free_bits`, and the nonlinear
/// gates keep the model set from being an affine subspace, which XOR
/// streamlining would split unevenly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlantedGenerator {
    pub free_bits: u32,
    pub width: u32,
}

impl PlantedGenerator {
    pub fn new(free_bits: u32, width: u32) -> Self {
        assert!(free_bits <= width && width >= 1, "need 0 <= free_bits <= width, width >= 1");
        PlantedGenerator { free_bits, width }
    }

    pub fn count(&self) -> u64 {
        1u64 << self.free_bits
    }
}

/// Tseitin `t ↔ a ∧ b`.
fn and_gate(t: Var, a: Var, b: Var, clauses: &mut Vec<Vec<Lit>>) {
    let (t, a, b) = (t as Lit, a as Lit, b as Lit);
    clauses.push(vec![-t, a]);
    clauses.push(vec![-t, b]);
    clauses.push(vec![t, -a, -b]);
}

impl Generator for PlantedGenerator {
    fn generate(&self, seed: u64) -> CnfFormula {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let free: Vec<Var> = (1..=self.free_bits).collect();
        let mut next: Var = self.width + 1;
        let mut clauses: Vec<Vec<Lit>> = Vec::new();
        for out in self.free_bits + 1..=self.width {
            let mut pick = free.clone();
            pick.shuffle(&mut rng);
            let mut terms: Vec<Var> = Vec::new();
            let mut rest = pick.as_slice();
            for _ in 0..2 {
                if rest.len() >= 2 {
                    and_gate(next, rest[0], rest[1], &mut clauses);
                    terms.push(next);
                    next += 1;
                    rest = &rest[2..];
                }
            }
            if let Some(&e) = rest.first() {
                terms.push(e);
            }
            // out ⊕ terms = 0
            terms.push(out);
            let (cls, after) = encode_xor_cnf(&XorConstraint::new(terms, false), next);
            clauses.extend(cls);
            next = after;
        }
        CnfFormula::new(next - 1, clauses, Some((1..=self.width).collect()))
            .expect("planted formula is well formed")
    }

    fn describe(&self) -> String {
        format!("planted-2^{}-of-{}", self.free_bits, self.width)
    }
}

/// Random 2/3-CNF: up to `max_vars` variables, up to `max_projected` of
/// them projected, up to `max_clauses` clauses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomCnfGenerator {
    pub max_vars: u32,
    pub max_projected: u32,
    pub max_clauses: usize,
}

impl Default for RandomCnfGenerator {
    fn default() -> Self {
        RandomCnfGenerator {
            max_vars: 20,
            max_projected: 12,
            max_clauses: 60,
        }
    }
}

impl Generator for RandomCnfGenerator {
    fn generate(&self, seed: u64) -> CnfFormula {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..=self.max_vars.max(2));
        let m = rng.random_range(0..=self.max_clauses.min(3 * n as usize));
        let clauses: Vec<Vec<Lit>> = (0..m)
            .map(|_| {
                let len = rng.random_range(2..=3usize.min(n as usize));
                let mut vars: Vec<Var> = (1..=n).collect();
                vars.shuffle(&mut rng);
                vars[..len]
                    .iter()
                    .map(|&v| if rng.random::<bool>() { v as Lit } else { -(v as Lit) })
                    .collect()
            })
            .collect();
        let p = rng.random_range(1..=self.max_projected.min(n));
        let mut proj: Vec<Var> = (1..=n).collect();
        proj.shuffle(&mut rng);
        proj.truncate(p as usize);
        CnfFormula::new(n, clauses, Some(proj)).expect("random formula is well formed")
    }

    fn describe(&self) -> String {
        format!(
            "random-cnf(vars<={}, projected<={}, clauses<={})",
            self.max_vars, self.max_projected, self.max_clauses
        )
    }
}
