//! Random parity constraints over the projection and their CNF encoding.

use rand::Rng;

use crate::cnf::{Lit, Var};

/// `XOR(vars) = parity`. An empty constraint is trivially true when
/// `parity` is false and unsatisfiable when it is true.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct XorConstraint {
    pub vars: Vec<Var>,
    pub parity: bool,
}

impl XorConstraint {
    pub fn new(vars: Vec<Var>, parity: bool) -> Self {
        XorConstraint { vars, parity }
    }

    /// Evaluates the constraint under `value(var)`.
    pub fn holds<F: Fn(Var) -> bool>(&self, value: F) -> bool {
        self.vars.iter().fold(false, |acc, &v| acc ^ value(v)) == self.parity
    }

    /// Evaluates the constraint on a packed assignment where variable `v`
    /// is bit `v - 1` of `bits`.
    pub fn holds_on_bits(&self, bits: u64) -> bool {
        let mut mask = 0u64;
        for &v in &self.vars {
            mask ^= 1u64 << (v - 1);
        }
        ((bits & mask).count_ones() & 1 == 1) == self.parity
    }
}

/// Draws a member of the random XOR family: each projection variable is
/// included independently with probability 1/2 and the parity is a fair
/// coin flip (equivalent to negating the constraint half the time).
pub fn draw_xor<R: Rng + ?Sized>(projection: &[Var], rng: &mut R) -> XorConstraint {
    let vars = projection
        .iter()
        .copied()
        .filter(|_| rng.random::<bool>())
        .collect();
    let parity = rng.random::<bool>();
    XorConstraint { vars, parity }
}

/// Encodes `x` as CNF with a linear parity chain.
///
/// Variables `next_free_var..` are used for auxiliaries; returns the clauses
/// and the next unused variable. For `m = |vars|`:
/// * `m = 0`: nothing when parity is false, otherwise the contradictory
///   pair `(a) (¬a)` on one fresh variable `a`;
/// * `m = 1`: the unit clause;
/// * `m ≥ 2`: `m - 2` auxiliaries `a_i ≡ a_{i-1} ⊕ v_{i+1}` (four clauses
///   each) closed by a two-clause equivalence, `4(m - 2) + 2` clauses.
pub fn encode_xor_cnf(x: &XorConstraint, next_free_var: Var) -> (Vec<Vec<Lit>>, Var) {
    let lit = |v: Var| v as Lit;
    match x.vars.as_slice() {
        [] => {
            if x.parity {
                let a = lit(next_free_var);
                (vec![vec![a], vec![-a]], next_free_var + 1)
            } else {
                (Vec::new(), next_free_var)
            }
        }
        [v] => {
            let l = if x.parity { lit(*v) } else { -lit(*v) };
            (vec![vec![l]], next_free_var)
        }
        vars => {
            let mut clauses = Vec::with_capacity(4 * (vars.len() - 2) + 2);
            let mut next = next_free_var;
            let mut acc = lit(vars[0]);
            for &v in &vars[1..vars.len() - 1] {
                let b = lit(v);
                let a = lit(next);
                next += 1;
                // a <-> acc xor b
                clauses.push(vec![-a, acc, b]);
                clauses.push(vec![-a, -acc, -b]);
                clauses.push(vec![a, -acc, b]);
                clauses.push(vec![a, acc, -b]);
                acc = a;
            }
            let last = lit(*vars.last().unwrap());
            if x.parity {
                // acc xor last = 1, i.e. acc <-> ¬last
                clauses.push(vec![acc, last]);
                clauses.push(vec![-acc, -last]);
            } else {
                clauses.push(vec![acc, -last]);
                clauses.push(vec![-acc, last]);
            }
            (clauses, next)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Every draw comes out as "true".
    struct AllOnes;

    impl RngCore for AllOnes {
        fn next_u32(&mut self) -> u32 {
            u32::MAX
        }
        fn next_u64(&mut self) -> u64 {
            u64::MAX
        }
        fn fill_bytes(&mut self, dst: &mut [u8]) {
            dst.fill(0xff)
        }
    }

    /// Brute-force satisfiability over assignments to `1..=n`, projected to
    /// the listed variables.
    fn projected_solutions(clauses: &[Vec<Lit>], n: u32, proj: &[Var]) -> Vec<u64> {
        let mut out = std::collections::BTreeSet::new();
        for bits in 0u64..(1 << n) {
            let val = |l: Lit| ((bits >> (l.unsigned_abs() - 1)) & 1 == 1) == (l > 0);
            if clauses.iter().all(|c| c.iter().any(|&l| val(l))) {
                let mut p = 0u64;
                for (i, &v) in proj.iter().enumerate() {
                    p |= ((bits >> (v - 1)) & 1) << i;
                }
                out.insert(p);
            }
        }
        out.into_iter().collect()
    }

    #[test]
    fn forced_draw() {
        let x = draw_xor(&[1], &mut AllOnes);
        assert_eq!(x, XorConstraint::new(vec![1], true));
    }

    #[test]
    fn draw_is_reproducible() {
        let proj: Vec<Var> = (1..=40).collect();
        let a: Vec<_> = {
            let mut r = ChaCha8Rng::seed_from_u64(3);
            (0..10).map(|_| draw_xor(&proj, &mut r)).collect()
        };
        let b: Vec<_> = {
            let mut r = ChaCha8Rng::seed_from_u64(3);
            (0..10).map(|_| draw_xor(&proj, &mut r)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn mean_support_size() {
        let mut r = ChaCha8Rng::seed_from_u64(11);
        let n = 20_000;
        let sizes: Vec<f64> = (0..n)
            .map(|_| draw_xor(&[1, 2, 3], &mut r).vars.len() as f64)
            .collect();
        let mean = sizes.iter().sum::<f64>() / n as f64;
        // Binomial(3, 1/2): variance 0.75.
        let se = (0.75f64 / n as f64).sqrt();
        assert!((mean - 1.5).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn one_variable_encoding() {
        let (c, next) = encode_xor_cnf(&XorConstraint::new(vec![1], true), 5);
        assert_eq!(c, vec![vec![1]]);
        assert_eq!(next, 5);
    }

    #[test]
    fn two_variable_encoding() {
        let (c, next) = encode_xor_cnf(&XorConstraint::new(vec![1, 2], false), 5);
        assert_eq!(c, vec![vec![1, -2], vec![-1, 2]]);
        assert_eq!(next, 5);
    }

    #[test]
    fn three_variable_encoding_projects_to_odd_parity() {
        let (c, next) = encode_xor_cnf(&XorConstraint::new(vec![1, 2, 3], true), 4);
        assert_eq!(next, 5);
        assert_eq!(c.len(), 6);
        let sols = projected_solutions(&c, 4, &[1, 2, 3]);
        assert_eq!(sols, vec![0b001, 0b010, 0b100, 0b111]);
    }

    #[test]
    fn empty_constraints() {
        let (c, next) = encode_xor_cnf(&XorConstraint::new(vec![], false), 3);
        assert!(c.is_empty());
        assert_eq!(next, 3);
        let (c, next) = encode_xor_cnf(&XorConstraint::new(vec![], true), 3);
        assert_eq!(c, vec![vec![3], vec![-3]]);
        assert_eq!(next, 4);
        assert!(projected_solutions(&c, 3, &[1]).is_empty());
        assert!(!XorConstraint::new(vec![], true).holds(|_| true));
        assert!(XorConstraint::new(vec![], false).holds(|_| true));
    }

    #[test]
    fn encoding_matches_parity_exhaustively() {
        for m in 1..=4u32 {
            let vars: Vec<Var> = (1..=m).collect();
            for parity in [false, true] {
                let x = XorConstraint::new(vars.clone(), parity);
                let (clauses, next) = encode_xor_cnf(&x, m + 1);
                assert_eq!(next - (m + 1), m.saturating_sub(2));
                let expected_len = if m == 1 { 1 } else { 4 * (m as usize - 2) + 2 };
                assert_eq!(clauses.len(), expected_len);
                let sols = projected_solutions(&clauses, next - 1, &vars);
                let want: Vec<u64> = (0..1u64 << m).filter(|&b| x.holds_on_bits(b)).collect();
                assert_eq!(want.len(), 1 << (m - 1));
                assert_eq!(sols, want, "m={m} parity={parity}");
            }
        }
    }

    /// Enumerates the whole draw space at width `w`: every subset of the
    /// projection together with both parities, each with probability
    /// `1 / 2^(w+1)`.
    fn draw_space(w: u32) -> Vec<XorConstraint> {
        let mut out = Vec::new();
        for mask in 0u32..(1 << w) {
            let vars: Vec<Var> = (1..=w).filter(|v| mask >> (v - 1) & 1 == 1).collect();
            for parity in [false, true] {
                out.push(XorConstraint::new(vars.clone(), parity));
            }
        }
        out
    }

    #[test]
    fn each_draw_has_probability_one_eighth_at_width_two() {
        // Exhaust the 3 random bits consumed by one draw at w = 2.
        struct Bits(u32, u32);
        impl RngCore for Bits {
            fn next_u32(&mut self) -> u32 {
                let b = (self.0 >> self.1) & 1;
                self.1 += 1;
                if b == 1 { u32::MAX } else { 0 }
            }
            fn next_u64(&mut self) -> u64 {
                self.next_u32() as u64
            }
            fn fill_bytes(&mut self, _: &mut [u8]) {
                unimplemented!()
            }
        }
        let mut counts = std::collections::HashMap::new();
        for seq in 0u32..8 {
            *counts.entry(draw_xor(&[1, 2], &mut Bits(seq, 0))).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 8);
        assert!(counts.values().all(|&c| c == 1));
    }

    #[test]
    fn family_is_pairwise_and_three_wise_independent() {
        for w in 1..=3u32 {
            let space = draw_space(w);
            let total = space.len();
            let points: Vec<u64> = (0..1u64 << w).collect();
            for &a in &points {
                let alone = space.iter().filter(|x| x.holds_on_bits(a)).count();
                assert_eq!(alone * 2, total);
                for &b in points.iter().filter(|&&b| b > a) {
                    let both = space
                        .iter()
                        .filter(|x| x.holds_on_bits(a) && x.holds_on_bits(b))
                        .count();
                    assert_eq!(both * 4, total, "w={w} a={a} b={b}");
                    for &c in points.iter().filter(|&&c| c > b) {
                        let all = space
                            .iter()
                            .filter(|x| {
                                x.holds_on_bits(a) && x.holds_on_bits(b) && x.holds_on_bits(c)
                            })
                            .count();
                        assert_eq!(all * 8, total, "w={w} a={a} b={b} c={c}");
                    }
                }
            }
        }
    }

    #[test]
    fn not_four_wise_independent() {
        // {00, 01, 10, 11} XOR to zero, so their survival is correlated.
        let space = draw_space(2);
        let all = space
            .iter()
            .filter(|x| (0..4).all(|p| x.holds_on_bits(p)))
            .count();
        assert_ne!(all * 16, space.len());
    }

    #[test]
    fn half_of_assignments_satisfy() {
        for m in 1..=4u32 {
            let x = XorConstraint::new((1..=m).collect(), true);
            let n = (0..1u64 << m).filter(|&b| x.holds_on_bits(b)).count();
            assert_eq!(n, 1 << (m - 1));
        }
    }
}
