//! Shared helpers for the integration suites: an independent dense
//! re-evaluator and deterministic randomized-assignment generation.

use flowcheck::assignment::Assignment;
use flowcheck::constraint::{Constraint, Relation};
use flowcheck::rational::{ratio, Rational};
use flowcheck::varkey::VarKey;
use num_traits::Zero;
use std::collections::BTreeMap;

/// Naive dense re-evaluation, deliberately independent of the streaming
/// checker: per constraint, coefficients are first aggregated per variable
/// into a map, then the left side is computed by walking the model's entire
/// variable universe (not just the constraint's support). Returns the labels
/// of violated constraints in stream order.
pub fn dense_violations(constraints: &[Constraint], a: &Assignment) -> Vec<String> {
    let mut universe: Vec<VarKey> = constraints
        .iter()
        .flat_map(|c| c.terms.iter().map(|(_, k)| *k))
        .collect();
    universe.sort();
    universe.dedup();
    let dense: Vec<(VarKey, Rational)> =
        universe.iter().map(|k| (*k, a.get(k))).collect();
    let mut out = Vec::new();
    for c in constraints {
        let mut coef: BTreeMap<VarKey, Rational> = BTreeMap::new();
        for (q, k) in &c.terms {
            *coef.entry(*k).or_insert_with(Rational::zero) += q;
        }
        let mut lhs = Rational::zero();
        for (k, v) in &dense {
            if let Some(q) = coef.get(k) {
                lhs += q * v;
            }
        }
        let holds = match c.relation {
            Relation::Eq => lhs == c.rhs,
            Relation::Le => lhs <= c.rhs,
            Relation::Ge => lhs >= c.rhs,
        };
        if !holds {
            out.push(c.label.clone());
        }
    }
    out
}

/// Small deterministic generator (64-bit LCG) so test inputs are reproducible
/// without a seed flag.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0 >> 11
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next() % n.max(1) as u64) as usize
    }

    /// Random non-zero rational with small numerator and denominator.
    pub fn rational(&mut self) -> Rational {
        let n = (self.next() % 19) as i64 - 9;
        let d = (self.next() % 6) as i64 + 1;
        if n == 0 {
            ratio(1, d)
        } else {
            ratio(n, d)
        }
    }

    /// Random permutation of `1..=n` with node 1 first (a fixed-start tour).
    pub fn tour(&mut self, n: u16) -> Vec<u16> {
        let mut rest: Vec<u16> = (2..=n).collect();
        for i in (1..rest.len()).rev() {
            let j = self.below(i + 1);
            rest.swap(i, j);
        }
        let mut tour = vec![1u16];
        tour.extend(rest);
        tour
    }
}

/// Perturbs `count` entries of the assignment (existing keys get bumped) and
/// returns the result.
pub fn perturb(a: &Assignment, rng: &mut Lcg, count: usize) -> Assignment {
    let keys = a.sorted_keys();
    let mut b = a.clone();
    for _ in 0..count {
        let k = keys[rng.below(keys.len())];
        b.set(k, b.get(&k) + rng.rational());
    }
    b
}

/// Uniform off-diagonal cost matrix (self-arcs at the 99 sentinel).
pub fn uniform_instance(n: usize) -> flowcheck::instance::Instance {
    let mut m = vec![vec![1i64; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 99;
    }
    flowcheck::instance::Instance::new(m).unwrap()
}

/// All fixed-start tours of `1..=n` (node 1 first), lexicographic.
pub fn all_tours(n: u16) -> Vec<Vec<u16>> {
    let mut out = Vec::new();
    let mut rest: Vec<u16> = (2..=n).collect();
    permute(&mut rest, 0, &mut |p| {
        let mut t = vec![1u16];
        t.extend_from_slice(p);
        out.push(t);
    });
    out
}

fn permute(v: &mut Vec<u16>, k: usize, f: &mut impl FnMut(&[u16])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}
