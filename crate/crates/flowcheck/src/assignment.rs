//! Sparse exact-rational assignments: a candidate LP point.

use crate::error::Error;
use crate::instance::Instance;
use crate::rational::{rat, Rational};
use crate::varkey::VarKey;
use num_traits::Zero;
use std::collections::HashMap;

/// Sparse association `VarKey -> Rational`. Absent keys mean 0; stored values
/// are always strictly positive (zeros are pruned on insert). `total_flow` is
/// the value every stage-sum must equal.
#[derive(Clone, Debug)]
pub struct Assignment {
    values: HashMap<VarKey, Rational>,
    total_flow: Rational,
}

impl Assignment {
    pub fn new(total_flow: Rational) -> Self {
        Assignment {
            values: HashMap::new(),
            total_flow,
        }
    }

    pub fn total_flow(&self) -> &Rational {
        &self.total_flow
    }

    /// Inserts a value, pruning zeros. Negative or over-total values are kept
    /// (the bounds checker reports them); only exact zeros are dropped.
    pub fn set(&mut self, key: VarKey, value: Rational) {
        if value.is_zero() {
            self.values.remove(&key);
        } else {
            self.values.insert(key, value);
        }
    }

    /// Adds to the current value of a key.
    pub fn add(&mut self, key: VarKey, delta: Rational) {
        let v = self.get(&key) + delta;
        self.set(key, v);
    }

    pub fn get(&self, key: &VarKey) -> Rational {
        self.values.get(key).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn contains(&self, key: &VarKey) -> bool {
        self.values.contains_key(key)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarKey, &Rational)> {
        self.values.iter()
    }

    /// Keys in the canonical (variant, then lexicographic) order.
    pub fn sorted_keys(&self) -> Vec<VarKey> {
        let mut keys: Vec<VarKey> = self.values.keys().copied().collect();
        keys.sort();
        keys
    }

    /// Returns the same point with every value divided by `total_flow`, so
    /// stage sums equal 1. Useful for human-facing reports.
    pub fn normalized(&self) -> Assignment {
        let mut out = Assignment::new(rat(1));
        for (k, v) in &self.values {
            out.set(*k, v / &self.total_flow);
        }
        out
    }

    /// Exact objective: sum of `value * cost(i,j)` over the flow-carrying keys
    /// (`x` keys, or the diagonal `y` keys when the point lives in a higher
    /// dimension). Off-diagonal `y` and all `z` keys carry no cost.
    pub fn objective(&self, instance: &Instance) -> Result<Rational, Error> {
        let n = instance.n() as u16;
        let mut total = Rational::zero();
        for (key, value) in &self.values {
            if let Some(a) = key.as_flow_arc() {
                if a.from > n || a.to > n {
                    return Err(Error::Index(format!(
                        "variable {key} references node outside 1..={n}"
                    )));
                }
                total += value * rat(instance.cost(a.from, a.to));
            }
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::varkey::arc;

    fn tri() -> Instance {
        Instance::new(vec![vec![99, 2, 3], vec![4, 99, 5], vec![6, 7, 99]]).unwrap()
    }

    #[test]
    fn zero_pruning_and_objective() {
        let mut a = Assignment::new(rat(1));
        a.set(VarKey::x(1, 1, 2), ratio(1, 2));
        a.set(VarKey::x(2, 2, 3), ratio(1, 2));
        a.set(VarKey::x(3, 3, 1), rat(0));
        assert_eq!(a.len(), 2);
        // 2*(1/2) + 5*(1/2) = 7/2
        assert_eq!(a.objective(&tri()).unwrap(), ratio(7, 2));
    }

    #[test]
    fn diagonal_y_counts_offdiagonal_does_not() {
        let mut a = Assignment::new(rat(1));
        a.set(VarKey::y_diag(arc(1, 1, 2)), rat(1));
        a.set(VarKey::y(arc(1, 1, 2), arc(2, 2, 3)), rat(1));
        assert_eq!(a.objective(&tri()).unwrap(), rat(2));
    }

    #[test]
    fn out_of_range_key_errors() {
        let mut a = Assignment::new(rat(1));
        a.set(VarKey::x(1, 1, 9), rat(1));
        assert!(a.objective(&tri()).is_err());
    }
}
