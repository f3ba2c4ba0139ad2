//! TSP instances: a node count and an exact integer cost matrix.

use crate::error::Error;
use std::fmt::Write as _;

/// A TSP problem datum. Costs are exact integers; `cost[i][j]` is the cost of
/// the directed arc `i -> j` (0-based storage, 1-based accessors). Self-arcs
/// carry a large sentinel cost; the models additionally forbid them by
/// constraint, so the sentinel is never paid.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Instance {
    n: usize,
    cost: Vec<Vec<i64>>,
}

impl Instance {
    pub fn new(cost: Vec<Vec<i64>>) -> Result<Self, Error> {
        let n = cost.len();
        if n < 3 {
            return Err(Error::Validation(format!("instance needs n >= 3, got {n}")));
        }
        for (i, row) in cost.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Validation(format!(
                    "cost matrix is not square: row {} has {} entries, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            if let Some(&c) = row.iter().find(|&&c| c < 0) {
                return Err(Error::Validation(format!(
                    "negative cost {c} in row {}",
                    i + 1
                )));
            }
        }
        Ok(Instance { n, cost })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Cost of arc `i -> j`, 1-based.
    pub fn cost(&self, i: u16, j: u16) -> i64 {
        self.cost[(i - 1) as usize][(j - 1) as usize]
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.cost
    }

    /// Plain-text interchange format: first line `n`, then `n` rows of
    /// whitespace-separated integers.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.n).unwrap();
        for row in &self.cost {
            let line: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            writeln!(out, "{}", line.join(" ")).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, Error> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("empty instance file".into()))?
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad node count: {e}")))?;
        let mut cost = Vec::with_capacity(n);
        for i in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing cost row {}", i + 1)))?;
            let row: Result<Vec<i64>, _> = line
                .split_whitespace()
                .map(|t| t.parse::<i64>().map_err(|e| Error::Parse(format!("bad cost {t:?}: {e}"))))
                .collect();
            cost.push(row?);
        }
        Instance::new(cost)
    }
}
