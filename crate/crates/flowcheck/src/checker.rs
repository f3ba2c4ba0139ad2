//! Exact constraint checking: evaluate a constraint stream against an
//! assignment and report every violation with its exact residual.

use crate::assignment::Assignment;
use crate::constraint::{Constraint, Relation};
use crate::error::Error;
use crate::instance::Instance;
use crate::rational::Rational;
use num_traits::{Signed, Zero};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CheckMode {
    /// Stop at the first violation.
    FailFast,
    /// Gather every violation (storage capped; the count stays exact).
    Collect,
}

/// One violated constraint: label, exact left-hand value, relation, right-hand
/// side, and the signed residual `lhs - rhs`.
#[derive(Clone, Debug)]
pub struct Violation {
    pub label: String,
    pub lhs: Rational,
    pub relation: Relation,
    pub rhs: Rational,
    pub residual: Rational,
}

#[derive(Clone, Debug, Default)]
pub struct CheckReport {
    pub total: usize,
    pub satisfied: usize,
    pub violations: Vec<Violation>,
    /// Exact violation count, which can exceed `violations.len()` when the
    /// storage cap is hit.
    pub violation_count: usize,
}

/// Stored-violation cap for [`CheckMode::Collect`].
pub const COLLECT_CAP: usize = 1000;

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.violation_count == 0
    }

    /// Line-oriented serialization: `<label><TAB><lhs><TAB><rel><TAB><rhs>`.
    pub fn violation_lines(&self) -> String {
        use crate::rational::format_rational;
        let mut out = String::new();
        for v in &self.violations {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                v.label,
                format_rational(&v.lhs),
                v.relation,
                format_rational(&v.rhs)
            ));
        }
        out
    }
}

/// Evaluates every constraint exactly; absent assignment keys contribute 0.
pub fn check(
    constraints: impl IntoIterator<Item = Constraint>,
    a: &Assignment,
    mode: CheckMode,
) -> Result<CheckReport, Error> {
    let mut report = CheckReport::default();
    for c in constraints {
        if c.terms.is_empty() {
            return Err(Error::Validation(format!(
                "constraint {} has no terms",
                c.label
            )));
        }
        report.total += 1;
        let mut lhs = Rational::zero();
        for (coef, key) in &c.terms {
            let value = a.get(key);
            if !value.is_zero() {
                lhs += coef * value;
            }
        }
        let holds = match c.relation {
            Relation::Eq => lhs == c.rhs,
            Relation::Le => lhs <= c.rhs,
            Relation::Ge => lhs >= c.rhs,
        };
        if holds {
            report.satisfied += 1;
        } else {
            report.violation_count += 1;
            if report.violations.len() < COLLECT_CAP {
                report.violations.push(Violation {
                    label: c.label.clone(),
                    residual: &lhs - &c.rhs,
                    lhs,
                    relation: c.relation,
                    rhs: c.rhs,
                });
            }
            if mode == CheckMode::FailFast {
                break;
            }
        }
    }
    Ok(report)
}

/// Batch size for [`check_parallel`]; chosen so per-batch scheduling overhead
/// stays negligible against million-constraint streams.
const PAR_BATCH: usize = 4096;

/// Parallel variant of [`check`]: constraints are gathered into fixed-size
/// batches, each batch is evaluated across `threads` workers, and results are
/// merged back in stream order — the report is byte-for-byte identical to the
/// sequential one for every thread count.
pub fn check_parallel(
    constraints: impl IntoIterator<Item = Constraint>,
    a: &Assignment,
    mode: CheckMode,
    threads: usize,
) -> Result<CheckReport, Error> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Validation(format!("thread pool: {e}")))?;
    let mut report = CheckReport::default();
    let mut iter = constraints.into_iter();
    'stream: loop {
        let batch: Vec<Constraint> = iter.by_ref().take(PAR_BATCH).collect();
        if batch.is_empty() {
            break;
        }
        // Each entry: Ok(Some(violation)) / Ok(None) / Err(empty constraint).
        let results: Vec<Result<Option<Violation>, String>> = pool.install(|| {
            batch
                .par_iter()
                .map(|c| {
                    if c.terms.is_empty() {
                        return Err(c.label.clone());
                    }
                    let mut lhs = Rational::zero();
                    for (coef, key) in &c.terms {
                        let value = a.get(key);
                        if !value.is_zero() {
                            lhs += coef * value;
                        }
                    }
                    let holds = match c.relation {
                        Relation::Eq => lhs == c.rhs,
                        Relation::Le => lhs <= c.rhs,
                        Relation::Ge => lhs >= c.rhs,
                    };
                    Ok(if holds {
                        None
                    } else {
                        Some(Violation {
                            label: c.label.clone(),
                            residual: &lhs - &c.rhs,
                            lhs,
                            relation: c.relation,
                            rhs: c.rhs.clone(),
                        })
                    })
                })
                .collect()
        });
        for r in results {
            match r {
                Err(label) => {
                    return Err(Error::Validation(format!(
                        "constraint {label} has no terms"
                    )))
                }
                Ok(None) => {
                    report.total += 1;
                    report.satisfied += 1;
                }
                Ok(Some(v)) => {
                    report.total += 1;
                    report.violation_count += 1;
                    if report.violations.len() < COLLECT_CAP {
                        report.violations.push(v);
                    }
                    if mode == CheckMode::FailFast {
                        break 'stream;
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Number of keys with value below 0 or above `total_flow`.
pub fn check_bounds(a: &Assignment, total_flow: &Rational) -> usize {
    a.iter()
        .filter(|(_, v)| v.is_negative() || *v > total_flow)
        .count()
}

/// `objective(a) - total_flow * oracle_cost`. Negative means the fractional
/// point undercuts every tour: the relaxation gap is witnessed.
pub fn gap_report(
    instance: &Instance,
    a: &Assignment,
    oracle_cost: &Rational,
) -> Result<Rational, Error> {
    let obj = a.objective(instance)?;
    Ok(obj - a.total_flow() * oracle_cost)
}
