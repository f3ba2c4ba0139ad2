//! The one-dimensional flow formulation: `x_{i,s,j}` variables with start,
//! conservation (plus cycle-closure wrap), visit-once, and no-self-arc
//! families.

use crate::assignment::Assignment;
use crate::config::ModelConfig;
use crate::constraint::Constraint;
use crate::error::Error;
use crate::instance::Instance;
use crate::rational::{rat, Rational};
use crate::varkey::VarKey;

/// A fully-materialized x model. The x dimension is small (n^3 variables), so
/// unlike the higher-dimensional stream there is no need for lazy emission.
#[derive(Clone, Debug)]
pub struct XModel {
    pub constraints: Vec<Constraint>,
    pub objective_terms: Vec<(Rational, VarKey)>,
    pub total_flow: Rational,
}

/// Builds the four constraint families over all `n^3` variables:
///
/// * start: the total flow at stage 1 equals `total_flow` (one equation);
/// * conservation: flow into `j` at stage `s` equals flow out of `j` at stage
///   `s+1`, for every node and every stage, with stage `n` wrapping to stage 1
///   (cycle closure);
/// * visit: total flow through each node over all stages equals `total_flow`;
/// * self-arc: `x_{i,s,i} = 0`.
pub fn build_x_model(instance: &Instance, config: &ModelConfig) -> XModel {
    let n = instance.n() as u16;
    let total_flow = rat(config.total_flow_constant as i64);
    let mut constraints = Vec::new();

    // Start family.
    let mut terms = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            if i != j {
                terms.push((rat(1), VarKey::x(i, 1, j)));
            }
        }
    }
    constraints.push(Constraint::eq("RSTART_1".into(), terms, total_flow.clone()));

    // Conservation family: for each node j and stage s, inflow at s equals
    // outflow at s+1; stage n wraps to stage 1 under the separate WRAP label.
    let mut cons_ord = 0;
    let mut wrap_ord = 0;
    for s in 1..=n {
        let next = if s == n { 1 } else { s + 1 };
        for j in 1..=n {
            let mut terms = Vec::new();
            for i in 1..=n {
                if i != j {
                    terms.push((rat(1), VarKey::x(i, s, j)));
                    terms.push((rat(-1), VarKey::x(j, next, i)));
                }
            }
            let label = if s == n {
                wrap_ord += 1;
                format!("RWRAP_{wrap_ord}")
            } else {
                cons_ord += 1;
                format!("RCONS_{cons_ord}")
            };
            constraints.push(Constraint::eq(label, terms, rat(0)));
        }
    }

    // Visit family.
    for j in 1..=n {
        let mut terms = Vec::new();
        for s in 1..=n {
            for i in 1..=n {
                if i != j {
                    terms.push((rat(1), VarKey::x(i, s, j)));
                }
            }
        }
        constraints.push(Constraint::eq(format!("RVISIT_{j}"), terms, total_flow.clone()));
    }

    // Self-arc family.
    let mut ord = 0;
    for i in 1..=n {
        for s in 1..=n {
            ord += 1;
            constraints.push(Constraint::eq(
                format!("RSELF_{ord}"),
                vec![(rat(1), VarKey::x(i, s, i))],
                rat(0),
            ));
        }
    }

    let mut objective_terms = Vec::new();
    for i in 1..=n {
        for s in 1..=n {
            for j in 1..=n {
                let c = instance.cost(i, j);
                if c != 0 {
                    objective_terms.push((rat(c), VarKey::x(i, s, j)));
                }
            }
        }
    }

    XModel {
        constraints,
        objective_terms,
        total_flow,
    }
}

/// Encodes a Hamiltonian tour as the integral point
/// `x_{tour[s], s, tour[s+1]} = total_flow` (stage `n` wraps to the start).
pub fn tour_to_assignment(
    instance: &Instance,
    tour: &[u16],
    total_flow: Rational,
) -> Result<Assignment, Error> {
    let n = instance.n();
    if tour.len() != n {
        return Err(Error::Validation(format!(
            "tour has {} nodes, instance has {n}",
            tour.len()
        )));
    }
    let mut seen = vec![false; n + 1];
    for &v in tour {
        if v == 0 || v as usize > n || seen[v as usize] {
            return Err(Error::Validation(format!(
                "tour is not a permutation of 1..={n}: offending node {v}"
            )));
        }
        seen[v as usize] = true;
    }
    let mut a = Assignment::new(total_flow.clone());
    for s in 0..n {
        let from = tour[s];
        let to = tour[(s + 1) % n];
        a.set(VarKey::x(from, (s + 1) as u16, to), total_flow.clone());
    }
    Ok(a)
}

/// Result of decoding an x assignment back to tours.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TourDecode {
    Tours(Vec<Vec<u16>>),
    /// Not every value is 0 or `total_flow`; carries the fractional keys, or
    /// an empty list when the point is integral but carries no stage-1 flow.
    NotIntegral(Vec<VarKey>),
}

/// Decodes an assignment whose values are all 0 or `total_flow` into the tour
/// it encodes. Fractional points return [`TourDecode::NotIntegral`].
pub fn assignment_to_tours(a: &Assignment) -> Result<TourDecode, Error> {
    let mut fractional = Vec::new();
    let mut full_arcs = Vec::new();
    for (key, value) in a.iter() {
        match key {
            VarKey::X(arc) => {
                if value == a.total_flow() {
                    full_arcs.push(*arc);
                } else {
                    fractional.push(*key);
                }
            }
            other => {
                return Err(Error::Validation(format!(
                    "assignment_to_tours expects only x keys, found {other}"
                )))
            }
        }
    }
    if !fractional.is_empty() {
        fractional.sort();
        return Ok(TourDecode::NotIntegral(fractional));
    }
    let start = full_arcs.iter().find(|arc| arc.stage == 1);
    let Some(start) = start else {
        return Ok(TourDecode::NotIntegral(Vec::new()));
    };
    let n = full_arcs.len();
    let mut tour = vec![start.from];
    let mut here = start.to;
    for s in 2..=n as u16 {
        tour.push(here);
        let nexts: Vec<_> = full_arcs
            .iter()
            .filter(|arc| arc.stage == s && arc.from == here)
            .collect();
        match nexts.as_slice() {
            [one] => here = one.to,
            _ => {
                return Err(Error::Validation(format!(
                    "integral point is not a single cycle: node {here} at stage {s} has {} successors",
                    nexts.len()
                )))
            }
        }
    }
    if here != start.from || tour.len() != n {
        return Err(Error::Validation(
            "integral point is not a single closed cycle".into(),
        ));
    }
    Ok(TourDecode::Tours(vec![tour]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::{check, CheckMode};
    use crate::config::Dimension;

    fn tri() -> Instance {
        Instance::new(vec![vec![99, 1, 1], vec![1, 99, 1], vec![1, 1, 99]]).unwrap()
    }

    #[test]
    fn family_sizes_n4() {
        let inst = Instance::new(vec![vec![0; 4]; 4]).unwrap();
        let model = build_x_model(&inst, &ModelConfig::new(Dimension::X));
        let count = |tag: &str| {
            model
                .constraints
                .iter()
                .filter(|c| c.label.starts_with(tag))
                .count()
        };
        assert_eq!(count("RSTART"), 1);
        assert_eq!(count("RCONS"), 12);
        assert_eq!(count("RWRAP"), 4);
        assert_eq!(count("RVISIT"), 4);
        assert_eq!(count("RSELF"), 16);
    }

    #[test]
    fn tour_round_trip_and_feasibility() {
        let inst = tri();
        let a = tour_to_assignment(&inst, &[1, 2, 3], rat(1)).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(
            assignment_to_tours(&a).unwrap(),
            TourDecode::Tours(vec![vec![1, 2, 3]])
        );
        let model = build_x_model(&inst, &ModelConfig::new(Dimension::X));
        let report = check(model.constraints.iter().cloned(), &a, CheckMode::Collect).unwrap();
        assert_eq!(report.violations.len(), 0);
    }

    #[test]
    fn rejects_non_permutations() {
        let inst = tri();
        assert!(tour_to_assignment(&inst, &[1, 2, 2], rat(1)).is_err());
        assert!(tour_to_assignment(&inst, &[1, 2], rat(1)).is_err());
    }

    #[test]
    fn empty_assignment_refuses_decode() {
        let a = Assignment::new(rat(1));
        assert_eq!(
            assignment_to_tours(&a).unwrap(),
            TourDecode::NotIntegral(Vec::new())
        );
    }
}
