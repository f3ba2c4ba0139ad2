//! At the integer level the models are exact: {0,1}-valued x-model-feasible
//! points are precisely the directed Hamiltonian cycle encodings, and every
//! tour lifting satisfies every current-version y/z family.

mod common;

use common::{all_tours, uniform_instance};
use flowcheck::blp::{build_blp, lift_tour};
use flowcheck::checker::{check, CheckMode};
use flowcheck::config::{Dimension, ModelConfig};
use flowcheck::constraint::Constraint;
use flowcheck::model_x::build_x_model;
use flowcheck::rational::rat;
use flowcheck::varkey::VarKey;
use std::collections::BTreeSet;

/// Compiles the x model into per-stage integer coefficient tables:
/// `coef[c][(s-1)*n*n + (i-1)*n + (j-1)]` is constraint `c`'s coefficient on
/// `x_{i,s,j}`. All x-model coefficients and right sides are integers.
fn compile(constraints: &[Constraint], n: usize) -> (Vec<Vec<i64>>, Vec<i64>) {
    let dim = n * n * n;
    let mut coef = vec![vec![0i64; dim]; constraints.len()];
    let mut rhs = vec![0i64; constraints.len()];
    for (ci, c) in constraints.iter().enumerate() {
        assert!(c.rhs.is_integer());
        rhs[ci] = c.rhs.numer().try_into().unwrap();
        for (q, k) in &c.terms {
            let VarKey::X(a) = k else { panic!("x model with non-x key") };
            assert!(q.is_integer());
            let q: i64 = q.numer().try_into().unwrap();
            let idx = (a.stage as usize - 1) * n * n
                + (a.from as usize - 1) * n
                + (a.to as usize - 1);
            coef[ci][idx] += q;
        }
    }
    (coef, rhs)
}

/// Exhaustive enumeration over one-arc-per-stage candidates.
///
/// Why that space is exhaustive for {0,1} points: the start equation forces
/// the stage-1 values to sum to 1, so exactly one stage-1 arc is set; summing
/// the conservation equations of a stage over all nodes forces each later
/// stage's sum to equal the previous one's, so every stage has exactly one
/// arc set. Self-arcs are excluded up front because the self-arc family pins
/// each of them to zero with a single-term equation (a candidate containing
/// one violates that constraint by construction).
#[test]
fn zero_one_feasible_points_are_exactly_tour_encodings() {
    for n in [3usize, 4, 5] {
        let inst = uniform_instance(n);
        let cfg = ModelConfig::new(Dimension::X);
        let model = build_x_model(&inst, &cfg);
        let (coef, rhs) = compile(&model.constraints, n);

        // Non-self arcs as (i, j) index pairs.
        let arcs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect();
        let mut feasible: BTreeSet<Vec<usize>> = BTreeSet::new();
        // Candidate = arc choice per stage, odometer enumeration.
        let mut pick = vec![0usize; n];
        loop {
            let idx: Vec<usize> = (0..n)
                .map(|s| {
                    let (i, j) = arcs[pick[s]];
                    s * n * n + i * n + j
                })
                .collect();
            let ok = (0..coef.len()).all(|c| {
                let lhs: i64 = idx.iter().map(|&v| coef[c][v]).sum();
                lhs == rhs[c]
            });
            if ok {
                feasible.insert(idx.clone());
            }
            // Advance the odometer.
            let mut s = 0;
            loop {
                if s == n {
                    break;
                }
                pick[s] += 1;
                if pick[s] < arcs.len() {
                    break;
                }
                pick[s] = 0;
                s += 1;
            }
            if s == n {
                break;
            }
        }

        // Expected: every rotation of every directed Hamiltonian cycle.
        let mut expected: BTreeSet<Vec<usize>> = BTreeSet::new();
        for tour in all_tours(n as u16) {
            for rot in 0..n {
                let idx: Vec<usize> = (0..n)
                    .map(|s| {
                        let from = tour[(rot + s) % n] as usize - 1;
                        let to = tour[(rot + s + 1) % n] as usize - 1;
                        s * n * n + from * n + to
                    })
                    .collect();
                expected.insert(idx);
            }
        }
        assert_eq!(feasible, expected, "n={n}");
        // (n-1)! cycles, n rotations each.
        let fact: usize = (1..n).product();
        assert_eq!(feasible.len(), fact * n, "n={n}");
    }
}

#[test]
fn every_tour_lifting_satisfies_every_current_family() {
    for n in [3u16, 4, 5] {
        let inst = uniform_instance(n as usize);
        for dim in [Dimension::Y, Dimension::Z] {
            let cfg = ModelConfig::new(dim);
            let mut constraints = Vec::new();
            build_blp(&inst, &cfg, &mut |c| constraints.push(c)).unwrap();
            assert!(!constraints.is_empty());
            for tour in all_tours(n) {
                let a = lift_tour(&tour, &cfg, rat(1)).unwrap();
                let report =
                    check(constraints.iter().cloned(), &a, CheckMode::Collect).unwrap();
                assert!(
                    report.ok(),
                    "n={n} dim={dim:?} tour={tour:?}:\n{}",
                    report.violation_lines()
                );
            }
        }
    }
}
