//! Property-based invariants: name grammar round-trips, order-independence of
//! checking, rational serialization, and x-model structural facts.

use flowcheck::checker::{check, CheckMode};
use flowcheck::config::{Dimension, ModelConfig};
use flowcheck::constraint::Constraint;
use flowcheck::instance::Instance;
use flowcheck::model_x::{assignment_to_tours, build_x_model, tour_to_assignment, TourDecode};
use flowcheck::rational::{format_rational, parse_rational, rat, ratio, Rational};
use flowcheck::varkey::{arc, VarKey};
use proptest::prelude::*;

fn arb_arc() -> impl Strategy<Value = flowcheck::varkey::Arc> {
    (1u16..=30, 1u16..=30, 1u16..=30).prop_map(|(i, s, j)| arc(i, s, j))
}

fn arb_key() -> impl Strategy<Value = VarKey> {
    prop_oneof![
        arb_arc().prop_map(|a| VarKey::X(a)),
        (arb_arc(), arb_arc()).prop_map(|(a, b)| VarKey::y(a, b)),
        (arb_arc(), arb_arc(), arb_arc()).prop_map(|(a, b, c)| VarKey::z(a, b, c)),
    ]
}

fn arb_rational() -> impl Strategy<Value = Rational> {
    (-1000i64..=1000, 1i64..=60).prop_map(|(n, d)| ratio(n, d))
}

proptest! {
    /// The variable-name grammar is injective and total: every key renders to
    /// a name that parses back to exactly the same key.
    #[test]
    fn varkey_name_round_trips(key in arb_key()) {
        let name = key.name();
        let back = VarKey::parse(&name).unwrap();
        prop_assert_eq!(key, back);
    }

    /// Rational serialization round-trips exactly through the p/q form.
    #[test]
    fn rational_round_trips(q in arb_rational()) {
        let text = format_rational(&q);
        prop_assert_eq!(parse_rational(&text).unwrap(), q);
    }

    /// A constraint's verdict does not depend on term order.
    #[test]
    fn check_is_term_order_independent(
        terms in proptest::collection::vec((arb_rational(), arb_key()), 1..12),
        rhs in arb_rational(),
        values in proptest::collection::vec(arb_rational(), 12),
        seed in 0u64..1000,
    ) {
        let mut a = flowcheck::assignment::Assignment::new(rat(1));
        for (slot, (_, key)) in values.iter().zip(terms.iter()) {
            a.set(*key, slot.clone());
        }
        let original = Constraint::eq("R1_1".into(), terms.clone(), rhs.clone());
        // Deterministic shuffle driven by the seed.
        let mut shuffled = terms;
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
        for i in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % (i + 1);
            shuffled.swap(i, j);
        }
        let permuted = Constraint::eq("R1_1".into(), shuffled, rhs);
        let r1 = check([original], &a, CheckMode::Collect).unwrap();
        let r2 = check([permuted], &a, CheckMode::Collect).unwrap();
        prop_assert_eq!(r1.violation_count, r2.violation_count);
    }

    /// Every tour encoding is x-model feasible and decodes back to the same
    /// tour; perturbing any single coordinate of the encoding breaks at least
    /// one constraint.
    #[test]
    fn tour_encodings_feasible_and_fragile(
        n in 3u16..=7,
        perm_seed in 0u64..5000,
        bump in 1i64..=3,
        key_pick in 0usize..2000,
    ) {
        let n_us = n as usize;
        let mut m = vec![vec![1i64; n_us]; n_us];
        for (i, row) in m.iter_mut().enumerate() { row[i] = 99; }
        let inst = Instance::new(m).unwrap();
        // Deterministic permutation of 2..=n from the seed (node 1 fixed).
        let mut rest: Vec<u16> = (2..=n).collect();
        let mut state = perm_seed.wrapping_add(0xA5A5A5A5);
        for i in (1..rest.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % (i + 1);
            rest.swap(i, j);
        }
        let mut tour = vec![1u16];
        tour.extend(rest);
        let a = tour_to_assignment(&inst, &tour, rat(1)).unwrap();
        let model = build_x_model(&inst, &ModelConfig::new(Dimension::X));
        let report = check(model.constraints.iter().cloned(), &a, CheckMode::Collect).unwrap();
        prop_assert_eq!(report.violation_count, 0);
        prop_assert_eq!(assignment_to_tours(&a).unwrap(), TourDecode::Tours(vec![tour]));

        // Perturb one key (an existing one or a fresh zero key).
        let keys = a.sorted_keys();
        let mut b = a.clone();
        if key_pick % 2 == 0 {
            let k = keys[key_pick / 2 % keys.len()];
            b.set(k, b.get(&k) + rat(bump));
        } else {
            let i = (key_pick as u16 % n) + 1;
            let s = (key_pick as u16 / 7 % n) + 1;
            let j = (i % n) + 1;
            let k = VarKey::x(i, s, j);
            b.set(k, b.get(&k) + rat(bump));
        }
        let report = check(model.constraints.iter().cloned(), &b, CheckMode::Collect).unwrap();
        prop_assert!(report.violation_count > 0, "perturbed point stayed feasible");
    }
}

/// Derived Ord on VarKey groups by variant (x, then y, then z) and is total
/// and antisymmetric on a sampled set — the canonical file order depends on
/// it.
#[test]
fn varkey_order_is_variant_major() {
    let x = VarKey::x(9, 9, 9);
    let y = VarKey::y(arc(1, 1, 2), arc(2, 2, 3));
    let z = VarKey::z(arc(1, 1, 2), arc(2, 2, 3), arc(3, 3, 4));
    assert!(x < y && y < z);
    let y2 = VarKey::y(arc(1, 1, 2), arc(2, 2, 4));
    assert!(y < y2);
}
