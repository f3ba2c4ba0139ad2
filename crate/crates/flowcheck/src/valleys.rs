//! Counterexample instances and fractional flow construction.
//!
//! Two kinds of instance live here: the small published cost tables (the
//! four-town ABCD graph and the eight-town graph), and the parametric valley
//! families, where cheap in-valley arcs and expensive mountain crossings make
//! the optimal number of crossings structural. The flow constructors build the
//! fractional points that undercut every tour: single-file through the lead-in
//! band, a fan-out over the path entry nodes of both valleys of a pair, uniform
//! switching inside the pair, and single-file out.

use crate::assignment::Assignment;
use crate::blp::Admissibility;
use crate::config::{ModelConfig, ValleyBands};
use crate::error::Error;
use crate::instance::Instance;
use crate::rational::{rat, ratio, Rational};
use crate::varkey::{Arc, VarKey};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TableInstance {
    /// The 4-town graph with towns A, B, C, D mapped to nodes 1..4.
    Abcd,
    /// The asymmetric 8-town graph.
    Graph8,
}

/// Returns the published cost matrix, exactly as printed (self-arcs carry the
/// sentinel 99; the 8-town matrix is asymmetric, e.g. c(6,7)=17 vs c(7,6)=15).
pub fn gen_table_instance(name: TableInstance) -> Instance {
    let rows: Vec<Vec<i64>> = match name {
        TableInstance::Abcd => vec![
            vec![99, 10, 20, 20],
            vec![20, 99, 25, 25],
            vec![20, 14, 99, 25],
            vec![20, 14, 25, 99],
        ],
        TableInstance::Graph8 => vec![
            vec![99, 5, 15, 15, 15, 15, 15, 15],
            vec![15, 99, 5, 15, 15, 15, 15, 15],
            vec![15, 15, 99, 10, 15, 15, 15, 15],
            vec![10, 15, 15, 99, 15, 15, 15, 15],
            vec![15, 15, 15, 15, 99, 8, 15, 15],
            vec![12, 15, 6, 15, 15, 99, 17, 15],
            vec![15, 15, 15, 15, 15, 15, 99, 7],
            vec![13, 15, 7, 15, 18, 15, 15, 99],
        ],
    };
    Instance::new(rows).expect("published matrices are valid")
}

/// The published fractional x point for the 8-town graph: 24 keys, three per
/// stage (values 1/2, 1/4, 1/4 scaled by `total_flow`), objective exactly 75
/// against the brute-force optimum 79.
pub fn graph8_fractional_assignment(total_flow: Rational) -> Assignment {
    let mut a = Assignment::new(total_flow.clone());
    // (stage-set, from, to, numerator/4)
    let pattern: [(&[u16; 2], u16, u16, i64); 12] = [
        (&[1, 5], 3, 4, 2),
        (&[1, 5], 6, 5, 1),
        (&[1, 5], 8, 7, 1),
        (&[2, 6], 4, 1, 2),
        (&[2, 6], 5, 6, 1),
        (&[2, 6], 7, 8, 1),
        (&[3, 7], 1, 2, 2),
        (&[3, 7], 6, 5, 1),
        (&[3, 7], 8, 7, 1),
        (&[4, 8], 2, 3, 2),
        (&[4, 8], 5, 6, 1),
        (&[4, 8], 7, 8, 1),
    ];
    for (stages, from, to, quarters) in pattern {
        for &s in stages {
            a.set(VarKey::x(from, s, to), &total_flow * ratio(quarters, 4));
        }
    }
    a
}

/// Geometry of a valley family. Node layout: the lead-in band first, then for
/// each pair its two valleys followed by that pair's lead-out band.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ValleySpec {
    pub lead_in: u16,
    pub lead_out: u16,
    pub valley_size: u16,
    pub paths: u16,
    pub pairs: u16,
    pub cross_cost: i64,
    pub in_cost: i64,
}

impl ValleySpec {
    /// The direct 32-node counterexample: bands of 4, one pair of 12-node
    /// valleys with three switching paths.
    pub fn direct_32() -> Self {
        ValleySpec {
            lead_in: 4,
            lead_out: 4,
            valley_size: 12,
            paths: 3,
            pairs: 1,
            cross_cost: 1000,
            in_cost: 1,
        }
    }

    /// The generalized k-dimension family: `1 + 3k` valleys of `3 * 2^(k-1)`
    /// nodes each (k pairs, each with its own lead-out band of the same size).
    pub fn from_dimension(k: u16) -> Self {
        assert!((1..=3).contains(&k), "constructions are given for k in 1..=3");
        let size = 3 * (1 << (k - 1));
        ValleySpec {
            lead_in: size,
            lead_out: size,
            valley_size: size,
            paths: k,
            pairs: k,
            cross_cost: 1000,
            in_cost: 1,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.paths == 0 || self.paths > 3 {
            return Err(Error::Validation(format!(
                "paths must be in 1..=3, got {}",
                self.paths
            )));
        }
        if self.valley_size == 0 || self.valley_size % self.paths != 0 {
            return Err(Error::Validation(format!(
                "valley_size {} must be a positive multiple of paths {}",
                self.valley_size, self.paths
            )));
        }
        if self.lead_in < 2 || self.lead_out < 1 || self.pairs == 0 {
            return Err(Error::Validation(
                "need lead_in >= 2, lead_out >= 1, pairs >= 1".into(),
            ));
        }
        let n = self.node_count() as i64;
        if self.in_cost < 0 || self.cross_cost <= n * self.in_cost {
            return Err(Error::Validation(format!(
                "cross_cost {} must exceed n * in_cost = {}",
                self.cross_cost,
                n * self.in_cost
            )));
        }
        Ok(())
    }

    pub fn node_count(&self) -> u16 {
        self.lead_in + self.pairs * (2 * self.valley_size + self.lead_out)
    }

    /// Total number of valleys (bands): `1 + 3 * pairs`.
    pub fn valley_count(&self) -> u16 {
        1 + 3 * self.pairs
    }

    /// Band index (0-based) of a 1-based node.
    fn band_of(&self, node: u16) -> u16 {
        debug_assert!(node >= 1 && node <= self.node_count());
        if node <= self.lead_in {
            return 0;
        }
        let off = node - self.lead_in - 1;
        let per_pair = 2 * self.valley_size + self.lead_out;
        let pair = off / per_pair;
        let within = off % per_pair;
        let slot = if within < self.valley_size {
            0
        } else if within < 2 * self.valley_size {
            1
        } else {
            2
        };
        1 + 3 * pair + slot
    }

    /// Band geometry for admissibility pruning (single-pair specs only).
    pub fn bands(&self) -> Option<ValleyBands> {
        (self.pairs == 1).then_some(ValleyBands {
            lead_in: self.lead_in,
            valley_size: self.valley_size,
        })
    }
}

/// Builds the valley cost matrix: `in_cost` inside a band, `cross_cost`
/// between bands, sentinel 99 on the diagonal (never paid: models forbid
/// self-arcs).
pub fn gen_valley_instance(spec: &ValleySpec) -> Result<Instance, Error> {
    spec.validate()?;
    let n = spec.node_count() as usize;
    let mut m = vec![vec![0i64; n]; n];
    for i in 1..=n as u16 {
        for j in 1..=n as u16 {
            m[(i - 1) as usize][(j - 1) as usize] = if i == j {
                99
            } else if spec.band_of(i) == spec.band_of(j) {
                spec.in_cost
            } else {
                spec.cross_cost
            };
        }
    }
    Instance::new(m)
}

/// Builds the fractional x flow for a single-pair spec.
///
/// Stage layout (`a` = lead_in, `n` = valley_size, `p` = paths, `L` = n/p):
/// single file through the lead-in; at stage `a` fan-out to the `2p` path
/// entry nodes (`total/2p` each); for `2n - 1` stages uniform switching — from
/// each node at the current path position to the `p` next-position nodes of
/// the same valley (`total/2p²` each, 1/18 units for three paths); at stage
/// `a + 2n` convergence to the lead-out; single file out and one closing arc.
/// Every node receives `total` inflow overall, every stage sums to `total`.
pub fn construct_x_flow(spec: &ValleySpec, total_flow: u64) -> Result<Assignment, Error> {
    spec.validate()?;
    if spec.pairs != 1 {
        return Err(Error::Unsupported(
            "x flow construction is given for single-pair specs; multi-pair \
             families are assessed by their crossing schedule"
                .into(),
        ));
    }
    let total = rat(total_flow as i64);
    let a = spec.lead_in;
    let n = spec.valley_size;
    let p = spec.paths;
    let l = n / p;
    let count = spec.node_count();
    let mut x = Assignment::new(total.clone());

    // Entry node of valley `side` (0 or 1), path `q`, position `pos` (1-based).
    let vnode = |side: u16, q: u16, pos: u16| a + side * n + q * l + pos;

    for s in 1..a {
        x.set(VarKey::x(s, s, s + 1), total.clone());
    }
    let fan = &total / rat((2 * p) as i64);
    for side in 0..2 {
        for q in 0..p {
            x.set(VarKey::x(a, a, vnode(side, q, 1)), fan.clone());
        }
    }
    let switch = &fan / rat(p as i64);
    for s in (a + 1)..(a + 2 * n) {
        let cur = ((s - a - 1) % l) + 1;
        let nxt = (cur % l) + 1;
        for side in 0..2 {
            for q in 0..p {
                for q2 in 0..p {
                    x.set(
                        VarKey::x(vnode(side, q, cur), s, vnode(side, q2, nxt)),
                        switch.clone(),
                    );
                }
            }
        }
    }
    // After 2n - 1 switching stages the flow sits at position L of each path.
    let out_first = a + 2 * n + 1;
    for side in 0..2 {
        for q in 0..p {
            x.set(VarKey::x(vnode(side, q, l), a + 2 * n, out_first), fan.clone());
        }
    }
    for s in out_first..count {
        x.set(VarKey::x(s, s, s + 1), total.clone());
    }
    x.set(VarKey::x(count, count, 1), total);
    Ok(x)
}

fn range_of(x: &Assignment) -> u16 {
    x.iter()
        .map(|(k, _)| k.max_node().max(k.max_stage()))
        .max()
        .unwrap_or(0)
}

/// Arcs of an x assignment grouped by stage (index 0 unused).
fn arcs_by_stage(x: &Assignment, r: u16) -> Result<Vec<Vec<Arc>>, Error> {
    let mut by_stage: Vec<Vec<Arc>> = vec![Vec::new(); r as usize + 1];
    for (k, _) in x.iter() {
        match k {
            VarKey::X(a) => by_stage[a.stage as usize].push(*a),
            other => {
                return Err(Error::Validation(format!(
                    "flow construction expects an x assignment, found {other}"
                )))
            }
        }
    }
    for v in &mut by_stage {
        v.sort();
    }
    Ok(by_stage)
}

/// Lifts an x flow to the y dimension: the diagonal copies x, and for every
/// positive arc and every later stage the arc's value is split uniformly over
/// the admissible supported arcs of that stage. A stage with no admissible
/// continuation is a hard construction error (the lift cannot exist).
pub fn construct_y_flow(x: &Assignment, config: &ModelConfig) -> Result<Assignment, Error> {
    let r = range_of(x);
    if r == 0 {
        return Err(Error::Validation("empty x assignment".into()));
    }
    let adm = Admissibility::new(r, config);
    let by_stage = arcs_by_stage(x, r)?;
    let mut y = Assignment::new(x.total_flow().clone());
    for (key, val) in x.iter() {
        let VarKey::X(a) = key else { unreachable!() };
        y.set(VarKey::y_diag(*a), val.clone());
        for p in (a.stage + 1)..=r {
            let cands: Vec<Arc> = by_stage[p as usize]
                .iter()
                .filter(|c| adm.check_y(a.from, a.stage, a.to, c.from, c.stage, c.to))
                .copied()
                .collect();
            if cands.is_empty() {
                return Err(Error::Construction(format!(
                    "no admissible continuation for arc {}_{}_{} at stage {p}",
                    a.from, a.stage, a.to
                )));
            }
            let share = val / rat(cands.len() as i64);
            for c in cands {
                y.set(VarKey::y(*a, c), share.clone());
            }
        }
    }
    Ok(y)
}

/// Lifts further to the z dimension: for every positive off-diagonal y and
/// every stage after its second arc, the y value is split uniformly over the
/// arcs admissible with respect to both conditioning arcs. Returns the merged
/// point (all y records plus all z records), which is what the z model's
/// constraints range over.
pub fn construct_z_flow(
    x: &Assignment,
    y: &Assignment,
    config: &ModelConfig,
) -> Result<Assignment, Error> {
    let r = range_of(x);
    let adm = Admissibility::new(r, config);
    let by_stage = arcs_by_stage(x, r)?;
    let mut out = y.clone();
    for (key, val) in y.iter() {
        let VarKey::Y(a, b) = key else {
            return Err(Error::Validation(format!(
                "construct_z_flow expects a y assignment, found {key}"
            )));
        };
        if a == b {
            continue;
        }
        for s in (b.stage + 1)..=r {
            let cands: Vec<Arc> = by_stage[s as usize]
                .iter()
                .filter(|c| adm.check_z(*a, *b, **c))
                .copied()
                .collect();
            if cands.is_empty() {
                return Err(Error::Construction(format!(
                    "no admissible continuation for pair ({}_{}_{}, {}_{}_{}) at stage {s}",
                    a.from, a.stage, a.to, b.from, b.stage, b.to
                )));
            }
            let share = val / rat(cands.len() as i64);
            for c in cands {
                out.set(VarKey::z(*a, *b, c), share.clone());
            }
        }
    }
    Ok(out)
}

/// Crossing arithmetic for a valley family: the combined fractional
/// construction crosses each of the `3·pairs` band boundaries once at full
/// aggregate weight (the within-pair boundary is the one the half-split
/// avoids), while any tour must additionally cross inside every pair, giving
/// `3·pairs + 1` crossings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossingReport {
    /// Number of boundary-crossing events in the fractional schedule; each
    /// event's arc values sum to the total flow, so this is also the total
    /// crossing weight in flow units.
    pub fractional_crossings: u64,
    /// Structural lower bound on tour crossings = valley count.
    pub integral_crossings: u64,
    pub note: String,
}

pub fn crossing_schedule(spec: &ValleySpec) -> Result<CrossingReport, Error> {
    spec.validate()?;
    let g = spec.pairs as u64;
    Ok(CrossingReport {
        fractional_crossings: 3 * g,
        integral_crossings: 3 * g + 1,
        note: format!(
            "per pair: entry, pair-exit and petal-exit boundaries carry full \
             flow in aggregate ({} events of weight total_flow); a tour must \
             also cross inside each of the {g} pairs, so it needs at least {} \
             crossings (one per valley)",
            3 * g,
            3 * g + 1
        ),
    })
}

/// Expected crossing count of an optimal tour read back from an oracle cost:
/// `cost = crossings * cross_cost + (n - crossings) * in_cost`.
pub fn crossings_from_cost(spec: &ValleySpec, optimal_cost: i64) -> Result<i64, Error> {
    let n = spec.node_count() as i64;
    let delta = spec.cross_cost - spec.in_cost;
    let num = optimal_cost - n * spec.in_cost;
    if delta <= 0 || num % delta != 0 {
        return Err(Error::Validation(format!(
            "cost {optimal_cost} is not of the form crossings * {} + rest * {}",
            spec.cross_cost, spec.in_cost
        )));
    }
    Ok(num / delta)
}
